//! Simulated execution of a probe trajectory over a phantom surface:
//! contact-loss detection, coverage accounting, and the imaging-element
//! track.
//!
//! Detachment is modelled purely geometrically: the probe follows the
//! planned waypoints and loses contact at the first waypoint whose
//! deviation from the true surface exceeds a threshold. Deviation is
//! measured along the surface height direction, so a straight trajectory
//! over a circular surface of radius R accumulates the sagitta
//! `d(s) = R − √(R² − s²)`. No force or suction mechanics is modelled.
//!
//! The ultrasound element sits a fixed distance from the rail contact
//! point along the probe axis; its track is reported for every waypoint of
//! the plan because imaging can outlive rail contact.

use nalgebra::{Point3, Vector3};
use thiserror::Error;

use crate::phantoms::PhantomSpec;
use crate::phantoms::RailSpec;
use crate::shape::ScanTrajectory;

/// Default distance from the rail contact point to the ultrasound imaging
/// element, mm.
pub const DEFAULT_PROBE_ELEMENT_OFFSET_MM: f64 = 30.0;

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("trajectory frame {trajectory:?} does not match surface frame {surface:?}")]
    FrameMismatch { trajectory: String, surface: String },
    #[error("invalid scan scenario: {0}")]
    InvalidScenario(String),
    #[error("reports come from different phantoms: {a:?} vs {b:?}")]
    PhantomMismatch { a: String, b: String },
}

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

/// Continuous surface description as a height field `y(x)` extruded along
/// z (the scan plane is xy; waypoints keep constant z).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Surface {
    /// Flat surface at a fixed height.
    Plane { height_mm: f64 },
    /// Circular arc of radius R tangent to y = 0 at the origin, curving
    /// toward +y: `y(x) = R − √(R² − x²)`. Outside |x| ≤ R the height
    /// clamps at the crown value R.
    CircularArc { radius_mm: f64 },
    /// Convex superellipse profile with apex at the origin:
    /// `y(x) = b·(1 − (1 − |x/a|ⁿ)^(1/n))`, clamped to b outside |x| ≤ a.
    SuperellipseProfile {
        semi_axis_mm: f64,
        height_mm: f64,
        exponent: f64,
    },
}

impl Surface {
    /// Surface height at planform coordinate `x`, mm.
    pub fn height_at(&self, x_mm: f64) -> f64 {
        match *self {
            Surface::Plane { height_mm } => height_mm,
            Surface::CircularArc { radius_mm } => {
                if x_mm.abs() >= radius_mm {
                    radius_mm
                } else {
                    radius_mm - (radius_mm * radius_mm - x_mm * x_mm).sqrt()
                }
            }
            Surface::SuperellipseProfile {
                semi_axis_mm,
                height_mm,
                exponent,
            } => {
                let t = (x_mm / semi_axis_mm).abs();
                if t >= 1.0 {
                    height_mm
                } else {
                    height_mm * (1.0 - (1.0 - t.powf(exponent)).powf(1.0 / exponent))
                }
            }
        }
    }

    /// Surface slope dy/dx at `x`, mm/mm (0 in clamped regions).
    pub fn slope_at(&self, x_mm: f64) -> f64 {
        match *self {
            Surface::Plane { .. } => 0.0,
            Surface::CircularArc { radius_mm } => {
                if x_mm.abs() >= radius_mm {
                    0.0
                } else {
                    x_mm / (radius_mm * radius_mm - x_mm * x_mm).sqrt()
                }
            }
            Surface::SuperellipseProfile {
                semi_axis_mm,
                height_mm,
                exponent,
            } => {
                let t = (x_mm / semi_axis_mm).abs();
                if t >= 1.0 || t == 0.0 {
                    0.0
                } else {
                    let u = t.powf(exponent);
                    height_mm
                        * t.powf(exponent - 1.0)
                        * x_mm.signum()
                        * (1.0 - u).powf(1.0 / exponent - 1.0)
                        / semi_axis_mm
                }
            }
        }
    }

    /// Unit outward normal of the height field at `x` (in the xy-plane).
    pub fn normal_at(&self, x_mm: f64) -> Vector3<f64> {
        let slope = self.slope_at(x_mm);
        let n = Vector3::new(-slope, 1.0, 0.0);
        n / n.norm()
    }
}

/// A surface with its declared coordinate frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueSurface {
    pub geometry: Surface,
    pub frame: String,
}

impl TrueSurface {
    pub fn new(geometry: Surface) -> Self {
        Self {
            geometry,
            frame: "base".to_string(),
        }
    }

    pub fn in_frame(mut self, frame: &str) -> Self {
        self.frame = frame.to_string();
        self
    }
}

// ---------------------------------------------------------------------------
// Scenario and report
// ---------------------------------------------------------------------------

/// Everything needed to execute one simulated scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanScenario {
    pub phantom: PhantomSpec,
    pub rail: RailSpec,
    pub trajectory: ScanTrajectory,
    /// Distance from the rail contact point to the imaging element, mm.
    pub probe_element_offset_mm: f64,
    /// Deviation at which the probe is considered detached, mm. May be
    /// infinite (never detaches).
    pub detach_threshold_mm: f64,
    /// Flags describing synthetic models that shaped this scenario
    /// (propagated into the report).
    pub synthetic_flags: Vec<String>,
}

impl ScanScenario {
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.probe_element_offset_mm < 0.0 {
            return Err(ScanError::InvalidScenario(
                "probe_element_offset_mm must be non-negative".into(),
            ));
        }
        if self.detach_threshold_mm.is_nan() || self.detach_threshold_mm <= 0.0 {
            return Err(ScanError::InvalidScenario(
                "detach_threshold_mm must be positive".into(),
            ));
        }
        if self.trajectory.poses.len() < 2 {
            return Err(ScanError::InvalidScenario(
                "trajectory needs at least two poses".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one simulated scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    /// Label of the phantom the scan ran on (for comparisons).
    pub phantom_label: String,
    /// Arc length over which the probe stayed in contact, mm.
    pub contact_length_mm: f64,
    /// Index of the first waypoint whose deviation exceeded the threshold;
    /// `None` when contact was never lost.
    pub detach_index: Option<usize>,
    /// Maximum surface deviation over the walked portion, mm.
    pub max_surface_deviation_mm: f64,
    /// Imaging-element positions for every waypoint of the plan, mm.
    pub element_track: Vec<Point3<f64>>,
    /// Synthetic-model flags inherited from the scenario.
    pub synthetic_flags: Vec<String>,
}

/// Differences between two scan reports on the same phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanComparison {
    /// `a.contact_length_mm − b.contact_length_mm`.
    pub contact_length_delta_mm: f64,
    /// `a.max_surface_deviation_mm − b.max_surface_deviation_mm`.
    pub max_deviation_delta_mm: f64,
    pub detach_index_a: Option<usize>,
    pub detach_index_b: Option<usize>,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Walks the trajectory over the true surface, detecting contact loss.
///
/// Waypoints are visited in order; the deviation at each is the absolute
/// height-direction distance to the surface. The first waypoint whose
/// deviation exceeds the threshold sets `detach_index`, and the contact
/// length is the arc length up to the last waypoint still in contact. The
/// element track offsets every waypoint by `probe_element_offset_mm` along
/// the surface normal projected perpendicular to the local travel
/// direction.
pub fn execute_scan(
    scenario: &ScanScenario,
    true_surface: &TrueSurface,
) -> Result<ScanReport, ScanError> {
    scenario.validate()?;
    if scenario.trajectory.frame != true_surface.frame {
        return Err(ScanError::FrameMismatch {
            trajectory: scenario.trajectory.frame.clone(),
            surface: true_surface.frame.clone(),
        });
    }

    let poses = &scenario.trajectory.poses;
    let cumulative = scenario.trajectory.cumulative_lengths_mm();
    let surface = &true_surface.geometry;

    let mut detach_index = None;
    let mut max_deviation = 0.0_f64;
    for (i, pose) in poses.iter().enumerate() {
        let deviation = (pose.position.y - surface.height_at(pose.position.x)).abs();
        max_deviation = max_deviation.max(deviation);
        if deviation > scenario.detach_threshold_mm {
            detach_index = Some(i);
            break;
        }
    }
    let contact_length = match detach_index {
        Some(0) => 0.0,
        Some(i) => cumulative[i - 1],
        None => *cumulative.last().unwrap(),
    };

    let element_track = poses
        .iter()
        .enumerate()
        .map(|(i, pose)| {
            let tangent = travel_direction(poses, i);
            let normal = surface.normal_at(pose.position.x);
            let mut lateral = normal - tangent * normal.dot(&tangent);
            if lateral.norm() < 1e-12 {
                lateral = Vector3::y() - tangent * tangent.y;
            }
            let direction = lateral / lateral.norm();
            pose.position + direction * scenario.probe_element_offset_mm
        })
        .collect();

    Ok(ScanReport {
        phantom_label: scenario.phantom.label(),
        contact_length_mm: contact_length,
        detach_index,
        max_surface_deviation_mm: max_deviation,
        element_track,
        synthetic_flags: scenario.synthetic_flags.clone(),
    })
}

fn travel_direction(poses: &[crate::shape::Pose], i: usize) -> Vector3<f64> {
    let n = poses.len();
    let (a, b) = if i == 0 {
        (0, 1)
    } else if i == n - 1 {
        (n - 2, n - 1)
    } else {
        (i - 1, i + 1)
    };
    let d = poses[b].position - poses[a].position;
    let norm = d.norm();
    if norm > 0.0 {
        d / norm
    } else {
        Vector3::x()
    }
}

/// Coverage comparison of two scans over the same phantom.
pub fn compare_scans(a: &ScanReport, b: &ScanReport) -> Result<ScanComparison, ScanError> {
    if a.phantom_label != b.phantom_label {
        return Err(ScanError::PhantomMismatch {
            a: a.phantom_label.clone(),
            b: b.phantom_label.clone(),
        });
    }
    Ok(ScanComparison {
        contact_length_delta_mm: a.contact_length_mm - b.contact_length_mm,
        max_deviation_delta_mm: a.max_surface_deviation_mm - b.max_surface_deviation_mm,
        detach_index_a: a.detach_index,
        detach_index_b: b.detach_index,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
