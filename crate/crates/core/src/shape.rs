//! Planar shape integration and probe trajectory generation.
//!
//! A curvature profile is integrated into a 2-D shape by piecewise-constant-
//! curvature arcs: every sample contributes one circular arc of length
//! `segment_length`, which is exact for a fibre whose gratings each report
//! one curvature per spacing interval. The canonical frame starts at the
//! origin with tangent angle 0; bend directions must lie in the shape plane
//! (φ near 0 or π), and out-of-plane profiles fail loudly rather than being
//! silently projected.
//!
//! The planar shape is lifted to a 3-D pose trajectory by composing each
//! point with an attach pose (the probe pairing pose in the robot base
//! frame); no displacement is assumed along the local z-direction, and each
//! waypoint's orientation aligns the probe axis with the local shape
//! tangent. A resampler produces arc-length-uniform waypoints for
//! controllers that want a fixed step; the endpoint is always kept even
//! when the final interval comes out short.

use nalgebra::{Point2, Point3, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::reconstruct::CurvatureProfile;

/// Default tolerance for accepting a bend direction as in-plane, rad.
pub const DEFAULT_PLANARITY_TOLERANCE_RAD: f64 = 0.1;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("profile is empty")]
    EmptyProfile,
    #[error("segment length must be positive, got {0} mm")]
    NonPositiveSegment(f64),
    #[error(
        "bend direction {phi_rad} rad at sample {index} is out of plane \
         (must be within {tolerance_rad} rad of 0 or π)"
    )]
    PlanarityViolation {
        index: usize,
        phi_rad: f64,
        tolerance_rad: f64,
    },
    #[error("sample {index} has κ > 0 but no defined bend direction")]
    UndefinedDirection { index: usize },
    #[error("resample spacing must be positive, got {0} mm")]
    NonPositiveSpacing(f64),
    #[error("resample spacing {spacing_mm} mm exceeds trajectory length {total_mm} mm")]
    SpacingTooLarge { spacing_mm: f64, total_mm: f64 },
    #[error("trajectory has fewer than two poses")]
    DegenerateTrajectory,
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Integrated 2-D shape in its canonical frame (origin start, zero initial
/// tangent). `points` has one more entry than the profile had samples;
/// `tangents[i]` is the heading at `points[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarShape {
    pub points: Vec<Point2<f64>>,
    pub tangents_rad: Vec<f64>,
    /// Total arc length, mm: sample count × segment length, exactly.
    pub arc_length_mm: f64,
    /// Digest of the source curvature profile, carried for provenance.
    pub source_profile_hash: String,
}

/// A 3-D pose: position in mm plus a unit-quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Point3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Point3::origin(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn from_translation(x_mm: f64, y_mm: f64, z_mm: f64) -> Self {
        Self {
            position: Point3::new(x_mm, y_mm, z_mm),
            orientation: UnitQuaternion::identity(),
        }
    }

    /// Applies this pose as a rigid transform to a point.
    pub fn transform_point(&self, p: &Point3<f64>) -> Point3<f64> {
        self.position + self.orientation.transform_vector(&p.coords)
    }

    /// Composes `self ∘ other` (apply `other` first, then `self`).
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.transform_point(&other.position),
            orientation: self.orientation * other.orientation,
        }
    }
}

/// Ordered waypoint poses for the probe along the sensed rail shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanTrajectory {
    pub poses: Vec<Pose>,
    /// Nominal arc-length spacing between consecutive waypoints, mm. After
    /// [`resample`] the chord distances equal this value within 1e−6 mm,
    /// except possibly the final appended interval (see the final-point
    /// rule).
    pub spacing_mm: f64,
    /// Digest of the curvature profile this trajectory derives from.
    pub source_profile_hash: String,
    /// Declared coordinate frame, checked by the scan executor.
    pub frame: String,
}

impl ScanTrajectory {
    /// Total chord length of the waypoint polyline, mm.
    pub fn arc_length_mm(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .sum()
    }

    /// Cumulative chord length up to each waypoint, mm.
    pub fn cumulative_lengths_mm(&self) -> Vec<f64> {
        let mut cumulative = Vec::with_capacity(self.poses.len());
        let mut total = 0.0;
        cumulative.push(0.0);
        for w in self.poses.windows(2) {
            total += (w[1].position - w[0].position).norm();
            cumulative.push(total);
        }
        cumulative
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Integrates a curvature profile into a planar shape using the default
/// planarity tolerance.
pub fn integrate_shape(
    profile: &CurvatureProfile,
    segment_length_mm: f64,
) -> Result<PlanarShape, ShapeError> {
    integrate_shape_with_tolerance(profile, segment_length_mm, DEFAULT_PLANARITY_TOLERANCE_RAD)
}

/// Integrates a curvature profile into a planar shape.
///
/// Starting at the origin with tangent 0, each sample advances one circular
/// arc of signed curvature (φ near 0 → positive, φ near π → negative) and
/// length `segment_length_mm`. The closed-form arc step is exact per
/// segment: the total turning angle equals Σ signed κᵢ·Δs.
pub fn integrate_shape_with_tolerance(
    profile: &CurvatureProfile,
    segment_length_mm: f64,
    planarity_tolerance_rad: f64,
) -> Result<PlanarShape, ShapeError> {
    if profile.samples.is_empty() {
        return Err(ShapeError::EmptyProfile);
    }
    if segment_length_mm <= 0.0 {
        return Err(ShapeError::NonPositiveSegment(segment_length_mm));
    }

    let mut points = Vec::with_capacity(profile.samples.len() + 1);
    let mut tangents = Vec::with_capacity(profile.samples.len() + 1);
    points.push(Point2::origin());
    tangents.push(0.0);

    let mut heading = 0.0_f64;
    let mut position = Point2::origin();
    for (index, sample) in profile.samples.iter().enumerate() {
        let signed_kappa = signed_curvature(sample, index, planarity_tolerance_rad)?;
        let turn = signed_kappa * segment_length_mm;
        let mid_heading = heading + 0.5 * turn;
        let chord = segment_length_mm * sinc(0.5 * turn);
        position += nalgebra::Vector2::new(chord * mid_heading.cos(), chord * mid_heading.sin());
        heading += turn;
        points.push(position);
        tangents.push(heading);
    }

    Ok(PlanarShape {
        points,
        tangents_rad: tangents,
        arc_length_mm: profile.samples.len() as f64 * segment_length_mm,
        source_profile_hash: profile.digest(),
    })
}

fn signed_curvature(
    sample: &crate::fiber::CurvatureSample,
    index: usize,
    tolerance_rad: f64,
) -> Result<f64, ShapeError> {
    if sample.kappa_per_mm == 0.0 {
        return Ok(0.0);
    }
    if !sample.direction_defined {
        return Err(ShapeError::UndefinedDirection { index });
    }
    let phi = sample.bend_direction_rad;
    let to_zero = phi.min(std::f64::consts::TAU - phi);
    let to_pi = (phi - std::f64::consts::PI).abs();
    if to_zero <= tolerance_rad {
        Ok(sample.kappa_per_mm)
    } else if to_pi <= tolerance_rad {
        Ok(-sample.kappa_per_mm)
    } else {
        Err(ShapeError::PlanarityViolation {
            index,
            phi_rad: phi,
            tolerance_rad,
        })
    }
}

/// `sin(x)/x`, stable near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Lifts a planar shape into a 3-D waypoint trajectory.
///
/// Each shape point `(x, y)` maps to `attach ∘ (x, y, 0)`; the waypoint
/// orientation aligns the probe axis with the local shape tangent, rotated
/// from the attach orientation. The local z-coordinate is constant by
/// construction (the shape lies in the attach plane).
pub fn shape_to_trajectory(shape: &PlanarShape, attach_pose: &Pose) -> ScanTrajectory {
    let poses = shape
        .points
        .iter()
        .zip(&shape.tangents_rad)
        .map(|(p, &tangent)| Pose {
            position: attach_pose.transform_point(&Point3::new(p.x, p.y, 0.0)),
            orientation: attach_pose.orientation
                * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), tangent),
        })
        .collect::<Vec<_>>();
    let segments = (shape.points.len() - 1).max(1);
    ScanTrajectory {
        poses,
        spacing_mm: shape.arc_length_mm / segments as f64,
        source_profile_hash: shape.source_profile_hash.clone(),
        frame: "base".to_string(),
    }
}

/// Resamples a trajectory at uniform arc-length spacing.
///
/// Positions are linearly interpolated and orientations spherically
/// interpolated along the waypoint polyline. Both endpoints are preserved;
/// when the spacing does not divide the total length, the endpoint is
/// appended and the final interval is shorter than `spacing_mm`.
pub fn resample(traj: &ScanTrajectory, spacing_mm: f64) -> Result<ScanTrajectory, ShapeError> {
    if spacing_mm <= 0.0 {
        return Err(ShapeError::NonPositiveSpacing(spacing_mm));
    }
    if traj.poses.len() < 2 {
        return Err(ShapeError::DegenerateTrajectory);
    }
    let cumulative = traj.cumulative_lengths_mm();
    let total = *cumulative.last().unwrap();
    if spacing_mm > total * (1.0 + 1e-9) {
        return Err(ShapeError::SpacingTooLarge {
            spacing_mm,
            total_mm: total,
        });
    }

    let n_full = ((total / spacing_mm) * (1.0 + 1e-12) + 1e-9).floor() as usize;
    let mut poses = Vec::with_capacity(n_full + 2);
    for k in 0..=n_full {
        let target = k as f64 * spacing_mm;
        if target >= total - 1e-9 {
            poses.push(*traj.poses.last().unwrap());
        } else {
            poses.push(pose_at_arc_length(traj, &cumulative, target));
        }
    }
    let last_target = n_full as f64 * spacing_mm;
    if last_target < total - 1e-9 {
        poses.push(*traj.poses.last().unwrap());
    }

    Ok(ScanTrajectory {
        poses,
        spacing_mm,
        source_profile_hash: traj.source_profile_hash.clone(),
        frame: traj.frame.clone(),
    })
}

fn pose_at_arc_length(traj: &ScanTrajectory, cumulative: &[f64], target: f64) -> Pose {
    // Binary search for the bracketing segment.
    let seg = match cumulative.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
        Ok(i) => i.min(cumulative.len() - 2),
        Err(i) => i.saturating_sub(1).min(cumulative.len() - 2),
    };
    let span = cumulative[seg + 1] - cumulative[seg];
    let u = if span > 0.0 {
        ((target - cumulative[seg]) / span).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let a = &traj.poses[seg];
    let b = &traj.poses[seg + 1];
    Pose {
        position: a.position + (b.position - a.position) * u,
        orientation: a
            .orientation
            .try_slerp(&b.orientation, u, 1e-12)
            .unwrap_or(a.orientation),
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
