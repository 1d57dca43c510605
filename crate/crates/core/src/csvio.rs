//! Wire formats: the CSV schemas every tool in the chain reads and writes.
//!
//! All files are UTF-8 with LF line endings. Floating-point values are
//! written in Rust's shortest round-trip decimal form, which preserves the
//! exact `f64` (parsing the text reproduces the value bit-for-bit), so
//! replaying an exported log is lossless.
//!
//! Formats:
//!
//! - wavelength log: `timestamp_s,grating_index,core_index,wavelength_nm`,
//!   one row per (grating, core) per frame. This is also the ingestion
//!   format for real interrogator exports.
//! - curvature profile:
//!   `grating_index,axial_position_mm,kappa_per_mm,phi_rad,direction_defined`.
//! - trajectory: a `#`-prefixed metadata block (schema, spacing, source
//!   profile hash, frame, attach pose) followed by
//!   `index,x_mm,y_mm,z_mm,qx,qy,qz,qw`.
//! - element track: `index,x_mm,y_mm,z_mm`.
//! - stress-strain curve: `strain,stress_mpa`.

use nalgebra::{DMatrix, Point3, Quaternion, UnitQuaternion};
use thiserror::Error;

use crate::fiber::{CurvatureSample, WavelengthFrame, DEFAULT_FRAME_RATE_HZ};
use crate::materials::StressStrainCurve;
use crate::reconstruct::CurvatureProfile;
use crate::shape::{Pose, ScanTrajectory};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("expected header {expected:?}, got {got:?}")]
    Header { expected: String, got: String },
    #[error("incomplete data: {0}")]
    Incomplete(String),
    #[error(transparent)]
    Material(#[from] crate::materials::MaterialError),
    #[error(transparent)]
    Fiber(#[from] crate::fiber::FiberError),
}

pub const WAVELENGTH_LOG_HEADER: &str = "timestamp_s,grating_index,core_index,wavelength_nm";
pub const PROFILE_HEADER: &str =
    "grating_index,axial_position_mm,kappa_per_mm,phi_rad,direction_defined";
pub const TRAJECTORY_HEADER: &str = "index,x_mm,y_mm,z_mm,qx,qy,qz,qw";
pub const ELEMENT_TRACK_HEADER: &str = "index,x_mm,y_mm,z_mm";
pub const STRESS_STRAIN_HEADER: &str = "strain,stress_mpa";

// ---------------------------------------------------------------------------
// Wavelength logs
// ---------------------------------------------------------------------------

/// Serialises frames to the wavelength-log format: rows ordered by frame,
/// then grating, then core.
pub fn write_wavelength_log(frames: &[WavelengthFrame]) -> String {
    let mut out = String::with_capacity(frames.len() * 64);
    out.push_str(WAVELENGTH_LOG_HEADER);
    out.push('\n');
    for frame in frames {
        let (gratings, cores) = frame.wavelengths.shape();
        for g in 0..gratings {
            for c in 0..cores {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    frame.timestamp_s,
                    g,
                    c,
                    frame.wavelengths[(g, c)]
                ));
            }
        }
    }
    out
}

/// Parses a wavelength log back into frames.
///
/// Rows are grouped into frames by consecutive runs of equal timestamps;
/// every frame must cover the full (grating, core) grid exactly once. The
/// frame rate is inferred from the first timestamp step (default 100 Hz for
/// single-frame logs).
pub fn parse_wavelength_log(text: &str) -> Result<Vec<WavelengthFrame>, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CsvError::Incomplete("empty file".into()))?;
    if header.trim_end() != WAVELENGTH_LOG_HEADER {
        return Err(CsvError::Header {
            expected: WAVELENGTH_LOG_HEADER.into(),
            got: header.to_string(),
        });
    }

    struct Row {
        line: usize,
        timestamp: f64,
        grating: usize,
        core: usize,
        wavelength: f64,
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CsvError::Parse {
                line: line_no,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        rows.push(Row {
            line: line_no,
            timestamp: parse_f64(fields[0], line_no, "timestamp_s")?,
            grating: parse_usize(fields[1], line_no, "grating_index")?,
            core: parse_usize(fields[2], line_no, "core_index")?,
            wavelength: parse_f64(fields[3], line_no, "wavelength_nm")?,
        });
    }
    if rows.is_empty() {
        return Err(CsvError::Incomplete("log contains no data rows".into()));
    }

    let gratings = rows.iter().map(|r| r.grating).max().unwrap() + 1;
    let cores = rows.iter().map(|r| r.core).max().unwrap() + 1;
    let per_frame = gratings * cores;

    // Split into frames on timestamp change.
    let mut groups: Vec<Vec<&Row>> = Vec::new();
    for row in &rows {
        let start_new = groups
            .last()
            .and_then(|g| g.first())
            .is_none_or(|first| first.timestamp != row.timestamp);
        if start_new {
            groups.push(Vec::with_capacity(per_frame));
        }
        groups.last_mut().unwrap().push(row);
    }

    let frame_rate = if groups.len() >= 2 {
        let dt = groups[1][0].timestamp - groups[0][0].timestamp;
        if dt > 0.0 {
            1.0 / dt
        } else {
            DEFAULT_FRAME_RATE_HZ
        }
    } else {
        DEFAULT_FRAME_RATE_HZ
    };

    let mut frames = Vec::with_capacity(groups.len());
    for group in groups {
        let mut matrix = DMatrix::from_element(gratings, cores, f64::NAN);
        for row in &group {
            if !matrix[(row.grating, row.core)].is_nan() {
                return Err(CsvError::Parse {
                    line: row.line,
                    msg: format!(
                        "duplicate channel (grating {}, core {}) within one frame",
                        row.grating, row.core
                    ),
                });
            }
            matrix[(row.grating, row.core)] = row.wavelength;
        }
        if matrix.iter().any(|v| v.is_nan()) {
            return Err(CsvError::Incomplete(format!(
                "frame at t = {} covers {} of {} channels",
                group[0].timestamp,
                group.len(),
                per_frame
            )));
        }
        frames.push(WavelengthFrame {
            timestamp_s: group[0].timestamp,
            wavelengths: matrix,
            frame_rate_hz: frame_rate,
        });
    }
    Ok(frames)
}

// ---------------------------------------------------------------------------
// Curvature profiles
// ---------------------------------------------------------------------------

pub fn write_profile(profile: &CurvatureProfile) -> String {
    let mut out = String::new();
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for (&g, s) in profile.grating_indices.iter().zip(&profile.samples) {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g, s.axial_position_mm, s.kappa_per_mm, s.bend_direction_rad, s.direction_defined
        ));
    }
    out
}

/// Parses a profile CSV. Batch metadata (frame counts, rejections) is not
/// part of the wire format, so the returned profile reports zero source
/// frames.
pub fn parse_profile(text: &str) -> Result<CurvatureProfile, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CsvError::Incomplete("empty file".into()))?;
    if header.trim_end() != PROFILE_HEADER {
        return Err(CsvError::Header {
            expected: PROFILE_HEADER.into(),
            got: header.to_string(),
        });
    }
    let mut grating_indices = Vec::new();
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(CsvError::Parse {
                line: line_no,
                msg: format!("expected 5 fields, got {}", fields.len()),
            });
        }
        grating_indices.push(parse_usize(fields[0], line_no, "grating_index")?);
        let axial = parse_f64(fields[1], line_no, "axial_position_mm")?;
        let kappa = parse_f64(fields[2], line_no, "kappa_per_mm")?;
        let phi = parse_f64(fields[3], line_no, "phi_rad")?;
        let defined = match fields[4].trim() {
            "true" => true,
            "false" => false,
            other => {
                return Err(CsvError::Parse {
                    line: line_no,
                    msg: format!("direction_defined must be true/false, got {other:?}"),
                })
            }
        };
        samples.push(CurvatureSample {
            axial_position_mm: axial,
            kappa_per_mm: kappa,
            bend_direction_rad: phi,
            direction_defined: defined,
        });
    }
    if samples.is_empty() {
        return Err(CsvError::Incomplete("profile contains no samples".into()));
    }
    Ok(CurvatureProfile {
        grating_indices,
        samples,
        source_frame_count: 0,
        rejected_frame_indices: vec![],
    })
}

// ---------------------------------------------------------------------------
// Trajectories
// ---------------------------------------------------------------------------

/// Serialises a trajectory with its metadata sidecar block.
pub fn write_trajectory(traj: &ScanTrajectory, attach_pose: Option<&Pose>) -> String {
    let mut out = String::new();
    out.push_str("# railsense trajectory v1\n");
    out.push_str(&format!("# spacing_mm={}\n", traj.spacing_mm));
    out.push_str(&format!(
        "# source_profile_hash={}\n",
        traj.source_profile_hash
    ));
    out.push_str(&format!("# frame={}\n", traj.frame));
    if let Some(p) = attach_pose {
        let q = p.orientation.quaternion();
        out.push_str(&format!(
            "# attach_pose={},{},{},{},{},{},{}\n",
            p.position.x, p.position.y, p.position.z, q.i, q.j, q.k, q.w
        ));
    }
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (i, pose) in traj.poses.iter().enumerate() {
        let q = pose.orientation.quaternion();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            i, pose.position.x, pose.position.y, pose.position.z, q.i, q.j, q.k, q.w
        ));
    }
    out
}

pub fn parse_trajectory(text: &str) -> Result<ScanTrajectory, CsvError> {
    let mut spacing = f64::NAN;
    let mut hash = String::new();
    let mut frame = "base".to_string();
    let mut poses = Vec::new();
    let mut saw_header = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some(v) = meta.strip_prefix("spacing_mm=") {
                spacing = parse_f64(v, line_no, "spacing_mm")?;
            } else if let Some(v) = meta.strip_prefix("source_profile_hash=") {
                hash = v.to_string();
            } else if let Some(v) = meta.strip_prefix("frame=") {
                frame = v.to_string();
            }
            continue;
        }
        if !saw_header {
            if line.trim_end() != TRAJECTORY_HEADER {
                return Err(CsvError::Header {
                    expected: TRAJECTORY_HEADER.into(),
                    got: line.to_string(),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(CsvError::Parse {
                line: line_no,
                msg: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let x = parse_f64(fields[1], line_no, "x_mm")?;
        let y = parse_f64(fields[2], line_no, "y_mm")?;
        let z = parse_f64(fields[3], line_no, "z_mm")?;
        let qx = parse_f64(fields[4], line_no, "qx")?;
        let qy = parse_f64(fields[5], line_no, "qy")?;
        let qz = parse_f64(fields[6], line_no, "qz")?;
        let qw = parse_f64(fields[7], line_no, "qw")?;
        poses.push(Pose {
            position: Point3::new(x, y, z),
            orientation: UnitQuaternion::from_quaternion(Quaternion::new(qw, qx, qy, qz)),
        });
    }
    if poses.is_empty() {
        return Err(CsvError::Incomplete("trajectory contains no poses".into()));
    }
    if spacing.is_nan() {
        return Err(CsvError::Incomplete("missing spacing_mm metadata".into()));
    }
    Ok(ScanTrajectory {
        poses,
        spacing_mm: spacing,
        source_profile_hash: hash,
        frame,
    })
}

// ---------------------------------------------------------------------------
// Element tracks and stress-strain curves
// ---------------------------------------------------------------------------

pub fn write_element_track(track: &[Point3<f64>]) -> String {
    let mut out = String::new();
    out.push_str(ELEMENT_TRACK_HEADER);
    out.push('\n');
    for (i, p) in track.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", i, p.x, p.y, p.z));
    }
    out
}

pub fn write_stress_strain(curve: &StressStrainCurve) -> String {
    let mut out = String::new();
    out.push_str(STRESS_STRAIN_HEADER);
    out.push('\n');
    for &(strain, stress) in &curve.samples {
        out.push_str(&format!("{strain},{stress}\n"));
    }
    out
}

/// Parses a stress-strain CSV. When `max_compression` is not supplied, the
/// final strain value is used.
pub fn parse_stress_strain(
    text: &str,
    max_compression: Option<f64>,
) -> Result<StressStrainCurve, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CsvError::Incomplete("empty file".into()))?;
    if header.trim_end() != STRESS_STRAIN_HEADER {
        return Err(CsvError::Header {
            expected: STRESS_STRAIN_HEADER.into(),
            got: header.to_string(),
        });
    }
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(CsvError::Parse {
                line: line_no,
                msg: format!("expected 2 fields, got {}", fields.len()),
            });
        }
        samples.push((
            parse_f64(fields[0], line_no, "strain")?,
            parse_f64(fields[1], line_no, "stress_mpa")?,
        ));
    }
    if samples.is_empty() {
        return Err(CsvError::Incomplete("curve contains no samples".into()));
    }
    let max_c = max_compression.unwrap_or(samples.last().unwrap().0);
    Ok(StressStrainCurve::new(samples, max_c)?)
}

// ---------------------------------------------------------------------------
// Field parsing helpers
// ---------------------------------------------------------------------------

fn parse_f64(field: &str, line: usize, name: &str) -> Result<f64, CsvError> {
    field.trim().parse::<f64>().map_err(|e| CsvError::Parse {
        line,
        msg: format!("field {name}: {e}"),
    })
}

fn parse_usize(field: &str, line: usize, name: &str) -> Result<usize, CsvError> {
    field.trim().parse::<usize>().map_err(|e| CsvError::Parse {
        line,
        msg: format!("field {name}: {e}"),
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
