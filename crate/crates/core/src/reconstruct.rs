//! Inverse pipeline: wavelength frames → strains → per-grating curvature →
//! batch-averaged curvature profiles with outlier rejection.
//!
//! Per grating, the strains of the selected cores are fitted to
//!
//! ```text
//! ε_i = a·cos θ_i + b·sin θ_i + c,   a = −κ r cos φ,  b = −κ r sin φ
//! ```
//!
//! by linear least squares. The intercept `c` absorbs common-mode shifts
//! (temperature) regardless of whether a central core exists; with exactly
//! three cores the intercept is dropped, since three observations cannot
//! support the full three-parameter model robustly — a documented
//! behavioural difference. Curvature magnitude and bend direction follow as
//! `κ = √(a² + b²) / r` and `φ = atan2(−b, −a)`.
//!
//! Batch averaging mirrors the acquisition protocol: a batch of frames is
//! reconstructed frame by frame, defective frames are rejected by a
//! median ± k·MAD rule per grating, and the survivors are averaged
//! (arithmetic mean for κ, κ-weighted circular mean for φ).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fiber::{
    normalize_angle, CurvatureSample, FiberSpec, WavelengthFrame, SMALL_STRAIN_LIMIT,
};

/// MAD-to-sigma scale for a normal distribution.
pub const MAD_SCALE: f64 = 1.4826;

/// Default rejection multiplier: a frame is defective when any grating
/// deviates from the per-grating median by more than `k × MAD`.
pub const DEFAULT_OUTLIER_K: f64 = 5.0;

/// Absolute floor on the scaled MAD, 1/mm, guarding the zero-MAD case.
pub const DEFAULT_MAD_FLOOR_PER_MM: f64 = 1e-6;

/// Below this many frames, rejection statistics are unreliable and the
/// rejection step is skipped.
pub const MIN_FRAMES_FOR_REJECTION: usize = 5;

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("need at least {needed} cores for a curvature fit, got {got}")]
    InsufficientCores { needed: usize, got: usize },
    #[error("core angle set is rank deficient (all angles equal mod π)")]
    RankDeficientAngles,
    #[error("no frames provided")]
    NoFrames,
    #[error("frame {index} is {got_rows}×{got_cols} but expected {rows}×{cols}")]
    FrameDimensionMismatch {
        index: usize,
        got_rows: usize,
        got_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("grating subset is empty")]
    EmptyGratingSubset,
    #[error("grating subset must be strictly increasing and within 0..{max}: {msg}")]
    InvalidGratingSubset { max: usize, msg: String },
    #[error("core subset invalid: {0}")]
    InvalidCoreSubset(String),
    #[error("all {0} frames were rejected as outliers; no valid data")]
    AllFramesRejected(usize),
    #[error("strain {strain} at grating {grating_index}, core {core_index} outside |ε| < {limit}")]
    StrainOutOfRange {
        strain: f64,
        grating_index: usize,
        core_index: usize,
        limit: f64,
    },
    #[error(transparent)]
    Fiber(#[from] crate::fiber::FiberError),
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One converted strain observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrainSample {
    pub grating_index: usize,
    pub core_index: usize,
    /// Dimensionless strain, |ε| < 0.01.
    pub strain: f64,
}

/// Batch-averaged curvature along the fibre axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile {
    /// Grating index of each sample (parallel to `samples`).
    pub grating_indices: Vec<usize>,
    /// Averaged samples ordered by axial position (strictly increasing).
    pub samples: Vec<CurvatureSample>,
    /// Number of frames that entered the batch.
    pub source_frame_count: usize,
    /// Indices of frames rejected as outliers.
    pub rejected_frame_indices: Vec<usize>,
}

impl CurvatureProfile {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Stable digest of the profile content (bit patterns of every numeric
    /// field), used as an opaque provenance identifier downstream.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for (&g, s) in self.grating_indices.iter().zip(&self.samples) {
            hasher.update((g as u64).to_le_bytes());
            hasher.update(s.axial_position_mm.to_bits().to_le_bytes());
            hasher.update(s.kappa_per_mm.to_bits().to_le_bytes());
            hasher.update(s.bend_direction_rad.to_bits().to_le_bytes());
            hasher.update([u8::from(s.direction_defined)]);
        }
        hasher.update((self.source_frame_count as u64).to_le_bytes());
        for &r in &self.rejected_frame_indices {
            hasher.update((r as u64).to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Knobs of the reconstruction pipeline that the acquisition protocol does
/// not fix: which outer cores enter the fit (the interrogator uses four per
/// axial position) and the outlier-rejection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSettings {
    /// Outer-core indices used in the per-grating fit.
    pub core_subset: Vec<usize>,
    /// Rejection multiplier k in the median ± k·MAD rule.
    pub outlier_k: f64,
    /// Absolute floor on the scaled MAD, 1/mm.
    pub mad_floor_per_mm: f64,
    /// Physical curvature bound for reconstructed samples, 1/mm.
    pub kappa_max_per_mm: f64,
}

impl Default for ReconstructionSettings {
    fn default() -> Self {
        Self {
            core_subset: vec![0, 2, 4, 6],
            outlier_k: DEFAULT_OUTLIER_K,
            mad_floor_per_mm: DEFAULT_MAD_FLOOR_PER_MM,
            kappa_max_per_mm: crate::fiber::DEFAULT_KAPPA_MAX_PER_MM,
        }
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Strain from a wavelength shift: `ε = Δλ / (λ_B · (1 − p_e))`.
///
/// Exact algebraic inverse of
/// [`crate::fiber::wavelength_shift_from_strain`]. Requires
/// `base_wavelength_nm > 0` and `p_e < 1`.
pub fn strain_from_shift(shift_nm: f64, base_wavelength_nm: f64, p_e: f64) -> f64 {
    shift_nm / (base_wavelength_nm * (1.0 - p_e))
}

/// Per-channel mean of the provided frames, used as the reference
/// wavelengths that subsequent shifts are measured against.
///
/// Mirrors the acquisition step of holding the fibre straight while
/// recording reference frames.
pub fn set_reference(frames: &[WavelengthFrame]) -> Result<DMatrix<f64>, ReconstructError> {
    if frames.is_empty() {
        return Err(ReconstructError::NoFrames);
    }
    let (rows, cols) = frames[0].wavelengths.shape();
    for (i, f) in frames.iter().enumerate() {
        let (r, c) = f.wavelengths.shape();
        if (r, c) != (rows, cols) {
            return Err(ReconstructError::FrameDimensionMismatch {
                index: i,
                got_rows: r,
                got_cols: c,
                rows,
                cols,
            });
        }
    }
    let mut reference = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let values: Vec<f64> = frames.iter().map(|f| f.wavelengths[(r, c)]).collect();
            reference[(r, c)] = stable_mean(&values);
        }
    }
    Ok(reference)
}

/// Mean anchored at the first element: `x₀ + mean(xᵢ − x₀)`.
///
/// Exact when all elements are identical, which keeps the N-frame average
/// of a noiseless batch bit-equal to the single-frame result.
fn stable_mean(values: &[f64]) -> f64 {
    let x0 = values[0];
    let sum: f64 = values.iter().map(|&v| v - x0).sum();
    x0 + sum / values.len() as f64
}

/// Fits one grating's strains to the off-axis bending model and returns the
/// curvature sample at `axial_position_mm`.
///
/// `strains` pairs each outer-core azimuthal angle (rad) with its measured
/// strain. At least three distinct angles are required; with four or more
/// an intercept absorbs any common-mode strain offset, while with exactly
/// three the intercept is dropped. Angle sets that are all equal mod π
/// cannot resolve the bend plane and yield a rank-deficiency error.
pub fn curvature_at_grating(
    strains: &[(f64, f64)],
    core_offset_um: f64,
    axial_position_mm: f64,
) -> Result<CurvatureSample, ReconstructError> {
    fit_bend(
        strains,
        core_offset_um,
        axial_position_mm,
        crate::fiber::DEFAULT_KAPPA_MAX_PER_MM,
    )
}

fn fit_bend(
    strains: &[(f64, f64)],
    core_offset_um: f64,
    axial_position_mm: f64,
    kappa_max_per_mm: f64,
) -> Result<CurvatureSample, ReconstructError> {
    let n = strains.len();
    if n < 3 {
        return Err(ReconstructError::InsufficientCores { needed: 3, got: n });
    }
    let with_intercept = n >= 4;
    let params = if with_intercept { 3 } else { 2 };

    let mut design = DMatrix::zeros(n, params);
    let mut rhs = DVector::zeros(n);
    for (i, &(angle, strain)) in strains.iter().enumerate() {
        design[(i, 0)] = angle.cos();
        design[(i, 1)] = angle.sin();
        if with_intercept {
            design[(i, 2)] = 1.0;
        }
        rhs[i] = strain;
    }

    let svd = design.svd(true, true);
    let sv = &svd.singular_values;
    let max_sv = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min_sv = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max_sv == 0.0 || min_sv / max_sv < 1e-10 {
        return Err(ReconstructError::RankDeficientAngles);
    }
    let solution = svd
        .solve(&rhs, 0.0)
        .map_err(|_| ReconstructError::RankDeficientAngles)?;

    let (a, b) = (solution[0], solution[1]);
    let r_mm = core_offset_um * 1e-3;
    let amplitude = (a * a + b * b).sqrt();
    let kappa = amplitude / r_mm;
    if kappa == 0.0 {
        return Ok(CurvatureSample::straight(axial_position_mm));
    }
    let phi = normalize_angle((-b).atan2(-a));
    Ok(CurvatureSample::with_limit(
        axial_position_mm,
        kappa,
        phi,
        kappa_max_per_mm,
    )?)
}

/// Converts one frame to strain samples for the given grating and cores.
pub fn strains_from_frame(
    frame: &WavelengthFrame,
    reference: &DMatrix<f64>,
    fiber: &FiberSpec,
    grating_index: usize,
    core_subset: &[usize],
) -> Result<Vec<StrainSample>, ReconstructError> {
    let base = fiber.base_wavelengths_nm[grating_index];
    core_subset
        .iter()
        .map(|&c| {
            let shift = frame.wavelengths[(grating_index, c)] - reference[(grating_index, c)];
            let strain = strain_from_shift(shift, base, fiber.strain_optic_coefficient);
            if strain.abs() >= SMALL_STRAIN_LIMIT {
                return Err(ReconstructError::StrainOutOfRange {
                    strain,
                    grating_index,
                    core_index: c,
                    limit: SMALL_STRAIN_LIMIT,
                });
            }
            Ok(StrainSample {
                grating_index,
                core_index: c,
                strain,
            })
        })
        .collect()
}

/// Outlier mask over a batch: `per_frame_curvatures` is indexed
/// `(frame, grating)` and the returned vector holds `true` for kept frames.
///
/// A frame is rejected when any grating deviates from that grating's median
/// by more than `k × max(1.4826 · MAD, floor)`. With fewer than
/// [`MIN_FRAMES_FOR_REJECTION`] frames every frame is kept.
pub fn reject_outliers(per_frame_curvatures: &DMatrix<f64>) -> Vec<bool> {
    reject_outliers_with(
        per_frame_curvatures,
        DEFAULT_OUTLIER_K,
        DEFAULT_MAD_FLOOR_PER_MM,
    )
}

/// [`reject_outliers`] with explicit rejection parameters.
pub fn reject_outliers_with(
    per_frame_curvatures: &DMatrix<f64>,
    k: f64,
    mad_floor: f64,
) -> Vec<bool> {
    let (n_frames, n_gratings) = per_frame_curvatures.shape();
    if n_frames < MIN_FRAMES_FOR_REJECTION {
        return vec![true; n_frames];
    }
    let mut kept = vec![true; n_frames];
    for g in 0..n_gratings {
        let column: Vec<f64> = (0..n_frames)
            .map(|f| per_frame_curvatures[(f, g)])
            .collect();
        let med = median(&column);
        let deviations: Vec<f64> = column.iter().map(|&v| (v - med).abs()).collect();
        let mad = median(&deviations);
        let threshold = k * (MAD_SCALE * mad).max(mad_floor);
        for f in 0..n_frames {
            if deviations[f] > threshold {
                kept[f] = false;
            }
        }
    }
    kept
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median of non-NaN values"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Reconstructs a batch of frames into an averaged curvature profile.
///
/// Every frame is reconstructed independently at each grating in
/// `grating_subset` (strictly increasing grating indices); frames flagged by
/// the outlier rule are dropped and the survivors averaged — arithmetic mean
/// for κ, κ-weighted circular mean for φ.
pub fn profile_from_sequence(
    frames: &[WavelengthFrame],
    reference: &DMatrix<f64>,
    fiber: &FiberSpec,
    grating_subset: &[usize],
    settings: &ReconstructionSettings,
) -> Result<CurvatureProfile, ReconstructError> {
    if frames.is_empty() {
        return Err(ReconstructError::NoFrames);
    }
    if grating_subset.is_empty() {
        return Err(ReconstructError::EmptyGratingSubset);
    }
    for pair in grating_subset.windows(2) {
        if pair[1] <= pair[0] {
            return Err(ReconstructError::InvalidGratingSubset {
                max: fiber.gratings_per_core,
                msg: format!("{} then {}", pair[0], pair[1]),
            });
        }
    }
    if let Some(&last) = grating_subset.last() {
        if last >= fiber.gratings_per_core {
            return Err(ReconstructError::InvalidGratingSubset {
                max: fiber.gratings_per_core,
                msg: format!("index {last} out of range"),
            });
        }
    }
    if settings.core_subset.len() < 3 {
        return Err(ReconstructError::InsufficientCores {
            needed: 3,
            got: settings.core_subset.len(),
        });
    }
    for &c in &settings.core_subset {
        if c >= fiber.outer_core_count {
            return Err(ReconstructError::InvalidCoreSubset(format!(
                "core {c} is not an outer core (outer cores are 0..{})",
                fiber.outer_core_count
            )));
        }
    }
    let (rows, cols) = (fiber.gratings_per_core, fiber.total_cores());
    for (i, f) in frames.iter().enumerate() {
        let (r, c) = f.wavelengths.shape();
        if (r, c) != (rows, cols) {
            return Err(ReconstructError::FrameDimensionMismatch {
                index: i,
                got_rows: r,
                got_cols: c,
                rows,
                cols,
            });
        }
    }

    // Per-frame reconstruction at every requested grating.
    let n_frames = frames.len();
    let n_gratings = grating_subset.len();
    let mut kappas = DMatrix::zeros(n_frames, n_gratings);
    let mut phis = DMatrix::zeros(n_frames, n_gratings);
    let mut defined = vec![vec![false; n_gratings]; n_frames];
    for (fi, frame) in frames.iter().enumerate() {
        for (gi, &g) in grating_subset.iter().enumerate() {
            let strains = strains_from_frame(frame, reference, fiber, g, &settings.core_subset)?;
            let pairs: Vec<(f64, f64)> = strains
                .iter()
                .map(|s| (fiber.core_angles_rad[s.core_index], s.strain))
                .collect();
            let sample = fit_bend(
                &pairs,
                fiber.core_radial_offset_um,
                fiber.grating_position_mm(g),
                settings.kappa_max_per_mm,
            )?;
            kappas[(fi, gi)] = sample.kappa_per_mm;
            phis[(fi, gi)] = sample.bend_direction_rad;
            defined[fi][gi] = sample.direction_defined;
        }
    }

    let kept = reject_outliers_with(&kappas, settings.outlier_k, settings.mad_floor_per_mm);
    let rejected: Vec<usize> = kept
        .iter()
        .enumerate()
        .filter_map(|(i, &k)| (!k).then_some(i))
        .collect();
    let kept_indices: Vec<usize> = kept
        .iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect();
    if kept_indices.is_empty() {
        return Err(ReconstructError::AllFramesRejected(n_frames));
    }

    let mut samples = Vec::with_capacity(n_gratings);
    for (gi, &g) in grating_subset.iter().enumerate() {
        let kappa_values: Vec<f64> = kept_indices.iter().map(|&f| kappas[(f, gi)]).collect();
        let mean_kappa = stable_mean(&kappa_values);

        // κ-weighted circular mean, centred on the first defined direction
        // so identical inputs reproduce the single-frame angle exactly.
        let anchor = kept_indices
            .iter()
            .find(|&&f| defined[f][gi])
            .map(|&f| phis[(f, gi)]);
        let sample = match anchor {
            Some(phi0) if mean_kappa > 0.0 => {
                let (mut sin_sum, mut cos_sum) = (0.0, 0.0);
                for &f in &kept_indices {
                    if !defined[f][gi] {
                        continue;
                    }
                    let w = kappas[(f, gi)];
                    let delta = phis[(f, gi)] - phi0;
                    sin_sum += w * delta.sin();
                    cos_sum += w * delta.cos();
                }
                if sin_sum == 0.0 && cos_sum == 0.0 {
                    // Antipodal directions cancelled out entirely.
                    CurvatureSample {
                        axial_position_mm: fiber.grating_position_mm(g),
                        kappa_per_mm: mean_kappa,
                        bend_direction_rad: 0.0,
                        direction_defined: false,
                    }
                } else {
                    let phi = normalize_angle(phi0 + sin_sum.atan2(cos_sum));
                    CurvatureSample::with_limit(
                        fiber.grating_position_mm(g),
                        mean_kappa,
                        phi,
                        settings.kappa_max_per_mm,
                    )?
                }
            }
            _ => CurvatureSample::straight(fiber.grating_position_mm(g)),
        };
        samples.push(sample);
    }

    Ok(CurvatureProfile {
        grating_indices: grating_subset.to_vec(),
        samples,
        source_frame_count: n_frames,
        rejected_frame_indices: rejected,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
