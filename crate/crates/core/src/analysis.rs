//! Error metrology for sensed-versus-geometric curvature and deterministic
//! experiment reports.
//!
//! The error table summarises, per bend radius, the maximum and mean
//! absolute curvature error across the gratings of each batch repetition,
//! with standard deviations taken across repetitions (sample, n−1
//! normalisation) and percentages relative to the geometric curvature. The
//! accuracy profile is the per-grating ratio of sensed to geometric
//! curvature averaged over the radius set — 1.0 for perfect sensing.
//!
//! All statistics sort their inputs before reduction, so results are
//! bit-identical under any permutation of gratings or repetitions. Report
//! rendering is a pure function of its inputs and therefore byte-stable.

use thiserror::Error;

use crate::reconstruct::CurvatureProfile;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("geometric curvature must be positive to report percentage errors, got {0}")]
    ZeroGeometricCurvature(f64),
    #[error("no repetition profiles provided")]
    NoRepetitions,
    #[error("no gratings fall inside the requested range {lo}..={hi}")]
    NoGratingsInRange { lo: usize, hi: usize },
    #[error("profiles carry different grating sets; cannot aggregate")]
    InconsistentGratingSets,
    #[error("accuracy profile needs at least one run")]
    NoRuns,
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One row of the curvature-error table (one bend radius).
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTableRow {
    pub radius_mm: f64,
    /// Mean over repetitions of the per-repetition maximum |κ − κ_geo|,
    /// 1/mm, with its std across repetitions.
    pub max_abs_per_mm: f64,
    pub max_abs_std_per_mm: f64,
    /// `max_abs_per_mm / κ_geo × 100`.
    pub max_pct: f64,
    /// Mean over repetitions of the per-repetition mean |κ − κ_geo|, 1/mm.
    pub mean_abs_per_mm: f64,
    pub mean_abs_std_per_mm: f64,
    pub mean_pct: f64,
}

/// Curvature-error rows for a set of radii, under one grating range.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTable {
    pub label: String,
    /// Inclusive grating-index range the rows were computed over, when
    /// restricted; `None` means every grating in the profiles.
    pub grating_range: Option<(usize, usize)>,
    pub rows: Vec<ErrorTableRow>,
}

/// Per-grating sensing accuracy: ratio of sensed to geometric curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct GratingAccuracy {
    pub grating_index: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
}

/// Accuracy profile across a radius set; ideal ratio is 1 at every grating.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyProfile {
    pub per_grating: Vec<GratingAccuracy>,
    /// Mean and std of the ratio over all (grating, run) pairs.
    pub overall_mean_ratio: f64,
    pub overall_std_ratio: f64,
}

/// Everything a rendered report depends on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportInputs {
    pub tables: Vec<ErrorTable>,
    pub accuracy_profiles: Vec<(String, AccuracyProfile)>,
    pub seed: u64,
    pub config_digest: String,
    pub synthetic_flags: Vec<String>,
}

/// A deterministic report bundle: `report.md`, `tables/*.csv`, and
/// `provenance.txt`, as (relative path, contents) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub files: Vec<(String, String)>,
}

impl ReportBundle {
    pub fn file(&self, path: &str) -> Option<&str> {
        self.files
            .iter()
            .find(|(p, _)| p == path)
            .map(|(_, c)| c.as_str())
    }

    /// Writes the bundle under `dir`, creating subdirectories as needed.
    pub fn write_to(&self, dir: &std::path::Path) -> std::io::Result<()> {
        for (path, contents) in &self.files {
            let full = dir.join(path);
            if let Some(parent) = full.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(full, contents)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Statistics helpers (permutation-invariant)
// ---------------------------------------------------------------------------

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN statistics input"));
    v
}

/// Mean over a sorted copy, so any permutation of the input produces the
/// bit-identical result.
fn mean(values: &[f64]) -> f64 {
    let v = sorted(values);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (n−1); 0 for fewer than two values.
fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let v = sorted(values);
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let ss: f64 = v.iter().map(|&x| (x - m) * (x - m)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Builds one error-table row from repeated sensing runs at a known
/// geometric curvature.
///
/// Per repetition, the absolute error `|κᵢ − κ_geo|` is evaluated at every
/// grating inside `grating_range` (inclusive indices; `None` = all); the
/// per-repetition maximum and mean are then averaged across repetitions
/// with their sample standard deviations.
pub fn curvature_error_row(
    repetitions: &[CurvatureProfile],
    geometric_kappa_per_mm: f64,
    grating_range: Option<(usize, usize)>,
) -> Result<ErrorTableRow, AnalysisError> {
    if repetitions.is_empty() {
        return Err(AnalysisError::NoRepetitions);
    }
    if geometric_kappa_per_mm <= 0.0 {
        return Err(AnalysisError::ZeroGeometricCurvature(
            geometric_kappa_per_mm,
        ));
    }

    let mut rep_max = Vec::with_capacity(repetitions.len());
    let mut rep_mean = Vec::with_capacity(repetitions.len());
    for profile in repetitions {
        let errors: Vec<f64> = profile
            .grating_indices
            .iter()
            .zip(&profile.samples)
            .filter(|(g, _)| match grating_range {
                Some((lo, hi)) => (lo..=hi).contains(*g),
                None => true,
            })
            .map(|(_, s)| (s.kappa_per_mm - geometric_kappa_per_mm).abs())
            .collect();
        if errors.is_empty() {
            let (lo, hi) = grating_range.unwrap_or((0, 0));
            return Err(AnalysisError::NoGratingsInRange { lo, hi });
        }
        rep_max.push(errors.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        rep_mean.push(mean(&errors));
    }

    let max_abs = mean(&rep_max);
    let mean_abs = mean(&rep_mean);
    Ok(ErrorTableRow {
        radius_mm: 1.0 / geometric_kappa_per_mm,
        max_abs_per_mm: max_abs,
        max_abs_std_per_mm: std_dev(&rep_max),
        max_pct: max_abs / geometric_kappa_per_mm * 100.0,
        mean_abs_per_mm: mean_abs,
        mean_abs_std_per_mm: std_dev(&rep_mean),
        mean_pct: mean_abs / geometric_kappa_per_mm * 100.0,
    })
}

/// Per-grating accuracy (sensed/geometric curvature ratio) across a radius
/// set. Every run must cover the same grating set.
pub fn accuracy_profile(
    runs: &[(f64, CurvatureProfile)],
) -> Result<AccuracyProfile, AnalysisError> {
    if runs.is_empty() {
        return Err(AnalysisError::NoRuns);
    }
    let gratings = &runs[0].1.grating_indices;
    for (_, profile) in runs {
        if &profile.grating_indices != gratings {
            return Err(AnalysisError::InconsistentGratingSets);
        }
    }
    for &(kappa_geo, _) in runs {
        if kappa_geo <= 0.0 {
            return Err(AnalysisError::ZeroGeometricCurvature(kappa_geo));
        }
    }

    let mut per_grating = Vec::with_capacity(gratings.len());
    let mut all_ratios = Vec::with_capacity(gratings.len() * runs.len());
    for (pos, &g) in gratings.iter().enumerate() {
        let ratios: Vec<f64> = runs
            .iter()
            .map(|(kappa_geo, profile)| profile.samples[pos].kappa_per_mm / kappa_geo)
            .collect();
        all_ratios.extend_from_slice(&ratios);
        per_grating.push(GratingAccuracy {
            grating_index: g,
            mean_ratio: mean(&ratios),
            std_ratio: std_dev(&ratios),
        });
    }

    Ok(AccuracyProfile {
        per_grating,
        overall_mean_ratio: mean(&all_ratios),
        overall_std_ratio: std_dev(&all_ratios),
    })
}

/// Renders the report bundle: `report.md`, one CSV per table and accuracy
/// profile under `tables/`, and `provenance.txt`.
///
/// Pure function of its inputs — identical inputs produce byte-identical
/// bundles.
pub fn render_report(inputs: &ReportInputs) -> ReportBundle {
    let mut files = Vec::new();

    let mut md = String::new();
    md.push_str("# Curvature sensing report\n\n");

    md.push_str("## Curvature error tables\n\n");
    if inputs.tables.is_empty() {
        md.push_str("no data\n\n");
    }
    for table in &inputs.tables {
        md.push_str(&format!("### {}\n\n", table.label));
        match table.grating_range {
            Some((lo, hi)) => md.push_str(&format!("Grating range: {lo}..={hi} (inclusive)\n\n")),
            None => md.push_str("Grating range: all\n\n"),
        }
        md.push_str(
            "| R (mm) | max abs err (1/mm) | max % | mean abs err (1/mm) | mean % |\n\
             |---|---|---|---|---|\n",
        );
        for row in &table.rows {
            md.push_str(&format!(
                "| {} | {:.3e} ± {:.3e} | {:.2} | {:.3e} ± {:.3e} | {:.2} |\n",
                row.radius_mm,
                row.max_abs_per_mm,
                row.max_abs_std_per_mm,
                row.max_pct,
                row.mean_abs_per_mm,
                row.mean_abs_std_per_mm,
                row.mean_pct
            ));
        }
        md.push('\n');

        let mut csv = String::from(
            "radius_mm,max_abs_per_mm,max_abs_std_per_mm,max_pct,mean_abs_per_mm,mean_abs_std_per_mm,mean_pct\n",
        );
        for row in &table.rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.radius_mm,
                row.max_abs_per_mm,
                row.max_abs_std_per_mm,
                row.max_pct,
                row.mean_abs_per_mm,
                row.mean_abs_std_per_mm,
                row.mean_pct
            ));
        }
        files.push((format!("tables/{}.csv", table.label), csv));
    }

    md.push_str("## Accuracy profiles\n\n");
    if inputs.accuracy_profiles.is_empty() {
        md.push_str("no data\n\n");
    }
    for (label, profile) in &inputs.accuracy_profiles {
        md.push_str(&format!(
            "### {label}\n\noverall ratio: {:.4} ± {:.4} (ideal 1.0)\n\n",
            profile.overall_mean_ratio, profile.overall_std_ratio
        ));
        let mut csv = String::from("grating_index,mean_ratio,std_ratio\n");
        for g in &profile.per_grating {
            csv.push_str(&format!(
                "{},{},{}\n",
                g.grating_index, g.mean_ratio, g.std_ratio
            ));
        }
        files.push((format!("tables/accuracy_{label}.csv"), csv));
    }

    md.push_str("## Provenance\n\nSee `provenance.txt`.\n");

    let mut provenance = String::new();
    provenance.push_str("railsense report provenance v1\n");
    provenance.push_str(&format!("seed = {}\n", inputs.seed));
    provenance.push_str(&format!("config_digest = {}\n", inputs.config_digest));
    if inputs.synthetic_flags.is_empty() {
        provenance.push_str("synthetic_flags = none\n");
    } else {
        for flag in &inputs.synthetic_flags {
            provenance.push_str(&format!("synthetic_flag = {flag}\n"));
        }
    }

    files.insert(0, ("report.md".to_string(), md));
    files.push(("provenance.txt".to_string(), provenance));
    ReportBundle { files }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
