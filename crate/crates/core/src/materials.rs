//! Material stiffness library and Young's-modulus estimation from
//! compression stress-strain curves.
//!
//! The modulus estimator restricts the curve to the window between 7.5 %
//! and 15 % of maximum compression and fits a degree-1 least-squares line;
//! the slope is the Young's modulus and the reported uncertainty is the
//! standard error of the slope. Samples outside the window never influence
//! the estimate. Higher fit degrees are supported for sensitivity checks
//! (the modulus is then the fitted polynomial's derivative at the window
//! centre), but degree 1 is the reference definition.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use thiserror::Error;

/// Fit window as fractions of maximum compression.
pub const MODULUS_WINDOW: (f64, f64) = (0.075, 0.15);

/// Minimum number of curve samples required inside the fit window.
pub const MIN_WINDOW_SAMPLES: usize = 5;

#[derive(Debug, Error)]
pub enum MaterialError {
    #[error("unknown material {0:?}")]
    UnknownMaterial(String),
    #[error("only {found} curve samples inside the [{lo}, {hi}] strain window; need ≥ {needed}")]
    TooFewSamplesInWindow {
        found: usize,
        needed: usize,
        lo: f64,
        hi: f64,
    },
    #[error("invalid stress-strain curve: {0}")]
    InvalidCurve(String),
    #[error("fit degree {0} unsupported (must be ≥ 1 and leave ≥ 2 residual dof)")]
    UnsupportedDegree(usize),
    #[error("material library parse failure: {0}")]
    LibraryParse(String),
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A material with its measured elastic modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    pub name: String,
    /// Shore hardness label (e.g. "30 A", "00-20"); absent for tissue
    /// samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shore_hardness: Option<String>,
    pub youngs_modulus_mpa: f64,
    pub modulus_uncertainty_mpa: f64,
}

impl MaterialSpec {
    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.youngs_modulus_mpa <= 0.0 {
            return Err(MaterialError::InvalidCurve(format!(
                "material {:?} has non-positive modulus",
                self.name
            )));
        }
        if self.modulus_uncertainty_mpa < 0.0 {
            return Err(MaterialError::InvalidCurve(format!(
                "material {:?} has negative uncertainty",
                self.name
            )));
        }
        Ok(())
    }
}

/// Serialized form of the shipped material library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialLibrary {
    pub schema_version: u32,
    pub materials: Vec<MaterialSpec>,
}

/// A compression stress-strain curve.
#[derive(Debug, Clone, PartialEq)]
pub struct StressStrainCurve {
    /// Ordered `(strain, stress MPa)` samples, strain strictly increasing
    /// from 0, stresses ≥ 0.
    pub samples: Vec<(f64, f64)>,
    /// Maximum compression strain of the test; the fit window is defined as
    /// fractions of this value.
    pub max_compression: f64,
}

impl StressStrainCurve {
    pub fn new(samples: Vec<(f64, f64)>, max_compression: f64) -> Result<Self, MaterialError> {
        let curve = Self {
            samples,
            max_compression,
        };
        curve.validate()?;
        Ok(curve)
    }

    pub fn validate(&self) -> Result<(), MaterialError> {
        if self.samples.is_empty() {
            return Err(MaterialError::InvalidCurve("curve has no samples".into()));
        }
        if self.samples[0].0 != 0.0 {
            return Err(MaterialError::InvalidCurve(format!(
                "curve must start at zero strain, got {}",
                self.samples[0].0
            )));
        }
        for (i, pair) in self.samples.windows(2).enumerate() {
            if pair[1].0 <= pair[0].0 {
                return Err(MaterialError::InvalidCurve(format!(
                    "strains must be strictly increasing; sample {} = {} then {}",
                    i, pair[0].0, pair[1].0
                )));
            }
        }
        if self.samples.iter().any(|&(_, stress)| stress < 0.0) {
            return Err(MaterialError::InvalidCurve("negative stress".into()));
        }
        if self.max_compression <= 0.0 {
            return Err(MaterialError::InvalidCurve(
                "max_compression must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Samples whose strain lies inside the fit window (inclusive bounds).
    pub fn window_samples(&self) -> Vec<(f64, f64)> {
        let lo = MODULUS_WINDOW.0 * self.max_compression;
        let hi = MODULUS_WINDOW.1 * self.max_compression;
        self.samples
            .iter()
            .copied()
            .filter(|&(strain, _)| strain >= lo && strain <= hi)
            .collect()
    }
}

/// Ideal linear compression curve `stress = E·strain`, sampled uniformly up
/// to `max_compression`. Used for estimator validation and shipped example
/// data.
pub fn synthetic_linear_curve(
    youngs_modulus_mpa: f64,
    max_compression: f64,
    n_samples: usize,
) -> StressStrainCurve {
    let samples: Vec<(f64, f64)> = (0..n_samples)
        .map(|i| {
            let strain = max_compression * i as f64 / (n_samples - 1) as f64;
            (strain, youngs_modulus_mpa * strain)
        })
        .collect();
    StressStrainCurve::new(samples, max_compression).expect("synthetic curve is valid")
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

static LIBRARY: OnceLock<MaterialLibrary> = OnceLock::new();

const LIBRARY_TOML: &str = include_str!("../data/materials.toml");

/// The shipped material library (kidney tissue samples, silicones).
pub fn builtin_library() -> &'static MaterialLibrary {
    LIBRARY.get_or_init(|| toml::from_str(LIBRARY_TOML).expect("embedded material library parses"))
}

/// The measured material table, verbatim from the shipped library file.
pub fn builtin_materials() -> &'static [MaterialSpec] {
    &builtin_library().materials
}

/// Looks a material up by exact name.
pub fn material_by_name(name: &str) -> Result<&'static MaterialSpec, MaterialError> {
    builtin_materials()
        .iter()
        .find(|m| m.name == name)
        .ok_or_else(|| MaterialError::UnknownMaterial(name.to_string()))
}

/// Young's modulus from a compression curve: the slope of a degree-1
/// least-squares fit of stress on strain restricted to the 7.5–15 % window
/// of maximum compression, with the slope's standard error as uncertainty.
pub fn estimate_youngs_modulus(curve: &StressStrainCurve) -> Result<(f64, f64), MaterialError> {
    curve.validate()?;
    let window = curve.window_samples();
    if window.len() < MIN_WINDOW_SAMPLES {
        return Err(MaterialError::TooFewSamplesInWindow {
            found: window.len(),
            needed: MIN_WINDOW_SAMPLES,
            lo: MODULUS_WINDOW.0 * curve.max_compression,
            hi: MODULUS_WINDOW.1 * curve.max_compression,
        });
    }

    let n = window.len() as f64;
    let mean_x = window.iter().map(|&(x, _)| x).sum::<f64>() / n;
    let mean_y = window.iter().map(|&(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = window.iter().map(|&(x, _)| (x - mean_x).powi(2)).sum();
    let sxy: f64 = window
        .iter()
        .map(|&(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if sxx == 0.0 {
        return Err(MaterialError::InvalidCurve(
            "window strains are all identical".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rss: f64 = window
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let dof = window.len() as f64 - 2.0;
    let standard_error = if dof > 0.0 {
        (rss.max(0.0) / dof / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, standard_error))
}

/// Generalised windowed fit at an arbitrary polynomial degree.
///
/// The modulus is the derivative of the fitted polynomial evaluated at the
/// window centre; for `degree == 1` this is identical to
/// [`estimate_youngs_modulus`]. The uncertainty is propagated from the
/// coefficient covariance `σ̂²(XᵀX)⁻¹`.
pub fn fit_polynomial_modulus(
    curve: &StressStrainCurve,
    degree: usize,
) -> Result<(f64, f64), MaterialError> {
    if degree == 1 {
        return estimate_youngs_modulus(curve);
    }
    curve.validate()?;
    let window = curve.window_samples();
    let params = degree + 1;
    if degree == 0 || window.len() < params + 2 || window.len() < MIN_WINDOW_SAMPLES {
        return Err(MaterialError::UnsupportedDegree(degree));
    }

    use nalgebra::{DMatrix, DVector};
    let n = window.len();
    let mut design = DMatrix::zeros(n, params);
    let mut rhs = DVector::zeros(n);
    for (i, &(x, y)) in window.iter().enumerate() {
        let mut pow = 1.0;
        for j in 0..params {
            design[(i, j)] = pow;
            pow *= x;
        }
        rhs[i] = y;
    }
    let normal = design.transpose() * &design;
    let xty = design.transpose() * &rhs;
    let inv = normal
        .clone()
        .try_inverse()
        .ok_or(MaterialError::UnsupportedDegree(degree))?;
    let coeffs = &inv * &xty;

    let rss: f64 = window
        .iter()
        .map(|&(x, y)| {
            let mut fit = 0.0;
            let mut pow = 1.0;
            for j in 0..params {
                fit += coeffs[j] * pow;
                pow *= x;
            }
            let r = y - fit;
            r * r
        })
        .sum();
    let sigma2 = rss.max(0.0) / (n - params) as f64;

    let x_mid = 0.5 * (MODULUS_WINDOW.0 + MODULUS_WINDOW.1) * curve.max_compression;
    let mut derivative = 0.0;
    let mut gradient = DVector::zeros(params);
    for j in 1..params {
        let basis = j as f64 * x_mid.powi(j as i32 - 1);
        derivative += coeffs[j] * basis;
        gradient[j] = basis;
    }
    let variance = (gradient.transpose() * &inv * &gradient)[(0, 0)] * sigma2;
    Ok((derivative, variance.max(0.0).sqrt()))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_distr::StandardNormal;

    #[test]
    fn library_contains_expected_entries() {
        let materials = builtin_materials();
        assert_eq!(materials.len(), 9);
        let ds30 = material_by_name("DragonSkin 30").unwrap();
        assert_eq!(ds30.youngs_modulus_mpa, 9.990);
        assert_eq!(ds30.modulus_uncertainty_mpa, 0.600);
        assert_eq!(ds30.shore_hardness.as_deref(), Some("30 A"));
        let kidney = material_by_name("Kidney Sample 1").unwrap();
        assert_eq!(kidney.youngs_modulus_mpa, 4.35e-3);
        assert_eq!(kidney.modulus_uncertainty_mpa, 0.578e-3);
        assert!(kidney.shore_hardness.is_none());
        let ef = material_by_name("Eco-Flex 00-20").unwrap();
        assert_eq!(ef.youngs_modulus_mpa, 0.246);
    }

    #[test]
    fn unknown_material_is_an_error() {
        assert!(matches!(
            material_by_name("Adamantium"),
            Err(MaterialError::UnknownMaterial(_))
        ));
    }

    #[test]
    fn library_round_trips_at_full_precision() {
        let library = builtin_library();
        let serialized = toml::to_string(library).unwrap();
        let reparsed: MaterialLibrary = toml::from_str(&serialized).unwrap();
        assert_eq!(*library, reparsed);
    }

    #[test]
    fn linear_curve_recovers_modulus_exactly() {
        for material in builtin_materials() {
            let curve = synthetic_linear_curve(material.youngs_modulus_mpa, 0.2, 101);
            let (e, se) = estimate_youngs_modulus(&curve).unwrap();
            let rel = ((e - material.youngs_modulus_mpa) / material.youngs_modulus_mpa).abs();
            assert!(rel < 1e-9, "{}: rel err {rel}", material.name);
            assert!(se < 1e-9 * material.youngs_modulus_mpa.max(1.0));
        }
    }

    #[test]
    fn perturbations_outside_window_do_not_change_estimate() {
        let curve = synthetic_linear_curve(9.990, 0.2, 101);
        let (e0, se0) = estimate_youngs_modulus(&curve).unwrap();
        let lo = MODULUS_WINDOW.0 * curve.max_compression;
        let hi = MODULUS_WINDOW.1 * curve.max_compression;
        let mut perturbed = curve.clone();
        for sample in &mut perturbed.samples {
            if sample.0 < lo || sample.0 > hi {
                sample.1 += 0.37;
            }
        }
        let (e1, se1) = estimate_youngs_modulus(&perturbed).unwrap();
        assert_eq!(e0, e1);
        assert_eq!(se0, se1);
    }

    #[test]
    fn too_few_window_samples_is_an_error() {
        // Coarse sampling leaves fewer than five points in [0.015, 0.03].
        let curve = synthetic_linear_curve(1.0, 0.2, 11);
        assert!(matches!(
            estimate_youngs_modulus(&curve),
            Err(MaterialError::TooFewSamplesInWindow { .. })
        ));
    }

    #[test]
    fn noisy_curve_estimate_is_consistent_with_its_standard_error() {
        // Gaussian stress noise σ = 0.01 MPa: the fitted slope should land
        // within 3 standard errors of the truth in ≥ 99 % of seeded trials.
        let truth = 9.990;
        let base = synthetic_linear_curve(truth, 0.2, 201);
        let mut within = 0;
        let trials = 1000;
        for seed in 0..trials {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let noisy: Vec<(f64, f64)> = base
                .samples
                .iter()
                .map(|&(x, y)| {
                    let noise: f64 = rng.sample(StandardNormal);
                    (x, (y + 0.01 * noise).max(0.0))
                })
                .collect();
            let curve = StressStrainCurve {
                samples: noisy,
                max_compression: 0.2,
            };
            let (e, se) = estimate_youngs_modulus(&curve).unwrap();
            if (e - truth).abs() <= 3.0 * se {
                within += 1;
            }
        }
        assert!(within >= 990, "only {within}/{trials} inside 3·SE");
    }

    #[test]
    fn degree_two_fit_matches_linear_data() {
        let curve = synthetic_linear_curve(5.0, 0.2, 101);
        let (e, _) = fit_polynomial_modulus(&curve, 2).unwrap();
        assert!((e - 5.0).abs() < 1e-6, "degree-2 modulus {e}");
    }

    #[test]
    fn curve_validation_rejects_bad_input() {
        assert!(StressStrainCurve::new(vec![], 0.2).is_err());
        assert!(StressStrainCurve::new(vec![(0.1, 1.0)], 0.2).is_err());
        assert!(StressStrainCurve::new(vec![(0.0, 0.0), (0.0, 1.0)], 0.2).is_err());
        assert!(StressStrainCurve::new(vec![(0.0, 0.0), (0.1, -1.0)], 0.2).is_err());
        assert!(StressStrainCurve::new(vec![(0.0, 0.0), (0.1, 1.0)], 0.0).is_err());
    }
}
