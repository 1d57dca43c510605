//! Parametric phantom geometry, the sensorised rail description, and the
//! empirical conformity-bias model for rail-on-soft-target sensing.
//!
//! Phantoms are the curvature targets the fibre (bare or embedded in the
//! rail) is laid on: a grooved calibration plate and a stepped rigid block
//! with constant-radius surfaces from 30 mm to 110 mm in 20 mm increments,
//! soft silicone blocks at the range extremes, and a kidney-like profile
//! whose principal curvature spans the same range.
//!
//! The conformity model is explicitly synthetic: soft-target sensing
//! degradation is an empirical effect of rail/target stiffness mismatch and
//! is not derivable from first principles here. The model exists so scan
//! scenarios can exhibit the qualitative trend (accuracy deteriorates as
//! the radius shrinks and as the stiffness mismatch grows); every output
//! that uses it carries a SYNTHETIC flag.

use thiserror::Error;

use crate::fiber::ConstantCurvatureField;
use crate::materials::{material_by_name, MaterialSpec};

/// Radii admissible for phantom surfaces, mm.
pub const PHANTOM_RADIUS_RANGE_MM: (f64, f64) = (20.0, 200.0);

/// Default groove-plate radii, mm: 30 to 110 in 20 mm increments.
pub const DEFAULT_GROOVE_RADII_MM: [f64; 5] = [30.0, 50.0, 70.0, 90.0, 110.0];

/// Step elevation of the rigid curvature block, mm.
pub const RIGID_BLOCK_STEP_ELEVATION_MM: f64 = 15.0;

/// Surrogate modulus for rigid phantoms (casting resin scale), MPa. Used by
/// the conformity model, which needs a finite target modulus.
pub const RIGID_SURROGATE_MODULUS_MPA: f64 = 2000.0;

#[derive(Debug, Error)]
pub enum PhantomError {
    #[error("radius index {index} out of range for phantom with {count} radii")]
    InvalidRadiusIndex { index: usize, count: usize },
    #[error("phantom kind {0:?} has no groove radii")]
    NoGrooves(PhantomKind),
    #[error("radius {0} mm outside the [{}, {}] mm range", PHANTOM_RADIUS_RANGE_MM.0, PHANTOM_RADIUS_RANGE_MM.1)]
    RadiusOutOfRange(f64),
    #[error("invalid phantom spec: {0}")]
    InvalidSpec(String),
    #[error("invalid rail spec: {0}")]
    InvalidRail(String),
    #[error("conformity model requires a positive radius, got {0} mm")]
    NonPositiveRadius(f64),
    #[error("conformity parameters must be non-negative")]
    NegativeConformityParams,
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// Flat plate with constant-radius grooves that hold the bare fibre.
    GroovePlate,
    /// Stepped rigid block with constant-curvature surfaces for the rail.
    RigidBlock,
    /// Soft cast block with constant-curvature surfaces.
    SoftBlock,
    /// Kidney-like convex profile.
    KidneySurface,
}

impl PhantomKind {
    pub fn label(&self) -> &'static str {
        match self {
            PhantomKind::GroovePlate => "groove_plate",
            PhantomKind::RigidBlock => "rigid_block",
            PhantomKind::SoftBlock => "soft_block",
            PhantomKind::KidneySurface => "kidney_surface",
        }
    }
}

/// Phantom material: rigid (laser-cut acrylic / printed resin) or a library
/// material.
#[derive(Debug, Clone, PartialEq)]
pub enum PhantomMaterial {
    Rigid,
    Material(MaterialSpec),
}

impl PhantomMaterial {
    /// Effective Young's modulus, MPa. Rigid phantoms use a documented
    /// surrogate value.
    pub fn effective_modulus_mpa(&self) -> f64 {
        match self {
            PhantomMaterial::Rigid => RIGID_SURROGATE_MODULUS_MPA,
            PhantomMaterial::Material(m) => m.youngs_modulus_mpa,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PhantomMaterial::Rigid => "RIGID".to_string(),
            PhantomMaterial::Material(m) => m.name.clone(),
        }
    }
}

/// A parametric curvature phantom.
#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    /// Constant-curvature radii offered by this phantom, mm.
    pub radii_mm: Vec<f64>,
    pub material: PhantomMaterial,
    /// Step elevation between surfaces (rigid block only), mm.
    pub step_elevation_mm: Option<f64>,
}

impl PhantomSpec {
    /// The grooved calibration plate: default radii, rigid material.
    pub fn groove_plate() -> Self {
        Self {
            kind: PhantomKind::GroovePlate,
            radii_mm: DEFAULT_GROOVE_RADII_MM.to_vec(),
            material: PhantomMaterial::Rigid,
            step_elevation_mm: None,
        }
    }

    /// The stepped rigid curvature block (15 mm step elevation).
    pub fn rigid_block() -> Self {
        Self {
            kind: PhantomKind::RigidBlock,
            radii_mm: DEFAULT_GROOVE_RADII_MM.to_vec(),
            material: PhantomMaterial::Rigid,
            step_elevation_mm: Some(RIGID_BLOCK_STEP_ELEVATION_MM),
        }
    }

    /// A soft cast block at the range extremes (30 and 110 mm).
    pub fn soft_block(material: MaterialSpec) -> Self {
        Self {
            kind: PhantomKind::SoftBlock,
            radii_mm: vec![30.0, 110.0],
            material: PhantomMaterial::Material(material),
            step_elevation_mm: None,
        }
    }

    /// Kidney-like profile phantom; see [`kidney_profile`] for the surface.
    pub fn kidney_surface(material: MaterialSpec) -> Self {
        Self {
            kind: PhantomKind::KidneySurface,
            radii_mm: vec![30.0, 110.0],
            material: PhantomMaterial::Material(material),
            step_elevation_mm: None,
        }
    }

    pub fn validate(&self) -> Result<(), PhantomError> {
        if self.radii_mm.is_empty() {
            return Err(PhantomError::InvalidSpec("phantom has no radii".into()));
        }
        for &r in &self.radii_mm {
            if r < PHANTOM_RADIUS_RANGE_MM.0 || r > PHANTOM_RADIUS_RANGE_MM.1 {
                return Err(PhantomError::RadiusOutOfRange(r));
            }
        }
        if let Some(step) = self.step_elevation_mm {
            if step <= 0.0 {
                return Err(PhantomError::InvalidSpec(
                    "step elevation must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Short identifying label (kind, material, radii), used to match scan
    /// reports to the phantom they were taken on.
    pub fn label(&self) -> String {
        let radii: Vec<String> = self.radii_mm.iter().map(|r| format!("{r}")).collect();
        format!(
            "{}[{}]({})",
            self.kind.label(),
            radii.join(","),
            self.material.label()
        )
    }
}

/// Which groove of a phantom the fibre is laid in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrooveSelection {
    /// Index into the phantom's radius list.
    Radius(usize),
    /// Flat reference surface (infinite radius, zero curvature).
    Straight,
}

/// The sensorised rail the fibre is embedded in.
#[derive(Debug, Clone, PartialEq)]
pub struct RailSpec {
    pub material: MaterialSpec,
    /// Grating groups that lie within the rail profile.
    pub grating_groups_in_rail: usize,
    /// Axial offset of the first in-rail group from the rail's proximal
    /// end, mm.
    pub first_group_offset_mm: f64,
    /// Absolute suction pressure used during attachment, kPa
    /// (configuration record only; no fluid mechanics is modelled).
    pub vacuum_pressure_kpa: f64,
}

impl RailSpec {
    pub fn validate(&self) -> Result<(), PhantomError> {
        if self.grating_groups_in_rail < 2 {
            return Err(PhantomError::InvalidRail(
                "grating_groups_in_rail must be ≥ 2".into(),
            ));
        }
        if self.first_group_offset_mm < 0.0 {
            return Err(PhantomError::InvalidRail(
                "first_group_offset_mm must be non-negative".into(),
            ));
        }
        if self.vacuum_pressure_kpa <= 0.0 {
            return Err(PhantomError::InvalidRail(
                "vacuum_pressure_kpa must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Grating indices that lie inside the rail (the first
    /// `grating_groups_in_rail` along the fibre).
    pub fn in_rail_grating_indices(&self) -> Vec<usize> {
        (0..self.grating_groups_in_rail).collect()
    }
}

impl Default for RailSpec {
    /// DragonSkin 30 rail, eight in-rail grating groups, first group 3 mm
    /// from the proximal end, 7.325 kPa suction.
    fn default() -> Self {
        Self {
            material: material_by_name("DragonSkin 30")
                .expect("DragonSkin 30 is in the builtin library")
                .clone(),
            grating_groups_in_rail: 8,
            first_group_offset_mm: 3.0,
            vacuum_pressure_kpa: 7.325,
        }
    }
}

/// Parameters of the synthetic conformity-bias model.
///
/// With `κ = 1/R` and stiffness mismatch `m = |ln(E_rail / E_target)|`:
///
/// ```text
/// κ_bias      = bias_gain · κ · (1 + bias_mismatch_gain · m)        [1/mm]
/// noise_scale = 1 + noise_gain_mm · κ · (1 + noise_mismatch_gain · m)
/// ```
///
/// Both outputs are monotone non-decreasing in κ and in m, and the model
/// anchors at `(0, 1)` for a flat target with matched moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformityParams {
    /// Fractional curvature bias per unit κ (dimensionless).
    pub bias_gain: f64,
    /// Extra bias per log-unit of stiffness mismatch.
    pub bias_mismatch_gain: f64,
    /// Noise-scale growth per unit κ, mm.
    pub noise_gain_mm: f64,
    /// Extra noise growth per log-unit of stiffness mismatch.
    pub noise_mismatch_gain: f64,
}

impl Default for ConformityParams {
    fn default() -> Self {
        Self {
            bias_gain: 0.05,
            bias_mismatch_gain: 0.5,
            noise_gain_mm: 2.0,
            noise_mismatch_gain: 0.5,
        }
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Constant curvature field imposed by one groove of a phantom: `κ = 1/R`
/// everywhere, in-plane bend direction.
pub fn groove_curvature_field(
    phantom: &PhantomSpec,
    selection: GrooveSelection,
) -> Result<ConstantCurvatureField, PhantomError> {
    phantom.validate()?;
    match selection {
        GrooveSelection::Straight => Ok(ConstantCurvatureField {
            kappa_per_mm: 0.0,
            bend_direction_rad: 0.0,
        }),
        GrooveSelection::Radius(index) => {
            let radius = *phantom
                .radii_mm
                .get(index)
                .ok_or(PhantomError::InvalidRadiusIndex {
                    index,
                    count: phantom.radii_mm.len(),
                })?;
            Ok(ConstantCurvatureField {
                kappa_per_mm: 1.0 / radius,
                bend_direction_rad: 0.0,
            })
        }
    }
}

/// Synthetic conformity-bias model: curvature bias and noise-scale factor
/// for a rail of one stiffness suctioned onto a target of another, at bend
/// radius `radius_mm`.
///
/// Returns `(κ_bias 1/mm, κ_noise_scale)`. See [`ConformityParams`] for the
/// functional form. Outputs based on this model are synthetic and must be
/// flagged as such.
pub fn conformity_bias(
    rail: &RailSpec,
    phantom: &PhantomSpec,
    radius_mm: f64,
    params: &ConformityParams,
) -> Result<(f64, f64), PhantomError> {
    if params.bias_gain < 0.0
        || params.bias_mismatch_gain < 0.0
        || params.noise_gain_mm < 0.0
        || params.noise_mismatch_gain < 0.0
    {
        return Err(PhantomError::NegativeConformityParams);
    }
    if radius_mm <= 0.0 {
        return Err(PhantomError::NonPositiveRadius(radius_mm));
    }
    let kappa = 1.0 / radius_mm; // 0 at the flat limit (radius = ∞)
    let mismatch = (rail.material.youngs_modulus_mpa / phantom.material.effective_modulus_mpa())
        .ln()
        .abs();
    let bias = params.bias_gain * kappa * (1.0 + params.bias_mismatch_gain * mismatch);
    let noise_scale =
        1.0 + params.noise_gain_mm * kappa * (1.0 + params.noise_mismatch_gain * mismatch);
    Ok((bias, noise_scale))
}

/// Kidney-like superellipse profile whose principal curvature spans
/// `[1/r_max, 1/r_min]`.
///
/// For the exponent-2 (elliptical) profile with semi-axes `a` along the
/// scan direction and `b` in height, the apex curvature is `b/a²` and the
/// flank curvature `a/b²`; choosing `a = (r_min·r_max²)^(1/3)` and
/// `b = a²/r_max` pins those to `1/r_max` and `1/r_min` exactly.
pub fn kidney_profile(r_min_mm: f64, r_max_mm: f64) -> Result<crate::scan::Surface, PhantomError> {
    if r_min_mm <= 0.0 || r_max_mm < r_min_mm {
        return Err(PhantomError::InvalidSpec(format!(
            "kidney profile needs 0 < r_min ≤ r_max, got {r_min_mm}, {r_max_mm}"
        )));
    }
    let a = (r_min_mm * r_max_mm * r_max_mm).cbrt();
    let b = a * a / r_max_mm;
    Ok(crate::scan::Surface::SuperellipseProfile {
        semi_axis_mm: a,
        height_mm: b,
        exponent: 2.0,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
