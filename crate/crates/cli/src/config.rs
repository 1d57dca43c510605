//! Experiment configuration: a schema-versioned TOML file whose defaults
//! reproduce the canonical acquisition protocol (30 frames per batch at
//! 100 Hz, eight batches, groove radii 30–110 mm, four of seven outer
//! cores in the fit) without any flags.
//!
//! Unknown keys are rejected and parse diagnostics carry line/column
//! positions. The effective config re-serialises deterministically, so its
//! digest identifies a run.

use serde::{Deserialize, Serialize};
use std::path::Path;

use railsense_core::fiber::{FiberSpec, NoiseModel};
use railsense_core::materials::{material_by_name, MaterialSpec};
use railsense_core::phantoms::{
    ConformityParams, PhantomKind, PhantomMaterial, PhantomSpec, RailSpec,
};
use railsense_core::reconstruct::ReconstructionSettings;

use crate::error::CliError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub output_dir: String,
    pub fiber: FiberConfig,
    pub noise: NoiseConfig,
    pub protocol: ProtocolConfig,
    pub rail: RailConfig,
    pub phantom: PhantomConfig,
    pub scan: ScanConfig,
    pub modulus: ModulusConfig,
    pub conformity: ConformityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberConfig {
    pub outer_core_count: usize,
    pub core_radial_offset_um: f64,
    pub has_central_core: bool,
    pub grating_spacing_mm: f64,
    pub n_eff: f64,
    pub strain_optic_coefficient: f64,
    /// One per grating; the grating count follows from this list.
    pub base_wavelengths_nm: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub wavelength_sigma_nm: f64,
    pub gain_sigma: f64,
    pub common_mode_sigma_nm: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub frames_per_batch: usize,
    pub batches: usize,
    pub frame_rate_hz: f64,
    /// Gratings entering reconstruction (strictly increasing indices).
    pub grating_subset: Vec<usize>,
    /// Outer cores entering the per-grating fit.
    pub core_subset: Vec<usize>,
    /// Which phantom radius a simulate run uses by default.
    pub radius_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RailConfig {
    /// Library material name.
    pub material: String,
    pub grating_groups_in_rail: usize,
    pub first_group_offset_mm: f64,
    pub vacuum_pressure_kpa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomConfig {
    /// One of `groove_plate`, `rigid_block`, `soft_block`, `kidney_surface`.
    pub kind: String,
    pub radii_mm: Vec<f64>,
    /// Library material name, or `RIGID`.
    pub material: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_elevation_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub probe_element_offset_mm: f64,
    /// Constructed detachment threshold for scan scenarios, mm.
    pub detach_threshold_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModulusConfig {
    /// Polynomial degree of the windowed stress-strain fit.
    pub fit_degree: usize,
}

/// Synthetic conformity-bias model switches (see the core documentation for
/// the functional form). When enabled, simulate runs add the model's
/// curvature bias and noise scaling and flag their outputs SYNTHETIC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConformityConfig {
    pub enabled: bool,
    pub bias_gain: f64,
    pub bias_mismatch_gain: f64,
    pub noise_gain_mm: f64,
    pub noise_mismatch_gain: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            output_dir: "out".into(),
            fiber: FiberConfig::default(),
            noise: NoiseConfig::default(),
            protocol: ProtocolConfig::default(),
            rail: RailConfig::default(),
            phantom: PhantomConfig::default(),
            scan: ScanConfig::default(),
            modulus: ModulusConfig::default(),
            conformity: ConformityConfig::default(),
        }
    }
}

impl Default for FiberConfig {
    fn default() -> Self {
        let spec = FiberSpec::default();
        Self {
            outer_core_count: spec.outer_core_count,
            core_radial_offset_um: spec.core_radial_offset_um,
            has_central_core: spec.has_central_core,
            grating_spacing_mm: spec.grating_spacing_mm,
            n_eff: spec.n_eff,
            strain_optic_coefficient: spec.strain_optic_coefficient,
            base_wavelengths_nm: spec.base_wavelengths_nm,
        }
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let noise = NoiseModel::default();
        Self {
            wavelength_sigma_nm: noise.wavelength_sigma_nm,
            gain_sigma: noise.gain_sigma,
            common_mode_sigma_nm: noise.common_mode_sigma_nm,
            seed: noise.seed,
        }
    }
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            frames_per_batch: 30,
            batches: 8,
            frame_rate_hz: 100.0,
            grating_subset: (0..25).collect(),
            core_subset: vec![0, 2, 4, 6],
            radius_index: 0,
        }
    }
}

impl Default for RailConfig {
    fn default() -> Self {
        Self {
            material: "DragonSkin 30".into(),
            grating_groups_in_rail: 8,
            first_group_offset_mm: 3.0,
            vacuum_pressure_kpa: 7.325,
        }
    }
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            kind: "groove_plate".into(),
            radii_mm: vec![30.0, 50.0, 70.0, 90.0, 110.0],
            material: "RIGID".into(),
            step_elevation_mm: None,
        }
    }
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            probe_element_offset_mm: 30.0,
            detach_threshold_mm: 1.85,
        }
    }
}

impl Default for ModulusConfig {
    fn default() -> Self {
        Self { fit_degree: 1 }
    }
}

impl Default for ConformityConfig {
    fn default() -> Self {
        let params = ConformityParams::default();
        Self {
            enabled: false,
            bias_gain: params.bias_gain,
            bias_mismatch_gain: params.bias_mismatch_gain,
            noise_gain_mm: params.noise_gain_mm,
            noise_mismatch_gain: params.noise_mismatch_gain,
        }
    }
}

impl ExperimentConfig {
    /// Loads and validates a config file; `None` yields the built-in
    /// defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let config = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::parse(&text)
                    .map_err(|e| CliError::Config(format!("in {}: {e}", p.display())))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    /// Parses config text; diagnostics include line/column positions and
    /// the offending field.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str::<Self>(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Serialises the effective config (deterministic field order).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Short hex digest of the effective config.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml().as_bytes());
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} unsupported (expected {CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.fiber_spec()?;
        self.rail_spec()?;
        self.phantom_spec()?;
        let p = &self.protocol;
        if p.frames_per_batch < 1 || p.batches < 1 {
            return Err(CliError::Config(
                "protocol.frames_per_batch and protocol.batches must be ≥ 1".into(),
            ));
        }
        if p.frame_rate_hz <= 0.0 {
            return Err(CliError::Config(
                "protocol.frame_rate_hz must be positive".into(),
            ));
        }
        let gratings = self.fiber.base_wavelengths_nm.len();
        if p.grating_subset.is_empty() {
            return Err(CliError::Config("protocol.grating_subset is empty".into()));
        }
        for pair in p.grating_subset.windows(2) {
            if pair[1] <= pair[0] {
                return Err(CliError::Config(
                    "protocol.grating_subset must be strictly increasing".into(),
                ));
            }
        }
        if *p.grating_subset.last().unwrap() >= gratings {
            return Err(CliError::Config(format!(
                "protocol.grating_subset index {} out of range (fibre has {gratings} gratings)",
                p.grating_subset.last().unwrap()
            )));
        }
        if p.core_subset.len() < 3 {
            return Err(CliError::Config(
                "protocol.core_subset needs at least 3 outer cores".into(),
            ));
        }
        for &c in &p.core_subset {
            if c >= self.fiber.outer_core_count {
                return Err(CliError::Config(format!(
                    "protocol.core_subset entry {c} is not an outer core"
                )));
            }
        }
        if p.radius_index >= self.phantom.radii_mm.len() {
            return Err(CliError::Config(format!(
                "protocol.radius_index {} out of range ({} radii)",
                p.radius_index,
                self.phantom.radii_mm.len()
            )));
        }
        let noise = self.noise_model(None);
        if noise.wavelength_sigma_nm < 0.0
            || noise.gain_sigma < 0.0
            || noise.common_mode_sigma_nm < 0.0
        {
            return Err(CliError::Config("noise sigmas must be non-negative".into()));
        }
        if self.scan.probe_element_offset_mm < 0.0 {
            return Err(CliError::Config(
                "scan.probe_element_offset_mm must be non-negative".into(),
            ));
        }
        if self.scan.detach_threshold_mm.is_nan() || self.scan.detach_threshold_mm <= 0.0 {
            return Err(CliError::Config(
                "scan.detach_threshold_mm must be positive".into(),
            ));
        }
        if self.modulus.fit_degree < 1 {
            return Err(CliError::Config("modulus.fit_degree must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn fiber_spec(&self) -> Result<FiberSpec, CliError> {
        FiberSpec::from_wavelengths(
            self.fiber.n_eff,
            &self.fiber.base_wavelengths_nm,
            self.fiber.outer_core_count,
            self.fiber.core_radial_offset_um,
            self.fiber.has_central_core,
            self.fiber.grating_spacing_mm,
            self.fiber.strain_optic_coefficient,
        )
        .map_err(|e| CliError::Config(format!("fiber: {e}")))
    }

    /// Noise model with an optional seed override from the command line.
    pub fn noise_model(&self, seed_override: Option<u64>) -> NoiseModel {
        NoiseModel {
            wavelength_sigma_nm: self.noise.wavelength_sigma_nm,
            gain_sigma: self.noise.gain_sigma,
            common_mode_sigma_nm: self.noise.common_mode_sigma_nm,
            seed: seed_override.unwrap_or(self.noise.seed),
        }
    }

    pub fn reconstruction_settings(&self) -> ReconstructionSettings {
        ReconstructionSettings {
            core_subset: self.protocol.core_subset.clone(),
            ..ReconstructionSettings::default()
        }
    }

    pub fn rail_spec(&self) -> Result<RailSpec, CliError> {
        let material = lookup_material(&self.rail.material)?.ok_or_else(|| {
            CliError::Config(format!(
                "rail.material {:?} must name a library material",
                self.rail.material
            ))
        })?;
        let rail = RailSpec {
            material,
            grating_groups_in_rail: self.rail.grating_groups_in_rail,
            first_group_offset_mm: self.rail.first_group_offset_mm,
            vacuum_pressure_kpa: self.rail.vacuum_pressure_kpa,
        };
        rail.validate()
            .map_err(|e| CliError::Config(format!("rail: {e}")))?;
        Ok(rail)
    }

    pub fn phantom_spec(&self) -> Result<PhantomSpec, CliError> {
        let kind = match self.phantom.kind.as_str() {
            "groove_plate" => PhantomKind::GroovePlate,
            "rigid_block" => PhantomKind::RigidBlock,
            "soft_block" => PhantomKind::SoftBlock,
            "kidney_surface" => PhantomKind::KidneySurface,
            other => {
                return Err(CliError::Config(format!(
                    "phantom.kind {other:?} is not one of groove_plate, rigid_block, soft_block, kidney_surface"
                )))
            }
        };
        let material = match lookup_material(&self.phantom.material)? {
            Some(m) => PhantomMaterial::Material(m),
            None => PhantomMaterial::Rigid,
        };
        let phantom = PhantomSpec {
            kind,
            radii_mm: self.phantom.radii_mm.clone(),
            material,
            step_elevation_mm: self.phantom.step_elevation_mm,
        };
        phantom
            .validate()
            .map_err(|e| CliError::Config(format!("phantom: {e}")))?;
        Ok(phantom)
    }

    pub fn conformity_params(&self) -> ConformityParams {
        ConformityParams {
            bias_gain: self.conformity.bias_gain,
            bias_mismatch_gain: self.conformity.bias_mismatch_gain,
            noise_gain_mm: self.conformity.noise_gain_mm,
            noise_mismatch_gain: self.conformity.noise_mismatch_gain,
        }
    }
}

/// Resolves a material field: `RIGID` means no library material.
fn lookup_material(name: &str) -> Result<Option<MaterialSpec>, CliError> {
    if name == "RIGID" {
        return Ok(None);
    }
    material_by_name(name)
        .map(|m| Some(m.clone()))
        .map_err(|e| CliError::Config(e.to_string()))
}
