//! Command implementations behind the CLI surface.
//!
//! Every command is a plain function over the loaded config plus its own
//! arguments, so integration tests drive them directly. File layout of a
//! canonical experiment:
//!
//! ```text
//! runs/r110/                    (simulate --out runs/r110)
//!   run.toml                    seed, digest, geometry, batch list
//!   batch_00.csv … batch_07.csv wavelength logs, one per batch
//!   profiles/                   (reconstruct --logs runs/r110)
//!     manifest.toml
//!     profile_00.csv …
//!     rejections.csv
//! report/                       (report --run runs)
//!   report.md  tables/*.csv  provenance.txt
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use railsense_core::analysis::{
    accuracy_profile, curvature_error_row, render_report, ErrorTable, ReportInputs,
};
use railsense_core::csvio;
use railsense_core::fiber::{
    sample_field_at_gratings, simulate_sequence, ConstantCurvatureField, NoiseModel,
};
use railsense_core::materials::fit_polynomial_modulus;
use railsense_core::phantoms::{conformity_bias, kidney_profile, GrooveSelection};
use railsense_core::reconstruct::{profile_from_sequence, set_reference, CurvatureProfile};
use railsense_core::scan::{execute_scan, ScanScenario, Surface, TrueSurface};
use railsense_core::seeds::derive_stream_seed;
use railsense_core::shape::{integrate_shape, resample, shape_to_trajectory, Pose};

use crate::config::ExperimentConfig;
use crate::error::CliError;

/// Options shared by every command.
#[derive(Debug, Clone, Default)]
pub struct GlobalArgs {
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

impl GlobalArgs {
    pub fn load_config(&self) -> Result<ExperimentConfig, CliError> {
        ExperimentConfig::load(self.config_path.as_deref())
    }

    pub fn output_dir(&self, config: &ExperimentConfig) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.output_dir))
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))
    }
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub radius_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa_geo_per_mm: Option<f64>,
    pub seed: u64,
    pub config_digest: String,
    pub synthetic_flags: Vec<String>,
    pub batch_files: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfilesManifest {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kappa_geo_per_mm: Option<f64>,
    pub seed: u64,
    pub config_digest: String,
    pub synthetic_flags: Vec<String>,
    pub profile_files: Vec<String>,
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct SimulateOutput {
    pub batch_files: Vec<PathBuf>,
    pub manifest: RunManifest,
}

/// Simulates the batch protocol for one groove of the configured phantom
/// (or a straight reference surface) and writes one wavelength log per
/// batch plus a `run.toml` manifest.
pub fn cmd_simulate(
    args: &GlobalArgs,
    radius_index: Option<usize>,
    straight: bool,
) -> Result<SimulateOutput, CliError> {
    let config = args.load_config()?;
    let out_dir = args.output_dir(&config);
    let fiber = config.fiber_spec()?;
    let phantom = config.phantom_spec()?;
    let rail = config.rail_spec()?;
    let master_seed = args.seed.unwrap_or(config.noise.seed);

    let selection = if straight {
        GrooveSelection::Straight
    } else {
        GrooveSelection::Radius(radius_index.unwrap_or(config.protocol.radius_index))
    };
    let mut field = railsense_core::phantoms::groove_curvature_field(&phantom, selection)?;
    let radius_mm = match selection {
        GrooveSelection::Straight => None,
        GrooveSelection::Radius(i) => Some(phantom.radii_mm[i]),
    };

    let mut noise = config.noise_model(Some(master_seed));
    let mut synthetic_flags = Vec::new();
    if config.conformity.enabled {
        if let Some(r) = radius_mm {
            let params = config.conformity_params();
            let (bias, noise_scale) = conformity_bias(&rail, &phantom, r, &params)?;
            field = ConstantCurvatureField {
                kappa_per_mm: field.kappa_per_mm + bias,
                bend_direction_rad: field.bend_direction_rad,
            };
            noise = NoiseModel {
                seed: noise.seed,
                ..noise.scaled(noise_scale)
            };
            synthetic_flags.push(format!(
                "SYNTHETIC:conformity_bias(kappa_bias={bias},noise_scale={noise_scale})"
            ));
        }
    }

    let samples = sample_field_at_gratings(&field, &fiber)?;
    std::fs::create_dir_all(&out_dir)?;

    let batches: Vec<usize> = (0..config.protocol.batches).collect();
    let frames_per_batch = config.protocol.frames_per_batch;
    let frame_rate = config.protocol.frame_rate_hz;
    let pool = args.pool()?;
    let rendered: Result<Vec<(usize, String)>, CliError> = pool.install(|| {
        batches
            .par_iter()
            .map(|&batch| {
                let batch_noise = NoiseModel {
                    seed: batch_seed(master_seed, batch),
                    ..noise
                };
                let frames = simulate_sequence(
                    &fiber,
                    &samples,
                    &batch_noise,
                    frames_per_batch,
                    frame_rate,
                )?;
                Ok((batch, csvio::write_wavelength_log(&frames)))
            })
            .collect()
    });

    let mut batch_files = Vec::new();
    let mut batch_names = Vec::new();
    for (batch, contents) in rendered? {
        let name = format!("batch_{batch:02}.csv");
        let path = out_dir.join(&name);
        std::fs::write(&path, contents)?;
        batch_files.push(path);
        batch_names.push(name);
    }

    let manifest = RunManifest {
        schema_version: 1,
        radius_mm,
        kappa_geo_per_mm: radius_mm.map(|r| 1.0 / r),
        seed: master_seed,
        config_digest: config.digest(),
        synthetic_flags,
        batch_files: batch_names,
    };
    std::fs::write(
        out_dir.join("run.toml"),
        toml::to_string(&manifest).expect("manifest serialises"),
    )?;
    Ok(SimulateOutput {
        batch_files,
        manifest,
    })
}

fn batch_seed(master: u64, batch: usize) -> u64 {
    derive_stream_seed(master, 0x0B00_0000 + batch as u64)
}

// ---------------------------------------------------------------------------
// reconstruct
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ReconstructOutput {
    pub profile_files: Vec<PathBuf>,
    /// (batch index, rejected frame index) pairs.
    pub rejections: Vec<(usize, usize)>,
}

/// Reconstructs every wavelength log of a simulate run (or a single replay
/// CSV) into curvature-profile CSVs plus a rejection log.
pub fn cmd_reconstruct(
    args: &GlobalArgs,
    logs: &Path,
    reference: Option<&Path>,
) -> Result<ReconstructOutput, CliError> {
    let config = args.load_config()?;
    let fiber = config.fiber_spec()?;
    let settings = config.reconstruction_settings();
    let subset = &config.protocol.grating_subset;

    let log_files = collect_logs(logs)?;
    let run_manifest = read_run_manifest(logs);

    let reference_matrix = match reference {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let frames = csvio::parse_wavelength_log(&text)?;
            set_reference(&frames)?
        }
        None => nalgebra::DMatrix::from_fn(fiber.gratings_per_core, fiber.total_cores(), |g, _| {
            fiber.base_wavelengths_nm[g]
        }),
    };

    let out_dir = if logs.is_dir() {
        logs.join("profiles")
    } else {
        args.output_dir(&config)
    };
    std::fs::create_dir_all(&out_dir)?;

    let pool = args.pool()?;
    let reconstructed: Result<Vec<(usize, CurvatureProfile)>, CliError> = pool.install(|| {
        log_files
            .par_iter()
            .enumerate()
            .map(|(batch, path)| {
                let text = std::fs::read_to_string(path)?;
                let frames = csvio::parse_wavelength_log(&text)?;
                let profile =
                    profile_from_sequence(&frames, &reference_matrix, &fiber, subset, &settings)?;
                Ok((batch, profile))
            })
            .collect()
    });
    let reconstructed = reconstructed?;

    let mut profile_files = Vec::new();
    let mut profile_names = Vec::new();
    let mut rejections = Vec::new();
    for (batch, profile) in &reconstructed {
        let name = format!("profile_{batch:02}.csv");
        let path = out_dir.join(&name);
        std::fs::write(&path, csvio::write_profile(profile))?;
        for &frame in &profile.rejected_frame_indices {
            rejections.push((*batch, frame));
        }
        profile_files.push(path);
        profile_names.push(name);
    }

    let mut rejection_csv = String::from("batch_index,frame_index\n");
    for &(batch, frame) in &rejections {
        rejection_csv.push_str(&format!("{batch},{frame}\n"));
    }
    std::fs::write(out_dir.join("rejections.csv"), rejection_csv)?;

    let manifest = ProfilesManifest {
        schema_version: 1,
        kappa_geo_per_mm: run_manifest.as_ref().and_then(|m| m.kappa_geo_per_mm),
        seed: run_manifest
            .as_ref()
            .map_or_else(|| args.seed.unwrap_or(config.noise.seed), |m| m.seed),
        config_digest: config.digest(),
        synthetic_flags: run_manifest.map(|m| m.synthetic_flags).unwrap_or_default(),
        profile_files: profile_names,
    };
    std::fs::write(
        out_dir.join("manifest.toml"),
        toml::to_string(&manifest).expect("manifest serialises"),
    )?;

    Ok(ReconstructOutput {
        profile_files,
        rejections,
    })
}

fn collect_logs(logs: &Path) -> Result<Vec<PathBuf>, CliError> {
    if logs.is_file() {
        return Ok(vec![logs.to_path_buf()]);
    }
    if !logs.is_dir() {
        return Err(CliError::Data(format!(
            "log path {} does not exist",
            logs.display()
        )));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(logs)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "csv")
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("batch_"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "no batch_*.csv logs found in {}",
            logs.display()
        )));
    }
    Ok(files)
}

fn read_run_manifest(logs: &Path) -> Option<RunManifest> {
    let path = if logs.is_dir() {
        logs.join("run.toml")
    } else {
        logs.parent()?.join("run.toml")
    };
    let text = std::fs::read_to_string(path).ok()?;
    toml::from_str(&text).ok()
}

// ---------------------------------------------------------------------------
// shape / plan
// ---------------------------------------------------------------------------

/// Integrates a profile CSV into a planar shape CSV.
pub fn cmd_shape(
    args: &GlobalArgs,
    profile_path: &Path,
    segment_length_mm: Option<f64>,
) -> Result<PathBuf, CliError> {
    let config = args.load_config()?;
    let profile = csvio::parse_profile(&std::fs::read_to_string(profile_path)?)?;
    let segment = segment_length_mm.unwrap_or(config.fiber.grating_spacing_mm);
    let shape = integrate_shape(&profile, segment)?;

    let mut out = String::new();
    out.push_str("# railsense shape v1\n");
    out.push_str(&format!(
        "# source_profile_hash={}\n",
        shape.source_profile_hash
    ));
    out.push_str(&format!("# arc_length_mm={}\n", shape.arc_length_mm));
    out.push_str("index,x_mm,y_mm,tangent_rad\n");
    for (i, (p, t)) in shape.points.iter().zip(&shape.tangents_rad).enumerate() {
        out.push_str(&format!("{},{},{},{}\n", i, p.x, p.y, t));
    }

    let out_dir = args.output_dir(&config);
    std::fs::create_dir_all(&out_dir)?;
    let path = out_dir.join("shape.csv");
    std::fs::write(&path, out)?;
    Ok(path)
}

/// Plans a probe trajectory from a profile CSV: integrate, lift through the
/// attach pose, optionally resample, and emit the trajectory CSV. With
/// `follow`, poses are appended one by one at a fixed cadence, standing in
/// for live pose streaming.
#[allow(clippy::too_many_arguments)]
pub fn cmd_plan(
    args: &GlobalArgs,
    profile_path: &Path,
    spacing_mm: Option<f64>,
    attach: Option<&str>,
    follow: bool,
    cadence_ms: u64,
) -> Result<PathBuf, CliError> {
    let config = args.load_config()?;
    let profile = csvio::parse_profile(&std::fs::read_to_string(profile_path)?)?;
    let shape = integrate_shape(&profile, config.fiber.grating_spacing_mm)?;
    let attach_pose = match attach {
        Some(text) => parse_attach_pose(text)?,
        None => Pose::identity(),
    };
    let mut trajectory = shape_to_trajectory(&shape, &attach_pose);
    if let Some(spacing) = spacing_mm {
        trajectory = resample(&trajectory, spacing)?;
    }

    let out_dir = args.output_dir(&config);
    std::fs::create_dir_all(&out_dir)?;
    let path = out_dir.join("trajectory.csv");
    let text = csvio::write_trajectory(&trajectory, Some(&attach_pose));
    if follow {
        // Streaming stand-in: append pose lines at the requested cadence.
        let mut file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        for line in text.lines() {
            writeln!(file, "{line}")?;
            file.flush()?;
            if cadence_ms > 0 && !line.starts_with('#') && !line.starts_with("index") {
                std::thread::sleep(std::time::Duration::from_millis(cadence_ms));
            }
        }
    } else {
        std::fs::write(&path, text)?;
    }
    Ok(path)
}

fn parse_attach_pose(text: &str) -> Result<Pose, CliError> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Config(format!("attach pose {text:?}: {e}")))?;
    match parts.len() {
        3 => Ok(Pose::from_translation(parts[0], parts[1], parts[2])),
        7 => {
            let q = nalgebra::Quaternion::new(parts[6], parts[3], parts[4], parts[5]);
            Ok(Pose {
                position: nalgebra::Point3::new(parts[0], parts[1], parts[2]),
                orientation: nalgebra::UnitQuaternion::from_quaternion(q),
            })
        }
        n => Err(CliError::Config(format!(
            "attach pose needs 3 (x,y,z) or 7 (x,y,z,qx,qy,qz,qw) numbers, got {n}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// scan-sim
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ScanSimOutput {
    pub report_path: PathBuf,
    pub track_path: PathBuf,
    pub contact_length_mm: f64,
    pub detach_index: Option<usize>,
}

/// Executes a planned trajectory over a declared true surface and writes
/// the scan report plus the imaging-element track.
pub fn cmd_scan_sim(
    args: &GlobalArgs,
    trajectory_path: &Path,
    surface_spec: &str,
    detach_threshold_mm: Option<f64>,
) -> Result<ScanSimOutput, CliError> {
    let config = args.load_config()?;
    let trajectory = csvio::parse_trajectory(&std::fs::read_to_string(trajectory_path)?)?;
    let surface = parse_surface(surface_spec)?;

    let scenario = ScanScenario {
        phantom: config.phantom_spec()?,
        rail: config.rail_spec()?,
        trajectory,
        probe_element_offset_mm: config.scan.probe_element_offset_mm,
        detach_threshold_mm: detach_threshold_mm.unwrap_or(config.scan.detach_threshold_mm),
        synthetic_flags: if config.conformity.enabled {
            vec!["SYNTHETIC:conformity_bias".into()]
        } else {
            vec![]
        },
    };
    let report = execute_scan(&scenario, &TrueSurface::new(surface))?;

    let out_dir = args.output_dir(&config);
    std::fs::create_dir_all(&out_dir)?;
    let mut text = String::new();
    text.push_str("railsense scan report v1\n");
    text.push_str(&format!("phantom = {}\n", report.phantom_label));
    text.push_str(&format!("surface = {surface_spec}\n"));
    text.push_str(&format!(
        "contact_length_mm = {}\n",
        report.contact_length_mm
    ));
    match report.detach_index {
        Some(i) => text.push_str(&format!("detach_index = {i}\n")),
        None => text.push_str("detach_index = none\n"),
    }
    text.push_str(&format!(
        "max_surface_deviation_mm = {}\n",
        report.max_surface_deviation_mm
    ));
    if report.synthetic_flags.is_empty() {
        text.push_str("synthetic_flags = none\n");
    } else {
        for flag in &report.synthetic_flags {
            text.push_str(&format!("synthetic_flag = {flag}\n"));
        }
    }
    let report_path = out_dir.join("scan_report.txt");
    std::fs::write(&report_path, text)?;
    let track_path = out_dir.join("element_track.csv");
    std::fs::write(
        &track_path,
        csvio::write_element_track(&report.element_track),
    )?;

    Ok(ScanSimOutput {
        report_path,
        track_path,
        contact_length_mm: report.contact_length_mm,
        detach_index: report.detach_index,
    })
}

fn parse_surface(spec: &str) -> Result<Surface, CliError> {
    let (kind, params) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Config(format!("surface {spec:?}: expected kind:params")))?;
    let parse = |v: &str, what: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Config(format!("surface {spec:?}: {what}: {e}")))
    };
    match kind {
        "plane" => Ok(Surface::Plane {
            height_mm: parse(params, "height")?,
        }),
        "circular" => Ok(Surface::CircularArc {
            radius_mm: parse(params, "radius")?,
        }),
        "kidney" => {
            let (rmin, rmax) = params.split_once(',').ok_or_else(|| {
                CliError::Config(format!("surface {spec:?}: kidney needs r_min,r_max"))
            })?;
            Ok(kidney_profile(
                parse(rmin, "r_min")?,
                parse(rmax, "r_max")?,
            )?)
        }
        other => Err(CliError::Config(format!(
            "surface kind {other:?} is not one of plane, circular, kidney"
        ))),
    }
}

// ---------------------------------------------------------------------------
// fit-modulus
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct ModulusOutput {
    pub youngs_modulus_mpa: f64,
    pub standard_error_mpa: f64,
}

/// Fits a Young's modulus from a stress-strain CSV with the configured
/// windowed fit.
pub fn cmd_fit_modulus(
    args: &GlobalArgs,
    curve_path: &Path,
    degree: Option<usize>,
    max_compression: Option<f64>,
) -> Result<ModulusOutput, CliError> {
    let config = args.load_config()?;
    let curve = csvio::parse_stress_strain(&std::fs::read_to_string(curve_path)?, max_compression)?;
    let degree = degree.unwrap_or(config.modulus.fit_degree);
    let (youngs_modulus_mpa, standard_error_mpa) = fit_polynomial_modulus(&curve, degree)?;
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out)?;
        std::fs::write(
            out.join("modulus.txt"),
            format!(
                "youngs_modulus_mpa = {youngs_modulus_mpa}\nstandard_error_mpa = {standard_error_mpa}\nfit_degree = {degree}\n"
            ),
        )?;
    }
    Ok(ModulusOutput {
        youngs_modulus_mpa,
        standard_error_mpa,
    })
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

/// Assembles the metrology report from a directory of reconstructed runs
/// (each subdirectory holding `profiles/manifest.toml`).
pub fn cmd_report(args: &GlobalArgs, run_dir: &Path) -> Result<PathBuf, CliError> {
    let config = args.load_config()?;

    // Collect (kappa_geo, repetitions) per run, sorted by radius.
    let mut runs: Vec<(f64, Vec<CurvatureProfile>, ProfilesManifest)> = Vec::new();
    let mut entries: Vec<PathBuf> = std::fs::read_dir(run_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.join("profiles").join("manifest.toml").is_file())
        .collect();
    entries.sort();
    if entries.is_empty() {
        return Err(CliError::Data(format!(
            "no reconstructed runs (profiles/manifest.toml) under {}",
            run_dir.display()
        )));
    }
    for entry in &entries {
        let profiles_dir = entry.join("profiles");
        let manifest: ProfilesManifest = toml::from_str(&std::fs::read_to_string(
            profiles_dir.join("manifest.toml"),
        )?)
        .map_err(|e| CliError::Data(format!("{}: {e}", profiles_dir.display())))?;
        let kappa_geo = manifest.kappa_geo_per_mm.ok_or_else(|| {
            CliError::Data(format!(
                "{}: run has no geometric curvature (straight reference?); cannot report errors",
                entry.display()
            ))
        })?;
        let mut repetitions = Vec::new();
        for name in &manifest.profile_files {
            let text = std::fs::read_to_string(profiles_dir.join(name))?;
            repetitions.push(csvio::parse_profile(&text)?);
        }
        if repetitions.is_empty() {
            return Err(CliError::Data(format!(
                "{}: manifest lists no profiles",
                entry.display()
            )));
        }
        runs.push((kappa_geo, repetitions, manifest));
    }
    runs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap()); // ascending radius

    let mut full_rows = Vec::new();
    let mut central_rows = Vec::new();
    let central_range = (10usize, 18usize);
    for (kappa_geo, repetitions, _) in &runs {
        full_rows.push(curvature_error_row(repetitions, *kappa_geo, None)?);
        let covers_central = repetitions[0]
            .grating_indices
            .iter()
            .any(|g| (central_range.0..=central_range.1).contains(g));
        if covers_central {
            central_rows.push(curvature_error_row(
                repetitions,
                *kappa_geo,
                Some(central_range),
            )?);
        }
    }

    let accuracy_runs: Vec<(f64, CurvatureProfile)> = runs
        .iter()
        .flat_map(|(kappa_geo, repetitions, _)| repetitions.iter().map(|p| (*kappa_geo, p.clone())))
        .collect();
    let accuracy = accuracy_profile(&accuracy_runs)?;

    let mut tables = vec![ErrorTable {
        label: "curvature_errors_all_gratings".into(),
        grating_range: None,
        rows: full_rows,
    }];
    if !central_rows.is_empty() {
        tables.push(ErrorTable {
            label: "curvature_errors_central_gratings".into(),
            grating_range: Some(central_range),
            rows: central_rows,
        });
    }

    let mut synthetic_flags: Vec<String> = runs
        .iter()
        .flat_map(|(_, _, m)| m.synthetic_flags.iter().cloned())
        .collect();
    synthetic_flags.sort();
    synthetic_flags.dedup();

    let inputs = ReportInputs {
        tables,
        accuracy_profiles: vec![("sensing_accuracy".into(), accuracy)],
        seed: runs[0].2.seed,
        config_digest: config.digest(),
        synthetic_flags,
    };
    let bundle = render_report(&inputs);
    let out_dir = args.output_dir(&config);
    bundle.write_to(&out_dir)?;
    Ok(out_dir)
}

// ---------------------------------------------------------------------------
// config subcommands
// ---------------------------------------------------------------------------

/// Emits the default config (the canonical protocol) as TOML.
pub fn cmd_config_emit_default(out: Option<&Path>) -> Result<String, CliError> {
    let text = ExperimentConfig::default().to_toml();
    if let Some(path) = out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(path, &text)?;
    }
    Ok(text)
}

/// Loads and validates a config file, returning its digest.
pub fn cmd_config_validate(path: &Path) -> Result<String, CliError> {
    let config = ExperimentConfig::load(Some(path))?;
    Ok(config.digest())
}
