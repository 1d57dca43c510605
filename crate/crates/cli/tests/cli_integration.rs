//! End-to-end tests of the command layer: canonical run shape, replay
//! ingestion, determinism, and exit-code mapping.

use std::path::{Path, PathBuf};
use std::process::Command;

use railsense_cli::commands::{self, GlobalArgs};
use railsense_cli::{CliError, ExperimentConfig};

fn write_config(dir: &Path, config: &ExperimentConfig) -> PathBuf {
    let path = dir.join("railsense.toml");
    std::fs::write(&path, config.to_toml()).unwrap();
    path
}

fn zero_noise_config() -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.noise.wavelength_sigma_nm = 0.0;
    config.noise.gain_sigma = 0.0;
    config.noise.common_mode_sigma_nm = 0.0;
    config
}

fn args_for(config_path: &Path, out: &Path, jobs: usize) -> GlobalArgs {
    GlobalArgs {
        config_path: Some(config_path.to_path_buf()),
        seed: None,
        out: Some(out.to_path_buf()),
        jobs,
    }
}

#[test]
fn default_simulate_writes_eight_batches_of_full_frames() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &ExperimentConfig::default());
    let out = dir.path().join("run");
    let output = commands::cmd_simulate(&args_for(&config_path, &out, 1), None, false).unwrap();
    assert_eq!(output.batch_files.len(), 8);
    for file in &output.batch_files {
        let text = std::fs::read_to_string(file).unwrap();
        // Header plus 30 frames × 25 gratings × 8 cores rows.
        assert_eq!(text.lines().count(), 1 + 30 * 25 * 8);
    }
    assert!(out.join("run.toml").is_file());
    assert_eq!(output.manifest.radius_mm, Some(30.0));
}

#[test]
fn single_batch_config_writes_single_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::default();
    config.protocol.batches = 1;
    let config_path = write_config(dir.path(), &config);
    let out = dir.path().join("run");
    let output = commands::cmd_simulate(&args_for(&config_path, &out, 1), None, false).unwrap();
    assert_eq!(output.batch_files.len(), 1);
    assert!(out.join("batch_00.csv").is_file());
}

#[test]
fn pipeline_is_byte_deterministic_under_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &ExperimentConfig::default());

    let run = |tag: &str| -> Vec<(String, Vec<u8>)> {
        let base = dir.path().join(tag);
        let run_dir = base.join("runs").join("r110");
        let args = args_for(&config_path, &run_dir, 1);
        commands::cmd_simulate(&args, Some(4), false).unwrap();
        commands::cmd_reconstruct(&args, &run_dir, None).unwrap();
        let profile = run_dir.join("profiles").join("profile_00.csv");
        let plan_args = args_for(&config_path, &base.join("plan"), 1);
        commands::cmd_shape(&plan_args, &profile, None).unwrap();
        commands::cmd_plan(&plan_args, &profile, Some(5.0), None, false, 0).unwrap();
        let report_args = args_for(&config_path, &base.join("report"), 1);
        commands::cmd_report(&report_args, &base.join("runs")).unwrap();

        let mut files = Vec::new();
        collect_files(&base, &mut files);
        files.sort_by(|a, b| a.0.cmp(&b.0));
        files
    };

    let a = run("a");
    let b = run("b");
    assert_eq!(a.len(), b.len());
    for ((name_a, bytes_a), (name_b, bytes_b)) in a.iter().zip(&b) {
        assert_eq!(name_a.replace("/a/", "/"), name_b.replace("/b/", "/"),);
        assert_eq!(bytes_a, bytes_b, "{name_a} differs between identical runs");
    }
}

fn collect_files(root: &Path, into: &mut Vec<(String, Vec<u8>)>) {
    for entry in std::fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            collect_files(&path, into);
        } else {
            into.push((
                path.to_string_lossy().into_owned(),
                std::fs::read(&path).unwrap(),
            ));
        }
    }
}

#[test]
fn parallel_jobs_match_serial_output() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &ExperimentConfig::default());
    let serial_dir = dir.path().join("serial");
    let parallel_dir = dir.path().join("parallel");
    commands::cmd_simulate(&args_for(&config_path, &serial_dir, 1), Some(2), false).unwrap();
    commands::cmd_simulate(&args_for(&config_path, &parallel_dir, 4), Some(2), false).unwrap();
    for batch in 0..8 {
        let name = format!("batch_{batch:02}.csv");
        let a = std::fs::read(serial_dir.join(&name)).unwrap();
        let b = std::fs::read(parallel_dir.join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between --jobs 1 and --jobs 4");
    }
}

#[test]
fn zero_noise_plan_fits_the_groove_circle() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &zero_noise_config());
    let run_dir = dir.path().join("r110");
    let args = args_for(&config_path, &run_dir, 1);
    commands::cmd_simulate(&args, Some(4), false).unwrap();
    commands::cmd_reconstruct(&args, &run_dir, None).unwrap();
    let profile = run_dir.join("profiles").join("profile_00.csv");
    let plan_out = dir.path().join("plan");
    commands::cmd_plan(
        &args_for(&config_path, &plan_out, 1),
        &profile,
        None,
        None,
        false,
        0,
    )
    .unwrap();

    let text = std::fs::read_to_string(plan_out.join("trajectory.csv")).unwrap();
    let trajectory = railsense_core::csvio::parse_trajectory(&text).unwrap();
    assert_eq!(trajectory.poses.len(), 26);
    let centre = nalgebra::Point3::new(0.0, 110.0, 0.0);
    for pose in &trajectory.poses {
        let radius = (pose.position - centre).norm();
        assert!(
            (radius - 110.0).abs() < 1e-6,
            "waypoint radius {radius} off the 110 mm circle"
        );
        assert!(pose.position.z.abs() < 1e-12);
    }
}

#[test]
fn scan_sim_reproduces_the_detachment_case() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &zero_noise_config());
    let run_dir = dir.path().join("straight");
    let args = args_for(&config_path, &run_dir, 1);
    // Straight reference surface: the planar-assumption plan.
    commands::cmd_simulate(&args, None, true).unwrap();
    commands::cmd_reconstruct(&args, &run_dir, None).unwrap();
    let profile = run_dir.join("profiles").join("profile_00.csv");
    let plan_out = dir.path().join("plan");
    let plan_args = args_for(&config_path, &plan_out, 1);
    commands::cmd_plan(&plan_args, &profile, Some(1.0), None, false, 0).unwrap();

    let scan_out = dir.path().join("scan");
    let output = commands::cmd_scan_sim(
        &args_for(&config_path, &scan_out, 1),
        &plan_out.join("trajectory.csv"),
        "circular:110",
        None,
    )
    .unwrap();
    assert!((output.contact_length_mm - 20.0).abs() <= 1.0);
    assert!(output.detach_index.is_some());
    let report = std::fs::read_to_string(output.report_path).unwrap();
    assert!(report.contains("contact_length_mm = 20"));
    assert!(scan_out.join("element_track.csv").is_file());
}

#[test]
fn fit_modulus_recovers_shipped_ds30_curve() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &ExperimentConfig::default());
    let curve =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ds30_synthetic_stress_strain.csv");
    let output = commands::cmd_fit_modulus(
        &args_for(&config_path, &dir.path().join("out"), 1),
        &curve,
        None,
        None,
    )
    .unwrap();
    assert!(
        (output.youngs_modulus_mpa - 9.990).abs() < 1e-9,
        "E = {}",
        output.youngs_modulus_mpa
    );
}

#[test]
fn shipped_curve_matches_the_synthetic_generator() {
    let curve_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ds30_synthetic_stress_strain.csv");
    let text = std::fs::read_to_string(curve_path).unwrap();
    let parsed = railsense_core::csvio::parse_stress_strain(&text, None).unwrap();
    let generated = railsense_core::materials::synthetic_linear_curve(9.990, 0.2, 201);
    assert_eq!(parsed.samples, generated.samples);
    assert_eq!(parsed.max_compression, generated.max_compression);
}

#[test]
fn replayed_interrogator_export_parses() {
    // A minimal external log: 1 frame of a 2-grating, 3-core fibre.
    let dir = tempfile::tempdir().unwrap();
    let mut config = zero_noise_config();
    config.fiber.outer_core_count = 3;
    config.fiber.has_central_core = false;
    config.fiber.base_wavelengths_nm = vec![1540.0, 1550.0];
    config.protocol.grating_subset = vec![0, 1];
    config.protocol.core_subset = vec![0, 1, 2];
    config.protocol.radius_index = 0;
    let config_path = write_config(dir.path(), &config);

    let mut log = String::from("timestamp_s,grating_index,core_index,wavelength_nm\n");
    for g in 0..2 {
        for c in 0..3 {
            log.push_str(&format!(
                "0,{g},{c},{}\n",
                config.fiber.base_wavelengths_nm[g]
            ));
        }
    }
    let log_path = dir.path().join("external.csv");
    std::fs::write(&log_path, log).unwrap();

    let out = dir.path().join("out");
    let output =
        commands::cmd_reconstruct(&args_for(&config_path, &out, 1), &log_path, None).unwrap();
    assert_eq!(output.profile_files.len(), 1);
    let profile = railsense_core::csvio::parse_profile(
        &std::fs::read_to_string(&output.profile_files[0]).unwrap(),
    )
    .unwrap();
    assert!(profile.samples.iter().all(|s| s.kappa_per_mm == 0.0));
}

#[test]
fn missing_log_file_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), &ExperimentConfig::default());
    let err = commands::cmd_reconstruct(
        &args_for(&config_path, &dir.path().join("out"), 1),
        &dir.path().join("nope"),
        None,
    )
    .unwrap_err();
    assert!(matches!(err, CliError::Data(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn corrupt_config_is_diagnosed_with_field_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    std::fs::write(
        &config_path,
        "schema_version = 1\n[fiber]\nn_eff = \"high\"\n",
    )
    .unwrap();
    let err = ExperimentConfig::load(Some(&config_path)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(msg.contains("n_eff") || msg.contains("line 3"), "{msg}");
}

// ---------------------------------------------------------------------------
// Binary-level checks (exit codes, stdout)
// ---------------------------------------------------------------------------

fn railsense() -> Command {
    Command::new(env!("CARGO_BIN_EXE_railsense"))
}

#[test]
fn binary_emits_default_config_that_validates() {
    let dir = tempfile::tempdir().unwrap();
    let emit = railsense()
        .args(["config", "emit-default"])
        .output()
        .unwrap();
    assert!(emit.status.success());
    let config_path = dir.path().join("railsense.toml");
    std::fs::write(&config_path, &emit.stdout).unwrap();
    let validate = railsense()
        .args(["config", "validate", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert!(validate.status.success());
    assert!(String::from_utf8_lossy(&validate.stdout).contains("ok"));
}

#[test]
fn binary_reports_config_errors_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    std::fs::write(&config_path, "schema_version = 1\nbanana = true\n").unwrap();
    let output = railsense()
        .args(["simulate", "--config"])
        .arg(&config_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("banana"), "{stderr}");
}

#[test]
fn binary_missing_data_exits_3() {
    let output = railsense()
        .args(["reconstruct", "--logs", "/definitely/not/here"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn binary_follow_plan_streams_poses() {
    let dir = tempfile::tempdir().unwrap();
    let profile_path = dir.path().join("profile.csv");
    let mut profile =
        String::from("grating_index,axial_position_mm,kappa_per_mm,phi_rad,direction_defined\n");
    for g in 0..4 {
        profile.push_str(&format!("{g},{},0,0,false\n", g * 10));
    }
    std::fs::write(&profile_path, profile).unwrap();
    let out_dir = dir.path().join("out");
    let output = railsense()
        .args(["plan", "--follow", "--cadence-ms", "1", "--profile"])
        .arg(&profile_path)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    let trajectory = railsense_core::csvio::parse_trajectory(&text).unwrap();
    assert_eq!(trajectory.poses.len(), 5);
}
