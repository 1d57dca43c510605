//! `railsense` — simulate, reconstruct, and plan rail-guided probe scans
//! from multicore FBG shape sensing.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use railsense_cli::commands::{self, GlobalArgs};
use railsense_cli::CliError;

#[derive(Parser)]
#[command(
    name = "railsense",
    version,
    about = "Multicore FBG shape-sensing simulation, reconstruction, and probe trajectory planning"
)]
struct Cli {
    /// Experiment config file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the noise seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory from the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for per-batch parallelism (output is order-stable).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Config utilities.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Simulate the batch acquisition protocol into wavelength logs.
    Simulate {
        /// Groove index into the phantom radius list (default from config).
        #[arg(long)]
        radius_index: Option<usize>,
        /// Simulate the straight reference surface instead of a groove.
        #[arg(long)]
        straight: bool,
    },
    /// Reconstruct wavelength logs into curvature profiles.
    Reconstruct {
        /// Directory of batch_*.csv logs (or one replay CSV).
        #[arg(long)]
        logs: PathBuf,
        /// Optional straight-fibre wavelength log used as the reference.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Integrate a curvature profile into a planar shape.
    Shape {
        #[arg(long)]
        profile: PathBuf,
        /// Arc length per profile sample, mm (default: grating spacing).
        #[arg(long)]
        segment_length_mm: Option<f64>,
    },
    /// Plan a probe trajectory from a curvature profile.
    Plan {
        #[arg(long)]
        profile: PathBuf,
        /// Resample waypoints at this arc-length spacing, mm.
        #[arg(long)]
        spacing_mm: Option<f64>,
        /// Attach pose: "x,y,z" or "x,y,z,qx,qy,qz,qw".
        #[arg(long)]
        attach: Option<String>,
        /// Stream poses to the output file at a fixed cadence.
        #[arg(long)]
        follow: bool,
        /// Cadence for --follow, milliseconds.
        #[arg(long, default_value_t = 10)]
        cadence_ms: u64,
    },
    /// Execute a planned trajectory over a declared true surface.
    ScanSim {
        #[arg(long)]
        trajectory: PathBuf,
        /// Surface: `plane:<h>`, `circular:<R>`, or `kidney:<rmin>,<rmax>`.
        #[arg(long)]
        surface: String,
        /// Override the detachment threshold, mm.
        #[arg(long)]
        detach_threshold_mm: Option<f64>,
    },
    /// Fit a Young's modulus from a stress-strain CSV.
    FitModulus {
        #[arg(long)]
        curve: PathBuf,
        /// Polynomial degree of the windowed fit (default from config).
        #[arg(long)]
        degree: Option<usize>,
        /// Maximum compression strain (default: the curve's final strain).
        #[arg(long)]
        max_compression: Option<f64>,
    },
    /// Assemble the metrology report from reconstructed runs.
    Report {
        /// Directory containing one subdirectory per radius run.
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print (or write with --out) the default config.
    EmitDefault,
    /// Validate a config file given via --config.
    Validate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let args = GlobalArgs {
        config_path: cli.config.clone(),
        seed: cli.seed,
        out: cli.out.clone(),
        jobs: cli.jobs,
    };
    match cli.command {
        Command::Config { action } => match action {
            ConfigAction::EmitDefault => {
                let out_file = cli.out.as_ref().map(|d| d.join("railsense.toml"));
                let text = commands::cmd_config_emit_default(out_file.as_deref())?;
                if out_file.is_none() {
                    print!("{text}");
                }
            }
            ConfigAction::Validate => {
                let path = cli.config.as_ref().ok_or_else(|| {
                    CliError::Config("config validate requires --config <file>".into())
                })?;
                let digest = commands::cmd_config_validate(path)?;
                println!("ok (digest {digest})");
            }
        },
        Command::Simulate {
            radius_index,
            straight,
        } => {
            let output = commands::cmd_simulate(&args, radius_index, straight)?;
            println!(
                "wrote {} batch logs (seed {})",
                output.batch_files.len(),
                output.manifest.seed
            );
        }
        Command::Reconstruct { logs, reference } => {
            let output = commands::cmd_reconstruct(&args, &logs, reference.as_deref())?;
            println!(
                "wrote {} profiles, {} frames rejected",
                output.profile_files.len(),
                output.rejections.len()
            );
        }
        Command::Shape {
            profile,
            segment_length_mm,
        } => {
            let path = commands::cmd_shape(&args, &profile, segment_length_mm)?;
            println!("wrote {}", path.display());
        }
        Command::Plan {
            profile,
            spacing_mm,
            attach,
            follow,
            cadence_ms,
        } => {
            let path = commands::cmd_plan(
                &args,
                &profile,
                spacing_mm,
                attach.as_deref(),
                follow,
                cadence_ms,
            )?;
            println!("wrote {}", path.display());
        }
        Command::ScanSim {
            trajectory,
            surface,
            detach_threshold_mm,
        } => {
            let output = commands::cmd_scan_sim(&args, &trajectory, &surface, detach_threshold_mm)?;
            match output.detach_index {
                Some(i) => println!(
                    "detached at waypoint {i}; contact length {} mm ({})",
                    output.contact_length_mm,
                    output.report_path.display()
                ),
                None => println!(
                    "full contact over {} mm ({})",
                    output.contact_length_mm,
                    output.report_path.display()
                ),
            }
        }
        Command::FitModulus {
            curve,
            degree,
            max_compression,
        } => {
            let output = commands::cmd_fit_modulus(&args, &curve, degree, max_compression)?;
            println!(
                "youngs_modulus_mpa = {}\nstandard_error_mpa = {}",
                output.youngs_modulus_mpa, output.standard_error_mpa
            );
        }
        Command::Report { run } => {
            let dir = commands::cmd_report(&args, &run)?;
            println!("report bundle written to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("railsense: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
