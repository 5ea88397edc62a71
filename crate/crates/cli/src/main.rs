use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use suitsim_cli::pipeline::run_pipeline;
use suitsim_cli::synth::{generate_synthetic_trial, SynthOptions};
use suitsim_core::analysis::{
    remove_outliers, rms_error, trial_report, LoadSource, MotionKind, OutlierMode, TrialPair,
};
use suitsim_core::config::PipelineConfig;
use suitsim_core::estimator::FilterState;
use suitsim_core::io;
use suitsim_core::model::Anthropometry;

/// Suit interface-load simulation: state estimation, force distribution,
/// and comparison against measured loads.
#[derive(Parser)]
#[command(name = "suitsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the batch pipeline described by a config file.
    Run(RunArgs),
    /// Generate a synthetic trial recording with ground truth.
    Synth(SynthArgs),
    /// Compare a simulated loads CSV against a measured one.
    Compare(CompareArgs),
    /// Export the default suit model file for customization.
    Suit(SuitArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's outlier mode.
    #[arg(long, value_parser = clap::value_parser!(OutlierMode))]
    outlier_mode: Option<OutlierMode>,
    /// Write the per-point force dump for each trial.
    #[arg(long)]
    dump_points: bool,
    /// Override the worker thread count.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SynthArgs {
    /// Movement type: stand | flat-walk | stairs-up | stairs-down.
    #[arg(long, value_parser = clap::value_parser!(MotionKind))]
    kind: MotionKind,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total trial duration in seconds (per-kind default when omitted).
    #[arg(long)]
    duration: Option<f64>,
    /// Inject sensor noise at the nominal filter noise levels.
    #[arg(long)]
    noise: bool,
}

#[derive(Args)]
struct CompareArgs {
    /// Simulated loads CSV (time_s, left_n, right_n).
    #[arg(long)]
    sim: PathBuf,
    /// Measured loads CSV (time_s, left_n, right_n).
    #[arg(long)]
    meas: PathBuf,
    /// Outlier rule applied to the measured series.
    #[arg(long, default_value = "sigma", value_parser = clap::value_parser!(OutlierMode))]
    outlier_mode: OutlierMode,
    /// Motion label for the report.
    #[arg(long, default_value = "flat-walk", value_parser = clap::value_parser!(MotionKind))]
    motion: MotionKind,
    /// Write report files here in addition to printing.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SuitArgs {
    /// Output TOML path.
    #[arg(long)]
    out: PathBuf,
    /// Wearer standing height, m.
    #[arg(long, default_value_t = 1.69)]
    height: f64,
    /// Wearer body mass, kg.
    #[arg(long, default_value_t = 60.0)]
    mass: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Suit(args) => cmd_suit(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_suit(args: SuitArgs) -> Result<ExitCode> {
    let reference = Anthropometry::default();
    let scale = args.height / reference.subject_height;
    let anthro = Anthropometry {
        base_to_hip_left: reference.base_to_hip_left.map(|v| v * scale),
        base_to_hip_right: reference.base_to_hip_right.map(|v| v * scale),
        thigh_length: reference.thigh_length * scale,
        shank_length: reference.shank_length * scale,
        ankle_to_sole: reference.ankle_to_sole.map(|v| v * scale),
        subject_height: args.height,
        subject_mass: args.mass,
    };
    let suit = suitsim_core::model::build_default_suit(&anthro).map_err(|e| anyhow!("{e}"))?;
    suitsim_core::config::save_suit_model(&suit, &args.out).map_err(|e| anyhow!("{e}"))?;
    println!(
        "wrote suit model ({} segments, total weight {:.2} N) to {}",
        suit.segments.len(),
        suit.total_weight(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(args: RunArgs) -> Result<ExitCode> {
    let mut cfg = PipelineConfig::load(&args.config)
        .map_err(|e| anyhow!("{e}"))
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(mode) = args.outlier_mode {
        cfg.outlier_mode = mode;
    }
    if args.dump_points {
        cfg.dump_points = true;
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }

    let summary = run_pipeline(&cfg)?;
    for t in &summary.completed {
        println!(
            "trial {:<16} {:<14} samples {:>6}  total vertical {:.2} N  max residual {:.2e}",
            t.name,
            t.motion.to_string(),
            t.samples,
            t.total_vertical_interface_mean_n,
            t.max_equality_residual
        );
    }
    for (name, err) in &summary.failures {
        eprintln!("trial {name} FAILED: {err}");
    }
    println!("outputs in {}", summary.output_dir.display());
    Ok(if summary.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_synth(args: SynthArgs) -> Result<ExitCode> {
    let anthro = Anthropometry::default();
    let options = SynthOptions {
        duration: args.duration,
        seed: args.seed,
        noise: args.noise,
    };
    let trial = generate_synthetic_trial(args.kind, &options, &anthro)?;

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let rec_path = args.out.join("recording.csv");
    io::write_recording(&rec_path, &trial.recording)?;

    // Ground truth in the states.csv layout (zero covariance).
    let truth_states: Vec<FilterState> = trial
        .truth
        .iter()
        .map(|t| FilterState {
            base_position: t.base_position,
            base_velocity: t.base_velocity,
            left_foot: t.left_foot,
            right_foot: t.right_foot,
            covariance: nalgebra::SMatrix::zeros(),
        })
        .collect();
    let times: Vec<f64> = trial.truth.iter().map(|t| t.time).collect();
    io::write_states(&args.out.join("truth.csv"), &times, &truth_states)?;

    // A ready-to-run pipeline config next to the data. Noisy recordings get
    // a lower differentiation cutoff so estimator jitter does not dominate
    // the reconstructed accelerations.
    let mut cfg = PipelineConfig::default();
    cfg.output_dir = PathBuf::from("out");
    if args.noise {
        cfg.smoothing_cutoff_hz = Some(2.0);
    }
    cfg.trials.push(suitsim_core::config::TrialEntryConfig {
        name: args.kind.to_string(),
        motion: args.kind,
        recording: PathBuf::from("recording.csv"),
        measured: None,
    });
    let toml_text = toml::to_string_pretty(&cfg).expect("config serializes");
    io::atomic_write(&args.out.join("pipeline.toml"), toml_text.as_bytes())?;

    println!(
        "wrote {} samples ({:.2} s) to {}; displacement ({:.2}, {:.2}, {:.2}) m",
        trial.recording.len(),
        trial
            .recording
            .samples
            .last()
            .map(|s| s.time)
            .unwrap_or(0.0),
        args.out.display(),
        trial.displacement.x,
        trial.displacement.y,
        trial.displacement.z,
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(args: CompareArgs) -> Result<ExitCode> {
    let mut sim = io::read_measured_loads(&args.sim)
        .with_context(|| format!("reading {}", args.sim.display()))?;
    for s in &mut sim {
        s.source = LoadSource::Simulated;
    }
    let meas_raw = io::read_measured_loads(&args.meas)
        .with_context(|| format!("reading {}", args.meas.display()))?;
    let mut meas = Vec::with_capacity(meas_raw.len());
    for series in meas_raw {
        let (kept, stats) = remove_outliers(&series, args.outlier_mode)
            .map_err(|e| anyhow!("outlier filtering `{}`: {e}", series.region))?;
        println!(
            "{}: retained {:.1}% of measured samples (mean {:.2} N, sd {:.2} N)",
            kept.region,
            stats.retained_fraction * 100.0,
            stats.mean,
            stats.sd
        );
        meas.push(kept);
    }

    for (s, m) in sim.iter().zip(&meas) {
        let rms = rms_error(s, m).map_err(|e| anyhow!("RMS for `{}`: {e}", s.region))?;
        println!("{}: RMS error {:.2} N", s.region, rms);
    }

    if let Some(out) = &args.out {
        let name = args
            .sim
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "comparison".into());
        let report = trial_report(&[TrialPair {
            name,
            motion: args.motion,
            sim: sim.clone(),
            meas: meas.clone(),
        }])?;
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        io::write_report_json(&out.join("report.json"), &report)?;
        io::write_report_text(&out.join("report.txt"), &report)?;
        let mut all: Vec<&suitsim_core::analysis::LoadSeries> = sim.iter().collect();
        all.extend(meas.iter());
        io::write_comparison_csv(&out.join("comparison.csv"), &all)?;
        println!("report written to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}
