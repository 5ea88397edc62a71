//! Batch pipeline: ingest recordings, estimate states, distribute forces,
//! analyze, and write per-trial artifacts plus a cross-trial report.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;

use suitsim_core::analysis::{
    remove_outliers, trial_report, LoadSeries, LoadSource, TrialPair, TrialReport,
};
use suitsim_core::config::PipelineConfig;
use suitsim_core::dynamics::{inverse_dynamics_trial, DistributeOptions, TrialLoads};
use suitsim_core::estimator::run_filter;
use suitsim_core::io;
use suitsim_core::kinematics::{differentiate_poses, DifferentiationOptions};
use suitsim_core::model::SuitModel;

/// Per-trial numbers surfaced in `trial_summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct TrialSummary {
    pub name: String,
    pub motion: suitsim_core::analysis::MotionKind,
    pub samples: usize,
    /// Mean and extrema of the total vertical wearer-suit force, N.
    pub total_vertical_interface_mean_n: f64,
    pub total_vertical_interface_min_n: f64,
    pub total_vertical_interface_max_n: f64,
    /// Largest wrench-balance residual across samples and segments.
    pub max_equality_residual: f64,
    /// Largest torso tangential-to-normal ratio over the trial.
    pub max_tangential_ratio: Option<f64>,
    /// Estimator updates skipped for singular innovation covariance.
    pub skipped_updates: usize,
}

/// Everything produced for one trial.
pub struct TrialOutput {
    pub pair: TrialPair,
    pub summary: TrialSummary,
}

/// Outcome of a whole pipeline run.
pub struct PipelineSummary {
    pub output_dir: PathBuf,
    pub completed: Vec<TrialSummary>,
    /// `(trial name, error)` for trials that failed; failures do not abort
    /// the batch.
    pub failures: Vec<(String, String)>,
    pub report: Option<TrialReport>,
}

impl PipelineSummary {
    pub fn all_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Processes one trial end to end and writes its artifacts.
pub fn process_trial(
    cfg: &PipelineConfig,
    suit: &SuitModel,
    entry: &suitsim_core::config::TrialEntryConfig,
) -> Result<TrialOutput> {
    let rec_path = cfg.resolve(&entry.recording);
    let file = io::read_recording(&rec_path)
        .with_context(|| format!("reading recording {}", rec_path.display()))?;
    let mut recording = file.recording;
    if !file.stance_provided {
        suitsim_core::estimator::infer_contact_flags(&mut recording, &suit.anthropometry);
    }

    let run = run_filter(&recording, &suit.anthropometry, &cfg.noise)
        .context("state estimation failed")?;

    let diff_opts = DifferentiationOptions {
        lowpass_cutoff_hz: cfg.smoothing_cutoff_hz,
    };
    let kin = differentiate_poses(&recording, suit, &run.states, &diff_opts)
        .context("pose differentiation failed")?;

    let loads = inverse_dynamics_trial(
        suit,
        &kin,
        &cfg.regions_of_interest,
        &cfg.noise.gravity_vector(),
        &DistributeOptions::default(),
    )
    .context("inverse dynamics failed")?;

    let sim_series = simulated_series(&loads, &cfg.regions_of_interest)?;

    // Measured data, outlier-filtered before comparison.
    let meas_series = match &entry.measured {
        Some(p) => {
            let path = cfg.resolve(p);
            let raw = io::read_measured_loads(&path)
                .with_context(|| format!("reading measured loads {}", path.display()))?;
            let mut filtered = Vec::with_capacity(raw.len());
            for series in raw {
                let (kept, _) = remove_outliers(&series, cfg.outlier_mode)
                    .with_context(|| format!("outlier filtering `{}`", series.region))?;
                filtered.push(kept);
            }
            filtered
        }
        None => Vec::new(),
    };

    // Per-trial artifacts.
    let trial_dir = cfg.resolve(&cfg.output_dir).join(&entry.name);
    let times: Vec<f64> = recording.samples.iter().map(|s| s.time).collect();
    io::write_states(&trial_dir.join("states.csv"), &times, &run.states)?;
    io::write_load_series(&trial_dir.join("loads_sim.csv"), &sim_series)?;
    io::write_belt_series(&trial_dir.join("belts.csv"), &loads)?;
    if cfg.dump_points {
        io::write_point_dump(&trial_dir.join("points.csv"), &loads)?;
    }
    if !meas_series.is_empty() {
        let mut all: Vec<&LoadSeries> = sim_series.iter().collect();
        all.extend(meas_series.iter());
        io::write_comparison_csv(&trial_dir.join("comparison.csv"), &all)?;
    }

    let totals: Vec<f64> = loads
        .samples
        .iter()
        .map(|s| s.total_vertical_interface())
        .collect();
    let summary = TrialSummary {
        name: entry.name.clone(),
        motion: entry.motion,
        samples: recording.len(),
        total_vertical_interface_mean_n: totals.iter().sum::<f64>() / totals.len().max(1) as f64,
        total_vertical_interface_min_n: totals.iter().cloned().fold(f64::INFINITY, f64::min),
        total_vertical_interface_max_n: totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        max_equality_residual: loads
            .samples
            .iter()
            .map(|s| s.max_residual())
            .fold(0.0, f64::max),
        max_tangential_ratio: loads
            .samples
            .iter()
            .filter_map(|s| s.tangential_ratio)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            }),
        skipped_updates: run.skipped_updates.len(),
    };
    io::atomic_write(
        &trial_dir.join("trial_summary.json"),
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes")
            .as_bytes(),
    )?;

    Ok(TrialOutput {
        pair: TrialPair {
            name: entry.name.clone(),
            motion: entry.motion,
            sim: sim_series,
            meas: meas_series,
        },
        summary,
    })
}

/// Extracts one simulated load series per region of interest.
fn simulated_series(
    loads: &TrialLoads,
    regions: &[suitsim_core::model::RegionId],
) -> Result<Vec<LoadSeries>> {
    let mut out = Vec::with_capacity(regions.len());
    for region in regions {
        let mut samples = Vec::with_capacity(loads.samples.len());
        for s in &loads.samples {
            let value = s
                .resultant(region)
                .ok_or_else(|| anyhow!("region `{region}` missing from the force solution"))?;
            samples.push((s.time, value));
        }
        out.push(LoadSeries {
            region: region.clone(),
            source: LoadSource::Simulated,
            samples,
        });
    }
    Ok(out)
}

/// Runs every configured trial (in parallel up to the worker budget),
/// writes per-trial artifacts, and emits the cross-trial report. One bad
/// trial does not abort the batch.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineSummary> {
    cfg.validate().map_err(|e| anyhow!(e.to_string()))?;
    let suit = cfg.build_suit().map_err(|e| anyhow!(e.to_string()))?;
    let out_dir = cfg.resolve(&cfg.output_dir);
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;

    let n = cfg.trials.len();
    let workers = if cfg.workers == 0 {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
            .min(n.max(1))
    } else {
        cfg.workers.min(n.max(1))
    };

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<TrialOutput>>>> =
        Mutex::new((0..n).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= n {
                    break;
                }
                let outcome = process_trial(cfg, &suit, &cfg.trials[idx]);
                results.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });

    let mut completed = Vec::new();
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for (entry, slot) in cfg.trials.iter().zip(results.into_inner().unwrap()) {
        match slot.expect("worker filled every slot") {
            Ok(output) => {
                completed.push(output.summary);
                pairs.push(output.pair);
            }
            Err(e) => failures.push((entry.name.clone(), format!("{e:#}"))),
        }
    }

    let report = if pairs.is_empty() {
        None
    } else {
        let report = trial_report(&pairs).context("building the trial report")?;
        io::write_report_json(&out_dir.join("report.json"), &report)?;
        io::write_report_text(&out_dir.join("report.txt"), &report)?;
        Some(report)
    };

    Ok(PipelineSummary {
        output_dir: out_dir,
        completed,
        failures,
        report,
    })
}
