//! Experimental data processing: resultant region loads, outlier rejection,
//! RMS comparison of simulated against measured series, and trial reports.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::ContactSolution;
use crate::model::RegionId;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("series share no overlapping time window")]
    EmptyOverlap,
    #[error("region `{0}` not present in the solution")]
    UnknownRegion(RegionId),
    #[error("trial `{0}`: region sets do not match")]
    MismatchedRegions(String),
    #[error("sample {0}: time does not increase")]
    NonMonotonicTime(usize),
    #[error("sample {0}: non-finite value")]
    NonFinite(usize),
    #[error("report needs at least one trial")]
    NoTrials,
}

/// Origin of a load series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadSource {
    Simulated,
    Measured,
}

/// Time-indexed resultant interface force of one region, N.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoadSeries {
    pub region: RegionId,
    pub source: LoadSource,
    /// `(time s, force N)` pairs, time strictly increasing.
    pub samples: Vec<(f64, f64)>,
}

impl LoadSeries {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let mut prev = f64::NEG_INFINITY;
        for (i, (t, v)) in self.samples.iter().enumerate() {
            if !t.is_finite() || !v.is_finite() {
                return Err(AnalysisError::NonFinite(i));
            }
            if *t <= prev {
                return Err(AnalysisError::NonMonotonicTime(i));
            }
            prev = *t;
        }
        Ok(())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|(_, v)| *v)
    }

    /// Median sampling period; infinity for fewer than two samples.
    fn median_dt(&self) -> f64 {
        if self.samples.len() < 2 {
            return f64::INFINITY;
        }
        let mut dts: Vec<f64> = self.samples.windows(2).map(|w| w[1].0 - w[0].0).collect();
        dts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dts[dts.len() / 2]
    }

    /// Linear interpolation at `t`, which must lie inside the support.
    fn interpolate(&self, t: f64) -> f64 {
        let samples = &self.samples;
        match samples.binary_search_by(|(st, _)| st.partial_cmp(&t).unwrap()) {
            Ok(i) => samples[i].1,
            Err(i) => {
                let (t0, v0) = samples[i - 1];
                let (t1, v1) = samples[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }
}

/// Summary statistics of a (possibly outlier-filtered) series.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TrialStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Population standard deviation.
    pub sd: f64,
    /// Fraction of the original samples that survived filtering.
    pub retained_fraction: f64,
}

fn stats_of(values: &[f64], retained_fraction: f64) -> TrialStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    TrialStats {
        mean,
        min: values.iter().cloned().fold(f64::INFINITY, f64::min),
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        sd: var.sqrt(),
        retained_fraction,
    }
}

/// Outlier rejection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierMode {
    /// Keep samples inside `[mean - 1.5 sd, mean + 1.5 sd]` (population sd).
    #[default]
    Sigma,
    /// Keep samples inside `[Q1 - 1.5 IQR, Q3 + 1.5 IQR]`.
    Iqr,
}

impl std::str::FromStr for OutlierMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sigma" => Ok(OutlierMode::Sigma),
            "iqr" => Ok(OutlierMode::Iqr),
            other => Err(format!(
                "unknown outlier mode `{other}` (expected sigma|iqr)"
            )),
        }
    }
}

/// Linear-interpolated percentile of sorted data, `p` in [0, 1].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo as f64)
    }
}

/// Removes outliers in a single pass (the band is computed once from the
/// full series, no re-iteration) and returns the retained series along with
/// statistics of the retained data.
pub fn remove_outliers(
    series: &LoadSeries,
    mode: OutlierMode,
) -> Result<(LoadSeries, TrialStats), AnalysisError> {
    series.validate()?;
    let n = series.samples.len();
    if n < 3 {
        return Err(AnalysisError::TooShort { needed: 3, got: n });
    }
    let values: Vec<f64> = series.values().collect();
    let (lo, hi) = match mode {
        OutlierMode::Sigma => {
            let s = stats_of(&values, 1.0);
            (s.mean - 1.5 * s.sd, s.mean + 1.5 * s.sd)
        }
        OutlierMode::Iqr => {
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q1 = percentile(&sorted, 0.25);
            let q3 = percentile(&sorted, 0.75);
            let iqr = q3 - q1;
            (q1 - 1.5 * iqr, q3 + 1.5 * iqr)
        }
    };
    let retained: Vec<(f64, f64)> = series
        .samples
        .iter()
        .cloned()
        .filter(|(_, v)| *v >= lo && *v <= hi)
        .collect();
    let kept: Vec<f64> = retained.iter().map(|(_, v)| *v).collect();
    let stats = stats_of(&kept, kept.len() as f64 / n as f64);
    Ok((
        LoadSeries {
            region: series.region.clone(),
            source: series.source,
            samples: retained,
        },
        stats,
    ))
}

/// Sum of contact-force projections on the point normals over one region.
pub fn resultant_load(solution: &ContactSolution, region: &RegionId) -> Result<f64, AnalysisError> {
    let mut found = false;
    let mut total = 0.0;
    for c in &solution.contacts {
        if &c.region == region {
            found = true;
            total += c.force.dot(&c.normal);
        }
    }
    if !found {
        return Err(AnalysisError::UnknownRegion(region.clone()));
    }
    Ok(total)
}

/// Root-mean-square difference after resampling both series onto the coarser
/// of the two time grids, restricted to the overlapping window.
pub fn rms_error(sim: &LoadSeries, meas: &LoadSeries) -> Result<f64, AnalysisError> {
    sim.validate()?;
    meas.validate()?;
    if sim.samples.is_empty() || meas.samples.is_empty() {
        return Err(AnalysisError::EmptyOverlap);
    }
    let (grid, other) = if sim.median_dt() >= meas.median_dt() {
        (sim, meas)
    } else {
        (meas, sim)
    };
    let t0 = sim.samples[0].0.max(meas.samples[0].0);
    let t1 = sim
        .samples
        .last()
        .unwrap()
        .0
        .min(meas.samples.last().unwrap().0);
    if t1 < t0 {
        return Err(AnalysisError::EmptyOverlap);
    }
    let mut count = 0usize;
    let mut sum_sq = 0.0;
    for (t, v) in &grid.samples {
        if *t < t0 || *t > t1 {
            continue;
        }
        let d = v - other.interpolate(*t);
        sum_sq += d * d;
        count += 1;
    }
    if count == 0 {
        return Err(AnalysisError::EmptyOverlap);
    }
    Ok((sum_sq / count as f64).sqrt())
}

/// Movement type of a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Stand,
    FlatWalk,
    StairsUp,
    StairsDown,
}

impl MotionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MotionKind::Stand => "stand",
            MotionKind::FlatWalk => "flat_walk",
            MotionKind::StairsUp => "stairs_up",
            MotionKind::StairsDown => "stairs_down",
        }
    }

    /// Label used in report tables.
    pub fn table_label(&self) -> &'static str {
        match self {
            MotionKind::Stand => "Quiet standing",
            MotionKind::FlatWalk => "Walking on ground",
            MotionKind::StairsUp => "Walking upstairs",
            MotionKind::StairsDown => "Walking downstairs",
        }
    }
}

impl std::fmt::Display for MotionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MotionKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stand" => Ok(MotionKind::Stand),
            "flat_walk" | "flat-walk" => Ok(MotionKind::FlatWalk),
            "stairs_up" | "stairs-up" => Ok(MotionKind::StairsUp),
            "stairs_down" | "stairs-down" => Ok(MotionKind::StairsDown),
            other => Err(format!(
                "unknown motion `{other}` (expected stand|flat_walk|stairs_up|stairs_down)"
            )),
        }
    }
}

/// Published benchmark RMS errors (N) for shoulder interface loads by motion
/// type, shown as reference rows in comparison reports.
pub const REFERENCE_RMS: [(MotionKind, f64, f64); 3] = [
    (MotionKind::FlatWalk, 19.56, 25.96),
    (MotionKind::StairsUp, 19.32, 8.22),
    (MotionKind::StairsDown, 8.22, 10.16),
];

/// Simulated/measured series of one trial, per region.
#[derive(Debug, Clone)]
pub struct TrialPair {
    pub name: String,
    pub motion: MotionKind,
    pub sim: Vec<LoadSeries>,
    /// Empty when no measured data accompanies the trial.
    pub meas: Vec<LoadSeries>,
}

/// Per-region outcome within one trial.
#[derive(Debug, Clone, Serialize)]
pub struct RegionReport {
    pub region: RegionId,
    pub sim_stats: TrialStats,
    pub meas_stats: Option<TrialStats>,
    /// RMS of sim vs meas, when measured data exists.
    pub rms_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialReportEntry {
    pub name: String,
    pub motion: MotionKind,
    pub regions: Vec<RegionReport>,
}

/// One row of the aggregate RMS table (motion x region).
#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub motion: MotionKind,
    pub region: RegionId,
    pub trials: usize,
    /// Mean RMS over the trials that had measurements.
    pub mean_rms: Option<f64>,
    /// Stats over the pooled simulated samples of all trials.
    pub pooled_sim: TrialStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRow {
    pub motion: MotionKind,
    pub left_shoulder_n: f64,
    pub right_shoulder_n: f64,
}

/// Cross-trial comparison report.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub trials: Vec<TrialReportEntry>,
    pub aggregate: Vec<AggregateRow>,
    /// Benchmark RMS rows included for side-by-side comparison.
    pub reference: Vec<ReferenceRow>,
}

/// Builds per-trial and aggregate statistics plus the RMS table. Every trial
/// must expose the same simulated region set; measured series, when present,
/// must cover the same regions.
pub fn trial_report(trials: &[TrialPair]) -> Result<TrialReport, AnalysisError> {
    if trials.is_empty() {
        return Err(AnalysisError::NoTrials);
    }
    let region_set: Vec<RegionId> = trials[0].sim.iter().map(|s| s.region.clone()).collect();
    for trial in trials {
        let mine: Vec<RegionId> = trial.sim.iter().map(|s| s.region.clone()).collect();
        if mine != region_set {
            return Err(AnalysisError::MismatchedRegions(trial.name.clone()));
        }
        if !trial.meas.is_empty() {
            let theirs: Vec<RegionId> = trial.meas.iter().map(|s| s.region.clone()).collect();
            if theirs != region_set {
                return Err(AnalysisError::MismatchedRegions(trial.name.clone()));
            }
        }
    }

    let mut entries = Vec::new();
    for trial in trials {
        let mut regions = Vec::new();
        for sim in &trial.sim {
            sim.validate()?;
            let values: Vec<f64> = sim.values().collect();
            if values.is_empty() {
                return Err(AnalysisError::TooShort { needed: 1, got: 0 });
            }
            let meas = trial.meas.iter().find(|m| m.region == sim.region);
            let meas_stats = match meas {
                Some(m) => {
                    m.validate()?;
                    let mv: Vec<f64> = m.values().collect();
                    if mv.is_empty() {
                        return Err(AnalysisError::TooShort { needed: 1, got: 0 });
                    }
                    Some(stats_of(&mv, 1.0))
                }
                None => None,
            };
            let rms = meas.map(|m| rms_error(sim, m)).transpose()?;
            regions.push(RegionReport {
                region: sim.region.clone(),
                sim_stats: stats_of(&values, 1.0),
                meas_stats,
                rms_error: rms,
            });
        }
        entries.push(TrialReportEntry {
            name: trial.name.clone(),
            motion: trial.motion,
            regions,
        });
    }

    // Aggregate per (motion, region), keeping first-appearance motion order.
    let mut motions: Vec<MotionKind> = Vec::new();
    for t in trials {
        if !motions.contains(&t.motion) {
            motions.push(t.motion);
        }
    }
    let mut aggregate = Vec::new();
    for motion in &motions {
        for region in &region_set {
            let mut pooled: Vec<f64> = Vec::new();
            let mut rms_values: Vec<f64> = Vec::new();
            let mut count = 0usize;
            for (trial, entry) in trials.iter().zip(&entries) {
                if trial.motion != *motion {
                    continue;
                }
                count += 1;
                let sim = trial.sim.iter().find(|s| &s.region == region).unwrap();
                pooled.extend(sim.values());
                if let Some(r) = entry
                    .regions
                    .iter()
                    .find(|r| &r.region == region)
                    .and_then(|r| r.rms_error)
                {
                    rms_values.push(r);
                }
            }
            if count == 0 {
                continue;
            }
            aggregate.push(AggregateRow {
                motion: *motion,
                region: region.clone(),
                trials: count,
                mean_rms: if rms_values.is_empty() {
                    None
                } else {
                    Some(rms_values.iter().sum::<f64>() / rms_values.len() as f64)
                },
                pooled_sim: stats_of(&pooled, 1.0),
            });
        }
    }

    Ok(TrialReport {
        trials: entries,
        aggregate,
        reference: REFERENCE_RMS
            .iter()
            .map(|(m, l, r)| ReferenceRow {
                motion: *m,
                left_shoulder_n: *l,
                right_shoulder_n: *r,
            })
            .collect(),
    })
}
