//! Delimited-text ingestion and output writers.
//!
//! # Recording CSV
//!
//! Comma-separated, `#` starts a comment. A directive comment before the
//! data selects the orientation encoding (default `matrix`):
//!
//! ```text
//! # orientation = matrix | quaternion
//! ```
//!
//! Column order per row:
//!
//! ```text
//! time_s,
//! R row-major (9 cols)        -- matrix mode
//!   or qw, qx, qy, qz (4 cols) -- quaternion mode
//! accel x, y, z (m/s^2, base frame),
//! joint angles in DEGREES (12 cols):
//!   left hip flexion, abduction, rotation, left knee,
//!   left ankle flexion, inversion, then the right leg likewise,
//! left_stance, right_stance (0/1; both columns may be omitted, in which
//!   case callers fall back to the estimator's stance heuristic)
//! ```
//!
//! Angles are converted to radians at this boundary.
//!
//! # Measured loads CSV
//!
//! `time_s, left_shoulder_n, right_shoulder_n`, `#` comments allowed.

use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, UnitQuaternion, Vector3};
use thiserror::Error;

use crate::analysis::{LoadSeries, LoadSource, TrialReport};
use crate::dynamics::TrialLoads;
use crate::estimator::FilterState;
use crate::kinematics::{JointAngles, RecordingSample, TrialRecording};
use crate::model::RegionId;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OrientationEncoding {
    Matrix,
    Quaternion,
}

/// Parsed recording plus whether the file carried stance-flag columns.
/// Without them every flag is false; callers fall back to the estimator's
/// stance heuristic.
#[derive(Debug)]
pub struct RecordingFile {
    pub recording: TrialRecording,
    pub stance_provided: bool,
}

/// Reads a trial recording; see the module docs for the format. The two
/// stance columns may be omitted entirely.
pub fn read_recording(path: &Path) -> Result<RecordingFile, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut encoding = OrientationEncoding::Matrix;
    let mut samples: Vec<RecordingSample> = Vec::new();
    let mut stance_provided = true;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let c = comment.trim().to_lowercase().replace(' ', "");
            if let Some(value) = c.strip_prefix("orientation=") {
                encoding = match value {
                    "matrix" => OrientationEncoding::Matrix,
                    "quaternion" | "quat" => OrientationEncoding::Quaternion,
                    other => {
                        return Err(IoError::Format {
                            path: path.to_path_buf(),
                            line: lineno + 1,
                            message: format!("unknown orientation encoding `{other}`"),
                        })
                    }
                };
            }
            continue;
        }

        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Format {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        let orient_cols = match encoding {
            OrientationEncoding::Matrix => 9,
            OrientationEncoding::Quaternion => 4,
        };
        let expected = 1 + orient_cols + 3 + 12 + 2;
        if fields.len() == expected - 2 {
            stance_provided = false;
        } else if fields.len() != expected {
            return Err(IoError::Format {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "expected {expected} columns ({} without stance flags), got {}",
                    expected - 2,
                    fields.len()
                ),
            });
        }

        let time = fields[0];
        let mut at = 1;
        let base_rotation = match encoding {
            OrientationEncoding::Matrix => {
                let r = Matrix3::from_row_slice(&fields[at..at + 9]);
                at += 9;
                r
            }
            OrientationEncoding::Quaternion => {
                let q = UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
                    fields[at],
                    fields[at + 1],
                    fields[at + 2],
                    fields[at + 3],
                ));
                at += 4;
                *q.to_rotation_matrix().matrix()
            }
        };
        let base_accel = Vector3::new(fields[at], fields[at + 1], fields[at + 2]);
        at += 3;
        let mut joints_deg = [0.0; 12];
        joints_deg.copy_from_slice(&fields[at..at + 12]);
        at += 12;
        let joints = JointAngles::from_vector(&joints_deg.map(f64::to_radians));
        let (left_stance, right_stance) = if fields.len() == expected {
            (fields[at] != 0.0, fields[at + 1] != 0.0)
        } else {
            (false, false)
        };

        samples.push(RecordingSample {
            time,
            base_rotation,
            base_accel,
            joints,
            left_stance,
            right_stance,
        });
    }

    if samples.len() < 2 {
        return Err(IoError::Invalid {
            path: path.to_path_buf(),
            message: format!(
                "recording needs at least 2 samples, found {}",
                samples.len()
            ),
        });
    }
    let sample_period =
        (samples.last().unwrap().time - samples[0].time) / (samples.len() - 1) as f64;
    let recording = TrialRecording {
        sample_period,
        samples,
    };
    recording.validate().map_err(|e| IoError::Invalid {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(RecordingFile {
        recording,
        stance_provided,
    })
}

/// Writes a recording in matrix orientation encoding.
pub fn write_recording(path: &Path, recording: &TrialRecording) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str("# orientation = matrix\n");
    out.push_str(
        "# time_s, r00..r22 row-major, accel x,y,z m/s^2 (base frame),\n\
         # joint angles deg (L hip flex/abd/rot, L knee, L ankle flex/inv, then right),\n\
         # left_stance, right_stance\n",
    );
    for s in &recording.samples {
        let mut fields: Vec<String> = Vec::with_capacity(27);
        fields.push(fmt(s.time));
        for r in 0..3 {
            for c in 0..3 {
                fields.push(fmt(s.base_rotation[(r, c)]));
            }
        }
        for k in 0..3 {
            fields.push(fmt(s.base_accel[k]));
        }
        for v in s.joints.to_vector() {
            fields.push(fmt(v.to_degrees()));
        }
        fields.push(if s.left_stance {
            "1".into()
        } else {
            "0".into()
        });
        fields.push(if s.right_stance {
            "1".into()
        } else {
            "0".into()
        });
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Reads measured shoulder loads: `time_s, left_n, right_n`.
pub fn read_measured_loads(path: &Path) -> Result<Vec<LoadSeries>, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut left = Vec::new();
    let mut right = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| IoError::Format {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
        if fields.len() != 3 {
            return Err(IoError::Format {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "expected 3 columns (time, left_n, right_n), got {}",
                    fields.len()
                ),
            });
        }
        left.push((fields[0], fields[1]));
        right.push((fields[0], fields[2]));
    }
    let mk = |region, samples| LoadSeries {
        region,
        source: LoadSource::Measured,
        samples,
    };
    let series = vec![
        mk(RegionId::LeftShoulder, left),
        mk(RegionId::RightShoulder, right),
    ];
    for s in &series {
        s.validate().map_err(|e| IoError::Invalid {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    Ok(series)
}

/// Writes the estimated state trajectory:
/// `time_s, p x,y,z, v x,y,z, left foot x,y,z, right foot x,y,z`.
pub fn write_states(path: &Path, times: &[f64], states: &[FilterState]) -> Result<(), IoError> {
    let mut out = String::from(
        "# time_s,px,py,pz,vx,vy,vz,left_foot_x,left_foot_y,left_foot_z,\
         right_foot_x,right_foot_y,right_foot_z\n",
    );
    for (t, s) in times.iter().zip(states) {
        let mut row = vec![fmt(*t)];
        for v in [s.base_position, s.base_velocity, s.left_foot, s.right_foot] {
            row.extend((0..3).map(|k| fmt(v[k])));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Writes simulated region loads: `time_s, <region>_n...`.
pub fn write_load_series(path: &Path, series: &[LoadSeries]) -> Result<(), IoError> {
    let mut out = String::from("# time_s");
    for s in series {
        out.push_str(&format!(",{}_n", s.region));
    }
    out.push('\n');
    if let Some(first) = series.first() {
        for i in 0..first.samples.len() {
            let mut row = vec![fmt(first.samples[i].0)];
            for s in series {
                row.push(fmt(s.samples[i].1));
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Writes belt and arm-link tensions per sample.
pub fn write_belt_series(path: &Path, loads: &TrialLoads) -> Result<(), IoError> {
    let mut out = String::from("# time_s");
    if let Some(first) = loads.samples.first() {
        for sol in &first.solutions {
            for b in &sol.belts {
                out.push_str(&format!(",belt_{}_{}_n", b.segment, b.body_segment));
            }
        }
        for b in &first.leg_belts {
            out.push_str(&format!(
                ",belt_{}_{}_n",
                b.segment,
                b.body_segment.map(|s| s.to_string()).unwrap_or_default()
            ));
        }
        for a in &first.arm_links {
            out.push_str(&format!(",link_{}_n", a.segment));
        }
        out.push_str(",tangential_ratio,max_residual\n");
        for s in &loads.samples {
            let mut row = vec![fmt(s.time)];
            for sol in &s.solutions {
                for b in &sol.belts {
                    row.push(fmt(b.tension));
                }
            }
            for b in &s.leg_belts {
                row.push(fmt(b.tension));
            }
            for a in &s.arm_links {
                row.push(fmt(a.tension));
            }
            row.push(s.tangential_ratio.map(fmt).unwrap_or_else(|| "nan".into()));
            row.push(fmt(s.max_residual()));
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Per-point force dump: `sample, time_s, region, point, fx, fy, fz, fn`.
pub fn write_point_dump(path: &Path, loads: &TrialLoads) -> Result<(), IoError> {
    let mut out = String::from("# sample,time_s,region,point,fx_n,fy_n,fz_n,normal_n\n");
    for (i, s) in loads.samples.iter().enumerate() {
        for sol in &s.solutions {
            for c in &sol.contacts {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    i,
                    fmt(s.time),
                    c.region,
                    c.point_index,
                    fmt(c.force.x),
                    fmt(c.force.y),
                    fmt(c.force.z),
                    fmt(c.force.dot(&c.normal)),
                ));
            }
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Plot-ready long-format comparison CSV: `region, source, time_s, force_n`.
pub fn write_comparison_csv(path: &Path, series: &[&LoadSeries]) -> Result<(), IoError> {
    let mut out = String::from("# region,source,time_s,force_n\n");
    for s in series {
        let source = match s.source {
            LoadSource::Simulated => "simulated",
            LoadSource::Measured => "measured",
        };
        for (t, v) in &s.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.region,
                source,
                fmt(*t),
                fmt(*v)
            ));
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Machine-readable report (JSON, stable field order via serde).
pub fn write_report_json(path: &Path, report: &TrialReport) -> Result<(), IoError> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    atomic_write(path, json.as_bytes())
}

/// Human-readable report table.
pub fn render_report_text(report: &TrialReport) -> String {
    let mut out = String::new();
    out.push_str("Interface load report\n=====================\n\n");
    for trial in &report.trials {
        out.push_str(&format!(
            "Trial {} ({})\n",
            trial.name,
            trial.motion.table_label()
        ));
        for r in &trial.regions {
            out.push_str(&format!(
                "  {:<16} sim  mean {:>8.2} N  [{:>8.2}, {:>8.2}]  sd {:>7.2}\n",
                r.region.to_string(),
                r.sim_stats.mean,
                r.sim_stats.min,
                r.sim_stats.max,
                r.sim_stats.sd
            ));
            if let Some(m) = &r.meas_stats {
                out.push_str(&format!(
                    "  {:<16} meas mean {:>8.2} N  [{:>8.2}, {:>8.2}]  sd {:>7.2}\n",
                    "", m.mean, m.min, m.max, m.sd
                ));
            }
            if let Some(rms) = r.rms_error {
                out.push_str(&format!("  {:<16} RMS  {:>8.2} N\n", "", rms));
            }
        }
        out.push('\n');
    }

    out.push_str("RMS error by motion type and region (N)\n");
    out.push_str(&format!(
        "{:<22} {:>16} {:>10} {:>8}\n",
        "Motion type", "Region", "RMS", "Trials"
    ));
    for row in &report.aggregate {
        out.push_str(&format!(
            "{:<22} {:>16} {:>10} {:>8}\n",
            row.motion.table_label(),
            row.region.to_string(),
            row.mean_rms
                .map(|v| format!("{v:.2}"))
                .unwrap_or_else(|| "-".into()),
            row.trials
        ));
    }
    out.push('\n');
    out.push_str("Reference RMS values (benchmark study, N)\n");
    out.push_str(&format!(
        "{:<22} {:>14} {:>15}\n",
        "Motion type", "Left shoulder", "Right shoulder"
    ));
    for r in &report.reference {
        out.push_str(&format!(
            "{:<22} {:>14.2} {:>15.2}\n",
            r.motion.table_label(),
            r.left_shoulder_n,
            r.right_shoulder_n
        ));
    }
    out
}

pub fn write_report_text(path: &Path, report: &TrialReport) -> Result<(), IoError> {
    atomic_write(path, render_report_text(report).as_bytes())
}

/// Shortest round-trip float formatting; deterministic across runs.
fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes through a temp file in the same directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let err = io_err(path);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(&err)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp).map_err(&err)?;
        f.write_all(bytes).map_err(&err)?;
        f.sync_all().map_err(&err)?;
    }
    std::fs::rename(&tmp, path).map_err(&err)
}
