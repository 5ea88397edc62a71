//! On-disk configuration: the suit-model file and the pipeline config.
//!
//! Both are TOML. Units are SI throughout: masses in kg, lengths in m,
//! noise SDs as documented per field (the joint-angle SD is in degrees).
//! Inertia tensors are not stored; they are recomputed from each segment's
//! uniform-density geometry on load, and region point grids are regenerated
//! from their patch description.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{MotionKind, OutlierMode};
use crate::estimator::NoiseConfig;
use crate::model::{
    Anthropometry, ArmSuspension, BeltConstraint, BodySegment, ContactRegion, ModelError, RegionId,
    RegionPatch, SegmentGeometry, SegmentId, SuitModel, SuitSegment,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid model: {0}")]
    Model(#[from] ModelError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Serialized form of a [`SuitModel`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuitModelFile {
    pub anthropometry: Anthropometry,
    /// Segment spec keyed by id.
    pub segments: BTreeMap<SegmentId, SegmentSpec>,
    pub belts: Vec<BeltSpec>,
    pub regions: Vec<RegionSpec>,
    pub arm_suspensions: Vec<SuspensionSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentSpec {
    /// kg.
    pub mass: f64,
    /// m, segment frame.
    pub com_offset: [f64; 3],
    pub geometry: SegmentGeometry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeltSpec {
    pub segment: SegmentId,
    pub body_segment: BodySegment,
    /// m, segment frame.
    pub suit_point: [f64; 3],
    /// m, body-segment frame.
    pub body_point: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSpec {
    pub id: RegionId,
    pub segment: SegmentId,
    pub patch: RegionPatch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuspensionSpec {
    pub arm: SegmentId,
    /// m, arm frame.
    pub arm_point: [f64; 3],
    /// m, torso (FT) frame.
    pub torso_point: [f64; 3],
}

impl SuitModelFile {
    pub fn from_model(model: &SuitModel) -> Self {
        SuitModelFile {
            anthropometry: model.anthropometry.clone(),
            segments: model
                .segments
                .iter()
                .map(|s| {
                    (
                        s.id,
                        SegmentSpec {
                            mass: s.mass,
                            com_offset: s.com_offset.into(),
                            geometry: s.geometry,
                        },
                    )
                })
                .collect(),
            belts: model
                .belts
                .iter()
                .map(|b| BeltSpec {
                    segment: b.segment,
                    body_segment: b.body_segment,
                    suit_point: b.suit_point.into(),
                    body_point: b.body_point.into(),
                })
                .collect(),
            regions: model
                .regions
                .iter()
                .map(|r| RegionSpec {
                    id: r.id.clone(),
                    segment: r.segment,
                    patch: r.patch.clone(),
                })
                .collect(),
            arm_suspensions: model
                .arm_suspensions
                .iter()
                .map(|s| SuspensionSpec {
                    arm: s.arm,
                    arm_point: s.arm_point.into(),
                    torso_point: s.torso_point.into(),
                })
                .collect(),
        }
    }

    pub fn into_model(self) -> Result<SuitModel, ConfigError> {
        let segments = self
            .segments
            .into_iter()
            .map(|(id, spec)| SuitSegment {
                id,
                mass: spec.mass,
                com_offset: Vector3::from(spec.com_offset),
                inertia: spec.geometry.inertia(spec.mass),
                geometry: spec.geometry,
            })
            .collect();
        let model = SuitModel {
            anthropometry: self.anthropometry,
            segments,
            belts: self
                .belts
                .into_iter()
                .map(|b| BeltConstraint {
                    segment: b.segment,
                    suit_point: Vector3::from(b.suit_point),
                    body_point: Vector3::from(b.body_point),
                    body_segment: b.body_segment,
                })
                .collect(),
            regions: self
                .regions
                .into_iter()
                .map(|r| ContactRegion::from_patch(r.id, r.segment, r.patch))
                .collect(),
            arm_suspensions: self
                .arm_suspensions
                .into_iter()
                .map(|s| ArmSuspension {
                    arm: s.arm,
                    arm_point: Vector3::from(s.arm_point),
                    torso_point: Vector3::from(s.torso_point),
                })
                .collect(),
        };
        model.validate()?;
        Ok(model)
    }
}

/// Loads a suit model from TOML, recomputing inertia and region grids.
pub fn load_suit_model(path: &Path) -> Result<SuitModel, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: SuitModelFile = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    file.into_model()
}

/// Serializes a suit model to TOML with a unit-documenting header.
pub fn suit_model_to_toml(model: &SuitModel) -> Result<String, ConfigError> {
    let body = toml::to_string_pretty(&SuitModelFile::from_model(model))
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(format!(
        "# Suit model.\n\
         # Units: mass kg, lengths m. Inertia is derived from geometry and\n\
         # mass (uniform density); region point grids from their patch.\n\
         # Frames: z up, x forward; trunk segment frames coincide with the\n\
         # base frame, leg frames sit at the parent joint with z up the limb.\n\
         {body}"
    ))
}

pub fn save_suit_model(model: &SuitModel, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, suit_model_to_toml(model)?).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One trial entry of the pipeline config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialEntryConfig {
    pub name: String,
    pub motion: MotionKind,
    /// Recording CSV path, relative to the config file.
    pub recording: PathBuf,
    /// Optional measured-loads CSV path, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measured: Option<PathBuf>,
}

/// Batch pipeline configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Output directory, relative to the config file.
    pub output_dir: PathBuf,
    /// Regions whose interface loads are simulated and reported.
    pub regions_of_interest: Vec<RegionId>,
    pub outlier_mode: OutlierMode,
    /// Optional suit-model TOML; the default suit scaled to `anthropometry`
    /// is built when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suit_model: Option<PathBuf>,
    /// Zero-phase low-pass cutoff for pose differentiation, Hz.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing_cutoff_hz: Option<f64>,
    /// Write the per-point force dump per trial.
    pub dump_points: bool,
    /// Trial worker threads; 0 means one per trial up to the CPU count.
    pub workers: usize,
    pub anthropometry: Anthropometry,
    pub noise: NoiseConfig,
    pub trials: Vec<TrialEntryConfig>,

    /// Directory of the config file itself; set on load, not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: PathBuf::from("out"),
            regions_of_interest: vec![RegionId::LeftShoulder, RegionId::RightShoulder],
            outlier_mode: OutlierMode::Sigma,
            suit_model: None,
            smoothing_cutoff_hz: Some(6.0),
            dump_points: false,
            workers: 0,
            anthropometry: Anthropometry::default(),
            noise: NoiseConfig::default(),
            trials: Vec::new(),
            base_dir: PathBuf::new(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Structural checks: noise levels, anthropometry, referenced files.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.noise.validate().map_err(ConfigError::Invalid)?;
        self.anthropometry.validate()?;
        if self.trials.is_empty() {
            return Err(ConfigError::Invalid("config lists no trials".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for t in &self.trials {
            if !seen.insert(t.name.clone()) {
                return Err(ConfigError::Invalid(format!(
                    "duplicate trial name `{}`",
                    t.name
                )));
            }
            let rec = self.resolve(&t.recording);
            if !rec.exists() {
                return Err(ConfigError::Invalid(format!(
                    "trial `{}`: recording file {} does not exist",
                    t.name,
                    rec.display()
                )));
            }
            if let Some(m) = &t.measured {
                let m = self.resolve(m);
                if !m.exists() {
                    return Err(ConfigError::Invalid(format!(
                        "trial `{}`: measured-loads file {} does not exist",
                        t.name,
                        m.display()
                    )));
                }
            }
        }
        if let Some(s) = &self.suit_model {
            let s = self.resolve(s);
            if !s.exists() {
                return Err(ConfigError::Invalid(format!(
                    "suit model file {} does not exist",
                    s.display()
                )));
            }
        }
        Ok(())
    }

    /// Loads the referenced suit model or builds the default, then checks
    /// that every region of interest exists in it.
    pub fn build_suit(&self) -> Result<SuitModel, ConfigError> {
        let suit = match &self.suit_model {
            Some(p) => load_suit_model(&self.resolve(p))?,
            None => crate::model::build_default_suit(&self.anthropometry)?,
        };
        for region in &self.regions_of_interest {
            if suit.region(region).is_none() {
                return Err(ConfigError::Invalid(format!(
                    "region of interest `{region}` not present in the suit model"
                )));
            }
        }
        Ok(suit)
    }
}
