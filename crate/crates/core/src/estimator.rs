//! Discrete Kalman filter recovering base position/velocity and foot
//! positions in the world frame from base-IMU acceleration and joint angles.
//!
//! State: `[p, v, p_left, p_right]`, twelve scalars. The base orientation is
//! trusted as given and is not estimated. The prediction integrates the
//! world-frame net acceleration `R * y_a + g`; foot positions are held
//! constant, with the process noise of a swing foot inflated enough to
//! effectively disable that foot's model. The update measures the two
//! base-to-foot vectors produced by the leg forward kinematics.
//!
//! Absolute position is only weakly observable (as in any leg-odometry
//! filter); accuracy claims are about relative displacement.

use nalgebra::{Matrix3, Rotation3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::{fk_jacobian, foot_fk, JointAngles, KinematicsError, TrialRecording};
use crate::model::{Anthropometry, Side};

type Mat12 = SMatrix<f64, 12, 12>;
type Vec12 = SVector<f64, 12>;
type Mat6x12 = SMatrix<f64, 6, 12>;
type Mat6 = SMatrix<f64, 6, 6>;
type Vec6 = SVector<f64, 6>;

/// Initial standard deviations: the world origin is defined at the initial
/// base position, the wearer is assumed near rest, feet placed from FK.
const INIT_POS_SD: f64 = 1e-3;
const INIT_VEL_SD: f64 = 1e-1;
const INIT_FOOT_SD: f64 = 1e-2;

/// Variance floor on the measurement covariance diagonal, m².
const MEAS_VAR_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("base rotation is not orthonormal (defect {0:.3e})")]
    NonOrthonormalRotation(f64),
    #[error("sample period must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("innovation covariance is singular (degenerate geometry)")]
    SingularInnovation,
    #[error("recording contains no samples")]
    EmptyRecording,
    #[error(transparent)]
    Recording(#[from] KinematicsError),
    #[error("sample {sample}: {source}")]
    AtSample {
        sample: usize,
        #[source]
        source: Box<EstimatorError>,
    },
}

/// Filter noise levels. Defaults follow the wearable sensor suite's nominal
/// figures; the swing-foot value is deliberately enormous so that the swing
/// foot's constant-position model carries no weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Accelerometer noise SD, m/s².
    pub accel_sd: f64,
    /// Support-foot position process SD, m.
    pub support_foot_sd: f64,
    /// Swing-foot position process SD, m.
    pub swing_foot_sd: f64,
    /// Joint-angle noise SD, degrees.
    pub joint_angle_sd_deg: f64,
    /// World-frame gravity vector, m/s².
    pub gravity: [f64; 3],
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            accel_sd: 0.2,
            support_foot_sd: 1e-5,
            swing_foot_sd: 1e8,
            joint_angle_sd_deg: 10.0,
            gravity: [0.0, 0.0, -crate::GRAVITY],
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("accel_sd", self.accel_sd),
            ("support_foot_sd", self.support_foot_sd),
            ("swing_foot_sd", self.swing_foot_sd),
            ("joint_angle_sd_deg", self.joint_angle_sd_deg),
        ] {
            if !(v > 0.0) {
                return Err(format!("noise SD `{name}` must be positive, got {v}"));
            }
        }
        Ok(())
    }

    pub fn gravity_vector(&self) -> Vector3<f64> {
        Vector3::from(self.gravity)
    }
}

/// Estimator state with covariance.
#[derive(Debug, Clone)]
pub struct FilterState {
    /// Base position, world, m.
    pub base_position: Vector3<f64>,
    /// Base velocity, world, m/s.
    pub base_velocity: Vector3<f64>,
    /// Left foot (sole) position, world, m.
    pub left_foot: Vector3<f64>,
    /// Right foot (sole) position, world, m.
    pub right_foot: Vector3<f64>,
    /// 12 x 12 covariance, symmetric PSD.
    pub covariance: Mat12,
}

impl FilterState {
    fn mean(&self) -> Vec12 {
        let mut x = Vec12::zeros();
        x.fixed_rows_mut::<3>(0).copy_from(&self.base_position);
        x.fixed_rows_mut::<3>(3).copy_from(&self.base_velocity);
        x.fixed_rows_mut::<3>(6).copy_from(&self.left_foot);
        x.fixed_rows_mut::<3>(9).copy_from(&self.right_foot);
        x
    }

    fn with_mean(&self, x: &Vec12, covariance: Mat12) -> FilterState {
        FilterState {
            base_position: x.fixed_rows::<3>(0).into(),
            base_velocity: x.fixed_rows::<3>(3).into(),
            left_foot: x.fixed_rows::<3>(6).into(),
            right_foot: x.fixed_rows::<3>(9).into(),
            covariance,
        }
    }

    /// Smallest eigenvalue of the symmetrized covariance.
    pub fn covariance_min_eigenvalue(&self) -> f64 {
        let sym = (self.covariance + self.covariance.transpose()) / 2.0;
        sym.symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Stance flags for the prediction step.
#[derive(Debug, Clone, Copy)]
pub struct ContactFlags {
    pub left_stance: bool,
    pub right_stance: bool,
}

fn check_rotation(rotation: &Matrix3<f64>) -> Result<Rotation3<f64>, EstimatorError> {
    let defect = crate::model::orthonormality_defect(rotation);
    if defect > 1e-6 {
        return Err(EstimatorError::NonOrthonormalRotation(defect));
    }
    Ok(Rotation3::from_matrix_unchecked(*rotation))
}

fn symmetrize(m: &Mat12) -> Mat12 {
    (m + m.transpose()) / 2.0
}

/// Prediction step over one sampling interval.
pub fn predict(
    state: &FilterState,
    base_rotation: &Matrix3<f64>,
    accel_reading: &Vector3<f64>,
    dt: f64,
    flags: ContactFlags,
    cfg: &NoiseConfig,
) -> Result<FilterState, EstimatorError> {
    let rot = check_rotation(base_rotation)?;
    if !(dt > 0.0) {
        return Err(EstimatorError::NonPositiveDt(dt));
    }

    // World-frame net acceleration: rotated specific force plus gravity.
    let a_w = rot * accel_reading + cfg.gravity_vector();

    let mut x = state.mean();
    let p = state.base_position + state.base_velocity * dt + a_w * (dt * dt / 2.0);
    let v = state.base_velocity + a_w * dt;
    x.fixed_rows_mut::<3>(0).copy_from(&p);
    x.fixed_rows_mut::<3>(3).copy_from(&v);
    // Feet propagate unchanged.

    let mut a_mat = Mat12::identity();
    for i in 0..3 {
        a_mat[(i, 3 + i)] = dt;
    }

    // White-noise-acceleration block for (p, v); random-walk blocks for the
    // feet, with the swing side inflated.
    let qa = cfg.accel_sd * cfg.accel_sd;
    let mut q = Mat12::zeros();
    for i in 0..3 {
        q[(i, i)] = qa * dt.powi(3) / 3.0;
        q[(i, 3 + i)] = qa * dt * dt / 2.0;
        q[(3 + i, i)] = qa * dt * dt / 2.0;
        q[(3 + i, 3 + i)] = qa * dt;
    }
    let foot_var = |stance: bool| {
        let sd = if stance {
            cfg.support_foot_sd
        } else {
            cfg.swing_foot_sd
        };
        sd * sd * dt
    };
    for i in 0..3 {
        q[(6 + i, 6 + i)] = foot_var(flags.left_stance);
        q[(9 + i, 9 + i)] = foot_var(flags.right_stance);
    }

    let cov = symmetrize(&(a_mat * state.covariance * a_mat.transpose() + q));
    Ok(state.with_mean(&x, cov))
}

/// Measurement update from the two base-to-foot forward-kinematics vectors.
pub fn update(
    state: &FilterState,
    base_rotation: &Matrix3<f64>,
    q: &JointAngles,
    anthro: &Anthropometry,
    cfg: &NoiseConfig,
) -> Result<FilterState, EstimatorError> {
    let rot = check_rotation(base_rotation)?;

    // Measured world-frame foot positions relative to the base.
    let mut z = Vec6::zeros();
    z.fixed_rows_mut::<3>(0)
        .copy_from(&(rot * foot_fk(q, Side::Left, anthro)));
    z.fixed_rows_mut::<3>(3)
        .copy_from(&(rot * foot_fk(q, Side::Right, anthro)));

    // Observation matrix: p_i - p per foot.
    let mut c = Mat6x12::zeros();
    for i in 0..3 {
        c[(i, i)] = -1.0;
        c[(i, 6 + i)] = 1.0;
        c[(3 + i, i)] = -1.0;
        c[(3 + i, 9 + i)] = 1.0;
    }

    // First-order propagation of joint-angle noise through the FK Jacobian.
    let sigma_q = cfg.joint_angle_sd_deg.to_radians();
    let mut m = Mat6x12::zeros();
    m.fixed_rows_mut::<3>(0)
        .copy_from(&(rot.matrix() * fk_jacobian(q, Side::Left, anthro)));
    m.fixed_rows_mut::<3>(3)
        .copy_from(&(rot.matrix() * fk_jacobian(q, Side::Right, anthro)));
    let mut r_meas: Mat6 = m * m.transpose() * (sigma_q * sigma_q);
    for i in 0..6 {
        if r_meas[(i, i)] < MEAS_VAR_FLOOR {
            r_meas[(i, i)] = MEAS_VAR_FLOOR;
        }
    }

    let p_prior = symmetrize(&state.covariance);
    let s: Mat6 = c * p_prior * c.transpose() + r_meas;
    let chol = s.cholesky().ok_or(EstimatorError::SingularInnovation)?;

    // K = P C^T S^-1, via S K^T = C P.
    let k = (chol.solve(&(c * p_prior))).transpose();

    let innovation = z - c * state.mean();
    let x = state.mean() + k * innovation;

    // Joseph form keeps the posterior PSD.
    let ikc = Mat12::identity() - k * c;
    let cov = symmetrize(&(ikc * p_prior * ikc.transpose() + k * r_meas * k.transpose()));
    Ok(state.with_mean(&x, cov))
}

/// Full filter pass over a recording.
#[derive(Debug)]
pub struct FilterRun {
    /// Posterior state per sample.
    pub states: Vec<FilterState>,
    /// Samples whose update was skipped due to a singular innovation.
    pub skipped_updates: Vec<usize>,
}

/// Fallback stance detection for recordings without contact flags: a foot
/// counts as stance when its FK height stays within 2 cm of the trial
/// minimum and its FK speed stays below 0.1 m/s.
pub fn infer_contact_flags(recording: &mut TrialRecording, anthro: &Anthropometry) {
    let n = recording.len();
    if n == 0 {
        return;
    }
    let dt = recording.sample_period;
    for side in [Side::Left, Side::Right] {
        let positions: Vec<Vector3<f64>> = recording
            .samples
            .iter()
            .map(|s| {
                Rotation3::from_matrix_unchecked(s.base_rotation) * foot_fk(&s.joints, side, anthro)
            })
            .collect();
        let heights: Vec<f64> = positions.iter().map(|p| p.z).collect();
        let mut speeds = vec![0.0; n];
        for i in 0..n {
            let (a, b, span) = if i == 0 {
                (0, 1.min(n - 1), dt)
            } else if i == n - 1 {
                (n - 2, n - 1, dt)
            } else {
                (i - 1, i + 1, 2.0 * dt)
            };
            speeds[i] = (positions[b] - positions[a]).norm() / span;
        }
        let floor = heights.iter().cloned().fold(f64::INFINITY, f64::min);
        for (i, sample) in recording.samples.iter_mut().enumerate() {
            let stance = heights[i] < floor + 0.02 && speeds[i] < 0.1;
            match side {
                Side::Left => sample.left_stance = stance,
                Side::Right => sample.right_stance = stance,
            }
        }
    }
}

/// Initial state: base at the origin, at rest, feet placed by forward
/// kinematics through the first sample's orientation.
pub fn initial_state(
    recording: &TrialRecording,
    anthro: &Anthropometry,
) -> Result<FilterState, EstimatorError> {
    let first = recording
        .samples
        .first()
        .ok_or(EstimatorError::EmptyRecording)?;
    let rot = check_rotation(&first.base_rotation)?;
    let mut cov = Mat12::zeros();
    for i in 0..3 {
        cov[(i, i)] = INIT_POS_SD * INIT_POS_SD;
        cov[(3 + i, 3 + i)] = INIT_VEL_SD * INIT_VEL_SD;
        cov[(6 + i, 6 + i)] = INIT_FOOT_SD * INIT_FOOT_SD;
        cov[(9 + i, 9 + i)] = INIT_FOOT_SD * INIT_FOOT_SD;
    }
    Ok(FilterState {
        base_position: Vector3::zeros(),
        base_velocity: Vector3::zeros(),
        left_foot: rot * foot_fk(&first.joints, Side::Left, anthro),
        right_foot: rot * foot_fk(&first.joints, Side::Right, anthro),
        covariance: cov,
    })
}

/// Runs predict/update over every sample of `recording`. Prediction over the
/// interval `[t-1, t]` uses sample `t-1`'s IMU data and stance flags; the
/// update uses sample `t`'s orientation and joint angles. A singular
/// innovation covariance skips that update and records the sample index.
pub fn run_filter(
    recording: &TrialRecording,
    anthro: &Anthropometry,
    cfg: &NoiseConfig,
) -> Result<FilterRun, EstimatorError> {
    if recording.is_empty() {
        return Err(EstimatorError::EmptyRecording);
    }
    recording.validate()?;
    let at = |sample: usize| {
        move |source: EstimatorError| EstimatorError::AtSample {
            sample,
            source: Box::new(source),
        }
    };

    let mut states = Vec::with_capacity(recording.len());
    let mut skipped = Vec::new();
    states.push(initial_state(recording, anthro)?);

    for t in 1..recording.len() {
        let prev_sample = &recording.samples[t - 1];
        let sample = &recording.samples[t];
        let dt = sample.time - prev_sample.time;
        let flags = ContactFlags {
            left_stance: prev_sample.left_stance,
            right_stance: prev_sample.right_stance,
        };
        let predicted = predict(
            states.last().unwrap(),
            &prev_sample.base_rotation,
            &prev_sample.base_accel,
            dt,
            flags,
            cfg,
        )
        .map_err(at(t))?;

        match update(
            &predicted,
            &sample.base_rotation,
            &sample.joints,
            anthro,
            cfg,
        ) {
            Ok(posterior) => states.push(posterior),
            Err(EstimatorError::SingularInnovation) => {
                skipped.push(t);
                states.push(predicted);
            }
            Err(e) => return Err(at(t)(e)),
        }
    }

    Ok(FilterRun {
        states,
        skipped_updates: skipped,
    })
}
