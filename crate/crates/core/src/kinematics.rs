//! Leg forward kinematics, trial recordings, and differentiation of segment
//! poses into the velocities and accelerations inverse dynamics needs.
//!
//! Joint conventions (base frame: x forward, y left, z up):
//! hip carries an intrinsic flexion–abduction–axial sequence, the knee a
//! single flexion angle in `[0, pi]`, the ankle flexion then inversion.
//! Positive flexion swings the distal link forward; abduction, inversion,
//! and axial rotation are side-mirrored so that swapping the left and right
//! angle sets mirrors the pose across the sagittal plane.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Rotation3, SMatrix, Unit, Vector3};
use thiserror::Error;

use crate::estimator::FilterState;
use crate::model::{neck_offset, Anthropometry, BodySegment, SegmentId, Side, SuitModel};
use crate::signal::{differentiate, filtfilt, Biquad};

/// 3 x 12 Jacobian of a foot position with respect to all twelve joint angles.
pub type FootJacobian = SMatrix<f64, 3, 12>;

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("series too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("sample {sample}: base rotation is not orthonormal (defect {defect:.3e})")]
    NonOrthonormalRotation { sample: usize, defect: f64 },
    #[error("sample {sample}: time does not increase")]
    NonMonotonicTime { sample: usize },
    #[error("sample period must be positive, got {0}")]
    BadSamplePeriod(f64),
    #[error("sample {sample}: {what} is not finite")]
    NonFinite { sample: usize, what: &'static str },
    #[error("sample {sample}: knee angle {value} outside [0, pi]")]
    KneeOutOfRange { sample: usize, value: f64 },
    #[error("state series length {states} does not match recording length {samples}")]
    StateLengthMismatch { states: usize, samples: usize },
}

/// One leg's joint angles, rad.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LegAngles {
    /// Flexion, abduction, axial rotation.
    pub hip: [f64; 3],
    /// Knee flexion, `[0, pi]`.
    pub knee: f64,
    /// Flexion, inversion.
    pub ankle: [f64; 2],
}

/// Joint angles of both legs; twelve values total.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JointAngles {
    pub left: LegAngles,
    pub right: LegAngles,
}

impl JointAngles {
    /// Packs into the canonical 12-vector:
    /// left hip(3), left knee, left ankle(2), then the right leg likewise.
    pub fn to_vector(&self) -> [f64; 12] {
        let l = &self.left;
        let r = &self.right;
        [
            l.hip[0], l.hip[1], l.hip[2], l.knee, l.ankle[0], l.ankle[1], //
            r.hip[0], r.hip[1], r.hip[2], r.knee, r.ankle[0], r.ankle[1],
        ]
    }

    pub fn from_vector(v: &[f64; 12]) -> Self {
        JointAngles {
            left: LegAngles {
                hip: [v[0], v[1], v[2]],
                knee: v[3],
                ankle: [v[4], v[5]],
            },
            right: LegAngles {
                hip: [v[6], v[7], v[8]],
                knee: v[9],
                ankle: [v[10], v[11]],
            },
        }
    }

    pub fn leg(&self, side: Side) -> &LegAngles {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }

    fn validate(&self, sample: usize) -> Result<(), KinematicsError> {
        for v in self.to_vector() {
            if !v.is_finite() {
                return Err(KinematicsError::NonFinite {
                    sample,
                    what: "joint angle",
                });
            }
        }
        for leg in [&self.left, &self.right] {
            if !(0.0..=std::f64::consts::PI).contains(&leg.knee) {
                return Err(KinematicsError::KneeOutOfRange {
                    sample,
                    value: leg.knee,
                });
            }
        }
        Ok(())
    }
}

/// One sample of a trial recording.
#[derive(Debug, Clone)]
pub struct RecordingSample {
    /// Time, s.
    pub time: f64,
    /// Base orientation, base-to-world.
    pub base_rotation: Matrix3<f64>,
    /// Accelerometer reading in the base frame, m/s².
    pub base_accel: Vector3<f64>,
    pub joints: JointAngles,
    pub left_stance: bool,
    pub right_stance: bool,
}

/// Time-indexed sensor streams covering one movement trial.
#[derive(Debug, Clone)]
pub struct TrialRecording {
    /// Nominal sampling period, s.
    pub sample_period: f64,
    pub samples: Vec<RecordingSample>,
}

impl TrialRecording {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        if !(self.sample_period > 0.0) {
            return Err(KinematicsError::BadSamplePeriod(self.sample_period));
        }
        let mut prev_time = f64::NEG_INFINITY;
        for (i, s) in self.samples.iter().enumerate() {
            if s.time <= prev_time {
                return Err(KinematicsError::NonMonotonicTime { sample: i });
            }
            prev_time = s.time;
            let defect = crate::model::orthonormality_defect(&s.base_rotation);
            if defect > 1e-6 {
                return Err(KinematicsError::NonOrthonormalRotation { sample: i, defect });
            }
            if !s.base_accel.iter().all(|v| v.is_finite()) {
                return Err(KinematicsError::NonFinite {
                    sample: i,
                    what: "base acceleration",
                });
            }
            s.joints.validate(i)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Joint axes and anchor points of one leg at a given configuration, base
/// frame. Byproduct of the forward kinematics reused by the Jacobian and
/// the pose-slaving code.
pub struct LegChain {
    /// Hip joint position.
    pub hip_point: Vector3<f64>,
    /// Orientation after the hip sequence (thigh frame).
    pub thigh_rotation: Rotation3<f64>,
    /// Knee joint position.
    pub knee_point: Vector3<f64>,
    /// Orientation after the knee (shank frame).
    pub shank_rotation: Rotation3<f64>,
    /// Ankle joint position.
    pub ankle_point: Vector3<f64>,
    /// Orientation after the ankle pair (foot frame).
    pub foot_rotation: Rotation3<f64>,
    /// Foot-sole position: the value of the FK map.
    pub sole: Vector3<f64>,
    /// Per-joint (origin, world axis) pairs in vector order.
    joints: [(Vector3<f64>, Vector3<f64>); 6],
}

/// Evaluates the hip(3)–knee(1)–ankle(2) chain of `side`.
pub fn leg_chain(q: &JointAngles, side: Side, anthro: &Anthropometry) -> LegChain {
    let leg = q.leg(side);
    let s = side.lateral_sign();

    let flex_axis = Vector3::new(0.0, -1.0, 0.0);
    let abd_axis = Vector3::new(s, 0.0, 0.0);
    let axial_axis = Vector3::new(0.0, 0.0, -s);
    let inv_axis = Vector3::new(-s, 0.0, 0.0);

    let mut rot = Rotation3::identity();
    let mut pos = anthro.base_to_hip(side);
    let hip_point = pos;
    let mut joints = [(Vector3::zeros(), Vector3::zeros()); 6];

    let revolute = |rot: &mut Rotation3<f64>,
                    pos: Vector3<f64>,
                    axis: Vector3<f64>,
                    angle: f64,
                    k: usize,
                    joints: &mut [(Vector3<f64>, Vector3<f64>); 6]| {
        let world_axis = *rot * axis;
        joints[k] = (pos, world_axis);
        *rot *= Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
    };

    revolute(&mut rot, pos, flex_axis, leg.hip[0], 0, &mut joints);
    revolute(&mut rot, pos, abd_axis, leg.hip[1], 1, &mut joints);
    revolute(&mut rot, pos, axial_axis, leg.hip[2], 2, &mut joints);
    let thigh_rotation = rot;

    pos += rot * Vector3::new(0.0, 0.0, -anthro.thigh_length);
    let knee_point = pos;
    revolute(&mut rot, pos, flex_axis, leg.knee, 3, &mut joints);
    let shank_rotation = rot;

    pos += rot * Vector3::new(0.0, 0.0, -anthro.shank_length);
    let ankle_point = pos;
    revolute(&mut rot, pos, flex_axis, leg.ankle[0], 4, &mut joints);
    revolute(&mut rot, pos, inv_axis, leg.ankle[1], 5, &mut joints);
    let foot_rotation = rot;

    let sole = pos + rot * Vector3::from(anthro.ankle_to_sole);

    LegChain {
        hip_point,
        thigh_rotation,
        knee_point,
        shank_rotation,
        ankle_point,
        foot_rotation,
        sole,
        joints,
    }
}

/// Foot-sole position of `side` in the base frame, m.
pub fn foot_fk(q: &JointAngles, side: Side, anthro: &Anthropometry) -> Vector3<f64> {
    leg_chain(q, side, anthro).sole
}

/// Geometric Jacobian of [`foot_fk`] with respect to the twelve joint
/// angles; the other leg's six columns are zero.
pub fn fk_jacobian(q: &JointAngles, side: Side, anthro: &Anthropometry) -> FootJacobian {
    let chain = leg_chain(q, side, anthro);
    let offset = match side {
        Side::Left => 0,
        Side::Right => 6,
    };
    let mut jac = FootJacobian::zeros();
    for (k, (origin, axis)) in chain.joints.iter().enumerate() {
        let col = axis.cross(&(chain.sole - origin));
        jac.set_column(offset + k, &col.into());
    }
    jac
}

/// World position of a belt's body-side anchor.
pub fn body_anchor_world(
    body: BodySegment,
    body_point: &Vector3<f64>,
    base_rotation: &Rotation3<f64>,
    base_position: &Vector3<f64>,
    q: &JointAngles,
    anthro: &Anthropometry,
) -> Vector3<f64> {
    let local = match body {
        BodySegment::Neck => neck_offset(anthro) + body_point,
        BodySegment::LeftHip => anthro.base_to_hip(Side::Left) + body_point,
        BodySegment::RightHip => anthro.base_to_hip(Side::Right) + body_point,
        BodySegment::LeftKnee | BodySegment::RightKnee => {
            let side = if body == BodySegment::LeftKnee {
                Side::Left
            } else {
                Side::Right
            };
            let chain = leg_chain(q, side, anthro);
            // Knee anchor rides on the thigh.
            chain.knee_point + chain.thigh_rotation * body_point
        }
    };
    base_position + base_rotation * local
}

/// Pose and differentiated motion of one suit segment at one sample.
#[derive(Debug, Clone, Copy)]
pub struct SegmentMotion {
    /// Segment-to-world rotation.
    pub rotation: Rotation3<f64>,
    /// Segment frame origin, world, m.
    pub position: Vector3<f64>,
    /// Segment COM, world, m.
    pub com_position: Vector3<f64>,
    /// COM linear acceleration, world, m/s².
    pub com_accel: Vector3<f64>,
    /// Angular velocity, world, rad/s.
    pub ang_vel: Vector3<f64>,
    /// Angular acceleration, world, rad/s².
    pub ang_acc: Vector3<f64>,
}

/// Per-sample world positions of one belt's two anchors.
#[derive(Debug, Clone)]
pub struct BeltAnchorTrack {
    pub suit_world: Vec<Vector3<f64>>,
    pub body_world: Vec<Vector3<f64>>,
}

/// Differentiated motion of every suit segment over a trial, plus the belt
/// anchor tracks the force-distribution stage needs.
pub struct TrialKinematics {
    pub times: Vec<f64>,
    pub dt: f64,
    pub segments: BTreeMap<SegmentId, Vec<SegmentMotion>>,
    /// Parallel to `SuitModel::belts`.
    pub belt_anchors: Vec<BeltAnchorTrack>,
}

/// Options for [`differentiate_poses`].
#[derive(Debug, Clone, Copy)]
pub struct DifferentiationOptions {
    /// Zero-phase low-pass cutoff applied to positions and angular rates
    /// before differencing; `None` disables smoothing.
    pub lowpass_cutoff_hz: Option<f64>,
}

impl Default for DifferentiationOptions {
    fn default() -> Self {
        DifferentiationOptions {
            lowpass_cutoff_hz: Some(6.0),
        }
    }
}

/// Slaves each suit segment to its carrying body segment, then differentiates
/// the pose series into COM accelerations and angular rates. Positions and
/// angular velocities are low-pass filtered (zero phase) before central
/// differencing; endpoints use one-sided differences.
pub fn differentiate_poses(
    recording: &TrialRecording,
    suit: &SuitModel,
    states: &[FilterState],
    options: &DifferentiationOptions,
) -> Result<TrialKinematics, KinematicsError> {
    let n = recording.len();
    if n < 5 {
        return Err(KinematicsError::TooShort { needed: 5, got: n });
    }
    if states.len() != n {
        return Err(KinematicsError::StateLengthMismatch {
            states: states.len(),
            samples: n,
        });
    }
    recording.validate()?;
    let anthro = &suit.anthropometry;
    let dt = recording.sample_period;

    // Pose series per segment.
    let mut poses: BTreeMap<SegmentId, Vec<(Rotation3<f64>, Vector3<f64>)>> = BTreeMap::new();
    for id in SegmentId::ALL {
        poses.insert(id, Vec::with_capacity(n));
    }
    let mut belt_anchors: Vec<BeltAnchorTrack> = suit
        .belts
        .iter()
        .map(|_| BeltAnchorTrack {
            suit_world: Vec::with_capacity(n),
            body_world: Vec::with_capacity(n),
        })
        .collect();

    for (t, sample) in recording.samples.iter().enumerate() {
        let base_rot = Rotation3::from_matrix_unchecked(sample.base_rotation);
        let base_pos = states[t].base_position;
        let q = &sample.joints;

        for id in SegmentId::ALL {
            let pose = segment_pose(id, &base_rot, &base_pos, q, suit);
            poses.get_mut(&id).unwrap().push(pose);
        }
        for (b, belt) in suit.belts.iter().enumerate() {
            let (seg_rot, seg_pos) = poses[&belt.segment][t];
            belt_anchors[b]
                .suit_world
                .push(seg_pos + seg_rot * belt.suit_point);
            belt_anchors[b].body_world.push(body_anchor_world(
                belt.body_segment,
                &belt.body_point,
                &base_rot,
                &base_pos,
                q,
                anthro,
            ));
        }
    }

    let biquad = options
        .lowpass_cutoff_hz
        .filter(|fc| *fc > 0.0 && *fc < 0.5 / dt)
        .map(|fc| Biquad::butterworth_lowpass(fc, 1.0 / dt));
    let smooth = |xs: Vec<f64>| -> Vec<f64> {
        match &biquad {
            Some(bq) => filtfilt(bq, &xs),
            None => xs,
        }
    };

    let mut segments = BTreeMap::new();
    for id in SegmentId::ALL {
        let series = &poses[&id];
        let com_offset = suit.segment(id).com_offset;

        // COM position components, smoothed, then differenced.
        let com: Vec<Vector3<f64>> = series
            .iter()
            .map(|(rot, pos)| pos + rot * com_offset)
            .collect();
        let mut coords = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (t, c) in com.iter().enumerate() {
            for k in 0..3 {
                coords[k][t] = c[k];
            }
        }
        let coords = coords.map(smooth);
        let accel: Vec<Vector3<f64>> = second_difference_rows(&coords, dt);

        // Angular velocity from the rotation sequence, smoothed, then
        // differenced to angular acceleration.
        let omega_raw = angular_rates(series, dt);
        let mut wcoords = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for (t, w) in omega_raw.iter().enumerate() {
            for k in 0..3 {
                wcoords[k][t] = w[k];
            }
        }
        let wcoords = wcoords.map(smooth);
        let alpha: Vec<Vector3<f64>> = first_difference_rows(&wcoords, dt);

        let motions = (0..n)
            .map(|t| SegmentMotion {
                rotation: series[t].0,
                position: series[t].1,
                com_position: com[t],
                com_accel: accel[t],
                ang_vel: Vector3::new(wcoords[0][t], wcoords[1][t], wcoords[2][t]),
                ang_acc: alpha[t],
            })
            .collect();
        segments.insert(id, motions);
    }

    Ok(TrialKinematics {
        times: recording.samples.iter().map(|s| s.time).collect(),
        dt,
        segments,
        belt_anchors,
    })
}

/// Pose of one suit segment given the base pose and joint angles. Trunk and
/// arm shells ride on the base; leg shells follow the corresponding limb.
pub fn segment_pose(
    id: SegmentId,
    base_rotation: &Rotation3<f64>,
    base_position: &Vector3<f64>,
    q: &JointAngles,
    suit: &SuitModel,
) -> (Rotation3<f64>, Vector3<f64>) {
    let anthro = &suit.anthropometry;
    match id {
        SegmentId::FT | SegmentId::BP => (*base_rotation, *base_position),
        SegmentId::RA | SegmentId::LA => {
            // The arm hangs one taut link length below its torso pivot.
            let susp = suit
                .arm_suspensions
                .iter()
                .find(|s| s.arm == id)
                .expect("validated model");
            let drop = Vector3::new(0.0, 0.0, -crate::model::ARM_LINK_DROP);
            let origin = base_position + base_rotation * (susp.torso_point + drop - susp.arm_point);
            (*base_rotation, origin)
        }
        SegmentId::RLU | SegmentId::LLU => {
            let side = if id == SegmentId::LLU {
                Side::Left
            } else {
                Side::Right
            };
            let chain = leg_chain(q, side, anthro);
            (
                base_rotation * chain.thigh_rotation,
                base_position + base_rotation * chain.hip_point,
            )
        }
        SegmentId::RLL | SegmentId::LLL => {
            let side = if id == SegmentId::LLL {
                Side::Left
            } else {
                Side::Right
            };
            let chain = leg_chain(q, side, anthro);
            (
                base_rotation * chain.shank_rotation,
                base_position + base_rotation * chain.knee_point,
            )
        }
    }
}

/// World-frame angular velocity series of a rotation sequence: central
/// log-map differences inside, one-sided at the ends.
fn angular_rates(series: &[(Rotation3<f64>, Vector3<f64>)], dt: f64) -> Vec<Vector3<f64>> {
    let n = series.len();
    let mut omega = Vec::with_capacity(n);
    let rate = |a: &Rotation3<f64>, b: &Rotation3<f64>, span: f64| -> Vector3<f64> {
        (b * a.inverse()).scaled_axis() / span
    };
    for t in 0..n {
        let w = if t == 0 {
            rate(&series[0].0, &series[1].0, dt)
        } else if t == n - 1 {
            rate(&series[n - 2].0, &series[n - 1].0, dt)
        } else {
            rate(&series[t - 1].0, &series[t + 1].0, 2.0 * dt)
        };
        omega.push(w);
    }
    omega
}

fn first_difference_rows(coords: &[Vec<f64>; 3], dt: f64) -> Vec<Vector3<f64>> {
    let d: [Vec<f64>; 3] = [
        differentiate(&coords[0], dt),
        differentiate(&coords[1], dt),
        differentiate(&coords[2], dt),
    ];
    (0..coords[0].len())
        .map(|t| Vector3::new(d[0][t], d[1][t], d[2][t]))
        .collect()
}

/// Second derivative: direct central second difference inside, parabola fit
/// (repeating the adjacent interior value) at the endpoints.
fn second_difference_rows(coords: &[Vec<f64>; 3], dt: f64) -> Vec<Vector3<f64>> {
    let n = coords[0].len();
    let one = |x: &Vec<f64>| -> Vec<f64> {
        let mut a = vec![0.0; n];
        for i in 1..n - 1 {
            a[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) / (dt * dt);
        }
        a[0] = (x[2] - 2.0 * x[1] + x[0]) / (dt * dt);
        a[n - 1] = (x[n - 1] - 2.0 * x[n - 2] + x[n - 3]) / (dt * dt);
        a
    };
    let d = [one(&coords[0]), one(&coords[1]), one(&coords[2])];
    (0..n)
        .map(|t| Vector3::new(d[0][t], d[1][t], d[2][t]))
        .collect()
}
