//! Synthetic trial generation: kinematically consistent recordings with
//! ground-truth states for estimator and pipeline testing.
//!
//! Trials follow the stand–move–stand sequence: one second of quiet double
//! stance, a movement phase, and a final quiet stance. The movement phase is
//! a sequence of step windows aligned to sample boundaries; within each
//! window the base advances between waypoints on a quintic profile (zero end
//! velocity and acceleration, so the concatenation is twice differentiable)
//! and the swing foot travels to its next plant during the middle of the
//! window. Accelerometer data is the analytic second derivative plus the
//! gravity reaction, and joint angles come from closed-form sagittal inverse
//! kinematics, so the recorded streams satisfy the estimator's process and
//! measurement models exactly.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use suitsim_core::analysis::MotionKind;
use suitsim_core::kinematics::{JointAngles, LegAngles, RecordingSample, TrialRecording};
use suitsim_core::model::{Anthropometry, Side};
use suitsim_core::GRAVITY;

/// Extra knee bend relative to straight legs, m. Keeps every swing target
/// inside the legs' reachable sphere.
const CROUCH: f64 = 0.14;
/// Quiet-stance duration at each end of a trial, s.
const STAND_TIME: f64 = 1.0;
const SAMPLE_RATE: f64 = 128.0;

/// Flat-ground course length, m.
pub const FLAT_WALK_DISTANCE: f64 = 6.4;
/// Riser height and count of the staircase course.
pub const STAIR_RISE: f64 = 0.16;
pub const STAIR_COUNT: usize = 5;
/// Tread depth, m.
const STAIR_TREAD: f64 = 0.28;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("duration must be positive, got {0}")]
    BadDuration(f64),
    #[error("duration {given} s too short for {kind}; need at least {needed:.1} s")]
    TooShort {
        kind: MotionKind,
        given: f64,
        needed: f64,
    },
    #[error("sample {sample}: foot target out of reach (|v| = {reach:.3} > {limit:.3})")]
    Unreachable {
        sample: usize,
        reach: f64,
        limit: f64,
    },
}

/// Ground-truth state at one sample.
#[derive(Debug, Clone)]
pub struct TruthSample {
    pub time: f64,
    pub base_position: Vector3<f64>,
    pub base_velocity: Vector3<f64>,
    pub left_foot: Vector3<f64>,
    pub right_foot: Vector3<f64>,
}

/// A generated trial: the recording plus the trajectory it encodes.
pub struct SynthTrial {
    pub kind: MotionKind,
    pub recording: TrialRecording,
    pub truth: Vec<TruthSample>,
    /// Planned base displacement over the whole trial.
    pub displacement: Vector3<f64>,
    /// Length of the planned base displacement, m.
    pub path_length: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    /// Total trial duration, s; `None` picks a per-kind default.
    pub duration: Option<f64>,
    pub seed: u64,
    /// Inject sensor-grade noise: accelerometer at the filter's nominal
    /// level, joint angles at the motion-capture system's stated accuracy.
    pub noise: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            duration: None,
            seed: 0,
            noise: false,
        }
    }
}

/// Quintic smoothstep and its first two derivatives on `u` in [0, 1].
fn quintic(u: f64) -> (f64, f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let s = 10.0 * u.powi(3) - 15.0 * u.powi(4) + 6.0 * u.powi(5);
    let ds = 30.0 * u.powi(2) - 60.0 * u.powi(3) + 30.0 * u.powi(4);
    let dds = 60.0 * u - 180.0 * u.powi(2) + 120.0 * u.powi(3);
    (s, ds, dds)
}

/// How the base advances through the move phase.
enum BaseProfile {
    /// Per-window quintic between waypoints; the base comes to rest at every
    /// window boundary (stair-climbing gait).
    Stepped,
    /// One quintic over the whole move phase; the base cruises while the
    /// feet step around it (level-walking gait).
    Global,
}

/// Per-step plan. All indices are sample counts.
struct Course {
    profile: BaseProfile,
    /// Samples per step window.
    step_samples: usize,
    /// Swing start/end offsets within a window.
    lift_offset: usize,
    land_offset: usize,
    /// Base position at the end of each window (starts from the origin).
    /// For the global profile only the last entry (total advance) is used.
    base_waypoints: Vec<Vector3<f64>>,
    /// Swing-foot landing target per window (right foot first, alternating).
    foot_targets: Vec<Vector3<f64>>,
    /// Apex of the swing-foot vertical lift, m.
    swing_lift: f64,
    /// Quiet-stance samples appended after the move phase.
    tail_samples: usize,
}

fn plan_course(
    kind: MotionKind,
    duration: Option<f64>,
    foot_z0: f64,
    hip_y_left: f64,
    hip_y_right: f64,
) -> Result<Course, SynthError> {
    if let Some(d) = duration {
        if !(d > 0.0) {
            return Err(SynthError::BadDuration(d));
        }
    }
    let stand_samples = (STAND_TIME * SAMPLE_RATE).round() as usize;
    let window = |step_time: f64| -> (usize, usize, usize) {
        let n = ((step_time * SAMPLE_RATE).round() as usize).max(5);
        let lift = ((0.2 * n as f64).round() as usize).max(1);
        let land = ((0.8 * n as f64).round() as usize).min(n - 1);
        (n, lift, land)
    };
    // Swing-foot y alternates right-first.
    let step_y = |k: usize| if k % 2 == 0 { hip_y_right } else { hip_y_left };

    match kind {
        MotionKind::Stand => {
            let total = duration.unwrap_or(4.0);
            let needed = 0.1;
            if total < needed {
                return Err(SynthError::TooShort {
                    kind,
                    given: total,
                    needed,
                });
            }
            let n = (total * SAMPLE_RATE).round() as usize;
            Ok(Course {
                profile: BaseProfile::Stepped,
                step_samples: 1,
                lift_offset: 0,
                land_offset: 1,
                base_waypoints: Vec::new(),
                foot_targets: Vec::new(),
                swing_lift: 0.0,
                tail_samples: n.saturating_sub(stand_samples),
            })
        }
        MotionKind::FlatWalk => {
            // The base cruises along one global quintic; foot plants track
            // the base profile with a half-step lead. Peak reach between a
            // planted foot and the passing hip bounds the cruise speed.
            let distance = FLAT_WALK_DISTANCE;
            let move_time = duration.map(|d| d - 2.0 * STAND_TIME).unwrap_or(13.0);
            let nominal_step = 0.5;
            let n_steps = (move_time / nominal_step).round().max(2.0) as usize;
            let step_time = move_time / n_steps as f64;
            let peak_speed = 1.875 * distance / move_time;
            if !(move_time > 0.0) || 0.75 * peak_speed * step_time > 0.40 {
                return Err(SynthError::TooShort {
                    kind,
                    given: duration.unwrap_or(move_time + 2.0 * STAND_TIME),
                    needed: 2.0 * STAND_TIME + 0.75 * 1.875 * distance * nominal_step / 0.40,
                });
            }
            let (step_samples, lift_offset, land_offset) = window(step_time);
            let total = (n_steps * step_samples) as f64;

            // Landing positions from the base profile at each touchdown.
            let base_at = |sample: usize| -> f64 {
                let (s, _, _) = quintic(sample as f64 / total);
                distance * s
            };
            let mut foot_targets = Vec::with_capacity(n_steps);
            for k in 0..n_steps {
                let land = k * step_samples + land_offset;
                let next_land = ((k + 1) * step_samples + land_offset).min(n_steps * step_samples);
                let lead = 0.5 * (base_at(next_land) - base_at(land));
                let x = if k + 2 >= n_steps {
                    distance
                } else {
                    (base_at(land) + lead).min(distance)
                };
                foot_targets.push(Vector3::new(x, step_y(k), foot_z0));
            }
            Ok(Course {
                profile: BaseProfile::Global,
                step_samples,
                lift_offset,
                land_offset,
                base_waypoints: vec![Vector3::new(distance, 0.0, 0.0)],
                foot_targets,
                swing_lift: 0.05,
                tail_samples: stand_samples,
            })
        }
        MotionKind::StairsUp | MotionKind::StairsDown => {
            let up = kind == MotionKind::StairsUp;
            let dir = if up { 1.0 } else { -1.0 };
            let n_steps = STAIR_COUNT + 1; // final step evens the feet up
            let step_time = match duration {
                Some(d) => {
                    let t = (d - 2.0 * STAND_TIME) / n_steps as f64;
                    if t < 0.5 {
                        return Err(SynthError::TooShort {
                            kind,
                            given: d,
                            needed: 2.0 * STAND_TIME + 0.5 * n_steps as f64,
                        });
                    }
                    t
                }
                None => 1.0,
            };
            let (step_samples, lift_offset, land_offset) = window(step_time);

            let mut foot_targets = Vec::with_capacity(n_steps);
            let mut base_waypoints = Vec::with_capacity(n_steps);
            for k in 0..n_steps {
                let level = (k + 1).min(STAIR_COUNT) as f64;
                foot_targets.push(Vector3::new(
                    level * STAIR_TREAD,
                    step_y(k),
                    foot_z0 + dir * level * STAIR_RISE,
                ));
                let base_level = if k + 1 < n_steps { level - 0.5 } else { level };
                base_waypoints.push(Vector3::new(
                    base_level * STAIR_TREAD,
                    0.0,
                    dir * base_level * STAIR_RISE,
                ));
            }
            Ok(Course {
                profile: BaseProfile::Stepped,
                step_samples,
                lift_offset,
                land_offset,
                base_waypoints,
                foot_targets,
                swing_lift: if up { STAIR_RISE + 0.06 } else { 0.06 },
                tail_samples: stand_samples,
            })
        }
    }
}

/// Generates a synthetic trial of the given kind.
pub fn generate_synthetic_trial(
    kind: MotionKind,
    options: &SynthOptions,
    anthro: &Anthropometry,
) -> Result<SynthTrial, SynthError> {
    let dt = 1.0 / SAMPLE_RATE;
    let hip_l = anthro.base_to_hip(Side::Left);
    let hip_r = anthro.base_to_hip(Side::Right);
    let sole_drop = Vector3::from(anthro.ankle_to_sole).norm();
    // Sole height below the base in the reference stance. A pure stand uses
    // straight legs (every suspension line exactly vertical); moving trials
    // crouch so that swing targets stay reachable.
    let straight = anthro.thigh_length + anthro.shank_length + sole_drop - hip_l.z;
    let crouch = if kind == MotionKind::Stand {
        0.0
    } else {
        CROUCH
    };
    let foot_z0 = -(straight - crouch);

    let course = plan_course(kind, options.duration, foot_z0, hip_l.y, hip_r.y)?;
    let stand_samples = (STAND_TIME * SAMPLE_RATE).round() as usize;
    let n_steps = course.foot_targets.len();
    let n = stand_samples + n_steps * course.step_samples + course.tail_samples + 1;
    let move_span = (course.step_samples as f64) * dt;

    // Planted positions before each step, per foot.
    let left0 = Vector3::new(0.0, hip_l.y, foot_z0);
    let right0 = Vector3::new(0.0, hip_r.y, foot_z0);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut samples = Vec::with_capacity(n);
    let mut truth = Vec::with_capacity(n);
    let limit = anthro.thigh_length + anthro.shank_length;

    // Precompute the plant history so any sample can be resolved directly.
    let mut left_plants = vec![left0];
    let mut right_plants = vec![right0];
    for (k, target) in course.foot_targets.iter().enumerate() {
        if k % 2 == 0 {
            right_plants.push(*target);
        } else {
            left_plants.push(*target);
        }
    }

    let displacement = course
        .base_waypoints
        .last()
        .cloned()
        .unwrap_or_else(Vector3::zeros);

    // Base velocity per sample from the windowed quintic chain. Positions
    // then follow the trapezoid recursion and the accelerometer reading is
    // the exact velocity difference, so the recording satisfies the
    // estimator's discrete process model to rounding error rather than to
    // integration-truncation error.
    let velocity_at = |i: usize| -> Vector3<f64> {
        if i <= stand_samples || n_steps == 0 {
            return Vector3::zeros();
        }
        let rel = i - stand_samples;
        match course.profile {
            BaseProfile::Stepped => {
                let k = ((rel - 1) / course.step_samples).min(n_steps - 1);
                let within = rel - k * course.step_samples;
                if within >= course.step_samples {
                    return Vector3::zeros();
                }
                let from = if k == 0 {
                    Vector3::zeros()
                } else {
                    course.base_waypoints[k - 1]
                };
                let (_, ds, _) = quintic(within as f64 / course.step_samples as f64);
                (course.base_waypoints[k] - from) * (ds / move_span)
            }
            BaseProfile::Global => {
                let total = n_steps * course.step_samples;
                if rel >= total {
                    return Vector3::zeros();
                }
                let span = total as f64 * dt;
                let (_, ds, _) = quintic(rel as f64 / total as f64);
                *course.base_waypoints.last().unwrap() * (ds / span)
            }
        }
    };
    let velocities: Vec<Vector3<f64>> = (0..n + 1).map(velocity_at).collect();
    let mut positions = Vec::with_capacity(n);
    let mut cursor = Vector3::zeros();
    positions.push(cursor);
    for i in 1..n {
        cursor += (velocities[i - 1] + velocities[i]) * (dt / 2.0);
        positions.push(cursor);
    }

    for i in 0..n {
        let t = i as f64 * dt;
        let base_pos = positions[i];
        let base_vel = velocities[i];
        let base_acc = (velocities[i + 1] - velocities[i]) / dt;

        // Foot states: resolve which plant/swing the sample falls in.
        let foot_state = |side: Side| -> (Vector3<f64>, bool) {
            let plants = match side {
                Side::Left => &left_plants,
                Side::Right => &right_plants,
            };
            if i <= stand_samples || n_steps == 0 {
                return (plants[0], true);
            }
            let rel = i - stand_samples;
            let k = ((rel - 1) / course.step_samples).min(n_steps - 1);
            let within = rel - k * course.step_samples;
            let my_turn = match side {
                Side::Right => k % 2 == 0,
                Side::Left => k % 2 == 1,
            };
            // Completed swings of this foot strictly before window k, plus
            // the current window once its landing is done.
            let done_before = (k + match side {
                Side::Right => 1,
                Side::Left => 0,
            }) / 2;
            if !my_turn {
                return (plants[done_before.min(plants.len() - 1)], true);
            }
            if within < course.lift_offset {
                (plants[done_before], true)
            } else if within >= course.land_offset {
                (plants[done_before + 1], true)
            } else {
                let u = (within - course.lift_offset) as f64
                    / (course.land_offset - course.lift_offset) as f64;
                let (s, _, _) = quintic(u);
                let from = plants[done_before];
                let to = plants[done_before + 1];
                let mut p = from + (to - from) * s;
                p.z += course.swing_lift * (std::f64::consts::PI * u).sin().powi(2);
                (p, false)
            }
        };
        let (lp, l_stance) = foot_state(Side::Left);
        let (rp, r_stance) = foot_state(Side::Right);

        // Closed-form IK for both legs; verifies the FK roundtrip.
        let ql = leg_ik(lp - base_pos, Side::Left, anthro, i, limit)?;
        let qr = leg_ik(rp - base_pos, Side::Right, anthro, i, limit)?;
        let joints = JointAngles {
            left: ql,
            right: qr,
        };

        // Specific force in the base frame (base stays world-aligned).
        let mut accel = base_acc + Vector3::new(0.0, 0.0, GRAVITY);
        let mut q_noisy = joints;
        if options.noise {
            for k in 0..3 {
                accel[k] += sample_normal(&mut rng) * 0.2;
            }
            let mut v = q_noisy.to_vector();
            for x in v.iter_mut() {
                *x += sample_normal(&mut rng) * 2.8f64.to_radians();
            }
            v[3] = v[3].clamp(0.0, std::f64::consts::PI);
            v[9] = v[9].clamp(0.0, std::f64::consts::PI);
            q_noisy = JointAngles::from_vector(&v);
        }

        samples.push(RecordingSample {
            time: t,
            base_rotation: Matrix3::identity(),
            base_accel: accel,
            joints: q_noisy,
            left_stance: l_stance,
            right_stance: r_stance,
        });
        truth.push(TruthSample {
            time: t,
            base_position: base_pos,
            base_velocity: base_vel,
            left_foot: lp,
            right_foot: rp,
        });
    }

    Ok(SynthTrial {
        kind,
        recording: TrialRecording {
            sample_period: dt,
            samples,
        },
        truth,
        displacement,
        path_length: displacement.norm(),
    })
}

/// Closed-form sagittal IK: hip flexion and knee from the planar two-link
/// problem, ankle flexion keeping the foot frame level, remaining angles
/// zero. The target must lie in the leg's sagittal plane.
fn leg_ik(
    sole_rel_base: Vector3<f64>,
    side: Side,
    anthro: &Anthropometry,
    sample: usize,
    limit: f64,
) -> Result<LegAngles, SynthError> {
    let hip = anthro.base_to_hip(side);
    let sole_drop = Vector3::from(anthro.ankle_to_sole).norm();
    let ankle_target = sole_rel_base + Vector3::new(0.0, 0.0, sole_drop);
    let v = ankle_target - hip;
    debug_assert!(v.y.abs() < 1e-9, "targets must stay sagittal");

    let l1 = anthro.thigh_length;
    let l2 = anthro.shank_length;
    let r = (v.x * v.x + v.z * v.z).sqrt();
    let angles = if v.x.abs() < 1e-12 && (r - limit).abs() < 1e-9 {
        // Straight down: exactly the zero configuration, avoiding the acos
        // roundoff at the reach boundary.
        LegAngles::default()
    } else {
        if r > limit - 1e-6 {
            return Err(SynthError::Unreachable {
                sample,
                reach: r,
                limit,
            });
        }
        let cos_knee = ((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
        let knee = cos_knee.acos();
        let phi = v.x.atan2(-v.z);
        let hip_flex = phi - (l2 * knee.sin()).atan2(l1 + l2 * cos_knee);
        let ankle_flex = -(hip_flex + knee);
        LegAngles {
            hip: [hip_flex, 0.0, 0.0],
            knee,
            ankle: [ankle_flex, 0.0],
        }
    };
    // The recording must satisfy the measurement model exactly.
    let q = match side {
        Side::Left => JointAngles {
            left: angles,
            right: LegAngles::default(),
        },
        Side::Right => JointAngles {
            left: LegAngles::default(),
            right: angles,
        },
    };
    let fk = suitsim_core::kinematics::foot_fk(&q, side, anthro);
    assert!(
        (fk - sole_rel_base).norm() < 1e-9,
        "IK roundtrip failed at sample {sample}: {fk:?} vs {sole_rel_base:?}"
    );
    Ok(angles)
}

/// Standard normal via Box-Muller.
fn sample_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use suitsim_core::kinematics::foot_fk;

    #[test]
    fn standing_trial_counters_gravity_exactly() {
        let trial = generate_synthetic_trial(
            MotionKind::Stand,
            &SynthOptions::default(),
            &Anthropometry::default(),
        )
        .unwrap();
        for s in &trial.recording.samples {
            assert_abs_diff_eq!(s.base_accel.x, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.base_accel.y, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.base_accel.z, GRAVITY, epsilon = 1e-12);
            assert!(s.left_stance && s.right_stance);
        }
        assert_abs_diff_eq!(trial.displacement.norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_walk_covers_the_course() {
        let trial = generate_synthetic_trial(
            MotionKind::FlatWalk,
            &SynthOptions::default(),
            &Anthropometry::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(trial.path_length, FLAT_WALK_DISTANCE, epsilon = 1e-12);
        let last = trial.truth.last().unwrap();
        // The base follows the trapezoid-integrated velocity profile, which
        // tracks the planned course to integration accuracy.
        assert_abs_diff_eq!(last.base_position.x, FLAT_WALK_DISTANCE, epsilon = 1e-6);
        assert_abs_diff_eq!(last.base_position.z, 0.0, epsilon = 1e-9);
        // Feet end at the goal line, at rest.
        assert_abs_diff_eq!(last.left_foot.x, FLAT_WALK_DISTANCE, epsilon = 1e-9);
        assert_abs_diff_eq!(last.right_foot.x, FLAT_WALK_DISTANCE, epsilon = 1e-9);
        assert_abs_diff_eq!(last.base_velocity.norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn stairs_rise_to_the_landing() {
        let trial = generate_synthetic_trial(
            MotionKind::StairsUp,
            &SynthOptions::default(),
            &Anthropometry::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(trial.displacement.z, 0.8, epsilon = 1e-12);
        let last = trial.truth.last().unwrap();
        assert_abs_diff_eq!(last.base_position.z, 0.8, epsilon = 1e-6);
        let first = &trial.truth[0];
        assert_abs_diff_eq!(last.left_foot.z - first.left_foot.z, 0.8, epsilon = 1e-9);
        assert_abs_diff_eq!(last.right_foot.z - first.right_foot.z, 0.8, epsilon = 1e-9);
    }

    #[test]
    fn stairs_down_descends() {
        let trial = generate_synthetic_trial(
            MotionKind::StairsDown,
            &SynthOptions::default(),
            &Anthropometry::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(trial.displacement.z, -0.8, epsilon = 1e-12);
        let last = trial.truth.last().unwrap();
        assert_abs_diff_eq!(last.base_position.z, -0.8, epsilon = 1e-6);
    }

    #[test]
    fn recording_is_measurement_consistent() {
        let anthro = Anthropometry::default();
        let trial =
            generate_synthetic_trial(MotionKind::FlatWalk, &SynthOptions::default(), &anthro)
                .unwrap();
        for (s, t) in trial.recording.samples.iter().zip(&trial.truth).step_by(37) {
            let h_l = foot_fk(&s.joints, Side::Left, &anthro);
            let h_r = foot_fk(&s.joints, Side::Right, &anthro);
            assert_abs_diff_eq!(
                ((t.left_foot - t.base_position) - h_l).norm(),
                0.0,
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(
                ((t.right_foot - t.base_position) - h_r).norm(),
                0.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn stance_flags_hold_over_the_following_interval() {
        // The filter consumes the flags of sample i-1 for the interval
        // [i-1, i]; a stance-flagged foot must not move across it.
        for kind in [
            MotionKind::FlatWalk,
            MotionKind::StairsUp,
            MotionKind::StairsDown,
        ] {
            let trial =
                generate_synthetic_trial(kind, &SynthOptions::default(), &Anthropometry::default())
                    .unwrap();
            for i in 1..trial.truth.len() {
                let flags = &trial.recording.samples[i - 1];
                let prev = &trial.truth[i - 1];
                let here = &trial.truth[i];
                if flags.left_stance {
                    assert!(
                        (here.left_foot - prev.left_foot).norm() < 1e-12,
                        "{kind}: sample {i}: stance-flagged left foot moved"
                    );
                }
                if flags.right_stance {
                    assert!(
                        (here.right_foot - prev.right_foot).norm() < 1e-12,
                        "{kind}: sample {i}: stance-flagged right foot moved"
                    );
                }
            }
        }
    }

    #[test]
    fn seeded_noise_is_reproducible() {
        let opts = SynthOptions {
            noise: true,
            seed: 42,
            duration: Some(3.0),
        };
        let a =
            generate_synthetic_trial(MotionKind::Stand, &opts, &Anthropometry::default()).unwrap();
        let b =
            generate_synthetic_trial(MotionKind::Stand, &opts, &Anthropometry::default()).unwrap();
        for (sa, sb) in a.recording.samples.iter().zip(&b.recording.samples) {
            assert_eq!(sa.base_accel, sb.base_accel);
            assert_eq!(sa.joints.to_vector(), sb.joints.to_vector());
        }
    }

    #[test]
    fn bad_durations_are_rejected() {
        let mut opts = SynthOptions::default();
        opts.duration = Some(-1.0);
        assert!(matches!(
            generate_synthetic_trial(MotionKind::Stand, &opts, &Anthropometry::default()),
            Err(SynthError::BadDuration(_))
        ));
        opts.duration = Some(3.0);
        assert!(matches!(
            generate_synthetic_trial(MotionKind::FlatWalk, &opts, &Anthropometry::default()),
            Err(SynthError::TooShort { .. })
        ));
    }
}
