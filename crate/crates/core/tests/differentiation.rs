//! Pose-differentiation checks against analytic motion profiles.

use nalgebra::{Matrix3, SMatrix, Vector3};

use suitsim_core::estimator::FilterState;
use suitsim_core::kinematics::{
    differentiate_poses, DifferentiationOptions, JointAngles, KinematicsError, RecordingSample,
    TrialRecording,
};
use suitsim_core::model::{build_default_suit, Anthropometry, SegmentId};

const DT: f64 = 1.0 / 128.0;

fn recording(n: usize) -> TrialRecording {
    TrialRecording {
        sample_period: DT,
        samples: (0..n)
            .map(|i| RecordingSample {
                time: i as f64 * DT,
                base_rotation: Matrix3::identity(),
                base_accel: Vector3::new(0.0, 0.0, suitsim_core::GRAVITY),
                joints: JointAngles::default(),
                left_stance: true,
                right_stance: true,
            })
            .collect(),
    }
}

fn states_from_positions(positions: &[Vector3<f64>]) -> Vec<FilterState> {
    positions
        .iter()
        .map(|p| FilterState {
            base_position: *p,
            base_velocity: Vector3::zeros(),
            left_foot: Vector3::new(0.0, 0.09, -1.0),
            right_foot: Vector3::new(0.0, -0.09, -1.0),
            covariance: SMatrix::zeros(),
        })
        .collect()
}

#[test]
fn constant_pose_has_zero_rates() {
    let suit = build_default_suit(&Anthropometry::default()).unwrap();
    let n = 64;
    let rec = recording(n);
    let states = states_from_positions(&vec![Vector3::new(0.3, -0.1, 0.9); n]);
    let kin =
        differentiate_poses(&rec, &suit, &states, &DifferentiationOptions::default()).unwrap();
    for id in SegmentId::ALL {
        for m in &kin.segments[&id] {
            assert!(m.com_accel.norm() < 1e-10, "{id}: accel {:?}", m.com_accel);
            assert!(m.ang_vel.norm() < 1e-12);
            assert!(m.ang_acc.norm() < 1e-12);
        }
    }
}

#[test]
fn linear_ramp_has_zero_acceleration() {
    let suit = build_default_suit(&Anthropometry::default()).unwrap();
    let n = 400;
    let rec = recording(n);
    let v = Vector3::new(0.8, -0.2, 0.1);
    let positions: Vec<Vector3<f64>> = (0..n).map(|i| v * (i as f64 * DT)).collect();
    let states = states_from_positions(&positions);
    let kin =
        differentiate_poses(&rec, &suit, &states, &DifferentiationOptions::default()).unwrap();
    for m in &kin.segments[&SegmentId::FT] {
        assert!(m.com_accel.norm() < 1e-9, "ramp accel {:?}", m.com_accel);
    }
}

#[test]
fn sinusoid_acceleration_amplitude_within_one_percent() {
    let suit = build_default_suit(&Anthropometry::default()).unwrap();
    let n = 6 * 128;
    let rec = recording(n);
    let amp = 0.05;
    let omega = 2.0 * std::f64::consts::PI; // 1 Hz
    let positions: Vec<Vector3<f64>> = (0..n)
        .map(|i| Vector3::new(amp * (omega * i as f64 * DT).sin(), 0.0, 0.0))
        .collect();
    let states = states_from_positions(&positions);
    let kin =
        differentiate_poses(&rec, &suit, &states, &DifferentiationOptions::default()).unwrap();
    // Amplitude from the RMS over interior whole periods.
    let interior = &kin.segments[&SegmentId::FT][256..256 + 3 * 128];
    let rms = (interior
        .iter()
        .map(|m| m.com_accel.x * m.com_accel.x)
        .sum::<f64>()
        / interior.len() as f64)
        .sqrt();
    let recovered = rms * 2.0f64.sqrt();
    let expected = omega * omega * amp;
    assert!(
        (recovered / expected - 1.0).abs() < 0.01,
        "recovered {recovered}, analytic {expected}"
    );
}

#[test]
fn time_reversal_flips_odd_derivatives() {
    let suit = build_default_suit(&Anthropometry::default()).unwrap();
    let n = 300;
    let rec = recording(n);
    let positions: Vec<Vector3<f64>> = (0..n)
        .map(|i| {
            let t = i as f64 * DT;
            Vector3::new(
                0.08 * (3.0 * t).sin(),
                0.04 * (2.0 * t).cos(),
                0.9 + 0.02 * t,
            )
        })
        .collect();
    let reversed: Vec<Vector3<f64>> = positions.iter().rev().cloned().collect();
    let forward = differentiate_poses(
        &rec,
        &suit,
        &states_from_positions(&positions),
        &DifferentiationOptions::default(),
    )
    .unwrap();
    let backward = differentiate_poses(
        &rec,
        &suit,
        &states_from_positions(&reversed),
        &DifferentiationOptions::default(),
    )
    .unwrap();
    let fwd = &forward.segments[&SegmentId::FT];
    let bwd = &backward.segments[&SegmentId::FT];
    for i in 0..n {
        let j = n - 1 - i;
        // Acceleration is even under time reversal.
        assert!(
            (fwd[i].com_accel - bwd[j].com_accel).norm() < 1e-9,
            "sample {i}: accel asymmetry"
        );
    }
}

#[test]
fn short_series_is_rejected() {
    let suit = build_default_suit(&Anthropometry::default()).unwrap();
    let rec = recording(4);
    let states = states_from_positions(&vec![Vector3::zeros(); 4]);
    assert!(matches!(
        differentiate_poses(&rec, &suit, &states, &DifferentiationOptions::default()),
        Err(KinematicsError::TooShort { .. })
    ));
}

#[test]
fn leg_segments_follow_the_joints() {
    // A bent knee tilts the shank shell: its angular state must be nonzero
    // while the torso stays still.
    let suit = build_default_suit(&Anthropometry::default()).unwrap();
    let n = 64;
    let mut rec = recording(n);
    for (i, s) in rec.samples.iter_mut().enumerate() {
        let t = i as f64 * DT;
        s.joints.left.knee = 0.6 + 0.3 * (4.0 * t).sin();
    }
    let states = states_from_positions(&vec![Vector3::zeros(); n]);
    let kin =
        differentiate_poses(&rec, &suit, &states, &DifferentiationOptions::default()).unwrap();
    let shank = &kin.segments[&SegmentId::LLL][n / 2];
    assert!(shank.ang_vel.norm() > 0.1, "shank should rotate");
    let torso = &kin.segments[&SegmentId::FT][n / 2];
    assert!(torso.ang_vel.norm() < 1e-12);
}
