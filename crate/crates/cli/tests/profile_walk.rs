//! Ignored perf probe: dynamics cost over full movement trials.

use std::time::Instant;
use suitsim_cli::synth::{generate_synthetic_trial, SynthOptions};
use suitsim_core::analysis::MotionKind;
use suitsim_core::dynamics::{inverse_dynamics_trial, DistributeOptions};
use suitsim_core::estimator::{run_filter, NoiseConfig};
use suitsim_core::kinematics::{differentiate_poses, DifferentiationOptions};
use suitsim_core::model::{build_default_suit, Anthropometry, RegionId};

#[test]
#[ignore]
fn profile_movement_trials() {
    let anthro = Anthropometry::default();
    let suit = build_default_suit(&anthro).unwrap();
    for kind in [
        MotionKind::FlatWalk,
        MotionKind::StairsUp,
        MotionKind::StairsDown,
    ] {
        let trial = generate_synthetic_trial(kind, &SynthOptions::default(), &anthro).unwrap();
        let run = run_filter(&trial.recording, &anthro, &NoiseConfig::default()).unwrap();
        let kin = differentiate_poses(
            &trial.recording,
            &suit,
            &run.states,
            &DifferentiationOptions::default(),
        )
        .unwrap();
        let t0 = Instant::now();
        let loads = inverse_dynamics_trial(
            &suit,
            &kin,
            &[RegionId::LeftShoulder, RegionId::RightShoulder],
            &suitsim_core::gravity_vector(),
            &DistributeOptions::default(),
        )
        .unwrap();
        let dt = t0.elapsed();
        let iters: Vec<usize> = loads
            .samples
            .iter()
            .map(|s| s.solutions[0].iterations)
            .collect();
        let max = iters.iter().max().unwrap();
        let mean = iters.iter().sum::<usize>() as f64 / iters.len() as f64;
        println!(
            "{kind}: dynamics {dt:?} for {} samples; iterations max {max} mean {mean:.1}",
            iters.len()
        );
    }
}
