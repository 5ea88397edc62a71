//! Acceptance suite: every release criterion as one test, each printing a
//! `[PASS]`/`[FAIL]` line with the measured figure (run with
//! `cargo test -p suitsim-cli --test acceptance -- --nocapture`).

use std::time::Instant;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use suitsim_cli::synth::{generate_synthetic_trial, SynthOptions, SynthTrial};
use suitsim_core::analysis::{
    remove_outliers, rms_error, LoadSeries, LoadSource, MotionKind, OutlierMode,
};
use suitsim_core::dynamics::{
    distribute_forces, inverse_dynamics_trial, tangential_ratio, DistributeOptions, DynamicsError,
    TrialLoads,
};
use suitsim_core::estimator::{run_filter, FilterRun, NoiseConfig};
use suitsim_core::kinematics::{
    differentiate_poses, fk_jacobian, foot_fk, DifferentiationOptions, JointAngles,
};
use suitsim_core::model::{
    build_default_suit, Anthropometry, RegionId, SegmentId, Side, SuitModel, SEGMENT_WEIGHTS_N,
    TOTAL_WEIGHT_N,
};

fn passed(name: &str, detail: &str) {
    println!("[PASS] {name}: {detail}");
}

fn check(name: &str, ok: bool, detail: &str) {
    if ok {
        passed(name, detail);
    } else {
        println!("[FAIL] {name}: {detail}");
        panic!("criterion `{name}` failed: {detail}");
    }
}

fn default_suit() -> SuitModel {
    build_default_suit(&Anthropometry::default()).expect("default suit builds")
}

fn run_trial(kind: MotionKind, duration: Option<f64>) -> (SynthTrial, FilterRun) {
    let anthro = Anthropometry::default();
    let trial = generate_synthetic_trial(
        kind,
        &SynthOptions {
            duration,
            ..SynthOptions::default()
        },
        &anthro,
    )
    .expect("trial generates");
    let run = run_filter(&trial.recording, &anthro, &NoiseConfig::default()).expect("filter runs");
    (trial, run)
}

fn simulate_loads(trial: &SynthTrial, run: &FilterRun, suit: &SuitModel) -> TrialLoads {
    let kin = differentiate_poses(
        &trial.recording,
        suit,
        &run.states,
        &DifferentiationOptions::default(),
    )
    .expect("differentiation succeeds");
    inverse_dynamics_trial(
        suit,
        &kin,
        &[RegionId::LeftShoulder, RegionId::RightShoulder],
        &suitsim_core::gravity_vector(),
        &DistributeOptions::default(),
    )
    .expect("inverse dynamics succeeds")
}

#[test]
fn model_arithmetic() {
    let table_sum: f64 = SEGMENT_WEIGHTS_N.iter().map(|(_, w)| w).sum();
    let suit = default_suit();
    let built_sum = suit.total_weight();
    check(
        "model arithmetic",
        (table_sum - TOTAL_WEIGHT_N).abs() <= 0.01 && (built_sum - TOTAL_WEIGHT_N).abs() <= 0.01,
        &format!("component weights sum to {built_sum:.4} N (target {TOTAL_WEIGHT_N} ± 0.01)"),
    );
}

#[test]
fn static_equilibrium() {
    let start = Instant::now();
    let suit = default_suit();
    let (trial, run) = run_trial(MotionKind::Stand, Some(3.0));
    let loads = simulate_loads(&trial, &run, &suit);

    let mut worst_total = 0.0f64;
    let mut worst_residual = 0.0f64;
    for s in &loads.samples {
        worst_total = worst_total.max((s.total_vertical_interface() - TOTAL_WEIGHT_N).abs());
        worst_residual = worst_residual.max(s.max_residual());
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        "static equilibrium",
        worst_total <= 0.01 && worst_residual < 1e-6 && elapsed < 10.0,
        &format!(
            "total vertical interface within {worst_total:.2e} N of {TOTAL_WEIGHT_N}, \
             max segment residual {worst_residual:.2e}, runtime {elapsed:.2} s (< 10 s)"
        ),
    );
}

#[test]
fn qp_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
    let opts = DistributeOptions::default();
    let mut cases = 0usize;
    let mut max_diff = 0.0f64;
    while cases < 100 {
        let inst = suitsim_testkit::random_instance(&mut rng, 6, true);
        let wrench = suitsim_core::dynamics::Wrench {
            force: inst.force,
            moment: inst.moment,
            reference_point: inst.reference,
        };
        let contacts: Vec<_> = inst
            .points
            .iter()
            .enumerate()
            .map(|(i, (p, n))| suitsim_core::dynamics::WorldContactPoint {
                region: RegionId::Custom("acc".into()),
                point_index: i,
                position: *p,
                normal: nalgebra::Unit::new_normalize(*n),
            })
            .collect();
        let belts: Vec<_> = inst
            .belts
            .iter()
            .map(|(a, d)| suitsim_core::dynamics::WorldBelt {
                segment: SegmentId::FT,
                body_segment: suitsim_core::model::BodySegment::Neck,
                anchor: *a,
                direction: nalgebra::Unit::new_normalize(*d),
            })
            .collect();
        let sol = match distribute_forces(&wrench, &contacts, &belts, &opts) {
            Ok(s) => s,
            Err(DynamicsError::Infeasible { .. }) => continue,
            Err(e) => panic!("solver error: {e}"),
        };
        let oracle = suitsim_testkit::oracle_distribute(
            &inst.force,
            &inst.moment,
            &inst.reference,
            &inst.points,
            &inst.belts,
        )
        .expect("oracle finds a KKT point on a feasible instance");
        for (c, of) in sol.contacts.iter().zip(&oracle.forces) {
            for k in 0..3 {
                max_diff = max_diff.max((c.force[k] - of[k]).abs());
            }
        }
        for (b, ot) in sol.belts.iter().zip(&oracle.tensions) {
            max_diff = max_diff.max((b.tension - ot).abs());
        }
        cases += 1;
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        "QP oracle equivalence",
        cases >= 100 && max_diff < 1e-6 && elapsed < 60.0,
        &format!(
            "{cases} randomized instances, max force-component deviation {max_diff:.2e} \
             (< 1e-6), runtime {elapsed:.2} s (< 60 s)"
        ),
    );
}

#[test]
fn estimator_consistency() {
    // Quiet standing: the base estimate must stay at the origin.
    let start = Instant::now();
    let (stand, stand_run) = run_trial(MotionKind::Stand, Some(4.0));
    let mut stand_err = 0.0f64;
    for (st, truth) in stand_run.states.iter().zip(&stand.truth) {
        stand_err = stand_err.max((st.base_position - truth.base_position).norm());
    }
    let stand_elapsed = start.elapsed().as_secs_f64();

    // Flat walk: final displacement within 1% of the course length.
    let start = Instant::now();
    let (walk, walk_run) = run_trial(MotionKind::FlatWalk, None);
    let final_est = walk_run.states.last().unwrap().base_position;
    let final_truth = walk.truth.last().unwrap().base_position;
    let disp_err = (final_est - final_truth).norm();
    let budget = 0.01 * walk.path_length;

    // Stance-foot drift during double stance.
    let mut drift = 0.0f64;
    let mut anchor_left: Option<Vector3<f64>> = None;
    let mut anchor_right: Option<Vector3<f64>> = None;
    for (i, s) in walk.recording.samples.iter().enumerate() {
        let double = s.left_stance && s.right_stance;
        if double {
            let st = &walk_run.states[i];
            match &anchor_left {
                Some(a) => drift = drift.max((st.left_foot - a).norm()),
                None => anchor_left = Some(st.left_foot),
            }
            match &anchor_right {
                Some(a) => drift = drift.max((st.right_foot - a).norm()),
                None => anchor_right = Some(st.right_foot),
            }
        } else {
            anchor_left = None;
            anchor_right = None;
        }
    }
    let walk_elapsed = start.elapsed().as_secs_f64();

    check(
        "estimator consistency",
        stand_err < 1e-3
            && disp_err < budget
            && drift < 1e-4
            && stand_elapsed < 30.0
            && walk_elapsed < 30.0,
        &format!(
            "stand |p| <= {stand_err:.2e} m (< 1e-3), walk displacement error {disp_err:.2e} m \
             (< {budget:.3} = 1% of {:.1} m), double-stance foot drift {drift:.2e} m (< 1e-4), \
             runtimes {stand_elapsed:.2}/{walk_elapsed:.2} s (< 30 s each)",
            walk.path_length
        ),
    );
}

#[test]
fn jacobian_check() {
    let anthro = Anthropometry::default();
    let mut rng_state = 0x1234_5678_9ABC_DEFu64;
    let mut next = move || {
        rng_state = rng_state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((rng_state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 2.0
    };
    let step = 1e-6;
    let mut max_err = 0.0f64;
    for _ in 0..20 {
        let mut v = [0.0; 12];
        for x in v.iter_mut() {
            *x = next() * 1.2;
        }
        v[3] = v[3].abs().min(3.0);
        v[9] = v[9].abs().min(3.0);
        let q = JointAngles::from_vector(&v);
        for side in [Side::Left, Side::Right] {
            let jac = fk_jacobian(&q, side, &anthro);
            for k in 0..12 {
                let mut plus = v;
                let mut minus = v;
                plus[k] += step;
                minus[k] -= step;
                let fd = (foot_fk(&JointAngles::from_vector(&plus), side, &anthro)
                    - foot_fk(&JointAngles::from_vector(&minus), side, &anthro))
                    / (2.0 * step);
                for r in 0..3 {
                    max_err = max_err.max((jac[(r, k)] - fd[r]).abs());
                }
            }
        }
    }
    check(
        "jacobian check",
        max_err < 1e-6,
        &format!(
            "max |analytic - central difference| = {max_err:.2e} over 20 configurations (< 1e-6)"
        ),
    );
}

#[test]
fn covariance_health() {
    let (_, stand_run) = run_trial(MotionKind::Stand, Some(3.0));
    let (_, walk_run) = run_trial(MotionKind::FlatWalk, None);
    let mut min_eig = f64::INFINITY;
    let mut max_asym = 0.0f64;
    for run in [&stand_run, &walk_run] {
        for st in &run.states {
            min_eig = min_eig.min(st.covariance_min_eigenvalue());
            max_asym = max_asym.max((st.covariance - st.covariance.transpose()).abs().max());
        }
    }
    check(
        "covariance health",
        min_eig >= -1e-9 && max_asym < 1e-12,
        &format!("min eigenvalue {min_eig:.2e} (>= -1e-9), max asymmetry {max_asym:.2e}"),
    );
}

#[test]
fn outlier_rule() {
    let series = |vals: &[f64]| LoadSeries {
        region: RegionId::LeftShoulder,
        source: LoadSource::Measured,
        samples: vals
            .iter()
            .enumerate()
            .map(|(i, v)| (i as f64 / 128.0, *v))
            .collect(),
    };

    // Nine zeros and a spike: mean 10, population sd 30, band [-35, 55].
    let mut vals = vec![0.0; 9];
    vals.push(100.0);
    let (kept, stats) = remove_outliers(&series(&vals), OutlierMode::Sigma).unwrap();
    let spike_removed = kept.samples.len() == 9 && kept.values().all(|v| v == 0.0);

    // Constant series: untouched.
    let (all_kept, _) = remove_outliers(&series(&[5.5; 16]), OutlierMode::Sigma).unwrap();
    let constant_ok = all_kept.samples.len() == 16;

    // Definitional: removed strictly outside the band, retained inside.
    let arb: Vec<f64> = (0..64)
        .map(|i| ((i * 2654435761usize) % 89) as f64 - 30.0)
        .collect();
    let n = arb.len() as f64;
    let mean = arb.iter().sum::<f64>() / n;
    let sd = (arb.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let (kept_arb, _) = remove_outliers(&series(&arb), OutlierMode::Sigma).unwrap();
    let kept_vals: Vec<f64> = kept_arb.values().collect();
    let definitional = arb.iter().all(|v| {
        let inside = *v >= mean - 1.5 * sd && *v <= mean + 1.5 * sd;
        inside == kept_vals.contains(v)
    });

    check(
        "outlier rule",
        spike_removed && stats.retained_fraction == 0.9 && constant_ok && definitional,
        &format!(
            "spike removed (band [-35, 55], retained {}/10), constant untouched, band membership exact",
            kept.samples.len()
        ),
    );
}

#[test]
fn rms_harness() {
    let mk = |vals: Vec<(f64, f64)>| LoadSeries {
        region: RegionId::LeftShoulder,
        source: LoadSource::Simulated,
        samples: vals,
    };
    let base: Vec<(f64, f64)> = (0..256)
        .map(|i| (i as f64 / 128.0, 40.0 + (i % 7) as f64))
        .collect();
    let identical = rms_error(&mk(base.clone()), &mk(base.clone())).unwrap();

    let offset: Vec<(f64, f64)> = base.iter().map(|(t, v)| (*t, v + 30.0)).collect();
    let offset_rms = rms_error(&mk(base.clone()), &mk(offset)).unwrap();

    let amp = 18.0;
    let n = 4 * 128;
    let sine: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = i as f64 / 128.0;
            (t, amp * (2.0 * std::f64::consts::PI * t).sin())
        })
        .collect();
    let zero: Vec<(f64, f64)> = (0..n).map(|i| (i as f64 / 128.0, 0.0)).collect();
    let sine_rms = rms_error(&mk(sine), &mk(zero)).unwrap();
    let sine_expect = amp / 2.0f64.sqrt();
    let sine_rel = (sine_rms / sine_expect - 1.0).abs();

    check(
        "RMS harness",
        identical == 0.0 && (offset_rms - 30.0).abs() <= 1e-9 && sine_rel < 0.01,
        &format!(
            "identical -> {identical}, constant offset -> {offset_rms:.12} N (30 ± 1e-9), \
             sinusoid vs zero within {:.3}% of A/sqrt(2)",
            sine_rel * 100.0
        ),
    );
}

#[test]
fn tangential_diagnostic() {
    let suit = default_suit();
    let (trial, run) = run_trial(MotionKind::Stand, Some(3.0));
    let loads = simulate_loads(&trial, &run, &suit);
    let mut worst: f64 = 0.0;
    for s in &loads.samples {
        let ratio = tangential_ratio(s.trunk()).expect("standing solve has normal load");
        worst = worst.max(ratio);
    }
    check(
        "tangential diagnostic",
        worst < 0.10,
        &format!("quiet-standing shoulder tangential/normal ratio {worst:.4} (< 0.10)"),
    );
}

#[test]
fn pipeline_determinism() {
    use suitsim_core::config::{PipelineConfig, TrialEntryConfig};

    let scratch = std::env::temp_dir().join(format!("suitsim_acceptance_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&scratch);
    std::fs::create_dir_all(&scratch).unwrap();

    // A short consistent walk keeps the run quick while exercising every
    // pipeline stage.
    let anthro = Anthropometry::default();
    let trial = generate_synthetic_trial(
        MotionKind::Stand,
        &SynthOptions {
            duration: Some(3.0),
            ..SynthOptions::default()
        },
        &anthro,
    )
    .unwrap();
    let rec_path = scratch.join("recording.csv");
    suitsim_core::io::write_recording(&rec_path, &trial.recording).unwrap();
    // Synthetic "measured" loads so the comparison path runs too.
    let meas_path = scratch.join("measured.csv");
    let mut meas = String::from("# time,left,right\n");
    for i in 0..trial.recording.len() {
        let t = i as f64 / 128.0;
        meas.push_str(&format!("{t},{},{}\n", 60.0 + (i % 5) as f64, 58.0));
    }
    std::fs::write(&meas_path, meas).unwrap();

    let run_once = |out: &str| -> Vec<(String, Vec<u8>)> {
        let mut cfg = PipelineConfig::default();
        cfg.base_dir = scratch.clone();
        cfg.output_dir = std::path::PathBuf::from(out);
        cfg.trials.push(TrialEntryConfig {
            name: "stand".into(),
            motion: MotionKind::Stand,
            recording: std::path::PathBuf::from("recording.csv"),
            measured: Some(std::path::PathBuf::from("measured.csv")),
        });
        let summary = suitsim_cli::run_pipeline(&cfg).expect("pipeline runs");
        assert!(summary.all_ok());
        let mut files: Vec<(String, Vec<u8>)> = Vec::new();
        let mut stack = vec![summary.output_dir.clone()];
        while let Some(dir) = stack.pop() {
            let mut entries: Vec<_> = std::fs::read_dir(&dir)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            entries.sort();
            for p in entries {
                if p.is_dir() {
                    stack.push(p);
                } else {
                    let rel = p
                        .strip_prefix(&summary.output_dir)
                        .unwrap()
                        .to_string_lossy()
                        .into_owned();
                    files.push((rel, std::fs::read(&p).unwrap()));
                }
            }
        }
        files.sort_by(|a, b| a.0.cmp(&b.0));
        files
    };

    let first = run_once("out_a");
    let second = run_once("out_b");
    let names: Vec<&str> = first.iter().map(|(n, _)| n.as_str()).collect();
    let identical = first.len() == second.len()
        && first
            .iter()
            .zip(&second)
            .all(|((na, ba), (nb, bb))| na == nb && ba == bb);
    let _ = std::fs::remove_dir_all(&scratch);
    check(
        "pipeline determinism",
        identical && !first.is_empty(),
        &format!(
            "two runs produced byte-identical outputs ({} files: {names:?})",
            first.len()
        ),
    );
}
