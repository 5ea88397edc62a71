//! Batch behavior: one bad trial must not take the rest down.

use std::path::PathBuf;

use suitsim_cli::run_pipeline;
use suitsim_cli::synth::{generate_synthetic_trial, SynthOptions};
use suitsim_core::analysis::MotionKind;
use suitsim_core::config::{PipelineConfig, TrialEntryConfig};
use suitsim_core::model::Anthropometry;

#[test]
fn corrupt_recording_fails_alone() {
    let dir = std::env::temp_dir().join(format!("suitsim_isolation_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();

    let anthro = Anthropometry::default();
    let trial = generate_synthetic_trial(
        MotionKind::Stand,
        &SynthOptions {
            duration: Some(2.0),
            ..SynthOptions::default()
        },
        &anthro,
    )
    .unwrap();
    suitsim_core::io::write_recording(&dir.join("good.csv"), &trial.recording).unwrap();
    std::fs::write(&dir.join("bad.csv"), "0.0,garbage,1\n0.1,more,2\n").unwrap();

    let mut cfg = PipelineConfig::default();
    cfg.base_dir = dir.clone();
    cfg.trials = vec![
        TrialEntryConfig {
            name: "good".into(),
            motion: MotionKind::Stand,
            recording: PathBuf::from("good.csv"),
            measured: None,
        },
        TrialEntryConfig {
            name: "bad".into(),
            motion: MotionKind::Stand,
            recording: PathBuf::from("bad.csv"),
            measured: None,
        },
    ];

    let summary = run_pipeline(&cfg).unwrap();
    assert!(!summary.all_ok());
    assert_eq!(summary.completed.len(), 1);
    assert_eq!(summary.completed[0].name, "good");
    assert_eq!(summary.failures.len(), 1);
    assert_eq!(summary.failures[0].0, "bad");
    assert!(
        summary.failures[0].1.contains("bad.csv"),
        "failure message should name the file: {}",
        summary.failures[0].1
    );
    // The good trial's artifacts and the report still exist.
    assert!(summary.output_dir.join("good/states.csv").exists());
    assert!(summary.output_dir.join("report.json").exists());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_recording_is_rejected_upfront_with_its_path() {
    let dir = std::env::temp_dir().join(format!("suitsim_missing_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let mut cfg = PipelineConfig::default();
    cfg.base_dir = dir.clone();
    cfg.trials = vec![TrialEntryConfig {
        name: "ghost".into(),
        motion: MotionKind::Stand,
        recording: PathBuf::from("ghost.csv"),
        measured: None,
    }];
    let err = match run_pipeline(&cfg) {
        Err(e) => e,
        Ok(_) => panic!("missing recording must fail validation"),
    };
    assert!(format!("{err:#}").contains("ghost.csv"));
    let _ = std::fs::remove_dir_all(&dir);
}
