mod common;

use std::collections::HashMap;

use common::*;
use humility_core::rct::CueArm;
use humility_core::IHLabel;
use humility_experiment::ExperimentConfig;

#[test]
fn first_six_enrollments_golden_sequence() {
    let svc = service(ExperimentConfig { seed: 2024, ..Default::default() });
    let arms: Vec<String> = (0..6)
        .map(|i| {
            let a = svc.enroll(&format!("p{i}")).unwrap().assignment;
            format!("{}/{}", a.cue_arm, a.env_arm)
        })
        .collect();
    assert_eq!(arms, GOLDEN_ARMS);
}

const GOLDEN_ARMS: [&str; 6] =
    ["treated/IH", "treated/IH", "control/IA", "treated/IA", "treated/Neutral", "treated/Neutral"];

#[test]
fn six_thousand_enrollments_fill_cells_within_three_sigma() {
    let svc = service(ExperimentConfig { seed: 7, ..Default::default() });
    let mut counts: HashMap<(CueArm, IHLabel), usize> = HashMap::new();
    for i in 0..6000 {
        let a = svc.enroll(&format!("p{i}")).unwrap().assignment;
        *counts.entry((a.cue_arm, a.env_arm)).or_default() += 1;
    }
    let sigma = (6000.0_f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
    assert_eq!(counts.len(), 6);
    for (cell, n) in &counts {
        assert!((*n as f64 - 1000.0).abs() <= 3.0 * sigma, "{cell:?}: {n}");
    }
}

#[test]
fn reenrollment_returns_the_same_assignment() {
    let svc = service(ExperimentConfig::default());
    let a = svc.enroll("same").unwrap();
    let b = svc.enroll("same").unwrap();
    assert!(a.created && !b.created);
    assert_eq!(a.assignment, b.assignment);
    assert_eq!(svc.records().len(), 1);
    assert!(svc.enroll("  ").is_err());
}

#[test]
fn persona_draws_are_uniform() {
    let svc = service(ExperimentConfig { seed: 5, ..Default::default() });
    let engine = svc.engine();
    let mut counts = [0usize; 10];
    for i in 0..1000 {
        counts[engine.persona_draw(i, 0)] += 1;
    }
    let sigma = (1000.0_f64 * 0.1 * 0.9).sqrt();
    for (p, n) in counts.iter().enumerate() {
        assert!((*n as f64 - 100.0).abs() <= 3.0 * sigma, "persona {p}: {n}");
    }
}

#[test]
fn blocked_randomization_is_exactly_balanced() {
    let svc = service(ExperimentConfig { blocked_randomization: true, seed: 1, ..Default::default() });
    let mut counts: HashMap<(CueArm, IHLabel), usize> = HashMap::new();
    for i in 0..600 {
        let a = svc.enroll(&format!("p{i}")).unwrap().assignment;
        *counts.entry((a.cue_arm, a.env_arm)).or_default() += 1;
    }
    assert!(counts.values().all(|&n| n == 100));
}
