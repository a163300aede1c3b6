use dial_core::scene::{classify_frames, DistanceMode};
use dial_core::sim::{generate_scene, run_loop, LoopConfig, SceneParams, Strategy};
use dial_core::scene::candidate_centers;

fn small() -> SceneParams {
    SceneParams { frame_count: 200, points_per_frame: 60, rare_region_count: 6, ..SceneParams::default() }
}

#[test]
fn labeled_fraction_never_drops() {
    let scene = generate_scene(4, &small()).unwrap();
    let cfg = LoopConfig { steps: 4, per_step: 3, ..LoopConfig::default() };
    for s in Strategy::ALL {
        let h = run_loop(&scene, s, &cfg).unwrap();
        for w in h.states.windows(2) {
            assert!(w[1].metrics.labeled_fraction >= w[0].metrics.labeled_fraction, "{}", s.name());
            assert!(w[1].hours >= w[0].hours);
            assert!(w[1].familiarity.iter().zip(&w[0].familiarity).all(|(a, b)| a >= b));
            assert_eq!(w[1].labeled.len(), w[0].labeled.len() + 3);
        }
    }
}

#[test]
fn oracle_matches_frame_classification() {
    let scene = generate_scene(9, &small()).unwrap();
    let cfg = LoopConfig { steps: 3, per_step: 2, ..LoopConfig::default() };
    let h = run_loop(&scene, Strategy::DialExact, &cfg).unwrap();
    let discs = candidate_centers(&scene.trajectory, cfg.stride, cfg.radius).unwrap();
    for state in &h.states {
        let labeled: Vec<_> = state.labeled.iter().map(|&i| discs[i]).collect();
        assert_eq!(state.frames, classify_frames(&scene.frames, &labeled, DistanceMode::Planar));
    }
}

#[test]
fn runs_are_reproducible() {
    let scene = generate_scene(2, &small()).unwrap();
    assert_eq!(scene, generate_scene(2, &small()).unwrap());
    let cfg = LoopConfig { steps: 3, per_step: 2, model_seed: 5, selection_seed: 6, ..LoopConfig::default() };
    for s in Strategy::ALL {
        assert_eq!(run_loop(&scene, s, &cfg).unwrap(), run_loop(&scene, s, &cfg).unwrap());
    }
}

#[test]
fn unlabeled_uncertainty_trends_down() {
    // Mean over 20 seeds must fall at every step.
    let steps = 4;
    let mut sums = vec![0.0; steps + 1];
    for seed in 0..20 {
        let scene = generate_scene(seed, &small()).unwrap();
        let cfg = LoopConfig { steps, per_step: 3, model_seed: seed, ..LoopConfig::default() };
        let h = run_loop(&scene, Strategy::DialExact, &cfg).unwrap();
        for (t, s) in h.states.iter().enumerate() {
            sums[t] += s.metrics.unlabeled_uncertainty;
        }
    }
    for w in sums.windows(2) {
        assert!(w[1] <= w[0], "{sums:?}");
    }
}
