use dial_core::ssl::{
    consistency_loss, cross_entropy, ema_update, kl_consistency, perturb, supervised_loss, total_loss, PerturbParams,
    PredictionPair,
};
use proptest::prelude::*;

fn simplex(classes: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, classes).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..10).prop_flat_map(|c| (simplex(c), simplex(c)))
}

proptest! {
    #[test]
    fn kl_is_nonnegative((s, t) in pair()) {
        let kl = kl_consistency(&PredictionPair::new(s.clone(), t.clone()).unwrap());
        prop_assert!(kl >= 0.0);
        prop_assert!(kl_consistency(&PredictionPair::new(s.clone(), s.clone()).unwrap()) <= 1e-9);
        let gap = s.iter().zip(&t).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if gap > 1e-3 {
            prop_assert!(kl > 0.0);
        }
    }

    #[test]
    fn ema_contracts(t in prop::collection::vec(-10.0f64..10.0, 1..20), beta in 0.0f64..0.999) {
        let s: Vec<f64> = t.iter().map(|v| v * 0.5 + 1.0).collect();
        let next = ema_update(&t, &s, beta).unwrap();
        for i in 0..t.len() {
            let before = (t[i] - s[i]).abs();
            prop_assert!(((next[i] - s[i]).abs() - beta * before).abs() <= 1e-12 * (1.0 + before));
        }
    }

    #[test]
    fn cross_entropy_between_extremes(p in (2usize..10).prop_flat_map(simplex), label in 0usize..10) {
        let label = label % p.len();
        let ce = cross_entropy(&p, label).unwrap();
        let max = p.iter().cloned().fold(f64::MIN, f64::max);
        let min = p.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(ce >= -max.ln() - 1e-12 && ce <= -min.ln() + 1e-12);
    }

    #[test]
    fn total_is_sum_of_parts(pairs in prop::collection::vec(pair(), 1..10), mask in any::<u16>()) {
        let c = pairs[0].0.len();
        let pairs: Vec<PredictionPair> = pairs
            .into_iter()
            .filter(|(s, _)| s.len() == c)
            .map(|(s, t)| PredictionPair::new(s, t).unwrap())
            .collect();
        let labels: Vec<Option<usize>> =
            (0..pairs.len()).map(|i| if i == 0 || mask >> i & 1 == 1 { Some(i % c) } else { None }).collect();
        let students: Vec<Vec<f64>> = pairs.iter().map(|p| p.student().to_vec()).collect();
        let ls = supervised_loss(&students, &labels).unwrap();
        let lu = consistency_loss(&pairs).unwrap();
        prop_assert_eq!(total_loss(&pairs, &labels).unwrap(), ls + lu);
    }

    #[test]
    fn rotation_is_rigid(points in prop::collection::vec([-50.0f64..50.0, -50.0f64..50.0, -3.0f64..3.0], 2..20), seed in any::<u64>()) {
        let p = PerturbParams { max_rotation: std::f64::consts::PI, ..PerturbParams::NONE };
        let q = perturb(&points, seed, &p).unwrap();
        let d = |a: [f64; 3], b: [f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                prop_assert!((d(points[i], points[j]) - d(q[i], q[j])).abs() < 1e-9);
            }
        }
        prop_assert_eq!(perturb(&points, seed, &PerturbParams::NONE).unwrap(), points.clone());
    }
}
