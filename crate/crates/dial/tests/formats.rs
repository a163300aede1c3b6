use dial::instance::{parse_instance, write_instance};
use dial::poses::{parse_poses, write_poses};
use dial::tensor::{ProbabilityTensor, TensorError};
use dial::text::{parse_ids, parse_points, parse_scores, write_points, write_scores};
use dial_core::scene::Pose;
use dial_core::selection::{IntersectionPolicy, SelectionProblem};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64]
}

proptest! {
    #[test]
    fn points_and_scores_round_trip(pts in prop::collection::vec([finite(), finite(), finite()], 0..40),
                                    sc in prop::collection::vec(finite(), 0..40)) {
        prop_assert_eq!(parse_points(&write_points(&pts)).unwrap(), pts);
        let back = parse_scores(&write_scores(&sc)).unwrap();
        prop_assert!(back.iter().zip(&sc).all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0)));
        prop_assert_eq!(back.len(), sc.len());
    }

    #[test]
    fn poses_round_trip(raw in prop::collection::vec((-4.0..4.0f64, finite(), finite(), finite()), 0..20)) {
        let poses: Vec<Pose> = raw.iter().map(|&(yaw, x, y, z)| Pose::from_yaw(yaw, [x, y, z])).collect();
        prop_assert_eq!(parse_poses(&write_poses(&poses)).unwrap(), poses);
    }

    #[test]
    fn instance_round_trip(weights in prop::collection::vec(0.0..1.0f64, 1..30),
                           raw in prop::collection::vec(prop::collection::vec(any::<bool>(), 30), 1..8),
                           budget in 1usize..4,
                           prohibit in any::<bool>()) {
        let masks: Vec<Vec<bool>> = raw.iter().map(|m| m[..weights.len()].to_vec()).collect();
        let budget = budget.min(masks.len());
        let policy = if prohibit { IntersectionPolicy::Prohibit } else { IntersectionPolicy::Allow };
        let p = SelectionProblem::from_masks(weights, &masks, budget, vec![], policy).unwrap();
        let text = write_instance(&p);
        prop_assert_eq!(parse_instance(&text).unwrap(), p);
    }

    #[test]
    fn truncated_tensor_is_rejected(cut in 0usize..64) {
        let t = ProbabilityTensor { points: 2, passes: 1, classes: 2, data: vec![0.5, 0.5, 1.0, 0.0] };
        let bytes = t.encode();
        let cut = cut.min(bytes.len() - 1);
        prop_assert!(ProbabilityTensor::decode(&bytes[..cut]).is_err());
    }
}

#[test]
fn ids_accept_commas_and_spaces() {
    assert_eq!(parse_ids("3, 1 4\n1").unwrap(), vec![3, 1, 4, 1]);
    assert_eq!(parse_ids("").unwrap(), Vec::<usize>::new());
    assert!(parse_ids("1,x").is_err());
}

#[test]
fn tensor_header_checks() {
    let t = ProbabilityTensor { points: 1, passes: 1, classes: 2, data: vec![0.25, 0.75] };
    let mut bytes = t.encode();
    assert_eq!(&bytes[..8], b"DIALPST\0");
    bytes[0] = b'X';
    assert!(matches!(ProbabilityTensor::decode(&bytes), Err(TensorError::Magic)));
    let bad = ProbabilityTensor { points: 1, passes: 1, classes: 2, data: vec![0.25, 0.25] };
    assert!(matches!(bad.to_stack(), Err(TensorError::Simplex { .. })));
}

#[test]
fn instance_rejects_trailing_content() {
    let p = SelectionProblem::new(vec![1.0], vec![vec![0]], 1, vec![], IntersectionPolicy::Allow).unwrap();
    let text = format!("{}extra\n", write_instance(&p));
    assert!(parse_instance(&text).is_err());
}
