use dial_core::aggregation::{baseline_disc_aggregate, disc_scores, disc_scores_sparse, FlatAggregate, Pooling, VoxelGrid};
use dial_core::scene::{disc_cover, DiscCandidate, DistanceMode};
use dial_core::Point3;
use proptest::prelude::*;

fn scored_points() -> impl Strategy<Value = Vec<(Point3, f64)>> {
    prop::collection::vec(([-20.0f64..20.0, -20.0f64..20.0, -2.0f64..2.0], 0.01f64..1.0), 1..80)
}

fn split(pts: &[(Point3, f64)]) -> (Vec<Point3>, Vec<f64>) {
    (pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1).collect())
}

proptest! {
    #[test]
    fn min_max_ignore_duplicates(pts in scored_points(), which in any::<prop::sample::Index>(), c in [-20.0f64..20.0, -20.0f64..20.0, 0.0f64..1.0]) {
        let (p, s) = split(&pts);
        let k = which.index(pts.len());
        let (mut p2, mut s2) = (p.clone(), s.clone());
        p2.push(p[k]);
        s2.push(s[k]);
        let g1 = VoxelGrid::build(&p, 0.5).unwrap();
        let g2 = VoxelGrid::build(&p2, 0.5).unwrap();
        prop_assert_eq!(g1.len(), g2.len());
        let disc = DiscCandidate { id: 0, center: c, radius: 10.0 };
        let cover = disc_cover(&disc, &g1.centers(), DistanceMode::Planar);
        for f in [Pooling::Min, Pooling::Max] {
            let w1 = g1.pool(&s, f).unwrap();
            let w2 = g2.pool(&s2, f).unwrap();
            prop_assert_eq!(&w1, &w2);
            prop_assert_eq!(disc_scores_sparse(&w1, &[cover.clone()]), disc_scores_sparse(&w2, &[cover.clone()]));
        }
        prop_assert!(baseline_disc_aggregate(&s2, FlatAggregate::Sum) > baseline_disc_aggregate(&s, FlatAggregate::Sum));
    }

    #[test]
    fn alpha_grows_with_radius(pts in scored_points(), c in [-20.0f64..20.0, -20.0f64..20.0, 0.0f64..1.0], r in 0.0f64..20.0, extra in 0.0f64..20.0) {
        let (p, s) = split(&pts);
        let g = VoxelGrid::build(&p, 0.5).unwrap();
        let w = g.pool(&s, Pooling::Min).unwrap();
        let centers = g.centers();
        let a = |radius| disc_scores_sparse(&w, &[disc_cover(&DiscCandidate { id: 0, center: c, radius }, &centers, DistanceMode::Planar)])[0].alpha;
        prop_assert!(a(r + extra) >= a(r));
    }

    #[test]
    fn disjoint_discs_add_up(weights in prop::collection::vec(0.0f64..1.0, 1..60), split_at in any::<prop::sample::Index>()) {
        let k = split_at.index(weights.len());
        let left: Vec<usize> = (0..k).collect();
        let right: Vec<usize> = (k..weights.len()).collect();
        let all: Vec<usize> = (0..weights.len()).collect();
        let s = disc_scores_sparse(&weights, &[left, right, all]);
        prop_assert!((s[0].alpha + s[1].alpha - s[2].alpha).abs() < 1e-12);
        let ones = disc_scores(&weights, &[0], &[vec![true; weights.len()]]).unwrap();
        prop_assert_eq!(ones[0].alpha, weights.iter().sum::<f64>());
    }

    #[test]
    fn pooling_ignores_point_order(pts in scored_points()) {
        let (p, s) = split(&pts);
        let (mut pr, mut sr) = (p.clone(), s.clone());
        pr.reverse();
        sr.reverse();
        for f in [Pooling::Min, Pooling::Max] {
            prop_assert_eq!(
                VoxelGrid::build(&p, 0.5).unwrap().pool(&s, f).unwrap(),
                VoxelGrid::build(&pr, 0.5).unwrap().pool(&sr, f).unwrap()
            );
        }
    }
}
