//! Two-stage aggregation of point scores: symmetric pooling inside globally
//! indexed voxels, then a plain sum of pooled values inside each disc.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::Point3;

/// Voxel edge length used unless configured otherwise, in meters.
pub const DEFAULT_VOXEL_LENGTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("voxel length must be positive and finite, got {0}")]
    BadVoxelLength(f64),
    #[error("point {0} has a non-finite coordinate")]
    NonFinitePoint(usize),
    #[error("expected {expected} scores, got {actual}")]
    ScoreCount { expected: usize, actual: usize },
    #[error("mask {candidate} has length {actual}, grid has {expected} voxels")]
    MaskLength { candidate: usize, expected: usize, actual: usize },
    #[error("got {masks} masks for {candidates} candidates")]
    MaskCount { masks: usize, candidates: usize },
}

/// Symmetric reduction applied to the scores inside one voxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pooling {
    #[default]
    Min,
    Max,
    Mean,
}

impl Pooling {
    pub fn name(self) -> &'static str {
        match self {
            Pooling::Min => "min",
            Pooling::Max => "max",
            Pooling::Mean => "mean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Pooling::Min, Pooling::Max, Pooling::Mean].into_iter().find(|p| p.name() == name)
    }

    /// Reduces a non-empty score list. Mean sums in the given order.
    pub fn reduce(self, scores: impl IntoIterator<Item = f64>) -> f64 {
        let mut it = scores.into_iter();
        let first = it.next().expect("pooling an empty voxel");
        match self {
            Pooling::Min => it.fold(first, f64::min),
            Pooling::Max => it.fold(first, f64::max),
            Pooling::Mean => {
                let (sum, n) = it.fold((first, 1usize), |(s, n), v| (s + v, n + 1));
                sum / n as f64
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Voxel {
    pub key: [i64; 3],
    pub center: Point3,
    /// Indices into the point list the grid was built from, ascending.
    pub members: Vec<usize>,
}

/// Sparse voxel grid anchored at the global origin. A point belongs to voxel
/// `⌊p / l⌋` per axis; voxels are stored in ascending key order.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    voxel_length: f64,
    voxels: Vec<Voxel>,
    point_count: usize,
}

impl VoxelGrid {
    pub fn build(points: &[Point3], voxel_length: f64) -> Result<Self, AggregationError> {
        if !(voxel_length > 0.0 && voxel_length.is_finite()) {
            return Err(AggregationError::BadVoxelLength(voxel_length));
        }
        let mut cells: BTreeMap<[i64; 3], Vec<usize>> = BTreeMap::new();
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(AggregationError::NonFinitePoint(i));
            }
            cells.entry(voxel_key(*p, voxel_length)).or_default().push(i);
        }
        let voxels = cells
            .into_iter()
            .map(|(key, members)| Voxel { key, center: voxel_center(key, voxel_length), members })
            .collect();
        Ok(VoxelGrid { voxel_length, voxels, point_count: points.len() })
    }

    pub fn voxel_length(&self) -> f64 {
        self.voxel_length
    }

    pub fn voxels(&self) -> &[Voxel] {
        &self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    /// Number of points the grid was built from.
    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn centers(&self) -> Vec<Point3> {
        self.voxels.iter().map(|v| v.center).collect()
    }

    /// Voxel index of every input point.
    pub fn point_voxels(&self) -> Vec<usize> {
        let mut out = alloc::vec![0; self.point_count];
        for (j, v) in self.voxels.iter().enumerate() {
            for &i in &v.members {
                out[i] = j;
            }
        }
        out
    }

    /// Pooled value `I_j` of every voxel, in voxel order.
    pub fn pool(&self, scores: &[f64], pooling: Pooling) -> Result<Vec<f64>, AggregationError> {
        if scores.len() != self.point_count {
            return Err(AggregationError::ScoreCount { expected: self.point_count, actual: scores.len() });
        }
        Ok(self.voxels.iter().map(|v| pooling.reduce(v.members.iter().map(|&i| scores[i]))).collect())
    }
}

pub fn voxel_key(p: Point3, voxel_length: f64) -> [i64; 3] {
    p.map(|c| math::floor(c / voxel_length) as i64)
}

pub fn voxel_center(key: [i64; 3], voxel_length: f64) -> Point3 {
    key.map(|k| (k as f64 + 0.5) * voxel_length)
}

/// Builds the grid over scored points and pools in one go.
pub fn build_grid(
    points: &[(Point3, f64)],
    voxel_length: f64,
    pooling: Pooling,
) -> Result<(VoxelGrid, Vec<f64>), AggregationError> {
    let positions: Vec<Point3> = points.iter().map(|p| p.0).collect();
    let scores: Vec<f64> = points.iter().map(|p| p.1).collect();
    let grid = VoxelGrid::build(&positions, voxel_length)?;
    let pooled = grid.pool(&scores, pooling)?;
    Ok((grid, pooled))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscScore {
    pub candidate_id: usize,
    pub alpha: f64,
}

/// `α_i = Σ_j z_{j,i} I_j` for every candidate, given dense binary masks.
/// Overlap between discs is not discounted here.
pub fn disc_scores(weights: &[f64], candidate_ids: &[usize], masks: &[Vec<bool>]) -> Result<Vec<DiscScore>, AggregationError> {
    if masks.len() != candidate_ids.len() {
        return Err(AggregationError::MaskCount { masks: masks.len(), candidates: candidate_ids.len() });
    }
    candidate_ids
        .iter()
        .zip(masks)
        .map(|(&candidate_id, mask)| {
            if mask.len() != weights.len() {
                return Err(AggregationError::MaskLength {
                    candidate: candidate_id,
                    expected: weights.len(),
                    actual: mask.len(),
                });
            }
            let alpha = weights.iter().zip(mask).filter(|(_, &z)| z).map(|(w, _)| w).sum();
            Ok(DiscScore { candidate_id, alpha })
        })
        .collect()
}

/// Same as [`disc_scores`] over sparse masks (ascending voxel indices).
pub fn disc_scores_sparse(weights: &[f64], covers: &[Vec<usize>]) -> Vec<DiscScore> {
    covers
        .iter()
        .enumerate()
        .map(|(candidate_id, cover)| DiscScore { candidate_id, alpha: cover.iter().map(|&j| weights[j]).sum() })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatAggregate {
    Mean,
    Sum,
}

/// Voxel-free baseline over the raw scores of the points inside a disc. The
/// mean of an empty disc is 0.
pub fn baseline_disc_aggregate(scores: &[f64], mode: FlatAggregate) -> f64 {
    let sum: f64 = scores.iter().sum();
    match mode {
        FlatAggregate::Sum => sum,
        FlatAggregate::Mean if scores.is_empty() => 0.0,
        FlatAggregate::Mean => sum / scores.len() as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn shared_voxel_and_floor_indexing() {
        let grid = VoxelGrid::build(&[[0.1, 0.1, 0.1], [0.4, 0.4, 0.4], [0.6, 0.0, 0.0]], 0.5).unwrap();
        assert_eq!(grid.len(), 2);
        assert_eq!(grid.voxels()[0].key, [0, 0, 0]);
        assert_eq!(grid.voxels()[0].center, [0.25, 0.25, 0.25]);
        assert_eq!(grid.voxels()[0].members, vec![0, 1]);
        assert_eq!(grid.voxels()[1].key, [1, 0, 0]);
        assert_eq!(grid.point_voxels(), vec![0, 0, 1]);
    }

    #[test]
    fn negative_coordinates_floor_down() {
        let grid = VoxelGrid::build(&[[-0.1, -0.6, 0.0]], 0.5).unwrap();
        assert_eq!(grid.voxels()[0].key, [-1, -2, 0]);
        assert_eq!(grid.voxels()[0].center, [-0.25, -0.75, 0.25]);
    }

    #[test]
    fn build_errors() {
        assert_eq!(VoxelGrid::build(&[], 0.0), Err(AggregationError::BadVoxelLength(0.0)));
        assert_eq!(
            VoxelGrid::build(&[[0.0; 3], [f64::INFINITY, 0.0, 0.0]], 0.5),
            Err(AggregationError::NonFinitePoint(1))
        );
        let grid = VoxelGrid::build(&[[0.0; 3]], 0.5).unwrap();
        assert_eq!(grid.pool(&[], Pooling::Min), Err(AggregationError::ScoreCount { expected: 1, actual: 0 }));
    }

    #[test]
    fn pooling_examples() {
        assert_eq!(Pooling::Min.reduce([0.1, 0.5]), 0.1);
        assert_eq!(Pooling::Max.reduce([0.1, 0.5]), 0.5);
        assert!((Pooling::Mean.reduce([0.1, 0.5]) - 0.3).abs() < 1e-15);
        for f in [Pooling::Min, Pooling::Max, Pooling::Mean] {
            assert_eq!(f.reduce([0.42]), 0.42);
        }
        assert_eq!(Pooling::Min.reduce([0.1, 0.5, 0.5]), 0.1);
        assert_eq!(Pooling::Max.reduce([0.1, 0.5, 0.5]), 0.5);
        assert!((Pooling::Mean.reduce([0.1, 0.5, 0.5]) - 0.366_666_666_666_666_7).abs() < 1e-15);
    }

    #[test]
    fn disc_score_examples() {
        let w = [1.0, 2.0, 5.0];
        let s = disc_scores(&w, &[0, 1, 2], &[vec![true, true, false], vec![false; 3], vec![false, true, true]]).unwrap();
        assert_eq!(s.iter().map(|d| d.alpha).collect::<Vec<_>>(), vec![3.0, 0.0, 7.0]);
        assert_eq!(disc_scores_sparse(&w, &[vec![0, 1], vec![], vec![1, 2]]), s);
        assert_eq!(
            disc_scores(&w, &[4], &[vec![true]]),
            Err(AggregationError::MaskLength { candidate: 4, expected: 3, actual: 1 })
        );
    }

    #[test]
    fn flat_baselines() {
        assert_eq!(baseline_disc_aggregate(&[1.0, 2.0, 3.0], FlatAggregate::Mean), 2.0);
        assert_eq!(baseline_disc_aggregate(&[1.0, 2.0, 3.0], FlatAggregate::Sum), 6.0);
        assert_eq!(baseline_disc_aggregate(&[], FlatAggregate::Mean), 0.0);
    }
}
