//! Frames, poses, disc geometry and per-frame label coverage.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::Point3;

/// Orthonormality tolerance enforced by [`Pose::new`].
pub const POSE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("invalid pose: rotation deviates from orthonormal by {deviation:e} (tolerance {tolerance:e})")]
    NonOrthonormal { deviation: f64, tolerance: f64 },
    #[error("invalid pose: rotation determinant {determinant} is not +1")]
    Reflection { determinant: f64 },
    #[error("invalid pose: non-finite entry")]
    NonFinite,
    #[error("duplicate frame id {0}")]
    DuplicateFrame(u32),
    #[error("candidate stride must be at least 1")]
    ZeroStride,
    #[error("disc radius must be positive and finite, got {0}")]
    BadRadius(f64),
}

/// Rigid transform from sensor to global coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: [[f64; 3]; 3],
    translation: Point3,
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        translation: [0.0; 3],
    };

    /// Builds a pose, rejecting rotations that are not proper orthonormal
    /// within [`POSE_TOLERANCE`].
    pub fn new(rotation: [[f64; 3]; 3], translation: Point3) -> Result<Self, SceneError> {
        Self::with_tolerance(rotation, translation, POSE_TOLERANCE)
    }

    /// Like [`Pose::new`] with a caller-chosen tolerance, for text inputs
    /// that carry only a handful of significant digits.
    pub fn with_tolerance(
        rotation: [[f64; 3]; 3],
        translation: Point3,
        tolerance: f64,
    ) -> Result<Self, SceneError> {
        if rotation.iter().flatten().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(SceneError::NonFinite);
        }
        let deviation = orthonormal_deviation(&rotation);
        if deviation > tolerance {
            return Err(SceneError::NonOrthonormal { deviation, tolerance });
        }
        let determinant = det3(&rotation);
        if (determinant - 1.0).abs() > tolerance {
            return Err(SceneError::Reflection { determinant });
        }
        Ok(Pose { rotation, translation })
    }

    /// Rotation by `yaw` radians about +z followed by `translation`.
    pub fn from_yaw(yaw: f64, translation: Point3) -> Self {
        let (s, c) = math::sin_cos(yaw);
        Pose {
            rotation: [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]],
            translation,
        }
    }

    pub fn rotation(&self) -> &[[f64; 3]; 3] {
        &self.rotation
    }

    pub fn translation(&self) -> Point3 {
        self.translation
    }

    /// `rotation · p + translation`.
    pub fn apply(&self, p: Point3) -> Point3 {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    /// Maps a global point back into this pose's sensor frame.
    pub fn apply_inverse(&self, p: Point3) -> Point3 {
        let r = &self.rotation;
        let d = [
            p[0] - self.translation[0],
            p[1] - self.translation[1],
            p[2] - self.translation[2],
        ];
        [
            r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
            r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
            r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
        ]
    }

    /// Heading of the sensor x axis on the global x–y plane.
    pub fn yaw(&self) -> f64 {
        math::atan2(self.rotation[1][0], self.rotation[0][0])
    }
}

/// Largest absolute entry of `RᵀR − I`.
fn orthonormal_deviation(r: &[[f64; 3]; 3]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn det3(r: &[[f64; 3]; 3]) -> f64 {
    r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
        + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
}

/// One LiDAR scan: points in sensor coordinates plus the pose that places
/// them in the global frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub id: u32,
    pub points: Vec<Point3>,
    pub pose: Pose,
}

/// Transforms every point of `frame` into global coordinates, in order.
pub fn register_frame(frame: &Frame) -> Vec<Point3> {
    frame.points.iter().map(|&p| frame.pose.apply(p)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalPoint {
    pub position: Point3,
    pub frame_id: u32,
    pub index: u32,
}

/// The concatenated, registered point cloud of a whole sequence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GlobalCloud {
    points: Vec<GlobalPoint>,
}

impl GlobalCloud {
    /// Registers all frames, keeping frame order and point order.
    pub fn from_frames(frames: &[Frame]) -> Result<Self, SceneError> {
        let mut seen = BTreeSet::new();
        let total = frames.iter().map(|f| f.points.len()).sum();
        let mut points = Vec::with_capacity(total);
        for frame in frames {
            if !seen.insert(frame.id) {
                return Err(SceneError::DuplicateFrame(frame.id));
            }
            points.extend(register_frame(frame).into_iter().enumerate().map(|(index, position)| {
                GlobalPoint { position, frame_id: frame.id, index: index as u32 }
            }));
        }
        Ok(GlobalCloud { points })
    }

    pub fn points(&self) -> &[GlobalPoint] {
        &self.points
    }

    pub fn positions(&self) -> Vec<Point3> {
        self.points.iter().map(|p| p.position).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How distance to a disc center is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMode {
    /// Global x–y plane; height is ignored.
    #[default]
    Planar,
    /// Full 3D Euclidean distance.
    Spatial,
}

impl DistanceMode {
    pub fn distance(self, a: Point3, b: Point3) -> f64 {
        let dx = a[0] - b[0];
        let dy = a[1] - b[1];
        match self {
            DistanceMode::Planar => math::sqrt(dx * dx + dy * dy),
            DistanceMode::Spatial => {
                let dz = a[2] - b[2];
                math::sqrt(dx * dx + dy * dy + dz * dz)
            }
        }
    }
}

/// A candidate label-query region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscCandidate {
    pub id: usize,
    pub center: Point3,
    pub radius: f64,
}

impl DiscCandidate {
    /// Boundary inclusive: a point at exactly `radius` is inside.
    pub fn contains(&self, p: Point3, mode: DistanceMode) -> bool {
        mode.distance(p, self.center) - self.radius <= 0.0
    }
}

/// Binary membership of each voxel center in `candidate`.
pub fn disc_mask(candidate: &DiscCandidate, voxel_centers: &[Point3], mode: DistanceMode) -> Vec<bool> {
    voxel_centers.iter().map(|&v| candidate.contains(v, mode)).collect()
}

/// Indices of the voxel centers inside `candidate`, ascending.
pub fn disc_cover(candidate: &DiscCandidate, voxel_centers: &[Point3], mode: DistanceMode) -> Vec<usize> {
    voxel_centers
        .iter()
        .enumerate()
        .filter(|(_, &v)| candidate.contains(v, mode))
        .map(|(j, _)| j)
        .collect()
}

/// One candidate per `stride`-th trajectory pose, centered on the pose
/// translation.
pub fn candidate_centers(trajectory: &[Pose], stride: usize, radius: f64) -> Result<Vec<DiscCandidate>, SceneError> {
    if stride == 0 {
        return Err(SceneError::ZeroStride);
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(SceneError::BadRadius(radius));
    }
    Ok(trajectory
        .iter()
        .step_by(stride)
        .enumerate()
        .map(|(id, pose)| DiscCandidate { id, center: pose.translation(), radius })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelStatus {
    FullyLabeled,
    WeaklyLabeled,
    Unlabeled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLabelStatus {
    pub frame_id: u32,
    pub status: LabelStatus,
    pub labeled_point_fraction: f64,
}

impl FrameLabelStatus {
    fn from_counts(frame_id: u32, labeled: usize, total: usize) -> Self {
        let (status, labeled_point_fraction) = if total == 0 || labeled == 0 {
            (LabelStatus::Unlabeled, 0.0)
        } else if labeled == total {
            (LabelStatus::FullyLabeled, 1.0)
        } else {
            (LabelStatus::WeaklyLabeled, labeled as f64 / total as f64)
        };
        FrameLabelStatus { frame_id, status, labeled_point_fraction }
    }
}

/// Classifies every frame by how many of its registered points fall inside
/// the union of `labeled_discs`. Empty frames are unlabeled.
pub fn classify_frames(frames: &[Frame], labeled_discs: &[DiscCandidate], mode: DistanceMode) -> Vec<FrameLabelStatus> {
    frames
        .iter()
        .map(|frame| {
            let labeled = frame
                .points
                .iter()
                .filter(|&&p| {
                    let g = frame.pose.apply(p);
                    labeled_discs.iter().any(|d| d.contains(g, mode))
                })
                .count();
            FrameLabelStatus::from_counts(frame.id, labeled, frame.points.len())
        })
        .collect()
}

/// Same classification from precomputed per-point labeled flags, laid out in
/// [`GlobalCloud`] order.
pub fn classify_from_flags(cloud: &GlobalCloud, labeled: &[bool], frame_ids: &[u32]) -> Vec<FrameLabelStatus> {
    let mut out = Vec::with_capacity(frame_ids.len());
    let pts = cloud.points();
    let mut k = 0;
    for &id in frame_ids {
        let (mut total, mut hit) = (0usize, 0usize);
        while k < pts.len() && pts[k].frame_id == id {
            total += 1;
            hit += labeled[k] as usize;
            k += 1;
        }
        out.push(FrameLabelStatus::from_counts(id, hit, total));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::FRAC_PI_2;

    fn frame(points: Vec<Point3>, pose: Pose) -> Frame {
        Frame { id: 0, points, pose }
    }

    #[test]
    fn register_identity_and_translation() {
        let f = frame(vec![[1.0, 2.0, 3.0]], Pose::IDENTITY);
        assert_eq!(register_frame(&f), vec![[1.0, 2.0, 3.0]]);
        let f = frame(vec![[1.0, 2.0, 3.0]], Pose::new(*Pose::IDENTITY.rotation(), [10.0, 0.0, 0.0]).unwrap());
        assert_eq!(register_frame(&f), vec![[11.0, 2.0, 3.0]]);
    }

    #[test]
    fn register_yaw_quarter_turn() {
        let rot = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        let f = frame(vec![[1.0, 0.0, 0.0]], Pose::new(rot, [0.0; 3]).unwrap());
        assert_eq!(register_frame(&f), vec![[0.0, 1.0, 0.0]]);

        let g = Pose::from_yaw(FRAC_PI_2, [0.0; 3]).apply([1.0, 0.0, 0.0]);
        assert!(g[0].abs() < 1e-15 && (g[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rotations() {
        let scaled = [[1.1, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(Pose::new(scaled, [0.0; 3]), Err(SceneError::NonOrthonormal { .. })));
        let mirror = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(Pose::new(mirror, [0.0; 3]), Err(SceneError::Reflection { .. })));
        let nan = [[f64::NAN, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(Pose::new(nan, [0.0; 3]), Err(SceneError::NonFinite));
    }

    #[test]
    fn inverse_round_trips() {
        let pose = Pose::from_yaw(0.7, [3.0, -2.0, 1.5]);
        let p = [4.0, 5.0, -6.0];
        let back = pose.apply_inverse(pose.apply(p));
        for k in 0..3 {
            assert!((back[k] - p[k]).abs() < 1e-12);
        }
        assert!((pose.yaw() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn disc_mask_boundary_is_inside() {
        let disc = DiscCandidate { id: 0, center: [0.0; 3], radius: 50.0 };
        let centers = [[30.0, 40.0, 0.0], [30.0, 40.1, 0.0], [0.0, 0.0, 0.0]];
        assert_eq!(disc_mask(&disc, &centers, DistanceMode::Planar), vec![true, false, true]);
        assert_eq!(disc_cover(&disc, &centers, DistanceMode::Planar), vec![0, 2]);
    }

    #[test]
    fn planar_ignores_height() {
        let disc = DiscCandidate { id: 0, center: [0.0; 3], radius: 1.0 };
        let high = [[0.5, 0.0, 100.0]];
        assert_eq!(disc_mask(&disc, &high, DistanceMode::Planar), vec![true]);
        assert_eq!(disc_mask(&disc, &high, DistanceMode::Spatial), vec![false]);
    }

    #[test]
    fn classify_examples() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [10.0, 0.0, 0.0]];
        let f = frame(pts.clone(), Pose::IDENTITY);
        let disc = DiscCandidate { id: 0, center: [0.0; 3], radius: 2.0 };

        let s = classify_frames(core::slice::from_ref(&f), &[disc], DistanceMode::Planar);
        assert_eq!(s[0].status, LabelStatus::WeaklyLabeled);
        assert_eq!(s[0].labeled_point_fraction, 0.75);

        let s = classify_frames(core::slice::from_ref(&f), &[], DistanceMode::Planar);
        assert_eq!((s[0].status, s[0].labeled_point_fraction), (LabelStatus::Unlabeled, 0.0));

        let big = DiscCandidate { radius: 20.0, ..disc };
        let s = classify_frames(core::slice::from_ref(&f), &[big], DistanceMode::Planar);
        assert_eq!((s[0].status, s[0].labeled_point_fraction), (LabelStatus::FullyLabeled, 1.0));

        let empty = frame(vec![], Pose::IDENTITY);
        let s = classify_frames(&[empty], &[big], DistanceMode::Planar);
        assert_eq!((s[0].status, s[0].labeled_point_fraction), (LabelStatus::Unlabeled, 0.0));
    }

    #[test]
    fn candidates_follow_stride() {
        let traj: Vec<Pose> = (0..10).map(|i| Pose::from_yaw(0.0, [i as f64, 0.0, 0.0])).collect();
        assert_eq!(candidate_centers(&traj, 1, 50.0).unwrap().len(), 10);
        let c = candidate_centers(&traj, 3, 50.0).unwrap();
        let xs: Vec<f64> = c.iter().map(|d| d.center[0]).collect();
        assert_eq!(xs, vec![0.0, 3.0, 6.0, 9.0]);
        assert!(c.iter().enumerate().all(|(i, d)| d.id == i));
        assert!(candidate_centers(&[], 1, 50.0).unwrap().is_empty());
        assert_eq!(candidate_centers(&traj, 0, 50.0), Err(SceneError::ZeroStride));
        assert_eq!(candidate_centers(&traj, 1, 0.0), Err(SceneError::BadRadius(0.0)));
    }

    #[test]
    fn straight_line_spacing_at_urban_speed() {
        // 50 km/h at 10 Hz.
        let step = 50.0 / 3.6 / 10.0;
        let traj: Vec<Pose> = (0..5).map(|i| Pose::from_yaw(0.0, [i as f64 * step, 0.0, 0.0])).collect();
        let c = candidate_centers(&traj, 1, 50.0).unwrap();
        let gap = DistanceMode::Planar.distance(c[1].center, c[0].center);
        assert!((gap - 1.388_888_888_888_889).abs() < 1e-12);
    }

    #[test]
    fn global_cloud_traces_points() {
        let a = Frame { id: 3, points: vec![[0.0; 3], [1.0, 0.0, 0.0]], pose: Pose::IDENTITY };
        let b = Frame { id: 7, points: vec![[2.0, 0.0, 0.0]], pose: Pose::from_yaw(0.0, [5.0, 0.0, 0.0]) };
        let cloud = GlobalCloud::from_frames(&[a.clone(), b]).unwrap();
        assert_eq!(cloud.len(), 3);
        assert_eq!(cloud.points()[2], GlobalPoint { position: [7.0, 0.0, 0.0], frame_id: 7, index: 0 });
        assert_eq!(GlobalCloud::from_frames(&[a.clone(), a]), Err(SceneError::DuplicateFrame(3)));
    }
}
