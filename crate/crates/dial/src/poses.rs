//! KITTI-style pose lists: one `[R|t]` per line, twelve reals, row-major.

use std::fmt::Write as _;

use dial_core::scene::SceneError;
use dial_core::Pose;
use thiserror::Error;

/// Text poses carry few digits, so orthonormality is checked loosely.
pub const TEXT_POSE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PoseError {
    #[error("line {line}: expected 12 fields, got {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: cannot parse {token:?} as a number")]
    Number { line: usize, token: String },
    #[error("line {line}: {source}")]
    Rotation { line: usize, source: SceneError },
}

/// Parses one pose per non-blank line; line `k` (1-based) becomes frame
/// `k − 1`. Blank lines are skipped but still counted for error messages.
pub fn parse_poses(text: &str) -> Result<Vec<Pose>, PoseError> {
    let mut poses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.len() != 12 {
            return Err(PoseError::FieldCount { line, found: fields.len() });
        }
        let mut v = [0.0; 12];
        for (slot, token) in v.iter_mut().zip(&fields) {
            *slot = token.parse().map_err(|_| PoseError::Number { line, token: token.to_string() })?;
        }
        let rotation = [[v[0], v[1], v[2]], [v[4], v[5], v[6]], [v[8], v[9], v[10]]];
        let pose = Pose::with_tolerance(rotation, [v[3], v[7], v[11]], TEXT_POSE_TOLERANCE)
            .map_err(|source| PoseError::Rotation { line, source })?;
        poses.push(pose);
    }
    Ok(poses)
}

/// Writes poses in the layout [`parse_poses`] reads, with shortest
/// round-trip float formatting.
pub fn write_poses(poses: &[Pose]) -> String {
    let mut out = String::new();
    for pose in poses {
        let r = pose.rotation();
        let t = pose.translation();
        let row = |k: usize| [r[k][0], r[k][1], r[k][2], t[k]];
        let values: Vec<String> = (0..3).flat_map(row).map(|v| v.to_string()).collect();
        writeln!(out, "{}", values.join(" ")).unwrap();
    }
    out
}
