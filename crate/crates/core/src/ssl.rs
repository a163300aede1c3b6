//! Loss arithmetic and input perturbations of the mean-teacher stage,
//! computed over plain vectors with no network attached.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::math;
use crate::Point3;

/// Teacher update momentum used unless configured otherwise.
pub const DEFAULT_BETA: f64 = 0.99;

/// Probabilities below this are clamped before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

const SIMPLEX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SslError {
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("beta must lie in [0, 1), got {0}")]
    BadBeta(f64),
    #[error("entry {0} is not finite")]
    NonFinite(usize),
    #[error("distribution is off the simplex (sum {sum})")]
    NotNormalized { sum: f64 },
    #[error("jitter sigma must be nonnegative, got {0}")]
    NegativeSigma(f64),
    #[error("scale range [{lo}, {hi}] is empty or nonpositive")]
    EmptyScaleRange { lo: f64, hi: f64 },
    #[error("perturbation magnitude must be finite and nonnegative")]
    BadMagnitude,
    #[error("nothing to average over")]
    Empty,
}

/// `−ln pred[label]`, with the probability clamped to [`PROB_FLOOR`].
pub fn cross_entropy(pred: &[f64], label: usize) -> Result<f64, SslError> {
    let p = *pred.get(label).ok_or(SslError::LabelOutOfRange { label, classes: pred.len() })?;
    Ok(-math::ln(p.max(PROB_FLOOR)))
}

/// `β·teacher + (1 − β)·student`, elementwise.
pub fn ema_update(teacher: &[f64], student: &[f64], beta: f64) -> Result<Vec<f64>, SslError> {
    if !(0.0..1.0).contains(&beta) {
        return Err(SslError::BadBeta(beta));
    }
    if teacher.len() != student.len() {
        return Err(SslError::LengthMismatch { left: teacher.len(), right: student.len() });
    }
    if let Some(i) = teacher.iter().chain(student).position(|v| !v.is_finite()) {
        return Err(SslError::NonFinite(i % teacher.len().max(1)));
    }
    Ok(teacher.iter().zip(student).map(|(&t, &s)| beta * t + (1.0 - beta) * s).collect())
}

/// Student and teacher distributions for one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionPair {
    student: Vec<f64>,
    teacher: Vec<f64>,
}

impl PredictionPair {
    pub fn new(student: Vec<f64>, teacher: Vec<f64>) -> Result<Self, SslError> {
        if student.len() != teacher.len() {
            return Err(SslError::LengthMismatch { left: student.len(), right: teacher.len() });
        }
        for dist in [&student, &teacher] {
            if let Some(i) = dist.iter().position(|v| !v.is_finite() || *v < -SIMPLEX_TOLERANCE) {
                return Err(SslError::NonFinite(i));
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(SslError::NotNormalized { sum });
            }
        }
        Ok(PredictionPair { student, teacher })
    }

    pub fn student(&self) -> &[f64] {
        &self.student
    }

    pub fn teacher(&self) -> &[f64] {
        &self.teacher
    }
}

/// `KL(student ‖ teacher)`.
pub fn kl_consistency(pair: &PredictionPair) -> f64 {
    kl_divergence(&pair.student, &pair.teacher)
}

/// `Σ s ln(s / t)` with `0 ln 0 = 0` and `t` clamped to [`PROB_FLOOR`].
/// Tiny negative round-off is clamped to zero.
pub fn kl_divergence(s: &[f64], t: &[f64]) -> f64 {
    let kl: f64 = s
        .iter()
        .zip(t)
        .filter(|(&s, _)| s > 0.0)
        .map(|(&s, &t)| s * (math::ln(s) - math::ln(t.max(PROB_FLOOR))))
        .sum();
    kl.max(0.0)
}

/// Mean cross entropy over the labeled points; `labels[i] = None` marks an
/// unlabeled point.
pub fn supervised_loss(preds: &[Vec<f64>], labels: &[Option<usize>]) -> Result<f64, SslError> {
    if preds.len() != labels.len() {
        return Err(SslError::LengthMismatch { left: preds.len(), right: labels.len() });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (pred, label) in preds.iter().zip(labels) {
        if let Some(label) = *label {
            sum += cross_entropy(pred, label)?;
            n += 1;
        }
    }
    if n == 0 {
        return Err(SslError::Empty);
    }
    Ok(sum / n as f64)
}

/// Mean consistency loss over all points.
pub fn consistency_loss(pairs: &[PredictionPair]) -> Result<f64, SslError> {
    if pairs.is_empty() {
        return Err(SslError::Empty);
    }
    Ok(pairs.iter().map(kl_consistency).sum::<f64>() / pairs.len() as f64)
}

/// `L_S + L_U` over one batch. The student distributions of `pairs` are the
/// predictions the supervised term is evaluated on.
pub fn total_loss(pairs: &[PredictionPair], labels: &[Option<usize>]) -> Result<f64, SslError> {
    let students: Vec<Vec<f64>> = pairs.iter().map(|p| p.student.clone()).collect();
    Ok(supervised_loss(&students, labels)? + consistency_loss(pairs)?)
}

/// Magnitudes of the student-input perturbations. The rotation angle is
/// drawn from `[−max_rotation, max_rotation]` radians about z, translation
/// per axis from `[−t_k, t_k]`, and the scale factor from `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbParams {
    pub max_rotation: f64,
    pub jitter_sigma: f64,
    pub translation: [f64; 3],
    pub scale: (f64, f64),
}

impl PerturbParams {
    /// All magnitudes zero: the perturbation is the identity.
    pub const NONE: PerturbParams =
        PerturbParams { max_rotation: 0.0, jitter_sigma: 0.0, translation: [0.0; 3], scale: (1.0, 1.0) };

    pub fn validate(&self) -> Result<(), SslError> {
        if !(self.jitter_sigma >= 0.0) {
            return Err(SslError::NegativeSigma(self.jitter_sigma));
        }
        let (lo, hi) = self.scale;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(SslError::EmptyScaleRange { lo, hi });
        }
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !ok(self.max_rotation) || !ok(self.jitter_sigma) || !self.translation.iter().all(|&t| ok(t)) {
            return Err(SslError::BadMagnitude);
        }
        Ok(())
    }
}

impl Default for PerturbParams {
    fn default() -> Self {
        PerturbParams {
            max_rotation: core::f64::consts::PI,
            jitter_sigma: 0.01,
            translation: [0.2, 0.2, 0.1],
            scale: (0.95, 1.05),
        }
    }
}

/// Rotation about z, then per-point Gaussian jitter, then a global
/// translation, then a global uniform scale.
pub fn perturb(points: &[Point3], seed: u64, params: &PerturbParams) -> Result<Vec<Point3>, SslError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || rng.random::<f64>();

    let angle = params.max_rotation * (2.0 * uniform() - 1.0);
    let (sin, cos) = math::sin_cos(angle);
    let shift = params.translation.map(|t| t * (2.0 * uniform() - 1.0));
    let (lo, hi) = params.scale;
    let scale = lo + (hi - lo) * uniform();

    // Jitter noise comes from its own stream so the global draws above do
    // not depend on the point count.
    let mut noise = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Ok(points
        .iter()
        .map(|&[x, y, z]| {
            let rotated = [cos * x - sin * y, sin * x + cos * y, z];
            let mut q = [0.0; 3];
            for k in 0..3 {
                let n: f64 = noise.sample(StandardNormal);
                q[k] = (rotated[k] + params.jitter_sigma * n + shift[k]) * scale;
            }
            q
        })
        .collect())
}
