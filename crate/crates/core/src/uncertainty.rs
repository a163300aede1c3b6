//! Per-point uncertainty from repeated stochastic forward passes.
//!
//! All four metrics are oriented so that a larger value means "more
//! uncertain, label this first". Mutual information and entropy are in nats.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;

/// Simplex tolerance enforced by [`PassStack::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UncertaintyError {
    #[error("pass stack needs at least one pass")]
    NoPasses,
    #[error("pass stack needs at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("expected {expected} probabilities, got {actual}")]
    Shape { expected: usize, actual: usize },
    #[error("point {point}, pass {pass}: probability {value} outside [0, 1]")]
    OutOfRange { point: usize, pass: usize, value: f64 },
    #[error("point {point}, pass {pass}: probabilities sum to {sum}")]
    NotNormalized { point: usize, pass: usize, sum: f64 },
}

/// Class distributions of every pass for every point, stored
/// `[point][pass][class]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PassStack {
    points: usize,
    passes: usize,
    classes: usize,
    data: Vec<f64>,
}

impl PassStack {
    pub fn new(points: usize, passes: usize, classes: usize, data: Vec<f64>) -> Result<Self, UncertaintyError> {
        Self::with_tolerance(points, passes, classes, data, SIMPLEX_TOLERANCE)
    }

    /// Like [`PassStack::new`] with a caller-chosen simplex tolerance, for
    /// single-precision inputs.
    pub fn with_tolerance(
        points: usize,
        passes: usize,
        classes: usize,
        data: Vec<f64>,
        tolerance: f64,
    ) -> Result<Self, UncertaintyError> {
        if passes == 0 {
            return Err(UncertaintyError::NoPasses);
        }
        if classes < 2 {
            return Err(UncertaintyError::TooFewClasses(classes));
        }
        let expected = points * passes * classes;
        if data.len() != expected {
            return Err(UncertaintyError::Shape { expected, actual: data.len() });
        }
        for (row, dist) in data.chunks_exact(classes).enumerate() {
            let (point, pass) = (row / passes, row % passes);
            if let Some(&value) = dist.iter().find(|&&v| !(v >= -tolerance && v <= 1.0 + tolerance)) {
                return Err(UncertaintyError::OutOfRange { point, pass, value });
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > tolerance {
                return Err(UncertaintyError::NotNormalized { point, pass, sum });
            }
        }
        Ok(PassStack { points, passes, classes, data })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn passes(&self) -> usize {
        self.passes
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// The `passes × classes` block of one point.
    pub fn point(&self, index: usize) -> &[f64] {
        let width = self.passes * self.classes;
        &self.data[index * width..(index + 1) * width]
    }

    pub fn mean_predictive(&self) -> Vec<Vec<f64>> {
        (0..self.points).map(|i| mean_of(self.point(i), self.classes)).collect()
    }

    pub fn score(&self, metric: Metric) -> UncertaintyField {
        let scores = (0..self.points).map(|i| metric.evaluate(self.point(i), self.classes)).collect();
        UncertaintyField { metric, scores }
    }
}

/// Average over passes; `block` holds `passes × classes` values.
fn mean_of(block: &[f64], classes: usize) -> Vec<f64> {
    let passes = block.len() / classes;
    let mut mean = vec![0.0; classes];
    for dist in block.chunks_exact(classes) {
        for (m, &p) in mean.iter_mut().zip(dist) {
            *m += p;
        }
    }
    let n = passes as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Mutual information between prediction and weights (BALD).
    MutualInformation,
    /// Entropy of the mean predictive distribution.
    Entropy,
    /// `1 − max_c p_c` of the mean predictive distribution.
    Confidence,
    /// `1 − (p₍₁₎ − p₍₂₎)` of the mean predictive distribution.
    Margin,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::MutualInformation, Metric::Entropy, Metric::Confidence, Metric::Margin];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MutualInformation => "mi",
            Metric::Entropy => "ent",
            Metric::Confidence => "conf",
            Metric::Margin => "mar",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }

    fn evaluate(self, block: &[f64], classes: usize) -> f64 {
        match self {
            Metric::MutualInformation => mutual_information_of(block, classes),
            Metric::Entropy => math::entropy(&mean_of(block, classes)),
            Metric::Confidence => {
                let mean = mean_of(block, classes);
                1.0 - mean.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            Metric::Margin => {
                let mean = mean_of(block, classes);
                let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
                for &p in &mean {
                    if p > first {
                        second = first;
                        first = p;
                    } else if p > second {
                        second = p;
                    }
                }
                1.0 - (first - second)
            }
        }
    }
}

/// `H(mean) − mean(H(pass))`, clamped at zero against cancellation.
fn mutual_information_of(block: &[f64], classes: usize) -> f64 {
    let passes = block.len() / classes;
    let predictive = math::entropy(&mean_of(block, classes));
    let expected: f64 = block.chunks_exact(classes).map(math::entropy).sum::<f64>() / passes as f64;
    (predictive - expected).max(0.0)
}

pub fn mutual_information(stack: &PassStack) -> UncertaintyField {
    stack.score(Metric::MutualInformation)
}

pub fn softmax_entropy(stack: &PassStack) -> UncertaintyField {
    stack.score(Metric::Entropy)
}

pub fn softmax_confidence(stack: &PassStack) -> UncertaintyField {
    stack.score(Metric::Confidence)
}

pub fn softmax_margin(stack: &PassStack) -> UncertaintyField {
    stack.score(Metric::Margin)
}

/// One score per point, tagged with the metric that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyField {
    pub metric: Metric,
    pub scores: Vec<f64>,
}
