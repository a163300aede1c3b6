//! Stand-in for the retrained network: a stochastic predictor whose passes
//! disagree less on classes it has seen more labeled points of.
//!
//! For a point of true class `c` with familiarity `φ` (labeled points of
//! class `c` so far), a base belief `m ~ Dir(κ(φ)·t)` is drawn around
//! `t = (1 − w)·e_c + w/C`, and pass `n` predicts
//!
//! ```text
//! p_n = (1 − a(φ))·m + a(φ)·e_{(σ + n) mod C},   a(φ) = a₀·φ_ref / (φ_ref + φ)
//! ```
//!
//! with `σ` a random per-point offset. All passes share `m`, so the
//! disagreement comes from the `a(φ)` term alone and vanishes as `φ → ∞`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use super::SimError;
use crate::uncertainty::PassStack;

/// Stochastic forward passes per point unless configured otherwise.
pub const DEFAULT_PASS_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateModel {
    /// Labeled points seen per class.
    familiarity: Vec<u64>,
    /// Pass disagreement amplitude `a₀` at zero familiarity, in `(0, 1]`.
    pub temperature: f64,
    /// Familiarity at which the amplitude halves.
    pub half_familiarity: f64,
    /// Dirichlet concentration at zero familiarity; it grows linearly
    /// with familiarity at the same rate the amplitude decays.
    pub concentration: f64,
    /// Weight of the uniform component in the base belief target.
    pub smoothing: f64,
    pub pass_count: usize,
    pub seed: u64,
}

impl SurrogateModel {
    pub fn new(class_count: usize, seed: u64) -> Self {
        SurrogateModel {
            familiarity: vec![0; class_count],
            temperature: 0.5,
            half_familiarity: 200.0,
            concentration: 20.0,
            smoothing: 0.3,
            pass_count: DEFAULT_PASS_COUNT,
            seed,
        }
    }

    pub fn class_count(&self) -> usize {
        self.familiarity.len()
    }

    pub fn familiarity(&self) -> &[u64] {
        &self.familiarity
    }

    /// Adds newly labeled points of each class. Familiarity never decreases.
    pub fn observe(&mut self, labeled_per_class: &[u64]) {
        for (f, &n) in self.familiarity.iter_mut().zip(labeled_per_class) {
            *f += n;
        }
    }

    pub fn amplitude(&self, class: usize) -> f64 {
        let phi = self.familiarity[class] as f64;
        self.temperature * self.half_familiarity / (self.half_familiarity + phi)
    }

    /// Lower bound on the mutual information of any point at zero
    /// familiarity: by Pinsker's inequality each pass contributes at least
    /// `½·a₀²·‖e_k − ē‖₁²` nats, where `ē` averages the pass one-hots.
    pub fn mi_floor(&self) -> f64 {
        let c = self.class_count();
        let n = self.pass_count;
        if c == 0 || n == 0 {
            return 0.0;
        }
        let mut hits = vec![0usize; c];
        for k in 0..n {
            hits[k % c] += 1;
        }
        let mean: Vec<f64> = hits.iter().map(|&h| h as f64 / n as f64).collect();
        // ‖e_k − ē‖₁ = (1 − ē_k) + Σ_{j≠k} ē_j = 2·(1 − ē_k).
        let avg: f64 = (0..n).map(|k| 4.0 * (1.0 - mean[k % c]) * (1.0 - mean[k % c])).sum::<f64>() / n as f64;
        0.5 * self.temperature * self.temperature * avg
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.class_count() < 2 {
            return Err(SimError::BadParams("the surrogate needs at least two classes"));
        }
        if self.pass_count == 0 {
            return Err(SimError::BadParams("pass count must be positive"));
        }
        let ok = self.temperature > 0.0
            && self.temperature <= 1.0
            && self.half_familiarity > 0.0
            && self.concentration > 0.0
            && (0.0..=1.0).contains(&self.smoothing)
            && self.half_familiarity.is_finite()
            && self.concentration.is_finite();
        if !ok {
            return Err(SimError::BadParams("surrogate parameters out of range"));
        }
        Ok(())
    }
}

/// `N_pass` class distributions for every point; `labels` holds the true
/// class per point. Deterministic given the model seed and `step`.
pub fn predict(model: &SurrogateModel, labels: &[usize], step: u64) -> Result<PassStack, SimError> {
    model.validate()?;
    let c = model.class_count();
    if labels.iter().any(|&l| l >= c) {
        return Err(SimError::BadParams("label outside the surrogate's classes"));
    }
    let n = model.pass_count;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(step);

    let gammas: Vec<Vec<Gamma<f64>>> = (0..c)
        .map(|class| {
            let phi = model.familiarity[class] as f64;
            let kappa = model.concentration * (1.0 + phi / model.half_familiarity);
            (0..c)
                .map(|j| {
                    let t = model.smoothing / c as f64 + if j == class { 1.0 - model.smoothing } else { 0.0 };
                    Gamma::new(kappa * t, 1.0).expect("positive shape")
                })
                .collect()
        })
        .collect();
    let amps: Vec<f64> = (0..c).map(|class| model.amplitude(class)).collect();

    let mut data = Vec::with_capacity(labels.len() * n * c);
    let mut base = vec![0.0; c];
    for &class in labels {
        let mut total = 0.0;
        for (b, g) in base.iter_mut().zip(&gammas[class]) {
            *b = g.sample(&mut rng).max(1e-300);
            total += *b;
        }
        base.iter_mut().for_each(|b| *b /= total);
        let a = amps[class];
        let offset = rng.random_range(0..c);
        for pass in 0..n {
            let hot = (offset + pass) % c;
            data.extend(base.iter().enumerate().map(|(j, &b)| (1.0 - a) * b + if j == hot { a } else { 0.0 }));
        }
    }
    PassStack::new(labels.len(), n, c, data).map_err(|_| SimError::BadParams("surrogate produced an invalid pass stack"))
}
