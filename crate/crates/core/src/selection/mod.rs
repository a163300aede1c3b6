//! Budgeted maximum-coverage selection of label-query discs.
//!
//! The objective maximizes the pooled uncertainty of the union of selected
//! discs:
//!
//! ```text
//! max  Σ_j v_j I_j
//! s.t. Σ_i x_i = |F| + N
//!      v_j ≤ Σ_i z_ji x_i      ∀ j
//!      0 ≤ v_j ≤ 1,  x_i ∈ {0, 1},  x_f = 1 ∀ f ∈ F
//! ```
//!
//! where `F` are discs fixed by earlier steps and `N` the number of new discs.
//! [`solve_exact`] solves it by branch-and-bound; the other solvers are
//! baselines and test oracles.
//!
//! Every solver reports its objective through [`SelectionProblem::union_weight`],
//! so two solvers that agree on the chosen set agree bit-for-bit on the value.
//! Ties between equal objectives always resolve to the lexicographically
//! smallest sorted id set.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

mod baselines;
mod exact;
mod greedy;
mod lp;

pub use baselines::{select_hpcs, select_random, solve_bruteforce, BRUTEFORCE_LIMIT, RANDOM_RESTARTS};
pub use exact::solve_exact;
pub use greedy::solve_greedy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntersectionPolicy {
    /// Discs may overlap; the union objective discounts shared voxels.
    #[default]
    Allow,
    /// No two selected discs may share a voxel.
    Prohibit,
}

impl IntersectionPolicy {
    pub fn name(self) -> &'static str {
        match self {
            IntersectionPolicy::Allow => "allow",
            IntersectionPolicy::Prohibit => "prohibit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "allow" => Some(IntersectionPolicy::Allow),
            "prohibit" => Some(IntersectionPolicy::Prohibit),
            _ => None,
        }
    }
}

/// The constraint that made an instance infeasible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BindingConstraint {
    /// Two fixed discs share a voxel under the prohibit policy.
    FixedIntersection { a: usize, b: usize },
    /// No set of `budget` mutually disjoint new discs exists.
    IntersectionProhibition { budget: usize, found: usize },
}

impl core::fmt::Display for BindingConstraint {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BindingConstraint::FixedIntersection { a, b } => {
                write!(f, "fixed discs {a} and {b} intersect under the prohibit policy")
            }
            BindingConstraint::IntersectionProhibition { budget, found } => {
                write!(f, "intersection prohibition: needed {budget} disjoint new discs, found at most {found}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("voxel {voxel}: weight {value} is not finite and non-negative")]
    BadWeight { voxel: usize, value: f64 },
    #[error("candidate {candidate} covers voxel {voxel}, but there are only {voxels} voxels")]
    VoxelOutOfRange { candidate: usize, voxel: usize, voxels: usize },
    #[error("mask {candidate} has length {actual}, expected {expected}")]
    MaskLength { candidate: usize, expected: usize, actual: usize },
    #[error("fixed disc {0} is not a candidate")]
    UnknownFixed(usize),
    #[error("{requested} discs requested but only {candidates} candidates exist")]
    BudgetExceedsCandidates { requested: usize, candidates: usize },
    #[error("infeasible: {0}")]
    Infeasible(BindingConstraint),
    #[error("brute force is limited to {limit} candidates, got {count}")]
    TooManyCandidates { count: usize, limit: usize },
    #[error("expected {expected} point counts, got {actual}")]
    PointCounts { expected: usize, actual: usize },
}

/// One instance of the selection program.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
    budget: usize,
    fixed: Vec<usize>,
    policy: IntersectionPolicy,
}

impl SelectionProblem {
    /// `covers[i]` lists the voxels inside candidate `i`; it is sorted and
    /// deduplicated here. `budget` counts new discs only.
    pub fn new(
        weights: Vec<f64>,
        mut covers: Vec<Vec<usize>>,
        budget: usize,
        fixed: Vec<usize>,
        policy: IntersectionPolicy,
    ) -> Result<Self, SelectionError> {
        if let Some((voxel, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return Err(SelectionError::BadWeight { voxel, value });
        }
        for (candidate, cover) in covers.iter_mut().enumerate() {
            cover.sort_unstable();
            cover.dedup();
            if let Some(&voxel) = cover.last().filter(|&&j| j >= weights.len()) {
                return Err(SelectionError::VoxelOutOfRange { candidate, voxel, voxels: weights.len() });
            }
        }
        let mut fixed = fixed;
        fixed.sort_unstable();
        fixed.dedup();
        if let Some(&id) = fixed.iter().find(|&&id| id >= covers.len()) {
            return Err(SelectionError::UnknownFixed(id));
        }
        let requested = budget + fixed.len();
        if requested > covers.len() {
            return Err(SelectionError::BudgetExceedsCandidates { requested, candidates: covers.len() });
        }
        Ok(SelectionProblem { weights, covers, budget, fixed, policy })
    }

    /// Builds an instance from dense binary masks, one per candidate.
    pub fn from_masks(
        weights: Vec<f64>,
        masks: &[Vec<bool>],
        budget: usize,
        fixed: Vec<usize>,
        policy: IntersectionPolicy,
    ) -> Result<Self, SelectionError> {
        let mut covers = Vec::with_capacity(masks.len());
        for (candidate, mask) in masks.iter().enumerate() {
            if mask.len() != weights.len() {
                return Err(SelectionError::MaskLength { candidate, expected: weights.len(), actual: mask.len() });
            }
            covers.push(mask.iter().enumerate().filter(|(_, &z)| z).map(|(j, _)| j).collect());
        }
        Self::new(weights, covers, budget, fixed, policy)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn covers(&self) -> &[Vec<usize>] {
        &self.covers
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn policy(&self) -> IntersectionPolicy {
        self.policy
    }

    pub fn candidate_count(&self) -> usize {
        self.covers.len()
    }

    pub fn voxel_count(&self) -> usize {
        self.weights.len()
    }

    /// One binary variable per candidate.
    pub fn binary_variable_count(&self) -> usize {
        self.covers.len()
    }

    /// Right-hand side of the cardinality constraint.
    pub fn total_selected(&self) -> usize {
        self.fixed.len() + self.budget
    }

    /// Same instance with a different budget, fixed set and policy.
    pub fn with_step(&self, budget: usize, fixed: Vec<usize>, policy: IntersectionPolicy) -> Result<Self, SelectionError> {
        Self::new(self.weights.clone(), self.covers.clone(), budget, fixed, policy)
    }

    pub fn intersects(&self, a: usize, b: usize) -> bool {
        sorted_intersect(&self.covers[a], &self.covers[b])
    }

    /// Every candidate pair `(a, b)`, `a < b`, whose masks share a voxel.
    /// Under the prohibit policy each pair becomes `x_a + x_b ≤ 1`.
    pub fn conflict_pairs(&self) -> Vec<(usize, usize)> {
        let table = ConflictTable::build(self);
        let n = self.candidate_count();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| table.conflict(a, b))
            .collect()
    }

    /// Σ of `I_j` over the union of the masks of `chosen`, summed in voxel
    /// order. This is the one place objectives are computed.
    pub fn union_weight(&self, chosen: &[usize]) -> f64 {
        let mut covered = vec![false; self.weights.len()];
        for &i in chosen {
            for &j in &self.covers[i] {
                covered[j] = true;
            }
        }
        self.weights.iter().zip(&covered).filter(|(_, &c)| c).map(|(w, _)| w).sum()
    }

    /// Index set of subproblem candidates: not fixed and, under the prohibit
    /// policy, disjoint from every fixed disc.
    pub(crate) fn free_candidates(&self, conflicts: &ConflictTable) -> Result<Vec<usize>, SelectionError> {
        if self.policy == IntersectionPolicy::Prohibit {
            for (k, &a) in self.fixed.iter().enumerate() {
                if let Some(&b) = self.fixed[k + 1..].iter().find(|&&b| conflicts.conflict(a, b)) {
                    return Err(SelectionError::Infeasible(BindingConstraint::FixedIntersection { a, b }));
                }
            }
        }
        Ok((0..self.candidate_count())
            .filter(|i| self.fixed.binary_search(i).is_err())
            .filter(|&i| self.policy == IntersectionPolicy::Allow || self.fixed.iter().all(|&f| !conflicts.conflict(i, f)))
            .collect())
    }

    pub(crate) fn solution(&self, mut new: Vec<usize>, certificate: Certificate) -> SelectionSolution {
        new.extend_from_slice(&self.fixed);
        new.sort_unstable();
        let objective = self.union_weight(&new);
        SelectionSolution { chosen: new, objective, certificate }
    }
}

fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut k) = (0, 0);
    while i < a.len() && k < b.len() {
        match a[i].cmp(&b[k]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => k += 1,
            core::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// Dense pairwise "shares a voxel" table.
pub(crate) struct ConflictTable {
    n: usize,
    bits: Vec<bool>,
}

impl ConflictTable {
    pub(crate) fn build(problem: &SelectionProblem) -> Self {
        let n = problem.candidate_count();
        let mut bits = vec![false; n * n];
        let mut by_voxel: Vec<Vec<usize>> = vec![Vec::new(); problem.voxel_count()];
        for (i, cover) in problem.covers.iter().enumerate() {
            for &j in cover {
                by_voxel[j].push(i);
            }
        }
        for owners in &by_voxel {
            for (k, &a) in owners.iter().enumerate() {
                for &b in &owners[k + 1..] {
                    bits[a * n + b] = true;
                    bits[b * n + a] = true;
                }
            }
        }
        ConflictTable { n, bits }
    }

    pub(crate) fn conflict(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.n + b]
    }
}

/// How much a solution's optimality is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certificate {
    Exact,
    Greedy,
    Heuristic,
}

impl Certificate {
    pub fn name(self) -> &'static str {
        match self {
            Certificate::Exact => "exact",
            Certificate::Greedy => "greedy",
            Certificate::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionSolution {
    /// Sorted ids, fixed discs included.
    pub chosen: Vec<usize>,
    pub objective: f64,
    pub certificate: Certificate,
}

impl SelectionSolution {
    /// Chosen ids that were not fixed in `problem`.
    pub fn new_discs(&self, problem: &SelectionProblem) -> Vec<usize> {
        self.chosen.iter().copied().filter(|i| problem.fixed.binary_search(i).is_err()).collect()
    }
}

/// Running coverage state shared by the incremental solvers.
#[derive(Clone)]
pub(crate) struct Coverage {
    covered: Vec<bool>,
}

impl Coverage {
    pub(crate) fn new(problem: &SelectionProblem, chosen: &[usize]) -> Self {
        let mut c = Coverage { covered: vec![false; problem.voxel_count()] };
        for &i in chosen {
            c.add(problem, i);
        }
        c
    }

    pub(crate) fn add(&mut self, problem: &SelectionProblem, candidate: usize) {
        for &j in &problem.covers[candidate] {
            self.covered[j] = true;
        }
    }

    pub(crate) fn gain(&self, problem: &SelectionProblem, candidate: usize) -> f64 {
        problem.covers[candidate].iter().filter(|&&j| !self.covered[j]).map(|&j| problem.weights[j]).sum()
    }

    pub(crate) fn is_covered(&self, voxel: usize) -> bool {
        self.covered[voxel]
    }
}

/// Whether `pool` (ascending) holds `need` pairwise-compatible candidates,
/// all compatible with `taken`.
pub(crate) fn can_complete(conflicts: &ConflictTable, taken: &mut Vec<usize>, pool: &[usize], need: usize) -> bool {
    if need == 0 {
        return true;
    }
    for (k, &c) in pool.iter().enumerate() {
        if pool.len() - k < need {
            return false;
        }
        if taken.iter().any(|&t| conflicts.conflict(t, c)) {
            continue;
        }
        taken.push(c);
        let ok = can_complete(conflicts, taken, &pool[k + 1..], need - 1);
        taken.pop();
        if ok {
            return true;
        }
    }
    false
}

/// Size of the largest compatible subset of `pool` found, capped at `need`.
pub(crate) fn max_compatible(conflicts: &ConflictTable, pool: &[usize], need: usize) -> usize {
    let mut taken = Vec::new();
    (0..=need).rev().find(|&k| can_complete(conflicts, &mut taken, pool, k)).unwrap_or(0)
}
