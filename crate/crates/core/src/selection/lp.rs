//! LP-relaxation bound for the coverage subproblem of one search node.
//!
//! With voxels merged into patterns (voxels covered by exactly the same
//! undecided candidates), the relaxation reads
//!
//! ```text
//! max  Σ_p W_p v_p
//! s.t. v_p − Σ_{i∈p} x_i ≤ 0     (dual y_p)
//!      Σ_i x_i ≤ r               (dual μ)
//!      0 ≤ v_p ≤ 1,  0 ≤ x_i ≤ 1
//! ```
//!
//! It is solved with a dense bounded-variable primal simplex. The bound that
//! leaves this module is not the primal value but the dual objective
//! re-evaluated from the simplex multipliers,
//!
//! ```text
//! Σ_p max(0, W_p − y_p) + (sum of the r largest Σ_{p∋i} y_p)
//! ```
//!
//! which is a valid upper bound for any `y ≥ 0`, so round-off in the pivots
//! can loosen it but never make it unsafe.

use alloc::vec;
use alloc::vec::Vec;

const EPS: f64 = 1e-11;
const DEGENERATE_STREAK: usize = 32;

/// Upper bound on the best coverage gain of `slots` picks among `candidates`
/// undecided candidates.
pub(crate) fn coverage_bound(weights: &[f64], members: &[Vec<usize>], candidates: usize, slots: usize) -> f64 {
    if weights.is_empty() || slots == 0 {
        return 0.0;
    }
    let duals = Simplex::coverage(weights, members, candidates, slots).solve();
    dual_bound(weights, members, candidates, slots, &duals)
}

pub(crate) fn dual_bound(weights: &[f64], members: &[Vec<usize>], candidates: usize, slots: usize, duals: &[f64]) -> f64 {
    let mut loads = vec![0.0; candidates];
    let mut paid = 0.0;
    for ((&w, m), &y) in weights.iter().zip(members).zip(duals) {
        let y = y.clamp(0.0, w);
        paid += w - y;
        for &i in m {
            loads[i] += y;
        }
    }
    loads.sort_unstable_by(|a, b| b.total_cmp(a));
    paid + loads.iter().take(slots).sum::<f64>()
}

struct Simplex {
    rows: usize,
    cols: usize,
    /// Row-major `rows × cols` tableau `B⁻¹A`.
    table: Vec<f64>,
    /// Current values of the basic variables.
    beta: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced costs `c_j − c_Bᵀ B⁻¹ a_j`.
    reduced: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    basic: Vec<bool>,
    slack0: usize,
}

impl Simplex {
    fn coverage(weights: &[f64], members: &[Vec<usize>], k: usize, slots: usize) -> Self {
        let p = weights.len();
        let rows = p + 1;
        let slack0 = k + p;
        let cols = slack0 + rows;
        let mut table = vec![0.0; rows * cols];
        for (row, m) in members.iter().enumerate() {
            let line = &mut table[row * cols..(row + 1) * cols];
            for &i in m {
                line[i] = -1.0;
            }
            line[k + row] = 1.0;
            line[slack0 + row] = 1.0;
        }
        let last = &mut table[p * cols..];
        last[..k].iter_mut().for_each(|v| *v = 1.0);
        last[slack0 + p] = 1.0;

        let mut beta = vec![0.0; rows];
        beta[p] = slots.min(k) as f64;
        let mut reduced = vec![0.0; cols];
        reduced[k..k + p].copy_from_slice(weights);
        let mut upper = vec![f64::INFINITY; cols];
        upper[..k + p].iter_mut().for_each(|u| *u = 1.0);
        let mut basic = vec![false; cols];
        basic[slack0..].iter_mut().for_each(|b| *b = true);

        Simplex {
            rows,
            cols,
            table,
            beta,
            basis: (slack0..cols).collect(),
            reduced,
            upper,
            at_upper: vec![false; cols],
            basic,
            slack0,
        }
    }

    /// Runs to optimality (or the iteration cap) and returns the row duals
    /// of the pattern rows.
    fn solve(mut self) -> Vec<f64> {
        let cap = 20 * (self.rows + self.cols) + 100;
        let mut streak = 0;
        for _ in 0..cap {
            let Some(entering) = self.entering(streak >= DEGENERATE_STREAK) else { break };
            let step = self.step(entering);
            streak = if step > EPS { 0 } else { streak + 1 };
        }
        let p = self.rows - 1;
        (0..p).map(|row| -self.reduced[self.slack0 + row]).collect()
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if self.basic[j] {
                continue;
            }
            let gain = if self.at_upper[j] { -self.reduced[j] } else { self.reduced[j] };
            if gain <= 1e-9 {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((j, gain));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Moves `entering` as far as feasibility allows; returns the step length.
    fn step(&mut self, entering: usize) -> f64 {
        let dir = if self.at_upper[entering] { -1.0 } else { 1.0 };
        let mut limit = self.upper[entering];
        let mut leaving: Option<(usize, bool)> = None;
        for row in 0..self.rows {
            let a = self.table[row * self.cols + entering] * dir;
            let var = self.basis[row];
            let room = if a > EPS {
                self.beta[row] / a
            } else if a < -EPS && self.upper[var].is_finite() {
                (self.upper[var] - self.beta[row]) / -a
            } else {
                continue;
            };
            let room = room.max(0.0);
            if room < limit {
                limit = room;
                leaving = Some((row, a < 0.0));
            }
        }
        for row in 0..self.rows {
            self.beta[row] -= self.table[row * self.cols + entering] * dir * limit;
        }
        match leaving {
            None => {
                self.at_upper[entering] = !self.at_upper[entering];
            }
            Some((row, to_upper)) => {
                let start = if self.at_upper[entering] { self.upper[entering] } else { 0.0 };
                let old = self.basis[row];
                self.basic[old] = false;
                self.at_upper[old] = to_upper;
                self.basic[entering] = true;
                self.at_upper[entering] = false;
                self.basis[row] = entering;
                self.beta[row] = start + dir * limit;
                self.pivot(row, entering);
            }
        }
        limit
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let cols = self.cols;
        let inv = 1.0 / self.table[row * cols + col];
        self.table[row * cols..(row + 1) * cols].iter_mut().for_each(|v| *v *= inv);
        let pivot_row = self.table[row * cols..(row + 1) * cols].to_vec();
        for r in 0..self.rows {
            if r == row {
                continue;
            }
            let factor = self.table[r * cols + col];
            if factor == 0.0 {
                continue;
            }
            let line = &mut self.table[r * cols..(r + 1) * cols];
            for (v, &pv) in line.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            line[col] = 0.0;
        }
        let factor = self.reduced[col];
        if factor != 0.0 {
            for (v, &pv) in self.reduced.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.reduced[col] = 0.0;
        }
    }
}
