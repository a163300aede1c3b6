//! Best-first branch-and-bound over the disc variables.
//!
//! Free candidates are branched in order of their initial marginal gain
//! (include first, then exclude). A node is bounded by the covered weight so
//! far plus the cheaper of two bounds on the remaining slots: the sum of the
//! top marginal gains, and the LP relaxation from [`super::lp`]. A node is
//! discarded only when its bound is below the incumbent by more than a
//! round-off tolerance, so every optimal leaf is reached and the final
//! tie-break sees all of them.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::lp::coverage_bound;
use super::{
    can_complete, max_compatible, solve_greedy, BindingConstraint, Certificate, ConflictTable, Coverage,
    IntersectionPolicy, SelectionError, SelectionProblem, SelectionSolution,
};

/// Proven-optimal selection. Deterministic: the result depends only on the
/// instance, never on exploration order.
pub fn solve_exact(problem: &SelectionProblem) -> Result<SelectionSolution, SelectionError> {
    let conflicts = ConflictTable::build(problem);
    let free = problem.free_candidates(&conflicts)?;
    let prohibit = problem.policy() == IntersectionPolicy::Prohibit;
    let budget = problem.budget();
    if budget == 0 {
        return Ok(problem.solution(Vec::new(), Certificate::Exact));
    }
    if prohibit && !can_complete(&conflicts, &mut Vec::new(), &free, budget) {
        let found = max_compatible(&conflicts, &free, budget);
        return Err(SelectionError::Infeasible(BindingConstraint::IntersectionProhibition { budget, found }));
    }

    let base = Coverage::new(problem, problem.fixed());
    let mut order = free;
    let gains: Vec<f64> = order.iter().map(|&i| base.gain(problem, i)).collect();
    let mut ranked: Vec<(usize, f64)> = order.iter().copied().zip(gains).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    order = ranked.into_iter().map(|(i, _)| i).collect();

    let search = Search::new(problem, &conflicts, order, base);
    let mut incumbent = solve_greedy(problem).ok().map(|s| Incumbent::from_solution(problem, &s));

    let total: f64 = problem.weights().iter().sum();
    let tolerance = 1e-9 * (1.0 + total);

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node { bound: f64::INFINITY, seq, next: 0, picks: Vec::new() });

    while let Some(node) = heap.pop() {
        if incumbent.as_ref().is_some_and(|inc| node.bound < inc.value - tolerance) {
            continue;
        }
        let remaining = budget - node.picks.len();
        let leaf = |picks: Vec<usize>, incumbent: &mut Option<Incumbent>| {
            let cand = Incumbent::new(problem, picks);
            if incumbent.as_ref().is_none_or(|inc| cand.beats(inc)) {
                *incumbent = Some(cand);
            }
        };
        if remaining == 0 {
            leaf(node.picks, &mut incumbent);
            continue;
        }
        let undecided = search.undecided(&node.picks, node.next);
        if undecided.len() < remaining {
            continue;
        }
        if prohibit && !can_complete(&conflicts, &mut node.picks.clone(), &undecided_ids(&search, &undecided), remaining) {
            continue;
        }
        if undecided.len() == remaining {
            let mut picks = node.picks;
            picks.extend(undecided.iter().map(|&q| search.order[q]));
            leaf(picks, &mut incumbent);
            continue;
        }

        let coverage = search.coverage(&node.picks);
        let bound = search.bound(&coverage, &undecided, remaining, incumbent.as_ref().map(|i| i.value - tolerance));
        if incumbent.as_ref().is_some_and(|inc| bound < inc.value - tolerance) {
            continue;
        }
        if let Some(done) = search.complete_greedily(&coverage, &node.picks, &undecided, remaining) {
            leaf(done, &mut incumbent);
        }

        let q = undecided[0];
        let mut with = node.picks.clone();
        with.push(search.order[q]);
        seq += 1;
        heap.push(Node { bound, seq, next: q + 1, picks: with });
        seq += 1;
        heap.push(Node { bound, seq, next: q + 1, picks: node.picks });
    }

    let best = incumbent.ok_or(SelectionError::Infeasible(BindingConstraint::IntersectionProhibition {
        budget,
        found: 0,
    }))?;
    Ok(problem.solution(best.new, Certificate::Exact))
}

fn undecided_ids(search: &Search<'_>, positions: &[usize]) -> Vec<usize> {
    let mut ids: Vec<usize> = positions.iter().map(|&q| search.order[q]).collect();
    ids.sort_unstable();
    ids
}

struct Node {
    bound: f64,
    seq: u64,
    /// First position in the branching order not yet decided.
    next: usize,
    /// Candidate ids picked so far (fixed discs excluded).
    picks: Vec<usize>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(other.seq.cmp(&self.seq))
    }
}

struct Incumbent {
    value: f64,
    /// Full sorted selection, fixed discs included, for the tie-break.
    key: Vec<usize>,
    new: Vec<usize>,
}

impl Incumbent {
    fn new(problem: &SelectionProblem, mut new: Vec<usize>) -> Self {
        new.sort_unstable();
        let mut key = new.clone();
        key.extend_from_slice(problem.fixed());
        key.sort_unstable();
        Incumbent { value: problem.union_weight(&key), key, new }
    }

    fn from_solution(problem: &SelectionProblem, s: &SelectionSolution) -> Self {
        Self::new(problem, s.new_discs(problem))
    }

    fn beats(&self, other: &Incumbent) -> bool {
        self.value > other.value || (self.value == other.value && self.key < other.key)
    }
}

struct Search<'a> {
    problem: &'a SelectionProblem,
    conflicts: &'a ConflictTable,
    /// Free candidate ids in branching order.
    order: Vec<usize>,
    base: Coverage,
    /// For each voxel, the branching positions of free candidates covering it.
    owners: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a SelectionProblem, conflicts: &'a ConflictTable, order: Vec<usize>, base: Coverage) -> Self {
        let mut owners = vec![Vec::new(); problem.voxel_count()];
        for (q, &i) in order.iter().enumerate() {
            for &j in &problem.covers()[i] {
                if !base.is_covered(j) {
                    owners[j].push(q);
                }
            }
        }
        Search { problem, conflicts, order, base, owners }
    }

    /// Positions `≥ next` still selectable next to `picks`.
    fn undecided(&self, picks: &[usize], next: usize) -> Vec<usize> {
        let prohibit = self.problem.policy() == IntersectionPolicy::Prohibit;
        (next..self.order.len())
            .filter(|&q| !prohibit || picks.iter().all(|&p| !self.conflicts.conflict(p, self.order[q])))
            .collect()
    }

    fn coverage(&self, picks: &[usize]) -> Coverage {
        let mut c = self.base.clone();
        for &i in picks {
            c.add(self.problem, i);
        }
        c
    }

    fn bound(&self, coverage: &Coverage, undecided: &[usize], slots: usize, target: Option<f64>) -> f64 {
        let covered: f64 = self
            .problem
            .weights()
            .iter()
            .enumerate()
            .filter(|&(j, _)| coverage.is_covered(j))
            .map(|(_, w)| w)
            .sum();
        let mut gains: Vec<f64> = undecided.iter().map(|&q| coverage.gain(self.problem, self.order[q])).collect();
        gains.sort_unstable_by(|a, b| b.total_cmp(a));
        let marginal = covered + gains.iter().take(slots).sum::<f64>();
        if target.is_some_and(|t| marginal < t) {
            return marginal;
        }

        let mut local = vec![usize::MAX; self.order.len()];
        for (k, &q) in undecided.iter().enumerate() {
            local[q] = k;
        }
        let mut patterns: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (j, owners) in self.owners.iter().enumerate() {
            if coverage.is_covered(j) {
                continue;
            }
            let key: Vec<usize> = owners.iter().filter(|&&q| local[q] != usize::MAX).map(|&q| local[q]).collect();
            if !key.is_empty() {
                *patterns.entry(key).or_insert(0.0) += self.problem.weights()[j];
            }
        }
        let (members, weights): (Vec<Vec<usize>>, Vec<f64>) = patterns.into_iter().filter(|(_, w)| *w > 0.0).unzip();
        let relaxed = covered + coverage_bound(&weights, &members, undecided.len(), slots);
        marginal.min(relaxed)
    }

    /// Greedy fill of the remaining slots, used to tighten the incumbent.
    fn complete_greedily(&self, coverage: &Coverage, picks: &[usize], undecided: &[usize], slots: usize) -> Option<Vec<usize>> {
        let prohibit = self.problem.policy() == IntersectionPolicy::Prohibit;
        let mut coverage = coverage.clone();
        let mut picks = picks.to_vec();
        let mut pool: Vec<usize> = undecided.iter().map(|&q| self.order[q]).collect();
        pool.sort_unstable();
        for left in (0..slots).rev() {
            let mut best: Option<(usize, f64)> = None;
            for &c in &pool {
                if picks.contains(&c) || (prohibit && picks.iter().any(|&p| self.conflicts.conflict(p, c))) {
                    continue;
                }
                let gain = coverage.gain(self.problem, c);
                if best.is_some_and(|(_, g)| gain <= g) {
                    continue;
                }
                if prohibit {
                    picks.push(c);
                    let rest: Vec<usize> = pool.iter().copied().filter(|o| !picks.contains(o)).collect();
                    let ok = can_complete(self.conflicts, &mut picks.clone(), &rest, left);
                    picks.pop();
                    if !ok {
                        continue;
                    }
                }
                best = Some((c, gain));
            }
            let (c, _) = best?;
            coverage.add(self.problem, c);
            picks.push(c);
        }
        Some(picks)
    }
}
