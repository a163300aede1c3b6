//! Enumeration oracle and the random / highest-point-count baselines.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    max_compatible, BindingConstraint, Certificate, ConflictTable, IntersectionPolicy, SelectionError, SelectionProblem,
    SelectionSolution,
};

/// Largest candidate count [`solve_bruteforce`] accepts.
pub const BRUTEFORCE_LIMIT: usize = 25;

/// Shuffled passes [`select_random`] attempts before giving up.
pub const RANDOM_RESTARTS: usize = 64;

/// Enumerates every feasible set of new discs in lexicographic order and
/// keeps the first one with the largest objective.
pub fn solve_bruteforce(problem: &SelectionProblem) -> Result<SelectionSolution, SelectionError> {
    let n = problem.candidate_count();
    if n > BRUTEFORCE_LIMIT {
        return Err(SelectionError::TooManyCandidates { count: n, limit: BRUTEFORCE_LIMIT });
    }
    let conflicts = ConflictTable::build(problem);
    let free = problem.free_candidates(&conflicts)?;
    let prohibit = problem.policy() == IntersectionPolicy::Prohibit;
    let budget = problem.budget();

    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let mut combo: Vec<usize> = (0..budget).collect();
    if budget <= free.len() {
        loop {
            let picks: Vec<usize> = combo.iter().map(|&k| free[k]).collect();
            let compatible =
                !prohibit || picks.iter().enumerate().all(|(k, &a)| picks[k + 1..].iter().all(|&b| !conflicts.conflict(a, b)));
            if compatible {
                let mut key = picks.clone();
                key.extend_from_slice(problem.fixed());
                key.sort_unstable();
                let value = problem.union_weight(&key);
                let better = match &best {
                    None => true,
                    Some((v, k, _)) => value > *v || (value == *v && key < *k),
                };
                if better {
                    best = Some((value, key, picks));
                }
            }
            if !next_combination(&mut combo, free.len()) {
                break;
            }
        }
    }
    match best {
        Some((_, _, picks)) => Ok(problem.solution(picks, Certificate::Exact)),
        None => {
            let found = max_compatible(&conflicts, &free, budget);
            Err(SelectionError::Infeasible(BindingConstraint::IntersectionProhibition { budget, found }))
        }
    }
}

/// Advances `combo` (strictly increasing indices below `n`) to the next
/// combination in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let Some(i) = (0..k).rev().find(|&i| combo[i] < n - k + i) else {
        return false;
    };
    combo[i] += 1;
    for t in i + 1..k {
        combo[t] = combo[t - 1] + 1;
    }
    true
}

/// Samples new discs uniformly without replacement, discarding any that
/// shares a voxel with a fixed or already drawn disc. Intersections are
/// always prohibited here, whatever the problem's policy.
pub fn select_random(problem: &SelectionProblem, seed: u64) -> Result<SelectionSolution, SelectionError> {
    let prohibiting = problem.with_step(problem.budget(), problem.fixed().to_vec(), IntersectionPolicy::Prohibit)?;
    let conflicts = ConflictTable::build(&prohibiting);
    let free = prohibiting.free_candidates(&conflicts)?;
    let budget = problem.budget();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut most = 0;
    for _ in 0..RANDOM_RESTARTS {
        let mut pool = free.clone();
        pool.shuffle(&mut rng);
        let mut picks: Vec<usize> = Vec::with_capacity(budget);
        for c in pool {
            if picks.len() == budget {
                break;
            }
            if picks.iter().all(|&p| !conflicts.conflict(p, c)) {
                picks.push(c);
            }
        }
        if picks.len() == budget {
            return Ok(problem.solution(picks, Certificate::Heuristic));
        }
        most = most.max(picks.len());
    }
    Err(SelectionError::Infeasible(BindingConstraint::IntersectionProhibition { budget, found: most }))
}

/// Highest point count sampling: candidates ranked by the point count of
/// their frame (ties to the lower id), skipping any that intersects a fixed
/// or already chosen disc.
pub fn select_hpcs(problem: &SelectionProblem, point_counts: &[usize]) -> Result<SelectionSolution, SelectionError> {
    if point_counts.len() != problem.candidate_count() {
        return Err(SelectionError::PointCounts { expected: problem.candidate_count(), actual: point_counts.len() });
    }
    let prohibiting = problem.with_step(problem.budget(), problem.fixed().to_vec(), IntersectionPolicy::Prohibit)?;
    let conflicts = ConflictTable::build(&prohibiting);
    let mut ranked = prohibiting.free_candidates(&conflicts)?;
    ranked.sort_by(|&a, &b| point_counts[b].cmp(&point_counts[a]).then(a.cmp(&b)));
    let budget = problem.budget();
    let mut picks: Vec<usize> = Vec::with_capacity(budget);
    for c in ranked {
        if picks.len() == budget {
            break;
        }
        if picks.iter().all(|&p| !conflicts.conflict(p, c)) {
            picks.push(c);
        }
    }
    if picks.len() < budget {
        return Err(SelectionError::Infeasible(BindingConstraint::IntersectionProhibition { budget, found: picks.len() }));
    }
    Ok(problem.solution(picks, Certificate::Heuristic))
}
