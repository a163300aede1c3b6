//! Marginal-gain greedy for budgeted coverage.

use alloc::vec::Vec;

use super::{
    can_complete, max_compatible, BindingConstraint, Certificate, ConflictTable, Coverage, IntersectionPolicy,
    SelectionError, SelectionProblem, SelectionSolution,
};

/// Adds, one at a time, the candidate with the largest uncovered weight,
/// lowest id first on ties. Under the prohibit policy a candidate is only
/// taken if the remaining slots can still be filled with disjoint discs.
pub fn solve_greedy(problem: &SelectionProblem) -> Result<SelectionSolution, SelectionError> {
    let conflicts = ConflictTable::build(problem);
    let free = problem.free_candidates(&conflicts)?;
    let prohibit = problem.policy() == IntersectionPolicy::Prohibit;
    let budget = problem.budget();

    let mut coverage = Coverage::new(problem, problem.fixed());
    let mut picks: Vec<usize> = Vec::with_capacity(budget);
    for left in (0..budget).rev() {
        let mut best: Option<(usize, f64)> = None;
        for &c in &free {
            if picks.contains(&c) || (prohibit && picks.iter().any(|&p| conflicts.conflict(p, c))) {
                continue;
            }
            let gain = coverage.gain(problem, c);
            if best.is_some_and(|(_, g)| gain <= g) {
                continue;
            }
            if prohibit && left > 0 {
                picks.push(c);
                let rest: Vec<usize> = free.iter().copied().filter(|o| !picks.contains(o)).collect();
                let ok = can_complete(&conflicts, &mut picks.clone(), &rest, left);
                picks.pop();
                if !ok {
                    continue;
                }
            }
            best = Some((c, gain));
        }
        let Some((c, _)) = best else {
            let found = max_compatible(&conflicts, &free, budget);
            return Err(SelectionError::Infeasible(BindingConstraint::IntersectionProhibition { budget, found }));
        };
        coverage.add(problem, c);
        picks.push(c);
    }
    Ok(problem.solution(picks, Certificate::Greedy))
}
