//! Text selection instances.
//!
//! ```text
//! dial-selection 1
//! budget 2
//! policy allow
//! fixed 0
//! voxels 3
//! 1
//! 2
//! 3
//! candidates 3
//! mask 0 1
//! mask 1 2
//! mask 2
//! ```
//!
//! Weights are written with shortest round-trip formatting, one per line in
//! voxel order. Each `mask` line lists the voxel indices of one candidate,
//! ascending; a bare `mask` is an empty disc. `fixed` may be bare too.

use std::fmt::Write as _;

use dial_core::selection::{IntersectionPolicy, SelectionError, SelectionProblem};
use thiserror::Error;

pub const HEADER: &str = "dial-selection 1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of instance, wanted {0}")]
    Eof(&'static str),
    #[error(transparent)]
    Invalid(#[from] SelectionError),
}

pub fn write_instance(problem: &SelectionProblem) -> String {
    let mut out = String::new();
    writeln!(out, "{HEADER}").unwrap();
    writeln!(out, "budget {}", problem.budget()).unwrap();
    writeln!(out, "policy {}", problem.policy().name()).unwrap();
    writeln!(out, "{}", joined("fixed", problem.fixed())).unwrap();
    writeln!(out, "voxels {}", problem.voxel_count()).unwrap();
    for w in problem.weights() {
        writeln!(out, "{w}").unwrap();
    }
    writeln!(out, "candidates {}", problem.candidate_count()).unwrap();
    for cover in problem.covers() {
        writeln!(out, "{}", joined("mask", cover)).unwrap();
    }
    out
}

fn joined(key: &str, ids: &[usize]) -> String {
    let mut s = key.to_string();
    for id in ids {
        write!(s, " {id}").unwrap();
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line and its 1-based number.
    fn next(&mut self, wanted: &'static str) -> Result<(usize, &'a str), InstanceError> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if !line.is_empty() {
                return Ok((i + 1, line));
            }
        }
        Err(InstanceError::Eof(wanted))
    }

    /// Next line, split as `key rest...`.
    fn keyed(&mut self, key: &'static str) -> Result<(usize, Vec<&'a str>), InstanceError> {
        let (line, text) = self.next(key)?;
        let mut words = text.split_whitespace();
        if words.next() != Some(key) {
            return Err(syntax(line, format!("expected `{key}`")));
        }
        Ok((line, words.collect()))
    }

    fn count(&mut self, key: &'static str) -> Result<usize, InstanceError> {
        let (line, words) = self.keyed(key)?;
        match words.as_slice() {
            [n] => n.parse().map_err(|_| syntax(line, format!("bad {key} count {n:?}"))),
            _ => Err(syntax(line, format!("`{key}` takes one value"))),
        }
    }
}

fn syntax(line: usize, message: String) -> InstanceError {
    InstanceError::Syntax { line, message }
}

fn indices(line: usize, words: &[&str]) -> Result<Vec<usize>, InstanceError> {
    words.iter().map(|w| w.parse().map_err(|_| syntax(line, format!("bad index {w:?}")))).collect()
}

pub fn parse_instance(text: &str) -> Result<SelectionProblem, InstanceError> {
    let mut lines = Lines { inner: text.lines().enumerate() };
    let (line, header) = lines.next("header")?;
    if header != HEADER {
        return Err(syntax(line, format!("expected `{HEADER}`")));
    }
    let budget = lines.count("budget")?;
    let (line, words) = lines.keyed("policy")?;
    let policy = match words.as_slice() {
        [name] => IntersectionPolicy::from_name(name).ok_or_else(|| syntax(line, format!("unknown policy {name:?}")))?,
        _ => return Err(syntax(line, "`policy` takes one value".into())),
    };
    let (line, words) = lines.keyed("fixed")?;
    let fixed = indices(line, &words)?;
    let m = lines.count("voxels")?;
    let mut weights = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, text) = lines.next("weight")?;
        weights.push(text.parse::<f64>().map_err(|_| syntax(line, format!("bad weight {text:?}")))?);
    }
    let n = lines.count("candidates")?;
    let mut covers = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, words) = lines.keyed("mask")?;
        covers.push(indices(line, &words)?);
    }
    if let Ok((line, _)) = lines.next("") {
        return Err(syntax(line, "trailing content".into()));
    }
    Ok(SelectionProblem::new(weights, covers, budget, fixed, policy)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> SelectionProblem {
        SelectionProblem::new(vec![1.0, 2.0, 3.0], vec![vec![0, 1], vec![1, 2], vec![2]], 2, vec![], IntersectionPolicy::Allow)
            .unwrap()
    }

    #[test]
    fn layout() {
        let text = write_instance(&abc());
        assert_eq!(
            text,
            "dial-selection 1\nbudget 2\npolicy allow\nfixed\nvoxels 3\n1\n2\n3\ncandidates 3\nmask 0 1\nmask 1 2\nmask 2\n"
        );
        assert_eq!(parse_instance(&text).unwrap(), abc());
    }

    #[test]
    fn round_trips_awkward_floats() {
        let p = SelectionProblem::new(
            vec![0.1 + 0.2, 1e-300, 0.0, 123456.789e10],
            vec![vec![], vec![0, 3], vec![1, 2]],
            1,
            vec![2],
            IntersectionPolicy::Prohibit,
        )
        .unwrap();
        let back = parse_instance(&write_instance(&p)).unwrap();
        assert_eq!(back, p);
        assert!(back.weights().iter().zip(p.weights()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_instance("nope"), Err(InstanceError::Syntax { line: 1, .. })));
        assert!(matches!(parse_instance("dial-selection 1\nbudget 1\n"), Err(InstanceError::Eof("policy"))));
        let text = write_instance(&abc()).replace("mask 2", "mask 9");
        assert!(matches!(parse_instance(&text), Err(InstanceError::Invalid(_))));
        let text = write_instance(&abc()) + "extra\n";
        assert!(matches!(parse_instance(&text), Err(InstanceError::Syntax { line: 13, .. })));
    }
}
