//! Plain whitespace-separated numeric files: points (`x y z` per line) and
//! scores (one value per line). Blank lines and `#` comments are skipped.

use std::fmt::Write as _;

use dial_core::Point3;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct TextError {
    pub line: usize,
    pub message: String,
}

fn rows(text: &str, width: usize) -> Result<Vec<Vec<f64>>, TextError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let line = i + 1;
        let values = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| TextError { line, message: format!("cannot parse {t:?}") }))
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() != width {
            return Err(TextError { line, message: format!("expected {width} values, got {}", values.len()) });
        }
        out.push(values);
    }
    Ok(out)
}

pub fn parse_points(text: &str) -> Result<Vec<Point3>, TextError> {
    Ok(rows(text, 3)?.into_iter().map(|r| [r[0], r[1], r[2]]).collect())
}

pub fn parse_scores(text: &str) -> Result<Vec<f64>, TextError> {
    Ok(rows(text, 1)?.into_iter().map(|r| r[0]).collect())
}

pub fn write_points(points: &[Point3]) -> String {
    let mut out = String::new();
    for p in points {
        writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    out
}

pub fn write_scores(scores: &[f64]) -> String {
    let mut out = String::new();
    for s in scores {
        writeln!(out, "{s}").unwrap();
    }
    out
}

/// Comma- or space-separated ids, as given on the command line.
pub fn parse_ids(text: &str) -> Result<Vec<usize>, TextError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| TextError { line: 1, message: format!("bad id {t:?}") }))
        .collect()
}
