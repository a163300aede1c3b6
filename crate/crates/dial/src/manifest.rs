//! Run manifests as JSON Lines: one header record, one record per step
//! (step 0 is the initial state), and a halt record if the run stopped
//! early.

use std::fmt::Write as _;

use dial_core::sim::{budget_report, generate_scene, run_loop, RunHistory, SimError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{Config, ConfigError};

pub const FORMAT: &str = "dial-manifest";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("manifest has no header record")]
    NoHeader,
    #[error("line {line}: {message}")]
    Structure { line: usize, message: String },
    #[error("unsupported manifest version {0}")]
    Version(u32),
    #[error("no steps recorded")]
    NoSteps,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub scene: u64,
    pub model: u64,
    pub selection: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub strategy: String,
    pub seeds: Seeds,
    pub config: Config,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub full: usize,
    pub weak: usize,
    pub unlabeled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub selected: Vec<usize>,
    pub labeled: Vec<usize>,
    pub objective: f64,
    pub certificate: Option<String>,
    pub labeled_fraction: f64,
    pub class_coverage: Vec<f64>,
    pub planted_coverage: f64,
    pub unlabeled_uncertainty: f64,
    pub hours: f64,
    pub framewise_hours: f64,
    pub frames: FrameCounts,
    pub familiarity: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaltRecord {
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record {
    Header(Header),
    Step(StepRecord),
    Halt(HaltRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: Header,
    pub steps: Vec<StepRecord>,
    pub halt: Option<HaltRecord>,
}

impl Manifest {
    pub fn from_history(config: &Config, history: &RunHistory) -> Self {
        let cost = config.cost_model();
        let steps = history
            .states
            .iter()
            .map(|s| {
                let [full, weak, unlabeled] = s.status_counts();
                let fractions: Vec<f64> = s.frames.iter().map(|f| f.labeled_point_fraction).collect();
                let report = budget_report(s.labeled.len(), &fractions, 0, 0, &cost);
                StepRecord {
                    step: s.step,
                    selected: s.selected.clone(),
                    labeled: s.labeled.clone(),
                    objective: s.metrics.objective,
                    certificate: s.metrics.certificate.map(|c| c.name().to_string()),
                    labeled_fraction: s.metrics.labeled_fraction,
                    class_coverage: s.metrics.class_coverage.clone(),
                    planted_coverage: s.metrics.planted_coverage,
                    unlabeled_uncertainty: s.metrics.unlabeled_uncertainty,
                    hours: s.hours,
                    framewise_hours: report.framewise_hours,
                    frames: FrameCounts { full, weak, unlabeled },
                    familiarity: s.familiarity.clone(),
                }
            })
            .collect();
        let sim = &config.simulation;
        Manifest {
            header: Header {
                format: FORMAT.into(),
                version: VERSION,
                strategy: history.strategy.name().into(),
                seeds: Seeds { scene: sim.scene_seed, model: sim.model_seed, selection: sim.selection_seed },
                config: config.clone(),
            },
            steps,
            halt: history.halted.as_ref().map(|h| HaltRecord { step: h.step, reason: h.error.to_string() }),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut push = |r: &Record| {
            out.push_str(&serde_json::to_string(r).expect("manifest records serialize"));
            out.push('\n');
        };
        push(&Record::Header(self.header.clone()));
        for s in &self.steps {
            push(&Record::Step(s.clone()));
        }
        if let Some(h) = &self.halt {
            push(&Record::Halt(h.clone()));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut header = None;
        let mut steps = Vec::new();
        let mut halt = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(raw).map_err(|source| ManifestError::Json { line, source })?;
            let misplaced = |what: &str| ManifestError::Structure { line, message: format!("unexpected {what} record") };
            match record {
                Record::Header(h) if header.is_none() => {
                    if h.version != VERSION {
                        return Err(ManifestError::Version(h.version));
                    }
                    header = Some(h);
                }
                Record::Header(_) => return Err(misplaced("header")),
                Record::Step(_) | Record::Halt(_) if header.is_none() || halt.is_some() => {
                    return Err(misplaced("step or halt"))
                }
                Record::Step(s) => steps.push(s),
                Record::Halt(h) => halt = Some(h),
            }
        }
        Ok(Manifest { header: header.ok_or(ManifestError::NoHeader)?, steps, halt })
    }
}

/// Generates the scene described by `config` and runs the loop.
pub fn simulate(config: &Config) -> Result<Manifest, ManifestError> {
    config.validate()?;
    let scene = generate_scene(config.simulation.scene_seed, &config.scene_params())?;
    let history = run_loop(&scene, config.strategy()?, &config.loop_config()?)?;
    Ok(Manifest::from_history(config, &history))
}

/// Reruns the configuration recorded in a manifest.
pub fn replay(manifest: &Manifest) -> Result<Manifest, ManifestError> {
    simulate(&manifest.header.config)
}

/// Human-readable summary followed by a tab-separated per-step table.
pub fn report(manifest: &Manifest) -> Result<String, ManifestError> {
    let last = manifest.steps.last().ok_or(ManifestError::NoSteps)?;
    let h = &manifest.header;
    let mut out = String::new();
    writeln!(out, "strategy        {}", h.strategy).unwrap();
    writeln!(out, "seeds           scene {} model {} selection {}", h.seeds.scene, h.seeds.model, h.seeds.selection).unwrap();
    writeln!(out, "steps           {}", last.step).unwrap();
    writeln!(out, "labeled discs   {}", last.labeled.len()).unwrap();
    writeln!(out, "disc hours      {}", last.hours).unwrap();
    writeln!(out, "framewise hours {:.1}", last.framewise_hours).unwrap();
    writeln!(out, "labeled points  {:.2}%", 100.0 * last.labeled_fraction).unwrap();
    writeln!(out, "planted regions {:.2}%", 100.0 * last.planted_coverage).unwrap();
    writeln!(out, "frames          {} full, {} weak, {} unlabeled", last.frames.full, last.frames.weak, last.frames.unlabeled)
        .unwrap();
    if let Some(halt) = &manifest.halt {
        writeln!(out, "halted at step  {}: {}", halt.step, halt.reason).unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "step\tdiscs\tobjective\tlabeled_fraction\tplanted_coverage\tunlabeled_uncertainty\thours\tselected").unwrap();
    for s in &manifest.steps {
        let ids: Vec<String> = s.selected.iter().map(usize::to_string).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.step,
            s.labeled.len(),
            s.objective,
            s.labeled_fraction,
            s.planted_coverage,
            s.unlabeled_uncertainty,
            s.hours,
            ids.join(",")
        )
        .unwrap();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Config {
        let mut c = Config::default();
        c.simulation.frames = 80;
        c.simulation.points_per_frame = 30;
        c.simulation.rare_regions = 3;
        c.simulation.steps = 2;
        c.selection.per_step = 2;
        c
    }

    #[test]
    fn round_trip_and_replay() {
        let m = simulate(&small()).unwrap();
        assert_eq!(m.steps.len(), 3);
        let text = m.to_jsonl();
        assert_eq!(Manifest::parse(&text).unwrap(), m);
        assert_eq!(replay(&m).unwrap().to_jsonl(), text);
    }

    #[test]
    fn report_needs_steps() {
        let mut m = simulate(&small()).unwrap();
        assert!(report(&m).unwrap().contains("labeled discs   5"));
        m.steps.clear();
        assert_eq!(report(&m).unwrap_err().to_string(), "no steps recorded");
    }

    #[test]
    fn structure_errors() {
        assert!(matches!(Manifest::parse(""), Err(ManifestError::NoHeader)));
        let m = simulate(&small()).unwrap();
        let text = m.to_jsonl();
        let step = text.lines().nth(1).unwrap();
        assert!(matches!(Manifest::parse(step), Err(ManifestError::Structure { line: 1, .. })));
        assert!(matches!(Manifest::parse("{"), Err(ManifestError::Json { line: 1, .. })));
    }
}
