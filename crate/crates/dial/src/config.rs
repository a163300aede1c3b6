//! Run configuration, read from TOML. Every field has a default, so a
//! config file only needs the values it changes.

use dial_core::aggregation::Pooling;
use dial_core::selection::IntersectionPolicy;
use dial_core::sim::{CostModel, LoopConfig, SceneParams, SpeedProfile, Strategy};
use dial_core::ssl::DEFAULT_BETA;
use dial_core::Metric;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub uncertainty: UncertaintySection,
    pub aggregation: AggregationSection,
    pub selection: SelectionSection,
    pub ssl: SslSection,
    pub simulation: SimulationSection,
    pub cost: CostSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintySection {
    pub metric: String,
    pub passes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AggregationSection {
    pub radius: f64,
    pub voxel_length: f64,
    pub pooling: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionSection {
    pub per_step: usize,
    pub policy: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SslSection {
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub strategy: String,
    pub steps: usize,
    pub stride: usize,
    pub initial_disc: usize,
    pub scene_seed: u64,
    pub model_seed: u64,
    pub selection_seed: u64,
    pub frames: usize,
    pub points_per_frame: usize,
    pub rare_regions: usize,
    pub region_points_per_frame: usize,
    pub class_frequencies: Vec<f64>,
    pub min_speed: f64,
    pub max_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub hours_per_disc: f64,
    pub overhead: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hours_per_frame: Option<f64>,
}

impl Default for Config {
    fn default() -> Self {
        let scene = SceneParams::default();
        let run = LoopConfig::default();
        let cost = CostModel::default();
        let (min_speed, max_speed) = match scene.speed_profile {
            SpeedProfile::Variable { min, max } => (min, max),
            SpeedProfile::Constant(v) => (v, v),
        };
        Config {
            uncertainty: UncertaintySection { metric: run.metric.name().into(), passes: run.pass_count },
            aggregation: AggregationSection {
                radius: run.radius,
                voxel_length: run.voxel_length,
                pooling: run.pooling.name().into(),
            },
            selection: SelectionSection { per_step: run.per_step, policy: run.policy.name().into() },
            ssl: SslSection { beta: DEFAULT_BETA },
            simulation: SimulationSection {
                strategy: Strategy::DialExact.name().into(),
                steps: run.steps,
                stride: run.stride,
                initial_disc: run.initial_disc,
                scene_seed: 0,
                model_seed: 0,
                selection_seed: 0,
                frames: scene.frame_count,
                points_per_frame: scene.points_per_frame,
                rare_regions: scene.rare_region_count,
                region_points_per_frame: scene.region_points_per_frame,
                class_frequencies: scene.class_frequencies,
                min_speed,
                max_speed,
            },
            cost: CostSection {
                hours_per_disc: cost.hours_per_disc,
                overhead: [cost.framewise_overhead_range.0, cost.framewise_overhead_range.1],
                hours_per_frame: cost.hours_per_frame,
            },
        }
    }
}

impl Default for UncertaintySection {
    fn default() -> Self {
        Config::default_sections().0
    }
}
impl Default for AggregationSection {
    fn default() -> Self {
        Config::default_sections().1
    }
}
impl Default for SelectionSection {
    fn default() -> Self {
        Config::default_sections().2
    }
}
impl Default for SslSection {
    fn default() -> Self {
        Config::default_sections().3
    }
}
impl Default for SimulationSection {
    fn default() -> Self {
        Config::default_sections().4
    }
}
impl Default for CostSection {
    fn default() -> Self {
        Config::default_sections().5
    }
}

/// The default configuration, annotated.
pub const DEFAULT_CONFIG_TOML: &str = r#"# dial run configuration. Omitted keys take the values shown here.

[uncertainty]
# Point score: "mi" (mutual information), "ent", "conf" or "mar".
metric = "mi"
# Stochastic forward passes per point.
passes = 10

[aggregation]
# Disc radius in meters.
radius = 50.0
# Voxel edge length in meters.
voxel_length = 0.5
# Pooling inside a voxel: "min", "max" or "mean".
pooling = "min"

[selection]
# New discs per step.
per_step = 5
# "allow" lets new discs overlap; "prohibit" keeps every disc disjoint.
policy = "allow"

[ssl]
# Teacher momentum of the mean-teacher update.
beta = 0.99

[simulation]
# "dial-exact", "dial-greedy", "random" or "hpcs".
strategy = "dial-exact"
steps = 10
# Every stride-th pose is a candidate disc center.
stride = 5
# Candidate labeled before the first step.
initial_disc = 0
scene_seed = 0
model_seed = 0
selection_seed = 0
frames = 600
points_per_frame = 150
rare_regions = 12
region_points_per_frame = 6
class_frequencies = [0.35, 0.25, 0.15, 0.1, 0.07, 0.04, 0.025, 0.015]
# Ego speed band in m/s.
min_speed = 3.0
max_speed = 20.0

[cost]
hours_per_disc = 3.5
# Extra effort of framewise labeling, as a fraction.
overhead = [0.1, 0.8]
# hours_per_frame defaults to hours_per_disc / (1 + overhead midpoint).
"#;

fn unknown(kind: &'static str, value: &str) -> ConfigError {
    ConfigError::Unknown { kind, value: value.to_string() }
}

impl Config {
    fn default_sections() -> (UncertaintySection, AggregationSection, SelectionSection, SslSection, SimulationSection, CostSection) {
        let c = Config::default();
        (c.uncertainty, c.aggregation, c.selection, c.ssl, c.simulation, c.cost)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: Config = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.metric()?;
        self.pooling()?;
        self.policy()?;
        self.strategy()?;
        if !(0.0..1.0).contains(&self.ssl.beta) {
            return Err(ConfigError::Invalid(format!("beta must lie in [0, 1), got {}", self.ssl.beta)));
        }
        self.scene_params().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.cost_model().validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn metric(&self) -> Result<Metric, ConfigError> {
        Metric::from_name(&self.uncertainty.metric).ok_or_else(|| unknown("metric", &self.uncertainty.metric))
    }

    pub fn pooling(&self) -> Result<Pooling, ConfigError> {
        Pooling::from_name(&self.aggregation.pooling).ok_or_else(|| unknown("pooling", &self.aggregation.pooling))
    }

    pub fn policy(&self) -> Result<IntersectionPolicy, ConfigError> {
        IntersectionPolicy::from_name(&self.selection.policy).ok_or_else(|| unknown("policy", &self.selection.policy))
    }

    pub fn strategy(&self) -> Result<Strategy, ConfigError> {
        Strategy::from_name(&self.simulation.strategy).ok_or_else(|| unknown("strategy", &self.simulation.strategy))
    }

    pub fn scene_params(&self) -> SceneParams {
        let s = &self.simulation;
        let speed_profile = if s.min_speed == s.max_speed {
            SpeedProfile::Constant(s.min_speed)
        } else {
            SpeedProfile::Variable { min: s.min_speed, max: s.max_speed }
        };
        SceneParams {
            frame_count: s.frames,
            points_per_frame: s.points_per_frame,
            class_frequencies: s.class_frequencies.clone(),
            rare_region_count: s.rare_regions,
            region_points_per_frame: s.region_points_per_frame,
            speed_profile,
            ..SceneParams::default()
        }
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel {
            hours_per_disc: self.cost.hours_per_disc,
            framewise_overhead_range: (self.cost.overhead[0], self.cost.overhead[1]),
            hours_per_frame: self.cost.hours_per_frame,
        }
    }

    pub fn loop_config(&self) -> Result<LoopConfig, ConfigError> {
        Ok(LoopConfig {
            steps: self.simulation.steps,
            per_step: self.selection.per_step,
            radius: self.aggregation.radius,
            voxel_length: self.aggregation.voxel_length,
            pooling: self.pooling()?,
            metric: self.metric()?,
            stride: self.simulation.stride,
            initial_disc: self.simulation.initial_disc,
            policy: self.policy()?,
            pass_count: self.uncertainty.passes,
            model_seed: self.simulation.model_seed,
            selection_seed: self.simulation.selection_seed,
            cost: self.cost_model(),
        })
    }
}
