//! The active learning loop: predict, score, pool, select, label, repeat.

use alloc::vec;
use alloc::vec::Vec;

use super::budget::CostModel;
use super::scene::SyntheticScene;
use super::surrogate::{predict, SurrogateModel, DEFAULT_PASS_COUNT};
use super::SimError;
use crate::aggregation::{Pooling, VoxelGrid, DEFAULT_VOXEL_LENGTH};
use crate::scene::{candidate_centers, classify_from_flags, disc_cover, DistanceMode, FrameLabelStatus, LabelStatus};
use crate::selection::{
    select_hpcs, select_random, solve_exact, solve_greedy, Certificate, IntersectionPolicy, SelectionError,
    SelectionProblem,
};
use crate::uncertainty::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    DialExact,
    DialGreedy,
    Random,
    Hpcs,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::DialExact, Strategy::DialGreedy, Strategy::Random, Strategy::Hpcs];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::DialExact => "dial-exact",
            Strategy::DialGreedy => "dial-greedy",
            Strategy::Random => "random",
            Strategy::Hpcs => "hpcs",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Strategy::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub steps: usize,
    /// New discs per step.
    pub per_step: usize,
    /// Disc radius, in meters.
    pub radius: f64,
    pub voxel_length: f64,
    pub pooling: Pooling,
    pub metric: Metric,
    /// Every `stride`-th pose is a candidate disc center.
    pub stride: usize,
    /// Candidate index of the disc labeled before the first step.
    pub initial_disc: usize,
    /// Intersection policy of the two uncertainty-driven strategies. The
    /// baselines always prohibit intersections.
    pub policy: IntersectionPolicy,
    pub pass_count: usize,
    pub model_seed: u64,
    pub selection_seed: u64,
    pub cost: CostModel,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            steps: 10,
            per_step: 5,
            radius: 50.0,
            voxel_length: DEFAULT_VOXEL_LENGTH,
            pooling: Pooling::Min,
            metric: Metric::MutualInformation,
            stride: 5,
            initial_disc: 0,
            policy: IntersectionPolicy::Allow,
            pass_count: DEFAULT_PASS_COUNT,
            model_seed: 0,
            selection_seed: 0,
            cost: CostModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    /// Objective of this step's selection; the plain union weight of the
    /// initial disc at step 0.
    pub objective: f64,
    pub certificate: Option<Certificate>,
    pub labeled_fraction: f64,
    /// Labeled fraction of the points of each class; classes without
    /// points report 0.
    pub class_coverage: Vec<f64>,
    /// Labeled fraction of the points inside planted regions.
    pub planted_coverage: f64,
    /// Pooled uncertainty summed over voxels outside every labeled disc,
    /// under the model trained on this step's labels.
    pub unlabeled_uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ALState {
    pub step: usize,
    /// Discs added at this step (the initial disc at step 0).
    pub selected: Vec<usize>,
    /// Every labeled disc, ascending.
    pub labeled: Vec<usize>,
    pub frames: Vec<FrameLabelStatus>,
    pub hours: f64,
    pub familiarity: Vec<u64>,
    pub metrics: StepMetrics,
}

impl ALState {
    /// Frames per status: fully labeled, weakly labeled, unlabeled.
    pub fn status_counts(&self) -> [usize; 3] {
        let mut out = [0; 3];
        for f in &self.frames {
            out[match f.status {
                LabelStatus::FullyLabeled => 0,
                LabelStatus::WeaklyLabeled => 1,
                LabelStatus::Unlabeled => 2,
            }] += 1;
        }
        out
    }
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct Halt {
    pub step: usize,
    pub error: SelectionError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunHistory {
    pub strategy: Strategy,
    /// Point count of the frame behind each candidate.
    pub candidate_point_counts: Vec<usize>,
    pub states: Vec<ALState>,
    pub halted: Option<Halt>,
}

impl RunHistory {
    pub fn last(&self) -> &ALState {
        self.states.last().expect("a history holds at least the initial state")
    }
}

struct Geometry {
    grid: VoxelGrid,
    covers: Vec<Vec<usize>>,
    /// Points inside each candidate, ascending.
    members: Vec<Vec<usize>>,
    frame_ids: Vec<u32>,
    counts: Vec<usize>,
}

fn geometry(scene: &SyntheticScene, config: &LoopConfig) -> Result<Geometry, SimError> {
    let cloud = scene.cloud();
    let positions = cloud.positions();
    let grid = VoxelGrid::build(&positions, config.voxel_length)?;
    let centers = grid.centers();
    let candidates = candidate_centers(&scene.trajectory, config.stride, config.radius)?;
    let covers = candidates.iter().map(|c| disc_cover(c, &centers, DistanceMode::Planar)).collect();
    let members = candidates
        .iter()
        .map(|c| (0..positions.len()).filter(|&i| c.contains(positions[i], DistanceMode::Planar)).collect())
        .collect();
    let counts = (0..candidates.len()).map(|i| scene.frames[i * config.stride].points.len()).collect();
    Ok(Geometry { grid, covers, members, frame_ids: scene.frames.iter().map(|f| f.id).collect(), counts })
}

/// Runs `config.steps` selection rounds. A selection failure stops the run;
/// the states reached so far are kept and the failure is reported in
/// [`RunHistory::halted`].
pub fn run_loop(scene: &SyntheticScene, strategy: Strategy, config: &LoopConfig) -> Result<RunHistory, SimError> {
    config.cost.validate()?;
    if config.per_step == 0 {
        return Err(SimError::BadParams("at least one disc per step"));
    }
    let geo = geometry(scene, config)?;
    let candidates = geo.covers.len();
    if config.initial_disc >= candidates {
        return Err(SimError::InitialDisc { index: config.initial_disc, candidates });
    }
    let cloud = scene.cloud();
    let c = scene.class_count;
    let class_totals = tally(&scene.labels, (0..scene.labels.len()).collect::<Vec<_>>().as_slice(), c);
    let planted_total = scene.region_of.iter().filter(|r| r.is_some()).count();

    let mut model = SurrogateModel::new(c, config.model_seed);
    model.pass_count = config.pass_count;
    let mut labeled_points = vec![false; scene.point_count()];
    let mut labeled: Vec<usize> = Vec::new();
    let mut states = Vec::with_capacity(config.steps + 1);
    let mut halted = None;
    let mut pending: Option<(Vec<usize>, f64, Option<Certificate>)> = Some((vec![config.initial_disc], 0.0, None));

    for step in 0..=config.steps {
        // Label the discs chosen last round (or the initial disc), then
        // let the surrogate learn from them.
        let Some((selected, objective, certificate)) = pending.take() else { break };
        let mut fresh = vec![0u64; c];
        for &d in &selected {
            for &i in &geo.members[d] {
                if !labeled_points[i] {
                    labeled_points[i] = true;
                    fresh[scene.labels[i]] += 1;
                }
            }
        }
        labeled.extend_from_slice(&selected);
        labeled.sort_unstable();
        model.observe(&fresh);

        let stack = predict(&model, &scene.labels, step as u64)?;
        let scores = stack.score(config.metric).scores;
        let weights = geo.grid.pool(&scores, config.pooling)?;
        let objective = if step == 0 { union(&weights, &geo.covers, &labeled) } else { objective };

        let mut covered = vec![false; weights.len()];
        for &d in &labeled {
            for &j in &geo.covers[d] {
                covered[j] = true;
            }
        }
        let unlabeled_uncertainty = weights.iter().zip(&covered).filter(|(_, &c)| !c).map(|(w, _)| w).sum();
        let labeled_idx: Vec<usize> = (0..labeled_points.len()).filter(|&i| labeled_points[i]).collect();
        let per_class = tally(&scene.labels, &labeled_idx, c);
        let planted_hit = labeled_idx.iter().filter(|&&i| scene.region_of[i].is_some()).count();
        states.push(ALState {
            step,
            selected,
            labeled: labeled.clone(),
            frames: classify_from_flags(&cloud, &labeled_points, &geo.frame_ids),
            hours: labeled.len() as f64 * config.cost.hours_per_disc,
            familiarity: model.familiarity().to_vec(),
            metrics: StepMetrics {
                objective,
                certificate,
                labeled_fraction: ratio(labeled_idx.len(), labeled_points.len()),
                class_coverage: (0..c).map(|k| ratio(per_class[k] as usize, class_totals[k] as usize)).collect(),
                planted_coverage: ratio(planted_hit, planted_total),
                unlabeled_uncertainty,
            },
        });
        if step == config.steps {
            break;
        }

        let policy = match strategy {
            Strategy::DialExact | Strategy::DialGreedy => config.policy,
            Strategy::Random | Strategy::Hpcs => IntersectionPolicy::Prohibit,
        };
        let outcome = SelectionProblem::new(weights, geo.covers.clone(), config.per_step, labeled.clone(), policy)
            .and_then(|problem| {
                let solution = match strategy {
                    Strategy::DialExact => solve_exact(&problem),
                    Strategy::DialGreedy => solve_greedy(&problem),
                    Strategy::Random => select_random(&problem, config.selection_seed.wrapping_add(step as u64)),
                    Strategy::Hpcs => select_hpcs(&problem, &geo.counts),
                }?;
                Ok((solution.new_discs(&problem), solution.objective, Some(solution.certificate)))
            });
        match outcome {
            Ok(next) => pending = Some(next),
            Err(error) => halted = Some(Halt { step: step + 1, error }),
        }
    }
    Ok(RunHistory { strategy, candidate_point_counts: geo.counts, states, halted })
}

fn tally(labels: &[usize], idx: &[usize], classes: usize) -> Vec<u64> {
    let mut out = vec![0u64; classes];
    for &i in idx {
        out[labels[i]] += 1;
    }
    out
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn union(weights: &[f64], covers: &[Vec<usize>], discs: &[usize]) -> f64 {
    let mut hit = vec![false; weights.len()];
    for &d in discs {
        for &j in &covers[d] {
            hit[j] = true;
        }
    }
    weights.iter().zip(&hit).filter(|(_, &h)| h).map(|(w, _)| w).sum()
}

#[cfg(test)]
mod tests {
    use super::super::scene::{generate_scene, SceneParams};
    use super::*;

    fn small_scene() -> SyntheticScene {
        let p = SceneParams { frame_count: 120, points_per_frame: 40, rare_region_count: 4, ..SceneParams::default() };
        generate_scene(1, &p).unwrap()
    }

    #[test]
    fn zero_steps_keep_initial_disc() {
        let cfg = LoopConfig { steps: 0, ..LoopConfig::default() };
        let h = run_loop(&small_scene(), Strategy::DialExact, &cfg).unwrap();
        assert_eq!(h.states.len(), 1);
        assert_eq!(h.states[0].labeled, vec![0]);
        assert_eq!(h.states[0].hours, 3.5);
    }

    #[test]
    fn disc_count_grows_by_per_step() {
        let cfg = LoopConfig { steps: 3, per_step: 2, ..LoopConfig::default() };
        let h = run_loop(&small_scene(), Strategy::DialGreedy, &cfg).unwrap();
        assert!(h.halted.is_none());
        for (t, s) in h.states.iter().enumerate() {
            assert_eq!(s.labeled.len(), 1 + 2 * t);
        }
    }

    #[test]
    fn bad_initial_disc() {
        let cfg = LoopConfig { initial_disc: 10_000, ..LoopConfig::default() };
        assert!(matches!(run_loop(&small_scene(), Strategy::Random, &cfg), Err(SimError::InitialDisc { .. })));
    }

    #[test]
    fn crowded_baseline_halts_with_history() {
        let cfg = LoopConfig { steps: 50, per_step: 5, ..LoopConfig::default() };
        let h = run_loop(&small_scene(), Strategy::Hpcs, &cfg).unwrap();
        let halt = h.halted.as_ref().unwrap();
        assert!(matches!(halt.error, SelectionError::Infeasible(_)));
        assert_eq!(h.states.len(), halt.step);
    }
}
