use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dial_core::aggregation::{disc_scores_sparse, Pooling, VoxelGrid};
use dial_core::scene::{candidate_centers, disc_cover, DistanceMode};
use dial_core::selection::{
    select_hpcs, select_random, solve_bruteforce, solve_exact, solve_greedy, IntersectionPolicy, SelectionProblem,
};
use dial_core::sim::Strategy;
use dial_core::Metric;
use serde_json::json;

use dial::config::{Config, DEFAULT_CONFIG_TOML};
use dial::error::{Category, CliError};
use dial::instance::{parse_instance, write_instance};
use dial::manifest::{self, Manifest};
use dial::poses::parse_poses;
use dial::tensor::read_probability_tensor;
use dial::text::{parse_ids, parse_points, parse_scores, write_scores};

/// Version of the JSON documents printed by `select`.
const RESULT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "dial", version, about = "Discwise active learning for sequential point clouds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-point scores from a probability tensor, one per line.
    Uncertainty {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricArg::Mi)]
        metric: MetricArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Voxel grid and disc scores from scored points and a trajectory.
    Aggregate {
        #[command(flatten)]
        grid: GridArgs,
        /// Writes the voxel grid here: `i j k cx cy cz weight points` per voxel.
        #[arg(long)]
        grid_out: Option<PathBuf>,
        /// Writes a selection instance here.
        #[arg(long)]
        problem_out: Option<PathBuf>,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Chooses the next discs to label.
    Select {
        /// Selection instance; otherwise the grid inputs are required.
        #[arg(long, conflicts_with_all = ["points", "scores", "poses"])]
        problem: Option<PathBuf>,
        #[command(flatten)]
        grid: OptionalGridArgs,
        #[command(flatten)]
        params: ProblemArgs,
        #[arg(long, value_enum, default_value_t = StrategyArg::Exact)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Frame point count per candidate, one per line (hpcs only).
        #[arg(long)]
        point_counts: Option<PathBuf>,
    },
    /// Runs the active learning loop on a synthetic scene and writes the manifest.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        per_step: Option<usize>,
        #[arg(long, value_enum)]
        strategy: Option<SimStrategyArg>,
        /// Sets the scene, model and selection seeds at once.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        policy: Option<PolicyArg>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Summarizes a manifest.
    Report {
        manifest: PathBuf,
    },
    /// Prints the default configuration.
    Config,
}

#[derive(Args)]
struct GridArgs {
    /// Global points, `x y z` per line.
    #[arg(long)]
    points: PathBuf,
    /// One score per point.
    #[arg(long)]
    scores: PathBuf,
    /// Trajectory poses; every `stride`-th pose is a candidate center.
    #[arg(long)]
    poses: PathBuf,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Args)]
struct OptionalGridArgs {
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    poses: Option<PathBuf>,
    #[command(flatten)]
    geometry: GeometryArgs,
}

#[derive(Args)]
struct GeometryArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    stride: usize,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    voxel_length: Option<f64>,
    #[arg(long, value_enum)]
    pooling: Option<PoolingArg>,
}

#[derive(Args)]
struct ProblemArgs {
    /// New discs to choose.
    #[arg(long)]
    budget: Option<usize>,
    /// Already labeled discs, comma separated.
    #[arg(long)]
    fixed: Option<String>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Mi,
    Ent,
    Conf,
    Mar,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolingArg {
    Min,
    Max,
    Mean,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Allow,
    Prohibit,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exact,
    Greedy,
    Random,
    Hpcs,
    Bruteforce,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimStrategyArg {
    DialExact,
    DialGreedy,
    Random,
    Hpcs,
}

impl MetricArg {
    fn metric(self) -> Metric {
        match self {
            MetricArg::Mi => Metric::MutualInformation,
            MetricArg::Ent => Metric::Entropy,
            MetricArg::Conf => Metric::Confidence,
            MetricArg::Mar => Metric::Margin,
        }
    }
}

impl PoolingArg {
    fn pooling(self) -> Pooling {
        match self {
            PoolingArg::Min => Pooling::Min,
            PoolingArg::Max => Pooling::Max,
            PoolingArg::Mean => Pooling::Mean,
        }
    }
}

impl PolicyArg {
    fn policy(self) -> IntersectionPolicy {
        match self {
            PolicyArg::Allow => IntersectionPolicy::Allow,
            PolicyArg::Prohibit => IntersectionPolicy::Prohibit,
        }
    }
}

impl StrategyArg {
    fn name(self) -> &'static str {
        match self {
            StrategyArg::Exact => "exact",
            StrategyArg::Greedy => "greedy",
            StrategyArg::Random => "random",
            StrategyArg::Hpcs => "hpcs",
            StrategyArg::Bruteforce => "bruteforce",
        }
    }
}

impl SimStrategyArg {
    fn strategy(self) -> Strategy {
        match self {
            SimStrategyArg::DialExact => Strategy::DialExact,
            SimStrategyArg::DialGreedy => Strategy::DialGreedy,
            SimStrategyArg::Random => Strategy::Random,
            SimStrategyArg::Hpcs => Strategy::Hpcs,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(output: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match output {
        Some(path) => write(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        Some(path) => Ok(Config::from_toml(&read(path)?)?),
        None => Ok(Config::default()),
    }
}

struct Scored {
    grid: VoxelGrid,
    weights: Vec<f64>,
    covers: Vec<Vec<usize>>,
}

fn scored_grid(points: &Path, scores: &Path, poses: &Path, geometry: &GeometryArgs) -> Result<Scored, CliError> {
    let config = load_config(geometry.config.as_deref())?;
    let radius = geometry.radius.unwrap_or(config.aggregation.radius);
    let voxel_length = geometry.voxel_length.unwrap_or(config.aggregation.voxel_length);
    let pooling = match geometry.pooling {
        Some(p) => p.pooling(),
        None => config.pooling()?,
    };
    let points = parse_points(&read(points)?)?;
    let scores = parse_scores(&read(scores)?)?;
    let trajectory = parse_poses(&read(poses)?)?;
    let grid = VoxelGrid::build(&points, voxel_length)?;
    let weights = grid.pool(&scores, pooling)?;
    let centers = grid.centers();
    let covers = candidate_centers(&trajectory, geometry.stride, radius)?
        .iter()
        .map(|c| disc_cover(c, &centers, DistanceMode::Planar))
        .collect();
    Ok(Scored { grid, weights, covers })
}

fn fixed_ids(arg: Option<&str>) -> Result<Vec<usize>, CliError> {
    Ok(arg.map(parse_ids).transpose()?.unwrap_or_default())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Uncertainty { tensor, metric, output } => {
            let stack = read_probability_tensor(&tensor)?;
            emit(output.as_deref(), &write_scores(&stack.score(metric.metric()).scores))
        }
        Command::Aggregate { grid, grid_out, problem_out, problem } => {
            let scored = scored_grid(&grid.points, &grid.scores, &grid.poses, &grid.geometry)?;
            if let Some(path) = grid_out {
                let mut text = String::new();
                for (v, w) in scored.grid.voxels().iter().zip(&scored.weights) {
                    let [i, j, k] = v.key;
                    let [x, y, z] = v.center;
                    text.push_str(&format!("{i} {j} {k} {x} {y} {z} {w} {}\n", v.members.len()));
                }
                write(&path, &text)?;
            }
            if let Some(path) = problem_out {
                let built = SelectionProblem::new(
                    scored.weights.clone(),
                    scored.covers.clone(),
                    problem.budget.unwrap_or(Config::default().selection.per_step),
                    fixed_ids(problem.fixed.as_deref())?,
                    problem.policy.map_or(IntersectionPolicy::Allow, PolicyArg::policy),
                )?;
                write(&path, &write_instance(&built))?;
            }
            let mut text = String::new();
            for d in disc_scores_sparse(&scored.weights, &scored.covers) {
                text.push_str(&format!("{}\t{}\n", d.candidate_id, d.alpha));
            }
            emit(None, &text)
        }
        Command::Select { problem, grid, params, strategy, seed, point_counts } => {
            let mut instance = match problem {
                Some(path) => parse_instance(&read(&path)?)?,
                None => {
                    let (Some(points), Some(scores), Some(poses)) = (&grid.points, &grid.scores, &grid.poses) else {
                        return Err(CliError::new(
                            Category::Invalid,
                            "either --problem or all of --points, --scores and --poses is required",
                        ));
                    };
                    let scored = scored_grid(points, scores, poses, &grid.geometry)?;
                    SelectionProblem::new(scored.weights, scored.covers, 1, vec![], IntersectionPolicy::Allow)?
                }
            };
            if params.budget.is_some() || params.fixed.is_some() || params.policy.is_some() {
                instance = instance.with_step(
                    params.budget.unwrap_or(instance.budget()),
                    match &params.fixed {
                        Some(f) => fixed_ids(Some(f))?,
                        None => instance.fixed().to_vec(),
                    },
                    params.policy.map_or(instance.policy(), PolicyArg::policy),
                )?;
            }
            let solution = match strategy {
                StrategyArg::Exact => solve_exact(&instance)?,
                StrategyArg::Greedy => solve_greedy(&instance)?,
                StrategyArg::Bruteforce => solve_bruteforce(&instance)?,
                StrategyArg::Random => select_random(&instance, seed)?,
                StrategyArg::Hpcs => {
                    let Some(path) = point_counts else {
                        return Err(CliError::new(Category::Invalid, "hpcs needs --point-counts"));
                    };
                    let counts = parse_ids(&read(&path)?)?;
                    select_hpcs(&instance, &counts)?
                }
            };
            let doc = json!({
                "format": "dial-selection-result",
                "version": RESULT_VERSION,
                "strategy": strategy.name(),
                "chosen": solution.chosen,
                "new": solution.new_discs(&instance),
                "objective": solution.objective,
                "certificate": solution.certificate.name(),
            });
            emit(None, &format!("{doc}\n"))
        }
        Command::Simulate { config, steps, per_step, strategy, seed, policy, output } => {
            let mut config = load_config(config.as_deref())?;
            if let Some(steps) = steps {
                config.simulation.steps = steps;
            }
            if let Some(n) = per_step {
                config.selection.per_step = n;
            }
            if let Some(s) = strategy {
                config.simulation.strategy = s.strategy().name().into();
            }
            if let Some(seed) = seed {
                config.simulation.scene_seed = seed;
                config.simulation.model_seed = seed;
                config.simulation.selection_seed = seed;
            }
            if let Some(p) = policy {
                config.selection.policy = p.policy().name().into();
            }
            let manifest = manifest::simulate(&config)?;
            emit(output.as_deref(), &manifest.to_jsonl())?;
            if let Some(halt) = &manifest.halt {
                return Err(CliError::new(
                    Category::Infeasible,
                    format!("run halted at step {}: {}", halt.step, halt.reason),
                ));
            }
            Ok(())
        }
        Command::Report { manifest } => {
            let parsed = Manifest::parse(&read(&manifest)?)?;
            emit(None, &manifest::report(&parsed)?)
        }
        Command::Config => emit(None, DEFAULT_CONFIG_TOML),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.category.exit_code())
        }
    }
}
