use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use pseudolin::data::{best_cluster_subset, generate_galaxy, parse_libsvm_with, serialize_libsvm, GalaxySpec, ParseOptions};
use pseudolin::learners::LinearModel;
use pseudolin::metrics::{measure_value, Scalar, Task};
use pseudolin::pareto::{
    enumerate_profiles, figure_distribution, hull_candidates, pareto_front, parse_distribution, phi_bound_witness,
    verify_reduction_on, PhiWitness, PhiWitnessConfig, ReductionReport, DEFAULT_CAP,
};
use pseudolin::search::evaluate;
use pseudolin::{MeasureKind, MeasureSpec};
use serde::Serialize;

use crate::output::{read, Outputs};
use crate::train::ModelFile;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model file written by a train-* command.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// binary-f, jaccard, macro-f, micro-f or micro-jaccard.
    #[arg(long)]
    pub measure: MeasureKind,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `model` with zero weights for features it never saw, so that data with a
/// wider feature space can be scored.
fn widen(mut model: LinearModel, dim: usize) -> LinearModel {
    if model.dim() < dim {
        let bias = model.weights.pop().unwrap_or(0.0);
        model.weights.resize(dim, 0.0);
        model.weights.push(bias);
    }
    model
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let file: ModelFile =
        serde_json::from_str(&read(&args.model)?).with_context(|| format!("parsing {}", args.model.display()))?;
    let task = args.measure.task();
    let labels = if task == Task::Binary { 2 } else { file.models.len() };
    let spec = MeasureSpec::new(args.measure, args.beta, labels)?;
    if task == Task::Multiclass {
        bail!("multiclass measures have no trained models to evaluate");
    }
    let opts = ParseOptions {
        multilabel: task == Task::Multilabel,
        min_labels: labels,
        min_dim: file.models.iter().map(LinearModel::dim).max().unwrap_or(0),
        ..Default::default()
    };
    let ds = parse_libsvm_with(&read(&args.data)?, &opts).with_context(|| format!("parsing {}", args.data.display()))?;
    let models: Vec<LinearModel> = file.models.into_iter().map(|m| widen(m, ds.dim())).collect();
    let report = evaluate(&models, &ds, &spec)?;
    emit(args.out.as_ref(), &report)
}

fn emit(out: Option<&PathBuf>, value: &impl Serialize) -> Result<()> {
    match out {
        Some(path) => {
            let mut o = Outputs::default();
            o.add_json(path, value)?;
            o.commit()
        }
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistTask {
    Binary,
    Multilabel,
    Multiclass,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    /// Distribution table (`mass p(1|x)` per line for binary tasks); the
    /// bundled three-point example when omitted.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DistTask::Binary)]
    pub task: DistTask,
    /// Defaults to binary-f, micro-f or multiclass-micro-f by task.
    #[arg(long)]
    pub measure: Option<MeasureKind>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Radius of the cost perturbations of the bound check.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon0: f64,
    /// Suboptimality allowed to the cost-sensitive learner in the bound check.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon1: f64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ProfileRow {
    index: usize,
    assignment: Vec<u32>,
    false_neg: Vec<f64>,
    false_pos: Vec<f64>,
    /// The same entries as exact fractions.
    exact_false_neg: Vec<String>,
    exact_false_pos: Vec<String>,
    value: Option<f64>,
    on_front: bool,
    on_hull: bool,
}

#[derive(Serialize)]
struct ReductionCheck {
    holds: bool,
    #[serde(flatten)]
    report: ReductionReport,
}

#[derive(Serialize)]
struct BoundCheck {
    config: PhiWitnessConfig,
    holds: bool,
    #[serde(flatten)]
    witness: PhiWitness,
}

#[derive(Serialize)]
struct ParetoReport {
    schema: &'static str,
    measure: MeasureSpec,
    points: usize,
    profiles: Vec<ProfileRow>,
    front: Vec<usize>,
    /// Front points minimizing some positive weighted sum; binary tasks only.
    hull: Option<Vec<usize>>,
    reduction: ReductionCheck,
    bound: BoundCheck,
}

pub fn pareto_demo(args: &ParetoArgs) -> Result<()> {
    let task = match args.task {
        DistTask::Binary => Task::Binary,
        DistTask::Multilabel => Task::Multilabel,
        DistTask::Multiclass => Task::Multiclass,
    };
    let dist = match &args.dist {
        Some(path) => parse_distribution(&read(path)?, task).with_context(|| format!("parsing {}", path.display()))?,
        None if task == Task::Binary => figure_distribution(),
        None => bail!("--dist is required for non-binary tasks"),
    };
    let kind = args.measure.unwrap_or(match task {
        Task::Binary => MeasureKind::BinaryF,
        Task::Multilabel => MeasureKind::MicroMultilabelF,
        Task::Multiclass => MeasureKind::MicroMulticlassF,
    });
    if kind.task() != task {
        bail!("{kind} does not apply to {task:?} distributions");
    }
    let spec = MeasureSpec::new(kind, args.beta, dist.labels())?;

    let ps = enumerate_profiles(&dist, DEFAULT_CAP)?;
    let front = pareto_front(&ps);
    let hull = if task == Task::Binary { Some(hull_candidates(&ps)?) } else { None };
    let reduction = verify_reduction_on(&ps, &dist.priors(), &spec)?;
    let config = PhiWitnessConfig { epsilon0: args.epsilon0, epsilon1: args.epsilon1, samples: args.samples, seed: args.seed };
    let witness = phi_bound_witness(&dist.to_f64(), &spec, &config)?;

    let profiles = ps
        .entries
        .iter()
        .enumerate()
        .map(|(i, (assignment, e))| ProfileRow {
            index: i,
            assignment: assignment.clone(),
            false_neg: e.false_neg.iter().map(Scalar::approx).collect(),
            false_pos: e.false_pos.iter().map(Scalar::approx).collect(),
            exact_false_neg: e.false_neg.iter().map(ToString::to_string).collect(),
            exact_false_pos: e.false_pos.iter().map(ToString::to_string).collect(),
            value: measure_value(&spec, e).ok().map(|v| v.approx()),
            on_front: front.contains(&i),
            on_hull: hull.as_ref().is_some_and(|h| h.contains(&i)),
        })
        .collect();
    log::info!(
        "{} profiles, {} on the front, {} hull vertices, reduction {}, bound {}",
        ps.len(),
        front.len(),
        hull.as_ref().map_or(0, Vec::len),
        if reduction.holds() { "PASS" } else { "FAIL" },
        if witness.violations == 0 { "PASS" } else { "FAIL" }
    );
    let report = ParetoReport {
        schema: "pseudolin.pareto/1",
        measure: spec,
        points: dist.points().len(),
        profiles,
        front,
        hull,
        reduction: ReductionCheck { holds: reduction.holds(), report: reduction },
        bound: BoundCheck { config, holds: witness.violations == 0, witness },
    };
    emit(args.out.as_ref(), &report)
}

#[derive(Debug, Args)]
pub struct GalaxyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// LIBSVM output; cluster ids go to `<out>.clusters`, one per line.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn galaxy_gen(args: &GalaxyArgs) -> Result<()> {
    let spec = GalaxySpec::new(args.n, args.seed);
    let g = generate_galaxy(&spec)?;
    let (clusters, f) = best_cluster_subset(&spec.priors, &spec.positive_rates, 1.0);
    log::info!("best cluster union {clusters:?} has population F1 {f:.4}");
    let mut sidecar = args.out.clone().into_os_string();
    sidecar.push(".clusters");
    let ids: String = g.clusters.iter().map(|z| format!("{z}\n")).collect();
    let mut o = Outputs::default();
    o.add(&args.out, serialize_libsvm(&g.dataset)?);
    o.add(PathBuf::from(sidecar), ids);
    o.commit()
}
