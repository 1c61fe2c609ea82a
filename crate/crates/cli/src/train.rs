use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use pseudolin::data::{parse_libsvm_with, split, ParseOptions, SplitSpec};
use pseudolin::learners::{Dataset, LinearModel, LossKind};
use pseudolin::search::{
    optimize_binary_f, optimize_macro_f, optimize_micro_f, CostGrid, EvalReport, GridSpec, OptResult, SearchConfig,
    SelectionRule, TraceRow,
};
use pseudolin::{MeasureKind, MeasureSpec};
use serde::{Deserialize, Serialize};

use crate::output::{read, Outputs};

pub const REPORT_SCHEMA: &str = "pseudolin.report/1";
pub const MODEL_SCHEMA: &str = "pseudolin.model/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Binary,
    Macro,
    Micro,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    Log,
    Hinge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    MaxMeasure,
    MinCost,
}

/// `paper`, `step:EPS` or `bracket[:WIDTH]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GridArg {
    Paper,
    Step { epsilon0: f64 },
    Bracket { min_width: f64 },
}

impl FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |v: &str| v.parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0);
        match s.split_once(':') {
            None if s == "paper" => Ok(GridArg::Paper),
            None if s == "bracket" => Ok(GridArg::Bracket { min_width: 0.1 }),
            Some(("step", v)) => number(v).map(|epsilon0| GridArg::Step { epsilon0 }).ok_or(format!("bad step `{v}`")),
            Some(("bracket", v)) => number(v).map(|min_width| GridArg::Bracket { min_width }).ok_or(format!("bad width `{v}`")),
            _ => Err(format!("expected paper, step:EPS or bracket[:WIDTH], got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CValues(pub Vec<f64>);

/// Comma-separated positive numbers; `2^K` is accepted for powers of two.
pub fn parse_c_grid(s: &str) -> Result<CValues, String> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let v = match tok.strip_prefix("2^") {
                Some(k) => k.parse::<i32>().map(|k| 2f64.powi(k)).map_err(|_| format!("bad exponent in `{tok}`"))?,
                None => tok.parse::<f64>().map_err(|_| format!("not a number: `{tok}`"))?,
            };
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(format!("C values must be positive, got `{tok}`"))
            }
        })
        .collect::<Result<_, _>>()
        .map(CValues)
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Training data (LIBSVM text).
    #[arg(long)]
    pub train: PathBuf,
    /// Separate test data; without it a quarter of the training file is held out.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Optimize the Jaccard index instead of F (binary and micro only).
    #[arg(long)]
    pub jaccard: bool,
    #[arg(long, value_enum, default_value_t = Loss::Log)]
    pub loss: Loss,
    /// Regularization values, e.g. `0.5,1,2` or `2^-3,2^0,2^3`.
    #[arg(long, value_parser = parse_c_grid, default_value = "2^-6,2^-5,2^-4,2^-3,2^-2,2^-1,2^0,2^1,2^2,2^3,2^4,2^5,2^6")]
    pub c_grid: CValues,
    #[arg(long, default_value = "paper")]
    pub cost_grid: GridArg,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub threshold: Switch,
    /// Grid-cell selection of the binary and macro searches.
    #[arg(long, value_enum, default_value_t = Selection::MaxMeasure)]
    pub selection: Selection,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub replicates: usize,
    /// Share of the non-test data used for validation.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = SplitSpec::DEFAULT_TEST_FRACTION)]
    pub test_fraction: f64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for grid cells; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: String,
    pub measure: MeasureSpec,
    pub models: Vec<LinearModel>,
}

#[derive(Serialize)]
struct Sizes {
    train: usize,
    val: usize,
    test: usize,
}

#[derive(Serialize)]
struct Outcome {
    best_t: Vec<f64>,
    best_c: Vec<f64>,
    val_value: f64,
    test: EvalReport,
    model: String,
}

#[derive(Serialize)]
struct Replicate {
    replicate: usize,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    sizes: Option<Sizes>,
    /// Keyed by strategy: `selected`, or `cmin` and `fmax` for micro runs.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    results: Vec<(String, Outcome)>,
}

#[derive(Serialize)]
struct Mean {
    strategy: String,
    replicates: usize,
    val_value: f64,
    /// Mean over the replicates whose test measure is defined.
    test_value: Option<f64>,
    test_defined: usize,
}

#[derive(Serialize)]
struct Report<'a> {
    schema: &'static str,
    version: &'static str,
    command: String,
    config: &'a TrainArgs,
    measure: MeasureSpec,
    seeds: Seeds,
    replicates: Vec<Replicate>,
    mean: Vec<Mean>,
    trace: Vec<String>,
}

#[derive(Serialize)]
struct Seeds {
    split_seed: u64,
    replicates: Vec<usize>,
}

#[derive(Serialize)]
struct Timing {
    wall_seconds: f64,
    replicate_seconds: Vec<f64>,
}

/// Loads train (and test) data with a shared feature space and label count.
fn load(args: &TrainArgs, multilabel: bool) -> Result<(Dataset, Option<Dataset>)> {
    let opts = ParseOptions { multilabel, ..Default::default() };
    let parse = |path: &Path, opts: &ParseOptions| -> Result<Dataset> {
        parse_libsvm_with(&read(path)?, opts).with_context(|| format!("parsing {}", path.display()))
    };
    let train = parse(&args.train, &opts)?;
    let Some(test_path) = &args.test else { return Ok((train, None)) };
    let test = parse(test_path, &opts)?;
    let shared = ParseOptions {
        min_dim: train.dim().max(test.dim()),
        min_labels: train.label_count().max(test.label_count()),
        ..opts
    };
    Ok((parse(&args.train, &shared)?, Some(parse(test_path, &shared)?)))
}

fn measure(task: Task, args: &TrainArgs, labels: usize) -> Result<MeasureSpec> {
    let kind = match (task, args.jaccard) {
        (Task::Binary, false) => MeasureKind::BinaryF,
        (Task::Binary, true) => MeasureKind::BinaryJaccard,
        (Task::Macro, false) => MeasureKind::MacroF,
        (Task::Macro, true) => bail!("--jaccard is not available for macro averaging"),
        (Task::Micro, false) => MeasureKind::MicroMultilabelF,
        (Task::Micro, true) => MeasureKind::MicroMultilabelJaccard,
    };
    let labels = if task == Task::Binary { 2 } else { labels };
    Ok(MeasureSpec::new(kind, args.beta, labels)?)
}

fn search_config(args: &TrainArgs, spec: &MeasureSpec) -> SearchConfig {
    let loss = match args.loss {
        Loss::Log => LossKind::Log,
        Loss::Hinge => LossKind::Hinge,
    };
    let grid = match args.cost_grid {
        GridArg::Paper => CostGrid::Paper,
        GridArg::Step { epsilon0 } => CostGrid::Step(GridSpec::full(spec, epsilon0)),
        GridArg::Bracket { min_width } => CostGrid::Bracket { t_min: 0.0, t_max: spec.max_level(), min_width },
    };
    SearchConfig {
        grid,
        c_values: args.c_grid.0.clone(),
        threshold: args.threshold == Switch::On,
        selection: match args.selection {
            Selection::MaxMeasure => SelectionRule::MaxMeasure,
            Selection::MinCost => SelectionRule::MinCost,
        },
        workers: args.workers,
        ..SearchConfig::new(loss)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

fn trace_rows(out: &mut String, replicate: usize, rows: &[TraceRow]) {
    for r in rows {
        writeln!(
            out,
            "{replicate}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.label,
            if r.t.is_nan() { "NA".into() } else { r.t.to_string() },
            fmt_opt(r.c),
            fmt_opt(r.val_f),
            fmt_opt(r.val_cost),
            fmt_opt(r.theta),
            u8::from(r.chosen)
        )
        .expect("writing to a String");
    }
}

const TRACE_HEADER: &str = "replicate\tlabel\tt\tC\tval_F\tval_cost\ttheta\tchosen\n";

/// Runs one train-* command. Returns whether every replicate completed.
pub fn run(task: Task, args: &TrainArgs, command: &str) -> Result<bool> {
    let started = Instant::now();
    if args.replicates == 0 {
        bail!("--replicates must be at least 1");
    }
    let (data, test_file) = load(args, task != Task::Binary)?;
    let spec = measure(task, args, data.label_count())?;
    let cfg = search_config(args, &spec);
    let split_spec = SplitSpec {
        seed: args.seed,
        validation_fraction: args.val_fraction,
        test_fraction: if test_file.is_some() { None } else { Some(args.test_fraction) },
        replicates: args.replicates,
    };
    split_spec.validate()?;

    let strategies: &[&str] = if task == Task::Micro { &["cmin", "fmax"] } else { &["selected"] };
    let mut traces: Vec<String> = strategies.iter().map(|_| TRACE_HEADER.to_string()).collect();
    let mut outputs = Outputs::default();
    let mut replicates = Vec::with_capacity(args.replicates);
    let mut seconds = Vec::with_capacity(args.replicates);

    for r in 0..args.replicates {
        let clock = Instant::now();
        let attempt = (|| -> Result<(Sizes, Vec<(String, OptResult)>)> {
            let parts = split(&data, &split_spec, r)?;
            let test = parts.test.as_ref().or(test_file.as_ref()).expect("a test set exists");
            let sizes = Sizes { train: parts.train.len(), val: parts.val.len(), test: test.len() };
            let mut results = match task {
                Task::Binary => vec![("selected".to_string(), optimize_binary_f(&parts.train, &parts.val, &spec, &cfg)?)],
                Task::Macro => vec![("selected".to_string(), optimize_macro_f(&parts.train, &parts.val, &spec, &cfg)?)],
                Task::Micro => {
                    let m = optimize_micro_f(&parts.train, &parts.val, &spec, &cfg)?;
                    vec![("cmin".to_string(), m.cmin), ("fmax".to_string(), m.fmax)]
                }
            };
            for (_, res) in &mut results {
                res.evaluate_on(test, &spec)?;
            }
            Ok((sizes, results))
        })();
        seconds.push(clock.elapsed().as_secs_f64());
        match attempt {
            Ok((sizes, results)) => {
                let mut outcomes = Vec::new();
                for (k, (name, res)) in results.into_iter().enumerate() {
                    trace_rows(&mut traces[k], r, &res.trace);
                    let model = format!("models/rep{r}-{name}.json");
                    outputs.add_json(
                        args.out.join(&model),
                        &ModelFile { schema: MODEL_SCHEMA.into(), measure: spec, models: res.models },
                    )?;
                    let test = res.test.expect("evaluated above");
                    outcomes.push((name, Outcome { best_t: res.best_t, best_c: res.best_c, val_value: res.val_value, test, model }));
                }
                replicates.push(Replicate { replicate: r, status: "ok".into(), sizes: Some(sizes), results: outcomes });
            }
            Err(e) => {
                log::error!("replicate {r} failed: {e:#}");
                replicates.push(Replicate { replicate: r, status: format!("failed: {e:#}"), sizes: None, results: Vec::new() });
            }
        }
    }

    let completed = replicates.iter().filter(|r| r.status == "ok").count();
    if completed == 0 {
        bail!("every replicate failed; first error: {}", replicates[0].status);
    }
    let mean = strategies
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let done: Vec<&Outcome> = replicates.iter().filter_map(|r| r.results.get(k).map(|o| &o.1)).collect();
            let tests: Vec<f64> = done.iter().filter_map(|o| o.test.value).collect();
            Mean {
                strategy: name.to_string(),
                replicates: done.len(),
                val_value: done.iter().map(|o| o.val_value).sum::<f64>() / done.len() as f64,
                test_value: (!tests.is_empty()).then(|| tests.iter().sum::<f64>() / tests.len() as f64),
                test_defined: tests.len(),
            }
        })
        .collect();
    let trace_names: Vec<String> = strategies
        .iter()
        .map(|s| if *s == "fmax" { "trace-fmax.tsv".to_string() } else { "trace.tsv".to_string() })
        .collect();
    for (name, body) in trace_names.iter().zip(traces) {
        outputs.add(args.out.join(name), body);
    }
    let report = Report {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config: args,
        measure: spec,
        seeds: Seeds { split_seed: args.seed, replicates: (0..args.replicates).collect() },
        replicates,
        mean,
        trace: trace_names,
    };
    outputs.add_json(args.out.join("report.json"), &report)?;
    outputs.add_json(
        args.out.join("timing.json"),
        &Timing { wall_seconds: started.elapsed().as_secs_f64(), replicate_seconds: seconds },
    )?;
    outputs.commit()?;
    Ok(completed == args.replicates)
}
