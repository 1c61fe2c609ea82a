use std::collections::BTreeMap;

use serde::Serialize;

use super::cells::{binary_spec, choose_threshold, profile_at, train_cells, Cell, Problem};
use super::{
    bracket_interval, grid_levels, BracketOutcome, CostGrid, OptResult, SearchConfig, SearchError, SelectionRule, TraceRow,
};
use crate::learners::{Dataset, LinearModel, ThresholdObjective};
use crate::metrics::{measure_value, MeasureSpec, Task};

/// A trained cell with its threshold and validation scores.
pub(crate) struct Scored {
    pub t: f64,
    pub c: f64,
    pub model: Option<LinearModel>,
    pub val_f: Option<f64>,
    pub val_cost: Option<f64>,
    pub status: String,
}

pub(crate) fn score_cell(
    cell: Cell,
    val: &Dataset,
    spec: &MeasureSpec,
    cfg: &SearchConfig,
    rule: SelectionRule,
) -> Result<Scored, SearchError> {
    let Cell { t, c, cost_fn, cost_fp, trivial, outcome, .. } = cell;
    let (mut model, scores) = match outcome {
        Ok(ok) => ok,
        Err(e) => return Ok(Scored { t, c, model: None, val_f: None, val_cost: None, status: format!("failed: {e}") }),
    };
    let objective = match rule {
        SelectionRule::MaxMeasure => ThresholdObjective::Measure(*spec),
        SelectionRule::MinCost => ThresholdObjective::Cost { fn_cost: cost_fn, fp_cost: cost_fp },
    };
    model.threshold = choose_threshold(trivial, &model, &scores, val, cfg.threshold, &objective)?;
    let e = profile_at(&scores, val, model.threshold)?;
    let val_f = measure_value(spec, &e).ok();
    let val_cost = Some(cost_fn * e.false_neg[0] + cost_fp * e.false_pos[0]);
    let status = if trivial { "always-negative".to_string() } else { status_name(&model) };
    Ok(Scored { t, c, model: Some(model), val_f, val_cost, status })
}

pub(crate) fn status_name(model: &LinearModel) -> String {
    model.status.name().to_string()
}

fn better_max(candidate: Option<f64>, incumbent: Option<f64>) -> bool {
    match (candidate, incumbent) {
        (Some(c), Some(i)) => c > i,
        (Some(_), None) => true,
        _ => false,
    }
}

/// Index of the winning cell; `cells` are ordered by `(t, C)`.
pub(crate) fn select(cells: &[Scored], rule: SelectionRule) -> Option<usize> {
    let usable = |s: &Scored| s.model.is_some();
    match rule {
        SelectionRule::MaxMeasure => {
            let mut best: Option<usize> = None;
            for (i, s) in cells.iter().enumerate().filter(|(_, s)| usable(s) && s.val_f.is_some()) {
                if best.map_or(true, |b| better_max(s.val_f, cells[b].val_f)) {
                    best = Some(i);
                }
            }
            best
        }
        SelectionRule::MinCost => {
            let mut per_t: BTreeMap<u64, usize> = BTreeMap::new();
            for (i, s) in cells.iter().enumerate().filter(|(_, s)| usable(s)) {
                let key = s.t.to_bits();
                let entry = per_t.entry(key).or_insert(i);
                if s.val_cost < cells[*entry].val_cost {
                    *entry = i;
                }
            }
            let mut winners: Vec<usize> = per_t.into_values().collect();
            winners.sort_by(|&a, &b| cells[a].t.total_cmp(&cells[b].t));
            let mut best: Option<usize> = None;
            for i in winners.into_iter().filter(|&i| cells[i].val_f.is_some()) {
                if best.map_or(true, |b| better_max(cells[i].val_f, cells[b].val_f)) {
                    best = Some(i);
                }
            }
            best
        }
    }
}

fn sort_cells(cells: &mut [Scored]) {
    cells.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.c.total_cmp(&b.c)));
}

fn train_levels(
    problem: &Problem,
    levels: &[f64],
    spec: &MeasureSpec,
    cfg: &SearchConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Cell>, SearchError> {
    let tasks: Vec<(usize, f64, f64)> = levels.iter().flat_map(|&t| cfg.c_values.iter().map(move |&c| (0, t, c))).collect();
    train_cells(std::slice::from_ref(problem), &tasks, spec, cfg, pool)
}

fn score_all(cells: Vec<Cell>, val: &Dataset, spec: &MeasureSpec, cfg: &SearchConfig) -> Result<Vec<Scored>, SearchError> {
    cells.into_iter().map(|cell| score_cell(cell, val, spec, cfg, cfg.selection)).collect()
}

fn level_score(cells: &[Scored], rule: SelectionRule) -> f64 {
    select(cells, rule).and_then(|i| cells[i].val_f).unwrap_or(f64::NEG_INFINITY)
}

fn binary_problem(train: &Dataset, val: &Dataset, spec: &MeasureSpec, cfg: &SearchConfig) -> Result<Problem, SearchError> {
    spec.validate()?;
    cfg.validate()?;
    if spec.kind.task() != Task::Binary {
        return Err(SearchError::Shape(format!("{} is not a binary measure", spec.kind)));
    }
    Problem::new(1, train.clone(), val.clone())
}

/// Selects the winning cell and assembles the result.
fn finish(mut cells: Vec<Scored>, rule: SelectionRule, bracket: Option<BracketOutcome>) -> Result<OptResult, SearchError> {
    sort_cells(&mut cells);
    if cells.iter().all(|s| s.model.is_none()) {
        return Err(SearchError::AllCellsFailed);
    }
    let best = select(&cells, rule).ok_or(SearchError::NoEligibleCell)?;
    let trace = cells
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRow {
            label: 1,
            t: s.t,
            c: Some(s.c),
            val_f: s.val_f,
            val_cost: s.val_cost,
            theta: s.model.as_ref().map(|m| m.threshold),
            chosen: i == best,
            status: s.status.clone(),
        })
        .collect();
    let chosen = &cells[best];
    Ok(OptResult {
        models: vec![chosen.model.clone().expect("selected cells are trained")],
        best_t: vec![chosen.t],
        best_c: vec![chosen.c],
        val_value: chosen.val_f.expect("selected cells have a defined measure"),
        trace,
        bracket,
        test: None,
    })
}

pub fn optimize_binary_f(train: &Dataset, val: &Dataset, spec: &MeasureSpec, cfg: &SearchConfig) -> Result<OptResult, SearchError> {
    let problem = binary_problem(train, val, spec, cfg)?;
    let pool = cfg.pool()?;
    let (cells, bracket) = match cfg.grid {
        CostGrid::Bracket { t_min, t_max, min_width } => {
            let mut all = Vec::new();
            let outcome = bracket_interval(
                |t| {
                    let row = score_all(train_levels(&problem, &[t], spec, cfg, &pool)?, &problem.val, spec, cfg)?;
                    let score = level_score(&row, cfg.selection);
                    all.extend(row);
                    Ok(score)
                },
                (t_min, t_max.min(spec.max_level())),
                min_width,
            )?;
            (all, Some(outcome))
        }
        ref grid => {
            let cells = train_levels(&problem, &grid_levels(grid, spec)?, spec, cfg, &pool)?;
            (score_all(cells, &problem.val, spec, cfg)?, None)
        }
    };
    finish(cells, cfg.selection, bracket)
}

/// Binary search with and without threshold tuning on the same trained
/// models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdComparison {
    pub tuned: OptResult,
    /// Every model keeps its threshold at 0.
    pub untuned: OptResult,
}

/// Runs [`optimize_binary_f`] once with thresholds tuned and once without,
/// training each grid cell a single time. `cfg.threshold` is ignored and
/// bracketing grids are rejected, since the two searches would visit
/// different levels.
pub fn compare_thresholding(
    train: &Dataset,
    val: &Dataset,
    spec: &MeasureSpec,
    cfg: &SearchConfig,
) -> Result<ThresholdComparison, SearchError> {
    if matches!(cfg.grid, CostGrid::Bracket { .. }) {
        return Err(SearchError::InvalidGrid("threshold comparison needs a fixed grid".into()));
    }
    let problem = binary_problem(train, val, spec, cfg)?;
    let pool = cfg.pool()?;
    let cells = train_levels(&problem, &grid_levels(&cfg.grid, spec)?, spec, cfg, &pool)?;
    let on = SearchConfig { threshold: true, ..cfg.clone() };
    let off = SearchConfig { threshold: false, ..cfg.clone() };
    let tuned = score_all(cells.clone(), &problem.val, spec, &on)?;
    let untuned = score_all(cells, &problem.val, spec, &off)?;
    Ok(ThresholdComparison {
        tuned: finish(tuned, cfg.selection, None)?,
        untuned: finish(untuned, cfg.selection, None)?,
    })
}

pub fn optimize_macro_f(train: &Dataset, val: &Dataset, spec: &MeasureSpec, cfg: &SearchConfig) -> Result<OptResult, SearchError> {
    spec.validate()?;
    if spec.kind.task() != crate::metrics::Task::Multilabel {
        return Err(SearchError::Shape(format!("{} is not a multilabel measure", spec.kind)));
    }
    let labels = spec.labels;
    if train.label_count() != labels || val.label_count() != labels || train.label_sets().is_none() {
        return Err(SearchError::Shape(format!("datasets must be multilabel with {labels} labels")));
    }
    let per_label_spec = binary_spec(spec);
    let mut out = OptResult {
        models: Vec::with_capacity(labels),
        best_t: Vec::with_capacity(labels),
        best_c: Vec::with_capacity(labels),
        val_value: 0.0,
        trace: Vec::new(),
        bracket: None,
        test: None,
    };
    let mut total = 0.0;
    for k in 1..=labels {
        let (tr, va) = (train.binary_view(k)?, val.binary_view(k)?);
        if tr.positive_fraction()? == 0.0 {
            log::warn!("label {k}: no positive training example, using the always-negative rule");
            let model = LinearModel::always_negative(tr.dim().max(va.dim()), cfg.loss);
            out.trace.push(TraceRow {
                label: k,
                t: f64::NAN,
                c: None,
                val_f: Some(0.0),
                val_cost: None,
                theta: Some(model.threshold),
                chosen: true,
                status: "always-negative".into(),
            });
            out.models.push(model);
            out.best_t.push(f64::NAN);
            out.best_c.push(f64::NAN);
            continue;
        }
        let r = optimize_binary_f(&tr, &va, &per_label_spec, cfg)?;
        total += r.val_value;
        out.trace.extend(r.trace.into_iter().map(|row| TraceRow { label: k, ..row }));
        out.models.extend(r.models);
        out.best_t.extend(r.best_t);
        out.best_c.extend(r.best_c);
    }
    out.val_value = total / labels as f64;
    Ok(out)
}
