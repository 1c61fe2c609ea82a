use serde::Serialize;

use super::binary::status_name;
use super::cells::{binary_spec, choose_threshold, profile_at, train_cells, Problem};
use super::{bracket_interval, grid_levels, CostGrid, OptResult, SearchConfig, SearchError, TraceRow};
use crate::learners::{Dataset, LinearModel, ThresholdObjective};
use crate::metrics::{measure_value, ErrorProfile, MeasureKind, MeasureSpec};

/// Threshold, validation profile and derived numbers of one cell under
/// one threshold objective.
#[derive(Clone)]
struct Choice {
    theta: f64,
    profile: ErrorProfile,
    f: Option<f64>,
    cost: f64,
}

struct LabelCell {
    label: usize,
    t: f64,
    c: f64,
    model: Option<LinearModel>,
    by_cost: Option<Choice>,
    by_measure: Option<Choice>,
    status: String,
}

/// The two strategies compared on the same trained models.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicroOutcome {
    /// Shared `t` for every label; per-label `C` and threshold by least
    /// validation cost; `t` by largest validation micro measure.
    pub cmin: OptResult,
    /// Per label, the `(t, C, threshold)` of largest validation F of that
    /// label alone, i.e. the macro-optimal models, scored by the micro
    /// measure.
    pub fmax: OptResult,
}

fn cells_at(
    problems: &[Problem],
    levels: &[f64],
    spec: &MeasureSpec,
    cfg: &SearchConfig,
    pool: &rayon::ThreadPool,
) -> Result<Vec<LabelCell>, SearchError> {
    let tasks: Vec<(usize, f64, f64)> = levels
        .iter()
        .flat_map(|&t| (0..problems.len()).flat_map(move |p| cfg.c_values.iter().map(move |&c| (p, t, c))))
        .collect();
    let per_label = binary_spec(spec);
    let cells = train_cells(problems, &tasks, spec, cfg, pool)?;
    cells
        .into_iter()
        .zip(&tasks)
        .map(|(cell, &(p, _, _))| {
            let val = &problems[p].val;
            let (model, scores) = match cell.outcome {
                Ok(ok) => ok,
                Err(e) => {
                    return Ok(LabelCell {
                        label: cell.label,
                        t: cell.t,
                        c: cell.c,
                        model: None,
                        by_cost: None,
                        by_measure: None,
                        status: format!("failed: {e}"),
                    })
                }
            };
            let choose = |objective: ThresholdObjective| -> Result<Choice, SearchError> {
                let theta = choose_threshold(cell.trivial, &model, &scores, val, cfg.threshold, &objective)?;
                let profile = profile_at(&scores, val, theta)?;
                Ok(Choice {
                    theta,
                    f: measure_value(&per_label, &profile).ok(),
                    cost: cell.cost_fn * profile.false_neg[0] + cell.cost_fp * profile.false_pos[0],
                    profile,
                })
            };
            let by_cost = choose(ThresholdObjective::Cost { fn_cost: cell.cost_fn, fp_cost: cell.cost_fp })?;
            let by_measure = choose(ThresholdObjective::Measure(per_label))?;
            let status = if cell.trivial { "always-negative".to_string() } else { status_name(&model) };
            Ok(LabelCell {
                label: cell.label,
                t: cell.t,
                c: cell.c,
                model: Some(model),
                by_cost: Some(by_cost),
                by_measure: Some(by_measure),
                status,
            })
        })
        .collect()
}

/// Per-label profiles stacked into one multilabel profile.
fn combine(choices: &[&Choice]) -> ErrorProfile {
    ErrorProfile {
        false_neg: choices.iter().map(|c| c.profile.false_neg[0]).collect(),
        false_pos: choices.iter().map(|c| c.profile.false_pos[0]).collect(),
        priors: choices.iter().map(|c| c.profile.priors[0]).collect(),
    }
}

struct Level {
    t: f64,
    /// Winning cell per label.
    picks: Vec<usize>,
    value: Option<f64>,
    cost: f64,
}

/// Least-cost cell per label among `cells` at level `t` (ties to smaller C).
fn level_choice(cells: &[LabelCell], t: f64, labels: usize, spec: &MeasureSpec) -> Level {
    let mut picks: Vec<Option<usize>> = vec![None; labels];
    for (i, cell) in cells.iter().enumerate() {
        let Some(choice) = cell.by_cost.as_ref().filter(|_| cell.t == t) else { continue };
        let slot = &mut picks[cell.label - 1];
        let better = match slot {
            None => true,
            Some(j) => {
                let incumbent = cells[*j].by_cost.as_ref().expect("picked cells are trained");
                choice.cost < incumbent.cost || (choice.cost == incumbent.cost && cell.c < cells[*j].c)
            }
        };
        if better {
            *slot = Some(i);
        }
    }
    let Some(picks) = picks.into_iter().collect::<Option<Vec<usize>>>() else {
        return Level { t, picks: Vec::new(), value: None, cost: f64::NAN };
    };
    let choices: Vec<&Choice> = picks.iter().map(|&i| cells[i].by_cost.as_ref().expect("trained")).collect();
    let value = measure_value(spec, &combine(&choices)).ok();
    let cost = choices.iter().map(|c| c.cost).sum();
    Level { t, picks, value, cost }
}

/// Micro F (or micro Jaccard) over labels: one shared cost level `t` for
/// every label's binary subproblem, per-label `C` and threshold chosen by
/// least validation cost, and `t` chosen by the validation micro measure.
/// The macro-optimal models of the same cells are scored for comparison.
pub fn optimize_micro_f(train: &Dataset, val: &Dataset, spec: &MeasureSpec, cfg: &SearchConfig) -> Result<MicroOutcome, SearchError> {
    spec.validate()?;
    cfg.validate()?;
    if !matches!(spec.kind, MeasureKind::MicroMultilabelF | MeasureKind::MicroMultilabelJaccard) {
        return Err(SearchError::Shape(format!("{} is not a micro multilabel measure", spec.kind)));
    }
    let labels = spec.labels;
    if train.label_sets().is_none() || train.label_count() != labels || val.label_count() != labels {
        return Err(SearchError::Shape(format!("datasets must be multilabel with {labels} labels")));
    }
    let problems = (1..=labels)
        .map(|k| Problem::new(k, train.binary_view(k)?, val.binary_view(k)?))
        .collect::<Result<Vec<_>, SearchError>>()?;
    let pool = cfg.pool()?;

    let (mut cells, bracket) = match cfg.grid {
        CostGrid::Bracket { t_min, t_max, min_width } => {
            let mut all: Vec<LabelCell> = Vec::new();
            let outcome = bracket_interval(
                |t| {
                    let row = cells_at(&problems, &[t], spec, cfg, &pool)?;
                    let value = level_choice(&row, t, labels, spec).value.unwrap_or(f64::NEG_INFINITY);
                    all.extend(row);
                    Ok(value)
                },
                (t_min, t_max.min(spec.max_level())),
                min_width,
            )?;
            (all, Some(outcome))
        }
        ref grid => (cells_at(&problems, &grid_levels(grid, spec)?, spec, cfg, &pool)?, None),
    };
    cells.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.label.cmp(&b.label)).then(a.c.total_cmp(&b.c)));
    if cells.iter().all(|c| c.model.is_none()) {
        return Err(SearchError::AllCellsFailed);
    }

    let mut ts: Vec<f64> = cells.iter().map(|c| c.t).collect();
    ts.dedup();
    let levels: Vec<Level> = ts.iter().map(|&t| level_choice(&cells, t, labels, spec)).collect();
    let mut best: Option<usize> = None;
    for (i, level) in levels.iter().enumerate() {
        if level.value.is_some() && best.map_or(true, |b| level.value > levels[b].value) {
            best = Some(i);
        }
    }
    let best = &levels[best.ok_or(SearchError::NoEligibleCell)?];

    let mut trace = Vec::with_capacity(cells.len() + levels.len());
    for level in &levels {
        trace.push(TraceRow {
            label: 0,
            t: level.t,
            c: None,
            val_f: level.value,
            val_cost: level.value.map(|_| level.cost),
            theta: None,
            chosen: level.t == best.t,
            status: String::new(),
        });
    }
    for (i, cell) in cells.iter().enumerate() {
        trace.push(TraceRow {
            label: cell.label,
            t: cell.t,
            c: Some(cell.c),
            val_f: cell.by_cost.as_ref().and_then(|c| c.f),
            val_cost: cell.by_cost.as_ref().map(|c| c.cost),
            theta: cell.by_cost.as_ref().map(|c| c.theta),
            chosen: best.picks.contains(&i),
            status: cell.status.clone(),
        });
    }
    let pick_model = |i: usize, choice: &Choice| {
        let mut m = cells[i].model.clone().expect("picked cells are trained");
        m.threshold = choice.theta;
        m
    };
    let cmin = OptResult {
        models: best.picks.iter().map(|&i| pick_model(i, cells[i].by_cost.as_ref().expect("trained"))).collect(),
        best_t: vec![best.t; labels],
        best_c: best.picks.iter().map(|&i| cells[i].c).collect(),
        val_value: best.value.expect("eligible level"),
        trace,
        bracket,
        test: None,
    };

    let mut fmax_picks: Vec<Option<usize>> = vec![None; labels];
    for (i, cell) in cells.iter().enumerate() {
        let Some(f) = cell.by_measure.as_ref().and_then(|c| c.f) else { continue };
        let slot = &mut fmax_picks[cell.label - 1];
        if slot.map_or(true, |j| Some(f) > cells[j].by_measure.as_ref().and_then(|c| c.f)) {
            *slot = Some(i);
        }
    }
    let fmax_picks: Vec<usize> = fmax_picks.into_iter().collect::<Option<_>>().ok_or(SearchError::NoEligibleCell)?;
    let fmax_choices: Vec<&Choice> = fmax_picks.iter().map(|&i| cells[i].by_measure.as_ref().expect("trained")).collect();
    let fmax_value = measure_value(spec, &combine(&fmax_choices)).map_err(|_| SearchError::NoEligibleCell)?;
    let fmax_trace = cells
        .iter()
        .enumerate()
        .map(|(i, cell)| TraceRow {
            label: cell.label,
            t: cell.t,
            c: Some(cell.c),
            val_f: cell.by_measure.as_ref().and_then(|c| c.f),
            val_cost: cell.by_measure.as_ref().map(|c| c.cost),
            theta: cell.by_measure.as_ref().map(|c| c.theta),
            chosen: fmax_picks.contains(&i),
            status: cell.status.clone(),
        })
        .collect();
    let fmax = OptResult {
        models: fmax_picks.iter().zip(&fmax_choices).map(|(&i, c)| pick_model(i, c)).collect(),
        best_t: fmax_picks.iter().map(|&i| cells[i].t).collect(),
        best_c: fmax_picks.iter().map(|&i| cells[i].c).collect(),
        val_value: fmax_value,
        trace: fmax_trace,
        bracket: None,
        test: None,
    };
    Ok(MicroOutcome { cmin, fmax })
}
