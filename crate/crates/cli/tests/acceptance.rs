//! Acceptance run. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. `PSEUDOLIN_ACCEPTANCE=1,4` runs a subset.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pseudolin::data::{
    best_cluster_subset, generate_galaxy, generate_multilabel, rng, split, GalaxySpec, MultilabelSpec, SplitSpec,
};
use pseudolin::learners::{
    objective_and_gradient, threshold_candidates, tune_threshold, Dataset, Labels, LossKind, ThresholdObjective,
};
use pseudolin::metrics::{
    cost_vector, discretization_factor, error_profile, label_cost_vector, measure_value, weighted_cost, Task,
};
use pseudolin::pareto::{
    best_for_cost, enumerate_profiles, parse_rational, phi_bound_witness, verify_reduction, FiniteDistribution,
    PhiWitnessConfig, Point, DEFAULT_CAP,
};
use pseudolin::search::{
    bracket_interval, compare_thresholding, optimize_micro_f, CostGrid, GridSpec, SearchConfig, SearchError,
};
use pseudolin::{CostVector, ErrorProfile, MeasureKind, MeasureSpec, Targets};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const TOL: f64 = 1e-12;

struct Verdict {
    pass: bool,
    summary: String,
}

impl Verdict {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Verdict { pass, summary: summary.into() }
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("PSEUDOLIN_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [(usize, &str, fn() -> Verdict); 10] = [
        (1, "figure distribution", figure_distribution),
        (2, "reduction equivalence", reduction_equivalence),
        (3, "phi bound", phi_bound),
        (4, "level sets", level_sets),
        (5, "halved cost pair", halved_cost_pair),
        (6, "learner correctness", learner_correctness),
        (7, "galaxy end to end", galaxy),
        (8, "micro strategies", micro_strategies),
        (9, "bracketing", bracketing),
        (10, "determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (n, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        println!(
            "criterion {n:>2} {name}: {} ({:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            v.summary
        );
        if !v.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng::uniform(r)
}

fn int(r: &mut ChaCha8Rng, lo: u64, hi: u64) -> u64 {
    lo + rng::below(r, hi - lo + 1)
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pseudolin")
}

// ---------------------------------------------------------------- 1

/// `s` is an exact fraction (`n/d` or `n`) equal to `ten_thousandths / 10^4`.
fn exactly(s: &str, ten_thousandths: i128) -> bool {
    let (n, d) = s.split_once('/').unwrap_or((s, "1"));
    match (n.parse::<i128>(), d.parse::<i128>()) {
        (Ok(n), Ok(d)) => n * 10_000 == ten_thousandths * d,
        _ => false,
    }
}

fn figure_distribution() -> Verdict {
    let start = Instant::now();
    let out = Command::new(bin()).arg("pareto-demo").output().unwrap();
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Verdict::new(false, String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    // assignment, false positives and false negatives in 1e-4, F1 in percent
    let expect: [([u32; 3], i128, i128, f64); 7] = [
        ([2, 2, 2], 0, 5825, 0.0),
        ([2, 2, 1], 425, 5750, 2.37),
        ([2, 1, 2], 1800, 4625, 27.20),
        ([1, 2, 2], 1950, 1275, 73.83),
        ([1, 2, 1], 2375, 1200, 72.12),
        ([1, 1, 2], 3750, 75, 75.04),
        ([1, 1, 1], 4175, 0, 73.62),
    ];
    let profiles = r["profiles"].as_array().unwrap();
    let mut front: Vec<u64> = r["front"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let mut problems = Vec::new();
    let mut expected_front = Vec::new();
    for (assignment, fp, fneg, f1) in expect {
        let Some(p) = profiles.iter().find(|p| p["assignment"] == serde_json::json!(assignment)) else {
            problems.push(format!("{assignment:?} missing"));
            continue;
        };
        expected_front.push(p["index"].as_u64().unwrap());
        let (xs, ys) = (p["exact_false_pos"][0].as_str().unwrap(), p["exact_false_neg"][0].as_str().unwrap());
        if !exactly(xs, fp) || !exactly(ys, fneg) {
            problems.push(format!("{assignment:?} at ({xs}, {ys})"));
        }
        let value = 100.0 * p["value"].as_f64().unwrap();
        if (value - f1).abs() > 0.01 {
            problems.push(format!("{assignment:?} F1 {value:.4}% vs {f1}%"));
        }
    }
    front.sort_unstable();
    expected_front.sort_unstable();
    if front != expected_front {
        problems.push(format!("front {front:?}, expected {expected_front:?}"));
    }
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {elapsed:?}"));
    }
    let pass = problems.is_empty();
    Verdict::new(pass, if pass { "7 front points exact, F1 table matched".into() } else { problems.join("; ") })
}

// ---------------------------------------------------------------- 2, 3, 5

/// Exact distribution with integer masses in `1..=20` and probabilities in
/// twentieths. Multiclass rows are split into `labels` parts of 20.
fn random_distribution(r: &mut ChaCha8Rng, task: Task, labels: usize, max_points: u64) -> FiniteDistribution {
    let frac = |n: u64, d: u64| parse_rational(&format!("{n}/{d}")).unwrap();
    loop {
        let points = int(r, 1, max_points) as usize;
        let weights: Vec<u64> = (0..points).map(|_| int(r, 1, 20)).collect();
        let total: u64 = weights.iter().sum();
        let width = if task == Task::Binary { 1 } else { labels };
        let probs: Vec<Vec<u64>> = (0..points)
            .map(|_| match task {
                Task::Multiclass => {
                    let mut cuts: Vec<u64> = (1..labels).map(|_| int(r, 0, 20)).collect();
                    cuts.push(0);
                    cuts.push(20);
                    cuts.sort_unstable();
                    cuts.windows(2).map(|w| w[1] - w[0]).collect()
                }
                _ => (0..width).map(|_| int(r, 0, 20)).collect(),
            })
            .collect();
        // measures need some mass outside the default class
        let defined = match task {
            Task::Multiclass => probs.iter().any(|p| p[1..].iter().any(|&q| q > 0)),
            _ => probs.iter().any(|p| p.iter().any(|&q| q > 0)),
        };
        if !defined {
            continue;
        }
        let pts = weights
            .iter()
            .zip(&probs)
            .map(|(&w, p)| Point { mass: frac(w, total), probs: p.iter().map(|&q| frac(q, 20)).collect() })
            .collect();
        return FiniteDistribution::new(task, if task == Task::Binary { 2 } else { labels }, pts).unwrap();
    }
}

fn binary_spec(r: &mut ChaCha8Rng) -> MeasureSpec {
    match rng::below(r, 4) {
        0 => MeasureSpec::binary_jaccard(),
        k => MeasureSpec::binary_f([0.5, 1.0, 2.0][k as usize - 1]),
    }
}

fn reduction_equivalence() -> Verdict {
    let start = Instant::now();
    let mut r = rng::stream(2, 0);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let d = random_distribution(&mut r, Task::Binary, 2, 8);
        let spec = binary_spec(&mut r);
        let report = verify_reduction(&d, &spec).unwrap();
        if !report.holds() {
            failures.push(format!("binary #{i}: {report:?}"));
        }
    }
    for i in 0..200 {
        let d = random_distribution(&mut r, Task::Multilabel, 2, 4);
        let kind = if rng::below(&mut r, 2) == 0 { MeasureKind::MicroMultilabelF } else { MeasureKind::MicroMultilabelJaccard };
        let report = verify_reduction(&d, &MeasureSpec::new(kind, 1.0, 2).unwrap()).unwrap();
        if !report.holds() {
            failures.push(format!("multilabel #{i}: {report:?}"));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    Verdict::new(pass, format!("1000 binary + 200 multilabel instances, {} failures {}", failures.len(), failures.join("; ")))
}

fn phi_bound() -> Verdict {
    let start = Instant::now();
    let mut r = rng::stream(3, 0);
    let (mut trials, mut checks, mut violations, mut worst) = (0, 0, 0, 0.0f64);
    for i in 0..1000u64 {
        let (d, spec) = match i % 3 {
            0 => (random_distribution(&mut r, Task::Binary, 2, 6), binary_spec(&mut r)),
            1 => {
                let kind = [MeasureKind::MicroMultilabelF, MeasureKind::MicroMultilabelJaccard][rng::below(&mut r, 2) as usize];
                (random_distribution(&mut r, Task::Multilabel, 2, 3), MeasureSpec::new(kind, 1.0, 2).unwrap())
            }
            _ => {
                let kind = [MeasureKind::MicroMulticlassF, MeasureKind::MicroMulticlassJaccard][rng::below(&mut r, 2) as usize];
                (random_distribution(&mut r, Task::Multiclass, 3, 3), MeasureSpec::new(kind, 1.0, 3).unwrap())
            }
        };
        let cfg = PhiWitnessConfig {
            epsilon0: uniform(&mut r, 0.0, 0.2),
            epsilon1: uniform(&mut r, 0.0, 0.05),
            samples: 10,
            seed: i,
        };
        let w = phi_bound_witness(&d.to_f64(), &spec, &cfg).unwrap();
        trials += cfg.samples;
        checks += w.checks;
        violations += w.violations;
        worst = worst.max(w.max_ratio);
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && trials == 10_000 && elapsed < Duration::from_secs(120);
    Verdict::new(pass, format!("{trials} perturbed cost vectors, {checks} profiles checked, {violations} violations, largest gap/bound {worst:.3}"))
}

fn halved_cost_pair() -> Verdict {
    let mut r = rng::stream(5, 0);
    let spec = MeasureSpec::binary_f(1.0);
    let mut mismatches = 0;
    for _ in 0..100 {
        let t = uniform(&mut r, 0.0, 2.0);
        let p = uniform(&mut r, 0.01, 0.99);
        let cv = cost_vector(&spec, t, &[p, 1.0 - p]).unwrap();
        if cv.a != [2.0 * (1.0 - t / 2.0), 2.0 * (t / 2.0), 0.0, 0.0] {
            mismatches += 1;
        }
    }
    let mut suboptimal = 0;
    for _ in 0..200 {
        let d = random_distribution(&mut r, Task::Binary, 2, 8);
        let ps = enumerate_profiles(&d, DEFAULT_CAP).unwrap();
        let values: Vec<_> = ps.entries.iter().map(|(_, e)| measure_value(&spec, e).ok()).collect();
        let f_star = values.iter().flatten().max().unwrap().clone();
        let a = cost_vector(&spec, f_star.clone(), &d.priors()).unwrap();
        let chosen = best_for_cost(&ps, &a).unwrap();
        if chosen.is_empty() || chosen.iter().any(|&i| values[i].as_ref() != Some(&f_star)) {
            suboptimal += 1;
        }
    }
    Verdict::new(
        mismatches == 0 && suboptimal == 0,
        format!("{mismatches}/100 cost vectors differ, {suboptimal}/200 instances with a suboptimal cost minimizer"),
    )
}

// ---------------------------------------------------------------- 4

/// Admissible profiles with fixed priors: independent rates per label, or a
/// confusion matrix for multiclass tasks.
struct ProfileDraw {
    task: Task,
    priors: Vec<f64>,
}

impl ProfileDraw {
    fn new(r: &mut ChaCha8Rng, task: Task, labels: usize) -> Self {
        let priors = match task {
            Task::Binary => vec![uniform(r, 0.02, 0.98)],
            Task::Multilabel => (0..labels).map(|_| uniform(r, 0.02, 0.98)).collect(),
            Task::Multiclass => {
                let raw: Vec<f64> = (0..labels).map(|_| uniform(r, 0.05, 1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.iter().map(|x| x / total).collect()
            }
        };
        ProfileDraw { task, priors }
    }

    fn build(&self, false_neg: Vec<f64>, false_pos: Vec<f64>) -> ErrorProfile {
        match self.task {
            Task::Binary => ErrorProfile::binary(self.priors[0], false_neg[0], false_pos[0]),
            _ => ErrorProfile { false_neg, false_pos, priors: self.priors.clone() },
        }
    }

    fn draw(&self, r: &mut ChaCha8Rng) -> ErrorProfile {
        let l = self.priors.len();
        match self.task {
            Task::Multiclass => {
                let (mut fneg, mut fpos) = (vec![0.0; l], vec![0.0; l]);
                for (k, &p) in self.priors.iter().enumerate() {
                    let w: Vec<f64> = (0..l).map(|j| rng::uniform(r) + if j == k { 1.0 } else { 0.0 }).collect();
                    let total: f64 = w.iter().sum();
                    for j in (0..l).filter(|&j| j != k) {
                        let m = p * w[j] / total;
                        fneg[k] += m;
                        fpos[j] += m;
                    }
                }
                self.build(fneg, fpos)
            }
            _ => {
                let fneg = self.priors.iter().map(|p| p * rng::uniform(r)).collect();
                let fpos = self.priors.iter().map(|p| (1.0 - p) * rng::uniform(r)).collect();
                self.build(fneg, fpos)
            }
        }
    }

    fn perfect(&self) -> ErrorProfile {
        let l = self.priors.len();
        self.build(vec![0.0; l], vec![0.0; l])
    }

    /// Nothing predicted positive (multiclass: everything in class 1).
    fn null(&self) -> ErrorProfile {
        let l = self.priors.len();
        match self.task {
            Task::Multiclass => {
                let mut fneg = self.priors.clone();
                fneg[0] = 0.0;
                let mut fpos = vec![0.0; l];
                fpos[0] = 1.0 - self.priors[0];
                self.build(fneg, fpos)
            }
            _ => self.build(self.priors.clone(), vec![0.0; l]),
        }
    }
}

fn mix(a: &ErrorProfile, b: &ErrorProfile, lambda: f64) -> ErrorProfile {
    let m = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(u, v)| lambda * u + (1.0 - lambda) * v).collect();
    ErrorProfile { false_neg: m(&a.false_neg, &b.false_neg), false_pos: m(&a.false_pos, &b.false_pos), priors: a.priors.clone() }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One pseudo-linear function under test: its value, the level-set normal at
/// `t`, and its discretization factor.
struct Level<'a> {
    value: Box<dyn Fn(&ErrorProfile) -> Option<f64> + 'a>,
    normal: Box<dyn Fn(f64) -> CostVector<f64> + 'a>,
    phi: f64,
    max_level: f64,
}

fn level_for<'a>(spec: &'a MeasureSpec, label: usize, priors: &'a [f64]) -> Level<'a> {
    if spec.kind == MeasureKind::MacroF {
        let one = MeasureSpec::binary_f(spec.beta);
        let p = priors[label];
        return Level {
            value: Box::new(move |e| {
                measure_value(&one, &ErrorProfile::binary(p, e.false_neg[label], e.false_pos[label])).ok()
            }),
            normal: Box::new(move |t| label_cost_vector(spec, label, t, priors).unwrap()),
            phi: discretization_factor(&one, &[p, 1.0 - p]).unwrap(),
            max_level: one.max_level(),
        };
    }
    Level {
        value: Box::new(move |e| measure_value(spec, e).ok()),
        normal: Box::new(move |t| cost_vector(spec, t, priors).unwrap()),
        phi: discretization_factor(spec, priors).unwrap(),
        max_level: spec.max_level(),
    }
}

#[derive(Default)]
struct LevelTally {
    orthogonal: usize,
    sign: usize,
    phi: usize,
    failures: Vec<String>,
}

fn level_checks(kind: MeasureKind, r: &mut ChaCha8Rng, tally: &mut LevelTally) {
    let labels = if kind.task() == Task::Binary { 2 } else { int(r, 2, 4) as usize };
    let spec = MeasureSpec::new(kind, uniform(r, 0.25, 3.0), labels).unwrap();
    let draw = ProfileDraw::new(r, kind.task(), labels);
    let label = rng::below(r, labels as u64) as usize;
    let priors = draw.perfect().priors;
    let level = level_for(&spec, label, &priors);
    let f = &level.value;

    // orthogonality: a second point of the level set, found by bisection on
    // F along a segment that crosses it
    let e1 = draw.draw(r);
    if let Some(t) = f(&e1).filter(|&t| t > 0.0 && t < 1.0) {
        let other = draw.draw(r);
        if let Some(fo) = f(&other).filter(|&v| v != t) {
            let (hi, lo) = if fo < t { (draw.perfect(), other) } else { (other, draw.null()) };
            let (mut a, mut b) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(&mix(&hi, &lo, m)).unwrap() >= t {
                    b = m;
                } else {
                    a = m;
                }
            }
            let e2 = mix(&hi, &lo, b);
            let cv = (level.normal)(t);
            let diff: Vec<f64> = e1.flatten().iter().zip(e2.flatten()).map(|(x, y)| x - y).collect();
            let (gap, along) = ((f(&e2).unwrap() - t).abs(), dot(&cv.a, &diff).abs());
            tally.orthogonal += 1;
            if gap > TOL || along > TOL {
                tally.failures.push(format!("{kind} orthogonality: |F - t| {gap:e}, |<a, e1 - e2>| {along:e}"));
            }
        }
    }

    // sign consistency at a random level
    let e = draw.draw(r);
    let t = uniform(r, 0.0, level.max_level);
    let cv = (level.normal)(t);
    if let Some(fe) = f(&e).filter(|fe| (fe - t).abs() > TOL) {
        tally.sign += 1;
        let side = weighted_cost(&cv, &e).unwrap() + cv.b;
        if (fe >= t) != (side <= 0.0) {
            tally.failures.push(format!("{kind} sign: F {fe}, t {t}, side {side}"));
        }
    }

    // improvement bounded by phi times the cost gain
    let (x, y) = (draw.draw(r), draw.draw(r));
    if let (Some(fx), Some(fy)) = (f(&x), f(&y)) {
        if fx != fy {
            let ((worse, fw), (better, fb)) = if fx < fy { ((&x, fx), (&y, fy)) } else { ((&y, fy), (&x, fx)) };
            let cv = (level.normal)(fb);
            let gain = weighted_cost(&cv, worse).unwrap() - weighted_cost(&cv, better).unwrap();
            tally.phi += 1;
            if fb - fw > level.phi * gain + TOL {
                tally.failures.push(format!("{kind} phi: {} > {} * {gain}", fb - fw, level.phi));
            }
        }
    }
}

fn level_sets() -> Verdict {
    let mut r = rng::stream(4, 0);
    let mut lines = Vec::new();
    let mut pass = true;
    for kind in MeasureKind::ALL {
        let mut tally = LevelTally::default();
        while tally.orthogonal < 10_000 || tally.sign < 10_000 || tally.phi < 10_000 {
            level_checks(kind, &mut r, &mut tally);
        }
        pass &= tally.failures.is_empty();
        lines.push(format!("{kind} {}/{}/{} checks, {} failures", tally.orthogonal, tally.sign, tally.phi, tally.failures.len()));
        lines.extend(tally.failures.into_iter().take(3));
    }
    Verdict::new(pass, lines.join("; "))
}

// ---------------------------------------------------------------- 6

fn dataset(rows: &[(Vec<f64>, bool)], bias: f64) -> Dataset {
    let dim = rows[0].0.len();
    let sparse = rows
        .iter()
        .map(|(x, _)| x.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j as u32 + 1, v)).collect())
        .collect();
    let y = rows.iter().map(|(_, pos)| if *pos { 1 } else { 2 }).collect();
    Dataset::new(sparse, Labels::Binary(y), dim, bias).unwrap()
}

fn random_rows(r: &mut ChaCha8Rng, max_n: u64) -> Vec<(Vec<f64>, bool)> {
    let dim = int(r, 1, 3) as usize;
    (0..int(r, 2, max_n)).map(|_| ((0..dim).map(|_| uniform(r, -2.0, 2.0)).collect(), rng::below(r, 2) == 1)).collect()
}

fn margins(w: &[f64], ds: &Dataset) -> Vec<f64> {
    let d = ds.dim();
    ds.rows()
        .iter()
        .zip(ds.binary_labels().unwrap())
        .map(|(row, &y)| {
            let s = row.iter().fold(w[d] * ds.bias(), |acc, &(j, v)| acc + w[j as usize - 1] * v);
            if y == 1 { s } else { -s }
        })
        .collect()
}

fn learner_correctness() -> Verdict {
    let mut r = rng::stream(6, 0);
    let mut failures = Vec::new();

    let (mut draws, mut worst) = (0, 0.0f64);
    while draws < 100 {
        let ds = dataset(&random_rows(&mut r, 20), 1.0);
        let w: Vec<f64> = (0..=ds.dim()).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
        let (cost_fn, cost_fp, c) = (uniform(&mut r, 0.1, 2.0), uniform(&mut r, 0.1, 2.0), uniform(&mut r, 0.05, 5.0));
        let loss = if rng::below(&mut r, 2) == 0 { LossKind::Log } else { LossKind::Hinge };
        // finite differences are meaningless across a hinge kink
        if loss == LossKind::Hinge && margins(&w, &ds).iter().any(|z| (z - 1.0).abs() < 1e-3) {
            continue;
        }
        draws += 1;
        let (_, g) = objective_and_gradient(&w, &ds, loss, cost_fn, cost_fp, c).unwrap();
        let h = 1e-5;
        for j in 0..w.len() {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            let fu = objective_and_gradient(&up, &ds, loss, cost_fn, cost_fp, c).unwrap().0;
            let fd = objective_and_gradient(&down, &ds, loss, cost_fn, cost_fp, c).unwrap().0;
            let err = ((fu - fd) / (2.0 * h) - g[j]).abs() / g[j].abs().max(1.0);
            worst = worst.max(err);
            if err >= 1e-6 {
                failures.push(format!("gradient coordinate {j}: relative error {err:e}"));
            }
        }
    }

    for _ in 0..100 {
        let rows = random_rows(&mut r, 15);
        let (k_fn, k_fp) = (int(&mut r, 1, 4), int(&mut r, 1, 4));
        let c = uniform(&mut r, 0.05, 5.0);
        let loss = if rng::below(&mut r, 2) == 0 { LossKind::Log } else { LossKind::Hinge };
        let weighted = dataset(&rows, 100.0);
        let copies: Vec<_> = rows
            .iter()
            .flat_map(|row| std::iter::repeat(row.clone()).take(if row.1 { k_fn } else { k_fp } as usize))
            .collect();
        let replicated = dataset(&copies, 100.0);
        let w: Vec<f64> = (0..=weighted.dim()).map(|_| uniform(&mut r, -1.0, 1.0)).collect();
        let a = objective_and_gradient(&w, &weighted, loss, k_fn as f64, k_fp as f64, c).unwrap().0;
        let b = objective_and_gradient(&w, &replicated, loss, 1.0, 1.0, c).unwrap().0;
        if a != b {
            failures.push(format!("weighted {a} vs replicated {b}"));
        }
    }

    for _ in 0..500 {
        let n = int(&mut r, 1, 200) as usize;
        let coarse = rng::below(&mut r, 2) == 0;
        let scores: Vec<f64> = (0..n)
            .map(|_| if coarse { int(&mut r, 0, 6) as f64 / 2.0 - 1.5 } else { uniform(&mut r, -3.0, 3.0) })
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| if rng::below(&mut r, 3) == 0 { 1 } else { 2 }).collect();
        let spec = MeasureSpec::binary_f(uniform(&mut r, 0.5, 2.0));
        let objective = if rng::below(&mut r, 2) == 0 {
            ThresholdObjective::Measure(spec)
        } else {
            ThresholdObjective::Cost { fn_cost: uniform(&mut r, 0.0, 2.0), fp_cost: uniform(&mut r, 0.0, 2.0) }
        };
        if let Some(problem) = threshold_mismatch(&scores, &labels, &spec, &objective) {
            failures.push(problem);
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!("largest gradient error {worst:.1e}, {} failures {}", failures.len(), failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ")),
    )
}

/// Compares `tune_threshold` with scoring every candidate explicitly, in
/// increasing order so the first optimum is the smallest threshold.
fn threshold_mismatch(scores: &[f64], labels: &[u8], spec: &MeasureSpec, objective: &ThresholdObjective) -> Option<String> {
    let got = tune_threshold(scores, labels, None, objective).unwrap();
    let mut distinct = scores.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut candidates = vec![distinct[0] - 1.0];
    candidates.extend(distinct.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0));
    candidates.push(distinct[distinct.len() - 1] + 1.0);
    if candidates.iter().rev().copied().collect::<Vec<_>>() != threshold_candidates(scores) {
        return Some("candidate list differs".into());
    }
    let truth: Vec<usize> = labels.iter().map(|&l| l as usize).collect();
    if matches!(objective, ThresholdObjective::Measure(_)) && !labels.contains(&1) {
        return (!got.degenerate || got.theta <= distinct[distinct.len() - 1]).then(|| format!("no positives: {got:?}"));
    }
    let mut best: Option<(f64, f64)> = None;
    for &theta in &candidates {
        let pred: Vec<usize> = scores.iter().map(|&s| if s >= theta { 1 } else { 2 }).collect();
        let e = error_profile::<f64>(Targets::Classes(&pred), Targets::Classes(&truth), spec).unwrap();
        let value = match objective {
            ThresholdObjective::Measure(_) => match measure_value(spec, &e) {
                Ok(v) => v,
                Err(_) => continue,
            },
            ThresholdObjective::Cost { fn_cost, fp_cost } => fn_cost * e.false_neg[0] + fp_cost * e.false_pos[0],
        };
        let improves = match (best, objective) {
            (None, _) => true,
            (Some((_, b)), ThresholdObjective::Measure(_)) => value > b,
            (Some((_, b)), ThresholdObjective::Cost { .. }) => value < b,
        };
        if improves {
            best = Some((theta, value));
        }
    }
    let (theta, value) = best.unwrap();
    (got.theta != theta || got.value != value).then(|| format!("tuned {got:?}, oracle ({theta}, {value})"))
}

// ---------------------------------------------------------------- 7

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn galaxy() -> Verdict {
    let start = Instant::now();
    let gspec = GalaxySpec::new(20_000, 1);
    let (clusters, optimum) = best_cluster_subset(&gspec.priors, &gspec.positive_rates, 1.0);
    let oracle_ok = clusters == [1, 3] && (optimum - 0.6622).abs() < 5e-5;
    let g = generate_galaxy(&gspec).unwrap();
    let sspec = SplitSpec { seed: 1, test_fraction: Some(0.25), ..SplitSpec::default() };
    let spec = MeasureSpec::binary_f(1.0);

    let mut pass = oracle_ok;
    let mut lines = vec![format!("best cluster union {clusters:?} F1 {optimum:.4}")];
    for loss in [LossKind::Log, LossKind::Hinge] {
        // test F1 per replicate: cost-sensitive and thresholded, cost-sensitive,
        // thresholded, neither
        let mut table: [Vec<f64>; 4] = Default::default();
        for rep in 0..sspec.replicates {
            let s = split(&g.dataset, &sspec, rep).unwrap();
            let test = s.test.as_ref().unwrap();
            let sensitive = SearchConfig::new(loss);
            let insensitive =
                SearchConfig { grid: CostGrid::Step(GridSpec { epsilon0: 1.0, t_min: 1.0, t_max: 1.0 }), ..sensitive.clone() };
            let cs = compare_thresholding(&s.train, &s.val, &spec, &sensitive).unwrap();
            let ci = compare_thresholding(&s.train, &s.val, &spec, &insensitive).unwrap();
            for (slot, mut result) in [cs.tuned, cs.untuned, ci.tuned, ci.untuned].into_iter().enumerate() {
                table[slot].push(result.evaluate_on(test, &spec).unwrap().value.unwrap_or(0.0));
            }
        }
        let above = table[0].iter().filter(|&&f| f >= 0.60).count();
        let m: Vec<f64> = table.iter().map(|v| mean(v)).collect();
        let orderings = m[0] >= m[1] && m[2] >= m[3] && m[0] >= m[2] && m[1] >= m[3];
        pass &= above >= 4 && orderings;
        let fmt = |v: &[f64]| v.iter().map(|f| format!("{f:.4}")).collect::<Vec<_>>().join(" ");
        lines.push(format!(
            "{}: CS&T [{}] CS [{}] T [{}] -- [{}]; means {:.4} {:.4} {:.4} {:.4}; {above}/5 at 0.60, orderings {}",
            loss.name(),
            fmt(&table[0]),
            fmt(&table[1]),
            fmt(&table[2]),
            fmt(&table[3]),
            m[0],
            m[1],
            m[2],
            m[3],
            if orderings { "hold" } else { "violated" }
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(600);
    Verdict::new(pass, lines.join("; "))
}

// ---------------------------------------------------------------- 8

fn micro_strategies() -> Verdict {
    let spec = MeasureSpec::new(MeasureKind::MicroMultilabelF, 1.0, 4).unwrap();
    let cfg = SearchConfig::new(LossKind::Log);
    let (mut cmin, mut fmax) = (Vec::new(), Vec::new());
    let mut notes = Vec::new();
    for seed in 0..10 {
        let ds = generate_multilabel(&MultilabelSpec::four_labels(2000, seed)).unwrap();
        let sspec = SplitSpec { seed, test_fraction: Some(0.25), replicates: 1, ..SplitSpec::default() };
        let s = split(&ds, &sspec, 0).unwrap();
        let test = s.test.as_ref().unwrap();
        let mut out = optimize_micro_f(&s.train, &s.val, &spec, &cfg).unwrap();
        let a = out.cmin.evaluate_on(test, &spec).unwrap().value.unwrap_or(0.0);
        let b = out.fmax.evaluate_on(test, &spec).unwrap().value.unwrap_or(0.0);
        if a <= b {
            notes.push(format!(
                "seed {seed}: cmin {a:.4} at t {:?} C {:?}, fmax {b:.4} at t {:?} C {:?}",
                out.cmin.best_t, out.cmin.best_c, out.fmax.best_t, out.fmax.best_c
            ));
        }
        cmin.push(a);
        fmax.push(b);
    }
    let wins = cmin.iter().zip(&fmax).filter(|(a, b)| a > b).count();
    let pass = mean(&cmin) >= mean(&fmax) && wins >= 6;
    let mut summary = format!("mean cmin {:.4} vs fmax {:.4}, strictly better on {wins}/10 seeds", mean(&cmin), mean(&fmax));
    if !notes.is_empty() {
        summary.push_str("; ");
        summary.push_str(&notes.join("; "));
    }
    Verdict::new(pass, summary)
}

// ---------------------------------------------------------------- 9

/// Runs `bracket_interval` on `f` over `[0, 2]` and compares with the sweep
/// of the dyadic grid it works on. Returns (interval holds a grid maximizer,
/// evaluations, sweep size).
fn bracket_against_sweep(f: &dyn Fn(f64) -> f64, min_width: f64) -> (bool, usize, usize) {
    let out = bracket_interval(|t| Ok::<f64, SearchError>(f(t)), (0.0, 2.0), min_width).unwrap();
    let points = (2.0 / out.finest_spacing).round() as usize + 1;
    let grid: Vec<f64> = (0..points).map(|k| if k + 1 == points { 2.0 } else { k as f64 * out.finest_spacing }).collect();
    let top = grid.iter().map(|&t| f(t)).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = out.interval;
    let holds = grid.iter().any(|&t| f(t) == top && lo <= t && t <= hi);
    (holds, out.evaluations.len(), points)
}

fn is_quasi_concave(values: &[f64]) -> bool {
    let peak = values.iter().enumerate().fold(0, |b, (i, v)| if *v > values[b] { i } else { b });
    values[..=peak].windows(2).all(|w| w[0] <= w[1]) && values[peak..].windows(2).all(|w| w[0] >= w[1])
}

fn bracketing() -> Verdict {
    let curves: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
        ("quadratic", Box::new(|t| -(t - 0.73) * (t - 0.73))),
        ("tent", Box::new(|t| if t < 0.4 { t / 0.4 } else { (2.0 - t) / 1.6 })),
        ("left end", Box::new(|t| -t)),
        ("right end", Box::new(|t| t)),
        ("plateau", Box::new(|t| (2.0 - 3.0 * (t - 1.3f64).abs()).min(1.0))),
        ("skewed", Box::new(|t| t * (-3.0 * t).exp())),
        ("constant", Box::new(|_| 0.5)),
        ("linear fractional", Box::new(|t| (1.0 + t) / (1.0 + 4.0 * (t - 1.1f64).abs()))),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, f) in &curves {
        let (holds, evals, sweep) = bracket_against_sweep(f.as_ref(), 0.1);
        let ok = holds && evals * 10 <= sweep * 6;
        pass &= ok;
        lines.push(format!("{name} {evals}/{sweep}{}", if ok { "" } else { " FAILED" }));
    }

    // validation micro F as a function of the shared level, swept on the
    // grid bracketing would use, then bracketed by the search itself
    let spec = MeasureSpec::new(MeasureKind::MicroMultilabelF, 1.0, 4).unwrap();
    for seed in 0..3 {
        let ds = generate_multilabel(&MultilabelSpec::four_labels(800, seed)).unwrap();
        let s = split(&ds, &SplitSpec { seed, replicates: 1, ..SplitSpec::default() }, 0).unwrap();
        let base = SearchConfig { c_values: vec![1.0], ..SearchConfig::new(LossKind::Log) };
        let sweep_cfg = SearchConfig { grid: CostGrid::Step(GridSpec { epsilon0: 0.125, t_min: 0.0, t_max: 2.0 }), ..base.clone() };
        let sweep = optimize_micro_f(&s.train, &s.val, &spec, &sweep_cfg).unwrap();
        let curve: Vec<(f64, f64)> = sweep
            .cmin
            .trace
            .iter()
            .filter(|row| row.label == 0)
            .map(|row| (row.t, row.val_f.unwrap_or(f64::NEG_INFINITY)))
            .collect();
        let values: Vec<f64> = curve.iter().map(|p| p.1).collect();
        if !is_quasi_concave(&values) {
            lines.push(format!("micro F seed {seed} not quasi-concave, excluded"));
            continue;
        }
        let bracket_cfg = SearchConfig { grid: CostGrid::Bracket { t_min: 0.0, t_max: 2.0, min_width: 0.25 }, ..base };
        let run = optimize_micro_f(&s.train, &s.val, &spec, &bracket_cfg).unwrap();
        let out = run.cmin.bracket.unwrap();
        let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = out.interval;
        let holds = curve.iter().any(|&(t, v)| v == top && lo <= t && t <= hi);
        // bracketing sees exactly the swept values
        let agrees = out.evaluations.iter().all(|(t, v)| curve.iter().any(|(u, w)| u == t && w == v));
        let ok = holds && agrees && out.evaluations.len() * 10 <= curve.len() * 6;
        pass &= ok;
        lines.push(format!(
            "micro F seed {seed} {}/{} in [{lo}, {hi}]{}",
            out.evaluations.len(),
            curve.len(),
            if ok { "" } else { " FAILED" }
        ));
    }
    Verdict::new(pass, lines.join(", "))
}

// ---------------------------------------------------------------- 10

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).to_str().unwrap().to_owned()
}

/// Every file under `dir` except the timing record, by relative path.
fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut pending = vec![dir.to_path_buf()];
    while let Some(d) = pending.pop() {
        for entry in std::fs::read_dir(d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                pending.push(path);
            } else if path.file_name().is_some_and(|n| n != "timing.json") {
                let name = path.strip_prefix(dir).unwrap().display().to_string();
                files.push((name, std::fs::read(&path).unwrap()));
            }
        }
    }
    files.sort();
    files
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let out = out.to_str().unwrap();
    let (separable, two) = (fixture("separable.train"), fixture("two_labels.train"));
    let runs: [(&str, Vec<&str>); 3] = [
        ("train-binary", vec!["--train", &separable, "--loss", "hinge", "--cost-grid", "step:0.25", "--seed", "7"]),
        ("train-macro", vec!["--train", &two, "--c-grid", "0.5,2", "--seed", "3"]),
        ("train-micro", vec!["--train", &two, "--c-grid", "1", "--cost-grid", "bracket", "--seed", "3"]),
    ];
    let mut differing = Vec::new();
    for (cmd, args) in runs {
        let mut reports = Vec::new();
        for _ in 0..2 {
            let o = Command::new(bin()).arg(cmd).args(&args).args(["--out", out]).output().unwrap();
            if !o.status.success() {
                return Verdict::new(false, format!("{cmd}: {}", String::from_utf8_lossy(&o.stderr)));
            }
            reports.push(outputs(Path::new(out)));
            std::fs::remove_dir_all(out).unwrap();
        }
        if reports[0] != reports[1] {
            differing.push(cmd);
        }
    }
    Verdict::new(
        differing.is_empty(),
        if differing.is_empty() { "all output files byte-identical apart from timing.json".to_owned() } else { format!("{differing:?} differ") },
    )
}
