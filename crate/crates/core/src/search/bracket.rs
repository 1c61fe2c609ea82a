use std::collections::BTreeMap;

use log::info;
use serde::Serialize;

use super::SearchError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketOutcome {
    pub interval: (f64, f64),
    /// Every `(t, f(t))` evaluated, in increasing `t`.
    pub evaluations: Vec<(f64, f64)>,
    /// Smallest evaluated `t` with the largest value.
    pub best_t: f64,
    /// Spacing of the quarter points in the last round.
    pub finest_spacing: f64,
}

/// Narrows `[lo, hi]` toward a maximizer of a quasi-concave `f`.
///
/// Each round evaluates the endpoints, the midpoint and the two quarter
/// points, and keeps the half centred on the first maximizer among them
/// (clipped to the interval). Rounds stop once the width is at most
/// `min_width`. Points are tracked on a dyadic integer grid so values shared
/// between rounds are computed once. If all five values tie, the left half
/// is kept.
pub fn bracket_interval(
    mut f: impl FnMut(f64) -> Result<f64, SearchError>,
    range: (f64, f64),
    min_width: f64,
) -> Result<BracketOutcome, SearchError> {
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo < hi && min_width > 0.0) {
        return Err(SearchError::InvalidGrid(format!("cannot bracket [{lo}, {hi}] to width {min_width}")));
    }
    let mut rounds = 0u32;
    while (hi - lo) / f64::from(1u32 << rounds) > min_width && rounds < 40 {
        rounds += 1;
    }
    let rounds = rounds.max(1);
    let units = 4u64 << (rounds - 1);
    let at = |k: u64| if k == units { hi } else { lo + (hi - lo) * k as f64 / units as f64 };

    let mut memo: BTreeMap<u64, f64> = BTreeMap::new();
    let (mut a, mut b) = (0u64, units);
    let width = |a: u64, b: u64| at(b) - at(a);
    loop {
        let quarter = (b - a) / 4;
        let keys: Vec<u64> = (0..5).map(|i| a + i * quarter).collect();
        let mut values = [0.0; 5];
        for (i, &k) in keys.iter().enumerate() {
            values[i] = match memo.get(&k) {
                Some(&v) => v,
                None => {
                    let v = f(at(k))?;
                    memo.insert(k, v);
                    v
                }
            };
        }
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let j = values.iter().position(|&v| v == best).unwrap_or(0);
        if values.iter().all(|&v| v == best) {
            info!("bracketing: all five values tie on [{}, {}], keeping the left half", at(a), at(b));
        }
        if width(a, b) <= min_width {
            break;
        }
        let start = j.saturating_sub(1).min(2);
        a = keys[start];
        b = a + 2 * quarter;
        if width(a, b) <= min_width || quarter == 1 {
            break;
        }
    }
    let evaluations: Vec<(f64, f64)> = memo.iter().map(|(&k, &v)| (at(k), v)).collect();
    let best_t = evaluations
        .iter()
        .fold(None::<(f64, f64)>, |acc, &(t, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((t, v)),
        })
        .map_or(lo, |(t, _)| t);
    Ok(BracketOutcome {
        interval: (at(a), at(b)),
        evaluations,
        best_t,
        finest_spacing: (hi - lo) / units as f64,
    })
}
