use super::{ParetoError, ProfileSet};
use crate::metrics::{weighted_cost, CostVector, ErrorProfile, Scalar, Task};

fn dominates<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Indices of the non-dominated profiles under componentwise order of the
/// flattened error vectors. Of several identical profiles only the first
/// is kept.
pub fn pareto_front<T: Scalar>(ps: &ProfileSet<T>) -> Vec<usize> {
    let flat: Vec<Vec<T>> = ps.entries.iter().map(|(_, e)| e.flatten()).collect();
    (0..flat.len())
        .filter(|&i| {
            !flat.iter().any(|other| dominates(other, &flat[i])) && !flat[..i].iter().any(|other| *other == flat[i])
        })
        .collect()
}

/// Vertices of the lower-left convex hull of a binary profile set in the
/// `(fp, fn)` plane, ordered by increasing false positives: the profiles a
/// weighted sum with positive weights can single out, plus the two extreme
/// ends. Points on a hull edge are not vertices.
pub fn hull_candidates<T: Scalar>(ps: &ProfileSet<T>) -> Result<Vec<usize>, ParetoError> {
    if ps.task != Task::Binary {
        return Err(ParetoError::NotBinary);
    }
    let xy = |i: usize| {
        let e = ps.profile(i);
        (e.false_pos[0].clone(), e.false_neg[0].clone())
    };
    let mut front = pareto_front(ps);
    front.sort_by(|&a, &b| {
        let ((ax, ay), (bx, by)) = (xy(a), xy(b));
        ax.partial_cmp(&bx).expect("ordered").then(ay.partial_cmp(&by).expect("ordered"))
    });
    let cross = |o: usize, a: usize, b: usize| {
        let ((ox, oy), (ax, ay), (bx, by)) = (xy(o), xy(a), xy(b));
        (ax - ox.clone()) * (by - oy.clone()) - (ay - oy) * (bx - ox)
    };
    let mut hull: Vec<usize> = Vec::with_capacity(front.len());
    for i in front {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= T::slack() {
            hull.pop();
        }
        hull.push(i);
    }
    Ok(hull)
}

/// Indices of the profiles minimizing `<a, e>`, up to [`Scalar::slack`].
pub fn best_for_cost<T: Scalar>(ps: &ProfileSet<T>, a: &CostVector<T>) -> Result<Vec<usize>, ParetoError> {
    let costs = ps
        .entries
        .iter()
        .map(|(_, e)| weighted_cost(a, e))
        .collect::<Result<Vec<T>, _>>()?;
    let Some(min) = costs.iter().cloned().reduce(|m, c| if c < m { c } else { m }) else {
        return Ok(Vec::new());
    };
    let limit = min + T::slack();
    Ok((0..costs.len()).filter(|&i| costs[i] <= limit).collect())
}

/// Profiles of `ps` at the given indices.
pub fn select<'a, T: Scalar>(ps: &'a ProfileSet<T>, indices: &[usize]) -> Vec<&'a ErrorProfile<T>> {
    indices.iter().map(|&i| ps.profile(i)).collect()
}
