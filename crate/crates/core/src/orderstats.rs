//! Threshold enumeration of k-subset functionals and order-statistic helpers.

use alloc::vec;
use alloc::vec::Vec;

use libm::{floor, pow};

use crate::{Error, Result};

/// How [`enumerate_below`] visits k-subsets.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EnumerationStrategy {
    BruteForce,
    /// Uniform grid with the given cell size; only subsets whose members sit
    /// in mutually adjacent cells are evaluated. Needs a metric-compatible
    /// functional and a cell size at least the threshold.
    GridPrune { cell: f64 },
}

/// A symmetric functional on k-tuples.
pub trait TupleFunctional<T> {
    /// `Some(value)` for an admissible tuple, `None` otherwise. Tuples are
    /// passed in increasing input order.
    fn eval(&self, tuple: &[&T]) -> Option<f64>;

    /// Coordinates used for grid pruning. Returning `Some` is a promise that
    /// `eval` is at least the largest pairwise distance of these coordinates.
    fn anchor<'a>(&self, _item: &'a T) -> Option<&'a [f64]> {
        None
    }
}

/// A functional with no metric structure; only brute force applies.
#[derive(Debug, Clone, Copy)]
pub struct Plain<F>(pub F);

impl<T, F: Fn(&[&T]) -> Option<f64>> TupleFunctional<T> for Plain<F> {
    fn eval(&self, tuple: &[&T]) -> Option<f64> {
        (self.0)(tuple)
    }
}

/// A functional that dominates the pairwise distance of its arguments.
#[derive(Debug, Clone, Copy)]
pub struct Metric<F>(pub F);

impl<T: AsRef<[f64]>, F: Fn(&[&T]) -> Option<f64>> TupleFunctional<T> for Metric<F> {
    fn eval(&self, tuple: &[&T]) -> Option<f64> {
        (self.0)(tuple)
    }

    fn anchor<'a>(&self, item: &'a T) -> Option<&'a [f64]> {
        Some(item.as_ref())
    }
}

/// All admissible values `f(S) <= threshold` over unordered `k`-subsets `S`
/// of `items`, sorted ascending (stable, so ties keep enumeration order).
pub fn enumerate_below<T, F: TupleFunctional<T>>(
    items: &[T],
    k: usize,
    f: &F,
    threshold: f64,
    strategy: EnumerationStrategy,
) -> Result<Vec<f64>> {
    if !(threshold > 0.0) {
        return Err(Error::Domain("threshold must be positive".into()));
    }
    if k == 0 {
        return Err(Error::Domain("arity must be at least one".into()));
    }
    let mut out = Vec::new();
    match strategy {
        EnumerationStrategy::BruteForce => brute_force(items, k, f, threshold, &mut out),
        EnumerationStrategy::GridPrune { cell } => grid_prune(items, k, f, threshold, cell, &mut out)?,
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn push_if_below<T, F: TupleFunctional<T>>(f: &F, tuple: &[&T], threshold: f64, out: &mut Vec<f64>) {
    if let Some(v) = f.eval(tuple) {
        if v <= threshold {
            out.push(v);
        }
    }
}

fn brute_force<T, F: TupleFunctional<T>>(items: &[T], k: usize, f: &F, threshold: f64, out: &mut Vec<f64>) {
    let n = items.len();
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut tuple: Vec<&T> = idx.iter().map(|&i| &items[i]).collect();
    loop {
        for (slot, &i) in tuple.iter_mut().zip(&idx) {
            *slot = &items[i];
        }
        push_if_below(f, &tuple, threshold, out);
        // advance to the next combination in lexicographic order
        let mut pos = k;
        while pos > 0 && idx[pos - 1] == n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            return;
        }
        idx[pos - 1] += 1;
        for j in pos..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn grid_prune<T, F: TupleFunctional<T>>(
    items: &[T],
    k: usize,
    f: &F,
    threshold: f64,
    cell: f64,
    out: &mut Vec<f64>,
) -> Result<()> {
    if !(cell >= threshold) || !cell.is_finite() {
        return Err(Error::Config("grid cell size must be finite and at least the threshold".into()));
    }
    let Some(first) = items.first() else { return Ok(()) };
    let Some(a0) = f.anchor(first) else {
        return Err(Error::Config("grid pruning needs a metric-compatible functional".into()));
    };
    let d = a0.len();
    if k == 1 {
        brute_force(items, k, f, threshold, out);
        return Ok(());
    }
    let mut lo = vec![f64::INFINITY; d];
    for it in items {
        let a = f.anchor(it).ok_or_else(|| Error::Config("missing anchor".into()))?;
        for (l, x) in lo.iter_mut().zip(a) {
            *l = l.min(*x);
        }
    }
    let key = |it: &T| -> Vec<i64> {
        f.anchor(it).unwrap().iter().zip(&lo).map(|(x, l)| floor((x - l) / cell) as i64).collect()
    };
    let keys: Vec<Vec<i64>> = items.iter().map(key).collect();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
    let sorted_keys: Vec<&Vec<i64>> = order.iter().map(|&i| &keys[i]).collect();

    let offsets = pow(3.0, d as f64) as usize;
    let mut probe = vec![0i64; d];
    let mut cands: Vec<usize> = Vec::new();
    let mut tuple: Vec<&T> = Vec::with_capacity(k);
    for i in 0..items.len() {
        cands.clear();
        for code in 0..offsets {
            let mut c = code;
            for (p, k0) in probe.iter_mut().zip(&keys[i]) {
                *p = k0 + (c % 3) as i64 - 1;
                c /= 3;
            }
            let start = sorted_keys.partition_point(|kk| kk.as_slice() < probe.as_slice());
            let end = sorted_keys.partition_point(|kk| kk.as_slice() <= probe.as_slice());
            cands.extend(order[start..end].iter().copied().filter(|&j| j > i));
        }
        cands.sort_unstable();
        if cands.len() + 1 < k {
            continue;
        }
        // (k-1)-subsets of the candidates, with i as the smallest member
        let m = k - 1;
        let n = cands.len();
        let mut idx: Vec<usize> = (0..m).collect();
        loop {
            tuple.clear();
            tuple.push(&items[i]);
            tuple.extend(idx.iter().map(|&j| &items[cands[j]]));
            push_if_below(f, &tuple, threshold, out);
            let mut pos = m;
            while pos > 0 && idx[pos - 1] == n - m + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            idx[pos - 1] += 1;
            for j in pos..m {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(())
}

/// The `m` smallest values in ascending order, by partial selection.
pub fn m_smallest(values: &[f64], m: usize) -> Vec<f64> {
    let m = m.min(values.len());
    if m == 0 {
        return Vec::new();
    }
    let mut v = values.to_vec();
    if m < v.len() {
        v.select_nth_unstable_by(m - 1, f64::total_cmp);
        v.truncate(m);
    }
    v.sort_by(f64::total_cmp);
    v
}

/// `values * t^gamma`, order preserved.
pub fn rescale(values: &[f64], t: f64, gamma: f64) -> Vec<f64> {
    let s = pow(t, gamma);
    values.iter().map(|v| v * s).collect()
}

/// `F^{(m)}` for `m = 1..=m_max` from sorted values, `∞` when fewer exist.
pub fn order_statistics(sorted: &[f64], m_max: usize) -> Vec<f64> {
    (0..m_max).map(|i| sorted.get(i).copied().unwrap_or(f64::INFINITY)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;

    fn pair_dist(t: &[&[f64; 1]]) -> Option<f64> {
        Some((t[0][0] - t[1][0]).abs())
    }

    #[test]
    fn line_example() {
        let items = [[0.0], [3.0], [4.0]];
        let v = enumerate_below(&items, 2, &Metric(pair_dist), 3.5, EnumerationStrategy::BruteForce).unwrap();
        assert_eq!(v, vec![1.0, 3.0]);
        let g = enumerate_below(&items, 2, &Metric(pair_dist), 3.5, EnumerationStrategy::GridPrune { cell: 3.5 })
            .unwrap();
        assert_eq!(g, v);
    }

    #[test]
    fn full_subset() {
        let items = [[0.0], [3.0], [4.0]];
        let spread = |t: &[&[f64; 1]]| {
            let xs = t.iter().map(|p| p[0]);
            Some(xs.clone().fold(f64::MIN, f64::max) - xs.fold(f64::MAX, f64::min))
        };
        let v = enumerate_below(&items, 3, &Plain(spread), f64::INFINITY, EnumerationStrategy::BruteForce).unwrap();
        assert_eq!(v, vec![4.0]);
    }

    #[test]
    fn grid_needs_metric_and_large_cells() {
        let items = [[0.0], [3.0]];
        let e = enumerate_below(&items, 2, &Plain(pair_dist), 1.0, EnumerationStrategy::GridPrune { cell: 1.0 });
        assert!(matches!(e, Err(Error::Config(_))));
        let e = enumerate_below(&items, 2, &Metric(pair_dist), 1.0, EnumerationStrategy::GridPrune { cell: 0.5 });
        assert!(matches!(e, Err(Error::Config(_))));
    }

    #[test]
    fn grid_matches_brute_force_in_the_plane() {
        use rand::Rng;
        let mut rng = crate::sampling::split_stream(11, 0).rng();
        let pts: Vec<[f64; 2]> = (0..200).map(|_| [rng.random(), rng.random()]).collect();
        let f = Metric(|t: &[&[f64; 2]]| Some(dist(t[0], t[1])));
        let b = enumerate_below(&pts, 2, &f, 0.05, EnumerationStrategy::BruteForce).unwrap();
        let g = enumerate_below(&pts, 2, &f, 0.05, EnumerationStrategy::GridPrune { cell: 0.05 }).unwrap();
        assert!(!b.is_empty());
        assert_eq!(b, g);
    }

    #[test]
    fn selection() {
        assert_eq!(m_smallest(&[3.0, 1.0, 4.0, 1.0, 5.0], 3), vec![1.0, 1.0, 3.0]);
        assert!(m_smallest(&[], 2).is_empty());
        assert_eq!(m_smallest(&[2.0], 5), vec![2.0]);
    }

    #[test]
    fn rescaling() {
        assert_eq!(rescale(&[0.01], 100.0, 1.0), vec![1.0]);
        assert!(rescale(&[], 7.0, 2.0).is_empty());
        assert_eq!(rescale(&[0.2, 0.3], 1.0, 3.0), vec![0.2, 0.3]);
    }

    #[test]
    fn order_statistics_pad_with_infinity() {
        assert_eq!(order_statistics(&[1.0, 2.0], 3), vec![1.0, 2.0, f64::INFINITY]);
    }
}
