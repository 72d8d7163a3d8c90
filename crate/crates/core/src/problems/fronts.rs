//! Helpers that turn closed-form front parametrizations into finite samples.

use crate::mop::nondominated_points;

/// Lower bound on the number of curve samples before filtering.
const MIN_DENSE: usize = 20_000;

/// Non-dominated subset of `points`, in ascending order of the first objective
/// when `m = 2`, input order otherwise.
pub(crate) fn nondominated(points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if points.first().map_or(true, |p| p.len() != 2) {
        return nondominated_points(&points);
    }
    let mut pts = points;
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut best = f64::INFINITY;
    for p in pts {
        if p[1] < best {
            best = p[1];
            out.push(p);
        }
    }
    out
}

/// Picks `count` entries spread evenly over the index range.
pub(crate) fn subsample(points: Vec<Vec<f64>>, count: usize) -> Vec<Vec<f64>> {
    let k = points.len();
    if count >= k {
        return points;
    }
    if count == 1 {
        return vec![points[0].clone()];
    }
    let mut out = Vec::with_capacity(count);
    let mut last = usize::MAX;
    for i in 0..count {
        let idx = ((i as f64) * (k - 1) as f64 / (count - 1) as f64).round() as usize;
        if idx != last {
            out.push(points[idx].clone());
            last = idx;
        }
    }
    out
}

/// Samples `t -> curve(t)` on `[0, 1]`, filters, and subsamples to `count`.
pub(crate) fn curve_front(count: usize, curve: impl Fn(f64) -> Vec<f64>) -> Vec<Vec<f64>> {
    let dense = MIN_DENSE.max(40 * count);
    let pts = (0..dense)
        .map(|i| curve(i as f64 / (dense - 1) as f64))
        .collect();
    subsample(nondominated(pts), count)
}

/// Barycentric lattice on the unit 2-simplex with at least `count` points.
pub(crate) fn simplex_lattice(count: usize) -> Vec<[f64; 3]> {
    let mut h = 1usize;
    while (h + 1) * (h + 2) / 2 < count {
        h += 1;
    }
    let mut out = Vec::new();
    for i in 0..=h {
        for j in 0..=(h - i) {
            let a = i as f64 / h as f64;
            let b = j as f64 / h as f64;
            out.push([a, b, (1.0 - a - b).max(0.0)]);
        }
    }
    out
}

/// Samples a three-objective surface given by lattice weights.
pub(crate) fn surface_front(count: usize, map: impl Fn([f64; 3]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let pts: Vec<Vec<f64>> = simplex_lattice(count).into_iter().map(map).collect();
    subsample(nondominated(pts), count)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sort_filter_agrees_with_quadratic_filter() {
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let t = i as f64 / 199.0;
                vec![t, (7.0 * t).sin() + 1.0 - t]
            })
            .collect();
        let mut fast = nondominated(pts.clone());
        let mut slow = nondominated_points(&pts);
        fast.sort_by(|a, b| a[0].total_cmp(&b[0]));
        slow.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(fast, slow);
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let pts: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let s = subsample(pts, 3);
        assert_eq!(s, vec![vec![0.0], vec![5.0], vec![9.0]]);
    }

    #[test]
    fn lattice_is_large_enough() {
        for c in [1, 3, 10, 100, 1000] {
            let l = simplex_lattice(c);
            assert!(l.len() >= c);
            assert!(l.iter().all(|w| (w.iter().sum::<f64>() - 1.0).abs() < 1e-12));
        }
    }
}
