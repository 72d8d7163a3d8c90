//! Front-quality indicators and performance profiles.
//!
//! Purity, spread and hypervolume follow the usual benchmarking definitions
//! spelled out on each function. Fronts are plain lists of objective vectors.
//! Spread measures treat fewer than two distinct points as an infinite marker,
//! which serializes as the string `"inf"`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mop::{inf_distance, nondominated_points, DEDUP_TOL};

/// Offset in `1 / (metric + offset)`, the lower-is-better form of purity and
/// hypervolume used for profiles.
pub const INVERSE_OFFSET: f64 = 1e-12;

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn dedup(front: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(front.len());
    for p in front {
        if !out.iter().any(|q| inf_distance(p, q) <= DEDUP_TOL) {
            out.push(p.clone());
        }
    }
    out
}

/// Fraction of `front` that survives in the non-dominated set of the union
/// of `all_fronts`. Membership is up to [`DEDUP_TOL`] in the max norm.
/// An empty front has purity 0.
pub fn purity(front: &[Vec<f64>], all_fronts: &[Vec<Vec<f64>>]) -> f64 {
    if front.is_empty() {
        return 0.0;
    }
    let union: Vec<Vec<f64>> = all_fronts.iter().flatten().cloned().collect();
    let reference = nondominated_points(&union);
    let kept = front
        .iter()
        .filter(|p| reference.iter().any(|r| inf_distance(p, r) <= DEDUP_TOL))
        .count();
    kept as f64 / front.len() as f64
}

fn max_sorted_gap(points: &[Vec<f64>], axis: usize) -> f64 {
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a[axis].total_cmp(&b[axis]));
    sorted
        .windows(2)
        .map(|w| euclid(w[0], w[1]))
        .fold(0.0, f64::max)
}

/// Largest gap between neighbouring points.
///
/// With two objectives the points are sorted by `f1` and the result is the
/// largest Euclidean distance between consecutive points. With three, the
/// same construction is repeated with the points sorted by each objective in
/// turn and the largest of the three values is returned.
pub fn gamma_spread(front: &[Vec<f64>]) -> Result<f64> {
    let pts = dedup(front);
    if pts.len() < 2 {
        return Ok(f64::INFINITY);
    }
    match pts[0].len() {
        2 => Ok(max_sorted_gap(&pts, 0)),
        3 => Ok((0..3).map(|j| max_sorted_gap(&pts, j)).fold(0.0, f64::max)),
        m => Err(Error::Parameter(format!("gamma spread needs 2 or 3 objectives, got {m}"))),
    }
}

/// Deb's Δ for a bi-objective front.
///
/// With the front sorted by `f1`, `d_i` the `N - 1` consecutive Euclidean
/// gaps, `d_mean` their mean and `d_f`, `d_l` the distances from the
/// extremes to the first and last point:
/// `(d_f + d_l + sum |d_i - d_mean|) / (d_f + d_l + (N - 1) d_mean)`.
pub fn delta_spread(front: &[Vec<f64>], extremes: (&[f64], &[f64])) -> Result<f64> {
    let mut pts = dedup(front);
    if pts.iter().chain([&extremes.0.to_vec(), &extremes.1.to_vec()]).any(|p| p.len() != 2) {
        return Err(Error::Parameter("delta spread needs two objectives".into()));
    }
    if pts.len() < 2 {
        return Ok(f64::INFINITY);
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let (first, last) = if extremes.0[0] <= extremes.1[0] {
        extremes
    } else {
        (extremes.1, extremes.0)
    };
    let d_f = euclid(first, &pts[0]);
    let d_l = euclid(last, &pts[pts.len() - 1]);
    let gaps: Vec<f64> = pts.windows(2).map(|w| euclid(&w[0], &w[1])).collect();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let dev: f64 = gaps.iter().map(|d| (d - mean).abs()).sum();
    let denom = d_f + d_l + gaps.len() as f64 * mean;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((d_f + d_l + dev) / denom)
}

/// The two bi-objective extremes of a reference front: the points with the
/// smallest `f1` and the smallest `f2` (ties broken by the other objective).
pub fn extremes_2d(reference: &[Vec<f64>]) -> Option<(Vec<f64>, Vec<f64>)> {
    let by = |j: usize| {
        reference
            .iter()
            .min_by(|a, b| a[j].total_cmp(&b[j]).then(a[1 - j].total_cmp(&b[1 - j])))
            .cloned()
    };
    Some((by(0)?, by(1)?))
}

fn hv2(points: &mut [[f64; 2]], r: [f64; 2]) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut best_f2 = r[1];
    for (i, p) in points.iter().enumerate() {
        if p[1] < best_f2 {
            best_f2 = p[1];
        }
        let next = points.get(i + 1).map_or(r[0], |q| q[0]);
        area += (next - p[0]) * (r[1] - best_f2);
    }
    area
}

/// Exact hypervolume dominated by `front` and bounded by `reference`, for two
/// or three objectives. Points not strictly below the reference in every
/// objective are dropped.
pub fn hypervolume(front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let m = reference.len();
    if !(m == 2 || m == 3) {
        return Err(Error::Parameter(format!("hypervolume needs 2 or 3 objectives, got {m}")));
    }
    if let Some(p) = front.iter().find(|p| p.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: p.len() });
    }
    let inside: Vec<&Vec<f64>> = front
        .iter()
        .filter(|p| p.iter().zip(reference).all(|(a, r)| a < r))
        .collect();
    if inside.len() < front.len() {
        warn!(
            "hypervolume: {} point(s) outside the reference box ignored",
            front.len() - inside.len()
        );
    }
    if m == 2 {
        let mut pts: Vec<[f64; 2]> = inside.iter().map(|p| [p[0], p[1]]).collect();
        return Ok(hv2(&mut pts, [reference[0], reference[1]]));
    }
    // slice along f3: between consecutive levels the section is the 2-D
    // front of every point at or below the lower level
    let mut pts: Vec<&Vec<f64>> = inside;
    pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut volume = 0.0;
    let mut section: Vec<[f64; 2]> = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        section.push([p[0], p[1]]);
        let next = pts.get(i + 1).map_or(reference[2], |q| q[2]);
        if next > p[2] {
            volume += (next - p[2]) * hv2(&mut section, [reference[0], reference[1]]);
        }
    }
    Ok(volume)
}

/// `nadir + 0.1 (nadir - ideal)` per objective.
pub fn hv_reference(ideal: &[f64], nadir: &[f64]) -> Vec<f64> {
    ideal.iter().zip(nadir).map(|(i, n)| n + 0.1 * (n - i)).collect()
}

/// `1 / (value + INVERSE_OFFSET)`.
pub fn inverse_metric(value: f64) -> f64 {
    1.0 / (value + INVERSE_OFFSET)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileCurve {
    pub solver: String,
    pub taus: Vec<f64>,
    pub rhos: Vec<f64>,
}

impl ProfileCurve {
    /// Step-function value at `tau`.
    pub fn rho_at(&self, tau: f64) -> f64 {
        match self.taus.iter().rposition(|t| *t <= tau) {
            Some(k) => self.rhos[k],
            None => 0.0,
        }
    }
}

/// Performance ratios `r[p][s] = v[p][s] / min_s' v[p][s']`; failed cells are
/// infinite. Rows where every solver failed are removed.
pub fn performance_ratios(values: &[Vec<f64>], failed: &[Vec<bool>]) -> Result<Vec<Vec<f64>>> {
    if values.len() != failed.len() {
        return Err(Error::DimensionMismatch { expected: values.len(), got: failed.len() });
    }
    let mut rows = Vec::with_capacity(values.len());
    for (p, (v, f)) in values.iter().zip(failed).enumerate() {
        if v.len() != f.len() {
            return Err(Error::DimensionMismatch { expected: v.len(), got: f.len() });
        }
        let ok: Vec<f64> = v.iter().zip(f).filter(|(_, f)| !**f).map(|(x, _)| *x).collect();
        if ok.is_empty() {
            warn!("performance profile: problem {p} failed for every solver, dropped");
            continue;
        }
        if let Some(bad) = ok.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return Err(Error::Parameter(format!("profile value {bad} on problem {p} is not positive")));
        }
        let best = ok.iter().cloned().fold(f64::INFINITY, f64::min);
        rows.push(
            v.iter()
                .zip(f)
                .map(|(x, f)| if *f { f64::INFINITY } else { x / best })
                .collect(),
        );
    }
    Ok(rows)
}

/// Dolan–Moré profiles: `rho_s(tau)` is the fraction of problems on which
/// solver `s` is within a factor `tau` of the best. Breakpoints are `tau = 1`
/// and every finite ratio.
pub fn performance_profile(
    solvers: &[String],
    values: &[Vec<f64>],
    failed: &[Vec<bool>],
) -> Result<Vec<ProfileCurve>> {
    if let Some(row) = values.iter().find(|r| r.len() != solvers.len()) {
        return Err(Error::DimensionMismatch { expected: solvers.len(), got: row.len() });
    }
    let ratios = performance_ratios(values, failed)?;
    let mut taus: Vec<f64> = ratios
        .iter()
        .flatten()
        .cloned()
        .filter(|r| r.is_finite())
        .chain([1.0])
        .collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup();
    let count = ratios.len();
    Ok(solvers
        .iter()
        .enumerate()
        .map(|(s, name)| {
            let rhos = taus
                .iter()
                .map(|t| {
                    if count == 0 {
                        0.0
                    } else {
                        ratios.iter().filter(|r| r[s] <= *t).count() as f64 / count as f64
                    }
                })
                .collect();
            ProfileCurve { solver: name.clone(), taus: taus.clone(), rhos }
        })
        .collect())
}

/// Serializes infinities as `"inf"` and reads them back.
pub mod inf_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
        }
    }

    pub mod option {
        use serde::{Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            #[derive(Deserialize)]
            struct Wrap(#[serde(with = "super")] f64);
            Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
        }
    }
}

/// Quality of one front, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub problem: String,
    pub solver: String,
    pub seed: u64,
    pub purity: f64,
    /// Only defined for two objectives.
    #[serde(with = "inf_float::option")]
    pub delta_spread: Option<f64>,
    #[serde(with = "inf_float")]
    pub gamma_spread: f64,
    pub hypervolume: f64,
    pub evals: u64,
    pub reference_point: Vec<f64>,
}

/// Inputs shared by every front of one problem.
#[derive(Debug, Clone)]
pub struct MetricsContext<'a> {
    pub problem: &'a str,
    /// Every front competing on this problem, for purity.
    pub all_fronts: &'a [Vec<Vec<f64>>],
    /// Reference front whose extremes anchor the Δ-spread.
    pub reference_front: &'a [Vec<f64>],
    pub hv_reference: &'a [f64],
}

impl MetricsReport {
    pub fn compute(
        ctx: &MetricsContext<'_>,
        solver: &str,
        seed: u64,
        front: &[Vec<f64>],
        evals: u64,
    ) -> Result<Self> {
        let m = ctx.hv_reference.len();
        let delta_spread = if m == 2 {
            match extremes_2d(ctx.reference_front) {
                Some((a, b)) => Some(delta_spread(front, (&a, &b))?),
                None => None,
            }
        } else {
            None
        };
        Ok(Self {
            problem: ctx.problem.to_string(),
            solver: solver.to_string(),
            seed,
            purity: purity(front, ctx.all_fronts),
            delta_spread,
            gamma_spread: gamma_spread(front)?,
            hypervolume: hypervolume(front, ctx.hv_reference)?,
            evals,
            reference_point: ctx.hv_reference.to_vec(),
        })
    }
}
