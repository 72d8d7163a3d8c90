//! Order relations, box geometry and archives shared by every solver component.
//!
//! Objective vectors are compared with exact floating-point comparisons; the
//! only tolerance in this module is the deduplication radius of
//! [`ParetoArchive`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{Jacobian, MopProblem};

/// Infinity-norm radius under which two objective vectors count as duplicates.
pub const DEDUP_TOL: f64 = 1e-10;

/// Relative boundary tolerance, multiplied by the width of each coordinate.
pub const BOUNDARY_REL_TOL: f64 = 1e-8;

/// Axis-aligned feasible box `lower <= y <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::Parameter("box must have at least one coordinate".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::Parameter(format!(
                    "coordinate {i}: need finite lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The box `[lo, hi]^n`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Euclidean length of the box diagonal.
    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.width(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Per-coordinate default boundary tolerance.
    pub fn boundary_tol(&self, i: usize) -> f64 {
        BOUNDARY_REL_TOL * self.width(i)
    }
}

fn check_len(a: &[f64], b: &[f64]) {
    assert_eq!(
        a.len(),
        b.len(),
        "objective vectors of different length compared"
    );
}

/// `a < b` in every component.
///
/// # Panics
/// If the vectors differ in length.
pub fn strictly_dominates(a: &[f64], b: &[f64]) -> bool {
    check_len(a, b);
    a.iter().zip(b).all(|(x, y)| x < y)
}

/// `a <= b` componentwise with `a != b`.
///
/// # Panics
/// If the vectors differ in length.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    check_len(a, b);
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Infinity-norm distance between two vectors of equal length.
pub fn inf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// One archived solution: decision vector and its objective vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchiveEntry {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

impl ArchiveEntry {
    pub fn new(x: Vec<f64>, f: Vec<f64>) -> Self {
        Self { x, f }
    }
}

/// Ordered collection of solutions without duplicate objective vectors.
///
/// When `filtered` is set the entries are additionally pairwise
/// non-dominated.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    filtered: bool,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends unless an entry with the same objective vector (within
    /// [`DEDUP_TOL`]) is already present. Returns whether it was inserted.
    ///
    /// Pushing clears the `filtered` flag.
    pub fn push(&mut self, entry: ArchiveEntry) -> bool {
        if self
            .entries
            .iter()
            .any(|e| inf_distance(&e.f, &entry.f) <= DEDUP_TOL)
        {
            return false;
        }
        self.entries.push(entry);
        self.filtered = false;
        true
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_filtered(&self) -> bool {
        self.filtered
    }

    pub fn objectives(&self) -> Vec<Vec<f64>> {
        self.entries.iter().map(|e| e.f.clone()).collect()
    }

    /// Non-dominated subset of this archive.
    pub fn filtered(&self) -> ParetoArchive {
        nondominated_filter(self.entries.iter().cloned())
    }
}

impl FromIterator<ArchiveEntry> for ParetoArchive {
    fn from_iter<I: IntoIterator<Item = ArchiveEntry>>(iter: I) -> Self {
        let mut archive = ParetoArchive::new();
        for e in iter {
            archive.push(e);
        }
        archive
    }
}

/// Keeps the entries that no other entry dominates, in input order.
///
/// Duplicate objective vectors are collapsed onto their first occurrence.
pub fn nondominated_filter<I>(entries: I) -> ParetoArchive
where
    I: IntoIterator<Item = ArchiveEntry>,
{
    let all: Vec<ArchiveEntry> = entries.into_iter().collect();
    let mut out = ParetoArchive::new();
    for (i, e) in all.iter().enumerate() {
        let dominated = all
            .iter()
            .enumerate()
            .any(|(k, other)| k != i && dominates(&other.f, &e.f));
        if !dominated {
            out.push(e.clone());
        }
    }
    out.filtered = true;
    out
}

/// Objective-only convenience wrapper around [`nondominated_filter`].
pub fn nondominated_points(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    nondominated_filter(
        points
            .iter()
            .map(|f| ArchiveEntry::new(Vec::new(), f.clone())),
    )
    .objectives()
}

/// Clamps every coordinate into the box.
pub fn project_to_box(y: &[f64], bounds: &Bounds) -> Vec<f64> {
    assert_eq!(y.len(), bounds.dim(), "point and box dimensions differ");
    y.iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .map(|(v, (l, u))| v.clamp(*l, *u))
        .collect()
}

/// True when some coordinate lies within `tol` of one of its bounds.
pub fn on_boundary(y: &[f64], bounds: &Bounds, tol: f64) -> bool {
    y.iter()
        .zip(bounds.lower().iter().zip(bounds.upper()))
        .any(|(v, (l, u))| v - l <= tol || u - v <= tol)
}

/// [`on_boundary`] with the per-coordinate default tolerance
/// `1e-8 * (upper - lower)`.
pub fn on_boundary_default(y: &[f64], bounds: &Bounds) -> bool {
    (0..bounds.dim()).any(|i| {
        let tol = bounds.boundary_tol(i);
        y[i] - bounds.lower()[i] <= tol || bounds.upper()[i] - y[i] <= tol
    })
}

/// Finite-difference Jacobian (rows = objectives).
///
/// The step for coordinate `i` is `h * max(1, |y_i|)`. Central differences are
/// used when both probes stay inside the box, otherwise a second-order
/// one-sided formula pointing into the box.
pub fn finite_diff_jacobian(problem: &MopProblem, y: &[f64], h: f64) -> Result<Jacobian> {
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("step must be positive, got {h}")));
    }
    let bounds = problem.bounds();
    let n = problem.n();
    let m = problem.m();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let mut jac = vec![vec![0.0; n]; m];
    let mut probe = y.to_vec();
    let mut f_center: Option<Vec<f64>> = None;

    for i in 0..n {
        let step = h * y[i].abs().max(1.0);
        let lo = bounds.lower()[i];
        let hi = bounds.upper()[i];
        let mut eval_at = |v: f64| -> Result<Vec<f64>> {
            probe[i] = v;
            let r = problem.evaluate(&probe);
            probe[i] = y[i];
            r
        };

        if y[i] - step >= lo && y[i] + step <= hi {
            let fp = eval_at(y[i] + step)?;
            let fm = eval_at(y[i] - step)?;
            for j in 0..m {
                jac[j][i] = (fp[j] - fm[j]) / (2.0 * step);
            }
            continue;
        }

        let forward = y[i] + 2.0 * step <= hi;
        let backward = y[i] - 2.0 * step >= lo;
        if forward || backward {
            let sign = if forward { 1.0 } else { -1.0 };
            if f_center.is_none() {
                f_center = Some(problem.evaluate(y)?);
            }
            let f0 = f_center.as_ref().unwrap();
            let f1 = eval_at(y[i] + sign * step)?;
            let f2 = eval_at(y[i] + sign * 2.0 * step)?;
            for j in 0..m {
                jac[j][i] = sign * (-3.0 * f0[j] + 4.0 * f1[j] - f2[j]) / (2.0 * step);
            }
        } else {
            // box thinner than the step: plain secant across the clamped probes
            let a = (y[i] - step).max(lo);
            let b = (y[i] + step).min(hi);
            let fa = eval_at(a)?;
            let fb = eval_at(b)?;
            for j in 0..m {
                jac[j][i] = (fb[j] - fa[j]) / (b - a);
            }
        }
    }
    Ok(jac)
}
