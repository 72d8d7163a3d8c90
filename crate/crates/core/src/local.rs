//! Local phase: projected multi-objective steepest descent.
//!
//! The direction at `y` solves
//!
//! ```text
//! min_d  max_j g_j^T d + |d|^2 / 2    s.t.  lower - y <= d <= upper - y
//! ```
//!
//! through its dual over the unit simplex: for weights `lambda` the inner
//! minimizer is `d = clamp(-sum_j lambda_j g_j)`. The dual is piecewise
//! quadratic, so it is solved exactly by iterating on the set of clamped
//! coordinates and enumerating the faces of the simplex. A projected-gradient
//! ascent is kept as a fallback for many objectives or degenerate inputs.

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::mop::project_to_box;
use crate::problem::{Jacobian, MopProblem};

pub const ARMIJO_C1: f64 = 1e-4;
pub const ARMIJO_RHO: f64 = 0.5;
pub const ARMIJO_BETA0: f64 = 1.0;
pub const ARMIJO_MAX_BACKTRACKS: usize = 50;

const FACE_ENUMERATION_MAX_M: usize = 10;
const ACTIVE_SET_MAX_ITERS: usize = 50;
const PG_MAX_ITERS: usize = 500;
const PG_TOL: f64 = 1e-12;

/// Solution of the direction subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub d: Vec<f64>,
    /// Optimal value `max_j g_j^T d + |d|^2 / 2`, never positive.
    pub theta: f64,
    /// Convex weights `lambda` with `d = clamp(-sum_j lambda_j g_j)`.
    pub multipliers: Vec<f64>,
}

/// Unconstrained direction: `d = -sum_j lambda_j g_j`.
pub fn steepest_descent_direction(jac: &Jacobian) -> Result<Direction> {
    let n = jac.first().map_or(0, |r| r.len());
    let lo = vec![f64::NEG_INFINITY; n];
    let hi = vec![f64::INFINITY; n];
    projected_descent_direction(jac, &lo, &hi)
}

/// Direction with the box constraint `lo <= d <= hi`, where `lo <= 0 <= hi`.
pub fn projected_descent_direction(jac: &Jacobian, lo: &[f64], hi: &[f64]) -> Result<Direction> {
    let m = jac.len();
    if m == 0 {
        return Err(Error::Parameter("empty Jacobian".into()));
    }
    let n = jac[0].len();
    if jac.iter().any(|r| r.len() != n) || lo.len() != n || hi.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: lo.len(),
        });
    }
    if jac.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("Jacobian has non-finite entries".into()));
    }
    let dual = Dual { g: jac, lo, hi };

    if jac.iter().flatten().all(|v| *v == 0.0) {
        return Ok(dual.direction(vec![1.0 / m as f64; m]));
    }

    let scale = jac
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>())
        .fold(1.0, f64::max);
    let tol = 1e-13 * scale;

    let exact = |start: &[f64]| -> Option<Direction> {
        if m > FACE_ENUMERATION_MAX_M {
            return None;
        }
        let dir = dual.direction(dual.active_set(start)?);
        (dual.gap(&dir) <= tol).then_some(dir)
    };
    if let Some(dir) = exact(&vec![1.0 / m as f64; m]) {
        return Ok(dir);
    }
    // the pattern iteration can cycle from a poor start; restart it from an
    // approximate dual solution, whose clamping pattern is nearly optimal
    let (lambda, gap) = dual.projected_gradient();
    if let Some(dir) = exact(&lambda) {
        return Ok(dir);
    }
    if gap <= tol.max(1e-10 * scale) {
        Ok(dual.direction(lambda))
    } else {
        Err(Error::Numerical { residual: gap })
    }
}

struct Dual<'a> {
    g: &'a Jacobian,
    lo: &'a [f64],
    hi: &'a [f64],
}

impl Dual<'_> {
    fn combine(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.lo.len();
        let mut v = vec![0.0; n];
        for (row, l) in self.g.iter().zip(lambda) {
            for (vi, gi) in v.iter_mut().zip(row) {
                *vi += l * gi;
            }
        }
        v
    }

    fn d_of(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.lo.iter().zip(self.hi))
            .map(|(vi, (l, h))| (-vi).clamp(*l, *h))
            .collect()
    }

    fn direction(&self, lambda: Vec<f64>) -> Direction {
        let d = self.d_of(&self.combine(&lambda));
        Direction {
            theta: primal_value(self.g, &d),
            d,
            multipliers: lambda,
        }
    }

    fn dual_value(&self, lambda: &[f64]) -> f64 {
        let v = self.combine(lambda);
        let d = self.d_of(&v);
        v.iter().zip(&d).map(|(a, b)| a * b + 0.5 * b * b).sum()
    }

    fn gap(&self, dir: &Direction) -> f64 {
        dir.theta - self.dual_value(&dir.multipliers)
    }

    // exact maximizer of the dual restricted to a fixed clamping pattern,
    // iterated until the pattern reproduces itself
    fn active_set(&self, start: &[f64]) -> Option<Vec<f64>> {
        let mut lambda;
        let mut pattern = self.pattern(start);
        for _ in 0..ACTIVE_SET_MAX_ITERS {
            lambda = self.solve_face_qp(&pattern)?;
            let next = self.pattern(&lambda);
            if next == pattern {
                return Some(lambda);
            }
            pattern = next;
        }
        None
    }

    // None = free coordinate, Some(c) = clamped at bound c
    fn pattern(&self, lambda: &[f64]) -> Vec<Option<f64>> {
        self.combine(lambda)
            .iter()
            .zip(self.lo.iter().zip(self.hi))
            .map(|(v, (l, h))| {
                let t = -v;
                if t < *l {
                    Some(*l)
                } else if t > *h {
                    Some(*h)
                } else {
                    None
                }
            })
            .collect()
    }

    // maximize -lambda^T A lambda / 2 + b^T lambda over the simplex, with
    // A = G_F G_F^T on free coordinates and b = G_C c on clamped ones
    fn solve_face_qp(&self, pattern: &[Option<f64>]) -> Option<Vec<f64>> {
        let m = self.g.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![0.0; m];
        for (i, p) in pattern.iter().enumerate() {
            match p {
                None => {
                    for j in 0..m {
                        for k in j..m {
                            let v = self.g[j][i] * self.g[k][i];
                            a[j][k] += v;
                            if k != j {
                                a[k][j] += v;
                            }
                        }
                    }
                }
                Some(c) => {
                    for j in 0..m {
                        b[j] += self.g[j][i] * c;
                    }
                }
            }
        }
        let objective = |lam: &[f64]| {
            let mut q = 0.0;
            for j in 0..m {
                for k in 0..m {
                    q += lam[j] * a[j][k] * lam[k];
                }
            }
            -0.5 * q + lam.iter().zip(&b).map(|(l, bj)| l * bj).sum::<f64>()
        };
        let scale = a.iter().flatten().fold(1.0f64, |s, v| s.max(v.abs()));
        let kkt_tol = 1e-12 * scale.max(b.iter().fold(0.0f64, |s, v| s.max(v.abs())));

        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 1u32..(1u32 << m) {
            let support: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
            let k = support.len();
            // [A_SS 1; 1^T 0] [lambda_S; nu] = [b_S; 1]
            let mut sys = vec![vec![0.0; k + 2]; k + 1];
            for (r, &j) in support.iter().enumerate() {
                for (c, &q) in support.iter().enumerate() {
                    sys[r][c] = a[j][q];
                }
                sys[r][k] = 1.0;
                sys[r][k + 1] = b[j];
            }
            for c in 0..k {
                sys[k][c] = 1.0;
            }
            sys[k][k + 1] = 1.0;
            let Some(sol) = solve_dense(sys, scale) else {
                continue;
            };
            if sol[..k].iter().any(|v| *v < -1e-14) {
                continue;
            }
            let mut lam = vec![0.0; m];
            for (r, &j) in support.iter().enumerate() {
                lam[j] = sol[r].max(0.0);
            }
            let total: f64 = lam.iter().sum();
            lam.iter_mut().for_each(|v| *v /= total);
            let nu = sol[k];
            // outside the support the gradient b - A lambda may not exceed nu
            let violated = (0..m).filter(|j| mask & (1 << j) == 0).any(|j| {
                let grad = b[j] - (0..m).map(|q| a[j][q] * lam[q]).sum::<f64>();
                grad > nu + kkt_tol
            });
            if violated {
                continue;
            }
            let val = objective(&lam);
            if best.as_ref().is_none_or(|(bv, _)| val > *bv + 1e-15 * scale) {
                best = Some((val, lam));
            }
        }
        best.map(|(_, lam)| lam)
    }

    // accelerated projected gradient ascent; returns weights and duality gap
    fn projected_gradient(&self) -> (Vec<f64>, f64) {
        let m = self.g.len();
        let lip: f64 = self
            .g
            .iter()
            .map(|r| r.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .max(1e-300);
        let mut lambda = vec![1.0 / m as f64; m];
        let mut z = lambda.clone();
        let mut t = 1.0f64;
        let mut gap = f64::INFINITY;
        for _ in 0..PG_MAX_ITERS {
            let d = self.d_of(&self.combine(&z));
            let grad: Vec<f64> = self
                .g
                .iter()
                .map(|row| row.iter().zip(&d).map(|(a, b)| a * b).sum())
                .collect();
            let step: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + gi / lip).collect();
            let next = project_simplex(&step);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            z = next
                .iter()
                .zip(&lambda)
                .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
                .collect();
            let z_proj = project_simplex(&z);
            z = z_proj;
            let moved = next
                .iter()
                .zip(&lambda)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            lambda = next;
            t = t_next;
            gap = self.gap(&self.direction(lambda.clone()));
            if moved < PG_TOL && gap.abs() < PG_TOL {
                break;
            }
        }
        (lambda, gap)
    }
}

/// `max_j g_j^T d + |d|^2 / 2`.
pub fn primal_value(jac: &Jacobian, d: &[f64]) -> f64 {
    let half_sq = 0.5 * d.iter().map(|v| v * v).sum::<f64>();
    jac.iter()
        .map(|row| row.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
        + half_sq
}

/// Euclidean projection onto the unit simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut shift = 0.0;
    for (k, ui) in u.iter().enumerate() {
        cum += ui;
        let candidate = (cum - 1.0) / (k + 1) as f64;
        if ui - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

// Gaussian elimination with partial pivoting on an augmented matrix, plus
// one round of iterative refinement.
fn solve_dense(aug: Vec<Vec<f64>>, scale: f64) -> Option<Vec<f64>> {
    let n = aug.len();
    let mut x = eliminate(aug.clone(), scale)?;
    let mut correction = aug.clone();
    for (r, row) in correction.iter_mut().enumerate() {
        let ax: f64 = (0..n).map(|c| aug[r][c] * x[c]).sum();
        row[n] = aug[r][n] - ax;
    }
    let dx = eliminate(correction, scale)?;
    x.iter_mut().zip(dx).for_each(|(xi, di)| *xi += di);
    Some(x)
}

fn eliminate(mut a: Vec<Vec<f64>>, scale: f64) -> Option<Vec<f64>> {
    let n = a.len();
    let pivot_tol = 1e-12 * scale.max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < pivot_tol {
            return None;
        }
        a.swap(col, piv);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (a[r][n] - s) / a[r][r];
    }
    Some(x)
}

/// An accepted Armijo step.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoStep {
    pub step: f64,
    pub point: Vec<f64>,
    pub values: Vec<f64>,
}

/// Backtracks `beta0 * 0.5^k`, `k = 0..=50`, until
/// `f_j(P(y + step d)) <= f_j(y) + c1 step theta` holds for every `j`.
/// `Ok(None)` signals that no step qualified.
pub fn armijo_backtrack(
    problem: &MopProblem,
    y: &[f64],
    fy: &[f64],
    d: &[f64],
    theta: f64,
    c1: f64,
    beta0: f64,
) -> Result<Option<ArmijoStep>> {
    let mut step = beta0;
    let mut trial = vec![0.0; y.len()];
    for _ in 0..=ARMIJO_MAX_BACKTRACKS {
        for i in 0..y.len() {
            trial[i] = y[i] + step * d[i];
        }
        let point = project_to_box(&trial, problem.bounds());
        let values = problem.evaluate(&point)?;
        let slack = c1 * step * theta;
        if values.iter().zip(fy).all(|(new, old)| *new <= old + slack) {
            return Ok(Some(ArmijoStep {
                step,
                point,
                values,
            }));
        }
        step *= ARMIJO_RHO;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalStatus {
    /// `|theta|` fell below the criticality tolerance.
    Critical,
    /// No Armijo step was accepted; the iterate is treated as converged
    /// numerically but is not certified.
    LineSearchStall,
    IterationLimit,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDescentResult {
    pub point: Vec<f64>,
    pub objectives: Vec<f64>,
    pub multipliers: Vec<f64>,
    /// `theta` at the returned point.
    pub criticality: f64,
    /// Norm of the projected direction `clamp(-sum_j lambda_j grad f_j)`;
    /// equals `|sum_j lambda_j grad f_j|` in the interior.
    pub residual: f64,
    pub iterations: usize,
    pub evals: u64,
    pub status: LocalStatus,
}

impl LocalDescentResult {
    pub fn converged(&self) -> bool {
        self.status == LocalStatus::Critical
    }
}

/// One accepted local step, for replaying the Armijo inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalStep {
    pub from: Vec<f64>,
    pub f_from: Vec<f64>,
    pub to: Vec<f64>,
    pub f_to: Vec<f64>,
    pub step: f64,
    pub theta: f64,
}

/// Descends from `y0` to a Pareto-critical point of the box-constrained
/// problem.
///
/// Fails only when `y0` is infeasible or cannot be evaluated at all; running
/// out of budget later yields a result flagged [`LocalStatus::BudgetExhausted`].
pub fn local_weak_efficient(
    problem: &MopProblem,
    y0: &[f64],
    cfg: &SolverConfig,
) -> Result<LocalDescentResult> {
    descend(problem, y0, cfg, None)
}

/// [`local_weak_efficient`] that also returns every accepted step.
pub fn local_weak_efficient_traced(
    problem: &MopProblem,
    y0: &[f64],
    cfg: &SolverConfig,
) -> Result<(LocalDescentResult, Vec<LocalStep>)> {
    let mut trace = Vec::new();
    let res = descend(problem, y0, cfg, Some(&mut trace))?;
    Ok((res, trace))
}

fn descend(
    problem: &MopProblem,
    y0: &[f64],
    cfg: &SolverConfig,
    mut trace: Option<&mut Vec<LocalStep>>,
) -> Result<LocalDescentResult> {
    let start_evals = problem.evals();
    let crit_tol = cfg.crit_tol_for(problem.n());
    let bounds = problem.bounds();
    let mut y = y0.to_vec();
    let mut fy = problem.evaluate(&y)?;
    let mut iterations = 0;

    let mut last: Option<Direction> = None;
    let status = loop {
        let jac = match problem.jacobian(&y) {
            Ok(j) => j,
            Err(Error::BudgetExhausted) => break LocalStatus::BudgetExhausted,
            Err(e) => return Err(e),
        };
        let lo: Vec<f64> = y.iter().zip(bounds.lower()).map(|(v, l)| l - v).collect();
        let hi: Vec<f64> = y.iter().zip(bounds.upper()).map(|(v, u)| u - v).collect();
        let dir = projected_descent_direction(&jac, &lo, &hi)?;
        let theta = dir.theta;
        let d = dir.d.clone();
        last = Some(dir);
        if theta.abs() < crit_tol || theta >= 0.0 {
            break LocalStatus::Critical;
        }
        if iterations >= cfg.max_local_iters {
            break LocalStatus::IterationLimit;
        }
        match armijo_backtrack(problem, &y, &fy, &d, theta, ARMIJO_C1, ARMIJO_BETA0) {
            Ok(Some(step)) => {
                if let Some(t) = trace.as_deref_mut() {
                    t.push(LocalStep {
                        from: y.clone(),
                        f_from: fy.clone(),
                        to: step.point.clone(),
                        f_to: step.values.clone(),
                        step: step.step,
                        theta,
                    });
                }
                y = step.point;
                fy = step.values;
                iterations += 1;
            }
            Ok(None) => break LocalStatus::LineSearchStall,
            Err(Error::BudgetExhausted) => break LocalStatus::BudgetExhausted,
            Err(e) => return Err(e),
        }
    };

    let (multipliers, criticality, residual) = match last {
        Some(dir) => {
            let r = dir.d.iter().map(|v| v * v).sum::<f64>().sqrt();
            (dir.multipliers, dir.theta, r)
        }
        None => (
            vec![1.0 / problem.m() as f64; problem.m()],
            f64::NAN,
            f64::NAN,
        ),
    };
    Ok(LocalDescentResult {
        point: y,
        objectives: fy,
        multipliers,
        criticality,
        residual,
        iterations,
        evals: problem.evals() - start_evals,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mop::Bounds;
    use crate::problems::{convex_toy, get_problem};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn recon(jac: &Jacobian, lam: &[f64]) -> Vec<f64> {
        let n = jac[0].len();
        (0..n)
            .map(|i| -jac.iter().zip(lam).map(|(r, l)| l * r[i]).sum::<f64>())
            .collect()
    }

    #[test]
    fn zero_jacobian_gives_uniform_weights() {
        let dir = steepest_descent_direction(&vec![vec![0.0; 3]; 2]).unwrap();
        assert_eq!(dir.d, vec![0.0; 3]);
        assert_eq!(dir.theta, 0.0);
        assert_eq!(dir.multipliers, vec![0.5, 0.5]);
    }

    #[test]
    fn identical_gradients() {
        let g = vec![1.0, -2.0, 0.5];
        let dir = steepest_descent_direction(&vec![g.clone(), g.clone()]).unwrap();
        for (d, gi) in dir.d.iter().zip(&g) {
            assert!((d + gi).abs() < 1e-14);
        }
        let half_sq = 0.5 * g.iter().map(|v| v * v).sum::<f64>();
        assert!((dir.theta + half_sq).abs() < 1e-14);
        assert!((dir.multipliers.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn opposite_gradients_are_critical() {
        let dir = steepest_descent_direction(&vec![vec![1.0], vec![-1.0]]).unwrap();
        assert_eq!(dir.d, vec![0.0]);
        assert_eq!(dir.theta, 0.0);
        assert!((dir.multipliers[0] - 0.5).abs() < 1e-15);
        assert!((dir.multipliers[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_clamps_direction() {
        // single effective gradient (1, 1); the box allows only d_0 >= -0.1
        let jac = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let dir = projected_descent_direction(&jac, &[-0.1, -5.0], &[5.0, 5.0]).unwrap();
        assert!((dir.d[0] + 0.1).abs() < 1e-14 && (dir.d[1] + 1.0).abs() < 1e-14);
        assert!((dir.theta - (-1.1 + 0.5 * 1.01)).abs() < 1e-14);
    }

    // brute-force oracle: dense grid over lambda for m = 2
    fn grid_dual_max(jac: &Jacobian, lo: &[f64], hi: &[f64]) -> f64 {
        let dual = Dual { g: jac, lo, hi };
        (0..=20000)
            .map(|k| {
                let l = k as f64 / 20000.0;
                dual.dual_value(&[l, 1.0 - l])
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn exact_solver_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(1..6);
            let jac: Jacobian = (0..2)
                .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let lo: Vec<f64> = (0..n).map(|_| -rng.random_range(0.0..1.5)).collect();
            let hi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.5)).collect();
            let dir = projected_descent_direction(&jac, &lo, &hi).unwrap();
            let oracle = grid_dual_max(&jac, &lo, &hi);
            assert!(dir.theta >= oracle - 1e-9, "{} < {}", dir.theta, oracle);
            assert!(dir.theta <= oracle + 1e-6, "{} > {}", dir.theta, oracle);
            assert!(dir.theta <= 1e-15, "{jac:?} {lo:?} {hi:?} {dir:?}");
        }
    }

    #[test]
    fn fallback_agrees_with_exact_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let m = rng.random_range(2..4);
            let jac: Jacobian = (0..m)
                .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let lo = [-0.3, -1.0, -0.05, -2.0];
            let hi = [0.4, 0.1, 1.0, 2.0];
            let exact = projected_descent_direction(&jac, &lo, &hi).unwrap();
            let dual = Dual { g: &jac, lo: &lo, hi: &hi };
            let (lam, _) = dual.projected_gradient();
            let approx = dual.direction(lam);
            assert!((exact.theta - approx.theta).abs() < 1e-6, "{} vs {}", exact.theta, approx.theta);
        }
    }

    proptest! {
        #[test]
        fn direction_invariants(rows in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 4), 2..4)) {
            let dir = steepest_descent_direction(&rows).unwrap();
            prop_assert!((primal_value(&rows, &dir.d) - dir.theta).abs() <= 1e-10);
            let r = recon(&rows, &dir.multipliers);
            for (a, b) in r.iter().zip(&dir.d) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
            prop_assert!(dir.multipliers.iter().all(|l| *l >= 0.0));
            prop_assert!((dir.multipliers.iter().sum::<f64>() - 1.0).abs() <= 1e-8);
            prop_assert!(dir.theta <= 1e-15);
        }

        #[test]
        fn simplex_projection_is_feasible(v in prop::collection::vec(-5.0f64..5.0, 1..6)) {
            let p = project_simplex(&v);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    fn twin(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MopProblem {
        MopProblem::builder("twin", Bounds::uniform(1, -5.0, 5.0).unwrap(), 2)
            .objectives(move |y| vec![f(y[0]), f(y[0])])
            .build()
            .unwrap()
    }

    #[test]
    fn armijo_hand_example() {
        let p = twin(|y| y * y);
        let s = armijo_backtrack(&p, &[1.0], &[1.0, 1.0], &[-2.0], -2.0, 1e-4, 1.0)
            .unwrap()
            .unwrap();
        assert_eq!(s.step, 0.5);
        assert_eq!(s.point, vec![0.0]);
    }

    #[test]
    fn armijo_accepts_full_step_on_linear_descent() {
        let p = twin(|y| -y);
        let s = armijo_backtrack(&p, &[0.0], &[0.0, 0.0], &[1.0], -0.5, 1e-4, 1.0)
            .unwrap()
            .unwrap();
        assert_eq!(s.step, 1.0);
    }

    #[test]
    fn armijo_fails_on_uphill_direction() {
        let p = MopProblem::builder("split", Bounds::uniform(1, -5.0, 5.0).unwrap(), 2)
            .objectives(|y| vec![y[0], -y[0]])
            .build()
            .unwrap();
        let r = armijo_backtrack(&p, &[0.0], &[0.0, 0.0], &[1.0], -1.0, 1e-4, 1.0).unwrap();
        assert!(r.is_none());
        assert_eq!(p.evals(), ARMIJO_MAX_BACKTRACKS as u64 + 1);
    }

    fn toy() -> MopProblem {
        convex_toy(
            "toy",
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            Bounds::uniform(2, -3.0, 3.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn convex_toy_converges_onto_segment() {
        let p = toy();
        let r = local_weak_efficient(&p, &[0.2, 0.7], &SolverConfig::default()).unwrap();
        assert!(r.converged());
        assert!(r.criticality.abs() < 1e-8);
        // on the segment y1 = y2 within [0, 1]
        assert!((r.point[0] - r.point[1]).abs() < 1e-6, "{:?}", r.point);
        assert!((-1e-9..=1.0 + 1e-9).contains(&r.point[0]));
        // 0 in conv{2(y - a), 2(y - b)}
        let jac = p.analytic_jacobian(&r.point).unwrap();
        let res = recon(&jac, &r.multipliers);
        assert!(res.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-5);
    }

    #[test]
    fn critical_start_takes_no_iterations() {
        let p = toy();
        let r = local_weak_efficient(&p, &[0.5, 0.5], &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.point, vec![0.5, 0.5]);
        assert_eq!(r.evals, 1);
    }

    #[test]
    fn dtlz2n2_converges_to_unit_circle() {
        let p = get_problem("DTLZ2n2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let y0 = vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let r = local_weak_efficient(&p, &y0, &SolverConfig::default()).unwrap();
            if r.converged() {
                let rad = r.objectives.iter().map(|v| v * v).sum::<f64>();
                // a start that lands on y1 in {0, 1} pins one objective at its
                // global minimum 0: weakly efficient without being on the circle
                let pinned = r.objectives.iter().any(|v| v.abs() < 1e-12);
                assert!(pinned || (rad - 1.0).abs() < 1e-3, "{y0:?} -> {:?}", r.objectives);
            }
        }
    }

    #[test]
    fn convex_toy_random_starts_certify_criticality() {
        let p = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let y0 = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let r = local_weak_efficient(&p, &y0, &SolverConfig::default()).unwrap();
            assert!(r.converged(), "{y0:?}: {:?}", r.status);
            assert!(r.criticality.abs() < 1e-6);
            let jac = p.analytic_jacobian(&r.point).unwrap();
            let res = recon(&jac, &r.multipliers);
            assert!(res.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-5);
        }
    }

    #[test]
    fn trace_satisfies_armijo() {
        let p = get_problem("P4a").unwrap();
        let (r, trace) =
            local_weak_efficient_traced(&p, &[0.9, 0.5], &SolverConfig::default()).unwrap();
        assert_eq!(trace.len(), r.iterations);
        for s in &trace {
            for (new, old) in s.f_to.iter().zip(&s.f_from) {
                assert!(*new <= old + ARMIJO_C1 * s.step * s.theta);
            }
            assert!(p.bounds().contains(&s.to));
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let p = get_problem("P4a").unwrap().with_eval_limit(3);
        let r = local_weak_efficient(&p, &[0.9, 0.5], &SolverConfig::default()).unwrap();
        assert_eq!(r.status, LocalStatus::BudgetExhausted);
        assert!(p.bounds().contains(&r.point));
        let p = get_problem("P4a").unwrap().with_eval_limit(0);
        assert_eq!(
            local_weak_efficient(&p, &[0.9, 0.5], &SolverConfig::default()),
            Err(Error::BudgetExhausted)
        );
    }
}
