//! The filled function anchored at a local weak efficient point.
//!
//! ```text
//! phi_nu(t) = -nu t^3      (t >= 0)
//!           = -t^2 / nu    (t <  0)
//!
//! F_j(y) = -|y - x|^2 + phi_mu(f_j(y) - f_j(x))
//! ```
//!
//! where `x` is the anchor. Each function has a `_from` variant that takes
//! already computed objective values and Jacobians, so the driver can reuse
//! evaluations.

use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::problem::{Jacobian, MopProblem};

/// Additive offset and reset value of the lower bound on `mu`.
pub const MU_LOWER_FLOOR: f64 = 1e-5;
/// Threshold under which `s^T grad f_j` counts as zero.
pub const SLOPE_ZERO_TOL: f64 = 1e-12;
/// Relative threshold under which `f_j(y) - f_j(x)` counts as zero.
pub const EQUALITY_REL_TOL: f64 = 1e-10;

fn check_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("kernel parameter must be positive, got {nu}")))
    }
}

pub fn phi(nu: f64, t: f64) -> Result<f64> {
    check_nu(nu)?;
    Ok(phi_unchecked(nu, t))
}

pub fn phi_prime(nu: f64, t: f64) -> Result<f64> {
    check_nu(nu)?;
    Ok(phi_prime_unchecked(nu, t))
}

fn phi_unchecked(nu: f64, t: f64) -> f64 {
    if t >= 0.0 {
        -nu * t * t * t
    } else {
        -t * t / nu
    }
}

fn phi_prime_unchecked(nu: f64, t: f64) -> f64 {
    if t >= 0.0 {
        -3.0 * nu * t * t
    } else {
        -2.0 * t / nu
    }
}

/// Anchor and parameters of one filled function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilledContext {
    pub anchor: Vec<f64>,
    pub anchor_objectives: Vec<f64>,
    pub mu: f64,
    pub mu_hat: f64,
    pub mu_lower: f64,
    pub mu_upper: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub beta_u: f64,
    pub l: u32,
}

impl FilledContext {
    /// Context at the start of a global phase: `mu = mu_ini`,
    /// `mu_lower = 1e-5`.
    pub fn new(anchor: Vec<f64>, anchor_objectives: Vec<f64>, cfg: &SolverConfig) -> Result<Self> {
        let n = anchor.len();
        let ctx = Self {
            anchor,
            anchor_objectives,
            mu: cfg.mu_ini,
            mu_hat: cfg.mu_hat,
            mu_lower: MU_LOWER_FLOOR,
            mu_upper: cfg.mu_upper,
            kappa: cfg.kappa_for(n),
            epsilon: cfg.epsilon,
            beta_u: cfg.beta_u(),
            l: cfg.l,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_hat > 0.0
            && self.mu_hat < 1.0
            && self.mu > 0.0
            && self.mu <= self.mu_upper
            && self.mu_upper <= 1.0
            && self.mu_lower > 0.0
            && self.kappa > 0.0
            && self.epsilon > 0.0
            && self.beta_u > 0.0
            && self.l >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!("invalid filled-function context: {self:?}")))
        }
    }

    /// Copy with `mu` replaced.
    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..self.clone() }
    }

    fn deltas(&self, fy: &[f64]) -> Vec<f64> {
        fy.iter().zip(&self.anchor_objectives).map(|(a, b)| a - b).collect()
    }

    fn equal_tol(&self, j: usize) -> f64 {
        EQUALITY_REL_TOL * self.anchor_objectives[j].abs().max(1.0)
    }

    fn sq_dist(&self, y: &[f64]) -> f64 {
        y.iter().zip(&self.anchor).map(|(a, b)| (a - b).powi(2)).sum()
    }
}

/// `mu <- mu_hat^l * mu` with the context's `l` (inner reduction).
pub fn reduce_mu(ctx: &FilledContext) -> FilledContext {
    reduce_mu_by(ctx, ctx.l)
}

/// `mu <- mu_hat^l * mu`; `l = 1` is the outer reduction.
pub fn reduce_mu_by(ctx: &FilledContext, l: u32) -> FilledContext {
    ctx.with_mu(ctx.mu_hat.powi(l as i32) * ctx.mu)
}

pub fn filled_value(ctx: &FilledContext, problem: &MopProblem, y: &[f64]) -> Result<Vec<f64>> {
    let fy = problem.evaluate(y)?;
    Ok(filled_value_from(ctx, y, &fy))
}

pub fn filled_value_from(ctx: &FilledContext, y: &[f64], fy: &[f64]) -> Vec<f64> {
    let dist = ctx.sq_dist(y);
    ctx.deltas(fy)
        .into_iter()
        .map(|t| -dist + phi_unchecked(ctx.mu, t))
        .collect()
}

pub fn filled_gradient(ctx: &FilledContext, problem: &MopProblem, y: &[f64]) -> Result<Jacobian> {
    let fy = problem.evaluate(y)?;
    let jac = problem.jacobian(y)?;
    Ok(filled_gradient_from(ctx, y, &fy, &jac))
}

/// Row `j` is `-2 (y - x) + phi'_mu(f_j(y) - f_j(x)) grad f_j(y)`.
pub fn filled_gradient_from(ctx: &FilledContext, y: &[f64], fy: &[f64], jac: &Jacobian) -> Jacobian {
    ctx.deltas(fy)
        .into_iter()
        .zip(jac)
        .map(|(t, row)| {
            let w = phi_prime_unchecked(ctx.mu, t);
            y.iter()
                .zip(&ctx.anchor)
                .zip(row)
                .map(|((yi, xi), gi)| -2.0 * (yi - xi) + w * gi)
                .collect()
        })
        .collect()
}

fn slopes(jac: &Jacobian, s: &[f64]) -> Vec<f64> {
    jac.iter()
        .map(|row| row.iter().zip(s).map(|(a, b)| a * b).sum())
        .collect()
}

fn probe_denominator(ctx: &FilledContext, ybar: &[f64], s: &[f64]) -> Result<f64> {
    let den: f64 = s.iter().zip(ybar.iter().zip(&ctx.anchor)).map(|(si, (y, x))| si * (y - x)).sum();
    if den > 0.0 {
        Ok(den)
    } else {
        Err(Error::Parameter(format!(
            "probe direction must satisfy s^T (ybar - anchor) > 0, got {den}"
        )))
    }
}

pub fn mu_lower(ctx: &FilledContext, problem: &MopProblem, ybar: &[f64], s: &[f64]) -> Result<f64> {
    let fy = problem.evaluate(ybar)?;
    let jac = problem.jacobian(ybar)?;
    mu_lower_from(ctx, ybar, &fy, &jac, s)
}

/// Lower end of the admissible interval for `mu`.
///
/// Over indices with `f_j(ybar) < f_j(x)` and `s^T grad f_j(ybar) > 0`, takes
/// `max(-(f_j(ybar) - f_j(x)) s^T grad f_j(ybar)) / s^T (ybar - x) + 1e-5`.
/// Falls back to `1e-5` when no index qualifies or the value reaches
/// `ctx.mu_upper`.
pub fn mu_lower_from(
    ctx: &FilledContext,
    ybar: &[f64],
    fy: &[f64],
    jac: &Jacobian,
    s: &[f64],
) -> Result<f64> {
    let den = probe_denominator(ctx, ybar, s)?;
    let sl = slopes(jac, s);
    let worst = ctx
        .deltas(fy)
        .iter()
        .enumerate()
        .filter(|(j, d)| **d < -ctx.equal_tol(*j) && sl[*j] > SLOPE_ZERO_TOL)
        .map(|(j, d)| -d * sl[j])
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let value = match worst {
        Some(w) => w / den + MU_LOWER_FLOOR,
        None => MU_LOWER_FLOOR,
    };
    Ok(if value >= ctx.mu_upper { MU_LOWER_FLOOR } else { value })
}

pub fn mu_upper(ctx: &FilledContext, problem: &MopProblem, ybar: &[f64], s: &[f64]) -> Result<f64> {
    let fy = problem.evaluate(ybar)?;
    let jac = problem.jacobian(ybar)?;
    mu_upper_from(ctx, ybar, &fy, &jac, s)
}

/// Upper end of the admissible interval:
/// `min(cap, 2 s^T (ybar - x) / max(-3 (f_j(ybar) - f_j(x))^2 s^T grad f_j(ybar)))`
/// over indices with `f_j(ybar) > f_j(x)` and `s^T grad f_j(ybar) < 0`; the cap
/// (`ctx.mu_upper`, normally 1) when no index qualifies.
pub fn mu_upper_from(
    ctx: &FilledContext,
    ybar: &[f64],
    fy: &[f64],
    jac: &Jacobian,
    s: &[f64],
) -> Result<f64> {
    let den = probe_denominator(ctx, ybar, s)?;
    let sl = slopes(jac, s);
    let worst = ctx
        .deltas(fy)
        .iter()
        .enumerate()
        .filter(|(j, d)| **d > ctx.equal_tol(*j) && sl[*j] < -SLOPE_ZERO_TOL)
        .map(|(j, d)| -3.0 * d * d * sl[j])
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    Ok(match worst {
        Some(w) => ctx.mu_upper.min(2.0 * den / w),
        None => ctx.mu_upper,
    })
}

/// Outcome of the descent test at a trial iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DescentCheck {
    pub ok: bool,
    pub failing_index: Option<usize>,
}

pub fn descent_check(ctx: &FilledContext, problem: &MopProblem, y: &[f64]) -> Result<DescentCheck> {
    let fy = problem.evaluate(y)?;
    let jac = problem.jacobian(y)?;
    Ok(descent_check_from(ctx, y, &fy, &jac))
}

/// Passes iff every row of the filled gradient has norm at least `kappa` and
/// a negative inner product with `y - x`.
pub fn descent_check_from(ctx: &FilledContext, y: &[f64], fy: &[f64], jac: &Jacobian) -> DescentCheck {
    let grad = filled_gradient_from(ctx, y, fy, jac);
    for (j, row) in grad.iter().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radial: f64 = row
            .iter()
            .zip(y.iter().zip(&ctx.anchor))
            .map(|(g, (yi, xi))| g * (yi - xi))
            .sum();
        if norm < ctx.kappa || radial >= 0.0 {
            return DescentCheck {
                ok: false,
                failing_index: Some(j),
            };
        }
    }
    DescentCheck {
        ok: true,
        failing_index: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mop::Bounds;
    use proptest::prelude::*;

    fn ctx_at(anchor: Vec<f64>, fx: Vec<f64>, mu: f64) -> FilledContext {
        FilledContext {
            kappa: 1e-4 * (anchor.len() as f64).sqrt(),
            anchor,
            anchor_objectives: fx,
            mu,
            mu_hat: 0.005,
            mu_lower: MU_LOWER_FLOOR,
            mu_upper: 1.0,
            epsilon: 0.1,
            beta_u: 0.1,
            l: 1,
        }
    }

    fn two_bowls() -> MopProblem {
        MopProblem::builder("bowls", Bounds::uniform(2, -3.0, 3.0).unwrap(), 2)
            .objectives(|y| vec![y[0] * y[0] + y[1] * y[1], (y[0] - 1.0).powi(2) + y[1] * y[1]])
            .jacobian(|y| vec![vec![2.0 * y[0], 2.0 * y[1]], vec![2.0 * (y[0] - 1.0), 2.0 * y[1]]])
            .build()
            .unwrap()
    }

    fn line(f: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static, g: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static, df: impl Fn(f64) -> f64 + Send + Sync + 'static, dg: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MopProblem {
        MopProblem::builder("line", Bounds::uniform(1, -5.0, 5.0).unwrap(), 2)
            .objectives(move |y| vec![f(y[0]), g(y[0])])
            .jacobian(move |y| vec![vec![df(y[0])], vec![dg(y[0])]])
            .build()
            .unwrap()
    }

    #[test]
    fn kernel_hand_values() {
        assert_eq!(phi(0.5, 2.0).unwrap(), -4.0);
        assert_eq!(phi(0.5, -1.0).unwrap(), -2.0);
        assert_eq!(phi(0.3, 0.0).unwrap(), 0.0);
        assert_eq!(phi_prime(0.5, 2.0).unwrap(), -6.0);
        assert_eq!(phi_prime(0.5, -1.0).unwrap(), 4.0);
        assert_eq!(phi_prime(0.3, 0.0).unwrap(), 0.0);
        assert!(phi(0.0, 1.0).is_err());
        assert!(phi_prime(-1.0, 1.0).is_err());
    }

    #[test]
    fn filled_value_and_gradient_worked_instance() {
        let p = two_bowls();
        let ctx = ctx_at(vec![0.0, 0.0], vec![0.0, 1.0], 0.5);
        assert_eq!(filled_value(&ctx, &p, &[1.0, 0.0]).unwrap(), vec![-1.5, -3.0]);
        assert_eq!(filled_value(&ctx, &p, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let g = filled_gradient(&ctx, &p, &[1.0, 0.0]).unwrap();
        assert_eq!(g, vec![vec![-5.0, 0.0], vec![-2.0, 0.0]]);
        let g0 = filled_gradient(&ctx, &p, &[0.0, 0.0]).unwrap();
        assert!(g0.iter().flatten().all(|v| *v == 0.0));
        let chk = descent_check(&ctx, &p, &[1.0, 0.0]).unwrap();
        assert_eq!(chk, DescentCheck { ok: true, failing_index: None });
    }

    #[test]
    fn flat_values_leave_only_distance_term() {
        let p = MopProblem::builder("flat", Bounds::uniform(2, -1.0, 1.0).unwrap(), 2)
            .objectives(|_| vec![3.0, -1.0])
            .jacobian(|_| vec![vec![0.0, 0.0]; 2])
            .build()
            .unwrap();
        let ctx = ctx_at(vec![0.0, 0.0], vec![3.0, -1.0], 0.01);
        let y = [0.3, -0.4];
        assert_eq!(filled_value(&ctx, &p, &y).unwrap(), vec![-0.25, -0.25]);
        // Case I: gradient -2(y - x), passes iff 2|y - x| >= kappa
        assert!(descent_check(&ctx, &p, &y).unwrap().ok);
        let tiny = [1e-5, 0.0];
        assert_eq!(
            descent_check(&ctx, &p, &tiny).unwrap(),
            DescentCheck { ok: false, failing_index: Some(0) }
        );
    }

    #[test]
    fn mu_bounds_hand_values() {
        let p = line(|y| y * y, |y| (y - 0.8).powi(2), |y| 2.0 * y, |y| 2.0 * (y - 0.8));
        let ctx = ctx_at(vec![0.0], vec![0.0, 0.64], 0.01);
        let lo = mu_lower(&ctx, &p, &[1.0], &[1.0]).unwrap();
        assert!((lo - 0.24001).abs() < 1e-12);
        // f1 rises with positive slope: P2, so the upper bound is the cap
        assert_eq!(mu_upper(&ctx, &p, &[1.0], &[1.0]).unwrap(), 1.0);

        let p = line(|y| y * y, |y| (y - 2.0).powi(2), |y| 2.0 * y, |y| 2.0 * (y - 2.0));
        let ctx = ctx_at(vec![0.0], vec![0.0, 4.0], 0.01);
        assert_eq!(mu_lower(&ctx, &p, &[1.0], &[1.0]).unwrap(), MU_LOWER_FLOOR);

        use std::f64::consts::PI;
        let p = line(
            |y| (PI * y).sin() + y,
            |y| (PI * y).sin() + y,
            |y| PI * (PI * y).cos() + 1.0,
            |y| PI * (PI * y).cos() + 1.0,
        );
        let ctx = ctx_at(vec![0.0], vec![0.0, 0.0], 0.01);
        let up = mu_upper(&ctx, &p, &[1.0], &[1.0]).unwrap();
        assert!((up - 2.0 / (3.0 * (PI - 1.0))).abs() < 1e-12);
        assert!((up - 0.3113).abs() < 1e-4);
    }

    #[test]
    fn mu_lower_resets_when_reaching_cap() {
        // 0.8 * 10 / 0.01 is far above the cap
        let p = line(|y| 0.1 * y, |y| 10.0 * y - 10.0, |_| 0.1, |_| 10.0);
        let ctx = ctx_at(vec![0.0], vec![0.0, -9.1], 0.01);
        assert_eq!(mu_lower(&ctx, &p, &[0.01], &[1.0]).unwrap(), MU_LOWER_FLOOR);
    }

    #[test]
    fn mu_bounds_reject_backward_probe() {
        let p = two_bowls();
        let ctx = ctx_at(vec![0.0, 0.0], vec![0.0, 1.0], 0.5);
        assert!(matches!(mu_lower(&ctx, &p, &[1.0, 0.0], &[-1.0, 0.0]), Err(Error::Parameter(_))));
        assert!(matches!(mu_upper(&ctx, &p, &[1.0, 0.0], &[0.0, 1.0]), Err(Error::Parameter(_))));
    }

    #[test]
    fn reductions() {
        let ctx = ctx_at(vec![0.0], vec![0.0, 0.0], 0.01);
        let r = reduce_mu(&ctx);
        assert!((r.mu - 5e-5).abs() < 1e-20);
        assert_eq!(reduce_mu(&reduce_mu(&ctx)).mu, reduce_mu_by(&ctx, 2).mu);
        assert!(r.mu < ctx.mu);
        assert_eq!(r.anchor, ctx.anchor);
        assert_eq!(r.kappa, ctx.kappa);
    }

    #[test]
    fn kernel_is_c1_at_zero() {
        // slopes of log|phi(h) - phi(-h)| and log|phi'(h) - phi'(-h)| vs log h
        let nu = 0.3;
        let hs: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let fit = |vals: Vec<f64>| {
            let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
            let ys: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
            let mx = xs.iter().sum::<f64>() / 5.0;
            let my = ys.iter().sum::<f64>() / 5.0;
            let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            num / den
        };
        let v = fit(hs.iter().map(|h| (phi(nu, *h).unwrap() - phi(nu, -h).unwrap()).abs()).collect());
        let d = fit(hs.iter().map(|h| (phi_prime(nu, *h).unwrap() - phi_prime(nu, -h).unwrap()).abs()).collect());
        assert!((v - 2.0).abs() < 0.2, "value slope {v}");
        assert!((d - 1.0).abs() < 0.1, "derivative slope {d}");
    }

    proptest! {
        #[test]
        fn filled_values_are_negative_off_anchor(
            y0 in -3.0f64..3.0, y1 in -3.0f64..3.0, mu in 1e-6f64..1.0,
        ) {
            prop_assume!(y0 != 0.2 || y1 != -0.1);
            let p = two_bowls();
            let anchor = vec![0.2, -0.1];
            let fx = p.evaluate(&anchor).unwrap();
            let ctx = ctx_at(anchor, fx.clone(), mu);
            let fy = p.evaluate(&[y0, y1]).unwrap();
            let vals = filled_value_from(&ctx, &[y0, y1], &fy);
            for (j, v) in vals.iter().enumerate() {
                if fy[j] >= fx[j] {
                    prop_assert!(*v < 0.0);
                }
            }
            prop_assert!(vals.iter().any(|v| *v < 0.0));
        }

        #[test]
        fn scaling_probe_keeps_singleton_bounds(c in 0.1f64..10.0) {
            let p = line(|y| y * y, |y| (y - 0.8).powi(2), |y| 2.0 * y, |y| 2.0 * (y - 0.8));
            let ctx = ctx_at(vec![0.0], vec![0.0, 0.64], 0.01);
            let a = mu_lower(&ctx, &p, &[1.0], &[1.0]).unwrap();
            let b = mu_lower(&ctx, &p, &[1.0], &[c]).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
