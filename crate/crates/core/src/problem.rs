//! The box-constrained multi-objective problem type.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mop::{finite_diff_jacobian, Bounds};

/// Rows are objectives, columns are decision coordinates.
pub type Jacobian = Vec<Vec<f64>>;

pub type ObjectiveFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&[f64]) -> Jacobian + Send + Sync;
pub type FrontSampler = dyn Fn(usize) -> Vec<Vec<f64>> + Send + Sync;
pub type EvalHook = dyn Fn(&[f64]) + Send + Sync;

/// Step used by [`MopProblem::jacobian`] when no analytic Jacobian exists.
pub const FD_STEP: f64 = 1e-6;

/// A multi-objective problem over a box.
///
/// The definition itself is immutable; the only mutable state is the
/// evaluation counter, which belongs to this instance. Use [`MopProblem::fresh`]
/// to get an independent instance with a zeroed counter.
pub struct MopProblem {
    name: String,
    m: usize,
    bounds: Bounds,
    objectives: Arc<ObjectiveFn>,
    jacobian: Option<Arc<JacobianFn>>,
    front: Option<Arc<FrontSampler>>,
    hook: Option<Arc<EvalHook>>,
    limit: Option<u64>,
    evals: AtomicU64,
}

impl fmt::Debug for MopProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MopProblem")
            .field("name", &self.name)
            .field("n", &self.n())
            .field("m", &self.m)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("front_sampler", &self.front.is_some())
            .field("evals", &self.evals())
            .finish()
    }
}

impl MopProblem {
    pub fn builder(name: impl Into<String>, bounds: Bounds, m: usize) -> MopProblemBuilder {
        MopProblemBuilder {
            name: name.into(),
            bounds,
            m,
            objectives: None,
            jacobian: None,
            front: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.bounds.dim()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn has_front_sampler(&self) -> bool {
        self.front.is_some()
    }

    /// Same definition, zeroed counter, no limit. The evaluation hook is kept.
    pub fn fresh(&self) -> MopProblem {
        MopProblem {
            name: self.name.clone(),
            m: self.m,
            bounds: self.bounds.clone(),
            objectives: Arc::clone(&self.objectives),
            jacobian: self.jacobian.clone(),
            front: self.front.clone(),
            hook: self.hook.clone(),
            limit: None,
            evals: AtomicU64::new(0),
        }
    }

    /// Installs a callback that sees every point passed to [`Self::evaluate`].
    pub fn with_eval_hook(mut self, hook: impl Fn(&[f64]) + Send + Sync + 'static) -> Self {
        self.hook = Some(Arc::new(hook));
        self
    }

    /// Caps the evaluation counter; evaluations past the cap fail with
    /// [`Error::BudgetExhausted`].
    pub fn with_eval_limit(mut self, limit: u64) -> Self {
        self.limit = Some(limit);
        self
    }

    pub fn set_eval_limit(&mut self, limit: Option<u64>) {
        self.limit = limit;
    }

    pub fn evals(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    /// Evaluations left before the cap, `u64::MAX` without one.
    pub fn remaining_evals(&self) -> u64 {
        match self.limit {
            Some(l) => l.saturating_sub(self.evals()),
            None => u64::MAX,
        }
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: y.len(),
            });
        }
        if !self.bounds.contains(y) {
            return Err(Error::OutsideBox { point: y.to_vec() });
        }
        Ok(())
    }

    /// Objective vector at `y`; counts one evaluation.
    pub fn evaluate(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_point(y)?;
        if let Some(limit) = self.limit {
            if self.evals() >= limit {
                return Err(Error::BudgetExhausted);
            }
        }
        self.evals.fetch_add(1, Ordering::Relaxed);
        if let Some(hook) = &self.hook {
            hook(y);
        }
        let f = (self.objectives)(y);
        debug_assert_eq!(f.len(), self.m, "objective closure returned wrong length");
        if f.iter().all(|v| v.is_finite()) {
            Ok(f)
        } else {
            Err(Error::NonFinite { point: y.to_vec() })
        }
    }

    /// Closed-form Jacobian. Does not count as an objective evaluation.
    pub fn analytic_jacobian(&self, y: &[f64]) -> Result<Jacobian> {
        let jac = self.jacobian.as_ref().ok_or_else(|| {
            Error::Capability(format!("{} has no analytic Jacobian", self.name))
        })?;
        self.check_point(y)?;
        Ok(jac(y))
    }

    /// Analytic Jacobian when available, finite differences otherwise.
    pub fn jacobian(&self, y: &[f64]) -> Result<Jacobian> {
        if self.jacobian.is_some() {
            self.analytic_jacobian(y)
        } else {
            finite_diff_jacobian(self, y, FD_STEP)
        }
    }

    /// `count` points on the global Pareto front, pairwise non-dominated.
    pub fn sample_true_front(&self, count: usize) -> Result<Vec<Vec<f64>>> {
        let sampler = self.front.as_ref().ok_or_else(|| {
            Error::Capability(format!("{} has no true-front sampler", self.name))
        })?;
        if count == 0 {
            return Err(Error::Parameter("front sample count must be positive".into()));
        }
        Ok(sampler(count))
    }
}

pub struct MopProblemBuilder {
    name: String,
    bounds: Bounds,
    m: usize,
    objectives: Option<Arc<ObjectiveFn>>,
    jacobian: Option<Arc<JacobianFn>>,
    front: Option<Arc<FrontSampler>>,
}

impl MopProblemBuilder {
    pub fn objectives(mut self, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.objectives = Some(Arc::new(f));
        self
    }

    pub fn jacobian(mut self, j: impl Fn(&[f64]) -> Jacobian + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn front_sampler(
        mut self,
        s: impl Fn(usize) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.front = Some(Arc::new(s));
        self
    }

    pub fn build(self) -> Result<MopProblem> {
        if self.m < 2 {
            return Err(Error::Parameter(format!(
                "need at least two objectives, got {}",
                self.m
            )));
        }
        let objectives = self
            .objectives
            .ok_or_else(|| Error::Parameter("objective function missing".into()))?;
        Ok(MopProblem {
            name: self.name,
            m: self.m,
            bounds: self.bounds,
            objectives,
            jacobian: self.jacobian,
            front: self.front,
            hook: None,
            limit: None,
            evals: AtomicU64::new(0),
        })
    }
}
