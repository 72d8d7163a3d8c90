use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunables of the solver. Unset optional fields are derived from the problem
/// dimension `n` at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Number of initial points.
    #[serde(alias = "N")]
    pub num_starts: usize,
    pub mu_ini: f64,
    pub mu_hat: f64,
    pub mu_upper: f64,
    /// Radius of the excluded neighbourhood around the anchor.
    pub epsilon: f64,
    /// Gradient-norm floor in the descent check; `1e-4 * sqrt(n)` when unset.
    pub kappa: Option<f64>,
    /// Largest filled-function step; `epsilon` when unset.
    pub beta_u: Option<f64>,
    /// Exponent of a single inner reduction `mu <- mu_hat^l * mu`.
    pub l: u32,
    /// Cap on global phases (escape attempts) per initial point.
    pub max_global_rounds: usize,
    pub max_local_iters: usize,
    /// Total objective evaluations; unlimited when unset.
    pub eval_budget: Option<u64>,
    pub seed: u64,
    pub trial_count_factor: usize,
    /// Local stopping threshold on `|theta|`; `5e-15 * n` when unset.
    pub crit_tol: Option<f64>,
    pub max_trial_steps: usize,
    pub max_inner_reductions: usize,
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            num_starts: 10,
            mu_ini: 0.01,
            mu_hat: 0.005,
            mu_upper: 1.0,
            epsilon: 0.1,
            kappa: None,
            beta_u: None,
            l: 1,
            max_global_rounds: 100,
            max_local_iters: 1000,
            eval_budget: None,
            seed: 0,
            trial_count_factor: 2,
            crit_tol: None,
            max_trial_steps: 200,
            max_inner_reductions: 60,
            max_backtracks: 40,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let open_unit = |v: f64| v > 0.0 && v < 1.0;
        if self.num_starts == 0 {
            return fail("num_starts must be at least 1".into());
        }
        if !open_unit(self.mu_ini) {
            return fail(format!("mu_ini must lie in (0, 1), got {}", self.mu_ini));
        }
        if !open_unit(self.mu_hat) {
            return fail(format!("mu_hat must lie in (0, 1), got {}", self.mu_hat));
        }
        if !(self.mu_upper > 0.0 && self.mu_upper <= 1.0) || self.mu_ini > self.mu_upper {
            return fail(format!(
                "need 0 < mu_ini <= mu_upper <= 1, got mu_ini={}, mu_upper={}",
                self.mu_ini, self.mu_upper
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("beta_u", self.beta_u),
            ("crit_tol", self.crit_tol),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return fail(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if self.l == 0 {
            return fail("l must be at least 1".into());
        }
        if self.trial_count_factor == 0 {
            return fail("trial_count_factor must be at least 1".into());
        }
        if self.max_local_iters == 0 || self.max_trial_steps == 0 || self.max_backtracks == 0 {
            return fail("iteration caps must be positive".into());
        }
        Ok(())
    }

    pub fn kappa_for(&self, n: usize) -> f64 {
        self.kappa.unwrap_or(1e-4 * (n as f64).sqrt())
    }

    pub fn beta_u(&self) -> f64 {
        self.beta_u.unwrap_or(self.epsilon)
    }

    pub fn crit_tol_for(&self, n: usize) -> f64 {
        self.crit_tol.unwrap_or(5e-15 * n as f64)
    }

    pub fn trial_count(&self, n: usize) -> usize {
        self.trial_count_factor * n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SolverConfig::default();
        c.validate().unwrap();
        assert_eq!(c.kappa_for(4), 2e-4);
        assert_eq!(c.beta_u(), 0.1);
        assert_eq!(c.trial_count(3), 6);
    }

    #[test]
    fn json_accepts_n_alias_and_rejects_unknown_keys() {
        let c: SolverConfig = serde_json::from_str(r#"{"N": 4, "seed": 9}"#).unwrap();
        assert_eq!((c.num_starts, c.seed), (4, 9));
        assert!(serde_json::from_str::<SolverConfig>(r#"{"mu_inni": 0.1}"#).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = [
            SolverConfig { mu_ini: 1.0, ..Default::default() },
            SolverConfig { mu_hat: 0.0, ..Default::default() },
            SolverConfig { epsilon: -1.0, ..Default::default() },
            SolverConfig { kappa: Some(0.0), ..Default::default() },
            SolverConfig { num_starts: 0, ..Default::default() },
            SolverConfig { l: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }
}
