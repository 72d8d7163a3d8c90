//! Orchestration of the method: seeding, ideal/nadir estimation, alternation
//! of local and global phases, and the archives.
//!
//! Every initial point owns a trajectory. A trajectory alternates a local
//! phase (descent to an anchor) with a global phase on the filled function of
//! that anchor, until a global phase finds nothing that strictly dominates the
//! anchor. Randomness is drawn from a ChaCha8 generator seeded with
//! `cfg.seed`; each consumer uses its own stream, so runs are reproducible
//! bit for bit.

use std::time::Instant;

use log::{debug, info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::filled::{
    descent_check_from, filled_value_from, mu_lower_from, reduce_mu_by, FilledContext,
};
use crate::local::{local_weak_efficient, LocalDescentResult, LocalStatus};
use crate::mop::{project_to_box, strictly_dominates, ArchiveEntry, Bounds, ParetoArchive};
use crate::problem::MopProblem;

/// `mu` below this aborts the inner reduction.
pub const MU_UNDERFLOW: f64 = 1e-300;
/// Attempts per initial point to satisfy the spacing floor.
pub const SPACING_RETRIES: usize = 100;
/// Uniform resamples allowed when a trial point stays inside the neighbourhood.
pub const TRIAL_RESAMPLE_CAP: usize = 10_000;
/// Random starts per objective in the ideal/nadir payoff table, on top of
/// the lower corner, midpoint and upper corner.
pub const PAYOFF_RANDOM_STARTS: usize = 5;

const STREAM_INITIAL: u64 = 0;
const STREAM_PAYOFF: u64 = 1;
const STREAM_TRAJECTORY_BASE: u64 = 2;

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Initial points and whether the spacing floor had to be given up.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPoints {
    pub points: Vec<Vec<f64>>,
    pub spacing_floor: f64,
    pub spacing_warning: bool,
}

/// `count` Latin-hypercube points with pairwise distance at least
/// `0.1 * diag / sqrt(count)`.
///
/// A point closer than the floor to an earlier one is redrawn uniformly up to
/// [`SPACING_RETRIES`] times; after that the farthest candidate is kept and the
/// warning flag is set. A single point is the box midpoint.
pub fn generate_initial_points(bounds: &Bounds, count: usize, seed: u64) -> Result<InitialPoints> {
    if count == 0 {
        return Err(Error::Config("need at least one initial point".into()));
    }
    let floor = 0.1 * bounds.diameter() / (count as f64).sqrt();
    if count == 1 {
        return Ok(InitialPoints {
            points: vec![bounds.midpoint()],
            spacing_floor: floor,
            spacing_warning: false,
        });
    }
    let n = bounds.dim();
    let mut rng = rng_stream(seed, STREAM_INITIAL);
    let strata: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let mut perm: Vec<usize> = (0..count).collect();
            perm.shuffle(&mut rng);
            perm
        })
        .collect();
    let uniform = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|i| bounds.lower()[i] + bounds.width(i) * rng.random::<f64>())
            .collect()
    };

    let mut points: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut warning = false;
    for k in 0..count {
        let mut candidate: Vec<f64> = (0..n)
            .map(|i| {
                let u = (strata[i][k] as f64 + rng.random::<f64>()) / count as f64;
                bounds.lower()[i] + bounds.width(i) * u
            })
            .collect();
        let gap = |p: &[f64]| {
            points
                .iter()
                .map(|q| distance(p, q))
                .fold(f64::INFINITY, f64::min)
        };
        let mut best_gap = gap(&candidate);
        let mut tries = 0;
        while best_gap < floor && tries < SPACING_RETRIES {
            let alt = uniform(&mut rng);
            let g = gap(&alt);
            if g > best_gap {
                candidate = alt;
                best_gap = g;
            }
            tries += 1;
        }
        if best_gap < floor {
            warning = true;
        }
        points.push(candidate);
    }
    if warning {
        warn!("initial points: spacing floor {floor:e} not achieved");
    }
    Ok(InitialPoints {
        points,
        spacing_floor: floor,
        spacing_warning: warning,
    })
}

// projected gradient descent on one objective; returns the final point
fn minimize_single(
    problem: &MopProblem,
    j: usize,
    y0: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let bounds = problem.bounds();
    let tol = cfg.crit_tol_for(problem.n());
    let mut y = y0.to_vec();
    let mut fy = problem.evaluate(&y)?;
    for _ in 0..cfg.max_local_iters {
        let g = &problem.jacobian(&y)?[j];
        let d: Vec<f64> = (0..y.len())
            .map(|i| (-g[i]).clamp(bounds.lower()[i] - y[i], bounds.upper()[i] - y[i]))
            .collect();
        let theta: f64 =
            g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() + 0.5 * d.iter().map(|v| v * v).sum::<f64>();
        if theta.abs() < tol || theta >= 0.0 {
            break;
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=crate::local::ARMIJO_MAX_BACKTRACKS {
            let trial: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a + step * b).collect();
            let trial = project_to_box(&trial, bounds);
            let ft = problem.evaluate(&trial)?;
            if ft[j] <= fy[j] + crate::local::ARMIJO_C1 * step * theta {
                accepted = Some((trial, ft));
                break;
            }
            step *= crate::local::ARMIJO_RHO;
        }
        match accepted {
            Some((t, ft)) => {
                y = t;
                fy = ft;
            }
            None => break,
        }
    }
    Ok((y, fy))
}

/// Ideal and nadir estimates from a payoff table.
///
/// Row `j` of the table is the best point found when minimizing `f_j` alone
/// from the lower corner, the midpoint, the upper corner and
/// [`PAYOFF_RANDOM_STARTS`] seeded random points; ties in `f_j` go to the
/// lexicographically smallest remaining objectives. The ideal is the
/// column-wise minimum, the nadir the column-wise maximum over the
/// non-dominated rows.
pub fn estimate_ideal_nadir(problem: &MopProblem, cfg: &SolverConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let bounds = problem.bounds();
    let m = problem.m();
    let mut rng = rng_stream(cfg.seed, STREAM_PAYOFF);
    let mut starts = vec![
        bounds.lower().to_vec(),
        bounds.midpoint(),
        bounds.upper().to_vec(),
    ];
    for _ in 0..PAYOFF_RANDOM_STARTS {
        starts.push(
            (0..problem.n())
                .map(|i| bounds.lower()[i] + bounds.width(i) * rng.random::<f64>())
                .collect(),
        );
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut best: Option<Vec<f64>> = None;
        for s in &starts {
            let (_, f) = minimize_single(problem, j, s, cfg)?;
            let better = match &best {
                None => true,
                Some(b) => {
                    f[j] < b[j]
                        || (f[j] == b[j] && {
                            let rest = |v: &Vec<f64>| {
                                v.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect::<Vec<_>>()
                            };
                            rest(&f) < rest(b)
                        })
                }
            };
            if better {
                best = Some(f);
            }
        }
        table.push(best.expect("payoff starts are non-empty"));
    }
    let ideal: Vec<f64> = (0..m)
        .map(|j| table.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
        .collect();
    let rows = crate::mop::nondominated_points(&table);
    let nadir: Vec<f64> = (0..m)
        .map(|j| rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok((ideal, nadir))
}

/// `count` trial points in the box at distance greater than `epsilon` from
/// the anchor.
///
/// Point `k` perturbs coordinate `(k / 2) mod n` of the anchor by a magnitude
/// drawn from `[epsilon, 3 epsilon]`, positive for even `k` and negative for
/// odd `k`, and projects onto the box. If the projection lands inside the
/// neighbourhood the point is redrawn uniformly from the box.
pub fn make_trial_points(
    bounds: &Bounds,
    anchor: &[f64],
    epsilon: f64,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>> {
    if !(epsilon > 0.0) || epsilon >= bounds.diameter() {
        return Err(Error::Config(format!(
            "epsilon {epsilon} must lie in (0, box diameter {})",
            bounds.diameter()
        )));
    }
    let n = bounds.dim();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let axis = (k / 2) % n;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let mut y = anchor.to_vec();
        y[axis] += sign * rng.random_range(epsilon..=3.0 * epsilon);
        let mut y = project_to_box(&y, bounds);
        let mut tries = 0;
        while distance(&y, anchor) <= epsilon {
            if tries == TRIAL_RESAMPLE_CAP {
                return Err(Error::Config(format!(
                    "no feasible point farther than epsilon {epsilon} from the anchor"
                )));
            }
            y = (0..n)
                .map(|i| bounds.lower()[i] + bounds.width(i) * rng.random::<f64>())
                .collect();
            tries += 1;
        }
        out.push(y);
    }
    Ok(out)
}

/// Per-round bookkeeping of a global phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundStats {
    pub mu_start: f64,
    /// `mu` after the outer reduction closing the round.
    pub mu_end: f64,
    /// `mu_L` when the round closed.
    pub mu_lower: f64,
    pub trials: usize,
    pub steps: usize,
    pub inner_reductions: usize,
    /// Trials stopped because a step was truncated by the box.
    pub boundary_stops: usize,
    /// Trials abandoned by the inner reduction or the line search.
    pub aborted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseEnd {
    Improved,
    Exhausted,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalPhaseStats {
    pub anchor: ArchiveEntry,
    pub rounds: Vec<RoundStats>,
    pub end: PhaseEnd,
}

impl GlobalPhaseStats {
    /// Largest outer-round count allowed by the geometric decay of `mu` down
    /// to the smallest lower bound seen at a round end.
    pub fn round_bound(&self, mu_ini: f64, mu_hat: f64) -> usize {
        let mu_l = self
            .rounds
            .iter()
            .map(|r| r.mu_lower)
            .fold(f64::INFINITY, f64::min);
        let raw = ((mu_l / mu_ini).ln() / mu_hat.ln()).ceil();
        if raw.is_finite() && raw > 1.0 {
            raw as usize
        } else {
            1
        }
    }

    fn all_boundary(&self) -> bool {
        self.rounds
            .last()
            .is_some_and(|r| r.trials > 0 && r.boundary_stops == r.trials)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GlobalOutcome {
    /// A point whose objectives strictly dominate the anchor's.
    Improved { point: Vec<f64>, objectives: Vec<f64> },
    /// No improvement before `mu` fell below `mu_L`, or the budget ran out.
    Exhausted { budget: bool },
}

enum TrialEnd {
    Improved(Vec<f64>, Vec<f64>),
    Boundary,
    Aborted,
    StepCap,
}

macro_rules! budgeted {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(Error::BudgetExhausted) => return Ok(None),
            Err(e) => return Err(e),
        }
    };
}

// Follows one trial point; Ok(None) means the evaluation budget ran out.
fn run_trial(
    problem: &MopProblem,
    ctx: &mut FilledContext,
    cfg: &SolverConfig,
    start: Vec<f64>,
    stats: &mut RoundStats,
) -> Result<Option<TrialEnd>> {
    let bounds = problem.bounds();
    let fx = ctx.anchor_objectives.clone();
    let mut y = start;
    let mut fy = budgeted!(problem.evaluate(&y));
    for _ in 0..cfg.max_trial_steps {
        let jac = budgeted!(problem.jacobian(&y));
        let norm = distance(&y, &ctx.anchor);
        if norm == 0.0 {
            return Ok(Some(TrialEnd::Aborted));
        }
        let s: Vec<f64> = y.iter().zip(&ctx.anchor).map(|(a, b)| (a - b) / norm).collect();
        ctx.mu_lower = mu_lower_from(ctx, &y, &fy, &jac, &s)?;
        if strictly_dominates(&fy, &fx) {
            return Ok(Some(TrialEnd::Improved(y, fy)));
        }

        if !descent_check_from(ctx, &y, &fy, &jac).ok {
            let mut trial_ctx = ctx.clone();
            let mut found = false;
            for _ in 0..cfg.max_inner_reductions {
                trial_ctx = reduce_mu_by(&trial_ctx, ctx.l);
                stats.inner_reductions += 1;
                if trial_ctx.mu < MU_UNDERFLOW {
                    break;
                }
                if descent_check_from(&trial_ctx, &y, &fy, &jac).ok {
                    found = true;
                    break;
                }
            }
            if !found {
                return Ok(Some(TrialEnd::Aborted));
            }
            ctx.mu = trial_ctx.mu;
        }

        let f_here = filled_value_from(ctx, &y, &fy);
        let mut beta = ctx.beta_u;
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let raw: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a + beta * b).collect();
            let next = project_to_box(&raw, bounds);
            let f_next = budgeted!(problem.evaluate(&next));
            let filled_next = filled_value_from(ctx, &next, &f_next);
            if filled_next.iter().zip(&f_here).all(|(a, b)| a < b) {
                accepted = Some((raw != next, next, f_next));
                break;
            }
            beta *= 0.5;
        }
        let Some((truncated, next, f_next)) = accepted else {
            return Ok(Some(TrialEnd::Aborted));
        };
        stats.steps += 1;
        y = next;
        fy = f_next;
        if strictly_dominates(&fy, &fx) {
            return Ok(Some(TrialEnd::Improved(y, fy)));
        }
        if truncated {
            return Ok(Some(TrialEnd::Boundary));
        }
    }
    Ok(Some(TrialEnd::StepCap))
}

/// One global phase on the filled function of `anchor`.
///
/// `ctx` should come from [`FilledContext::new`]; it is updated in place so
/// the caller can inspect the final `mu` and `mu_L`.
pub fn global_phase(
    problem: &MopProblem,
    anchor: &LocalDescentResult,
    ctx: &mut FilledContext,
    cfg: &SolverConfig,
    rng: &mut impl Rng,
) -> Result<(GlobalOutcome, GlobalPhaseStats)> {
    let mut stats = GlobalPhaseStats {
        anchor: ArchiveEntry::new(anchor.point.clone(), anchor.objectives.clone()),
        rounds: Vec::new(),
        end: PhaseEnd::Exhausted,
    };
    let count = cfg.trial_count(problem.n());
    loop {
        let trials = make_trial_points(problem.bounds(), &anchor.point, ctx.epsilon, count, rng)?;
        let mut round = RoundStats {
            mu_start: ctx.mu,
            mu_end: ctx.mu,
            mu_lower: ctx.mu_lower,
            trials: trials.len(),
            steps: 0,
            inner_reductions: 0,
            boundary_stops: 0,
            aborted: 0,
        };
        for start in trials {
            let end = run_trial(problem, ctx, cfg, start, &mut round)?;
            match end {
                None => {
                    round.mu_lower = ctx.mu_lower;
                    stats.rounds.push(round);
                    stats.end = PhaseEnd::Budget;
                    return Ok((GlobalOutcome::Exhausted { budget: true }, stats));
                }
                Some(TrialEnd::Improved(point, objectives)) => {
                    round.mu_lower = ctx.mu_lower;
                    stats.rounds.push(round);
                    stats.end = PhaseEnd::Improved;
                    debug!("global phase improved anchor {:?} -> {:?}", anchor.objectives, objectives);
                    return Ok((GlobalOutcome::Improved { point, objectives }, stats));
                }
                Some(TrialEnd::Boundary) => round.boundary_stops += 1,
                Some(TrialEnd::Aborted) => round.aborted += 1,
                Some(TrialEnd::StepCap) => {}
            }
        }
        *ctx = reduce_mu_by(ctx, 1);
        round.mu_end = ctx.mu;
        round.mu_lower = ctx.mu_lower;
        stats.rounds.push(round);
        if ctx.mu < ctx.mu_lower {
            return Ok((GlobalOutcome::Exhausted { budget: false }, stats));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    #[serde(rename = "mu_below_mu_L")]
    MuBelowMuL,
    Budget,
    BoundaryExhausted,
}

/// Everything that happened from one initial point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub start: Vec<f64>,
    /// Successive anchors; objectives strictly decrease along the sequence.
    pub anchors: Vec<ArchiveEntry>,
    pub local_status: Vec<LocalStatus>,
    pub phases: Vec<GlobalPhaseStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub problem: String,
    pub solver: String,
    pub n: usize,
    pub m: usize,
    pub config: SolverConfig,
    pub wpf: ParetoArchive,
    pub wpff: ParetoArchive,
    pub pf: ParetoArchive,
    pub pff: ParetoArchive,
    pub evals: u64,
    pub local_calls: usize,
    pub global_escapes: usize,
    pub termination: Termination,
    pub ideal: Option<Vec<f64>>,
    pub nadir: Option<Vec<f64>>,
    pub spacing_warning: bool,
    pub trajectories: Vec<Trajectory>,
    pub wall_time_secs: f64,
}

fn entry(r: &LocalDescentResult) -> ArchiveEntry {
    ArchiveEntry::new(r.point.clone(), r.objectives.clone())
}

struct RunState {
    wpf: ParetoArchive,
    wpff: ParetoArchive,
    local_calls: usize,
    global_escapes: usize,
    budget_hit: bool,
    trajectories: Vec<Trajectory>,
}

fn finish(
    problem: &MopProblem,
    solver: &str,
    cfg: &SolverConfig,
    state: RunState,
    ideal_nadir: Option<(Vec<f64>, Vec<f64>)>,
    spacing_warning: bool,
    evals: u64,
    started: Instant,
) -> RunReport {
    let boundary = !state.trajectories.is_empty()
        && state
            .trajectories
            .iter()
            .all(|t| t.phases.last().is_some_and(GlobalPhaseStats::all_boundary));
    let termination = if state.budget_hit {
        Termination::Budget
    } else if boundary {
        Termination::BoundaryExhausted
    } else {
        Termination::MuBelowMuL
    };
    let (ideal, nadir) = match ideal_nadir {
        Some((i, n)) => (Some(i), Some(n)),
        None => (None, None),
    };
    RunReport {
        problem: problem.name().to_string(),
        solver: solver.to_string(),
        n: problem.n(),
        m: problem.m(),
        config: cfg.clone(),
        pf: state.wpf.filtered(),
        pff: state.wpff.filtered(),
        wpf: state.wpf,
        wpff: state.wpff,
        evals,
        local_calls: state.local_calls,
        global_escapes: state.global_escapes,
        termination,
        ideal,
        nadir,
        spacing_warning,
        trajectories: state.trajectories,
        wall_time_secs: started.elapsed().as_secs_f64(),
    }
}

fn budgeted_problem(problem: &MopProblem, cfg: &SolverConfig) -> MopProblem {
    let mut p = problem.fresh();
    p.set_eval_limit(cfg.eval_budget);
    p
}

/// Runs the full method from `cfg.num_starts` initial points.
pub fn run_omffm(problem: &MopProblem, cfg: &SolverConfig) -> Result<RunReport> {
    run(problem, cfg, true)
}

/// Local phase only: every initial point descends once and its result goes to
/// both archives. Baseline for comparisons.
pub fn run_local_only(problem: &MopProblem, cfg: &SolverConfig) -> Result<RunReport> {
    run(problem, cfg, false)
}

fn run(problem: &MopProblem, cfg: &SolverConfig, global: bool) -> Result<RunReport> {
    cfg.validate()?;
    let started = Instant::now();
    let solver = if global { "omffm" } else { "local_only" };
    let p = budgeted_problem(problem, cfg);
    let init = generate_initial_points(p.bounds(), cfg.num_starts, cfg.seed)?;
    if global {
        // surface an impossible epsilon before spending evaluations
        make_trial_points(p.bounds(), &init.points[0], cfg.epsilon, 0, &mut rng_stream(0, 0))?;
    }
    let mut state = RunState {
        wpf: ParetoArchive::new(),
        wpff: ParetoArchive::new(),
        local_calls: 0,
        global_escapes: 0,
        budget_hit: false,
        trajectories: Vec::new(),
    };

    let ideal_nadir = match estimate_ideal_nadir(&p, cfg) {
        Ok(v) => Some(v),
        Err(Error::BudgetExhausted) => {
            state.budget_hit = true;
            None
        }
        Err(e) => return Err(e),
    };

    if !state.budget_hit {
        'starts: for (k, y0) in init.points.iter().enumerate() {
            let mut rng = rng_stream(cfg.seed, STREAM_TRAJECTORY_BASE + k as u64);
            let mut traj = Trajectory {
                start: y0.clone(),
                anchors: Vec::new(),
                local_status: Vec::new(),
                phases: Vec::new(),
            };
            let mut anchor = match local_weak_efficient(&p, y0, cfg) {
                Ok(r) => r,
                Err(Error::BudgetExhausted) => {
                    state.budget_hit = true;
                    break 'starts;
                }
                Err(e) => return Err(e),
            };
            state.local_calls += 1;
            state.wpf.push(entry(&anchor));
            traj.anchors.push(entry(&anchor));
            traj.local_status.push(anchor.status);
            if anchor.status == LocalStatus::BudgetExhausted {
                state.wpff.push(entry(&anchor));
                state.budget_hit = true;
                state.trajectories.push(traj);
                break 'starts;
            }
            if !global {
                state.wpff.push(entry(&anchor));
                state.trajectories.push(traj);
                continue;
            }

            let mut phases = 0;
            loop {
                if phases == cfg.max_global_rounds {
                    warn!("trajectory {k}: global phase cap reached");
                    state.wpff.push(entry(&anchor));
                    break;
                }
                phases += 1;
                let mut ctx = FilledContext::new(anchor.point.clone(), anchor.objectives.clone(), cfg)?;
                let (outcome, stats) = global_phase(&p, &anchor, &mut ctx, cfg, &mut rng)?;
                traj.phases.push(stats);
                match outcome {
                    GlobalOutcome::Improved { point, .. } => {
                        state.global_escapes += 1;
                        let next = match local_weak_efficient(&p, &point, cfg) {
                            Ok(r) => r,
                            Err(Error::BudgetExhausted) => {
                                state.wpff.push(entry(&anchor));
                                state.budget_hit = true;
                                state.trajectories.push(traj);
                                break 'starts;
                            }
                            Err(e) => return Err(e),
                        };
                        state.local_calls += 1;
                        anchor = next;
                        state.wpf.push(entry(&anchor));
                        traj.anchors.push(entry(&anchor));
                        traj.local_status.push(anchor.status);
                        if anchor.status == LocalStatus::BudgetExhausted {
                            state.wpff.push(entry(&anchor));
                            state.budget_hit = true;
                            state.trajectories.push(traj);
                            break 'starts;
                        }
                    }
                    GlobalOutcome::Exhausted { budget } => {
                        state.wpff.push(entry(&anchor));
                        if budget {
                            state.budget_hit = true;
                            state.trajectories.push(traj);
                            break 'starts;
                        }
                        break;
                    }
                }
            }
            state.trajectories.push(traj);
        }
    }

    let report = finish(
        &p,
        solver,
        cfg,
        state,
        ideal_nadir,
        init.spacing_warning,
        p.evals(),
        started,
    );
    info!(
        "{} on {}: |PF|={} |PFF|={} escapes={} evals={} ({:?})",
        solver,
        report.problem,
        report.pf.len(),
        report.pff.len(),
        report.global_escapes,
        report.evals,
        report.termination
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{convex_toy, get_problem};

    #[test]
    fn single_initial_point_is_midpoint() {
        let b = Bounds::new(vec![0.0, -2.0], vec![1.0, 2.0]).unwrap();
        let init = generate_initial_points(&b, 1, 3).unwrap();
        assert_eq!(init.points, vec![vec![0.5, 0.0]]);
    }

    #[test]
    fn initial_points_respect_spacing_and_seed() {
        let b = Bounds::uniform(2, 0.0, 1.0).unwrap();
        let a = generate_initial_points(&b, 4, 17).unwrap();
        assert_eq!(a.points.len(), 4);
        let floor = 0.1 * 2f64.sqrt() / 2.0;
        assert!((a.spacing_floor - floor).abs() < 1e-15);
        for i in 0..4 {
            assert!(b.contains(&a.points[i]));
            for k in 0..i {
                assert!(distance(&a.points[i], &a.points[k]) >= floor);
            }
        }
        assert_eq!(a, generate_initial_points(&b, 4, 17).unwrap());
        assert_ne!(a.points, generate_initial_points(&b, 4, 18).unwrap().points);
    }

    #[test]
    fn trial_points_leave_the_neighbourhood() {
        let b = Bounds::uniform(2, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for anchor in [vec![0.5, 0.5], vec![0.0, 0.0], vec![1.0, 0.3]] {
            let pts = make_trial_points(&b, &anchor, 0.1, 4, &mut rng).unwrap();
            assert_eq!(pts.len(), 4);
            for p in pts {
                assert!(b.contains(&p));
                assert!(distance(&p, &anchor) > 0.1);
            }
        }
        assert!(matches!(
            make_trial_points(&b, &[0.5, 0.5], 2.0, 4, &mut rng),
            Err(Error::Config(_))
        ));
    }

    fn toy() -> MopProblem {
        convex_toy("toy", vec![0.2, 0.2], vec![0.8, 0.6], Bounds::uniform(2, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn ideal_nadir_examples() {
        let (ideal, nadir) = estimate_ideal_nadir(&toy(), &SolverConfig::default()).unwrap();
        assert!(ideal.iter().all(|v| v.abs() < 1e-12), "{ideal:?}");
        assert!((nadir[0] - 0.52).abs() < 1e-9 && (nadir[1] - 0.52).abs() < 1e-9, "{nadir:?}");

        let same = MopProblem::builder("same", Bounds::uniform(2, -1.0, 1.0).unwrap(), 2)
            .objectives(|y| {
                let v = (y[0] - 0.3).powi(2) + y[1] * y[1];
                vec![v, v]
            })
            .build()
            .unwrap();
        let (ideal, nadir) = estimate_ideal_nadir(&same, &SolverConfig::default()).unwrap();
        assert_eq!(ideal, nadir);

        let (ideal, nadir) =
            estimate_ideal_nadir(&get_problem("ZDT1").unwrap(), &SolverConfig::default()).unwrap();
        for (v, want) in ideal.iter().zip([0.0, 0.0]).chain(nadir.iter().zip([1.0, 1.0])) {
            assert!((v - want).abs() < 0.05, "{ideal:?} {nadir:?}");
        }
    }

    #[test]
    fn global_phase_on_convex_problem_exhausts() {
        let p = toy();
        let cfg = SolverConfig::default();
        let anchor = local_weak_efficient(&p, &[0.5, 0.4], &cfg).unwrap();
        let mut ctx = FilledContext::new(anchor.point.clone(), anchor.objectives.clone(), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (outcome, stats) = global_phase(&p, &anchor, &mut ctx, &cfg, &mut rng).unwrap();
        assert_eq!(outcome, GlobalOutcome::Exhausted { budget: false });
        assert!(ctx.mu < ctx.mu_lower);
        assert!(stats.rounds.len() <= stats.round_bound(cfg.mu_ini, cfg.mu_hat));
    }

    #[test]
    fn global_phase_with_mu_below_floor_runs_one_round() {
        let p = toy();
        let cfg = SolverConfig { mu_ini: 1e-6, ..Default::default() };
        let anchor = local_weak_efficient(&p, &[0.5, 0.4], &cfg).unwrap();
        let mut ctx = FilledContext::new(anchor.point.clone(), anchor.objectives.clone(), &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (outcome, stats) = global_phase(&p, &anchor, &mut ctx, &cfg, &mut rng).unwrap();
        assert_eq!(outcome, GlobalOutcome::Exhausted { budget: false });
        assert_eq!(stats.rounds.len(), 1);
    }

    #[test]
    fn zero_budget_gives_empty_report() {
        let cfg = SolverConfig { eval_budget: Some(0), ..Default::default() };
        let r = run_omffm(&get_problem("P4a").unwrap(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::Budget);
        assert!(r.wpf.is_empty() && r.wpff.is_empty() && r.pf.is_empty() && r.pff.is_empty());
        assert_eq!(r.evals, 0);
    }

    #[test]
    fn small_budget_is_respected() {
        let cfg = SolverConfig { eval_budget: Some(100), num_starts: 5, ..Default::default() };
        let r = run_omffm(&get_problem("P4a").unwrap(), &cfg).unwrap();
        assert!(r.evals <= 100);
        assert_eq!(r.termination, Termination::Budget);
    }

    #[test]
    fn convex_toy_run() {
        let p = toy();
        let cfg = SolverConfig { num_starts: 10, ..Default::default() };
        let r = run_omffm(&p, &cfg).unwrap();
        assert_eq!(r.global_escapes, 0);
        assert_eq!(r.pf.filtered(), r.pf);
        assert_eq!(r.wpf.filtered(), r.pf);
        assert_eq!(r.wpff.filtered(), r.pff);
        for e in r.pf.entries() {
            assert!(r.pff.entries().iter().any(|q| crate::mop::inf_distance(&q.f, &e.f) <= 1e-10));
        }
        for e in r.pff.entries() {
            let cert = local_weak_efficient(&p.fresh(), &e.x, &cfg).unwrap();
            assert!(cert.criticality.abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_epsilon_is_a_config_error() {
        let cfg = SolverConfig { epsilon: 5.0, ..Default::default() };
        assert!(matches!(run_omffm(&get_problem("P4a").unwrap(), &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn report_round_trips_through_json() {
        let cfg = SolverConfig { num_starts: 3, ..Default::default() };
        let r = run_omffm(&get_problem("P4a").unwrap(), &cfg).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"termination\":\""));
        let back: RunReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
