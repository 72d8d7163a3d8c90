//! Benchmark campaigns: every (problem, repeat, solver) cell is an independent
//! run; fronts are scored together per problem and turned into profiles.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use log::{info, warn};
use omffm::metrics::{hv_reference, inverse_metric, MetricsContext, INVERSE_OFFSET};
use omffm::mop::nondominated_points;
use omffm::{get_problem, run_local_only, run_omffm, MetricsReport, ProfileCurve, RunReport, SolverConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::front::{write_atomic, FrontFile};

/// Points drawn from a known true front to anchor the Δ-spread extremes.
const REFERENCE_FRONT_SIZE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Omffm,
    LocalOnly,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Omffm => "omffm",
            Solver::LocalOnly => "local_only",
        }
    }

    pub fn run(self, problem: &omffm::MopProblem, cfg: &SolverConfig) -> omffm::Result<RunReport> {
        match self {
            Solver::Omffm => run_omffm(problem, cfg),
            Solver::LocalOnly => run_local_only(problem, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SolverSelection {
    One(Solver),
    Many(Vec<Solver>),
}

impl SolverSelection {
    pub fn solvers(&self) -> Vec<Solver> {
        let list = match self {
            SolverSelection::One(s) => vec![*s],
            SolverSelection::Many(v) => v.clone(),
        };
        let mut out = Vec::new();
        for s in list {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub problems: Vec<String>,
    /// One solver name or a list of them.
    pub solver: SolverSelection,
    #[serde(default)]
    pub config: SolverConfig,
    #[serde(default = "one")]
    pub repeats: usize,
    pub output_dir: PathBuf,
}

fn one() -> usize {
    1
}

impl CampaignSpec {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.problems.is_empty() {
            return Err(CliError::Config("campaign lists no problems".into()));
        }
        if self.repeats == 0 {
            return Err(CliError::Config("repeats must be at least 1".into()));
        }
        if self.solver.solvers().is_empty() {
            return Err(CliError::Config("campaign lists no solvers".into()));
        }
        for p in &self.problems {
            get_problem(p)?;
        }
        self.config.validate()?;
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let solvers = self.solver.solvers();
        let mut cells = Vec::new();
        for problem in &self.problems {
            for repeat in 0..self.repeats {
                let seed = cell_seed(self.config.seed, problem, repeat);
                for &solver in &solvers {
                    cells.push(Cell { problem: problem.clone(), solver, repeat, seed });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub problem: String,
    pub solver: Solver,
    pub repeat: usize,
    pub seed: u64,
}

/// Seed of one cell, independent of scheduling. Solvers on the same problem
/// and repeat share it, so they start from the same points.
pub fn cell_seed(seed: u64, problem: &str, repeat: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((problem.len() as u64).to_le_bytes());
    h.update(problem.as_bytes());
    h.update((repeat as u64).to_le_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// One line of `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRecord {
    pub problem: String,
    pub solver: String,
    pub repeat: usize,
    pub seed: u64,
    pub failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}

pub struct CampaignOutcome {
    pub records: Vec<CellRecord>,
    pub reports: Vec<Option<RunReport>>,
    pub profiles: Vec<(&'static str, Vec<ProfileCurve>)>,
}

pub fn default_runner(cell: &Cell, cfg: &SolverConfig) -> omffm::Result<RunReport> {
    let problem = get_problem(&cell.problem)?;
    let cfg = SolverConfig { seed: cell.seed, ..cfg.clone() };
    cell.solver.run(&problem, &cfg)
}

fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "run panicked".to_string()
    }
}

/// Runs every cell on a pool of `jobs` threads and scores the fronts. A cell
/// that errors or panics is recorded as failed and the campaign continues.
pub fn run_campaign_with<R>(spec: &CampaignSpec, jobs: usize, runner: R) -> CliResult<CampaignOutcome>
where
    R: Fn(&Cell, &SolverConfig) -> omffm::Result<RunReport> + Sync,
{
    spec.validate()?;
    let cells = spec.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    info!("campaign: {} cells on {} threads", cells.len(), jobs.max(1));
    let results: Vec<Result<RunReport, String>> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                match catch_unwind(AssertUnwindSafe(|| runner(cell, &spec.config))) {
                    Ok(Ok(report)) => Ok(report),
                    Ok(Err(e)) => Err(e.to_string()),
                    Err(payload) => Err(panic_message(payload)),
                }
            })
            .collect()
    });

    let mut records: Vec<CellRecord> = cells
        .iter()
        .zip(&results)
        .map(|(cell, r)| CellRecord {
            problem: cell.problem.clone(),
            solver: cell.solver.name().to_string(),
            repeat: cell.repeat,
            seed: cell.seed,
            failed: r.is_err(),
            error: r.as_ref().err().cloned(),
            metrics: None,
        })
        .collect();
    for (cell, r) in cells.iter().zip(&results) {
        if let Err(e) = r {
            warn!("{} / {} / repeat {}: {e}", cell.problem, cell.solver.name(), cell.repeat);
        }
    }

    for problem in &spec.problems {
        score_problem(problem, &cells, &results, &mut records)?;
    }

    let solvers: Vec<String> = spec.solver.solvers().iter().map(|s| s.name().to_string()).collect();
    let profiles = build_profiles(&records, &spec.problems, &solvers)?;
    let reports = results.into_iter().map(Result::ok).collect();
    Ok(CampaignOutcome { records, reports, profiles })
}

fn score_problem(
    problem: &str,
    cells: &[Cell],
    results: &[Result<RunReport, String>],
    records: &mut [CellRecord],
) -> CliResult<()> {
    let idx: Vec<usize> = (0..cells.len())
        .filter(|&i| cells[i].problem == problem && results[i].is_ok())
        .collect();
    if idx.is_empty() {
        return Ok(());
    }
    let report = |i: usize| results[i].as_ref().expect("filtered to successes");
    let fronts: Vec<Vec<Vec<f64>>> = idx.iter().map(|&i| report(i).pf.objectives()).collect();
    let union: Vec<Vec<f64>> = fronts.iter().flatten().cloned().collect();
    let m = report(idx[0]).m;

    let def = get_problem(problem)?;
    let reference_front = if def.has_front_sampler() {
        def.sample_true_front(REFERENCE_FRONT_SIZE)?
    } else {
        nondominated_points(&union)
    };

    let mut ideal = vec![f64::INFINITY; m];
    let mut nadir = vec![f64::NEG_INFINITY; m];
    let mut have_estimate = false;
    for &i in &idx {
        if let (Some(lo), Some(hi)) = (&report(i).ideal, &report(i).nadir) {
            have_estimate = true;
            for j in 0..m {
                ideal[j] = ideal[j].min(lo[j]);
                nadir[j] = nadir[j].max(hi[j]);
            }
        }
    }
    if !have_estimate {
        if union.is_empty() {
            warn!("{problem}: no front points and no ideal/nadir estimate, metrics skipped");
            return Ok(());
        }
        for p in &union {
            for j in 0..m {
                ideal[j] = ideal[j].min(p[j]);
                nadir[j] = nadir[j].max(p[j]);
            }
        }
    }
    let reference = hv_reference(&ideal, &nadir);

    // Purity compares the solvers within one repeat.
    for &i in &idx {
        let peers: Vec<Vec<Vec<f64>>> = idx
            .iter()
            .zip(&fronts)
            .filter(|(&k, _)| cells[k].repeat == cells[i].repeat)
            .map(|(_, f)| f.clone())
            .collect();
        let ctx = MetricsContext {
            problem,
            all_fronts: &peers,
            reference_front: &reference_front,
            hv_reference: &reference,
        };
        let r = report(i);
        match MetricsReport::compute(&ctx, cells[i].solver.name(), cells[i].seed, &r.pf.objectives(), r.evals) {
            Ok(m) => records[i].metrics = Some(m),
            Err(e) => {
                records[i].failed = true;
                records[i].error = Some(e.to_string());
            }
        }
    }
    Ok(())
}

/// Metric names in profile order, with the cost transform applied to each.
/// Purity and hypervolume are maximized, so they enter as `1/(x + 1e-12)`.
pub const PROFILE_METRICS: &[&str] = &["purity", "delta_spread", "gamma_spread", "hypervolume", "evals"];

fn profile_cost(metric: &str, m: &MetricsReport) -> Option<f64> {
    let cost = match metric {
        "purity" => inverse_metric(m.purity),
        "hypervolume" => inverse_metric(m.hypervolume),
        "delta_spread" => m.delta_spread?,
        "gamma_spread" => m.gamma_spread,
        "evals" => m.evals as f64,
        _ => return None,
    };
    // ratios need strictly positive costs; a perfect zero spread is floored
    cost.is_finite().then(|| cost.max(INVERSE_OFFSET))
}

/// Per-problem cost is the mean over the successful repeats; a cell with no
/// usable repeat is a failure.
pub fn build_profiles(
    records: &[CellRecord],
    problems: &[String],
    solvers: &[String],
) -> CliResult<Vec<(&'static str, Vec<ProfileCurve>)>> {
    let mut out = Vec::new();
    for &metric in PROFILE_METRICS {
        let mut values = Vec::new();
        let mut failed = Vec::new();
        for p in problems {
            let mut vrow = Vec::new();
            let mut frow = Vec::new();
            for s in solvers {
                let costs: Vec<f64> = records
                    .iter()
                    .filter(|r| &r.problem == p && &r.solver == s && !r.failed)
                    .filter_map(|r| r.metrics.as_ref().and_then(|m| profile_cost(metric, m)))
                    .collect();
                if costs.is_empty() {
                    vrow.push(f64::INFINITY);
                    frow.push(true);
                } else {
                    vrow.push(costs.iter().sum::<f64>() / costs.len() as f64);
                    frow.push(false);
                }
            }
            values.push(vrow);
            failed.push(frow);
        }
        let curves = omffm::performance_profile(solvers, &values, &failed)?;
        out.push((metric, curves));
    }
    Ok(out)
}

pub fn profile_csv(curves: &[ProfileCurve]) -> String {
    let mut out = String::from("tau");
    for c in curves {
        out.push(',');
        out.push_str(&c.solver);
    }
    out.push('\n');
    if let Some(first) = curves.first() {
        for (k, tau) in first.taus.iter().enumerate() {
            out.push_str(&tau.to_string());
            for c in curves {
                out.push(',');
                out.push_str(&c.rhos[k].to_string());
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_profiles(dir: &Path, profiles: &[(&'static str, Vec<ProfileCurve>)]) -> CliResult<()> {
    for (metric, curves) in profiles {
        write_atomic(&dir.join(format!("profile_{metric}.csv")), profile_csv(curves).as_bytes())?;
    }
    Ok(())
}

/// Writes `metrics.json`, the profiles and one front file per successful cell.
pub fn write_campaign(dir: &Path, spec: &CampaignSpec, outcome: &CampaignOutcome) -> CliResult<()> {
    let json = serde_json::to_string_pretty(&outcome.records)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    write_atomic(&dir.join("metrics.json"), format!("{json}\n").as_bytes())?;
    write_profiles(dir, &outcome.profiles)?;
    for (cell, report) in spec.cells().iter().zip(&outcome.reports) {
        let Some(r) = report else { continue };
        let front = FrontFile {
            problem: Some(r.problem.clone()),
            solver: Some(r.solver.clone()),
            seed: Some(cell.seed),
            n: r.n,
            m: r.m,
            entries: r.pf.entries().to_vec(),
        };
        let name = format!("{}__{}__r{}.csv", cell.problem, cell.solver.name(), cell.repeat);
        write_atomic(&dir.join("fronts").join(name), front.to_csv().as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seed_depends_on_every_input() {
        let base = cell_seed(0, "P1", 0);
        assert_eq!(base, cell_seed(0, "P1", 0));
        assert_ne!(base, cell_seed(1, "P1", 0));
        assert_ne!(base, cell_seed(0, "P2", 0));
        assert_ne!(base, cell_seed(0, "P1", 1));
    }

    #[test]
    fn solver_field_accepts_name_or_list() {
        let one: SolverSelection = serde_json::from_str("\"local_only\"").unwrap();
        assert_eq!(one.solvers(), vec![Solver::LocalOnly]);
        let many: SolverSelection = serde_json::from_str("[\"omffm\", \"local_only\", \"omffm\"]").unwrap();
        assert_eq!(many.solvers(), vec![Solver::Omffm, Solver::LocalOnly]);
        assert!(serde_json::from_str::<SolverSelection>("\"nsga2\"").is_err());
    }

    #[test]
    fn campaign_rejects_unknown_keys_and_empty_lists() {
        let bad = r#"{"problems": ["P1"], "solver": "omffm", "output_dir": "o", "extra": 1}"#;
        assert!(serde_json::from_str::<CampaignSpec>(bad).is_err());
        let empty: CampaignSpec =
            serde_json::from_str(r#"{"problems": [], "solver": "omffm", "output_dir": "o"}"#).unwrap();
        assert_eq!(empty.validate().unwrap_err().exit_code(), 3);
        let unknown: CampaignSpec =
            serde_json::from_str(r#"{"problems": ["NOPE"], "solver": "omffm", "output_dir": "o"}"#).unwrap();
        assert_eq!(unknown.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn profile_csv_layout() {
        let curves = vec![
            ProfileCurve { solver: "a".into(), taus: vec![1.0, 2.0], rhos: vec![1.0, 1.0] },
            ProfileCurve { solver: "b".into(), taus: vec![1.0, 2.0], rhos: vec![0.5, 1.0] },
        ];
        assert_eq!(profile_csv(&curves), "tau,a,b\n1,1,0.5\n2,1,1\n");
    }

    #[test]
    fn profiles_treat_failures_and_inverse_metrics() {
        let metrics = |solver: &str, purity: f64| MetricsReport {
            problem: "P".into(),
            solver: solver.into(),
            seed: 0,
            purity,
            delta_spread: Some(0.0),
            gamma_spread: 1.0,
            hypervolume: 1.0,
            evals: 10,
            reference_point: vec![1.0, 1.0],
        };
        let rec = |solver: &str, m: Option<MetricsReport>| CellRecord {
            problem: "P".into(),
            solver: solver.into(),
            repeat: 0,
            seed: 0,
            failed: m.is_none(),
            error: None,
            metrics: m,
        };
        let records = vec![rec("a", Some(metrics("a", 1.0))), rec("b", Some(metrics("b", 0.5)))];
        let solvers = vec!["a".to_string(), "b".to_string()];
        let profiles = build_profiles(&records, &["P".to_string()], &solvers).unwrap();
        let purity = &profiles.iter().find(|(n, _)| *n == "purity").unwrap().1;
        assert_eq!(purity[0].rho_at(1.0), 1.0);
        assert_eq!(purity[1].rho_at(1.0), 0.0);
        assert_eq!(purity[1].rho_at(2.0), 1.0);

        let records = vec![rec("a", Some(metrics("a", 1.0))), rec("b", None)];
        let profiles = build_profiles(&records, &["P".to_string()], &solvers).unwrap();
        for (_, curves) in &profiles {
            assert_eq!(curves[1].rhos.last(), Some(&0.0));
        }
    }
}
