use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::info;
use omffm::metrics::{hv_reference, MetricsContext};
use omffm::mop::nondominated_points;
use omffm::problems::PROBLEMS;
use omffm::{get_problem, MetricsReport, SolverConfig};

use crate::bench::{
    build_profiles, run_campaign_with, write_campaign, default_runner, write_profiles, CampaignSpec,
    CellRecord, Solver,
};
use crate::error::{CliError, CliResult};
use crate::front::{write_atomic, FrontFile};

pub fn load_config(path: Option<&Path>) -> CliResult<SolverConfig> {
    let cfg = match path {
        None => SolverConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    Ok(cfg)
}

fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub struct RunArgs<'a> {
    pub problem: &'a str,
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub out: &'a Path,
    pub solver: Solver,
}

/// Solves one problem and writes `front_pf.csv`, `front_pff.csv` and
/// `report.json` into the output directory.
pub fn cmd_run(args: &RunArgs<'_>) -> CliResult<()> {
    let problem = get_problem(args.problem)?;
    let mut cfg = load_config(args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let report = args.solver.run(&problem, &cfg)?;
    info!(
        "{}: |PF|={} |PFF|={} evals={} termination={:?}",
        report.problem,
        report.pf.len(),
        report.pff.len(),
        report.evals,
        report.termination
    );
    for (name, archive) in [("front_pf.csv", &report.pf), ("front_pff.csv", &report.pff)] {
        let front = FrontFile {
            problem: Some(report.problem.clone()),
            solver: Some(report.solver.clone()),
            seed: Some(cfg.seed),
            n: report.n,
            m: report.m,
            entries: archive.entries().to_vec(),
        };
        write_atomic(&args.out.join(name), front.to_csv().as_bytes())?;
    }
    write_atomic(&args.out.join("report.json"), to_json(&report)?.as_bytes())
}

pub fn cmd_bench(
    campaign: &Path,
    jobs: usize,
    repeats: Option<usize>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> CliResult<PathBuf> {
    let mut spec = CampaignSpec::read(campaign)?;
    if let Some(r) = repeats {
        spec.repeats = r;
    }
    if let Some(s) = seed {
        spec.config.seed = s;
    }
    if let Some(o) = out {
        spec.output_dir = o.to_path_buf();
    }
    let outcome = run_campaign_with(&spec, jobs, default_runner)?;
    let failures = outcome.records.iter().filter(|r| r.failed).count();
    if failures > 0 {
        log::warn!("{failures} of {} cells failed", outcome.records.len());
    }
    write_campaign(&spec.output_dir, &spec, &outcome)?;
    Ok(spec.output_dir)
}

pub fn parse_hv_ref(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("--hv-ref: `{t}` is not a finite number")))
        })
        .collect()
}

/// Scores externally produced fronts against each other. Without a reference
/// front, the non-dominated union of the inputs anchors the spreads and the
/// hypervolume reference point.
pub fn cmd_metrics(
    fronts: &[PathBuf],
    reference: Option<&Path>,
    hv_ref: Option<&[f64]>,
) -> CliResult<Vec<MetricsReport>> {
    if fronts.is_empty() {
        return Err(CliError::Config("no front files given".into()));
    }
    let files = fronts.iter().map(|p| FrontFile::read(p)).collect::<CliResult<Vec<_>>>()?;
    let m = files[0].m;
    for (f, path) in files.iter().zip(fronts) {
        if f.m != m {
            return Err(CliError::data(path, 1, format!("{} objectives, expected {m}", f.m)));
        }
    }
    let all: Vec<Vec<Vec<f64>>> = files.iter().map(FrontFile::objectives).collect();
    let reference_front = match reference {
        Some(p) => {
            let r = FrontFile::read(p)?;
            if r.m != m {
                return Err(CliError::data(p, 1, format!("{} objectives, expected {m}", r.m)));
            }
            nondominated_points(&r.objectives())
        }
        None => nondominated_points(&all.concat()),
    };
    let hv = match hv_ref {
        Some(r) if r.len() != m => {
            return Err(CliError::Config(format!("--hv-ref has {} components, fronts have {m}", r.len())))
        }
        Some(r) => r.to_vec(),
        None => {
            if reference_front.is_empty() {
                return Err(CliError::data(&fronts[0], 1, "fronts contain no points"));
            }
            let mut ideal = vec![f64::INFINITY; m];
            let mut nadir = vec![f64::NEG_INFINITY; m];
            for p in &reference_front {
                for j in 0..m {
                    ideal[j] = ideal[j].min(p[j]);
                    nadir[j] = nadir[j].max(p[j]);
                }
            }
            hv_reference(&ideal, &nadir)
        }
    };
    let mut reports = Vec::new();
    for ((file, front), path) in files.iter().zip(&all).zip(fronts) {
        let problem = file.problem.clone().unwrap_or_else(|| "unknown".into());
        let ctx = MetricsContext {
            problem: &problem,
            all_fronts: &all,
            reference_front: &reference_front,
            hv_reference: &hv,
        };
        let solver = file.solver.clone().unwrap_or_else(|| {
            path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        });
        reports.push(MetricsReport::compute(&ctx, &solver, file.seed.unwrap_or(0), front, 0)?);
    }
    Ok(reports)
}

pub fn metrics_json(reports: &[MetricsReport]) -> CliResult<String> {
    to_json(&reports)
}

/// Rebuilds the profile CSVs from a campaign's `metrics.json`.
pub fn cmd_profile(metrics: &Path, out: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(metrics).map_err(|e| CliError::io(metrics, e))?;
    let records: Vec<CellRecord> = serde_json::from_str(&text).map_err(|e| {
        CliError::data(metrics, e.line(), format!("not a campaign metrics file: {e}"))
    })?;
    let mut problems: Vec<String> = Vec::new();
    let mut solvers: Vec<String> = Vec::new();
    for r in &records {
        if !problems.contains(&r.problem) {
            problems.push(r.problem.clone());
        }
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver.clone());
        }
    }
    let profiles = build_profiles(&records, &problems, &solvers)?;
    write_profiles(out, &profiles)
}

pub fn list_problems() -> String {
    let mut out = String::from("name\tn\tm\tjacobian\ttrue_front\n");
    for (name, _, _) in PROBLEMS {
        // registered names always resolve
        let p = get_problem(name).expect("registered problem");
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            name,
            p.n(),
            p.m(),
            if p.has_analytic_jacobian() { "analytic" } else { "finite-diff" },
            if p.has_front_sampler() { "yes" } else { "no" }
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hv_ref_parsing() {
        assert_eq!(parse_hv_ref("2,2").unwrap(), vec![2.0, 2.0]);
        assert_eq!(parse_hv_ref(" 1.5 , -3").unwrap(), vec![1.5, -3.0]);
        assert_eq!(parse_hv_ref("2,x").unwrap_err().exit_code(), 3);
        assert!(parse_hv_ref("inf,1").is_err());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"num_starts": 3, "mu_inii": 0.1}"#).unwrap();
        assert_eq!(load_config(Some(&p)).unwrap_err().exit_code(), 3);
        std::fs::write(&p, r#"{"num_starts": 3}"#).unwrap();
        assert_eq!(load_config(Some(&p)).unwrap().num_starts, 3);
    }

    #[test]
    fn listing_covers_the_registry() {
        let text = list_problems();
        assert_eq!(text.lines().count(), PROBLEMS.len() + 1);
        assert!(text.contains("ZDT1\t30\t2\t"));
    }
}
