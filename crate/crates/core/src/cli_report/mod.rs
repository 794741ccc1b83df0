//! Command-line front end: parameter resolution, dispatch to the analysis
//! modules, and JSON/CSV/SVG artifacts wrapped in a [`ReportEnvelope`].

pub mod config;
mod emit;
pub mod repro;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;
use serde::{Deserialize, Serialize};

pub use config::{Cli, Command, ConfigError, FileConfig, Format, Parameters, RunConfig, Suite};
pub use emit::{artifacts, file_stem, write_artifacts, Artifact};
pub use repro::{CriterionRow, ReproResult};

use crate::embedding::{
    build_lattice, embed_integer, gap_table, pythagoras_closure, Branch, ClosureReport, GapTable, LatticeEmbedding,
};
use crate::error::{Error, Result};
use crate::expfam::{cubic_form, divergence, family_point, FamilyPoint};
use crate::mellin_zeta::{gamma_factor_scan, mellin_numeric, GammaFactorRow, MellinReport};
use crate::spectral::{
    hy_ratio, jacobi_residual, poisson_residual, spectral_profile, theta_series, HyRatio, PoissonReport,
    SpectralProfile, ThetaConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub point: FamilyPoint,
    pub cubic_form: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbedResult {
    pub n: f64,
    pub theta0: f64,
    pub a: u64,
    pub branch: Branch,
    pub theta: f64,
    /// D(θ_A‖θ₀), equal to Aⁿ up to the solver tolerance.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeResult {
    pub lattice: LatticeEmbedding,
    pub gaps: GapTable,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    pub n: f64,
    pub tau: f64,
    pub value: f64,
    pub terms_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiRow {
    pub tau: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MellinResult {
    pub reports: Vec<MellinReport>,
    pub gamma_factors: Vec<GammaFactorRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Metric(MetricResult),
    Embed(EmbedResult),
    Lattice(LatticeResult),
    Closure(ClosureReport),
    Theta(ThetaResult),
    Poisson(Vec<PoissonReport>),
    Jacobi(Vec<JacobiRow>),
    Profile(SpectralProfile),
    Hy(Vec<HyRatio>),
    Mellin(MellinResult),
    Repro(ReproResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub tool_version: String,
    pub timestamp: String,
    pub config_echo: RunConfig,
    pub results: Option<Payload>,
    pub diagnostics: Vec<String>,
}

impl ReportEnvelope {
    pub fn new(config: &RunConfig, results: Option<Payload>, diagnostics: Vec<String>) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config_echo: config.clone(),
            results,
            diagnostics,
        }
    }
}

/// Outcome of one command before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Computation {
    pub payload: Payload,
    pub diagnostics: Vec<String>,
    pub summary: String,
}

/// Taus for `poisson` and `jacobi` when `--tau` is not given.
pub fn sweep_taus(command: Command) -> Vec<f64> {
    match command {
        Command::Jacobi => repro::jacobi_grid(),
        _ => repro::POISSON_TAUS.to_vec(),
    }
}

/// Closure defect as printed: rounded to 1e−6, never "-0".
pub fn display_defect(defect: f64) -> String {
    let rounded = (defect * 1e6).round() / 1e6 + 0.0;
    format!("{rounded}")
}

fn param<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Domain(format!("missing parameter {key}")))
}

pub fn compute(cfg: &RunConfig) -> Result<Computation> {
    let n = cfg.n;
    let p = &cfg.parameters;
    let quad = cfg.quad();
    let mut diagnostics = Vec::new();
    let (payload, summary) = match cfg.command {
        Command::Metric => {
            let point = family_point(n, param(p.theta, "theta")?)?;
            let cubic = cubic_form(n, point.theta())?;
            let summary = format!(
                "n={} theta={} psi={} eta={} g={} T={}",
                n,
                point.theta(),
                point.psi(),
                point.eta(),
                point.g(),
                cubic
            );
            (Payload::Metric(MetricResult { point, cubic_form: cubic }), summary)
        }
        Command::Embed => {
            let (theta0, a, branch) = (param(p.theta0, "theta0")?, param(p.a, "a")?, param(p.branch, "branch")?);
            let theta = embed_integer(n, theta0, a, branch, param(p.tol, "tol")?)?;
            let energy = divergence(n, theta, theta0)?;
            let summary = format!("n={n} A={a} theta_A={theta} D={energy}");
            let result = EmbedResult {
                n,
                theta0,
                a,
                branch,
                theta,
                energy,
            };
            (Payload::Embed(result), summary)
        }
        Command::Lattice => {
            let lattice = build_lattice(
                n,
                param(p.theta0, "theta0")?,
                param(p.k, "k")?,
                param(p.branch, "branch")?,
                param(p.tol, "tol")?,
            )?;
            let gaps = gap_table(&lattice)?;
            let strictly_decreasing = gaps.strictly_decreasing();
            if !strictly_decreasing {
                diagnostics.push("gap sequence is not strictly decreasing".to_string());
            }
            let summary = format!(
                "n={n} K={} gaps={} strictly_decreasing={strictly_decreasing}",
                lattice.points.len(),
                gaps.entries.len()
            );
            (
                Payload::Lattice(LatticeResult {
                    lattice,
                    gaps,
                    strictly_decreasing,
                }),
                summary,
            )
        }
        Command::Closure => {
            let triple = (param(p.a, "a")?, param(p.b, "b")?, param(p.c, "c")?);
            let report = pythagoras_closure(
                n,
                param(p.theta0, "theta0")?,
                triple,
                param(p.branch, "branch")?,
                param(p.tol, "tol")?,
            )?;
            let summary = format!("defect={} closed={}", display_defect(report.defect), report.closed);
            (Payload::Closure(report), summary)
        }
        Command::Theta => {
            let tau = param(p.tau, "tau")?;
            let tc = ThetaConfig {
                tail_tol: param(p.tol, "tol")?,
                ..ThetaConfig::new(n, tau)
            };
            let sum = theta_series(&tc)?;
            let summary = format!("Theta_{n}({tau})={} terms={}", sum.value, sum.terms_used);
            let result = ThetaResult {
                n,
                tau,
                value: sum.value,
                terms_used: sum.terms_used,
            };
            (Payload::Theta(result), summary)
        }
        Command::Poisson => {
            let taus = p.tau.map_or_else(|| sweep_taus(Command::Poisson), |t| vec![t]);
            let tail_tol = param(p.tol, "tol")?;
            let reports = taus
                .iter()
                .map(|&tau| {
                    let tc = ThetaConfig {
                        tail_tol,
                        ..ThetaConfig::new(n, tau)
                    };
                    poisson_residual(&tc, &crate::numerics::QuadConfig::default())
                })
                .collect::<Result<Vec<_>>>()?;
            for r in reports.iter().filter(|r| !r.within_budget()) {
                diagnostics.push(format!(
                    "tau={}: residual {} exceeds error budget {}",
                    r.tau, r.residual, r.error_budget
                ));
            }
            let worst = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
            let summary = format!("n={n} taus={} max_residual={worst:e}", reports.len());
            (Payload::Poisson(reports), summary)
        }
        Command::Jacobi => {
            let taus = p.tau.map_or_else(|| sweep_taus(Command::Jacobi), |t| vec![t]);
            let tail_tol = param(p.tol, "tol")?;
            let rows = taus
                .iter()
                .map(|&tau| jacobi_residual(tau, tail_tol).map(|residual| JacobiRow { tau, residual }))
                .collect::<Result<Vec<_>>>()?;
            let worst = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
            let summary = format!("taus={} max_residual={worst:e}", rows.len());
            (Payload::Jacobi(rows), summary)
        }
        Command::Profile => {
            let profile = spectral_profile(n, param(p.xi_max, "xi_max")?, param(p.samples, "samples")?, &quad)?;
            if profile.q_hat <= 1.0 {
                diagnostics.push(format!(
                    "q_hat={} <= 1: the sampled envelope does not decay faster than exponentially on the fit window",
                    profile.q_hat
                ));
            }
            if n != 2.0 && !profile.sign_oscillation {
                diagnostics.push("no sign change in the fit window: envelope taken as |f_hat| at every sample".to_string());
            }
            let summary = format!(
                "n={n} q_hat={} gamma_hat={} fit_residual={:e} envelope_points={}",
                profile.q_hat,
                profile.gamma_hat,
                profile.fit_residual,
                profile.envelope_points.len()
            );
            (Payload::Profile(profile), summary)
        }
        Command::Hy => {
            let ps = p.p.map_or_else(|| repro::HY_EXPONENTS.to_vec(), |v| vec![v]);
            let rows = ps.iter().map(|&pp| hy_ratio(n, pp, &quad)).collect::<Result<Vec<_>>>()?;
            for r in rows.iter().filter(|r| r.ratio > r.beckner_bound + 1e-4) {
                diagnostics.push(format!("p={}: ratio {} exceeds bound {}", r.p, r.ratio, r.beckner_bound));
            }
            let gap = rows.iter().map(|r| r.beckner_bound - r.ratio).fold(f64::INFINITY, f64::min);
            let summary = format!("n={n} points={} min(bound - ratio)={gap:e}", rows.len());
            (Payload::Hy(rows), summary)
        }
        Command::Mellin => {
            let grid: Vec<f64> = match p.s {
                Some(s) => vec![s],
                None => repro::MELLIN_S.into_iter().filter(|&s| n * s > 1.0).collect(),
            };
            let reports = grid
                .iter()
                .map(|&s| mellin_numeric(n, s, &quad, 1e-15))
                .collect::<Result<Vec<_>>>()?;
            let gamma_factors = gamma_factor_scan(n, &grid)?;
            let worst = reports.iter().map(|r| r.residual).fold(0.0, f64::max);
            let summary = format!("n={n} points={} max_residual={worst:e}", reports.len());
            (Payload::Mellin(MellinResult { reports, gamma_factors }), summary)
        }
        Command::Repro => {
            let suite = param(p.suite, "suite")?;
            let result = repro::run_suite(suite, cfg.seed, &quad)?;
            let failed = result.rows.iter().filter(|r| !r.passed).count();
            let summary = format!(
                "suite {}: {} of {} rows passed",
                suite.name(),
                result.rows.len() - failed,
                result.rows.len()
            );
            (Payload::Repro(result), summary)
        }
    };
    Ok(Computation {
        payload,
        diagnostics,
        summary,
    })
}

/// Runs one invocation and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let file = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(f) => f,
            Err(ConfigError::Usage(msg)) => {
                eprintln!("error: {msg}");
                return EXIT_USAGE;
            }
        },
        None => FileConfig::default(),
    };
    let env_out = std::env::var_os(config::OUT_ENV).map(PathBuf::from);
    let cfg = match RunConfig::resolve(&cli, &file, env_out) {
        Ok(cfg) => cfg,
        Err(ConfigError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    execute(&cfg)
}

/// Computes, writes artifacts and prints the summary.
pub fn execute(cfg: &RunConfig) -> i32 {
    match compute(cfg) {
        Ok(done) => {
            let envelope = ReportEnvelope::new(cfg, Some(done.payload), done.diagnostics);
            for d in &envelope.diagnostics {
                eprintln!("warning: {d}");
            }
            let files = artifacts(&envelope);
            if let Err(e) = write_artifacts(&cfg.output_dir, &files) {
                eprintln!("error: {e}");
                return EXIT_IO;
            }
            if let Some(Payload::Repro(result)) = &envelope.results {
                print!("{}", repro::format_table(result));
                println!("{}", done.summary);
                return if result.passed { EXIT_OK } else { EXIT_ACCEPTANCE };
            }
            println!("{}", done.summary);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
            let envelope = ReportEnvelope::new(cfg, None, vec![e.to_string()]);
            let files = artifacts(&envelope);
            if let Err(io) = write_artifacts(&cfg.output_dir, &files) {
                eprintln!("error: {io}");
                return EXIT_IO;
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> std::result::Result<RunConfig, ConfigError> {
        let mut argv = vec!["dualitylab"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).unwrap();
        RunConfig::resolve(&cli, &FileConfig::default(), None)
    }

    #[test]
    fn defect_display() {
        assert_eq!(display_defect(-1e-12), "0");
        assert_eq!(display_defect(3e-9), "0");
        assert_eq!(display_defect(-34.000000001), "-34");
        assert_eq!(display_defect(1.25), "1.25");
    }

    #[test]
    fn closure_summary() {
        let cfg = resolve(&["closure", "--n", "2", "--a", "3", "--b", "4", "--c", "5"]).unwrap();
        let done = compute(&cfg).unwrap();
        assert_eq!(done.summary, "defect=0 closed=true");
    }

    #[test]
    fn validation_rejects_before_compute() {
        let usage = |args: &[&str]| match resolve(args) {
            Err(ConfigError::Usage(msg)) => msg,
            Ok(cfg) => panic!("accepted {cfg:?}"),
        };
        assert!(usage(&["metric", "--theta", "0"]).starts_with("--theta"));
        assert!(usage(&["poisson", "--tau", "-1"]).starts_with("--tau"));
        assert!(usage(&["mellin", "--n", "2", "--s", "0.5"]).starts_with("--s"));
        assert!(usage(&["hy", "--p", "2.5"]).starts_with("--p"));
        assert!(usage(&["hy", "--p", "1"]).starts_with("--p"));
        assert!(usage(&["lattice", "--k", "1"]).starts_with("--k"));
        assert!(usage(&["profile", "--samples", "4"]).starts_with("--samples"));
        assert!(usage(&["theta", "--n", "0.5"]).starts_with("--n"));
    }

    #[test]
    fn precedence_cli_over_file_over_default() {
        let cli = Cli::try_parse_from(["dualitylab", "poisson", "--tau", "2"]).unwrap();
        let file: FileConfig = toml::from_str("n = 3.0\ntau = 0.5\nformat = [\"csv\", \"json\"]").unwrap();
        let cfg = RunConfig::resolve(&cli, &file, Some(PathBuf::from("from-env"))).unwrap();
        assert_eq!(cfg.n, 3.0);
        assert_eq!(cfg.parameters.tau, Some(2.0));
        assert_eq!(cfg.formats, vec![Format::Json, Format::Csv]);
        assert_eq!(cfg.output_dir, PathBuf::from("from-env"));
        assert_eq!(cfg.seed, config::DEFAULT_SEED);

        let file: FileConfig = toml::from_str("out = \"from-file\"").unwrap();
        let cfg = RunConfig::resolve(&cli, &file, Some(PathBuf::from("from-env"))).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("from-file"));
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }

    #[test]
    fn envelope_round_trip() {
        let cfg = resolve(&["lattice", "--n", "3", "--k", "4"]).unwrap();
        let done = compute(&cfg).unwrap();
        let env = ReportEnvelope::new(&cfg, Some(done.payload), done.diagnostics);
        let text = serde_json::to_string_pretty(&env).unwrap();
        let back: ReportEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(back, env);
    }

    #[test]
    fn domain_error_after_validation_is_usage() {
        // valid flags, but θ_A underflows to 0 on the above-reference branch
        let cfg = resolve(&["embed", "--n", "2", "--a", "30", "--branch", "above"]).unwrap();
        assert!(matches!(compute(&cfg), Err(Error::Domain(_))));
    }
}
