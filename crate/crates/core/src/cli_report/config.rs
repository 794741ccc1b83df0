use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::embedding::{Branch, DEFAULT_CLOSURE_TOL, DEFAULT_SOLVER_TOL, DEFAULT_THETA0};
use crate::numerics::QuadConfig;
use crate::spectral::{default_xi_max, DEFAULT_SAMPLE_COUNT};

pub const OUT_ENV: &str = "DUALITYLAB_OUT";
pub const DEFAULT_OUT_DIR: &str = "dualitylab-out";
pub const DEFAULT_N: f64 = 2.0;
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Metric,
    Embed,
    Lattice,
    Closure,
    Theta,
    Poisson,
    Jacobi,
    Profile,
    Hy,
    Mellin,
    Repro,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Metric => "metric",
            Command::Embed => "embed",
            Command::Lattice => "lattice",
            Command::Closure => "closure",
            Command::Theta => "theta",
            Command::Poisson => "poisson",
            Command::Jacobi => "jacobi",
            Command::Profile => "profile",
            Command::Hy => "hy",
            Command::Mellin => "mellin",
            Command::Repro => "repro",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    #[default]
    All,
    Metric,
    Duality,
    Closure,
    Mellin,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Metric => "metric",
            Suite::Duality => "duality",
            Suite::Closure => "closure",
            Suite::Mellin => "mellin",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dualitylab", version, about = "Dual geometry, theta duality and zeta factorization of exp(θ|x|ⁿ)")]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long, help = "Exponent n > 0 of the kernel exp(-|x|^n)")]
    pub n: Option<f64>,
    #[arg(long, help = "Natural parameter theta < 0 (metric)")]
    pub theta: Option<f64>,
    #[arg(long, help = "Reference natural parameter (embed, lattice, closure)")]
    pub theta0: Option<f64>,
    #[arg(long, help = "Theta argument tau > 0")]
    pub tau: Option<f64>,
    #[arg(long, help = "Mellin variable, n*s > 1")]
    pub s: Option<f64>,
    #[arg(long, help = "Integer A (embed) or first leg (closure)")]
    pub a: Option<u64>,
    #[arg(long, help = "Second leg (closure)")]
    pub b: Option<u64>,
    #[arg(long, help = "Hypotenuse (closure)")]
    pub c: Option<u64>,
    #[arg(long, help = "Lattice size K >= 2")]
    pub k: Option<u64>,
    #[arg(long = "xi-max", help = "Upper frequency of the profile window")]
    pub xi_max: Option<f64>,
    #[arg(long, help = "Frequency samples in the profile window")]
    pub samples: Option<usize>,
    #[arg(long, help = "Lebesgue exponent in (1, 2]")]
    pub p: Option<f64>,
    #[arg(long, help = "Embedding branch: below or above the reference")]
    pub branch: Option<Branch>,
    #[arg(long, help = "Command tolerance (solver, closure, tail or quadrature)")]
    pub tol: Option<f64>,
    #[arg(long, help = "Output directory [env: DUALITYLAB_OUT]")]
    pub out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', help = "Comma-separated output formats")]
    pub format: Option<Vec<Format>>,
    #[arg(long, help = "TOML run file; flags override its keys")]
    pub config: Option<PathBuf>,
    #[arg(long, help = "RNG seed for sampled checks")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, help = "Criterion subset for repro")]
    pub suite: Option<Suite>,
}

/// Key-value run file; keys mirror the long flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub n: Option<f64>,
    pub theta: Option<f64>,
    pub theta0: Option<f64>,
    pub tau: Option<f64>,
    pub s: Option<f64>,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub c: Option<u64>,
    pub k: Option<u64>,
    #[serde(alias = "xi_max")]
    pub xi_max: Option<f64>,
    pub samples: Option<usize>,
    pub p: Option<f64>,
    pub branch: Option<Branch>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub seed: Option<u64>,
    pub suite: Option<Suite>,
}

impl FileConfig {
    pub fn load(path: &Path) -> std::result::Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Usage(format!("--config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError::Usage(format!("--config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Usage(String),
}

/// Command-specific parameters after defaults are applied. Keys a command
/// does not use stay absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<f64>,
    /// Absent for sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub n: f64,
    pub parameters: Parameters,
    pub output_dir: PathBuf,
    pub formats: Vec<Format>,
    pub seed: u64,
}

fn pick<T: Clone>(cli: &Option<T>, file: &Option<T>) -> Option<T> {
    cli.clone().or_else(|| file.clone())
}

fn fail(flag: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::Usage(format!("--{flag}: {msg}"))
}

impl RunConfig {
    /// Merges flags over the run file over built-in defaults, then validates.
    pub fn resolve(cli: &Cli, file: &FileConfig, env_out: Option<PathBuf>) -> std::result::Result<Self, ConfigError> {
        let command = cli.command;
        let n = pick(&cli.n, &file.n).unwrap_or(DEFAULT_N);
        let theta = pick(&cli.theta, &file.theta);
        let theta0 = pick(&cli.theta0, &file.theta0);
        let tau = pick(&cli.tau, &file.tau);
        let s = pick(&cli.s, &file.s);
        let a = pick(&cli.a, &file.a);
        let b = pick(&cli.b, &file.b);
        let c = pick(&cli.c, &file.c);
        let k = pick(&cli.k, &file.k);
        let xi_max = pick(&cli.xi_max, &file.xi_max);
        let samples = pick(&cli.samples, &file.samples);
        let p = pick(&cli.p, &file.p);
        let branch = pick(&cli.branch, &file.branch);
        let tol = pick(&cli.tol, &file.tol);
        let suite = pick(&cli.suite, &file.suite);

        let mut params = Parameters::default();
        match command {
            Command::Metric => {
                params.theta = Some(theta.unwrap_or(DEFAULT_THETA0));
            }
            Command::Embed => {
                params.theta0 = Some(theta0.unwrap_or(DEFAULT_THETA0));
                params.a = Some(a.unwrap_or(1));
                params.branch = Some(branch.unwrap_or_default());
                params.tol = Some(tol.unwrap_or(DEFAULT_SOLVER_TOL));
            }
            Command::Lattice => {
                params.theta0 = Some(theta0.unwrap_or(DEFAULT_THETA0));
                params.k = Some(k.unwrap_or(4));
                params.branch = Some(branch.unwrap_or_default());
                params.tol = Some(tol.unwrap_or(DEFAULT_SOLVER_TOL));
            }
            Command::Closure => {
                params.theta0 = Some(theta0.unwrap_or(DEFAULT_THETA0));
                params.a = Some(a.unwrap_or(3));
                params.b = Some(b.unwrap_or(4));
                params.c = Some(c.unwrap_or(5));
                params.branch = Some(branch.unwrap_or_default());
                params.tol = Some(tol.unwrap_or(DEFAULT_CLOSURE_TOL));
            }
            Command::Theta => {
                params.tau = Some(tau.unwrap_or(1.0));
                params.tol = Some(tol.unwrap_or(crate::spectral::DEFAULT_TAIL_TOL));
            }
            Command::Poisson | Command::Jacobi => {
                params.tau = tau;
                params.tol = Some(tol.unwrap_or(crate::spectral::DEFAULT_TAIL_TOL));
            }
            Command::Profile => {
                params.xi_max = Some(xi_max.unwrap_or_else(|| default_xi_max(n)));
                params.samples = Some(samples.unwrap_or(DEFAULT_SAMPLE_COUNT));
                params.tol = Some(tol.unwrap_or(QuadConfig::default().abs_tol));
            }
            Command::Hy => {
                params.p = p;
                params.tol = Some(tol.unwrap_or(QuadConfig::default().abs_tol));
            }
            Command::Mellin => {
                params.s = s;
                params.tol = Some(tol.unwrap_or(QuadConfig::default().abs_tol));
            }
            Command::Repro => {
                params.suite = Some(suite.unwrap_or_default());
            }
        }

        let mut formats = pick(&cli.format, &file.format).unwrap_or_else(|| vec![Format::Json]);
        formats.sort();
        formats.dedup();
        let output_dir = pick(&cli.out, &file.out)
            .or(env_out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        let cfg = RunConfig {
            command,
            n,
            parameters: params,
            output_dir,
            formats,
            seed: pick(&cli.seed, &file.seed).unwrap_or(DEFAULT_SEED),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Rejects out-of-domain parameters before any computation.
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        let n = self.n;
        let p = &self.parameters;
        if !(n.is_finite() && n >= 1.0) {
            return Err(fail("n", format!("must be a finite real >= 1, got {n}")));
        }
        if let Some(t) = p.theta {
            if !(t < 0.0 && t.is_finite()) {
                return Err(fail("theta", format!("must be negative, got {t}")));
            }
        }
        if let Some(t) = p.theta0 {
            if !(t < 0.0 && t.is_finite()) {
                return Err(fail("theta0", format!("must be negative, got {t}")));
            }
        }
        if let Some(t) = p.tau {
            if !(t > 0.0 && t.is_finite()) {
                return Err(fail("tau", format!("must be positive, got {t}")));
            }
        }
        if let Some(s) = p.s {
            if !(s.is_finite() && n * s > 1.0) {
                return Err(fail("s", format!("must exceed 1/n = {}, got {s}", 1.0 / n)));
            }
        }
        for (flag, v) in [("a", p.a), ("b", p.b), ("c", p.c)] {
            if v == Some(0) {
                return Err(fail(flag, "must be a positive integer"));
            }
        }
        if let Some(k) = p.k {
            if k < 2 {
                return Err(fail("k", format!("lattice needs at least 2 points, got {k}")));
            }
        }
        if let Some(x) = p.xi_max {
            if !(x > 0.0 && x.is_finite()) {
                return Err(fail("xi-max", format!("must be positive, got {x}")));
            }
        }
        if let Some(m) = p.samples {
            if m < 16 {
                return Err(fail("samples", format!("must be at least 16, got {m}")));
            }
        }
        if let Some(pp) = p.p {
            if !(pp > 1.0 && pp <= 2.0) {
                return Err(fail("p", format!("must lie in (1, 2], got {pp}")));
            }
        }
        if let Some(t) = p.tol {
            let ok = if self.command == Command::Closure { t >= 0.0 } else { t > 0.0 };
            if !(ok && t.is_finite()) {
                return Err(fail("tol", format!("must be positive, got {t}")));
            }
        }
        if self.formats.is_empty() {
            return Err(fail("format", "at least one format is required"));
        }
        Ok(())
    }

    pub fn quad(&self) -> QuadConfig {
        let tol = self.parameters.tol.unwrap_or(QuadConfig::default().abs_tol);
        QuadConfig::with_tolerance(tol, tol)
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }
}
