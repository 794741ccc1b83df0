use std::path::{Path, PathBuf};

use super::config::{Command, Format};
use super::svg::{document, Panel, Series, Style};
use super::{Payload, ReportEnvelope};

/// One output file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Base file name for a run, e.g. `poisson_n3_tau1`.
pub fn file_stem(env: &ReportEnvelope) -> String {
    let cfg = &env.config_echo;
    let p = &cfg.parameters;
    let n = cfg.n;
    let with = |base: String, key: &str, v: Option<f64>| match v {
        Some(v) => format!("{base}_{key}{v}"),
        None => base,
    };
    match cfg.command {
        Command::Metric => with(format!("metric_n{n}"), "theta", p.theta),
        Command::Embed => format!("embed_n{n}_a{}", p.a.unwrap_or(0)),
        Command::Lattice => format!("lattice_n{n}"),
        Command::Closure => format!(
            "closure_n{n}_{}_{}_{}",
            p.a.unwrap_or(0),
            p.b.unwrap_or(0),
            p.c.unwrap_or(0)
        ),
        Command::Theta => with(format!("theta_n{n}"), "tau", p.tau),
        Command::Poisson => with(format!("poisson_n{n}"), "tau", p.tau),
        Command::Jacobi => with("jacobi".to_string(), "tau", p.tau),
        Command::Profile => format!("profile_n{n}"),
        Command::Hy => with(format!("hy_n{n}"), "p", p.p),
        Command::Mellin => with(format!("mellin_n{n}"), "s", p.s),
        Command::Repro => format!("repro_{}", p.suite.unwrap_or_default().name()),
    }
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn csv_quote(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Tabular views of a payload: (file suffix, csv text).
fn tables(payload: &Payload) -> Vec<(Option<&'static str>, String)> {
    match payload {
        Payload::Metric(m) => vec![(
            None,
            csv(
                &["n", "theta", "z", "psi", "eta", "g", "cubic_form"],
                [vec![
                    num(m.point.n()),
                    num(m.point.theta()),
                    num(m.point.z()),
                    num(m.point.psi()),
                    num(m.point.eta()),
                    num(m.point.g()),
                    num(m.cubic_form),
                ]],
            ),
        )],
        Payload::Embed(e) => vec![(
            None,
            csv(
                &["n", "theta0", "a", "theta", "energy"],
                [vec![num(e.n), num(e.theta0), e.a.to_string(), num(e.theta), num(e.energy)]],
            ),
        )],
        Payload::Lattice(l) => vec![(
            Some("gaps"),
            csv(
                &["k", "theta_k", "gap"],
                l.gaps
                    .entries
                    .iter()
                    .map(|g| vec![g.k.to_string(), num(g.theta_k), num(g.gap)]),
            ),
        )],
        Payload::Closure(c) => vec![(
            None,
            csv(
                &["n", "a", "b", "c", "energy_sum", "target_energy", "defect", "closed"],
                [vec![
                    num(c.n),
                    c.a.to_string(),
                    c.b.to_string(),
                    c.c.to_string(),
                    num(c.energy_sum),
                    num(c.target_energy),
                    num(c.defect),
                    c.closed.to_string(),
                ]],
            ),
        )],
        Payload::Theta(t) => vec![(
            None,
            csv(
                &["n", "tau", "value", "terms_used"],
                [vec![num(t.n), num(t.tau), num(t.value), t.terms_used.to_string()]],
            ),
        )],
        Payload::Poisson(rows) => vec![(
            None,
            csv(
                &[
                    "n",
                    "tau",
                    "primal_sum",
                    "dual_sum",
                    "residual",
                    "primal_terms",
                    "dual_terms",
                    "quad_error",
                    "error_budget",
                ],
                rows.iter().map(|r| {
                    vec![
                        num(r.n),
                        num(r.tau),
                        num(r.primal_sum),
                        num(r.dual_sum),
                        num(r.residual),
                        r.primal_terms.to_string(),
                        r.dual_terms.to_string(),
                        num(r.quad_error),
                        num(r.error_budget),
                    ]
                }),
            ),
        )],
        Payload::Jacobi(rows) => vec![(
            None,
            csv(&["tau", "residual"], rows.iter().map(|r| vec![num(r.tau), num(r.residual)])),
        )],
        Payload::Profile(p) => vec![
            (
                None,
                csv(&["xi", "fhat"], p.xi_samples.iter().map(|s| vec![num(s.0), num(s.1)])),
            ),
            (
                Some("envelope"),
                csv(
                    &["xi", "envelope"],
                    p.envelope_points.iter().map(|s| vec![num(s.0), num(s.1)]),
                ),
            ),
        ],
        Payload::Hy(rows) => vec![(
            None,
            csv(
                &["n", "p", "p_conjugate", "f_norm", "fhat_norm", "ratio", "beckner_bound"],
                rows.iter().map(|r| {
                    vec![
                        num(r.n),
                        num(r.p),
                        num(r.p_conjugate),
                        num(r.f_norm),
                        num(r.fhat_norm),
                        num(r.ratio),
                        num(r.beckner_bound),
                    ]
                }),
            ),
        )],
        Payload::Mellin(m) => vec![
            (
                None,
                csv(
                    &["n", "s", "numeric", "closed_form", "residual", "split_point"],
                    m.reports.iter().map(|r| {
                        vec![
                            num(r.n),
                            num(r.s),
                            num(r.numeric),
                            num(r.closed_form),
                            num(r.residual),
                            num(r.split_point),
                        ]
                    }),
                ),
            ),
            (
                Some("gamma_factors"),
                csv(
                    &["s", "ratio", "duplication_residual"],
                    m.gamma_factors.iter().map(|g| {
                        vec![
                            num(g.s),
                            num(g.ratio),
                            g.duplication_residual.map(num).unwrap_or_default(),
                        ]
                    }),
                ),
            ),
        ],
        Payload::Repro(r) => vec![(
            None,
            csv(
                &["id", "name", "measured", "expected", "tolerance", "relation", "passed"],
                r.rows.iter().map(|row| {
                    vec![
                        row.id.clone(),
                        csv_quote(&row.name),
                        num(row.measured),
                        num(row.expected),
                        num(row.tolerance),
                        serde_json::to_value(row.relation)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default(),
                        row.passed.to_string(),
                    ]
                }),
            ),
        )],
    }
}

/// Zero residuals are drawn at this floor on log axes.
const LOG_FLOOR: f64 = 1e-18;

fn log_residuals(points: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    points.map(|(t, r)| (t.log10(), r.max(LOG_FLOOR).log10())).collect()
}

fn figure(payload: &Payload) -> Option<(Option<&'static str>, String)> {
    match payload {
        Payload::Profile(p) => {
            let fit: Vec<(f64, f64)> = p
                .envelope_points
                .iter()
                .filter(|e| e.0 > 0.0 && e.1 > 0.0 && e.1 < 1.0)
                .map(|e| (e.0.ln(), (-e.1.ln()).ln()))
                .collect();
            let (lo, hi) = fit
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), q| (lo.min(q.0), hi.max(q.0)));
            let ln_gamma = p.gamma_hat.ln();
            let line = vec![(lo, ln_gamma + p.q_hat * lo), (hi, ln_gamma + p.q_hat * hi)];
            let samples = Panel {
                title: format!("Fourier transform of exp(-|x|^{})", p.n),
                x_label: "xi".into(),
                y_label: "f_hat(xi)".into(),
                series: vec![Series::new("f_hat", p.xi_samples.clone(), Style::Line, "#1f77b4")],
                annotation: None,
            };
            let loglog = Panel {
                title: "decay envelope, log-log".into(),
                x_label: "ln xi".into(),
                y_label: "ln(-ln envelope)".into(),
                series: vec![
                    Series::new("envelope", fit, Style::Markers, "#d62728"),
                    Series::new("least-squares fit", line, Style::Line, "#2ca02c"),
                ],
                annotation: Some(format!("q_hat = {}", p.q_hat)),
            };
            Some((None, document(&[samples, loglog])))
        }
        Payload::Lattice(l) => {
            let positions = Panel {
                title: format!("embedded integers, n = {}", l.lattice.n),
                x_label: "k".into(),
                y_label: "theta_k".into(),
                series: vec![Series::new(
                    "theta_k",
                    l.lattice.points.iter().map(|p| (p.k as f64, p.theta)).collect(),
                    Style::Markers,
                    "#1f77b4",
                )],
                annotation: None,
            };
            let gaps = Panel {
                title: "Fisher-Rao gaps".into(),
                x_label: "k".into(),
                y_label: "gap(k -> k+1)".into(),
                series: vec![Series::new(
                    "gap",
                    l.gaps.entries.iter().map(|g| (g.k as f64, g.gap)).collect(),
                    Style::Bars,
                    "#ff7f0e",
                )],
                annotation: None,
            };
            Some((Some("gaps"), document(&[positions, gaps])))
        }
        Payload::Poisson(rows) => {
            let panel = Panel {
                title: format!("Poisson residual, n = {}", rows.first().map_or(0.0, |r| r.n)),
                x_label: "log10 tau".into(),
                y_label: "log10 residual (zero at 1e-18)".into(),
                series: vec![
                    Series::new(
                        "residual",
                        log_residuals(rows.iter().map(|r| (r.tau, r.residual))),
                        Style::Markers,
                        "#1f77b4",
                    ),
                    Series::new(
                        "error budget",
                        log_residuals(rows.iter().map(|r| (r.tau, r.error_budget))),
                        Style::Line,
                        "#7f7f7f",
                    ),
                ],
                annotation: None,
            };
            Some((None, document(&[panel])))
        }
        Payload::Jacobi(rows) => {
            let panel = Panel {
                title: "Jacobi residual, n = 2".into(),
                x_label: "log10 tau".into(),
                y_label: "log10 residual (zero at 1e-18)".into(),
                series: vec![Series::new(
                    "residual",
                    log_residuals(rows.iter().map(|r| (r.tau, r.residual))),
                    Style::Markers,
                    "#1f77b4",
                )],
                annotation: None,
            };
            Some((None, document(&[panel])))
        }
        Payload::Hy(rows) => {
            let panel = Panel {
                title: format!("Hausdorff-Young ratio, n = {}", rows.first().map_or(0.0, |r| r.n)),
                x_label: "p".into(),
                y_label: "norm ratio".into(),
                series: vec![
                    Series::new("ratio", rows.iter().map(|r| (r.p, r.ratio)).collect(), Style::Markers, "#1f77b4"),
                    Series::new(
                        "Beckner bound",
                        rows.iter().map(|r| (r.p, r.beckner_bound)).collect(),
                        Style::Line,
                        "#d62728",
                    ),
                ],
                annotation: None,
            };
            Some((None, document(&[panel])))
        }
        Payload::Mellin(m) => {
            let panel = Panel {
                title: format!("Mellin transform, n = {}", m.reports.first().map_or(0.0, |r| r.n)),
                x_label: "s".into(),
                y_label: "value".into(),
                series: vec![
                    Series::new(
                        "numeric",
                        m.reports.iter().map(|r| (r.s, r.numeric)).collect(),
                        Style::Markers,
                        "#1f77b4",
                    ),
                    Series::new(
                        "2 Gamma(s) zeta(ns)",
                        m.reports.iter().map(|r| (r.s, r.closed_form)).collect(),
                        Style::Line,
                        "#d62728",
                    ),
                ],
                annotation: None,
            };
            Some((None, document(&[panel])))
        }
        _ => None,
    }
}

/// Every file a report produces for its configured formats. A report
/// without results still yields its JSON envelope so diagnostics survive.
pub fn artifacts(env: &ReportEnvelope) -> Vec<Artifact> {
    let stem = file_stem(env);
    let cfg = &env.config_echo;
    let name = |suffix: Option<&str>, ext: &str| match suffix {
        Some(s) if cfg.command == Command::Lattice => format!("{s}.{ext}"),
        Some(s) => format!("{stem}_{s}.{ext}"),
        None => format!("{stem}.{ext}"),
    };
    let mut out = Vec::new();
    let Some(payload) = &env.results else {
        out.push(Artifact {
            name: name(None, "json"),
            contents: to_json(env),
        });
        return out;
    };
    if cfg.formats.contains(&Format::Json) {
        out.push(Artifact {
            name: name(None, "json"),
            contents: to_json(env),
        });
    }
    if cfg.formats.contains(&Format::Csv) {
        for (suffix, text) in tables(payload) {
            out.push(Artifact {
                name: name(suffix, "csv"),
                contents: text,
            });
        }
    }
    if cfg.formats.contains(&Format::Svg) {
        if let Some((suffix, text)) = figure(payload) {
            out.push(Artifact {
                name: name(suffix, "svg"),
                contents: text,
            });
        }
    }
    out
}

fn to_json(env: &ReportEnvelope) -> String {
    let mut text = serde_json::to_string_pretty(env).expect("report serializes");
    text.push('\n');
    text
}

/// Writes each artifact under `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, files: &[Artifact]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.contents)?;
            Ok(path)
        })
        .collect()
}
