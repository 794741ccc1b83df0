use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dualitylab::cli_report::{Payload, ReportEnvelope};
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dualitylab"));
    cmd.env_remove("DUALITYLAB_OUT");
    cmd
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_envelope(path: &Path) -> ReportEnvelope {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn closure_summary_for_pythagorean_triple() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["closure", "--n", "2", "--a", "3", "--b", "4", "--c", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "defect=0 closed=true");
}

#[test]
fn poisson_writes_one_named_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["poisson", "--n", "3", "--tau", "1.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(listing(dir.path()), vec!["poisson_n3_tau1.json"]);
    let env = read_envelope(&dir.path().join("poisson_n3_tau1.json"));
    let Some(Payload::Poisson(rows)) = &env.results else {
        panic!("unexpected payload {:?}", env.results)
    };
    assert_eq!(rows.len(), 1);
    assert!(rows[0].residual <= 1e-6);
}

#[test]
fn profile_n3_exponent_in_expected_range() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["profile", "--n", "3", "--xi-max", "5", "--samples", "512"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let env = read_envelope(&dir.path().join("profile_n3.json"));
    let Some(Payload::Profile(p)) = env.results else { panic!() };
    assert!((1.4..=1.6).contains(&p.q_hat), "q_hat = {}", p.q_hat);
}

fn annotation(svg: &str) -> f64 {
    let start = svg.find(r#"id="annotation""#).expect("annotation present");
    let text = &svg[start..];
    let open = text.find('>').unwrap() + 1;
    let close = text.find("</text>").unwrap();
    let label = &text[open..close];
    label.strip_prefix("q_hat = ").expect("q_hat label").parse().unwrap()
}

#[test]
fn profile_svg_annotation_equals_json_slope() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["3", "4"] {
        let o = run_in(dir.path(), &["profile", "--n", n, "--format", "json,svg"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let env = read_envelope(&dir.path().join(format!("profile_n{n}.json")));
        let Some(Payload::Profile(p)) = env.results else { panic!() };
        let svg = std::fs::read_to_string(dir.path().join(format!("profile_n{n}.svg"))).unwrap();
        assert_eq!(annotation(&svg), p.q_hat);
        assert!(svg.starts_with("<svg") && svg.contains("<style>"));
        assert!(!svg.contains("href"), "self-contained");
    }
}

#[test]
fn lattice_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["lattice", "--n", "2", "--k", "4", "--format", "csv,svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(listing(dir.path()), vec!["gaps.csv", "gaps.svg"]);
    let csv = std::fs::read_to_string(dir.path().join("gaps.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,theta_k,gap"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let usage = [
        vec!["poisson", "--tau", "0"],
        vec!["metric", "--theta", "0.5"],
        vec!["mellin", "--n", "2", "--s", "0.5"],
        vec!["hy", "--p", "1"],
        vec!["closure", "--a", "0"],
        vec!["profile", "--bogus", "1"],
        vec!["frobnicate"],
    ];
    for args in usage {
        let o = run_in(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("error"), "{args:?}");
    }
    assert!(listing(dir.path()).is_empty(), "validation failures compute nothing");

    // too few envelope maxima: numerical failure, diagnostics still written
    let o = run_in(dir.path(), &["profile", "--n", "4", "--xi-max", "1", "--samples", "64"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let env = read_envelope(&dir.path().join("profile_n4.json"));
    assert!(env.results.is_none());
    assert!(env.diagnostics[0].contains("envelope"), "{:?}", env.diagnostics);

    // output directory blocked by a file
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let o = run_in(&blocker, &["theta", "--n", "2", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn repro_closure_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["repro", "--suite", "closure"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    let row = out.lines().find(|l| l.contains("defect n=3 (3, 4, 5)")).expect("n=3 row");
    assert!(row.contains("-3.400000e1") && row.ends_with("PASS"), "{row}");
}

#[test]
fn repro_duality_reports_exponent_rows_and_gates_exit() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["repro", "--suite", "duality", "--format", "json,csv"]);
    let out = stdout(&o);
    for n in ["2", "3", "4"] {
        assert!(out.contains(&format!("q_hat n={n}")), "{out}");
    }
    let env = read_envelope(&dir.path().join("repro_duality.json"));
    let Some(Payload::Repro(r)) = env.results else { panic!() };
    let expected = if r.rows.iter().all(|row| row.passed) { 0 } else { 1 };
    assert_eq!(o.status.code(), Some(expected));
    assert!(dir.path().join("repro_duality.csv").exists());
}

#[test]
fn identical_config_gives_identical_payload() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["repro", "--suite", "metric", "--seed", "11", "--format", "json,csv"];
    run_in(a.path(), &args);
    run_in(b.path(), &args);
    let ea = read_envelope(&a.path().join("repro_metric.json"));
    let eb = read_envelope(&b.path().join("repro_metric.json"));
    assert_eq!(ea.results, eb.results);
    assert_eq!(ea.diagnostics, eb.diagnostics);
    let ca = std::fs::read(a.path().join("repro_metric.csv")).unwrap();
    let cb = std::fs::read(b.path().join("repro_metric.csv")).unwrap();
    assert_eq!(ca, cb);
}

#[test]
fn every_command_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 10] = [
        &["metric", "--n", "3", "--theta", "-2"],
        &["embed", "--n", "3", "--a", "2", "--branch", "above"],
        &["lattice", "--n", "3", "--k", "5"],
        &["closure", "--n", "3", "--a", "6", "--b", "8", "--c", "9"],
        &["theta", "--n", "1.5", "--tau", "0.5"],
        &["poisson", "--n", "1.5"],
        &["jacobi"],
        &["profile", "--n", "2"],
        &["hy", "--n", "4", "--p", "1.5"],
        &["mellin", "--n", "4"],
    ];
    for args in runs {
        let o = run_in(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    }
    let jsons: Vec<PathBuf> = listing(dir.path())
        .into_iter()
        .filter(|n| n.ends_with(".json"))
        .map(|n| dir.path().join(n))
        .collect();
    assert_eq!(jsons.len(), runs.len());
    for path in jsons {
        let text = std::fs::read_to_string(&path).unwrap();
        let env: ReportEnvelope = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&env).unwrap() + "\n", text, "{}", path.display());
        assert!(env.results.is_some());
    }
}

#[test]
fn config_file_and_environment_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 3.0\ntau = 2.0\nformat = [\"json\", \"csv\"]\n").unwrap();
    let env_out = dir.path().join("env-out");
    let o = bin()
        .args(["theta", "--tau", "0.5", "--config"])
        .arg(&cfg)
        .env("DUALITYLAB_OUT", &env_out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(listing(&env_out), vec!["theta_n3_tau0.5.csv", "theta_n3_tau0.5.json"]);
    let env = read_envelope(&env_out.join("theta_n3_tau0.5.json"));
    assert_eq!(env.config_echo.n, 3.0);
    assert_eq!(env.config_echo.parameters.tau, Some(0.5));

    std::fs::write(&cfg, "unknown_key = 1\n").unwrap();
    let o = bin().args(["theta", "--config"]).arg(&cfg).env("DUALITYLAB_OUT", &env_out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

// ---- golden files: frozen JSON layout and CSV columns ----

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Drops fields that legitimately differ between runs.
fn normalized(mut v: Value) -> Value {
    if let Some(obj) = v.as_object_mut() {
        obj.insert("timestamp".into(), Value::String("<timestamp>".into()));
        obj.insert("tool_version".into(), Value::String("<version>".into()));
        if let Some(echo) = obj.get_mut("config_echo").and_then(Value::as_object_mut) {
            echo.insert("output_dir".into(), Value::String("<out>".into()));
        }
    }
    v
}

/// Same shape and keys; numbers equal to 1e−12 relative.
fn assert_matches(actual: &Value, golden: &Value, path: &str) {
    match (actual, golden) {
        (Value::Number(a), Value::Number(g)) => {
            let (a, g) = (a.as_f64().unwrap(), g.as_f64().unwrap());
            assert!((a - g).abs() <= 1e-12 * g.abs().max(1.0), "{path}: {a} vs golden {g}");
        }
        (Value::Object(a), Value::Object(g)) => {
            let ka: Vec<&String> = a.keys().collect();
            let kg: Vec<&String> = g.keys().collect();
            assert_eq!(ka, kg, "{path}: keys differ");
            for (k, gv) in g {
                assert_matches(&a[k], gv, &format!("{path}.{k}"));
            }
        }
        (Value::Array(a), Value::Array(g)) => {
            assert_eq!(a.len(), g.len(), "{path}: length");
            for (i, (av, gv)) in a.iter().zip(g).enumerate() {
                assert_matches(av, gv, &format!("{path}[{i}]"));
            }
        }
        _ => assert_eq!(actual, golden, "{path}"),
    }
}

fn check_golden(produced: &Path, golden_name: &str) {
    let golden_path = golden_dir().join(golden_name);
    let text = std::fs::read_to_string(produced).unwrap();
    if std::env::var_os("DUALITYLAB_BLESS").is_some() {
        let contents = if golden_name.ends_with(".json") {
            let v = normalized(serde_json::from_str(&text).unwrap());
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        } else {
            text.clone()
        };
        std::fs::create_dir_all(golden_dir()).unwrap();
        std::fs::write(&golden_path, contents).unwrap();
    }
    let golden = std::fs::read_to_string(&golden_path)
        .unwrap_or_else(|e| panic!("{}: {e} (set DUALITYLAB_BLESS=1 to create)", golden_path.display()));
    if golden_name.ends_with(".json") {
        let actual = normalized(serde_json::from_str(&text).unwrap());
        assert_matches(&actual, &serde_json::from_str(&golden).unwrap(), golden_name);
    } else {
        let (a, g): (Vec<&str>, Vec<&str>) = (text.lines().collect(), golden.lines().collect());
        assert_eq!(a[0], g[0], "{golden_name}: header");
        assert_eq!(a.len(), g.len(), "{golden_name}: rows");
        for (ra, rg) in a.iter().zip(&g).skip(1) {
            for (fa, fg) in ra.split(',').zip(rg.split(',')) {
                match (fa.parse::<f64>(), fg.parse::<f64>()) {
                    (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{golden_name}: {x} vs {y}"),
                    _ => assert_eq!(fa, fg, "{golden_name}"),
                }
            }
        }
    }
}

#[test]
fn golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["closure", "--n", "2", "--a", "3", "--b", "4", "--c", "5"], "closure_n2_3_4_5.json"),
        (&["poisson", "--n", "3", "--tau", "1"], "poisson_n3_tau1.json"),
        (&["lattice", "--n", "2", "--k", "4", "--format", "json,csv"], "lattice_n2.json"),
        (&["lattice", "--n", "2", "--k", "4", "--format", "json,csv"], "gaps.csv"),
        (&["hy", "--n", "3", "--format", "csv"], "hy_n3.csv"),
        (&["mellin", "--n", "2", "--format", "csv"], "mellin_n2.csv"),
    ];
    for (args, name) in cases {
        let o = run_in(dir.path(), args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        check_golden(&dir.path().join(name), name);
    }
}
