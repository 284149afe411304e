use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn dampwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dampwave"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn quick(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "domain.L = 30\n\
         domain.n = 299\n\
         domain.bc = dirichlet\n\
         time.dt = 0.02\n\
         time.T = 15\n\
         time.sample_every = 5\n\
         potential.family = algebraic\n\
         potential.V0 = 0.5\n\
         potential.alpha = 1\n\
         data.family = bump\n\
         data.amplitude = 1\n\
         data.radius = 5\n\
         {extra}\n"
    );
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn validate_exit_codes() {
    let dir = TempDir::new().unwrap();
    let ok = quick(dir.path(), "");
    assert_eq!(code(&dampwave(&["validate", "--config", ok.to_str().unwrap()])), 0);

    let text = fs::read_to_string(&ok).unwrap().replace("V0 = 0.5", "V0 = 2");
    fs::write(&ok, text).unwrap();
    let out = dampwave(&["validate", "--config", ok.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stdout));

    let text = fs::read_to_string(&ok).unwrap().replace("potential.V0 = 2\n", "");
    fs::write(&ok, text).unwrap();
    let out = dampwave(&["validate", "--config", ok.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("potential.V0"));
}

#[test]
fn gaussian_potential_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = quick(dir.path(), "");
    let text = fs::read_to_string(&cfg).unwrap().replace("= algebraic", "= gaussian");
    fs::write(&cfg, text).unwrap();
    assert_eq!(code(&dampwave(&["validate", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&dampwave(&["simulate", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn unknown_key_and_missing_file() {
    let dir = TempDir::new().unwrap();
    let cfg = quick(dir.path(), "potential.V_0 = 1");
    let out = dampwave(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let missing = dir.path().join("absent.cfg");
    assert_eq!(code(&dampwave(&["validate", "--config", missing.to_str().unwrap()])), 5);
}

#[test]
fn simulate_writes_outputs() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("trace.csv");
    let report = dir.path().join("report.txt");
    let svg = dir.path().join("energy.svg");
    let checks = dir.path().join("checks.csv");
    let extra = format!(
        "output.csv_path = {}\noutput.report_path = {}\noutput.svg_path = {}\noutput.verification_csv_path = {}",
        csv.display(),
        report.display(),
        svg.display(),
        checks.display()
    );
    let cfg = quick(dir.path(), &extra);
    let out = dampwave(&["simulate", "--config", cfg.to_str().unwrap(), "--with-appendix-checks"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 0, "{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("== inequalities =="));
    assert!(stdout.contains("== operator checks =="));

    let trace = fs::read_to_string(&csv).unwrap();
    let mut lines = trace.lines();
    assert!(lines.next().unwrap().starts_with("t,"));
    assert_eq!(lines.count(), 15 * 50 / 5 + 1);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert_eq!(fs::read_to_string(&checks).unwrap().lines().count(), 16);
    assert!(report.exists());

    let out = dampwave(&["fit", "--config", cfg.to_str().unwrap(), "--t-min", "5", "--t-max", "15"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("slope"));
}

#[test]
fn zero_data_gives_zero_energy() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("trace.csv");
    let cfg = quick(dir.path(), &format!("output.csv_path = {}", csv.display()));
    let text = fs::read_to_string(&cfg).unwrap().replace("data.family = bump", "data.family = zero");
    fs::write(&cfg, text).unwrap();
    let out = dampwave(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));

    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let col = reader.headers().unwrap().iter().position(|h| h == "E").unwrap();
    for rec in reader.records() {
        assert_eq!(rec.unwrap()[col].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn fit_without_trace_is_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = quick(dir.path(), "");
    assert_eq!(code(&dampwave(&["fit", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn sweep_rows_in_order() {
    let dir = TempDir::new().unwrap();
    let out_csv = dir.path().join("sweep.csv");
    let extra = format!(
        "sweep.V0 = 0.25, 0.5, 3\nsweep.alpha = 1\nsweep.baseline = true\noutput.sweep_csv_path = {}",
        out_csv.display()
    );
    let cfg = quick(dir.path(), &extra);
    let text = fs::read_to_string(&cfg).unwrap().replace("time.T = 15", "time.T = 4");
    fs::write(&cfg, text).unwrap();
    let out = dampwave(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let mut reader = csv::Reader::from_path(&out_csv).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
    }
    let text = fs::read_to_string(&out_csv).unwrap();
    assert!(text.contains("rejected"));
}

#[test]
fn converge_reports_orders() {
    let dir = TempDir::new().unwrap();
    let cfg = quick(dir.path(), "");
    let text = fs::read_to_string(&cfg)
        .unwrap()
        .replace("domain.n = 299", "domain.n = 199")
        .replace("time.dt = 0.02", "time.dt = 0.05")
        .replace("time.T = 15", "time.T = 5");
    fs::write(&cfg, text).unwrap();
    let out = dampwave(&["converge", "--config", cfg.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(matches!(code(&out), 0 | 3), "{stdout}");
    assert!(stdout.contains("spatial"));
    assert!(stdout.contains("temporal"));
}
