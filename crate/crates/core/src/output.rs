//! CSV, text-report and SVG emission. All numbers are written with 17
//! significant digits so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::appendix::AppendixReport;
use crate::error::{Error, Result};
use crate::evolution::{Accumulator, TraceSeries};
use crate::fit::DecayFit;
use crate::ledger::{ConstantLedger, VerificationReport, READINGS};

/// Trace CSV header, in column order.
pub const TRACE_COLUMNS: [&str; 23] = [
    "t",
    "E",
    "Estar",
    "l2u",
    "l2v",
    "gradu",
    "gradv",
    "lapu",
    "lapv",
    "wpot",
    "acc_us",
    "acc_grad_us",
    "acc_lap_us",
    "acc_u",
    "acc_grad_u",
    "acc_wpot_u",
    "acc_lap_u",
    "acc_Estar",
    "acc_w_us",
    "acc_w_grad_us",
    "acc_w_grad_u",
    "acc_w_wpot_u",
    "e_balance_residual",
];

/// `{:.16e}`: 17 significant digits, round-trips every `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Internal(format!("flushing CSV buffer: {e}")))
}

pub fn trace_csv(trace: &TraceSeries) -> Result<Vec<u8>> {
    let rows = trace.records.iter().map(|r| {
        let e = &r.energy;
        let mut row = Vec::with_capacity(TRACE_COLUMNS.len());
        for x in [e.t, e.energy, e.estar, e.l2u, e.l2v, e.gradu, e.gradv, e.lapu, e.lapv, e.wpot] {
            row.push(fmt_num(x));
        }
        for a in Accumulator::ALL {
            row.push(fmt_num(r.acc[a]));
        }
        row.push(fmt_num(r.e_balance_residual));
        row
    });
    csv_bytes(&TRACE_COLUMNS, rows)
}

pub fn write_trace_csv(path: &Path, trace: &TraceSeries) -> Result<()> {
    write_file(path, &trace_csv(trace)?)
}

/// Reads the `(t, E)` columns of a trace CSV.
pub fn read_energy_series(path: &Path) -> Result<Vec<(f64, f64)>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Config(format!("{}: no '{name}' column", path.display())))
    };
    let (ti, ei) = (column("t")?, column("E")?);
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let parse = |i: usize| -> Result<f64> {
            let cell = record.get(i).unwrap_or("");
            cell.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: row + 2,
                message: format!("invalid number '{cell}'"),
            })
        };
        out.push((parse(ti)?, parse(ei)?));
    }
    Ok(out)
}

pub fn verification_csv(report: &VerificationReport) -> Result<Vec<u8>> {
    let rows = report.entries.iter().map(|e| {
        vec![
            e.id.as_str().to_string(),
            fmt_num(e.t_checked),
            fmt_num(e.lhs),
            fmt_num(e.rhs),
            fmt_num(e.margin),
            e.pass.to_string(),
        ]
    });
    csv_bytes(&["id", "t_checked", "lhs", "rhs", "margin", "pass"], rows)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    write_file(path, bytes)
}

/// Everything that goes into the text report of one run.
#[derive(Debug, Clone, Copy)]
pub struct ReportParts<'a> {
    pub trace: &'a TraceSeries,
    pub ledger: Option<&'a ConstantLedger>,
    pub verification: Option<&'a VerificationReport>,
    pub balance: f64,
    pub antiderivative: Option<f64>,
    pub fit: Option<&'a DecayFit>,
    pub fit_note: Option<&'a str>,
    pub appendix: Option<&'a AppendixReport>,
}

/// Metadata, constants block, inequality table, fit results, in that order.
pub fn render_report(parts: &ReportParts) -> String {
    let meta = &parts.trace.meta;
    let mut s = String::new();
    let _ = writeln!(s, "== run ==");
    let _ = writeln!(
        s,
        "grid        L = {}, n = {}, h = {}, bc = {}",
        meta.grid.half_width(),
        meta.grid.len(),
        meta.grid.spacing(),
        meta.grid.boundary()
    );
    let p = &meta.potential;
    let _ = writeln!(s, "potential   {} V0 = {} alpha = {}", p.family(), p.v0(), p.alpha());
    if let Some(data) = &meta.data {
        let _ = writeln!(s, "data        {data}");
    }
    let _ = writeln!(
        s,
        "time        dt = {}, steps = {}, T = {}, sample_every = {}",
        meta.dt,
        meta.steps,
        parts.trace.last().map_or(0.0, |r| r.t()),
        meta.sample_every
    );
    let _ = writeln!(s, "samples     {}", parts.trace.records.len());
    let _ = writeln!(s, "balance     {:.6e}", parts.balance);
    if let Some(r) = parts.antiderivative {
        let _ = writeln!(s, "antideriv   {r:.6e}");
    }
    for w in &meta.warnings {
        let _ = writeln!(s, "warning     {w}");
    }

    let _ = writeln!(s, "\n== constants ==");
    match parts.ledger {
        Some(ledger) => {
            for note in READINGS {
                let _ = writeln!(s, "# {note}");
            }
            let _ = writeln!(s, "{ledger}");
        }
        None => {
            let _ = writeln!(s, "(ledger disabled: potential does not satisfy the hypotheses)");
        }
    }

    let _ = writeln!(s, "\n== inequalities ==");
    match parts.verification {
        Some(report) => {
            let _ = writeln!(s, "{report}");
            let _ = writeln!(
                s,
                "passed {}/{} (relative slack {:e})",
                report.passed(),
                report.entries.len(),
                report.tolerance
            );
        }
        None => {
            let _ = writeln!(s, "(not evaluated)");
        }
    }

    let _ = writeln!(s, "\n== decay fit ==");
    if let Some(fit) = parts.fit {
        let _ = writeln!(s, "{fit}");
    }
    if let Some(note) = parts.fit_note {
        let _ = writeln!(s, "{note}");
    }

    if let Some(app) = parts.appendix {
        let _ = writeln!(s, "\n== operator checks ==");
        let _ = writeln!(s, "{app}");
    }
    s
}

struct Panel {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

impl Panel {
    fn polyline(&self, pts: &[(f64, f64)], bounds: (f64, f64, f64, f64), style: &str) -> String {
        let (xmin, xmax, ymin, ymax) = bounds;
        let sx = |x: f64| self.x0 + (x - xmin) / (xmax - xmin).max(1e-300) * self.w;
        let sy = |y: f64| self.y0 + self.h - (y - ymin) / (ymax - ymin).max(1e-300) * self.h;
        let mut d = String::new();
        for (x, y) in pts {
            let _ = write!(d, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        format!("<polyline fill=\"none\" {style} points=\"{}\"/>\n", d.trim_end())
    }

    fn frame(&self, title: &str, xlabel: &str, bounds: (f64, f64, f64, f64)) -> String {
        let (xmin, xmax, ymin, ymax) = bounds;
        let mut s = format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
            self.x0, self.y0, self.w, self.h
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{title}</text>",
            self.x0 + self.w / 2.0,
            self.y0 - 10.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{xlabel}</text>",
            self.x0 + self.w / 2.0,
            self.y0 + self.h + 32.0
        );
        let tick = |v: f64| format!("{v:.3}");
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\">{}</text>",
            self.x0,
            self.y0 + self.h + 14.0,
            tick(xmin)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>",
            self.x0 + self.w,
            self.y0 + self.h + 14.0,
            tick(xmax)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>",
            self.x0 - 4.0,
            self.y0 + self.h,
            tick(ymin)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\">{}</text>",
            self.x0 - 4.0,
            self.y0 + 10.0,
            tick(ymax)
        );
        s
    }
}

fn bounds(pts: &[(f64, f64)]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        b.0 = b.0.min(x);
        b.1 = b.1.max(x);
        b.2 = b.2.min(y);
        b.3 = b.3.max(y);
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    if b.3 <= b.2 {
        b.3 = b.2 + 1.0;
    }
    b
}

/// Two panels: `log E` against `log(1+t)` with the fitted line, and
/// `(1+t)² E` against `t`.
pub fn render_svg(trace: &TraceSeries, fit: Option<&DecayFit>) -> String {
    let loglog: Vec<(f64, f64)> = trace
        .records
        .iter()
        .filter(|r| r.energy.energy > 0.0)
        .map(|r| ((1.0 + r.t()).ln(), r.energy.energy.ln()))
        .collect();
    let weighted: Vec<(f64, f64)> = trace
        .records
        .iter()
        .map(|r| (r.t(), (1.0 + r.t()).powi(2) * r.energy.energy))
        .collect();
    let left = Panel {
        x0: 70.0,
        y0: 40.0,
        w: 380.0,
        h: 300.0,
    };
    let right = Panel {
        x0: 560.0,
        y0: 40.0,
        w: 380.0,
        h: 300.0,
    };
    let mut s = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"400\" viewBox=\"0 0 1000 400\">\n\
         <rect width=\"1000\" height=\"400\" fill=\"white\"/>\n",
    );
    let lb = bounds(&loglog);
    s += &left.frame("log E vs log(1+t)", "log(1+t)", lb);
    s += &left.polyline(&loglog, lb, "stroke=\"#1f77b4\" stroke-width=\"1.5\"");
    if let Some(fit) = fit {
        let xa = (1.0 + fit.t_min).ln();
        let xb = (1.0 + fit.t_max).ln();
        let line = [(xa, fit.intercept + fit.slope * xa), (xb, fit.intercept + fit.slope * xb)];
        s += &left.polyline(&line, lb, "stroke=\"#d62728\" stroke-dasharray=\"6 4\" stroke-width=\"1.5\"");
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#d62728\">slope {:.4}</text>",
            left.x0 + 10.0,
            left.y0 + left.h - 10.0,
            fit.slope
        );
    }
    let rb = bounds(&weighted);
    s += &right.frame("(1+t)^2 E vs t", "t", rb);
    s += &right.polyline(&weighted, rb, "stroke=\"#2ca02c\" stroke-width=\"1.5\"");
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::InitialData;
    use crate::evolution::{run, RunOptions, SemidiscreteSystem};
    use crate::grid::{BoundaryRule, Grid1D};
    use crate::potential::PotentialSpec;

    fn small_trace() -> TraceSeries {
        let grid = Grid1D::new(15.0, 149, BoundaryRule::Dirichlet).unwrap();
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::algebraic(0.5, 1.0).unwrap()).unwrap();
        let (u0, u1) = InitialData::bump(1.0, 5.0).sample(&grid);
        run(&sys, &u0, &u1, RunOptions::new(0.1, 3.0).sample_every(2)).unwrap()
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn trace_csv_layout_and_determinism() {
        let a = trace_csv(&small_trace()).unwrap();
        let b = trace_csv(&small_trace()).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), TRACE_COLUMNS.join(","));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.split(',').count() == 23));
    }

    #[test]
    fn energy_series_round_trip() {
        let trace = small_trace();
        let dir = std::env::temp_dir().join(format!("dampwave-out-{}", std::process::id()));
        let path = dir.join("trace.csv");
        write_trace_csv(&path, &trace).unwrap();
        let series = read_energy_series(&path).unwrap();
        assert_eq!(series, trace.energy_series());
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn svg_is_self_contained() {
        let trace = small_trace();
        let svg = render_svg(&trace, None);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn report_sections_in_order() {
        let trace = small_trace();
        let text = render_report(&ReportParts {
            trace: &trace,
            ledger: None,
            verification: None,
            balance: 0.0,
            antiderivative: None,
            fit: None,
            fit_note: Some("window too short"),
            appendix: None,
        });
        let a = text.find("== constants ==").unwrap();
        let b = text.find("== inequalities ==").unwrap();
        let c = text.find("== decay fit ==").unwrap();
        assert!(a < b && b < c);
        assert!(text.contains("window too short"));
    }
}
