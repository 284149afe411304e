//! Orchestration on top of single runs: the full simulate pipeline,
//! refinement and domain-doubling studies, and parameter sweeps.

use std::fmt;

use rayon::prelude::*;

use crate::appendix::{run_appendix_checks, AppendixReport};
use crate::config::RunConfig;
use crate::energetics::{antiderivative_residual, energy_balance_residual};
use crate::error::{Error, Result};
use crate::evolution::{run, RunOptions, SemidiscreteSystem, TraceSeries};
use crate::fit::{default_window, fit_decay, DecayFit};
use crate::grid::BoundaryRule;
use crate::ledger::{compute_constants, verify_inequalities, ConstantLedger, VerificationReport};
use crate::output::fmt_num;
use crate::potential::{PotentialFamily, PotentialSpec, ValidationResult};

/// Random phase-space states used by the operator checks.
pub const APPENDIX_SAMPLES: usize = 100;
pub const APPENDIX_SEED: u64 = 2024;

/// Everything produced by one configured run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: TraceSeries,
    pub validation: ValidationResult,
    pub ledger: Option<ConstantLedger>,
    pub verification: Option<VerificationReport>,
    pub balance: f64,
    pub antiderivative: Option<f64>,
    pub fit: Option<DecayFit>,
    /// Why no fit was produced, when it was not.
    pub fit_note: Option<String>,
    pub appendix: Option<AppendixReport>,
}

impl RunOutcome {
    pub fn all_passed(&self) -> bool {
        self.verification.as_ref().is_none_or(VerificationReport::all_passed)
    }
}

/// Fit window from the configuration, falling back to the default policy.
pub fn fit_window(config: &RunConfig) -> Option<(f64, f64)> {
    let default = default_window(&config.potential, config.domain.half_width, config.time.t_end);
    match (config.fit.t_min, config.fit.t_max) {
        (Some(a), Some(b)) => Some((a, b)),
        (a, b) => {
            let (da, db) = default.unwrap_or((crate::fit::DEFAULT_FIT_START, config.time.t_end));
            let w = (a.unwrap_or(da), b.unwrap_or(db));
            (w.0 < w.1).then_some(w)
        }
    }
}

/// Runs the configured problem, then the ledger and inequality suite (when
/// the potential is admissible), the diagnostics and the decay fit.
pub fn run_case(config: &RunConfig, with_appendix: bool) -> Result<RunOutcome> {
    config.check()?;
    let grid = config.grid()?;
    let validation = config.potential.validate(&grid);
    let system = SemidiscreteSystem::assemble(&grid, &config.potential)?;
    let (u0, u1) = config.data.sample(&grid);
    let options = RunOptions {
        dt: config.time.dt,
        steps: config.steps(),
        sample_every: config.time.sample_every,
        antiderivative: config.flags.antiderivative_check,
        store_states: config.flags.store_states,
    };
    let mut trace = run(&system, &u0, &u1, options)?;
    trace.meta.data = Some(config.data);
    let mut warnings = config.warnings();
    warnings.append(&mut trace.meta.warnings);
    trace.meta.warnings = warnings;

    let (ledger, verification) = if validation.ok {
        let ledger = compute_constants(&grid, &config.potential, &u0, &u1)?;
        let report = verify_inequalities(&trace, &ledger)?;
        (Some(ledger), Some(report))
    } else {
        (None, None)
    };
    let balance = energy_balance_residual(&trace)?;
    let antiderivative = if config.flags.antiderivative_check {
        Some(antiderivative_residual(&trace, &system, &u0, &u1)?)
    } else {
        None
    };
    let (fit, fit_note) = match fit_window(config) {
        Some((a, b)) => match fit_decay(&trace.energy_series(), a, b) {
            Ok(fit) => (Some(fit), None),
            Err(e) => (None, Some(format!("no fit: {e}"))),
        },
        None => (None, Some("no fit: default window [10, min(T, 0.2/V(L))] is empty".into())),
    };
    let appendix = if with_appendix || config.flags.appendix_checks {
        Some(run_appendix_checks(&system, APPENDIX_SAMPLES, APPENDIX_SEED)?)
    } else {
        None
    };
    Ok(RunOutcome {
        trace,
        validation,
        ledger,
        verification,
        balance,
        antiderivative,
        fit,
        fit_note,
        appendix,
    })
}

/// Accepted ranges of the refinement study.
pub const SPATIAL_ORDER: (f64, f64) = (1.8, 2.2);
pub const TEMPORAL_ORDER: (f64, f64) = (3.5, 4.5);
pub const DOMAIN_TOLERANCE: f64 = 1e-4;
/// Differences of `E(T)` below this fraction of `E(T)` are roundoff.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

/// `E(T)` at three successively halved resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub params: [f64; 3],
    pub values: [f64; 3],
    /// `log2 |E₀ - E₁| / |E₁ - E₂|`
    pub order: f64,
    pub roundoff_floor: bool,
}

impl Refinement {
    fn from_values(params: [f64; 3], values: [f64; 3]) -> Self {
        let d1 = (values[0] - values[1]).abs();
        let d2 = (values[1] - values[2]).abs();
        let floor = ROUNDOFF_FLOOR * values[2].abs().max(1e-300);
        Refinement {
            params,
            values,
            order: (d1 / d2).log2(),
            roundoff_floor: d2 <= floor || d1 <= floor,
        }
    }

    fn within(&self, range: (f64, f64)) -> bool {
        self.order >= range.0 && self.order <= range.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceStudy {
    pub spatial: Refinement,
    pub temporal: Refinement,
    pub domain: (f64, f64),
    pub domain_values: (f64, f64),
    /// `|E_2L(T) - E_L(T)| / |E_L(T)|`
    pub domain_change: f64,
}

impl ConvergenceStudy {
    pub fn spatial_ok(&self) -> bool {
        self.spatial.within(SPATIAL_ORDER)
    }

    pub fn temporal_ok(&self) -> bool {
        self.temporal.within(TEMPORAL_ORDER) || self.temporal.roundoff_floor
    }

    pub fn domain_ok(&self) -> bool {
        self.domain_change <= DOMAIN_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.spatial_ok() && self.temporal_ok() && self.domain_ok()
    }
}

impl fmt::Display for ConvergenceStudy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(f, "{:<10} {:>12} {:>26}", "study", "param", "E(T)")?;
        for (name, r) in [("space", &self.spatial), ("time", &self.temporal)] {
            for (p, v) in r.params.iter().zip(&r.values) {
                writeln!(f, "{name:<10} {p:>12.6} {:>26}", fmt_num(*v))?;
            }
        }
        writeln!(f, "{:<10} {:>12.6} {:>26}", "domain", self.domain.0, fmt_num(self.domain_values.0))?;
        writeln!(f, "{:<10} {:>12.6} {:>26}", "domain", self.domain.1, fmt_num(self.domain_values.1))?;
        writeln!(
            f,
            "spatial order  {:.4}{}  {}",
            self.spatial.order,
            if self.spatial.roundoff_floor { " (roundoff floor)" } else { "" },
            mark(self.spatial_ok())
        )?;
        writeln!(
            f,
            "temporal order {:.4}{}  {}",
            self.temporal.order,
            if self.temporal.roundoff_floor { " (roundoff floor)" } else { "" },
            mark(self.temporal_ok())
        )?;
        write!(
            f,
            "domain change  {:.3e}  {}",
            self.domain_change,
            mark(self.domain_ok())
        )
    }
}

/// Node count giving half the spacing on the same domain.
fn refined_nodes(n: usize, bc: BoundaryRule) -> usize {
    match bc {
        BoundaryRule::Dirichlet => 2 * (n + 1) - 1,
        BoundaryRule::Periodic => 2 * n,
    }
}

fn final_energy(config: &RunConfig) -> Result<f64> {
    let grid = config.grid()?;
    let system = SemidiscreteSystem::assemble(&grid, &config.potential)?;
    let (u0, u1) = config.data.sample(&grid);
    let mut options = RunOptions::new(config.time.dt, config.time.t_end);
    options.sample_every = options.steps;
    let trace = run(&system, &u0, &u1, options)?;
    Ok(trace.last().expect("final sample").energy.energy)
}

/// Runs `(h, h/2, h/4)` at fixed `dt`, `(dt, dt/2, dt/4)` at fixed `h`, and
/// `(L, 2L)` at fixed `h` and `dt`; all seven runs proceed in parallel.
pub fn converge(config: &RunConfig) -> Result<ConvergenceStudy> {
    config.check()?;
    let base = {
        let mut c = config.clone();
        c.flags = Default::default();
        c
    };
    let bc = base.domain.bc;
    let mut cases = Vec::new();
    let mut n = base.domain.n;
    for _ in 0..3 {
        let mut c = base.clone();
        c.domain.n = n;
        cases.push(c);
        n = refined_nodes(n, bc);
    }
    for k in 1..3 {
        let mut c = base.clone();
        c.time.dt = base.time.dt / f64::from(1 << k);
        cases.push(c);
    }
    let mut doubled = base.clone();
    doubled.domain.half_width = 2.0 * base.domain.half_width;
    doubled.domain.n = refined_nodes(base.domain.n, bc);
    cases.push(doubled);

    let energies: Vec<f64> = cases.par_iter().map(final_energy).collect::<Result<_>>()?;
    let h = base.grid()?.spacing();
    let dt = base.time.dt;
    let spatial = Refinement::from_values([h, h / 2.0, h / 4.0], [energies[0], energies[1], energies[2]]);
    let temporal = Refinement::from_values([dt, dt / 2.0, dt / 4.0], [energies[0], energies[3], energies[4]]);
    let (el, e2l) = (energies[0], energies[5]);
    Ok(ConvergenceStudy {
        spatial,
        temporal,
        domain: (base.domain.half_width, 2.0 * base.domain.half_width),
        domain_values: (el, e2l),
        domain_change: (e2l - el).abs() / el.abs().max(1e-300),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Completed,
    /// Potential failed validation; the run was skipped.
    Rejected,
    /// The run itself failed (e.g. blowup).
    Failed,
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Completed => "completed",
            RowStatus::Rejected => "rejected",
            RowStatus::Failed => "failed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub baseline: bool,
    pub family: PotentialFamily,
    pub v0: f64,
    pub alpha: f64,
    pub amplitude: f64,
    pub status: RowStatus,
    pub e_final: Option<f64>,
    pub slope: Option<f64>,
    pub passed: Option<usize>,
    pub message: String,
}

/// Header of the aggregate sweep CSV.
pub const SWEEP_COLUMNS: [&str; 11] = [
    "index", "baseline", "family", "V0", "alpha", "amplitude", "status", "E_T", "slope", "passed", "message",
];

impl SweepRow {
    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map_or_else(String::new, fmt_num);
        vec![
            self.index.to_string(),
            self.baseline.to_string(),
            self.family.to_string(),
            fmt_num(self.v0),
            fmt_num(self.alpha),
            fmt_num(self.amplitude),
            self.status.to_string(),
            opt(self.e_final),
            opt(self.slope),
            self.passed.map_or_else(String::new, |p| p.to_string()),
            self.message.clone(),
        ]
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.into_inner()
        .map_err(|e| Error::Internal(format!("flushing CSV buffer: {e}")))
}

fn data_amplitude(config: &RunConfig) -> f64 {
    use crate::data::Displacement;
    match config.data.displacement {
        Displacement::Bump { amplitude, .. }
        | Displacement::Gaussian { amplitude, .. }
        | Displacement::FourierMode { amplitude, .. } => amplitude,
        Displacement::Zero => 0.0,
    }
}

/// Expands the sweep lists (an empty list keeps the base value) in
/// `V0`-major order, followed by the `V ≡ 0` baseline when requested.
pub fn sweep_cases(config: &RunConfig) -> Vec<(bool, RunConfig)> {
    let base_amp = data_amplitude(config);
    let or_base = |list: &[f64], base: f64| if list.is_empty() { vec![base] } else { list.to_vec() };
    let v0s = or_base(&config.sweep.v0, config.potential.v0());
    let alphas = or_base(&config.sweep.alpha, config.potential.alpha());
    let amps = or_base(&config.sweep.amplitude, base_amp);
    let mut out = Vec::new();
    for &v0 in &v0s {
        for &alpha in &alphas {
            for &amp in &amps {
                let mut c = config.clone();
                c.flags.store_states = false;
                if let Ok(spec) = PotentialSpec::new(config.potential.family(), v0, alpha) {
                    c.potential = spec;
                } else {
                    // keep the raw values visible; validation rejects the row
                    c.potential = PotentialSpec::zero();
                    c.sweep.v0 = vec![v0];
                    c.sweep.alpha = vec![alpha];
                }
                if base_amp != 0.0 {
                    c.data = config.data.scaled(amp / base_amp);
                }
                out.push((false, c));
            }
        }
    }
    if config.sweep.baseline {
        let mut c = config.clone();
        c.flags.store_states = false;
        c.potential = PotentialSpec::zero();
        out.push((true, c));
    }
    out
}

/// Runs every sweep case concurrently; rows come back in sweep order.
pub fn sweep(config: &RunConfig) -> Result<Vec<SweepRow>> {
    config.check()?;
    let window = fit_window(config);
    let cases = sweep_cases(config);
    let rows = cases
        .par_iter()
        .enumerate()
        .map(|(index, (baseline, case))| sweep_row(index, *baseline, case, window))
        .collect();
    Ok(rows)
}

fn sweep_row(index: usize, baseline: bool, case: &RunConfig, window: Option<(f64, f64)>) -> SweepRow {
    let (v0, alpha) = if case.potential.family() == PotentialFamily::Zero && !baseline {
        (case.sweep.v0[0], case.sweep.alpha[0])
    } else {
        (case.potential.v0(), case.potential.alpha())
    };
    let mut row = SweepRow {
        index,
        baseline,
        family: case.potential.family(),
        v0,
        alpha,
        amplitude: data_amplitude(case),
        status: RowStatus::Completed,
        e_final: None,
        slope: None,
        passed: None,
        message: String::new(),
    };
    if !baseline {
        let grid = match case.grid() {
            Ok(g) => g,
            Err(e) => {
                row.status = RowStatus::Failed;
                row.message = e.to_string();
                return row;
            }
        };
        let validation = case.potential.validate(&grid);
        if case.potential.family() == PotentialFamily::Zero || !validation.ok {
            row.status = RowStatus::Rejected;
            row.message = if validation.failures.is_empty() {
                format!("invalid potential parameters V0 = {v0}, alpha = {alpha}")
            } else {
                validation.failures.join("; ")
            };
            return row;
        }
    }
    let mut case = case.clone();
    if let Some((a, b)) = window {
        case.fit.t_min = Some(a);
        case.fit.t_max = Some(b);
    }
    match run_case(&case, false) {
        Ok(outcome) => {
            row.e_final = outcome.trace.last().map(|r| r.energy.energy);
            row.slope = outcome.fit.map(|f| f.slope);
            row.passed = outcome.verification.as_ref().map(VerificationReport::passed);
            if let Some(note) = outcome.fit_note {
                row.message = note;
            } else if baseline {
                row.message = "baseline V = 0; ledger disabled".into();
            }
        }
        Err(e) => {
            row.status = RowStatus::Failed;
            row.message = e.to_string();
        }
    }
    row
}
