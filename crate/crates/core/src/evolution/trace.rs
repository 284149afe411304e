use crate::config::RunConfig;
use crate::data::InitialData;
use crate::energetics::{balance_defect, EnergyRecord};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::potential::PotentialSpec;

use super::state::{Accumulator, Accumulators, StateVector};
use super::stepper::Integrator;
use super::system::SemidiscreteSystem;

/// Cheap summary of the initial data, used to tie a trace to the ledger
/// computed from the same data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataFingerprint {
    pub l2_u0: f64,
    pub l2_u1: f64,
    pub grad_u0: f64,
    pub grad_u1: f64,
    /// `h Σ x u0`
    pub moment_u0: f64,
}

impl DataFingerprint {
    pub fn of(grid: &Grid1D, u0: &Field, u1: &Field) -> Result<Self> {
        let n0 = grid.norms(u0)?;
        let n1 = grid.norms(u1)?;
        let x = Field::new(grid.nodes().to_vec());
        Ok(DataFingerprint {
            l2_u0: n0.l2_sq,
            l2_u1: n1.l2_sq,
            grad_u0: n0.grad_sq,
            grad_u1: n1.grad_sq,
            moment_u0: grid.inner(&x, u0)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceMeta {
    pub grid: Grid1D,
    pub potential: PotentialSpec,
    pub data: Option<InitialData>,
    pub fingerprint: DataFingerprint,
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    pub antiderivative: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub energy: EnergyRecord,
    pub acc: Accumulators,
    /// `|E(t) + ∫₀ᵗ‖u_s‖² - E(0)| / E(0)`
    pub e_balance_residual: f64,
}

impl TraceRecord {
    pub fn t(&self) -> f64 {
        self.energy.t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub w: Option<Field>,
}

/// Sampled history of one run. Sample 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSeries {
    pub meta: TraceMeta,
    pub records: Vec<TraceRecord>,
    /// Full states at the sample times, kept when states are stored or the
    /// antiderivative check is enabled.
    pub snapshots: Vec<Snapshot>,
}

impl TraceSeries {
    pub fn initial_energy(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.energy.energy)
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// `(t, E)` pairs, e.g. for decay fitting.
    pub fn energy_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t(), r.energy.energy)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub dt: f64,
    pub steps: usize,
    pub sample_every: usize,
    /// Carry `w = ∫ u` and store snapshots for the residual check.
    pub antiderivative: bool,
    pub store_states: bool,
}

impl RunOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        RunOptions {
            dt,
            steps: (t_end / dt).round().max(1.0) as usize,
            sample_every: 1,
            antiderivative: false,
            store_states: false,
        }
    }

    pub fn sample_every(mut self, k: usize) -> Self {
        self.sample_every = k;
        self
    }

    pub fn antiderivative(mut self, on: bool) -> Self {
        self.antiderivative = on;
        self
    }

    pub fn store_states(mut self, on: bool) -> Self {
        self.store_states = on;
        self
    }
}

/// Integrates from `(u0, u1)` for `options.steps` steps, sampling every
/// `options.sample_every` steps and always at the final step.
pub fn run(system: &SemidiscreteSystem, u0: &Field, u1: &Field, options: RunOptions) -> Result<TraceSeries> {
    let grid = system.grid();
    grid.check(u0)?;
    grid.check(u1)?;
    if options.sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }
    if !(options.dt.is_finite() && options.dt > 0.0) {
        return Err(Error::Config(format!("time step must be positive, got {}", options.dt)));
    }
    let mut state = StateVector::initial(u0.clone(), u1.clone());
    if options.antiderivative {
        state = state.with_antiderivative();
    }
    let keep_states = options.antiderivative || options.store_states;

    let mut records = Vec::with_capacity(options.steps / options.sample_every + 2);
    let mut snapshots = Vec::new();
    let e0 = EnergyRecord::of_state(system, 0.0, u0, u1)?.energy;
    let mut sample = |state: &StateVector, records: &mut Vec<TraceRecord>| -> Result<()> {
        let energy = EnergyRecord::of_state(system, state.t, &state.u, &state.v)?;
        records.push(TraceRecord {
            energy,
            acc: state.acc,
            e_balance_residual: balance_defect(energy.energy, state.acc[Accumulator::Us], e0),
        });
        if keep_states {
            snapshots.push(Snapshot {
                t: state.t,
                u: state.u.clone(),
                v: state.v.clone(),
                w: state.w.clone(),
            });
        }
        Ok(())
    };
    sample(&state, &mut records)?;

    let mut integrator = Integrator::new(system);
    for step in 1..=options.steps {
        integrator.step(&mut state, options.dt)?;
        // pin the clock to k·dt so sample times do not drift
        state.t = step as f64 * options.dt;
        if step % options.sample_every == 0 || step == options.steps {
            sample(&state, &mut records)?;
        }
    }

    let mut warnings = Vec::new();
    if let Some(msg) = energy_monotonicity_warning(&records) {
        warnings.push(msg);
    }
    Ok(TraceSeries {
        meta: TraceMeta {
            grid: grid.clone(),
            potential: *system.potential(),
            data: None,
            fingerprint: DataFingerprint::of(grid, u0, u1)?,
            dt: options.dt,
            steps: options.steps,
            sample_every: options.sample_every,
            antiderivative: options.antiderivative,
            warnings,
        },
        records,
        snapshots,
    })
}

/// `E` may only grow between samples by the energy-balance defect.
fn energy_monotonicity_warning(records: &[TraceRecord]) -> Option<String> {
    let e0 = records.first()?.energy.energy;
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let slack = (a.e_balance_residual + b.e_balance_residual) * e0.max(1e-300)
            + 4.0 * f64::EPSILON * a.energy.energy;
        if b.energy.energy - a.energy.energy > slack {
            return Some(format!(
                "energy increased from {:e} at t = {} to {:e} at t = {}",
                a.energy.energy,
                a.t(),
                b.energy.energy,
                b.t()
            ));
        }
    }
    None
}

/// Samples the configured data and runs the configured problem.
pub fn simulate(config: &RunConfig) -> Result<TraceSeries> {
    config.check()?;
    let grid = config.grid()?;
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
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::oracle::{discrete_symbol, fourier_mode_oracle};
    use crate::grid::BoundaryRule;

    fn small_system() -> SemidiscreteSystem {
        let grid = Grid1D::new(20.0, 199, BoundaryRule::Dirichlet).unwrap();
        SemidiscreteSystem::assemble(&grid, &PotentialSpec::algebraic(0.5, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_trace() {
        let sys = small_system();
        let z = sys.grid().zeros();
        let trace = run(&sys, &z, &z, RunOptions::new(0.05, 2.0).sample_every(5)).unwrap();
        assert_eq!(trace.records.len(), 9);
        for r in &trace.records {
            assert_eq!(r.energy.energy, 0.0);
            assert_eq!(r.acc, Accumulators::default());
            assert_eq!(r.e_balance_residual, 0.0);
        }
        assert!(trace.meta.warnings.is_empty());
    }

    #[test]
    fn samples_include_final_step() {
        let sys = small_system();
        let (u0, u1) = InitialData::bump(1.0, 5.0).sample(sys.grid());
        let trace = run(&sys, &u0, &u1, RunOptions::new(0.1, 1.05).sample_every(4)).unwrap();
        let times: Vec<f64> = trace.records.iter().map(TraceRecord::t).collect();
        assert_eq!(times.len(), 4);
        assert!((times[3] - 1.1).abs() < 1e-15);
        assert!(times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn energy_decreases_and_balances() {
        let sys = small_system();
        let (u0, u1) = InitialData::bump(1.0, 5.0).sample(sys.grid());
        let trace = run(&sys, &u0, &u1, RunOptions::new(0.01, 5.0).sample_every(10)).unwrap();
        assert!(trace.meta.warnings.is_empty(), "{:?}", trace.meta.warnings);
        let res = crate::energetics::energy_balance_residual(&trace).unwrap();
        assert!(res < 1e-8, "{res}");
        let e: Vec<f64> = trace.records.iter().map(|r| r.energy.energy).collect();
        assert!(e.last().unwrap() < &e[0]);
        for r in &trace.records {
            for a in Accumulator::ALL {
                assert!(r.acc[a] >= 0.0);
            }
        }
        for pair in trace.records.windows(2) {
            for a in Accumulator::ALL {
                assert!(pair[1].acc[a] >= pair[0].acc[a]);
            }
        }
    }

    #[test]
    fn residual_shrinks_like_fourth_order() {
        let sys = small_system();
        let (u0, u1) = InitialData::bump(1.0, 5.0).sample(sys.grid());
        let residual = |dt: f64| {
            let trace = run(&sys, &u0, &u1, RunOptions::new(dt, 4.0).sample_every(1)).unwrap();
            crate::energetics::energy_balance_residual(&trace).unwrap()
        };
        let ratio = residual(0.2) / residual(0.1);
        assert!((8.0..=32.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn linear_in_data() {
        let sys = small_system();
        let data = InitialData::bump(1.0, 5.0);
        let (u0, u1) = data.sample(sys.grid());
        let (v0, v1) = data.scaled(2.0).sample(sys.grid());
        let opts = RunOptions::new(0.05, 3.0).sample_every(20).store_states(true);
        let a = run(&sys, &u0, &u1, opts).unwrap();
        let b = run(&sys, &v0, &v1, opts).unwrap();
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            let diff = (&sa.u.scaled(2.0) - &sb.u).max_abs();
            assert!(diff <= 1e-12 * sb.u.max_abs());
        }
    }

    #[test]
    fn even_data_stays_even() {
        let sys = small_system();
        let (u0, u1) = InitialData::bump(1.0, 5.0).sample(sys.grid());
        let trace = run(&sys, &u0, &u1, RunOptions::new(0.05, 3.0).sample_every(20).store_states(true)).unwrap();
        for s in &trace.snapshots {
            let u = s.u.values();
            let n = u.len();
            for i in 0..n / 2 {
                assert!((u[i] - u[n - 1 - i]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn large_step_on_fine_grid_is_stable() {
        let grid = Grid1D::with_spacing(10.0, 0.01, BoundaryRule::Dirichlet).unwrap();
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::algebraic(0.5, 1.0).unwrap()).unwrap();
        let (u0, u1) = InitialData::bump(1.0, 3.0).sample(&grid);
        let trace = run(&sys, &u0, &u1, RunOptions::new(0.05, 10.0).sample_every(50)).unwrap();
        let e = trace.last().unwrap().energy.energy;
        assert!(e.is_finite() && e < trace.initial_energy());
    }

    #[test]
    fn periodic_mode_matches_oracle() {
        // κ = 1 on a 64-node periodic grid: h = 2 sin(π/64), k = π/L
        let theta = std::f64::consts::PI / 64.0;
        let h = 2.0 * theta.sin();
        let half_width = 32.0 * h;
        let k = std::f64::consts::PI / half_width;
        let grid = Grid1D::new(half_width, 64, BoundaryRule::Periodic).unwrap();
        let kappa2 = discrete_symbol(k, h);
        assert!((kappa2 - 1.0).abs() < 1e-14);
        let v0 = 0.25;
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::constant(v0, 1.0).unwrap()).unwrap();
        let (a0, a1) = (1.0, 0.0);
        let u0 = grid.field_from_fn(|x| a0 * (k * x).cos());
        let u1 = grid.field_from_fn(|x| a1 * (k * x).cos());
        let trace = run(&sys, &u0, &u1, RunOptions::new(1e-3, 10.0).sample_every(1000).store_states(true)).unwrap();
        for s in &trace.snapshots {
            let (a, adot) = fourier_mode_oracle(kappa2, v0, s.t, a0, a1);
            for ((x, u), v) in grid.nodes().iter().zip(s.u.values()).zip(s.v.values()) {
                assert!((u - a * (k * x).cos()).abs() <= 1e-6);
                assert!((v - adot * (k * x).cos()).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn simulate_records_truncation_warning() {
        let mut config = RunConfig::canonical();
        config.domain.half_width = 10.0;
        config.domain.n = 199;
        config.time.t_end = 1.0;
        config.time.dt = 0.05;
        config.time.sample_every = 5;
        let trace = simulate(&config).unwrap();
        assert_eq!(trace.meta.data, Some(config.data));
        assert!(trace.meta.warnings.iter().any(|w| w.contains("truncation")));
        assert_eq!(trace.records.len(), 5);
    }
}
