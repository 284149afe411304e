//! Energy functionals and the two consistency diagnostics of a run: the
//! energy balance `E(t) + ∫‖u_s‖² = E(0)` and the residual of the
//! antiderivative equation solved by `w = ∫₀ᵗ u`.

use crate::error::{Error, Result};
use crate::evolution::{SemidiscreteSystem, TraceSeries};
use crate::grid::{apply_neg_laplacian, dot, edge_gradient_sq, Field, Grid1D};
use crate::potential::{data_source, PotentialSpec};

/// Every squared norm of a state, plus the two energies built from them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyRecord {
    pub t: f64,
    /// `E = ½(l2v + gradv + gradu + wpot)`
    pub energy: f64,
    /// `E* = ½(gradv + lapv + lapu)`
    pub estar: f64,
    pub l2u: f64,
    pub l2v: f64,
    pub gradu: f64,
    pub gradv: f64,
    pub lapu: f64,
    pub lapv: f64,
    /// `‖√V u‖²`
    pub wpot: f64,
    /// `∫ V |∇u|²` with `V` at edge midpoints.
    pub wgradpot: f64,
}

impl EnergyRecord {
    /// Evaluates all norms of `(u, v)` against the system's potential.
    pub fn of_state(system: &SemidiscreteSystem, t: f64, u: &Field, v: &Field) -> Result<Self> {
        let grid = system.grid();
        grid.check(u)?;
        grid.check(v)?;
        let h = grid.spacing();
        let n = u.len();
        let (mut lu, mut lv) = (vec![0.0; n], vec![0.0; n]);
        system.neg_laplacian_raw(u.values(), &mut lu);
        system.neg_laplacian_raw(v.values(), &mut lv);
        let (u, v) = (u.values(), v.values());
        let l2u = h * dot(u, u);
        let l2v = h * dot(v, v);
        let gradu = h * dot(&lu, u);
        let gradv = h * dot(&lv, v);
        let lapu = h * dot(&lu, &lu);
        let lapv = h * dot(&lv, &lv);
        let wpot = system.wpot(u);
        let wgradpot = weighted_gradient(h, system, u);
        Ok(EnergyRecord {
            t,
            energy: 0.5 * (l2v + gradv + gradu + wpot),
            estar: 0.5 * (gradv + lapv + lapu),
            l2u,
            l2v,
            gradu,
            gradv,
            lapu,
            lapv,
            wpot,
            wgradpot,
        })
    }
}

fn weighted_gradient(h: f64, system: &SemidiscreteSystem, u: &[f64]) -> f64 {
    let vedge = system.vedge();
    let mut acc = 0.0;
    crate::grid::for_each_edge_difference(system.boundary(), u, |e, d| acc += vedge[e] * d * d);
    acc / h
}

/// `E = ½(‖v‖² + ‖∇v‖² + ‖∇u‖² + ‖√V u‖²)`.
pub fn first_energy(grid: &Grid1D, spec: &PotentialSpec, u: &Field, v: &Field) -> Result<f64> {
    let nu = grid.norms(u)?;
    let nv = grid.norms(v)?;
    let wpot = grid.inner(&spec.sample(grid).hadamard(u), u)?;
    Ok(0.5 * (nv.l2_sq + nv.grad_sq + nu.grad_sq + wpot))
}

/// `E* = ½(‖∇v‖² + ‖Δv‖² + ‖Δu‖²)`.
pub fn second_energy(grid: &Grid1D, u: &Field, v: &Field) -> Result<f64> {
    let nu = grid.norms(u)?;
    let nv = grid.norms(v)?;
    Ok(0.5 * (nv.grad_sq + nv.lap_sq + nu.lap_sq))
}

/// `‖Δf_x‖²`, the edge-difference gradient norm of `L_h f`.
pub fn lapgrad_sq(grid: &Grid1D, f: &Field) -> Result<f64> {
    let lf = grid.neg_laplacian(f)?;
    Ok(edge_gradient_sq(grid.spacing(), grid.boundary(), lf.values()))
}

/// `∫ V |∇f|²` with `V` sampled at edge midpoints; nonnegative by
/// construction.
pub fn wgradpot(grid: &Grid1D, spec: &PotentialSpec, f: &Field) -> Result<f64> {
    grid.weighted_edge_gradient_sq(&spec.sample_edges(grid), f)
}

/// `E₂(0) = ½(‖Δu1‖² + ‖Δ(u1)_x‖² + ‖Δ(u0)_x‖²)`.
pub fn initial_second_data_energy(grid: &Grid1D, u0: &Field, u1: &Field) -> Result<f64> {
    let lap_u1 = grid.norms(u1)?.lap_sq;
    Ok(0.5 * (lap_u1 + lapgrad_sq(grid, u1)? + lapgrad_sq(grid, u0)?))
}

/// `max_t |E(t) + ∫₀ᵗ‖u_s‖² - E(0)| / E(0)` over the samples of a trace.
pub fn energy_balance_residual(trace: &TraceSeries) -> Result<f64> {
    if trace.records.is_empty() {
        return Err(Error::Internal("energy balance of an empty trace".into()));
    }
    Ok(trace
        .records
        .iter()
        .map(|r| r.e_balance_residual)
        .fold(0.0, f64::max))
}

/// `|E + acc_us - E0| / max(E0, 1e-300)`.
pub fn balance_defect(energy: f64, acc_us: f64, e0: f64) -> f64 {
    (energy + acc_us - e0).abs() / e0.max(1e-300)
}

/// Largest nodal residual of `M w_tt + L_h w + V w + w_t = u0 + u1 + L_h u1`
/// over the stored snapshots, relative to `max |source|`. Uses `w_t = u`
/// and `w_tt = v` from the state, so no time differencing enters.
pub fn antiderivative_residual(
    trace: &TraceSeries,
    system: &SemidiscreteSystem,
    u0: &Field,
    u1: &Field,
) -> Result<f64> {
    if !trace.meta.antiderivative {
        return Err(Error::AntiderivativeDisabled);
    }
    let grid = system.grid();
    let source = data_source(grid, u0, u1)?;
    let scale = source.max_abs().max(1e-300);
    let n = grid.len();
    let (mut lv, mut lw) = (vec![0.0; n], vec![0.0; n]);
    let h = grid.spacing();
    let mut worst: f64 = 0.0;
    for snap in &trace.snapshots {
        let w = snap.w.as_ref().ok_or(Error::AntiderivativeDisabled)?;
        grid.check(&snap.u)?;
        grid.check(w)?;
        apply_neg_laplacian(h, grid.boundary(), snap.v.values(), &mut lv);
        apply_neg_laplacian(h, grid.boundary(), w.values(), &mut lw);
        let (u, v, w, s) = (snap.u.values(), snap.v.values(), w.values(), source.values());
        let vpot = system.vpot();
        for i in 0..n {
            let r = (v[i] + lv[i]) + lw[i] + vpot[i] * w[i] + u[i] - s[i];
            worst = worst.max(r.abs());
        }
    }
    Ok(worst / scale)
}
