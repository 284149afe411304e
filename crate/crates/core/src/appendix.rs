//! Operator-level checks of the first-order (semigroup) formulation on the
//! phase space `H² × H²`: skew-symmetry of the principal part, boundedness
//! of the lower-order part, resolvent identities and solvability of
//! `(I - A) U = G`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evolution::SemidiscreteSystem;
use crate::grid::{Field, Grid1D, HelmholtzSolver};

/// A pair `(u, v)` in the discrete phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    pub u: Field,
    pub v: Field,
}

/// `(f, g)_h + (L_h f, L_h g)_h`
pub fn h2_inner(grid: &Grid1D, f: &Field, g: &Field) -> Result<f64> {
    let lf = grid.neg_laplacian(f)?;
    let lg = grid.neg_laplacian(g)?;
    Ok(grid.inner(f, g)? + grid.inner(&lf, &lg)?)
}

impl PhaseVector {
    pub fn new(u: Field, v: Field) -> Self {
        PhaseVector { u, v }
    }

    pub fn zeros(grid: &Grid1D) -> Self {
        PhaseVector::new(grid.zeros(), grid.zeros())
    }

    pub fn inner(&self, grid: &Grid1D, other: &PhaseVector) -> Result<f64> {
        Ok(h2_inner(grid, &self.u, &other.u)? + h2_inner(grid, &self.v, &other.v)?)
    }

    pub fn norm_sq(&self, grid: &Grid1D) -> Result<f64> {
        self.inner(grid, self)
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }

    fn sub(&self, other: &PhaseVector) -> PhaseVector {
        PhaseVector::new(&self.u - &other.u, &self.v - &other.v)
    }
}

/// The principal part `(u, v) ↦ (v, -u)`.
pub fn apply_a(grid: &Grid1D, pv: &PhaseVector) -> Result<PhaseVector> {
    grid.check(&pv.u)?;
    grid.check(&pv.v)?;
    Ok(PhaseVector::new(pv.v.clone(), pv.u.scaled(-1.0)))
}

/// Potential part `(u, v) ↦ (0, -J(V u))`.
pub fn apply_lv(system: &SemidiscreteSystem, pv: &PhaseVector) -> Result<PhaseVector> {
    let grid = system.grid();
    grid.check(&pv.u)?;
    let vu = Field::new(pv.u.values().iter().zip(system.vpot()).map(|(u, v)| u * v).collect());
    let jvu = system.mass().solve(&vu)?;
    Ok(PhaseVector::new(grid.zeros(), jvu.scaled(-1.0)))
}

/// Damping part `(u, v) ↦ (0, -J(v - u))`.
pub fn apply_f(system: &SemidiscreteSystem, pv: &PhaseVector) -> Result<PhaseVector> {
    let grid = system.grid();
    let jd = system.mass().solve(&(&pv.v - &pv.u))?;
    Ok(PhaseVector::new(grid.zeros(), jd.scaled(-1.0)))
}

/// `L_V + F`, signed so that `A + L_V + F` is the semigroup right-hand side.
pub fn apply_lv_f(system: &SemidiscreteSystem, pv: &PhaseVector) -> Result<PhaseVector> {
    let a = apply_lv(system, pv)?;
    let b = apply_f(system, pv)?;
    Ok(PhaseVector::new(&a.u + &b.u, &a.v + &b.v))
}

/// Solves `(I - A) U = G` blockwise: `u = (f + g)/2`, `v = (g - f)/2`.
pub fn check_resolvent_surjectivity(grid: &Grid1D, rhs: &PhaseVector) -> Result<PhaseVector> {
    grid.check(&rhs.u)?;
    grid.check(&rhs.v)?;
    let (f, g) = (rhs.u.values(), rhs.v.values());
    let u = f.iter().zip(g).map(|(f, g)| 0.5 * (f + g)).collect();
    let v = f.iter().zip(g).map(|(f, g)| 0.5 * (g - f)).collect();
    Ok(PhaseVector::new(Field::new(u), Field::new(v)))
}

/// `max |(I - A) U - G| / max |G|`.
pub fn surjectivity_residual(grid: &Grid1D, solution: &PhaseVector, rhs: &PhaseVector) -> Result<f64> {
    let au = apply_a(grid, solution)?;
    let r = solution.sub(&au).sub(rhs);
    Ok(r.max_abs() / rhs.max_abs().max(1e-300))
}

/// Resolvent pair for `J = (I + L_h)⁻¹`: returns the relative defect of
/// `L_h J w = w - J w` and whether `‖J w‖ ≤ ‖w‖`.
pub fn yosida_check(grid: &Grid1D, solver: &HelmholtzSolver, w: &Field) -> Result<(f64, bool)> {
    let jw = solver.solve(w)?;
    let ljw = grid.neg_laplacian(&jw)?;
    let defect = (&ljw - &(w - &jw)).max_abs() / w.max_abs().max(1e-300);
    let contraction = grid.norms(&jw)?.l2_sq <= grid.norms(w)?.l2_sq;
    Ok((defect, contraction))
}

/// Conjugate gradients for `(I + L_h²) x = b`.
fn solve_h2_gram(grid: &Grid1D, b: &Field) -> Result<Field> {
    let apply = |x: &Field| -> Result<Field> {
        let l2x = grid.neg_laplacian(&grid.neg_laplacian(x)?)?;
        Ok(x + &l2x)
    };
    let dot = |a: &Field, b: &Field| a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>();
    let mut x = grid.zeros();
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = 1e-28 * rr;
    for _ in 0..(10 * grid.len()).max(100) {
        if rr <= target || rr == 0.0 {
            break;
        }
        let ap = apply(&p)?;
        let step = rr / dot(&p, &ap);
        x = &x + &p.scaled(step);
        r = &r - &ap.scaled(step);
        let next = dot(&r, &r);
        p = &r + &p.scaled(next / rr);
        rr = next;
    }
    Ok(x)
}

/// Power-iteration estimate of `‖L_V‖` in the `H² × H²` norm, maximized
/// over `starts` random initial vectors.
pub fn lv_norm_estimate(system: &SemidiscreteSystem, starts: usize, iterations: usize, seed: u64) -> Result<f64> {
    let grid = system.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vpot = Field::new(system.vpot().to_vec());
    // L_V only sees u, so ‖L_V‖² = max (J V u, G J V u) / (u, G u) with
    // G = I + L_h²; iterate x ← G⁻¹ B x, B = V J G J V.
    let apply_b = |x: &Field| -> Result<Field> {
        let jvx = system.mass().solve(&vpot.hadamard(x))?;
        let l2 = grid.neg_laplacian(&grid.neg_laplacian(&jvx)?)?;
        let g = &jvx + &l2;
        Ok(vpot.hadamard(&system.mass().solve(&g)?))
    };
    let mut best: f64 = 0.0;
    for _ in 0..starts {
        let mut x = Field::new((0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let mut rayleigh = 0.0;
        for _ in 0..iterations {
            let bx = apply_b(&x)?;
            rayleigh = grid.inner(&x, &bx)? / h2_inner(grid, &x, &x)?;
            let next = solve_h2_gram(grid, &bx)?;
            let scale = next.max_abs();
            if scale == 0.0 {
                break;
            }
            x = next.scaled(1.0 / scale);
        }
        best = best.max(rayleigh);
    }
    Ok(best.max(0.0).sqrt())
}

/// Worst-case values of every appendix check over a batch of random states.
#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub samples: usize,
    /// `max |⟨A U, U⟩| / ‖U‖²`
    pub skew: f64,
    /// `max ‖A² U + U‖∞ / ‖U‖∞`
    pub a_squared: f64,
    pub yosida_identity: f64,
    pub yosida_contraction: bool,
    pub surjectivity: f64,
    /// `max ‖(A + L_V + F) U - semigroup rhs‖∞ / ‖rhs‖∞`
    pub generator_split: f64,
    /// `max ‖semigroup rhs - direct rhs‖∞ / ‖direct rhs‖∞`
    pub rhs_equivalence: f64,
    pub lv_norm: f64,
    pub lv_norm_limit: f64,
}

pub const SKEW_TOL: f64 = 1e-12;
pub const YOSIDA_TOL: f64 = 1e-12;
pub const SURJECTIVITY_TOL: f64 = 1e-13;
pub const EQUIVALENCE_TOL: f64 = 1e-12;

impl AppendixReport {
    pub fn passed(&self) -> bool {
        self.skew <= SKEW_TOL
            && self.a_squared == 0.0
            && self.yosida_identity <= YOSIDA_TOL
            && self.yosida_contraction
            && self.surjectivity <= SURJECTIVITY_TOL
            && self.generator_split <= EQUIVALENCE_TOL
            && self.rhs_equivalence <= EQUIVALENCE_TOL
            && self.lv_norm <= self.lv_norm_limit
    }
}

impl fmt::Display for AppendixReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
        writeln!(f, "random states          {}", self.samples)?;
        writeln!(f, "skew <AU,U>/|U|^2      {:.3e}  {}", self.skew, mark(self.skew <= SKEW_TOL))?;
        writeln!(f, "A^2 + I                {:.3e}  {}", self.a_squared, mark(self.a_squared == 0.0))?;
        writeln!(
            f,
            "L J w - (w - J w)      {:.3e}  {}",
            self.yosida_identity,
            mark(self.yosida_identity <= YOSIDA_TOL)
        )?;
        writeln!(f, "|J w| <= |w|           {}", mark(self.yosida_contraction))?;
        writeln!(
            f,
            "(I - A) solve          {:.3e}  {}",
            self.surjectivity,
            mark(self.surjectivity <= SURJECTIVITY_TOL)
        )?;
        writeln!(
            f,
            "A + L_V + F vs rhs     {:.3e}  {}",
            self.generator_split,
            mark(self.generator_split <= EQUIVALENCE_TOL)
        )?;
        writeln!(
            f,
            "semigroup vs direct    {:.3e}  {}",
            self.rhs_equivalence,
            mark(self.rhs_equivalence <= EQUIVALENCE_TOL)
        )?;
        write!(
            f,
            "|L_V| estimate         {:.6} (limit {:.6})  {}",
            self.lv_norm,
            self.lv_norm_limit,
            mark(self.lv_norm <= self.lv_norm_limit)
        )
    }
}

/// Runs every check on `samples` seeded random states of `system`'s grid.
pub fn run_appendix_checks(system: &SemidiscreteSystem, samples: usize, seed: u64) -> Result<AppendixReport> {
    if samples == 0 {
        return Err(Error::Config("appendix checks need at least one sample".into()));
    }
    let grid = system.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let random = |rng: &mut ChaCha8Rng| Field::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let mut report = AppendixReport {
        samples,
        skew: 0.0,
        a_squared: 0.0,
        yosida_identity: 0.0,
        yosida_contraction: true,
        surjectivity: 0.0,
        generator_split: 0.0,
        rhs_equivalence: 0.0,
        lv_norm: 0.0,
        lv_norm_limit: 3.0 * (1.0 + system.potential().sup_norms().v),
    };
    for _ in 0..samples {
        let state = PhaseVector::new(random(&mut rng), random(&mut rng));
        let au = apply_a(grid, &state)?;
        report.skew = report.skew.max(au.inner(grid, &state)?.abs() / state.norm_sq(grid)?);
        let aau = apply_a(grid, &au)?;
        let sum = PhaseVector::new(&aau.u + &state.u, &aau.v + &state.v);
        report.a_squared = report.a_squared.max(sum.max_abs() / state.max_abs());

        let (defect, contraction) = yosida_check(grid, system.mass(), &state.u)?;
        report.yosida_identity = report.yosida_identity.max(defect);
        report.yosida_contraction &= contraction;

        let g = PhaseVector::new(random(&mut rng), random(&mut rng));
        let sol = check_resolvent_surjectivity(grid, &g)?;
        report.surjectivity = report.surjectivity.max(surjectivity_residual(grid, &sol, &g)?);

        let (_, direct) = system.rhs(&state.u, &state.v)?;
        let (du, semigroup) = system.semigroup_rhs(&state.u, &state.v)?;
        let scale = direct.max_abs().max(1e-300);
        report.rhs_equivalence = report
            .rhs_equivalence
            .max((&semigroup - &direct).max_abs() / scale);
        let rest = apply_lv_f(system, &state)?;
        let generator = PhaseVector::new(&au.u + &rest.u, &au.v + &rest.v);
        let split = (&generator.u - &du).max_abs().max((&generator.v - &semigroup).max_abs());
        report.generator_split = report.generator_split.max(split / semigroup.max_abs().max(1e-300));
    }
    report.lv_norm = lv_norm_estimate(system, 4, 30, seed ^ 0x5eed)?;
    Ok(report)
}
