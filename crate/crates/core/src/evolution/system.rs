use crate::error::{Error, Result};
use crate::grid::{apply_neg_laplacian, BoundaryRule, Field, Grid1D, HelmholtzSolver};
use crate::potential::PotentialSpec;

use super::state::{Accumulator, ACC_COUNT};

/// `M u'' + L_h u + V u + u' = 0` with `M = I + L_h`, written first order as
/// `u' = v`, `v' = M⁻¹(-L_h u - V u - v)`.
#[derive(Debug, Clone)]
pub struct SemidiscreteSystem {
    grid: Grid1D,
    spec: PotentialSpec,
    vpot: Vec<f64>,
    vedge: Vec<f64>,
    mass: HelmholtzSolver,
    forcing: Option<Field>,
}

/// Scratch space for one right-hand side evaluation.
#[derive(Debug, Clone)]
pub(crate) struct RhsScratch {
    lu: Vec<f64>,
    lv: Vec<f64>,
}

impl RhsScratch {
    pub(crate) fn new(n: usize) -> Self {
        RhsScratch {
            lu: vec![0.0; n],
            lv: vec![0.0; n],
        }
    }
}

impl SemidiscreteSystem {
    /// Samples the potential and factorizes `M`. The potential must be finite
    /// and nonnegative at every node and edge midpoint; positivity and the
    /// decay rate `|V'| ≤ α V` are checked elsewhere so the `V ≡ 0` baseline can run.
    pub fn assemble(grid: &Grid1D, spec: &PotentialSpec) -> Result<Self> {
        let vpot = spec.sample(grid).into_values();
        let vedge = spec.sample_edges(grid);
        if let Some(bad) = vpot.iter().chain(&vedge).find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Config(format!(
                "potential must be finite and nonnegative on the grid, found {bad}"
            )));
        }
        let mass = grid.helmholtz();
        if mass.pivots().iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Internal("I + L_h factorization lost positivity".into()));
        }
        Ok(SemidiscreteSystem {
            grid: grid.clone(),
            spec: *spec,
            vpot,
            vedge,
            mass,
            forcing: None,
        })
    }

    /// Attaches the constant source `u0 + u1 - Δu1` of the antiderivative
    /// equation.
    pub fn with_forcing(mut self, source: Field) -> Result<Self> {
        self.grid.check(&source)?;
        self.forcing = Some(source);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.spec
    }

    /// `V` at the nodes.
    pub fn vpot(&self) -> &[f64] {
        &self.vpot
    }

    /// `V` at the edge midpoints.
    pub fn vedge(&self) -> &[f64] {
        &self.vedge
    }

    pub fn mass(&self) -> &HelmholtzSolver {
        &self.mass
    }

    pub fn forcing(&self) -> Option<&Field> {
        self.forcing.as_ref()
    }

    /// Direct form of the right-hand side: `(v, M⁻¹(-L_h u - V u - v))`.
    pub fn rhs(&self, u: &Field, v: &Field) -> Result<(Field, Field)> {
        self.grid.check(u)?;
        self.grid.check(v)?;
        let mut scratch = RhsScratch::new(u.len());
        let mut dv = vec![0.0; u.len()];
        self.accel(u.values(), v.values(), &mut dv, &mut scratch);
        Ok((v.clone(), Field::new(dv)))
    }

    /// Semigroup form `u'' = -u + J u - J(V u) - J v`, with `J = (I + L_h)⁻¹`.
    /// Algebraically identical to [`SemidiscreteSystem::rhs`] since
    /// `-M⁻¹ L_h = -I + J`.
    pub fn semigroup_rhs(&self, u: &Field, v: &Field) -> Result<(Field, Field)> {
        self.grid.check(u)?;
        self.grid.check(v)?;
        let ju = self.mass.solve(u)?;
        let jvu = self.mass.solve(&Field::new(
            u.values().iter().zip(&self.vpot).map(|(a, b)| a * b).collect(),
        ))?;
        let jv = self.mass.solve(v)?;
        let dv = u
            .values()
            .iter()
            .zip(ju.values())
            .zip(jvu.values().iter().zip(jv.values()))
            .map(|((u, ju), (jvu, jv))| -u + ju - jvu - jv)
            .collect();
        Ok((v.clone(), Field::new(dv)))
    }

    /// Writes `M⁻¹(-L_h u - V u - v)` into `dv`; leaves `L_h u` and `L_h v`
    /// in the scratch buffers.
    pub(crate) fn accel(&self, u: &[f64], v: &[f64], dv: &mut [f64], scratch: &mut RhsScratch) {
        let h = self.grid.spacing();
        let bc = self.grid.boundary();
        apply_neg_laplacian(h, bc, u, &mut scratch.lu);
        for i in 0..u.len() {
            dv[i] = -scratch.lu[i] - self.vpot[i] * u[i] - v[i];
        }
        self.mass.solve_in_place(dv);
    }

    /// Time derivatives of the running integrals at `(t, u, v)`.
    /// Requires `accel` to have filled `scratch.lu` for this `u`.
    pub(crate) fn integrands_from_scratch(
        &self,
        t: f64,
        u: &[f64],
        v: &[f64],
        scratch: &mut RhsScratch,
    ) -> [f64; ACC_COUNT] {
        let h = self.grid.spacing();
        apply_neg_laplacian(h, self.grid.boundary(), v, &mut scratch.lv);
        let (mut l2v, mut gradv, mut lapv) = (0.0, 0.0, 0.0);
        let (mut l2u, mut gradu, mut wpot, mut lapu) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..u.len() {
            let (ui, vi, lui, lvi) = (u[i], v[i], scratch.lu[i], scratch.lv[i]);
            l2v += vi * vi;
            gradv += lvi * vi;
            lapv += lvi * lvi;
            l2u += ui * ui;
            gradu += lui * ui;
            wpot += self.vpot[i] * ui * ui;
            lapu += lui * lui;
        }
        let (l2v, gradv, lapv) = (h * l2v, h * gradv, h * lapv);
        let (l2u, gradu, wpot, lapu) = (h * l2u, h * gradu, h * wpot, h * lapu);
        let weight = 1.0 + t;
        let mut d = [0.0; ACC_COUNT];
        d[Accumulator::Us as usize] = l2v;
        d[Accumulator::GradUs as usize] = gradv;
        d[Accumulator::LapUs as usize] = lapv;
        d[Accumulator::U as usize] = l2u;
        d[Accumulator::GradU as usize] = gradu;
        d[Accumulator::WpotU as usize] = wpot;
        d[Accumulator::LapU as usize] = lapu;
        d[Accumulator::Estar as usize] = 0.5 * (gradv + lapv + lapu);
        d[Accumulator::WeightedUs as usize] = weight * l2v;
        d[Accumulator::WeightedGradUs as usize] = weight * gradv;
        d[Accumulator::WeightedGradU as usize] = weight * gradu;
        d[Accumulator::WeightedWpotU as usize] = weight * wpot;
        d
    }

    /// Integrand vector of the running integrals at `(t, u, v)`.
    pub fn integrands(&self, t: f64, u: &Field, v: &Field) -> Result<[f64; ACC_COUNT]> {
        self.grid.check(u)?;
        self.grid.check(v)?;
        let mut scratch = RhsScratch::new(u.len());
        apply_neg_laplacian(
            self.grid.spacing(),
            self.grid.boundary(),
            u.values(),
            &mut scratch.lu,
        );
        Ok(self.integrands_from_scratch(t, u.values(), v.values(), &mut scratch))
    }

    /// `h Σ V u²`.
    pub(crate) fn wpot(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (v, x) in self.vpot.iter().zip(u) {
            acc += v * x * x;
        }
        self.grid.spacing() * acc
    }


    pub(crate) fn neg_laplacian_raw(&self, f: &[f64], out: &mut [f64]) {
        apply_neg_laplacian(self.grid.spacing(), self.grid.boundary(), f, out);
    }

    pub(crate) fn boundary(&self) -> BoundaryRule {
        self.grid.boundary()
    }
}
