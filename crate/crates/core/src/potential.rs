//! Potential families and the admissibility checks on them.
//!
//! The admissible family is `V(x) = V0 (1 + x²)^{-α/2}`, which satisfies
//! `|V'| ≤ αV` with room to spare (`sup |V'|/V = α/2`). The Gaussian family
//! `V0 e^{-x²}` is kept only as a deliberately inadmissible test case.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};

/// Nodal potentials below this are treated as vanishing.
pub const MIN_POTENTIAL: f64 = 1e-300;

/// Oversampling factor used when a sup-norm has no closed form.
pub const SAMPLING_REFINEMENT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialFamily {
    /// `V0 (1 + x²)^{-α/2}`
    Algebraic,
    /// `V0`
    Constant,
    /// `V0 e^{-x²}`; violates `|V'| ≤ αV` for every α.
    Gaussian,
    /// `V ≡ 0`, the potential-free baseline. Never admissible.
    Zero,
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PotentialFamily::Algebraic => "algebraic",
            PotentialFamily::Constant => "constant",
            PotentialFamily::Gaussian => "gaussian",
            PotentialFamily::Zero => "zero",
        })
    }
}

impl FromStr for PotentialFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(PotentialFamily::Algebraic),
            "constant" => Ok(PotentialFamily::Constant),
            "gaussian" => Ok(PotentialFamily::Gaussian),
            "zero" | "none" => Ok(PotentialFamily::Zero),
            other => Err(Error::Config(format!(
                "unknown potential family '{other}' (expected algebraic, constant, gaussian or zero)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    family: PotentialFamily,
    v0: f64,
    alpha: f64,
}

/// `V`, `V'` and `V''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

/// Sup-norms `‖V‖∞`, `‖V'‖∞`, `‖V''‖∞` over the whole line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNorms {
    pub v: f64,
    pub dv: f64,
    pub d2v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationResult {
    pub ok: bool,
    pub alpha: f64,
    pub alpha_eff: f64,
    pub vinf: f64,
    pub v1inf: f64,
    pub v2inf: f64,
    /// `α² ‖V‖∞`, must be `< 1`.
    pub smallness: f64,
    pub min_nodal: f64,
    /// Human-readable reasons for rejection; empty when `ok`.
    pub failures: Vec<String>,
}

impl PotentialSpec {
    pub fn new(family: PotentialFamily, v0: f64, alpha: f64) -> Result<Self> {
        if family != PotentialFamily::Zero && !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::Config(format!(
                "potential amplitude V0 must be positive, got {v0}"
            )));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Config(format!(
                "decay exponent alpha must be positive, got {alpha}"
            )));
        }
        let v0 = if family == PotentialFamily::Zero { 0.0 } else { v0 };
        Ok(PotentialSpec { family, v0, alpha })
    }

    pub fn algebraic(v0: f64, alpha: f64) -> Result<Self> {
        Self::new(PotentialFamily::Algebraic, v0, alpha)
    }

    pub fn constant(v0: f64, alpha: f64) -> Result<Self> {
        Self::new(PotentialFamily::Constant, v0, alpha)
    }

    pub fn gaussian(v0: f64, alpha: f64) -> Result<Self> {
        Self::new(PotentialFamily::Gaussian, v0, alpha)
    }

    pub fn zero() -> Self {
        PotentialSpec {
            family: PotentialFamily::Zero,
            v0: 0.0,
            alpha: 1.0,
        }
    }

    pub fn family(&self) -> PotentialFamily {
        self.family
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, x: f64) -> PotentialValue {
        let v0 = self.v0;
        match self.family {
            PotentialFamily::Algebraic => {
                let a = self.alpha;
                let s = 1.0 + x * x;
                let v = v0 * s.powf(-0.5 * a);
                PotentialValue {
                    v,
                    dv: -a * x * v / s,
                    d2v: a * v * ((a + 1.0) * x * x - 1.0) / (s * s),
                }
            }
            PotentialFamily::Constant => PotentialValue {
                v: v0,
                dv: 0.0,
                d2v: 0.0,
            },
            PotentialFamily::Gaussian => {
                let v = v0 * (-x * x).exp();
                PotentialValue {
                    v,
                    dv: -2.0 * x * v,
                    d2v: (4.0 * x * x - 2.0) * v,
                }
            }
            PotentialFamily::Zero => PotentialValue {
                v: 0.0,
                dv: 0.0,
                d2v: 0.0,
            },
        }
    }

    /// Closed-form sup-norms over ℝ, independent of any grid.
    pub fn sup_norms(&self) -> SupNorms {
        let v0 = self.v0;
        match self.family {
            PotentialFamily::Algebraic => {
                let a = self.alpha;
                // |V'| peaks at x² = 1/(a+1)
                let s1 = 1.0 / (a + 1.0);
                let dv = v0 * a * s1.sqrt() * (1.0 + s1).powf(-0.5 * a - 1.0);
                // V'' ∝ ((a+1)s - 1)(1+s)^{-a/2-2}: -1 at s = 0, local max at s = 3/(a+1)
                let s2 = 3.0 / (a + 1.0);
                let interior = ((a + 1.0) * s2 - 1.0) * (1.0 + s2).powf(-0.5 * a - 2.0);
                SupNorms {
                    v: v0,
                    dv,
                    d2v: v0 * a * interior.abs().max(1.0),
                }
            }
            PotentialFamily::Constant | PotentialFamily::Zero => SupNorms {
                v: v0,
                dv: 0.0,
                d2v: 0.0,
            },
            PotentialFamily::Gaussian => SupNorms {
                v: v0,
                dv: v0 * 2.0_f64.sqrt() * (-0.5f64).exp(),
                d2v: 2.0 * v0,
            },
        }
    }

    /// `sup |V'|/V` on `[-L, L]`, in closed form where available.
    pub fn alpha_eff(&self, grid: &Grid1D) -> f64 {
        match self.family {
            PotentialFamily::Algebraic => {
                let l = grid.half_width();
                let peak = if l >= 1.0 { 0.5 } else { l / (1.0 + l * l) };
                self.alpha * peak
            }
            PotentialFamily::Constant => 0.0,
            PotentialFamily::Gaussian | PotentialFamily::Zero => self.sampled_alpha_eff(grid),
        }
    }

    /// `max |V'|/V` over a sampling `SAMPLING_REFINEMENT` times finer than the
    /// grid, spanning `[-L, L]`.
    pub fn sampled_alpha_eff(&self, grid: &Grid1D) -> f64 {
        let l = grid.half_width();
        let step = grid.spacing() / SAMPLING_REFINEMENT as f64;
        let count = (2.0 * l / step).round() as usize;
        let mut worst = 0.0f64;
        for i in 0..=count {
            let x = (-l + i as f64 * step).min(l);
            worst = worst.max(self.log_derivative(x).abs());
        }
        worst
    }

    /// `V'/V`, evaluated without forming the quotient so it stays finite
    /// where `V` underflows.
    pub fn log_derivative(&self, x: f64) -> f64 {
        match self.family {
            PotentialFamily::Algebraic => -self.alpha * x / (1.0 + x * x),
            PotentialFamily::Gaussian => -2.0 * x,
            PotentialFamily::Constant | PotentialFamily::Zero => 0.0,
        }
    }

    /// Potential at the grid nodes.
    pub fn sample(&self, grid: &Grid1D) -> Field {
        grid.field_from_fn(|x| self.eval(x).v)
    }

    /// Potential at the edge midpoints of the grid.
    pub fn sample_edges(&self, grid: &Grid1D) -> Vec<f64> {
        grid.edge_midpoints()
            .into_iter()
            .map(|x| self.eval(x).v)
            .collect()
    }

    /// Checks `V > 0`, `|V'| ≤ α V` and the smallness condition `α² ‖V‖∞ < 1` on this grid.
    pub fn validate(&self, grid: &Grid1D) -> ValidationResult {
        let sup = self.sup_norms();
        let min_nodal = grid
            .nodes()
            .iter()
            .map(|&x| self.eval(x).v)
            .fold(f64::INFINITY, f64::min);
        let alpha_eff = self.alpha_eff(grid);
        let smallness = self.alpha * self.alpha * sup.v;
        let mut failures = Vec::new();
        if !(min_nodal >= MIN_POTENTIAL) {
            failures.push(format!("V is not positive at every node (min {min_nodal:e})"));
        }
        if !(alpha_eff <= self.alpha) {
            failures.push(format!(
                "|V'| <= alpha V fails: sup |V'|/V = {alpha_eff} > alpha = {}",
                self.alpha
            ));
        }
        if !(smallness < 1.0) {
            failures.push(format!(
                "smallness condition fails: alpha^2 ||V||_inf = {smallness} >= 1"
            ));
        }
        ValidationResult {
            ok: failures.is_empty(),
            alpha: self.alpha,
            alpha_eff,
            vinf: sup.v,
            v1inf: sup.dv,
            v2inf: sup.d2v,
            smallness,
            min_nodal,
            failures,
        }
    }
}

impl fmt::Display for ValidationResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ok          = {}", self.ok)?;
        writeln!(f, "alpha       = {}", self.alpha)?;
        writeln!(f, "alpha_eff   = {}", self.alpha_eff)?;
        writeln!(f, "Vinf        = {}", self.vinf)?;
        writeln!(f, "V1inf       = {}", self.v1inf)?;
        writeln!(f, "V2inf       = {}", self.v2inf)?;
        writeln!(f, "smallness   = {}", self.smallness)?;
        write!(f, "min_nodal_V = {:e}", self.min_nodal)?;
        for msg in &self.failures {
            write!(f, "\nrejected: {msg}")?;
        }
        Ok(())
    }
}

/// `‖(u0 + u1 - Δu1)/√V‖_h`, with `-Δ` realized as `L_h`.
pub fn weighted_data_norm(grid: &Grid1D, spec: &PotentialSpec, u0: &Field, u1: &Field) -> Result<f64> {
    let source = data_source(grid, u0, u1)?;
    let vpot = spec.sample(grid);
    let mut acc = 0.0;
    for (s, v) in source.values().iter().zip(vpot.values()) {
        if !(*v >= MIN_POTENTIAL) {
            return Err(Error::Validation(format!(
                "potential {v:e} too small for the weighted data norm"
            )));
        }
        acc += s * s / v;
    }
    Ok((grid.spacing() * acc).sqrt())
}

/// The constant source `u0 + u1 - Δu1 = u0 + u1 + L_h u1` of the
/// antiderivative equation.
pub fn data_source(grid: &Grid1D, u0: &Field, u1: &Field) -> Result<Field> {
    grid.check(u0)?;
    let lu1 = grid.neg_laplacian(u1)?;
    Ok(&(u0 + u1) + &lu1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundaryRule;
    use approx::assert_relative_eq;

    fn canonical_grid() -> Grid1D {
        Grid1D::with_spacing(80.0, 0.05, BoundaryRule::Dirichlet).unwrap()
    }

    fn bump(x: f64) -> f64 {
        let r = x / 5.0;
        if r.abs() < 1.0 {
            (-1.0 / (1.0 - r * r)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn eval_examples() {
        let p = PotentialSpec::algebraic(0.5, 1.0).unwrap().eval(0.0);
        assert_eq!((p.v, p.dv, p.d2v), (0.5, 0.0, -0.5));
        let c = PotentialSpec::constant(0.3, 1.0).unwrap();
        for x in [-3.0, 0.0, 17.0] {
            let p = c.eval(x);
            assert_eq!((p.v, p.dv, p.d2v), (0.3, 0.0, 0.0));
        }
        let a = PotentialSpec::algebraic(0.5, 1.0).unwrap();
        let mut prev = a.eval(0.0).v;
        for k in 1..=6 {
            let v = a.eval(10f64.powi(k)).v;
            assert!(v > 0.0 && v < prev);
            assert_eq!(v, a.eval(-10f64.powi(k)).v);
            prev = v;
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let step = 1e-5;
        for spec in [
            PotentialSpec::algebraic(0.5, 1.0).unwrap(),
            PotentialSpec::algebraic(0.2, 2.5).unwrap(),
            PotentialSpec::gaussian(1.0, 1.0).unwrap(),
        ] {
            for x in [-3.0, -0.7, 0.0, 0.4, 1.0, 2.2] {
                let p = spec.eval(x);
                let fd1 = (spec.eval(x + step).v - spec.eval(x - step).v) / (2.0 * step);
                let fd2 = (spec.eval(x + step).v - 2.0 * p.v + spec.eval(x - step).v)
                    / (step * step);
                assert!((p.dv - fd1).abs() < 1e-9, "{spec:?} x={x}");
                assert!((p.d2v - fd2).abs() < 1e-4, "{spec:?} x={x}");
            }
        }
    }

    #[test]
    fn sup_norms_match_dense_sampling() {
        for (v0, a) in [(0.5, 1.0), (0.1, 3.0), (0.9, 0.3)] {
            let spec = PotentialSpec::algebraic(v0, a).unwrap();
            let sup = spec.sup_norms();
            let (mut m1, mut m2) = (0.0f64, 0.0f64);
            for i in 0..=200_000 {
                let p = spec.eval(-10.0 + i as f64 * 1e-4);
                m1 = m1.max(p.dv.abs());
                m2 = m2.max(p.d2v.abs());
            }
            assert_relative_eq!(sup.v, v0);
            assert_relative_eq!(sup.dv, m1, max_relative = 1e-7);
            assert_relative_eq!(sup.d2v, m2, max_relative = 1e-7);
        }
    }

    #[test]
    fn validate_examples() {
        let grid = canonical_grid();
        let r = PotentialSpec::algebraic(0.5, 1.0).unwrap().validate(&grid);
        assert!(r.ok, "{r}");
        assert_eq!(r.alpha_eff, 0.5);
        assert_eq!(r.smallness, 0.5);

        let r = PotentialSpec::algebraic(2.0, 1.0).unwrap().validate(&grid);
        assert!(!r.ok);
        assert_eq!(r.smallness, 2.0);

        let r = PotentialSpec::gaussian(1.0, 1.0).unwrap().validate(&grid);
        assert!(!r.ok);
        assert!(r.alpha_eff > 100.0);
        assert!(r.failures.iter().any(|m| m.contains("|V'|")));

        let r = PotentialSpec::zero().validate(&grid);
        assert!(!r.ok);
    }

    #[test]
    fn constant_family_has_no_derivative_norms() {
        let grid = canonical_grid();
        let r = PotentialSpec::constant(0.3, 1.0).unwrap().validate(&grid);
        assert!(r.ok);
        assert_eq!((r.v1inf, r.v2inf, r.alpha_eff), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sampled_alpha_eff_brackets_half_alpha() {
        for alpha in [0.5, 1.0, 2.0] {
            let spec = PotentialSpec::algebraic(0.1, alpha).unwrap();
            let s = spec.sampled_alpha_eff(&canonical_grid());
            assert!(s <= alpha / 2.0 + 1e-15 && s >= alpha / 2.0 - 1e-6, "{s}");
        }
    }

    #[test]
    fn validation_monotone_in_amplitude() {
        let grid = canonical_grid();
        let mut last_ok = true;
        for v0 in [0.05, 0.2, 0.5, 0.9, 0.99, 1.0, 1.5] {
            let ok = PotentialSpec::algebraic(v0, 1.0).unwrap().validate(&grid).ok;
            assert!(last_ok || !ok, "validity reappeared at V0 = {v0}");
            last_ok = ok;
        }
        assert!(!last_ok);
    }

    #[test]
    fn weighted_norm_examples() {
        let grid = Grid1D::with_spacing(20.0, 0.05, BoundaryRule::Dirichlet).unwrap();
        let spec = PotentialSpec::algebraic(0.5, 1.0).unwrap();
        let z = grid.zeros();
        assert_eq!(weighted_data_norm(&grid, &spec, &z, &z).unwrap(), 0.0);

        let u0 = grid.field_from_fn(bump);
        let u1 = grid.field_from_fn(|x| (-x * x).exp());
        let c = PotentialSpec::constant(0.3, 1.0).unwrap();
        let src = data_source(&grid, &u0, &u1).unwrap();
        let expected = grid.inner(&src, &src).unwrap().sqrt() / 0.3f64.sqrt();
        assert_relative_eq!(
            weighted_data_norm(&grid, &c, &u0, &u1).unwrap(),
            expected,
            max_relative = 1e-13
        );

        let scaled = weighted_data_norm(&grid, &spec, &u0.scaled(-3.0), &u1.scaled(-3.0)).unwrap();
        assert_relative_eq!(
            scaled,
            3.0 * weighted_data_norm(&grid, &spec, &u0, &u1).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn weighted_norm_matches_refined_grid() {
        let spec = PotentialSpec::algebraic(0.5, 1.0).unwrap();
        let norm_at = |h: f64| {
            let g = Grid1D::with_spacing(20.0, h, BoundaryRule::Dirichlet).unwrap();
            let u0 = g.field_from_fn(bump);
            weighted_data_norm(&g, &spec, &u0, &g.zeros()).unwrap()
        };
        let coarse = norm_at(0.05);
        let oracle = norm_at(0.05 / 8.0);
        assert!((coarse / oracle - 1.0).abs() < 0.01);
    }

    #[test]
    fn weighted_norm_rejects_vanishing_potential() {
        let grid = Grid1D::with_spacing(5.0, 0.1, BoundaryRule::Dirichlet).unwrap();
        let u0 = grid.field_from_fn(bump);
        assert!(matches!(
            weighted_data_norm(&grid, &PotentialSpec::zero(), &u0, &grid.zeros()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn spec_rejects_nonpositive_parameters() {
        assert!(PotentialSpec::algebraic(0.0, 1.0).is_err());
        assert!(PotentialSpec::algebraic(0.5, -1.0).is_err());
        assert!(PotentialSpec::constant(f64::NAN, 1.0).is_err());
    }
}
