//! Discrete geometry of the truncated line `[-L, L]`.
//!
//! Everything here is built from the 3-point second difference `L_h`
//! (a discrete `-d²/dx²`) and the scaled inner product `(f, g)_h = h Σ f_i g_i`.
//! With those two choices summation by parts is exact, which is what makes
//! the semidiscrete energy identity hold without truncation error.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the grid closes at `±L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryRule {
    /// Homogeneous Dirichlet truncation: values at `±L` are identically zero.
    Dirichlet,
    /// Periodic wrap-around on a domain of length `2L`.
    Periodic,
}

impl fmt::Display for BoundaryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryRule::Dirichlet => f.write_str("dirichlet"),
            BoundaryRule::Periodic => f.write_str("periodic"),
        }
    }
}

impl FromStr for BoundaryRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" | "dirichlet-truncation" => Ok(BoundaryRule::Dirichlet),
            "periodic" => Ok(BoundaryRule::Periodic),
            other => Err(Error::Config(format!(
                "unknown boundary rule '{other}' (expected dirichlet or periodic)"
            ))),
        }
    }
}

/// Uniform grid on `[-L, L]` with `n` unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
    h: f64,
    bc: BoundaryRule,
    nodes: Vec<f64>,
}

/// Nodal values attached to a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<f64>,
}

/// Squared discrete norms `‖f‖²`, `‖∇f‖²` and `‖Δf‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Norms {
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub lap_sq: f64,
}

impl Norms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    pub fn grad(&self) -> f64 {
        self.grad_sq.sqrt()
    }

    pub fn lap(&self) -> f64 {
        self.lap_sq.sqrt()
    }
}

impl Grid1D {
    /// Builds the grid. Dirichlet: `h = 2L/(n+1)`, nodes `-L + i h`, `i = 1..=n`.
    /// Periodic: `h = 2L/n`, nodes `-L + i h`, `i = 0..n`.
    pub fn new(half_width: f64, n: usize, bc: BoundaryRule) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!(
                "domain half-width must be positive, got {half_width}"
            )));
        }
        if n < 3 {
            return Err(Error::Config(format!(
                "grid needs at least 3 nodes, got {n}"
            )));
        }
        let (h, offset) = match bc {
            BoundaryRule::Dirichlet => (2.0 * half_width / (n as f64 + 1.0), 1.0),
            BoundaryRule::Periodic => (2.0 * half_width / n as f64, 0.0),
        };
        let nodes = (0..n)
            .map(|i| -half_width + (i as f64 + offset) * h)
            .collect();
        Ok(Grid1D {
            half_width,
            n,
            h,
            bc,
            nodes,
        })
    }

    /// Grid whose node count is chosen so the spacing is `h` (rounded to the
    /// nearest admissible count).
    pub fn with_spacing(half_width: f64, h: f64, bc: BoundaryRule) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("spacing must be positive, got {h}")));
        }
        let cells = (2.0 * half_width / h).round() as usize;
        let n = match bc {
            BoundaryRule::Dirichlet => cells.saturating_sub(1),
            BoundaryRule::Periodic => cells,
        };
        Grid1D::new(half_width, n, bc)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> BoundaryRule {
        self.bc
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Midpoints of the difference edges. Dirichlet grids have `n + 1` edges
    /// (including the two touching the zero boundary values); periodic grids
    /// have `n`, the last one wrapping around.
    pub fn edge_midpoints(&self) -> Vec<f64> {
        let edges = match self.bc {
            BoundaryRule::Dirichlet => self.n + 1,
            BoundaryRule::Periodic => self.n,
        };
        let first = -self.half_width + 0.5 * self.h;
        (0..edges).map(|i| first + i as f64 * self.h).collect()
    }

    pub fn field_from_fn(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.nodes.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zeros(&self) -> Field {
        Field {
            values: vec![0.0; self.n],
        }
    }

    pub(crate) fn check(&self, f: &Field) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: f.len(),
            });
        }
        Ok(())
    }

    /// `(L_h f)_i = (2 f_i - f_{i-1} - f_{i+1}) / h²`.
    pub fn neg_laplacian(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let mut out = vec![0.0; self.n];
        apply_neg_laplacian(self.h, self.bc, &f.values, &mut out);
        Ok(Field { values: out })
    }

    /// `(f, g)_h = h Σ f_i g_i`.
    pub fn inner(&self, f: &Field, g: &Field) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self.h * dot(&f.values, &g.values))
    }

    /// `‖f‖²_h`, `‖∇f‖²_h = (L_h f, f)_h` and `‖Δf‖²_h = ‖L_h f‖²_h`.
    pub fn norms(&self, f: &Field) -> Result<Norms> {
        let lf = self.neg_laplacian(f)?;
        Ok(Norms {
            l2_sq: self.h * dot(&f.values, &f.values),
            grad_sq: self.h * dot(&lf.values, &f.values),
            lap_sq: self.h * dot(&lf.values, &lf.values),
        })
    }

    /// Summation-by-parts form of `‖∇f‖²`: `h Σ ((f_{i+1} - f_i)/h)²` over all
    /// edges, boundary edges included.
    pub fn edge_gradient_sq(&self, f: &Field) -> Result<f64> {
        self.check(f)?;
        Ok(edge_gradient_sq(self.h, self.bc, &f.values))
    }

    /// `h Σ w_e ((f_{i+1} - f_i)/h)²` with one weight per edge, e.g. a
    /// potential sampled at edge midpoints.
    pub fn weighted_edge_gradient_sq(&self, weights: &[f64], f: &Field) -> Result<f64> {
        self.check(f)?;
        let edges = self.edge_midpoints().len();
        if weights.len() != edges {
            return Err(Error::GridMismatch {
                expected: edges,
                found: weights.len(),
            });
        }
        let mut acc = 0.0;
        for_each_edge_difference(self.bc, &f.values, |e, d| acc += weights[e] * d * d);
        Ok(acc / self.h)
    }

    /// Factorizes `I + L_h` once for repeated resolvent solves.
    pub fn helmholtz(&self) -> HelmholtzSolver {
        HelmholtzSolver::new(self)
    }
}

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Field { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Field) -> Field {
        Field {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Add<&Field> for &Field {
    type Output = Field;

    fn add(self, rhs: &Field) -> Field {
        Field {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub<&Field> for &Field {
    type Output = Field;

    fn sub(self, rhs: &Field) -> Field {
        Field {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl From<Vec<f64>> for Field {
    fn from(values: Vec<f64>) -> Self {
        Field { values }
    }
}

/// Factorization of `M = I + L_h`, applying the discrete resolvent
/// `J_h = (I + L_h)^{-1}`.
///
/// Dirichlet grids use the Thomas algorithm. Periodic grids use a
/// Sherman-Morrison correction of a modified tridiagonal system.
#[derive(Debug, Clone)]
pub struct HelmholtzSolver {
    n: usize,
    off: f64,
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
    pivots: Vec<f64>,
    cyclic: Option<CyclicCorrection>,
}

#[derive(Debug, Clone)]
struct CyclicCorrection {
    // B z = u, with u = (gamma, 0, ..., 0, corner)
    z: Vec<f64>,
    corner_over_gamma: f64,
    denom: f64,
}

impl HelmholtzSolver {
    fn new(grid: &Grid1D) -> Self {
        let n = grid.n;
        let ih2 = 1.0 / (grid.h * grid.h);
        let diag = 1.0 + 2.0 * ih2;
        let off = -ih2;
        let mut diagonal = vec![diag; n];
        let mut correction = None;
        let gamma = -diag;
        if grid.bc == BoundaryRule::Periodic {
            diagonal[0] -= gamma;
            diagonal[n - 1] -= off * off / gamma;
        }
        let mut inv_pivot = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut pivots = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = diagonal[i] - off * prev_upper;
            pivots[i] = pivot;
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = if i + 1 < n { off / pivot } else { 0.0 };
            prev_upper = upper[i];
        }
        let mut solver = HelmholtzSolver {
            n,
            off,
            inv_pivot,
            upper,
            pivots,
            cyclic: None,
        };
        if grid.bc == BoundaryRule::Periodic {
            let mut z = vec![0.0; n];
            z[0] = gamma;
            z[n - 1] = off;
            solver.thomas_in_place(&mut z);
            let corner_over_gamma = off / gamma;
            let denom = 1.0 + z[0] + corner_over_gamma * z[n - 1];
            correction = Some(CyclicCorrection {
                z,
                corner_over_gamma,
                denom,
            });
        }
        solver.cyclic = correction;
        solver
    }

    /// Pivots of the tridiagonal elimination; all positive because `I + L_h ≥ I`.
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    /// Solves `(I + L_h) x = b`.
    pub fn solve(&self, b: &Field) -> Result<Field> {
        if b.len() != self.n {
            return Err(Error::GridMismatch {
                expected: self.n,
                found: b.len(),
            });
        }
        let mut x = b.values.clone();
        self.solve_in_place(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Internal(
                "Helmholtz solve produced non-finite values".into(),
            ));
        }
        Ok(Field { values: x })
    }

    /// Overwrites `x` (holding the right-hand side) with the solution.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.thomas_in_place(x);
        if let Some(c) = &self.cyclic {
            let v_dot_y = x[0] + c.corner_over_gamma * x[self.n - 1];
            let factor = v_dot_y / c.denom;
            for (xi, zi) in x.iter_mut().zip(&c.z) {
                *xi -= factor * zi;
            }
        }
    }

    fn thomas_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.off * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.upper[i] * x[i + 1];
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn apply_neg_laplacian(h: f64, bc: BoundaryRule, f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let ih2 = 1.0 / (h * h);
    let (left_edge, right_edge) = match bc {
        BoundaryRule::Dirichlet => (0.0, 0.0),
        BoundaryRule::Periodic => (f[n - 1], f[0]),
    };
    out[0] = (2.0 * f[0] - left_edge - f[1]) * ih2;
    for i in 1..n - 1 {
        out[i] = (2.0 * f[i] - f[i - 1] - f[i + 1]) * ih2;
    }
    out[n - 1] = (2.0 * f[n - 1] - f[n - 2] - right_edge) * ih2;
}

/// Calls `visit(edge_index, f_{i+1} - f_i)` for every edge of the grid.
pub(crate) fn for_each_edge_difference(bc: BoundaryRule, f: &[f64], mut visit: impl FnMut(usize, f64)) {
    let n = f.len();
    match bc {
        BoundaryRule::Dirichlet => {
            visit(0, f[0]);
            for i in 0..n - 1 {
                visit(i + 1, f[i + 1] - f[i]);
            }
            visit(n, -f[n - 1]);
        }
        BoundaryRule::Periodic => {
            for i in 0..n - 1 {
                visit(i, f[i + 1] - f[i]);
            }
            visit(n - 1, f[0] - f[n - 1]);
        }
    }
}

pub(crate) fn edge_gradient_sq(h: f64, bc: BoundaryRule, f: &[f64]) -> f64 {
    let mut acc = 0.0;
    for_each_edge_difference(bc, f, |_, d| acc += d * d);
    acc / h
}
