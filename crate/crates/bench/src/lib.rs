//! Fixtures shared by the kernel benchmarks.

use dampwave_core::data::InitialData;
use dampwave_core::evolution::StateVector;
use dampwave_core::{BoundaryRule, Grid1D, PotentialSpec, SemidiscreteSystem};

/// Node counts benchmarked, from a coarse test grid up to the long-run grid.
pub const SIZES: [usize; 3] = [799, 3199, 4799];

/// Dirichlet grid on `[-L, L]` with spacing 0.05 and the algebraic potential
/// `V0 = 0.5, alpha = 1`.
pub fn system(n: usize) -> SemidiscreteSystem {
    let half_width = (n + 1) as f64 * 0.025;
    let grid = Grid1D::new(half_width, n, BoundaryRule::Dirichlet).expect("grid");
    let spec = PotentialSpec::algebraic(0.5, 1.0).expect("potential");
    SemidiscreteSystem::assemble(&grid, &spec).expect("system")
}

/// Unit bump of radius 5 at rest.
pub fn state(system: &SemidiscreteSystem) -> StateVector {
    let (u0, u1) = InitialData::bump(1.0, 5.0).sample(system.grid());
    StateVector::initial(u0, u1)
}
