use crate::error::{Error, Result};

use super::state::{StateVector, ACC_COUNT};
use super::system::{RhsScratch, SemidiscreteSystem};

/// Classical fixed-step RK4 over the extended state `(u, v, acc, w)`.
///
/// Holds the stage buffers so a run allocates once.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    system: &'a SemidiscreteSystem,
    scratch: RhsScratch,
    // stage states (u_k, v_k) for k = 1..3; stage 0 is the current state
    su: [Vec<f64>; 3],
    sv: [Vec<f64>; 3],
    // stage accelerations v'_k
    kv: [Vec<f64>; 4],
}

const STAGE_OFFSETS: [f64; 4] = [0.0, 0.5, 0.5, 1.0];
const STAGE_WEIGHTS: [f64; 4] = [1.0, 2.0, 2.0, 1.0];

impl<'a> Integrator<'a> {
    pub fn new(system: &'a SemidiscreteSystem) -> Self {
        let n = system.grid().len();
        Integrator {
            system,
            scratch: RhsScratch::new(n),
            su: std::array::from_fn(|_| vec![0.0; n]),
            sv: std::array::from_fn(|_| vec![0.0; n]),
            kv: std::array::from_fn(|_| vec![0.0; n]),
        }
    }

    pub fn system(&self) -> &SemidiscreteSystem {
        self.system
    }

    /// Advances `state` by `dt` in place.
    pub fn step(&mut self, state: &mut StateVector, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let n = state.u.len();
        self.system.grid().check(&state.u)?;
        self.system.grid().check(&state.v)?;
        let t = state.t;
        let mut dacc = [[0.0; ACC_COUNT]; 4];

        for stage in 0..4 {
            let ts = t + STAGE_OFFSETS[stage] * dt;
            if stage > 0 {
                let c = STAGE_OFFSETS[stage] * dt;
                let (done, rest) = self.sv.split_at_mut(stage - 1);
                let prev_v = if stage == 1 {
                    state.v.values()
                } else {
                    &done[stage - 2][..]
                };
                let prev_kv = &self.kv[stage - 1];
                let (u0, v0) = (state.u.values(), state.v.values());
                let su = &mut self.su[stage - 1];
                let sv = &mut rest[0];
                for i in 0..n {
                    su[i] = u0[i] + c * prev_v[i];
                    sv[i] = v0[i] + c * prev_kv[i];
                }
            }
            let (u, v): (&[f64], &[f64]) = if stage == 0 {
                (state.u.values(), state.v.values())
            } else {
                (&self.su[stage - 1], &self.sv[stage - 1])
            };
            self.system.accel(u, v, &mut self.kv[stage], &mut self.scratch);
            dacc[stage] = self
                .system
                .integrands_from_scratch(ts, u, v, &mut self.scratch);
        }

        let c = dt / 6.0;
        // w' = u: uses the start-of-step u, so it goes before the u update
        if let Some(w) = state.w.as_mut() {
            let [s1, s2, s3] = &self.su;
            let u0 = state.u.values();
            let w = w.values_mut();
            for i in 0..n {
                w[i] += c * (u0[i] + 2.0 * s1[i] + 2.0 * s2[i] + s3[i]);
            }
        }
        {
            let [s1, s2, s3] = &self.sv;
            let (u, v0) = (state.u.values_mut(), state.v.values());
            for i in 0..n {
                u[i] += c * (v0[i] + 2.0 * s1[i] + 2.0 * s2[i] + s3[i]);
            }
        }
        {
            let [k0, k1, k2, k3] = &self.kv;
            let v = state.v.values_mut();
            for i in 0..n {
                v[i] += c * (k0[i] + 2.0 * k1[i] + 2.0 * k2[i] + k3[i]);
            }
        }
        for (a, total) in state.acc.0.iter_mut().enumerate() {
            let mut incr = 0.0;
            for (stage, weight) in STAGE_WEIGHTS.iter().enumerate() {
                incr += weight * dacc[stage][a];
            }
            *total += c * incr;
        }
        state.t = t + dt;
        if !state.is_finite() {
            return Err(Error::Blowup { t: state.t });
        }
        Ok(())
    }
}

/// One RK4 step returning the advanced state.
pub fn step_rk4(system: &SemidiscreteSystem, state: &StateVector, dt: f64) -> Result<StateVector> {
    let mut next = state.clone();
    Integrator::new(system).step(&mut next, dt)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::oracle::fourier_mode_oracle;
    use crate::grid::{BoundaryRule, Grid1D};
    use crate::potential::PotentialSpec;

    #[test]
    fn zero_state_stays_zero() {
        let grid = Grid1D::new(5.0, 49, BoundaryRule::Dirichlet).unwrap();
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::algebraic(0.5, 1.0).unwrap()).unwrap();
        let s0 = StateVector::initial(grid.zeros(), grid.zeros()).with_antiderivative();
        let s1 = step_rk4(&sys, &s0, 0.1).unwrap();
        assert_eq!(s1.t, 0.1);
        assert_eq!(s1.u, s0.u);
        assert_eq!(s1.v, s0.v);
        assert_eq!(s1.w, s0.w);
        assert_eq!(s1.acc, s0.acc);
    }

    #[test]
    fn rejects_bad_step() {
        let grid = Grid1D::new(5.0, 9, BoundaryRule::Dirichlet).unwrap();
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::zero()).unwrap();
        let s0 = StateVector::initial(grid.zeros(), grid.zeros());
        assert!(step_rk4(&sys, &s0, 0.0).is_err());
        assert!(step_rk4(&sys, &s0, f64::NAN).is_err());
    }

    #[test]
    fn blowup_is_reported() {
        let grid = Grid1D::new(5.0, 9, BoundaryRule::Dirichlet).unwrap();
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::zero()).unwrap();
        let mut u = grid.zeros();
        u.values_mut()[3] = f64::INFINITY;
        let s0 = StateVector::initial(u, grid.zeros());
        assert!(matches!(step_rk4(&sys, &s0, 0.1), Err(Error::Blowup { t }) if t == 0.1));
    }

    /// A constant field on a periodic grid is the scalar oscillator
    /// `u'' + u' + V0 u = 0`.
    fn scalar_error(dt: f64) -> f64 {
        let grid = Grid1D::new(1.0, 4, BoundaryRule::Periodic).unwrap();
        let v0 = 4.0;
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::constant(v0, 1.0).unwrap()).unwrap();
        let mut state = StateVector::initial(grid.field_from_fn(|_| 1.0), grid.zeros());
        let mut integ = Integrator::new(&sys);
        let t_end = 2.0 * std::f64::consts::PI / (v0 - 0.25f64).sqrt();
        let steps = (t_end / dt).round() as usize;
        for _ in 0..steps {
            integ.step(&mut state, dt).unwrap();
        }
        let (a, _) = fourier_mode_oracle(0.0, v0, state.t, 1.0, 0.0);
        (state.u.values()[0] - a).abs()
    }

    #[test]
    fn fourth_order_on_scalar_oscillator() {
        let ratio = scalar_error(0.02) / scalar_error(0.01);
        assert!((14.0..=18.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn accumulators_integrate_exactly_for_constant_mode() {
        // u = 1 and v = 0 is not stationary, but with V = 0 and a constant
        // field, u is stationary and ∫‖u‖² = 2L t, ∫(1+s)... = 2L (t + t²/2)
        let grid = Grid1D::new(1.0, 4, BoundaryRule::Periodic).unwrap();
        let sys = SemidiscreteSystem::assemble(&grid, &PotentialSpec::zero()).unwrap();
        let mut state = StateVector::initial(grid.field_from_fn(|_| 1.0), grid.zeros()).with_antiderivative();
        let mut integ = Integrator::new(&sys);
        for _ in 0..10 {
            integ.step(&mut state, 0.3).unwrap();
        }
        let t = state.t;
        assert!((state.acc.get(crate::evolution::Accumulator::U) - 2.0 * t).abs() < 1e-13);
        assert_eq!(state.acc.get(crate::evolution::Accumulator::WeightedGradU), 0.0);
        assert!(state.w.unwrap().values().iter().all(|w| (w - t).abs() < 1e-13));
    }
}
