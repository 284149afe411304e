//! Semidiscrete dynamics `M u'' + L_h u + V u + u' = 0` and its RK4 integration.

pub mod oracle;
mod state;
mod stepper;
mod system;
mod trace;

pub use oracle::{characteristic_roots, discrete_symbol, fourier_mode_oracle};
pub use state::{Accumulator, Accumulators, StateVector, ACC_COUNT};
pub use stepper::{step_rk4, Integrator};
pub use system::SemidiscreteSystem;
pub use trace::{run, simulate, DataFingerprint, RunOptions, Snapshot, TraceMeta, TraceRecord, TraceSeries};
