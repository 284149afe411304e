use crate::grid::Field;

pub const ACC_COUNT: usize = 12;

/// Running time integrals carried alongside `(u, v)` as extra ODE components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accumulator {
    /// `∫‖u_s‖²`
    Us = 0,
    /// `∫‖∇u_s‖²`
    GradUs,
    /// `∫‖Δu_s‖²`
    LapUs,
    /// `∫‖u‖²`
    U,
    /// `∫‖∇u‖²`
    GradU,
    /// `∫‖√V u‖²`
    WpotU,
    /// `∫‖Δu‖²`
    LapU,
    /// `∫E*`
    Estar,
    /// `∫(1+s)‖u_s‖²`
    WeightedUs,
    /// `∫(1+s)‖∇u_s‖²`
    WeightedGradUs,
    /// `∫(1+s)‖∇u‖²`
    WeightedGradU,
    /// `∫(1+s)‖√V u‖²`
    WeightedWpotU,
}

impl Accumulator {
    pub const ALL: [Accumulator; ACC_COUNT] = [
        Accumulator::Us,
        Accumulator::GradUs,
        Accumulator::LapUs,
        Accumulator::U,
        Accumulator::GradU,
        Accumulator::WpotU,
        Accumulator::LapU,
        Accumulator::Estar,
        Accumulator::WeightedUs,
        Accumulator::WeightedGradUs,
        Accumulator::WeightedGradU,
        Accumulator::WeightedWpotU,
    ];

    /// CSV column name.
    pub fn column(self) -> &'static str {
        match self {
            Accumulator::Us => "acc_us",
            Accumulator::GradUs => "acc_grad_us",
            Accumulator::LapUs => "acc_lap_us",
            Accumulator::U => "acc_u",
            Accumulator::GradU => "acc_grad_u",
            Accumulator::WpotU => "acc_wpot_u",
            Accumulator::LapU => "acc_lap_u",
            Accumulator::Estar => "acc_Estar",
            Accumulator::WeightedUs => "acc_w_us",
            Accumulator::WeightedGradUs => "acc_w_grad_us",
            Accumulator::WeightedGradU => "acc_w_grad_u",
            Accumulator::WeightedWpotU => "acc_w_wpot_u",
        }
    }
}

/// Accumulator values indexed by [`Accumulator`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accumulators(pub [f64; ACC_COUNT]);

impl Accumulators {
    pub fn get(&self, which: Accumulator) -> f64 {
        self.0[which as usize]
    }
}

impl std::ops::Index<Accumulator> for Accumulators {
    type Output = f64;

    fn index(&self, which: Accumulator) -> &f64 {
        &self.0[which as usize]
    }
}

/// Solution snapshot `(u, v = u_t)` at time `t`, with the running integrals
/// and, when enabled, the nodal antiderivative `w = ∫₀ᵗ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub acc: Accumulators,
    pub w: Option<Field>,
}

impl StateVector {
    pub fn initial(u0: Field, u1: Field) -> Self {
        StateVector {
            t: 0.0,
            u: u0,
            v: u1,
            acc: Accumulators::default(),
            w: None,
        }
    }

    /// Enables the `w = ∫ u` accumulator, starting from `w(0) = 0`.
    pub fn with_antiderivative(mut self) -> Self {
        self.w = Some(Field::new(vec![0.0; self.u.len()]));
        self
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.u.is_finite()
            && self.v.is_finite()
            && self.acc.0.iter().all(|a| a.is_finite())
            && self.w.as_ref().is_none_or(Field::is_finite)
    }
}
