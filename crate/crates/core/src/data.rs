//! Initial data families.

use std::fmt;

use crate::grid::{Field, Grid1D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Displacement {
    /// `A exp(-1/(1 - (x/R)²))` for `|x| < R`, zero outside.
    Bump { amplitude: f64, radius: f64 },
    /// `A exp(-x²/(2σ²))`
    Gaussian { amplitude: f64, sigma: f64 },
    /// `A cos(kx)`
    FourierMode { amplitude: f64, k: f64 },
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Velocity {
    Zero,
    /// `d/dx [A exp(-x²/(2σ²))]`
    GaussianDerivative { amplitude: f64, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub displacement: Displacement,
    pub velocity: Velocity,
}

/// Gaussians are treated as supported on `|x| ≤ 6σ` for truncation checks.
const GAUSSIAN_SUPPORT_SIGMAS: f64 = 6.0;

pub fn bump(amplitude: f64, radius: f64, x: f64) -> f64 {
    let r = x / radius;
    if r.abs() < 1.0 {
        amplitude * (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

impl InitialData {
    pub fn bump(amplitude: f64, radius: f64) -> Self {
        InitialData {
            displacement: Displacement::Bump { amplitude, radius },
            velocity: Velocity::Zero,
        }
    }

    pub fn zero() -> Self {
        InitialData {
            displacement: Displacement::Zero,
            velocity: Velocity::Zero,
        }
    }

    pub fn sample(&self, grid: &Grid1D) -> (Field, Field) {
        let u0 = match self.displacement {
            Displacement::Bump { amplitude, radius } => {
                grid.field_from_fn(|x| bump(amplitude, radius, x))
            }
            Displacement::Gaussian { amplitude, sigma } => {
                grid.field_from_fn(|x| amplitude * (-x * x / (2.0 * sigma * sigma)).exp())
            }
            Displacement::FourierMode { amplitude, k } => {
                grid.field_from_fn(|x| amplitude * (k * x).cos())
            }
            Displacement::Zero => grid.zeros(),
        };
        let u1 = match self.velocity {
            Velocity::Zero => grid.zeros(),
            Velocity::GaussianDerivative { amplitude, sigma } => grid.field_from_fn(|x| {
                let s2 = sigma * sigma;
                -amplitude * x / s2 * (-x * x / (2.0 * s2)).exp()
            }),
        };
        (u0, u1)
    }

    /// Radius outside which the data vanish (or are negligible); `None` for
    /// data that fill the domain.
    pub fn support_radius(&self) -> Option<f64> {
        let u0 = match self.displacement {
            Displacement::Bump { radius, .. } => Some(radius),
            Displacement::Gaussian { sigma, .. } => Some(GAUSSIAN_SUPPORT_SIGMAS * sigma),
            Displacement::FourierMode { .. } => None,
            Displacement::Zero => Some(0.0),
        };
        let u1 = match self.velocity {
            Velocity::Zero => Some(0.0),
            Velocity::GaussianDerivative { sigma, .. } => Some(GAUSSIAN_SUPPORT_SIGMAS * sigma),
        };
        Some(u0?.max(u1?))
    }

    /// Same data with every amplitude multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let displacement = match self.displacement {
            Displacement::Bump { amplitude, radius } => Displacement::Bump {
                amplitude: s * amplitude,
                radius,
            },
            Displacement::Gaussian { amplitude, sigma } => Displacement::Gaussian {
                amplitude: s * amplitude,
                sigma,
            },
            Displacement::FourierMode { amplitude, k } => Displacement::FourierMode {
                amplitude: s * amplitude,
                k,
            },
            Displacement::Zero => Displacement::Zero,
        };
        let velocity = match self.velocity {
            Velocity::Zero => Velocity::Zero,
            Velocity::GaussianDerivative { amplitude, sigma } => Velocity::GaussianDerivative {
                amplitude: s * amplitude,
                sigma,
            },
        };
        InitialData {
            displacement,
            velocity,
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.displacement {
            Displacement::Bump { amplitude, radius } => write!(f, "u0=bump(A={amplitude},R={radius})")?,
            Displacement::Gaussian { amplitude, sigma } => {
                write!(f, "u0=gaussian(A={amplitude},sigma={sigma})")?
            }
            Displacement::FourierMode { amplitude, k } => write!(f, "u0=mode(A={amplitude},k={k})")?,
            Displacement::Zero => write!(f, "u0=zero")?,
        }
        match self.velocity {
            Velocity::Zero => write!(f, " u1=zero"),
            Velocity::GaussianDerivative { amplitude, sigma } => {
                write!(f, " u1=gaussian-derivative(A={amplitude},sigma={sigma})")
            }
        }
    }
}
