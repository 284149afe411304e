//! Closed-form evolution of a single Fourier mode under a constant potential.
//!
//! A mode `a(t) e^{ikx}` solves `(1+κ²) a'' + a' + (κ² + V0) a = 0`, where `κ²`
//! is either the exact `k²` or the stencil symbol `4 sin²(kh/2)/h²`.

/// Symbol of the 3-point `-d²/dx²` stencil at wavenumber `k`.
pub fn discrete_symbol(k: f64, h: f64) -> f64 {
    let s = (0.5 * k * h).sin();
    4.0 * s * s / (h * h)
}

/// Roots of `(1+κ²) λ² + λ + (κ² + V0) = 0` as `(re, im)` pairs.
pub fn characteristic_roots(kappa_sq: f64, v0: f64) -> [(f64, f64); 2] {
    let m = 1.0 + kappa_sq;
    let c = kappa_sq + v0;
    let disc = 1.0 - 4.0 * m * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [((-1.0 + r) / (2.0 * m), 0.0), ((-1.0 - r) / (2.0 * m), 0.0)]
    } else {
        let w = (-disc).sqrt() / (2.0 * m);
        let s = -1.0 / (2.0 * m);
        [(s, w), (s, -w)]
    }
}

/// `(a(t), a'(t))` for the mode with symbol `kappa_sq`, starting from
/// `a(0) = a0`, `a'(0) = a1`.
pub fn fourier_mode_oracle(kappa_sq: f64, v0: f64, t: f64, a0: f64, a1: f64) -> (f64, f64) {
    let m = 1.0 + kappa_sq;
    let c = kappa_sq + v0;
    let disc = 1.0 - 4.0 * m * c;
    let scale = 1.0 + 4.0 * m * c;
    if disc.abs() <= 1e-14 * scale {
        let lam = -1.0 / (2.0 * m);
        let e = (lam * t).exp();
        let b = a1 - lam * a0;
        let a = (a0 + b * t) * e;
        (a, (b + lam * (a0 + b * t)) * e)
    } else if disc > 0.0 {
        let r = disc.sqrt();
        let l1 = (-1.0 + r) / (2.0 * m);
        let l2 = (-1.0 - r) / (2.0 * m);
        let c1 = (a1 - l2 * a0) / (l1 - l2);
        let c2 = a0 - c1;
        let (e1, e2) = ((l1 * t).exp(), (l2 * t).exp());
        (c1 * e1 + c2 * e2, c1 * l1 * e1 + c2 * l2 * e2)
    } else {
        let sigma = -1.0 / (2.0 * m);
        let omega = (-disc).sqrt() / (2.0 * m);
        let a = a0;
        let b = (a1 - sigma * a0) / omega;
        let e = (sigma * t).exp();
        let (sn, cs) = (omega * t).sin_cos();
        (
            e * (a * cs + b * sn),
            e * ((sigma * a + omega * b) * cs + (sigma * b - omega * a) * sn),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// RK4 on the scalar mode equation with a very small step.
    fn reference(kappa_sq: f64, v0: f64, t: f64, a0: f64, a1: f64) -> (f64, f64) {
        let m = 1.0 + kappa_sq;
        let f = |y: [f64; 2]| [y[1], -(y[1] + (kappa_sq + v0) * y[0]) / m];
        let steps = 20_000;
        let dt = t / steps as f64;
        let mut y = [a0, a1];
        for _ in 0..steps {
            let k1 = f(y);
            let k2 = f([y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
            let k3 = f([y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
            let k4 = f([y[0] + dt * k3[0], y[1] + dt * k3[1]]);
            for j in 0..2 {
                y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        (y[0], y[1])
    }

    #[test]
    fn roots_for_unit_symbol() {
        // 2λ² + λ + 1.25 = 0, discriminant 1 - 10 = -9
        let [(re, im), (re2, im2)] = characteristic_roots(1.0, 0.25);
        assert!((re + 0.25).abs() < 1e-15 && (im - 0.75).abs() < 1e-15);
        assert!((re2 + 0.25).abs() < 1e-15 && (im2 + 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_data_stays_zero() {
        for t in [0.0, 1.0, 17.5] {
            assert_eq!(fourier_mode_oracle(1.0, 0.25, t, 0.0, 0.0), (0.0, 0.0));
        }
    }

    #[test]
    fn repeated_root_case() {
        // κ = 0, V0 = 1/4: a'' + a' + a/4 = 0, λ = -1/2 twice
        let (a0, a1) = (0.7, -0.2);
        for t in [0.0, 0.5, 3.0, 10.0] {
            let (a, _) = fourier_mode_oracle(0.0, 0.25, t, a0, a1);
            let expected = (a0 + (a1 + a0 / 2.0) * t) * (-t / 2.0f64).exp();
            assert!((a - expected).abs() < 1e-15, "t={t}");
        }
    }

    #[test]
    fn matches_fine_rk4_in_every_regime() {
        // complex, real-distinct and repeated roots
        for (k2, v0) in [(1.0, 0.25), (0.0, 0.1), (0.0, 0.25), (3.0, 0.0)] {
            let exact = fourier_mode_oracle(k2, v0, 6.0, 1.0, 0.3);
            let numeric = reference(k2, v0, 6.0, 1.0, 0.3);
            assert!((exact.0 - numeric.0).abs() < 1e-12, "{k2} {v0}");
            assert!((exact.1 - numeric.1).abs() < 1e-12, "{k2} {v0}");
        }
    }

    #[test]
    fn symbol_tends_to_k_squared() {
        assert!((discrete_symbol(2.0, 1e-4) - 4.0).abs() < 1e-6);
        let h = 0.5;
        assert!((discrete_symbol(std::f64::consts::PI / h, h) - 4.0 / (h * h)).abs() < 1e-12);
    }
}
