//! Least-squares power-law fit of `E(t)` against `1 + t`.

use std::fmt;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;

/// Fewest samples accepted inside a fit window.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Start of the default window, past the initial transient.
pub const DEFAULT_FIT_START: f64 = 10.0;

/// The default window ends at `FIT_HORIZON / V(L)`, well before the
/// truncated domain's spectral gap turns the decay exponential.
pub const FIT_HORIZON: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub t_min: f64,
    pub t_max: f64,
    /// `d log E / d log(1+t)`
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub samples: usize,
}

impl fmt::Display for DecayFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "window [{}, {}]  samples {}  slope {:.6}  intercept {:.6}  rms {:.3e}",
            self.t_min, self.t_max, self.samples, self.slope, self.intercept, self.rms
        )
    }
}

/// `[10, min(T, 0.2 / V(L))]`; `None` when that interval is empty.
pub fn default_window(spec: &PotentialSpec, half_width: f64, t_end: f64) -> Option<(f64, f64)> {
    let v_edge = spec.eval(half_width).v;
    let horizon = if v_edge > 0.0 { FIT_HORIZON / v_edge } else { f64::INFINITY };
    let t_max = t_end.min(horizon);
    (t_max > DEFAULT_FIT_START).then_some((DEFAULT_FIT_START, t_max))
}

/// Fits `log E = slope · log(1+t) + intercept` over the `(t, E)` samples
/// with `t_min ≤ t ≤ t_max`.
pub fn fit_decay(samples: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<DecayFit> {
    if !(t_min < t_max) {
        return Err(Error::Fit(format!("empty window [{t_min}, {t_max}]")));
    }
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::Fit("no samples".into())),
    };
    let slack = 1e-9 * last.abs().max(1.0);
    if t_min < first - slack || t_max > last + slack {
        return Err(Error::Fit(format!(
            "window [{t_min}, {t_max}] is not inside the trace [{first}, {last}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, e) in samples {
        if t < t_min - slack || t > t_max + slack {
            continue;
        }
        if !(e > 0.0) {
            return Err(Error::Fit(format!("nonpositive energy {e} at t = {t}")));
        }
        xs.push((1.0 + t).ln());
        ys.push(e.ln());
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "only {} samples in [{t_min}, {t_max}], need {MIN_FIT_SAMPLES}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit {
        t_min,
        t_max,
        slope,
        intercept,
        rms,
        samples: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (0..=200).map(|i| i as f64 * 0.5).map(|t| (t, f(t))).collect()
    }

    #[test]
    fn exact_power_law() {
        let fit = fit_decay(&synthetic(|t| (1.0 + t).powi(-2)), 10.0, 100.0).unwrap();
        assert!((fit.slope + 2.0).abs() <= 1e-12, "{}", fit.slope);
        assert!(fit.intercept.abs() <= 1e-11);
        assert!(fit.rms <= 1e-12);
        assert_eq!(fit.samples, 181);
    }

    #[test]
    fn constant_has_zero_slope() {
        let fit = fit_decay(&synthetic(|_| 3.0), 10.0, 50.0).unwrap();
        assert!(fit.slope.abs() <= 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn window_errors() {
        let s = synthetic(|t| (1.0 + t).powi(-1));
        assert!(fit_decay(&s, 10.0, 120.0).is_err());
        assert!(fit_decay(&s, 20.0, 10.0).is_err());
        assert!(fit_decay(&s, 10.0, 12.0).is_err());
        let mut bad = s.clone();
        bad[50].1 = 0.0;
        assert!(matches!(fit_decay(&bad, 10.0, 100.0), Err(Error::Fit(_))));
        assert!(fit_decay(&[], 0.0, 1.0).is_err());
    }

    #[test]
    fn default_window_policy() {
        let spec = PotentialSpec::algebraic(0.5, 1.0).unwrap();
        let (a, b) = default_window(&spec, 120.0, 100.0).unwrap();
        assert_eq!(a, 10.0);
        let v = spec.eval(120.0).v;
        assert!((b - 0.2 / v).abs() < 1e-9 && b < 100.0);
        assert_eq!(default_window(&spec, 1000.0, 100.0), Some((10.0, 100.0)));
        assert_eq!(default_window(&spec, 80.0, 5.0), None);
        assert_eq!(default_window(&PotentialSpec::zero(), 80.0, 50.0), Some((10.0, 50.0)));
    }
}
