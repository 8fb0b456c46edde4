//! Reflection-principle formulas for Brownian input, used as exact references.

use libm::{exp, sqrt};

use crate::error::{bail, Result};
use crate::gauss::{gauss_tail_log, log_sum_exp};

/// ln P(sup_{t <= T} (W(t) - ct) > u) for a standard Brownian motion W.
pub fn exact_bm_crossing_log(u: f64, c: f64, t: f64) -> Result<f64> {
    if !(u >= 0.0 && c > 0.0 && t > 0.0) {
        bail!(Domain, "crossing needs u >= 0, c > 0, T > 0; got ({u}, {c}, {t})");
    }
    let s = sqrt(t);
    Ok(log_sum_exp(
        gauss_tail_log((u + c * t) / s),
        -2.0 * c * u + gauss_tail_log((u - c * t) / s),
    ))
}

/// Probability that the empty Brownian queue exceeds u at time T.
pub fn exact_bm_crossing(u: f64, c: f64, t: f64) -> Result<f64> {
    exact_bm_crossing_log(u, c, t).map(exp)
}

/// Stationary overflow probability exp(-2cu) of the Brownian queue.
pub fn exact_bm_stationary(u: f64, c: f64) -> Result<f64> {
    if !(u >= 0.0 && c > 0.0) {
        bail!(Domain, "stationary law needs u >= 0, c > 0; got ({u}, {c})");
    }
    Ok(exp(-2.0 * c * u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_examples() {
        assert!((exact_bm_crossing(0.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // high-precision reference: Psi(53/sqrt50) + exp(-6) Psi(-47/sqrt50)
        let p = exact_bm_crossing(3.0, 1.0, 50.0).unwrap();
        assert!((p - 2.478_752_176_662_301_3e-3).abs() < 1e-15, "{p}");
        let mut prev = 1.0;
        for k in 1..60 {
            let p = exact_bm_crossing(k as f64, 1.0, 10.0).unwrap();
            assert!(p < prev);
            prev = p;
        }
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(exact_bm_stationary(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(exact_bm_stationary(3.0, 1.0).unwrap(), exp(-6.0));
        assert_eq!(exact_bm_stationary(1.0, 2.0).unwrap(), exp(-4.0));
        for &(u, c) in &[(3.0, 1.0), (0.5, 2.0), (10.0, 0.3)] {
            let t = 1e3 * u / c;
            let a = exact_bm_crossing(u, c, t).unwrap();
            let b = exact_bm_stationary(u, c).unwrap();
            assert!(((a - b) / b).abs() < 1e-6);
        }
    }
}
