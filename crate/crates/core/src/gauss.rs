//! Standard normal distribution and tail functions, evaluated in log space.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{erfc, exp, expm1, log, log1p, sqrt};

/// Below this erfc argument `erfc` is evaluated directly; above it the
/// scaled asymptotic series is used so that nothing underflows.
const ERFC_SERIES_CUTOFF: f64 = 26.0;

/// ln(erfcx(x)) = ln(e^{x^2} erfc(x)) for x >= ERFC_SERIES_CUTOFF.
fn ln_erfcx_large(x: f64) -> f64 {
    let inv2x2 = 1.0 / (2.0 * x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..40 {
        term *= -((2 * k - 1) as f64) * inv2x2;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    log(sum) - log(x * sqrt(PI))
}

/// ln Psi(z), the log of the standard normal upper tail. Finite for all finite z.
pub fn gauss_tail_log(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let x = z * FRAC_1_SQRT_2;
    if x < -1.0 {
        // Psi(z) = 1 - Psi(-z); the correction is tiny, so log1p keeps precision.
        return log1p(-gauss_tail(-z));
    }
    if x < ERFC_SERIES_CUTOFF {
        return log(0.5 * erfc(x));
    }
    -x * x + ln_erfcx_large(x) + log(0.5)
}

/// Psi(z) = P(N > z).
pub fn gauss_tail(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

/// Phi(z) = P(N <= z).
pub fn gauss_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// ln Phi(z).
pub fn gauss_cdf_log(z: f64) -> f64 {
    gauss_tail_log(-z)
}

/// Standard normal density.
pub fn gauss_pdf(z: f64) -> f64 {
    exp(-0.5 * z * z) / sqrt(2.0 * PI)
}

/// ln(e^a + e^b) without overflow.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + log1p(exp(lo - hi))
}

/// ln(1 - e^{-x}) for x > 0.
pub fn log1m_exp(x: f64) -> f64 {
    if x <= core::f64::consts::LN_2 {
        log(-expm1(-x))
    } else {
        log1p(-exp(-x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_points() {
        assert_eq!(gauss_cdf(0.0), 0.5);
        assert!((gauss_tail_log(0.0) - log(0.5)).abs() < 1e-16);
        assert!((gauss_tail(1.0) + gauss_cdf(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tail_log_matches_arbitrary_precision() {
        // mpmath, 50 digits: log(erfc(z/sqrt(2))/2)
        let cases = [
            (10.0, -53.23128515051247),
            (-3.0, -0.0013508099647481938),
            (5.0, -15.064998393988725),
            (40.0, -804.608_442_013_753_8),
            (1.0e4, -50_000_010.129_278_91),
        ];
        for (z, want) in cases {
            let got = gauss_tail_log(z);
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "z={z}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn tail_log_continuous_across_series_cutoff() {
        for &dx in &[1e-9, 0.1] {
            let x = ERFC_SERIES_CUTOFF + dx;
            let direct = log(0.5 * erfc(x));
            let series = gauss_tail_log(x * core::f64::consts::SQRT_2);
            assert!(((direct - series) / series).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, -3.0), -3.0);
        let v = log_sum_exp(-1000.0, -1000.0);
        assert!((v - (-1000.0 + log(2.0))).abs() < 1e-12);
    }
}
