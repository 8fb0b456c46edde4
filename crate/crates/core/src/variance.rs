//! Variance functions of stationary-increment Gaussian inputs.
//!
//! Two families are supported: fractional Brownian motion, for which every
//! derived quantity has a closed form, and a tabulated variance with declared
//! power laws at the origin and at infinity. The table is interpolated by a
//! monotone cubic in log-log coordinates and extrapolated by power laws
//! anchored at the end knots.
//!
//! Ultimate monotonicity of the derivatives of a tabulated variance cannot be
//! checked from finitely many knots; it is the caller's contract.

use alloc::vec::Vec;

use libm::{exp, log, pow, sqrt};
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{bail, Result};
use crate::roots::bisect;

/// Default relative tolerance between table end knots and their declared power laws.
pub const DEFAULT_TABLE_TOLERANCE: f64 = 0.05;

/// Power law `coefficient * t^(2 * exponent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

impl PowerLaw {
    pub fn new(coefficient: f64, exponent: f64) -> Self {
        Self {
            coefficient,
            exponent,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coefficient * pow(t, 2.0 * self.exponent)
    }
}

/// Fractional Brownian motion with `Var X(t) = scale * t^(2 hurst)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fbm {
    hurst: f64,
    scale: f64,
}

impl Fbm {
    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Tabulated variance function with declared origin and tail power laws.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    knots: Vec<(f64, f64)>,
    log_t: Vec<f64>,
    log_v: Vec<f64>,
    slopes: Vec<f64>,
    origin: PowerLaw,
    tail: PowerLaw,
    tolerance: f64,
}

impl TableModel {
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn segment(&self, x: f64) -> usize {
        // index i with log_t[i] <= x <= log_t[i + 1]
        let n = self.log_t.len();
        match self.log_t.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn hermite(&self, i: usize, x: f64) -> (f64, f64) {
        let h = self.log_t[i + 1] - self.log_t[i];
        let s = (x - self.log_t[i]) / h;
        let (y0, y1) = (self.log_v[i], self.log_v[i + 1]);
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        let value = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * h * d1;
        let slope = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * h * d0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * h * d1)
            / h;
        (value, slope)
    }

    /// (ln sigma^2, d ln sigma^2 / d ln t) at ln t = x.
    fn log_eval(&self, x: f64) -> (f64, f64) {
        let n = self.log_t.len();
        if x < self.log_t[0] {
            let e = 2.0 * self.origin.exponent;
            (self.log_v[0] + e * (x - self.log_t[0]), e)
        } else if x > self.log_t[n - 1] {
            let e = 2.0 * self.tail.exponent;
            (self.log_v[n - 1] + e * (x - self.log_t[n - 1]), e)
        } else {
            self.hermite(self.segment(x), x)
        }
    }

    fn log_inverse(&self, y: f64) -> Result<f64> {
        let n = self.log_t.len();
        if y < self.log_v[0] {
            return Ok(self.log_t[0] + (y - self.log_v[0]) / (2.0 * self.origin.exponent));
        }
        if y > self.log_v[n - 1] {
            return Ok(self.log_t[n - 1] + (y - self.log_v[n - 1]) / (2.0 * self.tail.exponent));
        }
        let i = match self.log_v.binary_search_by(|p| p.total_cmp(&y)) {
            Ok(i) => return Ok(self.log_t[i]),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        bisect(
            |x| self.hermite(i, x).0 - y,
            self.log_t[i],
            self.log_t[i + 1],
            1e-14,
        )
    }
}

fn pchip_slopes(x: &[f64], y: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = alloc::vec![0.0; n];
    for k in 1..n - 1 {
        let (s0, s1) = (secant[k - 1], secant[k]);
        if s0 * s1 <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / s0 + w2 / s1);
        }
    }
    d[0] = left.clamp(0.0, 3.0 * secant[0]);
    d[n - 1] = right.clamp(0.0, 3.0 * secant[n - 2]);
    d
}

/// Variance function sigma^2(t) of the input process.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceModel {
    FractionalBrownian(Fbm),
    NumericTable(TableModel),
}

impl VarianceModel {
    /// Fractional Brownian motion; `hurst` must lie strictly inside (0, 1).
    pub fn fbm(hurst: f64, scale: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst < 1.0) {
            bail!(Parameter, "hurst must lie in (0,1), got {hurst}");
        }
        if !(scale > 0.0 && scale.is_finite()) {
            bail!(Parameter, "scale must be positive, got {scale}");
        }
        Ok(Self::FractionalBrownian(Fbm { hurst, scale }))
    }

    /// Standard Brownian motion, `sigma^2(t) = t`.
    pub fn brownian() -> Self {
        Self::FractionalBrownian(Fbm {
            hurst: 0.5,
            scale: 1.0,
        })
    }

    /// Tabulated variance. Knots are `(t, sigma^2(t))` with both coordinates
    /// strictly increasing and positive.
    pub fn table(
        knots: Vec<(f64, f64)>,
        origin: PowerLaw,
        tail: PowerLaw,
        tolerance: f64,
    ) -> Result<Self> {
        if knots.len() < 2 {
            bail!(Parameter, "table needs at least two knots");
        }
        if !(origin.coefficient > 0.0 && origin.exponent > 0.0 && origin.exponent <= 1.0) {
            bail!(
                Parameter,
                "origin power law needs A0 > 0 and alpha0 in (0,1], got ({}, {})",
                origin.coefficient,
                origin.exponent
            );
        }
        if !(tail.coefficient > 0.0 && tail.exponent > 0.0 && tail.exponent < 1.0) {
            bail!(
                Parameter,
                "tail power law needs A_inf > 0 and alpha_inf in (0,1), got ({}, {})",
                tail.coefficient,
                tail.exponent
            );
        }
        if !(tolerance > 0.0) {
            bail!(Parameter, "table tolerance must be positive");
        }
        for w in knots.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if !(t0 > 0.0 && t1 > t0 && v0 > 0.0 && v1 > v0 && t1.is_finite() && v1.is_finite()) {
                bail!(
                    Parameter,
                    "knots must be positive and strictly increasing in t and sigma^2 near t={t0}"
                );
            }
        }
        let (t_first, v_first) = knots[0];
        let (t_last, v_last) = knots[knots.len() - 1];
        let origin_ratio = v_first / origin.eval(t_first);
        if (origin_ratio - 1.0).abs() > tolerance {
            bail!(
                Parameter,
                "first knot deviates from the origin power law by {:.3e} (tolerance {tolerance})",
                origin_ratio - 1.0
            );
        }
        let tail_ratio = v_last / tail.eval(t_last);
        if (tail_ratio - 1.0).abs() > tolerance {
            bail!(
                Parameter,
                "last knot deviates from the tail power law by {:.3e} (tolerance {tolerance})",
                tail_ratio - 1.0
            );
        }
        let log_t: Vec<f64> = knots.iter().map(|k| log(k.0)).collect();
        let log_v: Vec<f64> = knots.iter().map(|k| log(k.1)).collect();
        let slopes = pchip_slopes(&log_t, &log_v, 2.0 * origin.exponent, 2.0 * tail.exponent);
        Ok(Self::NumericTable(TableModel {
            knots,
            log_t,
            log_v,
            slopes,
            origin,
            tail,
            tolerance,
        }))
    }

    /// `(A0, alpha0)`: sigma^2(t) ~ A0 t^(2 alpha0) as t -> 0.
    pub fn origin(&self) -> PowerLaw {
        match self {
            Self::FractionalBrownian(f) => PowerLaw::new(f.scale, f.hurst),
            Self::NumericTable(t) => t.origin,
        }
    }

    /// `(A_inf, alpha_inf)`: sigma^2(t) ~ A_inf t^(2 alpha_inf) as t -> inf.
    pub fn tail(&self) -> PowerLaw {
        match self {
            Self::FractionalBrownian(f) => PowerLaw::new(f.scale, f.hurst),
            Self::NumericTable(t) => t.tail,
        }
    }

    pub fn as_fbm(&self) -> Option<Fbm> {
        match self {
            Self::FractionalBrownian(f) => Some(*f),
            Self::NumericTable(_) => None,
        }
    }

    /// True for fBm with H = 1/2, i.e. a (scaled) Brownian motion.
    pub fn is_brownian(&self) -> bool {
        matches!(self, Self::FractionalBrownian(f) if f.hurst == 0.5)
    }

    pub fn sigma2(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            bail!(Domain, "sigma2 needs t >= 0, got {t}");
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            Self::FractionalBrownian(f) => f.scale * pow(t, 2.0 * f.hurst),
            Self::NumericTable(tab) => exp(tab.log_eval(log(t)).0),
        })
    }

    pub fn sigma(&self, t: f64) -> Result<f64> {
        self.sigma2(t).map(sqrt)
    }

    /// d ln sigma^2 / d ln t at t > 0 (equals 2H for fBm).
    pub fn log_slope(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            bail!(Domain, "log_slope needs t > 0, got {t}");
        }
        Ok(match self {
            Self::FractionalBrownian(f) => 2.0 * f.hurst,
            Self::NumericTable(tab) => tab.log_eval(log(t)).1,
        })
    }

    /// The t > 0 with sigma(t) = v.
    pub fn sigma_inverse(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) {
            bail!(Domain, "sigma_inverse needs v > 0, got {v}");
        }
        if !v.is_finite() {
            bail!(Range, "sigma_inverse cannot bracket v = {v}");
        }
        match self {
            Self::FractionalBrownian(f) => Ok(pow(v * v / f.scale, 1.0 / (2.0 * f.hurst))),
            Self::NumericTable(tab) => tab.log_inverse(2.0 * log(v)).map(exp),
        }
    }

    /// Cov(X(s), X(t)) = (sigma^2(s) + sigma^2(t) - sigma^2(|t - s|)) / 2.
    pub fn increment_covariance(&self, s: f64, t: f64) -> Result<f64> {
        Ok(0.5 * (self.sigma2(s)? + self.sigma2(t)? - self.sigma2((t - s).abs())?))
    }
}

impl Serialize for VarianceModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            Self::FractionalBrownian(f) => {
                let mut st = serializer.serialize_struct("VarianceModel", 3)?;
                st.serialize_field("kind", "fbm")?;
                st.serialize_field("hurst", &f.hurst)?;
                st.serialize_field("scale", &f.scale)?;
                st.end()
            }
            Self::NumericTable(t) => {
                let mut st = serializer.serialize_struct("VarianceModel", 5)?;
                st.serialize_field("kind", "table")?;
                st.serialize_field("knots", &t.knots)?;
                st.serialize_field("origin", &(t.origin.coefficient, t.origin.exponent))?;
                st.serialize_field("tail", &(t.tail.coefficient, t.tail.exponent))?;
                st.serialize_field("tolerance", &t.tolerance)?;
                st.end()
            }
        }
    }
}
