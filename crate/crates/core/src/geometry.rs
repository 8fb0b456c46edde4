//! Deterministic geometry of the overload problem: the standardized boundary
//! m(u,t) = (u + ct)/sigma(t), its minimizer, the local time scale Delta, and
//! the expansion coefficients around the optimal epoch.

use libm::{expm1, log, pow, sqrt};
use serde::Serialize;

use crate::error::{bail, Error, Result};
use crate::roots::bisect;
use crate::variance::VarianceModel;

/// A fluid queue with drain rate `c`, initial backlog `x` and Gaussian input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueSpec {
    c: f64,
    x: f64,
    model: VarianceModel,
}

impl QueueSpec {
    pub fn new(c: f64, x: f64, model: VarianceModel) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            bail!(Parameter, "drain rate c must be positive, got {c}");
        }
        if !(x >= 0.0 && x.is_finite()) {
            bail!(Parameter, "initial backlog x must be nonnegative, got {x}");
        }
        Ok(Self { c, x, model })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn model(&self) -> &VarianceModel {
        &self.model
    }

    /// Same queue with a different initial backlog.
    pub fn with_x(&self, x: f64) -> Result<Self> {
        Self::new(self.c, x, self.model.clone())
    }

    /// alpha_inf, the tail exponent of sigma.
    pub fn alpha(&self) -> f64 {
        self.model.tail().exponent
    }
}

/// Snapshot of the geometry at the optimal epoch for a given level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryReport {
    pub u: f64,
    pub t_star: f64,
    pub t_u: f64,
    pub m_at_peak: f64,
    pub delta_at_peak: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) {
        bail!(Domain, "{name} must be positive, got {v}");
    }
    Ok(())
}

/// ln m(u,t).
pub fn log_m(spec: &QueueSpec, u: f64, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    Ok(log(u + spec.c * t) - 0.5 * log(spec.model.sigma2(t)?))
}

/// m(u,t) = (u + ct)/sigma(t).
pub fn m(spec: &QueueSpec, u: f64, t: f64) -> Result<f64> {
    check_positive("t", t)?;
    Ok((u + spec.c * t) / spec.model.sigma(t)?)
}

/// t* = alpha/(c(1 - alpha)), the limit of t_u/u.
pub fn t_star(spec: &QueueSpec) -> f64 {
    let a = spec.alpha();
    a / (spec.c * (1.0 - a))
}

/// The minimizer t_u of m(u, .).
///
/// Closed form t* u for fBm. For tabulated variances the stationarity
/// condition d ln m / d ln t = 0 is solved by bisection in ln t on
/// [t* u/10, 10 t* u]; a missing sign change there is a numeric error.
pub fn t_peak(spec: &QueueSpec, u: f64) -> Result<f64> {
    check_positive("u", u)?;
    let ts = t_star(spec);
    if spec.model.as_fbm().is_some() {
        return Ok(ts * u);
    }
    let c = spec.c;
    let model = &spec.model;
    let dlogm = |lt: f64| {
        let t = libm::exp(lt);
        let slope = model.log_slope(t).unwrap_or(f64::NAN);
        c * t / (u + c * t) - 0.5 * slope
    };
    let centre = log(ts * u);
    let ln10 = core::f64::consts::LN_10;
    let root = bisect(dlogm, centre - ln10, centre + ln10, 1e-12).map_err(|_| {
        Error::Numeric(alloc::format!(
            "minimizer of m(u,.) not bracketed by [t*u/10, 10t*u] at u={u}"
        ))
    })?;
    Ok(libm::exp(root))
}

/// Delta(u,s) = sigma_inverse(sqrt(2) sigma^2(s)/(u + cs)).
pub fn delta(spec: &QueueSpec, u: f64, s: f64) -> Result<f64> {
    check_positive("u", u)?;
    check_positive("s", s)?;
    let v = core::f64::consts::SQRT_2 * spec.model.sigma2(s)? / (u + spec.c * s);
    spec.model.sigma_inverse(v)
}

/// Omega(u,T) = m(u,T)^2 Delta(u,T)/T.
pub fn omega_ratio(spec: &QueueSpec, u: f64, t: f64) -> Result<f64> {
    let mm = m(spec, u, t)?;
    Ok(mm * mm * delta(spec, u, t)? / t)
}

/// The constants (A, B) of the quadratic expansion of m around t*.
pub fn ab_constants(spec: &QueueSpec) -> (f64, f64) {
    let a = spec.alpha();
    let ts = t_star(spec);
    (pow(ts, -a) / (1.0 - a), pow(ts, -a - 2.0) * a)
}

pub fn geometry_report(spec: &QueueSpec, u: f64) -> Result<GeometryReport> {
    let t_u = t_peak(spec, u)?;
    let (a, b) = ab_constants(spec);
    Ok(GeometryReport {
        u,
        t_star: t_star(spec),
        t_u,
        m_at_peak: m(spec, u, t_u)?,
        delta_at_peak: delta(spec, u, t_u)?,
        a,
        b,
    })
}

const FD_STEP: f64 = 1e-4;

/// a_u: the coefficient of (1 - t) in 1 - m(u,T)/m(u,Tt) at t = 1.
pub fn local_slope_a(spec: &QueueSpec, u: f64, horizon: f64) -> Result<f64> {
    check_positive("u", u)?;
    let base = log_m(spec, u, horizon)?;
    let f = |t: f64| -> Result<f64> { Ok(-expm1(base - log_m(spec, u, horizon * t)?)) };
    let central = |h: f64| -> Result<f64> { Ok((f(1.0 + h)? - f(1.0 - h)?) / (2.0 * h)) };
    let d1 = central(FD_STEP)?;
    let d2 = central(0.5 * FD_STEP)?;
    Ok(-(4.0 * d2 - d1) / 3.0)
}

/// b_u: the coefficient of (t - t_u/u)^2 in 1 - m(u,t_u)/m(u,ut).
pub fn local_curvature_b(spec: &QueueSpec, u: f64) -> Result<f64> {
    check_positive("u", u)?;
    let t0 = t_peak(spec, u)? / u;
    let base = log_m(spec, u, t0 * u)?;
    let g = |t: f64| -> Result<f64> { Ok(-expm1(base - log_m(spec, u, u * t)?)) };
    let second = |h: f64| -> Result<f64> {
        Ok((g(t0 + h)? - 2.0 * g(t0)? + g(t0 - h)?) / (h * h))
    };
    let h = FD_STEP * t0;
    let s1 = second(h)?;
    let s2 = second(0.5 * h)?;
    Ok(0.5 * (4.0 * s2 - s1) / 3.0)
}

/// sqrt(2 A/B (1 - alpha) x), the threshold for the offset-from-peak scale
/// at which the initial backlog stops mattering for the point probability.
pub fn point_threshold(spec: &QueueSpec) -> f64 {
    let (a, b) = ab_constants(spec);
    sqrt(2.0 * a / b * (1.0 - spec.alpha()) * spec.x)
}

/// (1 + ct*) x/(A_inf t*^(2 alpha)), the threshold for lim ln T_u / u^(1-2 alpha)
/// above which the backlog stops mattering for the supremum probability.
pub fn sup_threshold(spec: &QueueSpec) -> f64 {
    let ts = t_star(spec);
    let tail = spec.model.tail();
    (1.0 + spec.c * ts) * spec.x / (tail.coefficient * pow(ts, 2.0 * tail.exponent))
}
