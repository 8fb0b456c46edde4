//! Parametric horizon families u -> T_u and the closed-form limit taxonomy
//! that selects which asymptotic formula applies.

use libm::{exp, log, pow, sqrt};
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::ext::{self, close};
use crate::gauss::log1m_exp;
use crate::geometry::{point_threshold, sup_threshold, t_peak, t_star, QueueSpec};

/// How the horizon T_u grows with the level u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum HorizonFamily {
    /// T_u = T for every u.
    Fixed {
        #[serde(rename = "T")]
        t: f64,
    },
    /// T_u = kappa u^rho.
    Power { kappa: f64, rho: f64 },
    /// T_u = t_u + delta u^beta.
    Offset { delta: f64, beta: f64 },
    /// T_u = exp(C u^exponent); the exponent defaults to 1 - 2 alpha_inf.
    Exp {
        #[serde(rename = "C")]
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
    },
}

impl HorizonFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Fixed { t } => {
                if !(t > 0.0 && t.is_finite()) {
                    bail!(Parameter, "fixed horizon must be positive, got {t}");
                }
            }
            Self::Power { kappa, rho } => {
                if !(kappa > 0.0 && kappa.is_finite() && rho >= 0.0 && rho.is_finite()) {
                    bail!(Parameter, "power horizon needs kappa > 0 and rho >= 0, got ({kappa}, {rho})");
                }
            }
            Self::Offset { delta, beta } => {
                if !(delta.is_finite() && beta >= 0.0 && beta.is_finite()) {
                    bail!(Parameter, "offset horizon needs finite delta and beta >= 0, got ({delta}, {beta})");
                }
                if delta < 0.0 && beta >= 1.0 {
                    bail!(Parameter, "offset horizon with delta < 0 needs beta < 1, got beta = {beta}");
                }
            }
            Self::Exp { c, exponent } => {
                if !(c > 0.0 && c.is_finite()) {
                    bail!(Parameter, "exponential horizon needs C > 0, got {c}");
                }
                if let Some(p) = exponent {
                    if !(p > 0.0 && p.is_finite()) {
                        bail!(Parameter, "exponential horizon exponent must be positive, got {p}");
                    }
                }
            }
        }
        Ok(())
    }

    fn exp_exponent(spec: &QueueSpec, exponent: Option<f64>) -> Result<f64> {
        let p = exponent.unwrap_or(1.0 - 2.0 * spec.alpha());
        if !(p > 0.0) {
            bail!(
                Parameter,
                "exp(C u^(1-2 alpha)) does not diverge for alpha_inf = {}; give an explicit exponent",
                spec.alpha()
            );
        }
        Ok(p)
    }
}

/// ln T_u, finite even when T_u itself overflows.
pub fn log_horizon_value(family: &HorizonFamily, spec: &QueueSpec, u: f64) -> Result<f64> {
    if let HorizonFamily::Exp { c, exponent } = *family {
        family.validate()?;
        if !(u > 0.0) {
            bail!(Domain, "level u must be positive, got {u}");
        }
        return Ok(c * pow(u, HorizonFamily::exp_exponent(spec, exponent)?));
    }
    horizon_value(family, spec, u).map(log)
}

/// The concrete horizon T_u.
pub fn horizon_value(family: &HorizonFamily, spec: &QueueSpec, u: f64) -> Result<f64> {
    family.validate()?;
    if !(u > 0.0) {
        bail!(Domain, "level u must be positive, got {u}");
    }
    let t = match *family {
        HorizonFamily::Fixed { t } => t,
        HorizonFamily::Power { kappa, rho } => kappa * pow(u, rho),
        HorizonFamily::Offset { delta, beta } => t_peak(spec, u)? + delta * pow(u, beta),
        HorizonFamily::Exp { .. } => {
            let lt = log_horizon_value(family, spec, u)?;
            let t = exp(lt);
            if !t.is_finite() {
                bail!(Range, "horizon T_u = exp({lt}) overflows at u = {u}");
            }
            t
        }
    };
    if !(t > 0.0) {
        bail!(Domain, "horizon T_u = {t} is not positive at u = {u}");
    }
    Ok(t)
}

/// ln(T_u - t_u); a domain error unless T_u > t_u.
pub fn log_horizon_excess(family: &HorizonFamily, spec: &QueueSpec, u: f64) -> Result<f64> {
    let lt = log_horizon_value(family, spec, u)?;
    let ltu = log(t_peak(spec, u)?);
    if !(lt > ltu) {
        bail!(Domain, "horizon does not exceed the optimal epoch at u = {u}");
    }
    Ok(lt + log1m_exp(lt - ltu))
}

/// Which theorem family applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scenario {
    FixedHorizon,
    ShortOmegaZero,
    ShortOmegaFinite,
    ShortOmegaInfinite,
    ModerateFiniteOmega,
    LongInfiniteOmega,
}

impl Scenario {
    pub fn is_short(self) -> bool {
        matches!(
            self,
            Self::ShortOmegaZero | Self::ShortOmegaFinite | Self::ShortOmegaInfinite
        )
    }

    pub fn is_moderate_or_long(self) -> bool {
        matches!(self, Self::ModerateFiniteOmega | Self::LongInfiniteOmega)
    }
}

/// Short-horizon sub-case for a nonempty initial queue, decided by phi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShortBranch {
    PhiZero,
    PhiFiniteAlphaAbove,
    PhiFiniteAlphaHalf,
    PhiInfinite,
}

/// Side of a threshold comparison; `Delegate` when alpha_inf >= 1/2 and the
/// backlog does not enter the asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Threshold {
    Below,
    Equal,
    Above,
    Delegate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum XBranch {
    EmptyQueue,
    Fixed,
    Short(ShortBranch),
    Moderate { point: Threshold, sup: Threshold },
}

/// The realized limits of a horizon family and the branch they select.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub scenario: Scenario,
    /// lim T_u/u.
    #[serde(serialize_with = "ext::serialize")]
    pub gamma: f64,
    /// lim T_u/u^(1/(2 alpha_inf)).
    #[serde(serialize_with = "ext::serialize")]
    pub phi: f64,
    /// lim Omega(u, T_u).
    #[serde(serialize_with = "ext::serialize_opt")]
    pub omega_inf: Option<f64>,
    /// lim (T_u - t_u)/u^alpha_inf.
    #[serde(serialize_with = "ext::serialize_opt")]
    pub omega: Option<f64>,
    /// lim (T_u - t_u)/sqrt(u), reported only for alpha_inf < 1/2.
    #[serde(serialize_with = "ext::serialize_opt")]
    pub vartheta: Option<f64>,
    /// lim ln T_u/u^(1 - 2 alpha_inf), reported only for alpha_inf < 1/2.
    #[serde(serialize_with = "ext::serialize_opt")]
    pub log_horizon_rate: Option<f64>,
    pub x_branch: XBranch,
    pub t3_satisfied: bool,
}

fn compare(a: f64, b: f64) -> core::cmp::Ordering {
    if close(a, b) {
        core::cmp::Ordering::Equal
    } else if a < b {
        core::cmp::Ordering::Less
    } else {
        core::cmp::Ordering::Greater
    }
}

fn threshold_side(value: f64, threshold: f64) -> Threshold {
    match compare(value, threshold) {
        core::cmp::Ordering::Less => Threshold::Below,
        core::cmp::Ordering::Equal => Threshold::Equal,
        core::cmp::Ordering::Greater => Threshold::Above,
    }
}

/// lim Omega(u,T_u) for horizons growing faster than any multiple of u.
fn omega_limit_superlinear(spec: &QueueSpec) -> Result<f64> {
    let a = spec.alpha();
    let tail = spec.model().tail();
    let origin = spec.model().origin();
    let c = spec.c();
    Ok(match compare(a, 0.5) {
        core::cmp::Ordering::Greater => f64::INFINITY,
        core::cmp::Ordering::Equal => {
            c * c / tail.coefficient
                * spec
                    .model()
                    .sigma_inverse(core::f64::consts::SQRT_2 * tail.coefficient / c)?
        }
        core::cmp::Ordering::Less => {
            if origin.exponent < 1.0 {
                0.0
            } else {
                core::f64::consts::SQRT_2 * c / sqrt(origin.coefficient)
            }
        }
    })
}

/// lim Omega(u,T_u) for T_u ~ kappa u^rho.
fn omega_limit(spec: &QueueSpec, kappa: f64, rho: f64) -> Result<f64> {
    if rho > 1.0 && !close(rho, 1.0) {
        return omega_limit_superlinear(spec);
    }
    let a = spec.alpha();
    let tail = spec.model().tail();
    let origin = spec.model().origin();
    let gamma = if close(rho, 1.0) { kappa } else { 0.0 };
    let d = 1.0 + spec.c() * gamma;
    let scale = tail.coefficient * pow(kappa, 2.0 * a);
    Ok(match compare(rho, 1.0 / (2.0 * a)) {
        core::cmp::Ordering::Less => {
            let e = 2.0 - 2.0 * a * rho - rho + (2.0 * a * rho - 1.0) / origin.exponent;
            if e.abs() <= 1e-12 {
                let inner = 2.0 * scale * scale / (d * d * origin.coefficient);
                d * d / scale * pow(inner, 1.0 / (2.0 * origin.exponent)) / kappa
            } else if e < 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        core::cmp::Ordering::Equal => {
            if close(rho, 1.0) {
                let lag = spec
                    .model()
                    .sigma_inverse(core::f64::consts::SQRT_2 * scale / d)?;
                d * d / scale * lag / kappa
            } else {
                f64::INFINITY
            }
        }
        core::cmp::Ordering::Greater => f64::INFINITY,
    })
}

fn phi_of(spec: &QueueSpec, kappa: f64, rho: f64) -> f64 {
    match compare(rho, 1.0 / (2.0 * spec.alpha())) {
        core::cmp::Ordering::Less => 0.0,
        core::cmp::Ordering::Equal => kappa,
        core::cmp::Ordering::Greater => f64::INFINITY,
    }
}

fn fixed_classification(spec: &QueueSpec) -> RegimeClassification {
    RegimeClassification {
        scenario: Scenario::FixedHorizon,
        gamma: 0.0,
        phi: 0.0,
        omega_inf: None,
        omega: None,
        vartheta: None,
        log_horizon_rate: None,
        x_branch: if spec.x() > 0.0 {
            XBranch::Fixed
        } else {
            XBranch::EmptyQueue
        },
        t3_satisfied: true,
    }
}

fn short_classification(
    spec: &QueueSpec,
    gamma: f64,
    phi: f64,
    omega_inf: f64,
) -> RegimeClassification {
    let scenario = if omega_inf == 0.0 {
        Scenario::ShortOmegaZero
    } else if omega_inf.is_infinite() {
        Scenario::ShortOmegaInfinite
    } else {
        Scenario::ShortOmegaFinite
    };
    let x_branch = if spec.x() == 0.0 {
        XBranch::EmptyQueue
    } else if phi == 0.0 {
        XBranch::Short(ShortBranch::PhiZero)
    } else if phi.is_infinite() {
        XBranch::Short(ShortBranch::PhiInfinite)
    } else if close(spec.alpha(), 0.5) {
        XBranch::Short(ShortBranch::PhiFiniteAlphaHalf)
    } else {
        XBranch::Short(ShortBranch::PhiFiniteAlphaAbove)
    };
    RegimeClassification {
        scenario,
        gamma,
        phi,
        omega_inf: Some(omega_inf),
        omega: None,
        vartheta: None,
        log_horizon_rate: None,
        x_branch,
        t3_satisfied: true,
    }
}

struct LongLimits {
    gamma: f64,
    phi: f64,
    omega_inf: f64,
    omega: f64,
    vartheta: f64,
    log_rate: f64,
}

fn moderate_classification(spec: &QueueSpec, l: LongLimits) -> RegimeClassification {
    let below_half = spec.alpha() < 0.5 && !close(spec.alpha(), 0.5);
    let x_branch = if spec.x() == 0.0 {
        XBranch::EmptyQueue
    } else if below_half {
        XBranch::Moderate {
            point: threshold_side(l.vartheta, point_threshold(spec)),
            sup: threshold_side(l.log_rate, sup_threshold(spec)),
        }
    } else {
        XBranch::Moderate {
            point: Threshold::Delegate,
            sup: Threshold::Delegate,
        }
    };
    RegimeClassification {
        scenario: if l.omega.is_infinite() {
            Scenario::LongInfiniteOmega
        } else {
            Scenario::ModerateFiniteOmega
        },
        gamma: l.gamma,
        phi: l.phi,
        omega_inf: Some(l.omega_inf),
        omega: Some(l.omega),
        vartheta: below_half.then_some(l.vartheta),
        log_horizon_rate: below_half.then_some(l.log_rate),
        x_branch,
        t3_satisfied: true,
    }
}

/// Classify the (queue, horizon family) pair by closed-form exponent comparison.
pub fn classify(spec: &QueueSpec, family: &HorizonFamily) -> Result<RegimeClassification> {
    family.validate()?;
    let a = spec.alpha();
    let ts = t_star(spec);
    match *family {
        HorizonFamily::Fixed { .. } => Ok(fixed_classification(spec)),
        HorizonFamily::Power { rho: 0.0, .. } => Ok(fixed_classification(spec)),
        HorizonFamily::Power { kappa, rho } => {
            let linear = close(rho, 1.0);
            let gamma = if linear {
                kappa
            } else if rho < 1.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let phi = phi_of(spec, kappa, rho);
            let omega_inf = omega_limit(spec, kappa, rho)?;
            if linear && close(kappa, ts) {
                bail!(
                    BoundaryRegime,
                    "T_u = {kappa} u has gamma = t*; neither the short nor the moderate horizon theorems apply"
                );
            }
            if gamma < ts {
                return Ok(short_classification(spec, gamma, phi, omega_inf));
            }
            Ok(moderate_classification(
                spec,
                LongLimits {
                    gamma,
                    phi,
                    omega_inf,
                    omega: f64::INFINITY,
                    vartheta: f64::INFINITY,
                    log_rate: 0.0,
                },
            ))
        }
        HorizonFamily::Offset { delta, beta } => {
            let (kappa, rho) = if delta == 0.0 || beta < 1.0 && !close(beta, 1.0) {
                (ts, 1.0)
            } else if close(beta, 1.0) {
                (ts + delta, 1.0)
            } else {
                (delta, beta)
            };
            let gamma = if rho == 1.0 { kappa } else { f64::INFINITY };
            let omega = if delta == 0.0 {
                0.0
            } else {
                match compare(beta, a) {
                    core::cmp::Ordering::Less => 0.0,
                    core::cmp::Ordering::Equal => delta,
                    core::cmp::Ordering::Greater if delta > 0.0 => f64::INFINITY,
                    core::cmp::Ordering::Greater => bail!(
                        BoundaryRegime,
                        "T_u = t_u - {} u^{beta} falls below the optimal epoch faster than u^alpha; gamma = t* with omega = -inf",
                        -delta
                    ),
                }
            };
            let vartheta = if delta == 0.0 {
                0.0
            } else {
                match compare(beta, 0.5) {
                    core::cmp::Ordering::Less => 0.0,
                    core::cmp::Ordering::Equal => delta,
                    core::cmp::Ordering::Greater => delta.signum() * f64::INFINITY,
                }
            };
            Ok(moderate_classification(
                spec,
                LongLimits {
                    gamma,
                    phi: phi_of(spec, kappa, rho),
                    omega_inf: omega_limit(spec, kappa, rho)?,
                    omega,
                    vartheta,
                    log_rate: 0.0,
                },
            ))
        }
        HorizonFamily::Exp { c, exponent } => {
            let p = HorizonFamily::exp_exponent(spec, exponent)?;
            let q = 2.0 * (1.0 - a);
            let tail = spec.model().tail();
            let bound = pow(1.0 + spec.c() * ts, 2.0) / (2.0 * tail.coefficient * pow(ts, 2.0 * a));
            let t3 = match compare(p, q) {
                core::cmp::Ordering::Less => true,
                core::cmp::Ordering::Equal => c < bound && !close(c, bound),
                core::cmp::Ordering::Greater => false,
            };
            if !t3 {
                bail!(
                    T3Violation,
                    "T_u = exp({c} u^{p}) is not o(exp(beta u^{q})) for any beta below {bound}"
                );
            }
            let log_rate = match compare(p, 1.0 - 2.0 * a) {
                core::cmp::Ordering::Less => 0.0,
                core::cmp::Ordering::Equal => c,
                core::cmp::Ordering::Greater => f64::INFINITY,
            };
            Ok(moderate_classification(
                spec,
                LongLimits {
                    gamma: f64::INFINITY,
                    phi: f64::INFINITY,
                    omega_inf: omega_limit_superlinear(spec)?,
                    omega: f64::INFINITY,
                    vartheta: f64::INFINITY,
                    log_rate,
                },
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::variance::VarianceModel;

    fn spec(h: f64, c: f64, x: f64) -> QueueSpec {
        QueueSpec::new(c, x, VarianceModel::fbm(h, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn brownian_short_power_law() {
        let r = classify(&spec(0.5, 1.0, 0.0), &HorizonFamily::Power { kappa: 1.0, rho: 0.8 }).unwrap();
        assert_eq!(r.scenario, Scenario::ShortOmegaFinite);
        assert_eq!(r.gamma, 0.0);
        assert_eq!(r.phi, 0.0);
        assert!((r.omega_inf.unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.x_branch, XBranch::EmptyQueue);
    }

    #[test]
    fn offset_matching_alpha_is_moderate() {
        let r = classify(&spec(0.5, 1.0, 0.0), &HorizonFamily::Offset { delta: 2.0, beta: 0.5 }).unwrap();
        assert_eq!(r.scenario, Scenario::ModerateFiniteOmega);
        assert_eq!(r.omega, Some(2.0));
    }

    #[test]
    fn exp_scale_below_sup_threshold() {
        let r = classify(&spec(0.25, 1.0, 1.0), &HorizonFamily::Exp { c: 1.0, exponent: None }).unwrap();
        assert_eq!(r.scenario, Scenario::LongInfiniteOmega);
        assert_eq!(
            r.x_branch,
            XBranch::Moderate {
                point: Threshold::Above,
                sup: Threshold::Below
            }
        );
        let s = spec(0.25, 1.0, 1.0);
        assert!((sup_threshold(&s) - 4.0 / sqrt(3.0)).abs() < 1e-12);
    }

    #[test]
    fn boundary_gamma_is_rejected() {
        let r = classify(&spec(0.5, 1.0, 0.0), &HorizonFamily::Power { kappa: 1.0, rho: 1.0 });
        assert!(matches!(r, Err(Error::BoundaryRegime(_))));
        let r = classify(&spec(0.5, 1.0, 0.0), &HorizonFamily::Power { kappa: 1.5, rho: 1.0 }).unwrap();
        assert_eq!(r.scenario, Scenario::LongInfiniteOmega);
        assert_eq!(r.gamma, 1.5);
    }

    #[test]
    fn t3_violation() {
        let s = spec(0.5, 1.0, 0.0);
        let r = classify(&s, &HorizonFamily::Exp { c: 1.0, exponent: Some(1.5) });
        assert!(matches!(r, Err(Error::T3Violation(_))));
        // exponent 2(1 - alpha) = 1 with C at the bound (1 + 1)^2/2 = 2
        let r = classify(&s, &HorizonFamily::Exp { c: 2.0, exponent: Some(1.0) });
        assert!(matches!(r, Err(Error::T3Violation(_))));
        let r = classify(&s, &HorizonFamily::Exp { c: 1.9, exponent: Some(1.0) }).unwrap();
        assert_eq!(r.scenario, Scenario::LongInfiniteOmega);
        let r = classify(&s, &HorizonFamily::Exp { c: 1.0, exponent: None });
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn horizon_values() {
        let s = spec(0.5, 1.0, 0.0);
        assert_eq!(horizon_value(&HorizonFamily::Fixed { t: 50.0 }, &s, 10.0).unwrap(), 50.0);
        assert!((horizon_value(&HorizonFamily::Power { kappa: 2.0, rho: 0.5 }, &s, 100.0).unwrap() - 20.0).abs() < 1e-12);
        assert!((horizon_value(&HorizonFamily::Offset { delta: -3.0, beta: 0.5 }, &s, 100.0).unwrap() - 70.0).abs() < 1e-12);
        let f = HorizonFamily::Exp { c: 1.0, exponent: Some(1.0) };
        assert!(matches!(horizon_value(&f, &s, 1e4), Err(Error::Range(_))));
        assert_eq!(log_horizon_value(&f, &s, 1e4).unwrap(), 1e4);
        let ex = log_horizon_excess(&f, &s, 1e4).unwrap();
        assert!((ex - 1e4).abs() < 1e-9);
    }

    #[test]
    fn short_x_branches() {
        let r = classify(&spec(0.5, 1.0, 1.0), &HorizonFamily::Power { kappa: 0.5, rho: 1.0 }).unwrap();
        assert_eq!(r.phi, 0.5);
        assert_eq!(r.x_branch, XBranch::Short(ShortBranch::PhiFiniteAlphaHalf));
        let r = classify(&spec(0.75, 1.0, 1.0), &HorizonFamily::Power { kappa: 1.0, rho: 0.5 }).unwrap();
        assert_eq!(r.phi, 0.0);
        assert_eq!(r.x_branch, XBranch::Short(ShortBranch::PhiZero));
        let r = classify(&spec(0.75, 1.0, 1.0), &HorizonFamily::Power { kappa: 1.0, rho: 2.0 / 3.0 }).unwrap();
        assert_eq!(r.phi, 1.0);
        assert_eq!(r.x_branch, XBranch::Short(ShortBranch::PhiFiniteAlphaAbove));
        assert_eq!(r.scenario, Scenario::ShortOmegaInfinite);
        let r = classify(&spec(0.75, 1.0, 1.0), &HorizonFamily::Power { kappa: 1.0, rho: 0.9 }).unwrap();
        assert_eq!(r.x_branch, XBranch::Short(ShortBranch::PhiInfinite));
        assert_eq!(r.omega_inf, Some(f64::INFINITY));
    }
}
