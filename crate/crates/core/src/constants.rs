//! Pickands and Piterbarg constants: which limiting process a formula needs,
//! closed forms where they exist, and the lookup contract for estimated ones.

use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

use libm::{exp, pow, sqrt};
use serde::Serialize;

use crate::error::{bail, Error, Result};
use crate::geometry::{t_star, QueueSpec};
use crate::regimes::RegimeClassification;
use crate::variance::VarianceModel;

/// The Gaussian process underlying a limiting process.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaseProcess {
    /// Standard fBm B_H with Var B_H(t) = t^(2H), H in (0, 1]; H = 1 is t N.
    Fbm { hurst: f64 },
    /// The queue's own input process.
    Input { model: VarianceModel },
}

/// Z(t) = premultiplier * base(time_change * t).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitProcessSpec {
    pub base: BaseProcess,
    pub premultiplier: f64,
    pub time_change: f64,
}

impl LimitProcessSpec {
    pub fn fbm(hurst: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            bail!(Parameter, "limiting fBm needs hurst in (0,1], got {hurst}");
        }
        Ok(Self {
            base: BaseProcess::Fbm { hurst },
            premultiplier: 1.0,
            time_change: 1.0,
        })
    }

    pub fn scaled_input(model: VarianceModel, premultiplier: f64, time_change: f64) -> Result<Self> {
        if !(premultiplier > 0.0 && time_change > 0.0) {
            bail!(
                Parameter,
                "premultiplier and time change must be positive, got ({premultiplier}, {time_change})"
            );
        }
        Ok(Self {
            base: BaseProcess::Input { model },
            premultiplier,
            time_change,
        })
    }

    /// Var Z(t).
    pub fn variance(&self, t: f64) -> Result<f64> {
        let s = self.time_change * t;
        let base = match &self.base {
            BaseProcess::Fbm { hurst } => {
                if s < 0.0 {
                    bail!(Domain, "variance needs t >= 0, got {t}");
                }
                pow(s, 2.0 * hurst)
            }
            BaseProcess::Input { model } => model.sigma2(s)?,
        };
        Ok(self.premultiplier * self.premultiplier * base)
    }

    /// Hurst index of the self-similar base, if the base is (a scaled) fBm.
    pub fn hurst(&self) -> Option<f64> {
        match &self.base {
            BaseProcess::Fbm { hurst } => Some(*hurst),
            BaseProcess::Input { model } => model.as_fbm().map(|f| f.hurst()),
        }
    }

    /// Variance of Z(1) for self-similar bases: Var Z(t) = k t^(2H).
    pub fn variance_coefficient(&self) -> Option<f64> {
        let h = self.hurst()?;
        let scale = match &self.base {
            BaseProcess::Fbm { .. } => 1.0,
            BaseProcess::Input { model } => model.as_fbm()?.scale(),
        };
        Some(self.premultiplier * self.premultiplier * scale * pow(self.time_change, 2.0 * h))
    }

    /// v when Z is sqrt(v) times a standard Brownian motion.
    pub fn brownian_rate(&self) -> Option<f64> {
        if self.hurst()? == 0.5 {
            self.variance_coefficient()
        } else {
            None
        }
    }
}

impl fmt::Display for LimitProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            BaseProcess::Fbm { hurst } => write!(f, "B_{hurst}")?,
            BaseProcess::Input { model } => match model.as_fbm() {
                Some(fbm) => write!(f, "X[fbm H={} scale={}]", fbm.hurst(), fbm.scale())?,
                None => write!(f, "X[table]")?,
            },
        }
        if self.premultiplier != 1.0 || self.time_change != 1.0 {
            write!(f, " x{} at time x{}", self.premultiplier, self.time_change)?;
        }
        Ok(())
    }
}

/// Which functional of the limiting process is wanted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstantKind {
    /// lim E exp(sup_[0,S] (sqrt2 Z - Var Z)) / S.
    Pickands,
    /// E exp(sup_[0,inf) (sqrt2 Z - Var Z - d t)).
    Piterbarg { d: f64 },
    /// E exp(max(a, sup (sqrt2 Z - Var Z - d t))).
    PiterbargA { d: f64, a: f64 },
    /// E exp(max(a + sup Z*, sup Z* + sup Z~*)) with an independent copy Z~.
    PiterbargTilde { d: f64, a: f64 },
}

/// A constant that a formula needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantQuery {
    pub kind: ConstantKind,
    pub process: LimitProcessSpec,
}

impl fmt::Display for ConstantQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ConstantKind::Pickands => write!(f, "pickands over {}", self.process),
            ConstantKind::Piterbarg { d } => write!(f, "piterbarg d={d} over {}", self.process),
            ConstantKind::PiterbargA { d, a } => {
                write!(f, "piterbarg-a d={d} a={a} over {}", self.process)
            }
            ConstantKind::PiterbargTilde { d, a } => {
                write!(f, "piterbarg-tilde d={d} a={a} over {}", self.process)
            }
        }
    }
}

/// A Monte Carlo estimate of a constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "S")]
    pub horizon: f64,
    #[serde(rename = "step")]
    pub grid_step: f64,
    #[serde(rename = "reps")]
    pub replications: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum ConstantValue {
    Exact { value: f64 },
    Estimated(ConstantEstimate),
}

impl ConstantValue {
    pub fn value(&self) -> f64 {
        match self {
            Self::Exact { value } => *value,
            Self::Estimated(e) => e.value,
        }
    }
}

/// A constant as it entered a formula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantUse {
    pub name: String,
    pub query: ConstantQuery,
    #[serde(flatten)]
    pub value: ConstantValue,
}

/// Supplies constants without a closed form, typically from a cache of
/// Monte Carlo estimates.
pub trait ConstantSource {
    fn lookup(&self, query: &ConstantQuery) -> Option<ConstantValue>;
}

/// A source that knows nothing beyond the closed forms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedFormsOnly;

impl ConstantSource for ClosedFormsOnly {
    fn lookup(&self, _query: &ConstantQuery) -> Option<ConstantValue> {
        None
    }
}

/// Exact values of the Piterbarg functionals for a Brownian motion with unit
/// variance rate and drift d t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BrownianConstants {
    pub piterbarg: f64,
    pub piterbarg_a: f64,
    pub piterbarg_tilde: f64,
}

// With lambda = 1 + d, sup_t (sqrt2 W(t) - (1 + d) t) is Exp(lambda).
fn exp_sup_mean(lambda: f64) -> f64 {
    lambda / (lambda - 1.0)
}

fn exp_sup_floor_mean(lambda: f64, a: f64) -> f64 {
    if a <= 0.0 {
        return exp_sup_mean(lambda);
    }
    exp(a) * (1.0 - exp(-lambda * a)) + lambda / (lambda - 1.0) * exp(-(lambda - 1.0) * a)
}

pub fn brownian_constant_oracles(d: f64, a: f64) -> Result<BrownianConstants> {
    if !(d > 0.0) {
        bail!(Domain, "drift d must be positive, got {d}");
    }
    let lambda = 1.0 + d;
    let p = exp_sup_mean(lambda);
    let pa = exp_sup_floor_mean(lambda, a);
    // max(a + M1, M1 + M2) = M1 + max(a, M2) with M1, M2 independent
    Ok(BrownianConstants {
        piterbarg: p,
        piterbarg_a: pa,
        piterbarg_tilde: p * pa,
    })
}

/// Closed form of a constant, when the limiting process allows one.
pub fn closed_form(query: &ConstantQuery) -> Option<f64> {
    let proc = &query.process;
    if let Some(v) = proc.brownian_rate() {
        // sqrt(v) B(t) on [0, S] is B on [0, v S]; drift d t becomes (d/v) s
        return match query.kind {
            ConstantKind::Pickands => Some(v),
            ConstantKind::Piterbarg { d } if d > 0.0 => Some(exp_sup_mean(1.0 + d / v)),
            ConstantKind::PiterbargA { d, a } if d > 0.0 => {
                Some(exp_sup_floor_mean(1.0 + d / v, a))
            }
            ConstantKind::PiterbargTilde { d, a } if d > 0.0 => {
                let lambda = 1.0 + d / v;
                Some(exp_sup_mean(lambda) * exp_sup_floor_mean(lambda, a))
            }
            _ => None,
        };
    }
    if proc.hurst() == Some(1.0) {
        if let (ConstantKind::Pickands, Some(k)) = (query.kind, proc.variance_coefficient()) {
            // k^(1/2) t N is B_1 run at speed sqrt(k)
            return Some(sqrt(k) / sqrt(core::f64::consts::PI));
        }
    }
    None
}

/// Closed form first, then the source; otherwise the query is reported back.
pub fn resolve(
    name: &str,
    query: ConstantQuery,
    source: &dyn ConstantSource,
) -> Result<ConstantUse> {
    let value = match closed_form(&query) {
        Some(value) => ConstantValue::Exact { value },
        None => match source.lookup(&query) {
            Some(v) => v,
            None => return Err(Error::ConstantRequired(Box::new(query))),
        },
    };
    Ok(ConstantUse {
        name: String::from(name),
        query,
        value,
    })
}

/// The process mu_phi of the short-horizon formulas (phi < inf) or the
/// process eta of the moderate/long-horizon formulas.
pub fn limiting_process(
    spec: &QueueSpec,
    classification: &RegimeClassification,
) -> Result<LimitProcessSpec> {
    let model = spec.model();
    let a = spec.alpha();
    let tail = model.tail();
    let (scale_time, gamma) = if classification.scenario.is_short() {
        let phi = classification.phi;
        if phi == 0.0 {
            return LimitProcessSpec::fbm(model.origin().exponent);
        }
        if phi.is_infinite() {
            return LimitProcessSpec::fbm(a);
        }
        (phi, classification.gamma)
    } else if classification.scenario.is_moderate_or_long() {
        let ts = t_star(spec);
        if a < 0.5 {
            return LimitProcessSpec::fbm(model.origin().exponent);
        }
        if a > 0.5 {
            return LimitProcessSpec::fbm(a);
        }
        (ts, ts)
    } else {
        bail!(
            UnsupportedBranch,
            "no limiting process is attached to a fixed horizon"
        );
    };
    let r = core::f64::consts::SQRT_2 * tail.coefficient * pow(scale_time, 2.0 * a)
        / (1.0 + spec.c() * gamma);
    LimitProcessSpec::scaled_input(model.clone(), 1.0 / r, model.sigma_inverse(r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regimes::{classify, HorizonFamily};

    fn spec(h: f64, c: f64) -> QueueSpec {
        QueueSpec::new(c, 0.0, VarianceModel::fbm(h, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn oracle_examples() {
        let b = brownian_constant_oracles(1.0, 0.0).unwrap();
        assert_eq!(b.piterbarg, 2.0);
        assert_eq!(b.piterbarg_a, 2.0);
        let b = brownian_constant_oracles(1.0, core::f64::consts::LN_2).unwrap();
        assert!((b.piterbarg_a - 2.5).abs() < 1e-14);
        assert!((brownian_constant_oracles(3.0, 0.0).unwrap().piterbarg - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(brownian_constant_oracles(0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn floor_mean_matches_quadrature() {
        // E exp(max(a, M)) for M ~ Exp(lambda) by direct integration
        for &(lambda, a) in &[(2.0, 0.7), (4.0 / 3.0, 3.0), (1.5, 0.0)] {
            let (q, _) = crate::quad::integrate(
                |m: f64| lambda * exp(-lambda * m) * exp(if m > a { m } else { a }),
                0.0,
                200.0,
                1e-13,
            )
            .unwrap();
            assert!((q - exp_sup_floor_mean(lambda, a)).abs() < 1e-9 * q);
        }
    }

    #[test]
    fn tilde_matches_two_dimensional_quadrature() {
        // E exp(max(1 + M1, M1 + M2)), M1, M2 ~ Exp(2); the m2-integrand kinks at m2 = 1
        let lambda: f64 = 2.0;
        let inner = |m1: f64| {
            let f = |m2: f64| {
                let v = if 1.0 + m1 > m1 + m2 { 1.0 + m1 } else { m1 + m2 };
                lambda * exp(-lambda * m2) * exp(v)
            };
            let tol = 1e-14 * exp(1.0 + m1);
            crate::quad::integrate(f, 0.0, 1.0, tol).unwrap().0
                + crate::quad::integrate(f, 1.0, 80.0, tol).unwrap().0
        };
        let (q, _) = crate::quad::integrate(
            |m1: f64| lambda * exp(-lambda * m1) * inner(m1),
            0.0,
            80.0,
            1e-12,
        )
        .unwrap();
        let exact = brownian_constant_oracles(1.0, 1.0).unwrap().piterbarg_tilde;
        assert!((q - exact).abs() < 1e-9 * exact, "{q} vs {exact}");
    }

    #[test]
    fn eta_is_standard_brownian_for_half() {
        let s = spec(0.5, 1.0);
        let r = classify(&s, &HorizonFamily::Offset { delta: 0.0, beta: 0.0 }).unwrap();
        let p = limiting_process(&s, &r).unwrap();
        assert!((p.premultiplier - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((p.time_change - 0.5).abs() < 1e-15);
        assert!((p.variance(3.0).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(p.brownian_rate().map(|v| (v - 1.0).abs() < 1e-15), Some(true));
        // any drain rate gives unit variance rate
        let s = spec(0.5, 2.7);
        let r = classify(&s, &HorizonFamily::Offset { delta: 1.0, beta: 0.5 }).unwrap();
        let p = limiting_process(&s, &r).unwrap();
        assert!((p.brownian_rate().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn selector_picks_fbm_bases() {
        let s = spec(0.75, 1.0);
        let r = classify(&s, &HorizonFamily::Power { kappa: 1.0, rho: 0.2 }).unwrap();
        assert_eq!(r.phi, 0.0);
        assert_eq!(limiting_process(&s, &r).unwrap(), LimitProcessSpec::fbm(0.75).unwrap());
        let s = spec(0.3, 1.0);
        let r = classify(&s, &HorizonFamily::Offset { delta: 1.0, beta: 0.3 }).unwrap();
        assert_eq!(limiting_process(&s, &r).unwrap(), LimitProcessSpec::fbm(0.3).unwrap());
    }

    #[test]
    fn closed_forms() {
        let q = |kind, process| ConstantQuery { kind, process };
        let bm = LimitProcessSpec::fbm(0.5).unwrap();
        assert_eq!(closed_form(&q(ConstantKind::Pickands, bm.clone())), Some(1.0));
        assert_eq!(closed_form(&q(ConstantKind::Piterbarg { d: 1.0 }, bm.clone())), Some(2.0));
        let b1 = LimitProcessSpec::fbm(1.0).unwrap();
        let h = closed_form(&q(ConstantKind::Pickands, b1)).unwrap();
        assert!((h - 0.564_189_583_547_756_3).abs() < 1e-15);
        assert_eq!(closed_form(&q(ConstantKind::Pickands, LimitProcessSpec::fbm(0.3).unwrap())), None);
        let err = resolve("H", q(ConstantKind::Pickands, LimitProcessSpec::fbm(0.3).unwrap()), &ClosedFormsOnly);
        assert!(matches!(err, Err(Error::ConstantRequired(_))));
    }
}
