//! Log-space evaluation of the exact asymptotics of the transient overload
//! probabilities pi_{x,T_u}(u) = P(Q(T_u) > u) and
//! pi^sup_{x,T_u}(u) = P(sup_{[0,T_u]} Q > u).
//!
//! Formulas that state one probability is equivalent to another are
//! evaluated by delegation and record the evaluator they delegated to.

use alloc::vec::Vec;
use core::fmt;

use libm::{log, pow, sqrt};
use serde::{Deserialize, Serialize, Serializer};

use crate::constants::{
    limiting_process, resolve, ConstantKind, ConstantQuery, ConstantSource, ConstantUse,
    LimitProcessSpec,
};
use crate::error::{bail, Error, Result};
use crate::ext;
use crate::gauss::{gauss_cdf, gauss_cdf_log, gauss_tail_log, log_sum_exp};
use crate::geometry::{ab_constants, delta, m, omega_ratio, t_peak, t_star, QueueSpec};
use crate::quad::integrate_lower_semi_infinite;
use crate::regimes::{
    classify, horizon_value, log_horizon_excess, log_horizon_value, HorizonFamily,
    RegimeClassification, Scenario, ShortBranch, Threshold, XBranch,
};

/// Which formula produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulaId {
    FixedHorizon,
    ShortEmpty(Roman),
    ShortEmptySup(Roman),
    ShortBacklog(ShortBranch),
    ShortBacklogSup(ShortBranch),
    ModerateEmpty,
    ModerateEmptySup(Roman),
    ModerateBacklog(Threshold),
    ModerateBacklogSup(Threshold),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Roman {
    I,
    II,
    III,
}

impl Roman {
    fn as_str(self) -> &'static str {
        match self {
            Self::I => "i",
            Self::II => "ii",
            Self::III => "iii",
        }
    }
}

impl FormulaId {
    pub fn as_str(&self) -> &'static str {
        use FormulaId::*;
        match *self {
            FixedHorizon => "p.T",
            ShortEmpty(r) => ["submain1-i", "submain1-ii", "submain1-iii"][r as usize],
            ShortEmptySup(r) => ["submain2-i", "submain2-ii", "submain2-iii"][r as usize],
            ShortBacklog(b) => match b {
                ShortBranch::PhiZero => "nth1-i",
                ShortBranch::PhiFiniteAlphaAbove => "nth1-ii-above",
                ShortBranch::PhiFiniteAlphaHalf => "nth1-ii-half",
                ShortBranch::PhiInfinite => "nth1-iii",
            },
            ShortBacklogSup(b) => match b {
                ShortBranch::PhiZero => "nth2-i",
                ShortBranch::PhiFiniteAlphaAbove => "nth2-ii-above",
                ShortBranch::PhiFiniteAlphaHalf => "nth2-ii-half",
                ShortBranch::PhiInfinite => "nth2-iii",
            },
            ModerateEmpty => "th.0.2",
            ModerateEmptySup(r) => match r {
                Roman::I => "nth-i",
                _ => "nth-ii",
            },
            ModerateBacklog(t) => match t {
                Threshold::Below => "nth3-below",
                Threshold::Equal => "nth3-equal",
                Threshold::Above => "nth3-above",
                Threshold::Delegate => "nth3-ii",
            },
            ModerateBacklogSup(t) => match t {
                Threshold::Below => "nth4-below",
                Threshold::Equal => "nth4-equal",
                Threshold::Above => "nth4-above",
                Threshold::Delegate => "nth4-ii",
            },
        }
    }
}

impl fmt::Display for FormulaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for FormulaId {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Which probability to approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// pi_{x,T}(u) = P(Q(T) > u).
    Point,
    /// pi^sup_{x,T}(u) = P(sup_{[0,T]} Q > u).
    Sup,
}

/// A log-scale approximation with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticEstimate {
    pub log_value: f64,
    pub formula_id: FormulaId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delegated_to: Option<FormulaId>,
    pub regime: RegimeClassification,
    pub constants_used: Vec<ConstantUse>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_decomposition: Option<(f64, f64)>,
}

impl AsymptoticEstimate {
    pub fn value(&self) -> f64 {
        libm::exp(self.log_value)
    }
}

struct Eval {
    log_value: f64,
    id: FormulaId,
    delegated_to: Option<FormulaId>,
    sum: Option<(f64, f64)>,
}

impl Eval {
    fn plain(log_value: f64, id: FormulaId) -> Self {
        Self {
            log_value,
            id,
            delegated_to: None,
            sum: None,
        }
    }

    fn delegate(inner: Eval, id: FormulaId) -> Self {
        Self {
            log_value: inner.log_value,
            id,
            delegated_to: Some(inner.delegated_to.unwrap_or(inner.id)),
            sum: inner.sum,
        }
    }

    fn sum(a: f64, b: f64, id: FormulaId) -> Self {
        Self {
            log_value: log_sum_exp(a, b),
            id,
            delegated_to: None,
            sum: Some((a, b)),
        }
    }
}

struct Ctx<'a> {
    spec: &'a QueueSpec,
    family: &'a HorizonFamily,
    class: RegimeClassification,
    source: &'a dyn ConstantSource,
    used: Vec<ConstantUse>,
}

impl<'a> Ctx<'a> {
    fn new(
        spec: &'a QueueSpec,
        family: &'a HorizonFamily,
        source: &'a dyn ConstantSource,
    ) -> Result<Self> {
        Ok(Self {
            spec,
            family,
            class: classify(spec, family)?,
            source,
            used: Vec::new(),
        })
    }

    fn constant(&mut self, name: &str, kind: ConstantKind, process: LimitProcessSpec) -> Result<f64> {
        let c = resolve(name, ConstantQuery { kind, process }, self.source)?;
        let v = c.value.value();
        if !self.used.contains(&c) {
            self.used.push(c);
        }
        if !(v > 0.0 && v.is_finite()) {
            bail!(Numeric, "constant {name} has non-positive value {v}");
        }
        Ok(v)
    }

    fn finish(self, e: Eval) -> Result<AsymptoticEstimate> {
        if !e.log_value.is_finite() {
            bail!(Numeric, "formula {} produced log value {}", e.id, e.log_value);
        }
        Ok(AsymptoticEstimate {
            log_value: e.log_value,
            formula_id: e.id,
            delegated_to: e.delegated_to,
            regime: self.class,
            constants_used: self.used,
            sum_decomposition: e.sum,
        })
    }

    fn require_short(&self) -> Result<()> {
        if !self.class.scenario.is_short() {
            bail!(
                UnsupportedBranch,
                "short-horizon formulas need gamma < t*, classified as {:?}",
                self.class.scenario
            );
        }
        Ok(())
    }

    fn require_moderate(&self) -> Result<()> {
        if !self.class.scenario.is_moderate_or_long() {
            bail!(
                UnsupportedBranch,
                "moderate/long-horizon formulas need the offset limit omega, classified as {:?}",
                self.class.scenario
            );
        }
        Ok(())
    }

    fn require_backlog(&self) -> Result<()> {
        if self.spec.x() <= 0.0 {
            bail!(UnsupportedBranch, "backlog formulas need x > 0");
        }
        Ok(())
    }

    /// alpha_inf - c gamma/(1 + c gamma).
    fn local_slope(&self) -> f64 {
        let cg = self.spec.c() * self.class.gamma;
        self.spec.alpha() - cg / (1.0 + cg)
    }

    /// Short-horizon empty-queue formula at `level` with horizon `horizon`;
    /// constants and prefactors are squared for the supremum.
    fn short_empty(&mut self, level: f64, horizon: f64, sup: bool) -> Result<Eval> {
        let k = if sup { 2.0 } else { 1.0 };
        let ln_psi = gauss_tail_log(m(self.spec, level, horizon)?);
        let (lv, r) = match self.class.scenario {
            Scenario::ShortOmegaZero => {
                let base = LimitProcessSpec::fbm(self.spec.model().origin().exponent)?;
                let h = self.constant("H_B_alpha0", ConstantKind::Pickands, base)?;
                let omega = omega_ratio(self.spec, level, horizon)?;
                (k * (log(h) - log(self.local_slope()) - log(omega)) + ln_psi, Roman::I)
            }
            Scenario::ShortOmegaFinite => {
                let d = self.class.omega_inf.unwrap_or(f64::NAN) * self.local_slope();
                let process = limiting_process(self.spec, &self.class)?;
                let p = self.constant("P_mu_phi", ConstantKind::Piterbarg { d }, process)?;
                (k * log(p) + ln_psi, Roman::II)
            }
            _ => (ln_psi, Roman::III),
        };
        let id = if sup {
            FormulaId::ShortEmptySup(r)
        } else {
            FormulaId::ShortEmpty(r)
        };
        Ok(Eval::plain(lv, id))
    }

    fn horizon(&self, u: f64) -> Result<f64> {
        horizon_value(self.family, self.spec, u)
    }

    /// ln Psi((u - x + cT)/sigma(T)): the backlog drained deterministically.
    fn drained_backlog(&self, u: f64, horizon: f64) -> Result<f64> {
        let z = (u - self.spec.x() + self.spec.c() * horizon) / self.spec.model().sigma(horizon)?;
        Ok(gauss_tail_log(z))
    }

    /// (a1, a2) of the critical short horizon with alpha_inf = 1/2.
    fn critical_scales(&self) -> (f64, f64) {
        let phi = self.class.phi;
        let c = self.spec.c();
        let tail = self.spec.model().tail();
        let a1 = (1.0 + c * phi) / (core::f64::consts::SQRT_2 * tail.coefficient * phi);
        let a2 = (1.0 + c * phi) * (1.0 + c * phi) / (tail.coefficient * phi * phi)
            * (self.spec.alpha() - c * phi / (1.0 + c * phi));
        (a1, a2)
    }

    fn critical_constant(&mut self, tilde: bool) -> Result<f64> {
        let (a1, a2) = self.critical_scales();
        let a = core::f64::consts::SQRT_2 * a1 * self.spec.x();
        let process = LimitProcessSpec::scaled_input(self.spec.model().clone(), a1, 1.0)?;
        if tilde {
            self.constant("tildeP_a1X", ConstantKind::PiterbargTilde { d: a2, a }, process)
        } else {
            self.constant("P_a1X", ConstantKind::PiterbargA { d: a2, a }, process)
        }
    }

    fn eta_pickands(&mut self) -> Result<f64> {
        let eta = limiting_process(self.spec, &self.class)?;
        self.constant("H_eta", ConstantKind::Pickands, eta)
    }

    /// The Phi-argument sqrt(B/(A A_inf)) (1 + ct*) omega / t*^alpha, infinite for omega = inf.
    fn omega_argument(&self, omega: f64) -> f64 {
        if omega.is_infinite() {
            return omega;
        }
        let (a, b) = ab_constants(self.spec);
        let ts = t_star(self.spec);
        let tail = self.spec.model().tail();
        sqrt(b / (a * tail.coefficient)) * (1.0 + self.spec.c() * ts) * omega
            / pow(ts, tail.exponent)
    }

    /// ln of H_eta sqrt(2 A pi/B) level/(m Delta) at the optimal epoch of `level`.
    fn moderate_core(&mut self, level: f64) -> Result<(f64, f64, f64)> {
        let tu = t_peak(self.spec, level)?;
        let mm = m(self.spec, level, tu)?;
        let dd = delta(self.spec, level, tu)?;
        let h = self.eta_pickands()?;
        Ok((log(h), log(level) - log(mm) - log(dd), gauss_tail_log(mm)))
    }

    fn moderate_empty(&mut self, level: f64) -> Result<Eval> {
        let (a, b) = ab_constants(self.spec);
        let (ln_h, ln_ratio, ln_psi) = self.moderate_core(level)?;
        let omega = self.class.omega.unwrap_or(f64::NAN);
        let lv = ln_h
            + 0.5 * log(2.0 * a * core::f64::consts::PI / b)
            + ln_ratio
            + gauss_cdf_log(self.omega_argument(omega))
            + ln_psi;
        Ok(Eval::plain(lv, FormulaId::ModerateEmpty))
    }

    fn moderate_empty_sup(&mut self, u: f64) -> Result<Eval> {
        let (a, b) = ab_constants(self.spec);
        let (ln_h, ln_ratio, ln_psi) = self.moderate_core(u)?;
        let omega = self.class.omega.unwrap_or(f64::NAN);
        if omega.is_finite() {
            let z0 = self.omega_argument(omega) / core::f64::consts::SQRT_2;
            let lv = 2.0 * ln_h + log(2.0 * a / b) + 2.0 * ln_ratio + log_excursion_integral(z0)? + ln_psi;
            Ok(Eval::plain(lv, FormulaId::ModerateEmptySup(Roman::I)))
        } else {
            let tu = t_peak(self.spec, u)?;
            let ln_delta = log(delta(self.spec, u, tu)?);
            let lv = 2.0 * ln_h
                + 0.5 * log(2.0 * a * core::f64::consts::PI / b)
                + log_horizon_excess(self.family, self.spec, u)?
                + ln_ratio
                - ln_delta
                + ln_psi;
            Ok(Eval::plain(lv, FormulaId::ModerateEmptySup(Roman::II)))
        }
    }
}

fn check_level(u: f64) -> Result<()> {
    if !(u > 0.0 && u.is_finite()) {
        bail!(Domain, "level u must be positive, got {u}");
    }
    Ok(())
}

fn shifted_level(spec: &QueueSpec, u: f64) -> Result<f64> {
    let level = u - spec.x();
    if !(level > 0.0) {
        bail!(Domain, "level u = {u} must exceed the backlog x = {}", spec.x());
    }
    Ok(level)
}

/// D(z0) = int_{-inf}^{z0} int_0^inf exp(-(v - z)^2) dv dz
///       = sqrt(pi) int_{-inf}^{z0} Phi(sqrt2 z) dz, by adaptive quadrature.
pub fn excursion_integral(z0: f64) -> Result<f64> {
    if !z0.is_finite() {
        bail!(Domain, "excursion integral needs finite z0, got {z0}");
    }
    let inner = |z: f64| gauss_cdf(core::f64::consts::SQRT_2 * z);
    // relative accuracy for negative z0, where the integral is tiny
    let tol = 1e-13 * inner(z0).clamp(1e-300, 1.0);
    let (v, _) = integrate_lower_semi_infinite(inner, z0, tol)?;
    Ok(sqrt(core::f64::consts::PI) * v)
}

fn log_excursion_integral(z0: f64) -> Result<f64> {
    let d = excursion_integral(z0)?;
    if !(d > 0.0) {
        bail!(Numeric, "excursion integral underflows at z0 = {z0}");
    }
    Ok(log(d))
}

/// Fixed horizon T with x > 0: ln Psi((u - x + cT)/sigma(T)).
pub fn approx_fixed(spec: &QueueSpec, horizon: f64, u: f64) -> Result<AsymptoticEstimate> {
    let family = HorizonFamily::Fixed { t: horizon };
    let ctx = Ctx::new(spec, &family, &crate::constants::ClosedFormsOnly)?;
    check_level(u)?;
    ctx.require_backlog()?;
    let lv = ctx.drained_backlog(u, horizon)?;
    ctx.finish(Eval::plain(lv, FormulaId::FixedHorizon))
}

/// The supremum probability over a fixed horizon needs the fixed-T asymptotics
/// of pi_{0,T}(u - x), which are not implemented.
pub fn approx_fixed_sup(spec: &QueueSpec, horizon: f64, u: f64) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    if spec.x() <= 0.0 {
        bail!(UnsupportedBranch, "fixed-horizon formulas need x > 0");
    }
    Err(Error::DelegateToMonteCarlo(alloc::format!(
        "pi^sup over fixed T = {horizon} behaves like pi_{{0,T}}(u - x); estimate it by simulation"
    )))
}

/// pi_{0,T_u}(u) under a short horizon.
pub fn approx_short_empty(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    approx_short_empty_at(spec, family, u, None, source)
}

/// Short-horizon empty-queue formula at `level`, with the horizon taken from
/// the family at `horizon_level` (defaults to `level`).
pub fn approx_short_empty_at(
    spec: &QueueSpec,
    family: &HorizonFamily,
    level: f64,
    horizon_level: Option<f64>,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(level)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_short()?;
    let t = ctx.horizon(horizon_level.unwrap_or(level))?;
    let e = ctx.short_empty(level, t, false)?;
    ctx.finish(e)
}

/// pi^sup_{0,T_u}(u) under a short horizon.
pub fn approx_short_empty_sup(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_short()?;
    let t = ctx.horizon(u)?;
    let e = ctx.short_empty(u, t, true)?;
    ctx.finish(e)
}

/// pi_{x,T_u}(u), x > 0, under a short horizon.
pub fn approx_short_x(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_short()?;
    ctx.require_backlog()?;
    let t = ctx.horizon(u)?;
    let XBranch::Short(branch) = ctx.class.x_branch else {
        bail!(Numeric, "short regime without a short backlog branch");
    };
    let id = FormulaId::ShortBacklog(branch);
    let e = match branch {
        ShortBranch::PhiZero | ShortBranch::PhiFiniteAlphaAbove => {
            Eval::plain(ctx.drained_backlog(u, t)?, id)
        }
        ShortBranch::PhiFiniteAlphaHalf => {
            let p = ctx.critical_constant(false)?;
            Eval::plain(log(p) + gauss_tail_log(m(spec, u, t)?), id)
        }
        ShortBranch::PhiInfinite => Eval::delegate(ctx.short_empty(u, t, false)?, id),
    };
    ctx.finish(e)
}

/// pi^sup_{x,T_u}(u), x > 0, under a short horizon.
pub fn approx_short_x_sup(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_short()?;
    ctx.require_backlog()?;
    let t = ctx.horizon(u)?;
    let XBranch::Short(branch) = ctx.class.x_branch else {
        bail!(Numeric, "short regime without a short backlog branch");
    };
    let id = FormulaId::ShortBacklogSup(branch);
    let e = match branch {
        ShortBranch::PhiZero | ShortBranch::PhiFiniteAlphaAbove => {
            let level = shifted_level(spec, u)?;
            Eval::delegate(ctx.short_empty(level, t, false)?, id)
        }
        ShortBranch::PhiFiniteAlphaHalf => {
            let p = ctx.critical_constant(true)?;
            Eval::plain(log(p) + gauss_tail_log(m(spec, u, t)?), id)
        }
        ShortBranch::PhiInfinite => Eval::delegate(ctx.short_empty(u, t, true)?, id),
    };
    ctx.finish(e)
}

/// pi_{0,T_u}(u) under a moderate or long horizon.
pub fn approx_moderate_empty(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_moderate()?;
    let e = ctx.moderate_empty(u)?;
    ctx.finish(e)
}

/// pi^sup_{0,T_u}(u) under a moderate or long horizon.
pub fn approx_moderate_empty_sup(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_moderate()?;
    let e = ctx.moderate_empty_sup(u)?;
    ctx.finish(e)
}

/// pi_{x,T_u}(u), x > 0, under a moderate or long horizon.
pub fn approx_moderate_x(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_moderate()?;
    ctx.require_backlog()?;
    let XBranch::Moderate { point, .. } = ctx.class.x_branch else {
        bail!(Numeric, "moderate regime without a moderate backlog branch");
    };
    let id = FormulaId::ModerateBacklog(point);
    let e = match point {
        Threshold::Below => {
            let t = ctx.horizon(u)?;
            Eval::plain(ctx.drained_backlog(u, t)?, id)
        }
        Threshold::Equal => {
            let t = ctx.horizon(u)?;
            let drained = ctx.drained_backlog(u, t)?;
            let empty = ctx.moderate_empty(u)?;
            Eval::sum(drained, empty.log_value, id)
        }
        Threshold::Above | Threshold::Delegate => Eval::delegate(ctx.moderate_empty(u)?, id),
    };
    ctx.finish(e)
}

/// pi^sup_{x,T_u}(u), x > 0, under a moderate or long horizon.
pub fn approx_moderate_x_sup(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_moderate()?;
    ctx.require_backlog()?;
    let XBranch::Moderate { sup, .. } = ctx.class.x_branch else {
        bail!(Numeric, "moderate regime without a moderate backlog branch");
    };
    let id = FormulaId::ModerateBacklogSup(sup);
    let e = match sup {
        Threshold::Below => {
            let level = shifted_level(spec, u)?;
            Eval::delegate(ctx.moderate_empty(level)?, id)
        }
        Threshold::Equal => {
            let level = shifted_level(spec, u)?;
            let shifted = ctx.moderate_empty(level)?;
            let empty_sup = ctx.moderate_empty_sup(u)?;
            Eval::sum(shifted.log_value, empty_sup.log_value, id)
        }
        Threshold::Above | Threshold::Delegate => Eval::delegate(ctx.moderate_empty_sup(u)?, id),
    };
    ctx.finish(e)
}

/// Route to the formula that covers the classified regime.
pub fn approx_dispatch(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    target: Target,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    let class = classify(spec, family)?;
    let empty = spec.x() == 0.0;
    match (class.scenario, target) {
        (Scenario::FixedHorizon, Target::Point) => {
            approx_fixed(spec, horizon_value(family, spec, u)?, u)
        }
        (Scenario::FixedHorizon, Target::Sup) => {
            approx_fixed_sup(spec, horizon_value(family, spec, u)?, u)
        }
        (s, Target::Point) if s.is_short() && empty => approx_short_empty(spec, family, u, source),
        (s, Target::Sup) if s.is_short() && empty => approx_short_empty_sup(spec, family, u, source),
        (s, Target::Point) if s.is_short() => approx_short_x(spec, family, u, source),
        (s, Target::Sup) if s.is_short() => approx_short_x_sup(spec, family, u, source),
        (_, Target::Point) if empty => approx_moderate_empty(spec, family, u, source),
        (_, Target::Sup) if empty => approx_moderate_empty_sup(spec, family, u, source),
        (_, Target::Point) => approx_moderate_x(spec, family, u, source),
        (_, Target::Sup) => approx_moderate_x_sup(spec, family, u, source),
    }
}

/// (m^2(u, t_u) - m^2(u - x, t_{u-x}))/2, the exponent by which a backlog x
/// raises the empty-queue probability.
pub fn shift_exponent(spec: &QueueSpec, u: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0 && u > x) {
        bail!(Domain, "shift exponent needs u > x >= 0, got u = {u}, x = {x}");
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let m2 = |level: f64| -> Result<f64> {
        let t = t_peak(spec, level)?;
        let num = level + spec.c() * t;
        Ok(num * num / spec.model().sigma2(t)?)
    };
    Ok(0.5 * (m2(u)? - m2(u - x)?))
}

/// Comparison against the stationary queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// Transient ~ factor x stationary.
    Value(f64),
    /// The stationary probability is negligible against the transient one.
    Dominates,
    NotApplicable,
}

impl Serialize for Factor {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            Self::Value(v) => ext::serialize(v, s),
            Self::Dominates => s.serialize_str(">>"),
            Self::NotApplicable => s.serialize_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryReport {
    pub point_branch: &'static str,
    pub point: Factor,
    pub sup_branch: &'static str,
    pub sup: Factor,
    /// The supremum factor vanishes (gamma = t*), so the comparison carries no prefactor.
    pub degenerate_prefactor: bool,
}

/// How the transient probabilities compare with their stationary counterparts.
pub fn stationary_ratio(spec: &QueueSpec, family: &HorizonFamily) -> Result<StationaryReport> {
    let class = classify(spec, family)?;
    let na = StationaryReport {
        point_branch: "n/a",
        point: Factor::NotApplicable,
        sup_branch: "n/a",
        sup: Factor::NotApplicable,
        degenerate_prefactor: false,
    };
    if !class.scenario.is_moderate_or_long() {
        return Ok(na);
    }
    let ctx = Ctx {
        spec,
        family,
        class,
        source: &crate::constants::ClosedFormsOnly,
        used: Vec::new(),
    };
    let phi_factor = Factor::Value(gauss_cdf(ctx.omega_argument(class.omega.unwrap_or(f64::NAN))));
    let ts = t_star(spec);
    let gamma = class.gamma;
    let interval_factor = if gamma.is_infinite() {
        1.0
    } else if gamma > ts {
        (gamma - ts) / gamma
    } else {
        0.0
    };
    let (point_branch, point, sup_branch, sup) = match class.x_branch {
        XBranch::EmptyQueue => ("p.1-i", phi_factor, "cor.o.sup-i", Factor::Value(interval_factor)),
        XBranch::Moderate {
            point: Threshold::Delegate,
            ..
        } => ("p.1-iv", phi_factor, "cor.o.sup-iv", Factor::Value(interval_factor)),
        XBranch::Moderate { point, sup } => {
            let side = |t: Threshold, lo: &'static str, hi: &'static str| match t {
                Threshold::Below => (lo, Factor::Dominates),
                Threshold::Above => (hi, Factor::Value(1.0)),
                _ => ("n/a", Factor::NotApplicable),
            };
            let (pb, p) = side(point, "p.1-ii", "p.1-iii");
            let (sb, s) = side(sup, "cor.o.sup-ii", "cor.o.sup-iii");
            (pb, p, sb, s)
        }
        _ => return Ok(na),
    };
    Ok(StationaryReport {
        point_branch,
        point,
        sup_branch,
        degenerate_prefactor: sup == Factor::Value(0.0),
        sup,
    })
}

/// The long-horizon supremum display evaluated over the whole interval [0, T_u]
/// instead of [t_u, T_u]; the stationary queue has no empty start to recover from.
pub fn stationary_sup_reference(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    source: &dyn ConstantSource,
) -> Result<AsymptoticEstimate> {
    check_level(u)?;
    let mut ctx = Ctx::new(spec, family, source)?;
    ctx.require_moderate()?;
    let (a, b) = ab_constants(spec);
    let (ln_h, ln_ratio, ln_psi) = ctx.moderate_core(u)?;
    let tu = t_peak(spec, u)?;
    let lv = 2.0 * ln_h
        + 0.5 * log(2.0 * a * core::f64::consts::PI / b)
        + log_horizon_value(family, spec, u)?
        + ln_ratio
        - log(delta(spec, u, tu)?)
        + ln_psi;
    ctx.finish(Eval::plain(lv, FormulaId::ModerateEmptySup(Roman::II)))
}

impl fmt::Display for Roman {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
