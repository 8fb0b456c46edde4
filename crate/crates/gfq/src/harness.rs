//! Validation studies: Monte Carlo against asymptotics, transient against
//! stationary, and the geometry limits.

use gfq_core::asympt::{
    approx_dispatch, stationary_ratio, stationary_sup_reference, AsymptoticEstimate, Factor, Target,
};
use gfq_core::constants::ConstantSource;
use gfq_core::geometry::{ab_constants, local_curvature_b, local_slope_a, omega_ratio, t_peak, t_star};
use gfq_core::regimes::{horizon_value, HorizonFamily};
use gfq_core::{classify, QueueSpec};
use serde::{Deserialize, Serialize};

use crate::config::{queue_spec, ModelConfig, QueueConfig};
use crate::constants::{ConstantCache, McSettings, PickandsMode};
use crate::error::{Error, Result};
use crate::estimate::{estimate_pair, McRun};
use crate::export::{na, na_str, Format, Row};

/// Path-point cap of a whole study.
pub const STUDY_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub reps: u64,
    #[serde(rename = "grid")]
    pub grid_points: usize,
    pub seed: u64,
}

/// Monte Carlo settings for constants that have no closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(rename = "S", default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    pub reps: u64,
    pub seed: u64,
    #[serde(default)]
    pub mode: PickandsMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub model: ModelConfig,
    pub queue: QueueConfig,
    pub horizon: HorizonFamily,
    pub u_grid: Vec<f64>,
    pub mc: McConfig,
    pub targets: Vec<Target>,
    #[serde(default)]
    pub constants: Option<ConstantsConfig>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            return Err(Error::Config("study needs at least one target".into()));
        }
        if self.u_grid.is_empty()
            || self.u_grid.iter().any(|u| !(*u > 0.0 && u.is_finite()))
            || self.u_grid.windows(2).any(|w| !(w[0] < w[1]))
        {
            return Err(Error::Config("u_grid must be nonempty, positive and strictly ascending".into()));
        }
        let budget = self.budget.unwrap_or(STUDY_BUDGET);
        let cost = self.mc.reps as f64 * self.mc.grid_points as f64 * self.u_grid.len() as f64;
        if cost > budget as f64 {
            return Err(Error::Budget(format!(
                "{} reps x {} grid points x {} levels exceeds the study budget of {budget} path points",
                self.mc.reps,
                self.mc.grid_points,
                self.u_grid.len()
            )));
        }
        self.horizon.validate()?;
        Ok(())
    }
}

/// One level and target of a convergence study. Columns in field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub u: f64,
    #[serde(rename = "T_u")]
    pub horizon: f64,
    pub target: Target,
    pub regime: String,
    #[serde(with = "na_str")]
    pub formula_id: Option<String>,
    pub p_hat: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub reps: u64,
    pub grid: usize,
    pub seed: u64,
    #[serde(with = "na")]
    pub log_value: Option<f64>,
    /// p_hat / exp(log_value); n/a when p_hat = 0 or no asymptotic is available.
    #[serde(with = "na")]
    pub ratio: Option<f64>,
}

impl Row for StudyRow {
    const COLUMNS: &'static [&'static str] = &[
        "u", "T_u", "target", "regime", "formula_id", "p_hat", "se", "ci_low", "ci_high", "hits",
        "reps", "grid", "seed", "log_value", "ratio",
    ];
}

fn regime_id(spec: &QueueSpec, family: &HorizonFamily) -> Result<String> {
    let class = classify(spec, family)?;
    Ok(format!("{:?}", class.scenario))
}

/// The asymptotic for one level, estimating missing constants into `cache`.
/// `Ok(None)` when the regime is delegated to simulation.
pub fn asymptotic_with_cache(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u: f64,
    target: Target,
    cache: &mut ConstantCache,
    constants: Option<&ConstantsConfig>,
) -> Result<Option<AsymptoticEstimate>> {
    loop {
        match approx_dispatch(spec, family, u, target, cache) {
            Ok(e) => return Ok(Some(e)),
            Err(gfq_core::Error::DelegateToMonteCarlo(_)) => return Ok(None),
            Err(gfq_core::Error::ConstantRequired(q)) => {
                let Some(cc) = constants else {
                    return Err(gfq_core::Error::ConstantRequired(q).into());
                };
                if cache.lookup(&q).is_some() {
                    return Err(Error::Config(format!("cached constant for {q} was not accepted")));
                }
                let mut settings = McSettings::default_for(&q.process, cc.reps, cc.seed);
                if let Some(s) = cc.horizon {
                    settings.horizon = s;
                }
                if let Some(step) = cc.step {
                    settings.step = step;
                }
                cache.ensure(&q, &settings, cc.mode)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Monte Carlo and asymptotics side by side for every level of the grid.
pub fn convergence_study(config: &StudyConfig) -> Result<Vec<StudyRow>> {
    convergence_study_with(config, &mut ConstantCache::new())
}

/// As [`convergence_study`], reusing and filling a constants cache.
pub fn convergence_study_with(config: &StudyConfig, cache: &mut ConstantCache) -> Result<Vec<StudyRow>> {
    config.validate()?;
    let spec = queue_spec(&config.model, &config.queue)?;
    let family = config.horizon;
    let regime = regime_id(&spec, &family)?;
    let run = McRun {
        reps: config.mc.reps,
        grid_points: config.mc.grid_points,
        seed: config.mc.seed,
        budget: config.budget.unwrap_or(STUDY_BUDGET),
    };
    let mut rows = Vec::new();
    for &u in &config.u_grid {
        let t = horizon_value(&family, &spec, u)?;
        let mc = estimate_pair(&spec, t, &[u], &run)?[0];
        for &target in &config.targets {
            let est = match target {
                Target::Point => mc.point,
                Target::Sup => mc.sup,
            };
            let asym = asymptotic_with_cache(&spec, &family, u, target, cache, config.constants.as_ref())?;
            let log_value = asym.as_ref().map(|a| a.log_value);
            let ratio = match log_value {
                Some(lv) if est.p_hat > 0.0 => Some(est.p_hat / lv.exp()),
                _ => None,
            };
            rows.push(StudyRow {
                u,
                horizon: t,
                target,
                regime: regime.clone(),
                formula_id: asym.map(|a| a.formula_id.to_string()),
                p_hat: est.p_hat,
                se: est.std_error,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                hits: est.hits,
                reps: est.replications,
                grid: est.grid_points,
                seed: est.seed,
                log_value,
                ratio,
            });
        }
    }
    Ok(rows)
}

/// Transient asymptotics against the stationary queue at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityRow {
    pub u: f64,
    pub transient_log: f64,
    /// ln P(Q* > u); numeric for Brownian inputs only.
    #[serde(with = "na")]
    pub stationary_log: Option<f64>,
    pub point_branch: String,
    pub point_factor: String,
    #[serde(with = "na")]
    pub realized_point: Option<f64>,
    pub sup_branch: String,
    pub sup_factor: String,
    /// Supremum asymptotic over its full-interval evaluation.
    #[serde(with = "na")]
    pub realized_sup: Option<f64>,
}

impl Row for StationarityRow {
    const COLUMNS: &'static [&'static str] = &[
        "u", "transient_log", "stationary_log", "point_branch", "point_factor", "realized_point",
        "sup_branch", "sup_factor", "realized_sup",
    ];
}

fn factor_text(f: Factor) -> String {
    match f {
        Factor::Value(v) => v.to_string(),
        Factor::Dominates => ">>".into(),
        Factor::NotApplicable => "n/a".into(),
    }
}

/// Predicted and realized ratios of transient to stationary probabilities.
/// With `numeric` set the input must be Brownian, whose stationary law is
/// exp(-2cu/v); otherwise only the symbolic factors and the supremum
/// comparison are reported.
pub fn stationarity_study(
    spec: &QueueSpec,
    family: &HorizonFamily,
    u_grid: &[f64],
    numeric: bool,
    source: &dyn ConstantSource,
) -> Result<Vec<StationarityRow>> {
    let rate = spec.model().as_fbm().filter(|f| f.hurst() == 0.5).map(|f| f.scale());
    if numeric && rate.is_none() {
        return Err(Error::Unsupported(
            "numeric stationary reference needs a Brownian input; use symbolic mode".into(),
        ));
    }
    let report = stationary_ratio(spec, family)?;
    let mut rows = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let transient = approx_dispatch(spec, family, u, Target::Point, source)?;
        let stationary_log = rate.filter(|_| numeric).map(|v| -2.0 * spec.c() * u / v);
        let realized_point = stationary_log.map(|s| (transient.log_value - s).exp());
        let realized_sup = match (
            approx_dispatch(spec, family, u, Target::Sup, source),
            stationary_sup_reference(spec, family, u, source),
        ) {
            (Ok(a), Ok(b)) => Some((a.log_value - b.log_value).exp()),
            _ => None,
        };
        rows.push(StationarityRow {
            u,
            transient_log: transient.log_value,
            stationary_log,
            point_branch: report.point_branch.into(),
            point_factor: factor_text(report.point),
            realized_point,
            sup_branch: report.sup_branch.into(),
            sup_factor: factor_text(report.sup),
            realized_sup,
        });
    }
    Ok(rows)
}

/// Geometry diagnostics at one level against their declared limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub u: f64,
    #[serde(rename = "T_u")]
    pub horizon: f64,
    pub a_u: f64,
    pub a_limit: f64,
    /// Relative error (absolute when the limit is 0).
    pub a_error: f64,
    pub b_u: f64,
    pub b_limit: f64,
    pub b_error: f64,
    pub t_ratio: f64,
    pub t_star: f64,
    pub omega: f64,
}

impl Row for LemmaRow {
    const COLUMNS: &'static [&'static str] = &[
        "u", "T_u", "a_u", "a_limit", "a_error", "b_u", "b_limit", "b_error", "t_ratio", "t_star",
        "omega",
    ];
}

fn rel_error(v: f64, limit: f64) -> f64 {
    if limit == 0.0 {
        v.abs()
    } else {
        (v / limit - 1.0).abs()
    }
}

/// Levels of the geometry sweep.
pub const LEMMA_LEVELS: [f64; 6] = [1e3, 1e4, 1e5, 1e6, 1e7, 1e8];

/// a_u, b_u, t_u/u and Omega(u, T_u) over u = 1e3..1e8.
pub fn lemma_limit_sweep(spec: &QueueSpec, family: &HorizonFamily) -> Result<Vec<LemmaRow>> {
    let class = classify(spec, family)?;
    let gamma = class.gamma;
    let c = spec.c();
    let alpha = spec.model().tail().exponent;
    let a_limit = if gamma.is_infinite() {
        alpha - 1.0
    } else {
        alpha - c * gamma / (1.0 + c * gamma)
    };
    let (a, b) = ab_constants(spec);
    let b_limit = b / (2.0 * a);
    let ts = t_star(spec);
    LEMMA_LEVELS
        .iter()
        .map(|&u| {
            let t = horizon_value(family, spec, u)?;
            let a_u = local_slope_a(spec, u, t)?;
            let b_u = local_curvature_b(spec, u)?;
            Ok(LemmaRow {
                u,
                horizon: t,
                a_u,
                a_limit,
                a_error: rel_error(a_u, a_limit),
                b_u,
                b_limit,
                b_error: rel_error(b_u, b_limit),
                t_ratio: t_peak(spec, u)? / u,
                t_star: ts,
                omega: omega_ratio(spec, u, t)?,
            })
        })
        .collect()
}

/// The level u at which the asymptotic equals `log_p`, by bisection in ln u
/// on [lo, hi]; the asymptotic must be decreasing there.
pub fn level_for_probability(
    spec: &QueueSpec,
    family: &HorizonFamily,
    target: Target,
    log_p: f64,
    (lo, hi): (f64, f64),
    source: &dyn ConstantSource,
) -> Result<f64> {
    let f = |u: f64| -> Result<f64> { Ok(approx_dispatch(spec, family, u, target, source)?.log_value - log_p) };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (fa, fb) = (f(lo)?, f(hi)?);
    if !(fa > 0.0 && fb < 0.0) {
        return Err(gfq_core::Error::Range(format!(
            "log probability {log_p} not bracketed on [{lo}, {hi}]"
        ))
        .into());
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if f(mid.exp())? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}
