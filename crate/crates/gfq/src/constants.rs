//! Monte Carlo estimates of Pickands and Piterbarg functionals on a grid, and
//! a cache that feeds them to the asymptotic evaluators.

use std::collections::BTreeMap;

use gfq_core::constants::{
    BaseProcess, ConstantEstimate, ConstantKind, ConstantQuery, ConstantSource, ConstantValue,
    LimitProcessSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{replicate, stream, Moments};
use crate::simulate::FgnGenerator;

/// Path-point cap for a single constant or probability estimate.
pub const DEFAULT_BUDGET: u64 = 20_000_000_000;

/// Grid and replication settings of one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSettings {
    #[serde(rename = "S")]
    pub horizon: f64,
    pub step: f64,
    pub reps: u64,
    pub seed: u64,
    pub budget: u64,
}

impl McSettings {
    pub fn new(horizon: f64, step: f64, reps: u64, seed: u64) -> Self {
        Self {
            horizon,
            step,
            reps,
            seed,
            budget: DEFAULT_BUDGET,
        }
    }

    /// S = 64 with step 2^-9, or 2^-12 for rough bases (H < 1/2).
    pub fn default_for(proc: &LimitProcessSpec, reps: u64, seed: u64) -> Self {
        let rough = proc.hurst().is_some_and(|h| h < 0.5);
        let step = if rough { 2f64.powi(-12) } else { 2f64.powi(-9) };
        Self::new(64.0, step, reps, seed)
    }
}

/// How the Pickands functional is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PickandsMode {
    /// Sum over grid shifts of E[max e^Y / sum e^Y] on a two-sided path. Each
    /// term lies in (0, 1], so the estimator has bounded variance.
    #[default]
    ShiftAverage,
    /// Plain mean of exp(grid sup). Heavy-tailed: E e^sup has a Pareto(1)-like
    /// tail, so moderate replication counts underestimate it.
    Direct,
}

fn grid_len(horizon: f64, step: f64) -> Result<usize> {
    if !(step > 0.0 && step.is_finite() && horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!(
            "need S >= 0 and a positive step, got S = {horizon}, step = {step}"
        )));
    }
    let n = horizon / step;
    let r = n.round();
    if (n - r).abs() > 1e-9 * r.max(1.0) {
        return Err(Error::Config(format!("step {step} does not divide S = {horizon}")));
    }
    Ok(r as usize)
}

fn check_budget(reps: u64, points: usize, budget: u64) -> Result<()> {
    if reps == 0 {
        return Err(Error::Config("reps must be at least 1".into()));
    }
    let cost = reps as f64 * points as f64;
    if cost > budget as f64 {
        return Err(Error::Budget(format!(
            "{reps} replications x {points} grid points exceeds the budget of {budget} path points"
        )));
    }
    Ok(())
}

/// Generator for the base on the rescaled grid, and the factor applied to it.
fn process_sampler(proc: &LimitProcessSpec, n: usize, step: f64) -> Result<(FgnGenerator, f64)> {
    let (hurst, scale) = match &proc.base {
        BaseProcess::Fbm { hurst } => (*hurst, 1.0),
        BaseProcess::Input { model } => match model.as_fbm() {
            Some(f) => (f.hurst(), f.scale()),
            None => {
                return Err(Error::Unsupported(
                    "constants over tabulated variance models cannot be simulated".into(),
                ))
            }
        },
    };
    let gen = FgnGenerator::new(hurst, n.max(1), proc.time_change * step)?;
    Ok((gen, proc.premultiplier * scale.sqrt()))
}

fn drift_of(kind: &ConstantKind) -> f64 {
    match *kind {
        ConstantKind::Pickands => 0.0,
        ConstantKind::Piterbarg { d }
        | ConstantKind::PiterbargA { d, .. }
        | ConstantKind::PiterbargTilde { d, .. } => d,
    }
}

fn check_kind(kind: &ConstantKind) -> Result<()> {
    let d = drift_of(kind);
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Config(format!("drift must be finite and >= 0, got {d}")));
    }
    if let ConstantKind::PiterbargA { a, .. } | ConstantKind::PiterbargTilde { a, .. } = kind {
        if a.is_nan() || *a == f64::INFINITY {
            return Err(Error::Config(format!("floor a must be a real number, got {a}")));
        }
    }
    Ok(())
}

/// Direct estimates of exp-sup functionals for several kinds and horizons on
/// shared paths. Horizons reuse prefixes of one path, so every functional is
/// nondecreasing in S replicate by replicate. Pickands kinds use
/// [`PickandsMode::Direct`] here and are reported as H[0,S]/S.
///
/// Result is indexed `[kind][horizon]`.
pub fn sup_functionals(
    proc: &LimitProcessSpec,
    kinds: &[ConstantKind],
    horizons: &[f64],
    step: f64,
    reps: u64,
    seed: u64,
    budget: u64,
) -> Result<Vec<Vec<ConstantEstimate>>> {
    if kinds.is_empty() || horizons.is_empty() {
        return Err(Error::Config("need at least one kind and one horizon".into()));
    }
    for k in kinds {
        check_kind(k)?;
    }
    let lens = horizons
        .iter()
        .map(|&s| grid_len(s, step))
        .collect::<Result<Vec<_>>>()?;
    let n = *lens.iter().max().unwrap_or(&0);
    let copies = if kinds.iter().any(|k| matches!(k, ConstantKind::PiterbargTilde { .. })) {
        2
    } else {
        1
    };
    check_budget(reps, copies * n, budget)?;
    let (gen, factor) = process_sampler(proc, n, step)?;
    let penalty = (0..=n)
        .map(|i| proc.variance(i as f64 * step))
        .collect::<gfq_core::Result<Vec<_>>>()?;
    let mut drifts: Vec<f64> = kinds.iter().map(drift_of).collect();
    drifts.sort_by(f64::total_cmp);
    drifts.dedup();
    let nh = horizons.len();
    let slots = kinds.len() * nh;

    let total = replicate(
        reps,
        || Moments::new(slots),
        || {
            (
                gen.workspace(),
                vec![0.0; gen.len()],
                vec![0.0; gen.len()],
                vec![0.0; n + 1],
                vec![0.0; drifts.len() * nh],
                vec![0.0; drifts.len() * nh],
            )
        },
        |m, (ws, a, b, base, sup_a, sup_b), i| {
            let mut rng = stream(seed, i);
            if copies == 2 {
                gen.fill(&mut rng, ws, a, Some(b));
            } else {
                gen.fill(&mut rng, ws, a, None);
            }
            grid_sups(a, factor, &penalty, step, &drifts, &lens, base, sup_a);
            if copies == 2 {
                grid_sups(b, factor, &penalty, step, &drifts, &lens, base, sup_b);
            }
            for (ki, kind) in kinds.iter().enumerate() {
                let di = drifts.iter().position(|&d| d == drift_of(kind)).unwrap_or(0);
                for h in 0..nh {
                    let s = sup_a[di * nh + h];
                    let v = match *kind {
                        ConstantKind::Pickands => {
                            if horizons[h] > 0.0 {
                                s.exp() / horizons[h]
                            } else {
                                s.exp()
                            }
                        }
                        ConstantKind::Piterbarg { .. } => s.exp(),
                        ConstantKind::PiterbargA { a, .. } => s.max(a).exp(),
                        ConstantKind::PiterbargTilde { a, .. } => {
                            let t = sup_b[di * nh + h];
                            (s + t.max(a)).exp()
                        }
                    };
                    m.add(ki * nh + h, v);
                }
            }
        },
    );
    Ok((0..kinds.len())
        .map(|ki| {
            (0..nh)
                .map(|h| {
                    let (value, std_error) = total.mean_se(ki * nh + h, reps);
                    ConstantEstimate {
                        value,
                        std_error,
                        horizon: horizons[h],
                        grid_step: step,
                        replications: reps,
                        seed,
                    }
                })
                .collect()
        })
        .collect())
}

/// Running maxima of sqrt2 Z - Var Z - d t over grid prefixes; writes
/// `out[drift * horizons + h]` for the prefix of `lens[h]` steps. `base` is
/// scratch of length n + 1.
#[allow(clippy::too_many_arguments)]
fn grid_sups(
    inc: &[f64],
    factor: f64,
    penalty: &[f64],
    step: f64,
    drifts: &[f64],
    lens: &[usize],
    base: &mut [f64],
    out: &mut [f64],
) {
    let nh = lens.len();
    let nmax = *lens.iter().max().unwrap_or(&0);
    let mut z = 0.0;
    base[0] = 0.0;
    for i in 1..=nmax {
        z += inc[i - 1];
        base[i] = std::f64::consts::SQRT_2 * factor * z - penalty[i];
    }
    let mut order: Vec<usize> = (0..nh).collect();
    order.sort_by_key(|&h| lens[h]);
    for (di, &d) in drifts.iter().enumerate() {
        let mut best = 0.0f64;
        let mut i = 1;
        for &h in &order {
            while i <= lens[h] {
                best = best.max(base[i] - d * (i as f64 * step));
                i += 1;
            }
            out[di * nh + h] = best;
        }
    }
}

/// H[0,S]/S for each horizon, shift-average estimator, on shared two-sided paths.
pub fn pickands_shift_average(
    proc: &LimitProcessSpec,
    horizons: &[f64],
    step: f64,
    reps: u64,
    seed: u64,
    budget: u64,
) -> Result<Vec<ConstantEstimate>> {
    if horizons.is_empty() {
        return Err(Error::Config("need at least one horizon".into()));
    }
    let lens = horizons
        .iter()
        .map(|&s| grid_len(s, step))
        .collect::<Result<Vec<_>>>()?;
    let n = *lens.iter().max().unwrap_or(&0);
    check_budget(reps, 2 * n, budget)?;
    let (gen, factor) = process_sampler(proc, 2 * n, step)?;
    let penalty = (0..=n)
        .map(|i| proc.variance(i as f64 * step))
        .collect::<gfq_core::Result<Vec<_>>>()?;
    let nh = horizons.len();

    let total = replicate(
        reps,
        || Moments::new(nh),
        || {
            (
                gen.workspace(),
                vec![0.0; gen.len()],
                vec![0.0; 2 * n + 1],
                vec![0.0; 2 * n + 1],
                vec![0.0; 2 * n + 2],
                vec![0.0; 2 * n + 1],
            )
        },
        |m, (ws, inc, y, e, prefix, runmax), i| {
            gen.fill(&mut stream(seed, i), ws, inc, None);
            two_sided_exponent(inc, n, factor, &penalty, y);
            for (h, &l) in lens.iter().enumerate() {
                let r = shift_sum(y, n, l, e, prefix, runmax);
                let v = if horizons[h] > 0.0 { r / horizons[h] } else { r };
                m.add(h, v);
            }
        },
    );
    Ok((0..nh)
        .map(|h| {
            let (value, std_error) = total.mean_se(h, reps);
            ConstantEstimate {
                value,
                std_error,
                horizon: horizons[h],
                grid_step: step,
                replications: reps,
                seed,
            }
        })
        .collect())
}

/// Y_j = sqrt2 Z(j step) - Var Z(|j| step) for j in [-n, n], stored at j + n,
/// with Z(t) = V(t + n step) - V(n step) for the one-sided path V.
fn two_sided_exponent(inc: &[f64], n: usize, factor: f64, penalty: &[f64], y: &mut [f64]) {
    let mut acc = 0.0;
    // cumulative V at index j, shifted by V(n) afterwards
    y[0] = 0.0;
    for (j, d) in inc.iter().take(2 * n).enumerate() {
        acc += d;
        y[j + 1] = acc;
    }
    let mid = y[n];
    for (j, slot) in y.iter_mut().enumerate() {
        let lag = j.abs_diff(n);
        *slot = std::f64::consts::SQRT_2 * factor * (*slot - mid) - penalty[lag];
    }
}

/// sum_{k=0}^{l} max_{W_k} e^Y / sum_{W_k} e^Y with windows W_k = [-k, l - k].
/// Every window contains j = 0 where Y = 0, so its max is the larger of a
/// running max leftwards from 0 and one rightwards from 0.
fn shift_sum(y: &[f64], n: usize, l: usize, e: &mut [f64], prefix: &mut [f64], runmax: &mut [f64]) -> f64 {
    if l == 0 {
        return 1.0;
    }
    let lo = n - l;
    let hi = n + l;
    // e^Y cannot underflow to an all-zero window (Y_0 = 0); rescale only on overflow
    let mut shift = 0.0;
    if y[lo..=hi].iter().any(|&v| v > 700.0) {
        shift = y[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    prefix[lo] = 0.0;
    for j in lo..=hi {
        e[j] = (y[j] - shift).exp();
        prefix[j + 1] = prefix[j] + e[j];
    }
    runmax[n] = e[n];
    for j in (lo..n).rev() {
        runmax[j] = runmax[j + 1].max(e[j]);
    }
    for j in n + 1..=hi {
        runmax[j] = runmax[j - 1].max(e[j]);
    }
    let mut total = 0.0;
    for s in lo..=n {
        let t = s + l;
        total += runmax[s].max(runmax[t]) / (prefix[t + 1] - prefix[s]);
    }
    total
}

fn single(proc: &LimitProcessSpec, kind: ConstantKind, cfg: &McSettings) -> Result<ConstantEstimate> {
    let mut out = sup_functionals(proc, &[kind], &[cfg.horizon], cfg.step, cfg.reps, cfg.seed, cfg.budget)?;
    Ok(out.remove(0).remove(0))
}

/// H[0,S]/S (or 1 for S = 0).
pub fn pickands(proc: &LimitProcessSpec, cfg: &McSettings, mode: PickandsMode) -> Result<ConstantEstimate> {
    match mode {
        PickandsMode::ShiftAverage => {
            let mut v = pickands_shift_average(proc, &[cfg.horizon], cfg.step, cfg.reps, cfg.seed, cfg.budget)?;
            Ok(v.remove(0))
        }
        PickandsMode::Direct => single(proc, ConstantKind::Pickands, cfg),
    }
}

/// E exp(sup_[0,S] (sqrt2 Z - Var Z - d t)).
pub fn piterbarg(proc: &LimitProcessSpec, d: f64, cfg: &McSettings) -> Result<ConstantEstimate> {
    single(proc, ConstantKind::Piterbarg { d }, cfg)
}

/// E exp(max(a, sup_[0,S] (sqrt2 Z - Var Z - d t))).
pub fn piterbarg_a(proc: &LimitProcessSpec, d: f64, a: f64, cfg: &McSettings) -> Result<ConstantEstimate> {
    single(proc, ConstantKind::PiterbargA { d, a }, cfg)
}

/// E exp(max(a + sup Z*, sup Z* + sup Z~*)) with an independent copy Z~.
pub fn piterbarg_tilde(proc: &LimitProcessSpec, d: f64, a: f64, cfg: &McSettings) -> Result<ConstantEstimate> {
    single(proc, ConstantKind::PiterbargTilde { d, a }, cfg)
}

/// Estimate of the query's constant with the given settings.
pub fn estimate_query(query: &ConstantQuery, cfg: &McSettings, mode: PickandsMode) -> Result<ConstantEstimate> {
    match query.kind {
        ConstantKind::Pickands => pickands(&query.process, cfg, mode),
        kind => single(&query.process, kind, cfg),
    }
}

/// One cached constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheEntry {
    pub query: ConstantQuery,
    #[serde(flatten)]
    pub value: ConstantValue,
}

/// Estimated constants keyed by their query (process fingerprint, kind, d, a).
/// Each entry records S, step, reps and seed, so a study that fills the cache
/// with fixed settings is reproducible.
#[derive(Debug, Clone, Default)]
pub struct ConstantCache {
    entries: BTreeMap<String, CacheEntry>,
}

fn fingerprint(query: &ConstantQuery) -> String {
    serde_json::to_string(query).unwrap_or_else(|_| query.to_string())
}

impl ConstantCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query: ConstantQuery, value: ConstantValue) {
        self.entries.insert(fingerprint(&query), CacheEntry { query, value });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    /// Estimate and store the query unless it is already present.
    pub fn ensure(&mut self, query: &ConstantQuery, cfg: &McSettings, mode: PickandsMode) -> Result<ConstantValue> {
        if let Some(v) = self.lookup(query) {
            return Ok(v);
        }
        let v = ConstantValue::Estimated(estimate_query(query, cfg, mode)?);
        self.insert(query.clone(), v);
        Ok(v)
    }
}

impl ConstantSource for ConstantCache {
    fn lookup(&self, query: &ConstantQuery) -> Option<ConstantValue> {
        self.entries.get(&fingerprint(query)).map(|e| e.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_must_divide_horizon() {
        assert_eq!(grid_len(32.0, 2f64.powi(-9)).unwrap(), 16384);
        assert_eq!(grid_len(0.0, 0.5).unwrap(), 0);
        assert!(grid_len(1.0, 0.3).is_err());
    }

    #[test]
    fn shift_sum_brute_force() {
        let y = [-1.3, 0.2, -0.4, 0.0, 0.7, -2.0, 0.1];
        let n = 3;
        for l in 0..=3 {
            let mut prefix = vec![0.0; y.len() + 1];
            let mut e = vec![0.0; y.len()];
            let mut runmax = vec![0.0; y.len()];
            let got = shift_sum(&y, n, l, &mut e, &mut prefix, &mut runmax);
            let mut want = 0.0;
            for k in 0..=l {
                let w = &y[n - k..=n - k + l];
                let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp();
                let sum: f64 = w.iter().map(|v| v.exp()).sum();
                want += max / sum;
            }
            assert!((got - want).abs() < 1e-14, "l = {l}: {got} vs {want}");
        }
    }

    #[test]
    fn degenerate_horizon_is_one() {
        let proc = LimitProcessSpec::fbm(0.5).unwrap();
        let cfg = McSettings::new(0.0, 0.5, 10, 1);
        for mode in [PickandsMode::ShiftAverage, PickandsMode::Direct] {
            let e = pickands(&proc, &cfg, mode).unwrap();
            assert_eq!(e.value, 1.0);
            assert_eq!(e.std_error, 0.0);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let proc = LimitProcessSpec::fbm(0.5).unwrap();
        let mut cfg = McSettings::new(1.0, 0.5, 10, 1);
        cfg.budget = 19;
        assert!(matches!(piterbarg(&proc, 1.0, &cfg), Err(Error::Budget(_))));
        cfg.budget = 20;
        assert!(piterbarg(&proc, 1.0, &cfg).is_ok());
    }

    #[test]
    fn cache_lookup_by_query() {
        let proc = LimitProcessSpec::fbm(0.7).unwrap();
        let q = ConstantQuery {
            kind: ConstantKind::Piterbarg { d: 1.0 },
            process: proc.clone(),
        };
        let mut cache = ConstantCache::new();
        assert!(cache.lookup(&q).is_none());
        let v = cache.ensure(&q, &McSettings::new(2.0, 0.25, 50, 3), PickandsMode::default()).unwrap();
        assert_eq!(cache.lookup(&q), Some(v));
        let other = ConstantQuery {
            kind: ConstantKind::Piterbarg { d: 2.0 },
            process: proc,
        };
        assert!(cache.lookup(&other).is_none());
    }
}
