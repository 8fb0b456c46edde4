//! Crude Monte Carlo for P(Q(T) > u) and P(sup_[0,T] Q > u).

use gfq_core::QueueSpec;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::constants::DEFAULT_BUDGET;
use crate::error::{Error, Result};
use crate::rng::{replicate, stream, Accumulator};
use crate::simulate::{workload_endpoints, FgnGenerator};

/// Below this many hits the interval is Clopper-Pearson instead of normal.
const EXACT_CI_BELOW: u64 = 20;
const Z975: f64 = 1.959_963_984_540_054;

/// Replication settings of a probability estimate. `grid_points` is the number
/// of steps of the grid on [0, T].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McRun {
    pub reps: u64,
    pub grid_points: usize,
    pub seed: u64,
    pub budget: u64,
}

impl McRun {
    pub fn new(reps: u64, grid_points: usize, seed: u64) -> Self {
        Self {
            reps,
            grid_points,
            seed,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub p_hat: f64,
    #[serde(rename = "se")]
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(rename = "reps")]
    pub replications: u64,
    #[serde(rename = "grid")]
    pub grid_points: usize,
    pub seed: u64,
    pub hits: u64,
}

impl MCEstimate {
    pub fn from_hits(hits: u64, run: &McRun) -> Self {
        let n = run.reps;
        let nf = n as f64;
        let p = hits as f64 / nf;
        let se = (p * (1.0 - p) / nf).sqrt();
        let (lo, hi) = if hits >= EXACT_CI_BELOW {
            ((p - Z975 * se).max(0.0), (p + Z975 * se).min(1.0))
        } else {
            clopper_pearson(hits, n)
        };
        Self {
            p_hat: p,
            std_error: se,
            ci_low: lo.min(p),
            ci_high: hi.max(p),
            replications: n,
            grid_points: run.grid_points,
            seed: run.seed,
            hits,
        }
    }
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
fn beta_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact 95% binomial interval.
pub fn clopper_pearson(hits: u64, n: u64) -> (f64, f64) {
    let k = hits as f64;
    let nf = n as f64;
    let lo = if hits == 0 {
        0.0
    } else {
        beta_quantile(k, nf - k + 1.0, 0.025)
    };
    let hi = if hits >= n {
        1.0
    } else {
        beta_quantile(k + 1.0, nf - k, 0.975)
    };
    (lo, hi)
}

/// Estimates for one level on a shared path ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRow {
    pub u: f64,
    pub point: MCEstimate,
    pub sup: MCEstimate,
}

struct Hits {
    point: Vec<u64>,
    sup: Vec<u64>,
}

impl Accumulator for Hits {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.point.iter_mut().zip(other.point) {
            *a += b;
        }
        for (a, b) in self.sup.iter_mut().zip(other.sup) {
            *a += b;
        }
    }
}

fn check_run(run: &McRun) -> Result<()> {
    if run.reps == 0 || run.grid_points < 2 {
        return Err(Error::Config(format!(
            "need reps >= 1 and grid >= 2, got reps = {}, grid = {}",
            run.reps, run.grid_points
        )));
    }
    let cost = run.reps as f64 * run.grid_points as f64;
    if cost > run.budget as f64 {
        return Err(Error::Budget(format!(
            "{} replications x {} grid points exceeds the budget of {} path points",
            run.reps, run.grid_points, run.budget
        )));
    }
    Ok(())
}

/// Both probabilities for every level in `u_list`, on the same paths. Hit
/// counts are nonincreasing in u replicate by replicate.
pub fn estimate_pair(spec: &QueueSpec, horizon: f64, u_list: &[f64], run: &McRun) -> Result<Vec<PairRow>> {
    check_run(run)?;
    if u_list.is_empty() {
        return Err(Error::Config("u list must not be empty".into()));
    }
    if u_list.windows(2).any(|w| !(w[0] <= w[1])) || u_list.iter().any(|u| !(*u >= 0.0)) {
        return Err(Error::Config("u list must be ascending and nonnegative".into()));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::Config(format!("horizon must be finite and >= 0, got {horizon}")));
    }
    let fbm = spec.model().as_fbm().ok_or_else(|| {
        Error::Unsupported("Monte Carlo needs an fBm input; tabulated models are not simulated".into())
    })?;
    let (c, x) = (spec.c(), spec.x());
    let nu = u_list.len();
    let hits = if horizon == 0.0 {
        // Q(0) = x on every replicate
        let h: Vec<u64> = u_list.iter().map(|&u| if x > u { run.reps } else { 0 }).collect();
        Hits {
            point: h.clone(),
            sup: h,
        }
    } else {
        let step = horizon / run.grid_points as f64;
        let gen = FgnGenerator::new(fbm.hurst(), run.grid_points, step)?;
        let sd = fbm.scale().sqrt();
        replicate(
            run.reps,
            || Hits {
                point: vec![0; nu],
                sup: vec![0; nu],
            },
            || (gen.workspace(), vec![0.0; gen.len()]),
            |acc, (ws, inc), i| {
                gen.fill(&mut stream(run.seed, i), ws, inc, None);
                if sd != 1.0 {
                    inc.iter_mut().for_each(|v| *v *= sd);
                }
                let (q, sup) = workload_endpoints(inc, step, c, x);
                for (j, &u) in u_list.iter().enumerate() {
                    acc.point[j] += u64::from(q > u);
                    acc.sup[j] += u64::from(sup > u);
                }
            },
        )
    };
    Ok(u_list
        .iter()
        .enumerate()
        .map(|(j, &u)| PairRow {
            u,
            point: MCEstimate::from_hits(hits.point[j], run),
            sup: MCEstimate::from_hits(hits.sup[j], run),
        })
        .collect())
}

/// P(Q(T) > u).
pub fn estimate_pi(spec: &QueueSpec, horizon: f64, u: f64, run: &McRun) -> Result<MCEstimate> {
    Ok(estimate_pair(spec, horizon, &[u], run)?[0].point)
}

/// P(sup_[0,T] Q > u).
pub fn estimate_pi_sup(spec: &QueueSpec, horizon: f64, u: f64, run: &McRun) -> Result<MCEstimate> {
    Ok(estimate_pair(spec, horizon, &[u], run)?[0].sup)
}
