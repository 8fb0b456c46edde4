//! Fractional Gaussian noise by circulant embedding, and the workload
//! recursion on a grid.

use std::sync::Arc;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{stream, Rng};

/// Values of a process on an equispaced grid, starting with X(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePath {
    pub step: f64,
    pub values: Vec<f64>,
}

impl SamplePath {
    /// Path from its increments.
    pub fn from_increments(step: f64, increments: &[f64]) -> Self {
        let mut values = Vec::with_capacity(increments.len() + 1);
        let mut x = 0.0;
        values.push(x);
        for d in increments {
            x += d;
            values.push(x);
        }
        Self { step, values }
    }
}

/// Workload Q on the grid of a sample path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadPath {
    pub step: f64,
    pub q_values: Vec<f64>,
    pub running_sup: f64,
}

/// Cross-check tolerance for negative circulant eigenvalues, relative to gamma(0).
const EIGEN_TOLERANCE: f64 = 1e-9;

enum Noise {
    /// H = 1/2: independent increments.
    White { sd: f64 },
    /// H = 1: X(t) = t N, every increment equals step * N.
    Linear { step: f64 },
    Circulant {
        sqrt_eig: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

/// Sampler for n increments of fBm with Var X(t) = t^(2H) on a grid of the given step.
pub struct FgnGenerator {
    hurst: f64,
    n: usize,
    step: f64,
    noise: Noise,
}

/// Per-thread buffers for [`FgnGenerator`].
pub struct Workspace {
    buf: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
}

/// Autocovariance of fractional Gaussian noise with unit step.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

impl FgnGenerator {
    /// `hurst` in (0, 1]; H = 1 is the degenerate fBm t N used by limiting processes.
    pub fn new(hurst: f64, n: usize, step: f64) -> Result<Self> {
        if !(hurst > 0.0 && hurst <= 1.0) {
            return Err(Error::Config(format!("hurst must lie in (0,1], got {hurst}")));
        }
        if n == 0 || !(step > 0.0 && step.is_finite()) {
            return Err(Error::Config(format!(
                "need n >= 1 and a positive step, got n = {n}, step = {step}"
            )));
        }
        let noise = if hurst == 0.5 {
            Noise::White { sd: step.sqrt() }
        } else if hurst == 1.0 {
            Noise::Linear { step }
        } else {
            let half = n.next_power_of_two();
            let m = 2 * half;
            let var = step.powf(2.0 * hurst);
            let mut row: Vec<Complex<f64>> = (0..m)
                .map(|k| {
                    let lag = if k <= half { k } else { m - k };
                    Complex::new(fgn_autocovariance(hurst, lag), 0.0)
                })
                .collect();
            let fft = FftPlanner::new().plan_fft_forward(m);
            fft.process(&mut row);
            let mut sqrt_eig = Vec::with_capacity(m);
            for lambda in &row {
                // gamma(0) = 1 before scaling
                if lambda.re < -EIGEN_TOLERANCE {
                    return Err(Error::Embedding(format!(
                        "negative circulant eigenvalue {} for H = {hurst}, n = {n}",
                        lambda.re
                    )));
                }
                sqrt_eig.push((lambda.re.max(0.0) * var / m as f64).sqrt());
            }
            Noise::Circulant { sqrt_eig, fft }
        };
        Ok(Self {
            hurst,
            n,
            step,
            noise,
        })
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn workspace(&self) -> Workspace {
        match &self.noise {
            Noise::Circulant { sqrt_eig, fft } => Workspace {
                buf: vec![Complex::new(0.0, 0.0); sqrt_eig.len()],
                scratch: vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            },
            _ => Workspace {
                buf: Vec::new(),
                scratch: Vec::new(),
            },
        }
    }

    /// Fill `a` (and `b`, if given) with independent increment sequences.
    /// Both slices must have length `self.len()`.
    pub fn fill(&self, rng: &mut Rng, ws: &mut Workspace, a: &mut [f64], b: Option<&mut [f64]>) {
        debug_assert_eq!(a.len(), self.n);
        match &self.noise {
            Noise::White { sd } => {
                for v in a.iter_mut() {
                    *v = sd * rng.sample::<f64, _>(StandardNormal);
                }
                if let Some(b) = b {
                    for v in b.iter_mut() {
                        *v = sd * rng.sample::<f64, _>(StandardNormal);
                    }
                }
            }
            Noise::Linear { step } => {
                a.fill(step * rng.sample::<f64, _>(StandardNormal));
                if let Some(b) = b {
                    b.fill(step * rng.sample::<f64, _>(StandardNormal));
                }
            }
            Noise::Circulant { sqrt_eig, fft } => {
                for (w, s) in ws.buf.iter_mut().zip(sqrt_eig) {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *w = Complex::new(s * re, s * im);
                }
                fft.process_with_scratch(&mut ws.buf, &mut ws.scratch);
                // real and imaginary parts are independent copies
                for (v, w) in a.iter_mut().zip(&ws.buf) {
                    *v = w.re;
                }
                if let Some(b) = b {
                    for (v, w) in b.iter_mut().zip(&ws.buf) {
                        *v = w.im;
                    }
                }
            }
        }
    }

    /// One path from replicate stream `index` of `seed`.
    pub fn path(&self, seed: u64, index: u64) -> SamplePath {
        let mut inc = vec![0.0; self.n];
        let mut ws = self.workspace();
        self.fill(&mut stream(seed, index), &mut ws, &mut inc, None);
        SamplePath::from_increments(self.step, &inc)
    }
}

/// fBm on n steps of the given size; `n` need not be a power of two.
pub fn generate_fgn(hurst: f64, n: usize, step: f64, seed: u64) -> Result<SamplePath> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Config(format!("hurst must lie in (0,1), got {hurst}")));
    }
    Ok(FgnGenerator::new(hurst, n, step)?.path(seed, 0))
}

/// Final workload and its running maximum, straight from increments.
pub fn workload_endpoints(increments: &[f64], step: f64, c: f64, x: f64) -> (f64, f64) {
    let drain = c * step;
    let mut w = 0.0f64;
    let mut free = x;
    let mut q = x;
    let mut sup = x;
    for d in increments {
        w = (w + d - drain).max(0.0);
        free += d - drain;
        q = free.max(w);
        sup = sup.max(q);
    }
    (q, sup)
}

/// Q on every grid point via the Lindley recursion for the reflected part.
pub fn workload_path(path: &SamplePath, c: f64, x: f64) -> WorkloadPath {
    let drain = c * path.step;
    let mut q_values = Vec::with_capacity(path.values.len());
    let mut w = 0.0f64;
    let mut sup = x;
    q_values.push(x);
    for (k, pair) in path.values.windows(2).enumerate() {
        w = (w + pair[1] - pair[0] - drain).max(0.0);
        let t = (k + 1) as f64 * path.step;
        let q = (x + pair[1] - c * t).max(w);
        sup = sup.max(q);
        q_values.push(q);
    }
    WorkloadPath {
        step: path.step,
        q_values,
        running_sup: sup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_drain() {
        let p = SamplePath::from_increments(1.0, &[0.0; 3]);
        let w = workload_path(&p, 1.0, 5.0);
        assert_eq!(w.q_values, vec![5.0, 4.0, 3.0, 2.0]);
        assert_eq!(w.running_sup, 5.0);
        assert_eq!(workload_path(&p, 1.0, 1.0).q_values, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn hand_computed_recursion() {
        let p = SamplePath::from_increments(1.0, &[2.0, 0.0]);
        let w = workload_path(&p, 1.0, 0.0);
        assert_eq!(w.q_values, vec![0.0, 1.0, 0.0]);
        assert_eq!(workload_endpoints(&[2.0, 0.0], 1.0, 1.0, 0.0), (0.0, 1.0));
    }

    #[test]
    fn same_seed_same_path() {
        for h in [0.3, 0.5, 0.8] {
            let a = generate_fgn(h, 100, 0.1, 42).unwrap();
            assert_eq!(a, generate_fgn(h, 100, 0.1, 42).unwrap());
            assert_ne!(a, generate_fgn(h, 100, 0.1, 43).unwrap());
            assert_eq!(a.values.len(), 101);
            assert_eq!(a.values[0], 0.0);
        }
    }

    #[test]
    fn autocovariance_values() {
        assert_eq!(fgn_autocovariance(0.5, 0), 1.0);
        assert!(fgn_autocovariance(0.5, 3).abs() < 1e-15);
        // 0.5 (2^1.5 - 2)
        assert!((fgn_autocovariance(0.75, 1) - 0.414_213_562_373_095).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_hurst() {
        assert!(generate_fgn(1.0, 8, 1.0, 0).is_err());
        assert!(generate_fgn(0.0, 8, 1.0, 0).is_err());
        assert!(FgnGenerator::new(1.0, 8, 1.0).is_ok());
    }
}
