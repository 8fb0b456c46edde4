//! Counter-based sub-seeding and the deterministic replicate driver.
//!
//! Replicate `i` of a run with seed `s` draws from its own Xoshiro256++ stream
//! keyed by `(s, i)`, so its randomness does not depend on which thread runs
//! it. Replicates are processed in fixed-size blocks whose partial results are
//! merged in block order, which makes totals bit-identical for any thread count.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

pub type Rng = Xoshiro256PlusPlus;

/// Replicates per block. Part of the determinism contract: changing it changes
/// floating-point summation order.
pub const BLOCK: u64 = 512;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream of replicate `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Rng {
    let mut key = [0u8; 32];
    let words = [
        splitmix64(seed),
        splitmix64(index ^ 0x6A09_E667_F3BC_C908),
        splitmix64(seed.rotate_left(17) ^ splitmix64(index)),
        splitmix64(index.wrapping_mul(0xD1B5_4A32_D192_ED03) ^ seed),
    ];
    for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
        chunk.copy_from_slice(&w.to_le_bytes());
    }
    Rng::from_seed(key)
}

/// Partial results that can be combined across blocks.
pub trait Accumulator: Send {
    fn merge(&mut self, other: Self);
}

/// Run `reps` replicates in blocks on the current rayon pool. `work` builds
/// per-block scratch space; `body` handles one replicate index.
pub fn replicate<A, W>(
    reps: u64,
    new_acc: impl Fn() -> A + Sync,
    work: impl Fn() -> W + Sync,
    body: impl Fn(&mut A, &mut W, u64) + Sync,
) -> A
where
    A: Accumulator,
{
    let blocks = reps.div_ceil(BLOCK);
    let parts: Vec<A> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = new_acc();
            let mut w = work();
            for i in b * BLOCK..((b + 1) * BLOCK).min(reps) {
                body(&mut acc, &mut w, i);
            }
            acc
        })
        .collect();
    let mut total = new_acc();
    for p in parts {
        total.merge(p);
    }
    total
}

/// Sum and sum of squares of a per-replicate statistic, one slot per output.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(slots: usize) -> Self {
        Self {
            sum: vec![0.0; slots],
            sum_sq: vec![0.0; slots],
        }
    }

    pub fn add(&mut self, slot: usize, v: f64) {
        self.sum[slot] += v;
        self.sum_sq[slot] += v * v;
    }

    /// Sample mean and standard error of the mean for `n` replicates.
    pub fn mean_se(&self, slot: usize, n: u64) -> (f64, f64) {
        let nf = n as f64;
        let mean = self.sum[slot] / nf;
        if n < 2 {
            return (mean, 0.0);
        }
        let var = ((self.sum_sq[slot] - nf * mean * mean) / (nf - 1.0)).max(0.0);
        (mean, (var / nf).sqrt())
    }
}

impl Accumulator for Moments {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
    }
}

/// Run `f` on a pool with `threads` workers, or on the global pool for `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_differ_by_seed_and_index() {
        let a = stream(7, 0).next_u64();
        assert_eq!(a, stream(7, 0).next_u64());
        assert_ne!(a, stream(7, 1).next_u64());
        assert_ne!(a, stream(8, 0).next_u64());
        assert_ne!(stream(0, 1).next_u64(), stream(1, 0).next_u64());
    }

    #[test]
    fn totals_do_not_depend_on_thread_count() {
        let run = || {
            replicate(
                3000,
                || Moments::new(1),
                || (),
                |m, _, i| {
                    let x = (stream(3, i).next_u64() >> 11) as f64 / (1u64 << 53) as f64;
                    m.add(0, x.ln());
                },
            )
        };
        let one = with_threads(Some(1), run);
        let three = with_threads(Some(3), run);
        assert_eq!(one, three);
    }

    #[test]
    fn mean_and_standard_error() {
        let mut m = Moments::new(1);
        for v in [1.0, 2.0, 3.0, 4.0] {
            m.add(0, v);
        }
        let (mean, se) = m.mean_se(0, 4);
        assert_eq!(mean, 2.5);
        assert!((se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
