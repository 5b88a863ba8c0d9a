//! Seeded Monte Carlo plumbing.
//!
//! Work is cut into fixed-size chunks and chunk `k` draws from ChaCha stream
//! `(purpose, k)` of the run seed. The chunking never depends on the number of
//! rayon workers, so results are bit-identical for any thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type Rng = ChaCha8Rng;

/// Items per RNG stream.
pub const CHUNK: usize = 4096;

/// Sampling budget and seed for one Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCConfig {
    pub seed: u64,
    pub samples: usize,
}

impl MCConfig {
    pub fn new(seed: u64, samples: usize) -> Self {
        Self { seed, samples }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        Self { samples, ..self }
    }
}

/// Stream identifiers keep independent estimators that share a seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Purpose {
    HitOrMiss = 1,
    Walkers = 2,
    ExitTime = 3,
    Asymmetry = 4,
    Paths = 5,
    SausageVolume = 6,
    Bootstrap = 7,
    Refine = 8,
    Corpus = 9,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 40) ^ index);
    rng
}

/// Runs `f` over `n` items split into [`CHUNK`]-sized pieces, each with its own
/// stream, and returns the per-chunk results in chunk order.
pub fn par_chunks<T, F>(seed: u64, purpose: Purpose, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut Rng, std::ops::Range<usize>) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, purpose, k as u64);
            let lo = k * CHUNK;
            f(&mut rng, lo..(lo + CHUNK).min(n))
        })
        .collect()
}

/// Running sums for a sample mean and its standard error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub n: usize,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Tally {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(mut self, other: Tally) -> Tally {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }
}

impl std::iter::Sum for Tally {
    fn sum<I: Iterator<Item = Tally>>(iter: I) -> Self {
        iter.fold(Tally::default(), Tally::merge)
    }
}

/// Uniform point on the unit sphere `S^{d-1}`.
pub fn unit_vector(rng: &mut Rng, d: usize) -> Vec<f64> {
    use rand_distr::{Distribution, StandardNormal};
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in the unit ball of `R^d`.
pub fn unit_ball_point(rng: &mut Rng, d: usize) -> Vec<f64> {
    use rand::Rng as _;
    let u: f64 = rng.random();
    let r = u.powf(1.0 / d as f64);
    unit_vector(rng, d).into_iter().map(|x| x * r).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn chunks_are_deterministic() {
        let draw = |rng: &mut Rng, r: std::ops::Range<usize>| -> Vec<f64> {
            r.map(|_| rng.random::<f64>()).collect()
        };
        let a = par_chunks(7, Purpose::HitOrMiss, 10_000, draw);
        let b = par_chunks(7, Purpose::HitOrMiss, 10_000, draw);
        assert_eq!(a, b);
        let c = par_chunks(7, Purpose::Walkers, 10_000, draw);
        assert_ne!(a, c);
    }

    #[test]
    fn tally_stats() {
        let mut t = Tally::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            t.push(x);
        }
        assert!((t.mean() - 2.5).abs() < 1e-15);
        assert!((t.variance() - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ball_points_inside() {
        let mut rng = stream(1, Purpose::HitOrMiss, 0);
        for _ in 0..1000 {
            let p = unit_ball_point(&mut rng, 4);
            assert!(p.iter().map(|x| x * x).sum::<f64>() <= 1.0);
        }
    }
}
