//! Geometric and stochastic primitives shared by the analytic and Monte Carlo
//! layers: channel parameters, seeded random streams, sphere sampling, Gaussian
//! noise and Haar rotations.

mod codebook;
mod rotation;

pub use codebook::Codebook;
pub use rotation::{haar_rotation, FactoredRotation, RotationKeySet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, ensure_positive, GavcError, Result};

/// Scalar Gaussian AVC `Y = X + s + W`.
///
/// `gamma` is the per-symbol input power, `lambda` the per-symbol jammer power
/// and `sigma_w2` the AWGN variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarAvcSpec {
    pub gamma: f64,
    pub lambda: f64,
    pub sigma_w2: f64,
}

impl ScalarAvcSpec {
    pub fn new(gamma: f64, lambda: f64, sigma_w2: f64) -> Result<Self> {
        let spec = Self {
            gamma,
            lambda,
            sigma_w2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonneg("gamma", self.gamma)?;
        ensure_nonneg("lambda", self.lambda)?;
        ensure_positive("sigma_w2", self.sigma_w2)
    }

    /// Largest admissible squared norm of a length-`n` jamming vector.
    pub fn jammer_budget(&self, n: usize) -> f64 {
        n as f64 * self.lambda
    }
}

/// Root seed plus a stream index.
///
/// Every random quantity in the crate is a pure function of the pair; parallel
/// trial blocks use `stream_id` = block index so results do not depend on the
/// number of workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRng {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    /// Independent root for a different purpose (codebook, keys, trials, ...).
    pub fn derive(self, label: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(label.wrapping_add(0x9e37_79b9_7f4a_7c15))),
            stream_id: self.stream_id,
        }
    }

    pub fn stream(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform point on the sphere of the given radius in `R^n`.
///
/// A Gaussian draw is normalized; the (probability zero) all-zero draw is
/// resampled.
pub fn sample_sphere<R: Rng + ?Sized>(n: usize, radius: f64, rng: &mut R) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GavcError::param("n", "blocklength must be >= 1"));
    }
    ensure_nonneg("radius", radius)?;
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm_sq(&v).sqrt();
        if norm > f64::MIN_POSITIVE {
            let scale = radius / norm;
            v.iter_mut().for_each(|x| *x *= scale);
            return Ok(v);
        }
    }
}

/// i.i.d. `N(0, variance)` vector of length `n`.
pub fn awgn<R: Rng + ?Sized>(n: usize, variance: f64, rng: &mut R) -> Result<Vec<f64>> {
    ensure_nonneg("variance", variance)?;
    if variance == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let sd = variance.sqrt();
    Ok((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect())
}

/// Four independent accumulators so the loop is not bound by add latency.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
