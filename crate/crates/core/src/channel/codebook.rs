use rand::Rng;

use super::{norm_sq, sample_sphere};
use crate::error::{ensure_positive, GavcError, Result};

/// `N` codewords of blocklength `n`, all on the sphere of squared radius
/// `n * power`. Codewords are stored contiguously, row `i` is codeword `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    n: usize,
    power: f64,
    data: Vec<f64>,
}

const SPHERE_RTOL: f64 = 1e-9;

impl Codebook {
    /// `big_n` independent uniform points on the `sqrt(n * power)` sphere.
    pub fn random_sphere<R: Rng + ?Sized>(n: usize, big_n: usize, power: f64, rng: &mut R) -> Result<Self> {
        if big_n == 0 {
            return Err(GavcError::param("big_n", "codebook needs at least one codeword"));
        }
        ensure_positive("power", power)?;
        let radius = (n as f64 * power).sqrt();
        let mut data = Vec::with_capacity(n * big_n);
        for _ in 0..big_n {
            data.extend(sample_sphere(n, radius, rng)?);
        }
        Ok(Self { n, power, data })
    }

    /// Wrap explicit codewords, checking the sphere invariant.
    pub fn from_codewords(n: usize, power: f64, codewords: &[Vec<f64>]) -> Result<Self> {
        if codewords.is_empty() {
            return Err(GavcError::param("codewords", "codebook needs at least one codeword"));
        }
        ensure_positive("power", power)?;
        let target = n as f64 * power;
        let mut data = Vec::with_capacity(n * codewords.len());
        for (i, c) in codewords.iter().enumerate() {
            if c.len() != n {
                return Err(GavcError::DimensionMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
            let e = norm_sq(c);
            if ((e - target) / target).abs() > SPHERE_RTOL {
                return Err(GavcError::param(
                    "codewords",
                    format!("codeword {i} has squared norm {e}, expected {target}"),
                ));
            }
            data.extend_from_slice(c);
        }
        Ok(Self { n, power, data })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn radius(&self) -> f64 {
        (self.n as f64 * self.power).sqrt()
    }

    /// `(1/n) log2 N`.
    pub fn rate_bits(&self) -> f64 {
        (self.len() as f64).log2() / self.n as f64
    }

    pub fn codeword(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n)
    }
}
