use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{dot, SeededRng};
use crate::error::{GavcError, Result};

/// Dense Haar-distributed orthogonal matrix.
///
/// QR factorization of an i.i.d. Gaussian matrix, with the columns of `Q`
/// multiplied by the signs of `diag(R)`; without that correction the law is
/// not Haar. Rank-deficient draws are resampled.
pub fn haar_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(GavcError::param("n", "blocklength must be >= 1"));
    }
    loop {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].abs() < 1e-12 * (n as f64).sqrt()) {
            continue;
        }
        let mut q = qr.q();
        for (j, mut col) in q.column_iter_mut().enumerate() {
            if r[(j, j)] < 0.0 {
                col.neg_mut();
            }
        }
        return Ok(q);
    }
}

/// Haar rotation stored as a product of Householder reflections times a sign
/// diagonal, `Q = H_0 H_1 ... H_{n-2} D`.
///
/// This is the same factorization Householder QR produces for a Gaussian
/// matrix, drawn column by column: after each reflection the trailing block
/// is again i.i.d. Gaussian, so every reflector comes from a fresh draw.
/// Storage is about `n^2 / 2` numbers and applying `Q` or `Q^T` costs `O(n^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredRotation {
    n: usize,
    /// Unit reflector `v_j` acting on coordinates `j..n`.
    reflectors: Vec<Vec<f64>>,
    signs: Vec<f64>,
}

impl FactoredRotation {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            reflectors: Vec::new(),
            signs: vec![1.0; n],
        }
    }

    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(GavcError::param("n", "blocklength must be >= 1"));
        }
        let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
        let mut signs = Vec::with_capacity(n);
        for j in 0..n - 1 {
            let len = n - j;
            loop {
                let mut v: Vec<f64> = (0..len).map(|_| rng.sample(StandardNormal)).collect();
                let norm = dot(&v, &v).sqrt();
                if norm < f64::MIN_POSITIVE {
                    continue;
                }
                let s = if v[0] >= 0.0 { 1.0 } else { -1.0 };
                v[0] += s * norm;
                let vnorm = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= vnorm);
                reflectors.push(v);
                // R_jj = -s * norm, so the correction sign is -s.
                signs.push(-s);
                break;
            }
        }
        let last: f64 = rng.sample(StandardNormal);
        signs.push(if last >= 0.0 { 1.0 } else { -1.0 });
        Ok(Self { n, reflectors, signs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_identity(&self) -> bool {
        self.reflectors.is_empty() && self.signs.iter().all(|&s| s == 1.0)
    }

    fn reflect(v: &[f64], x: &mut [f64]) {
        let c = 2.0 * dot(v, x);
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= c * vi);
    }

    /// `x <- Q x`.
    pub fn apply_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        x.iter_mut().zip(&self.signs).for_each(|(xi, s)| *xi *= s);
        for (j, v) in self.reflectors.iter().enumerate().rev() {
            Self::reflect(v, &mut x[j..]);
        }
    }

    /// `x <- Q^T x`.
    pub fn apply_transpose_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for (j, v) in self.reflectors.iter().enumerate() {
            Self::reflect(v, &mut x[j..]);
        }
        x.iter_mut().zip(&self.signs).for_each(|(xi, s)| *xi *= s);
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        self.apply_transpose_in_place(&mut out);
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        let mut e = vec![0.0; self.n];
        for j in 0..self.n {
            e.iter_mut().for_each(|x| *x = 0.0);
            e[j] = 1.0;
            self.apply_in_place(&mut e);
            m.column_mut(j).copy_from_slice(&e);
        }
        m
    }
}

/// The `K` shared rotations of a randomized code; key 0 is the identity.
///
/// Rotations are regenerated on demand from `(seed, key)` rather than held in
/// memory: `K` keys of dimension `n` would otherwise need `K n^2 / 2` numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationKeySet {
    n: usize,
    k: usize,
    seed: SeededRng,
}

impl RotationKeySet {
    pub fn new(n: usize, k: usize, seed: SeededRng) -> Result<Self> {
        if n == 0 {
            return Err(GavcError::param("n", "blocklength must be >= 1"));
        }
        if k == 0 {
            return Err(GavcError::param("k", "key size must be >= 1"));
        }
        Ok(Self { n, k, seed })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn key_count(&self) -> usize {
        self.k
    }

    pub fn rotation(&self, key: usize) -> Result<FactoredRotation> {
        if key >= self.k {
            return Err(GavcError::param(
                "key",
                format!("key {key} out of range for key size {}", self.k),
            ));
        }
        if key == 0 {
            return Ok(FactoredRotation::identity(self.n));
        }
        FactoredRotation::sample(self.n, &mut self.seed.with_stream(key as u64).stream())
    }

    /// Every rotation as a dense matrix. Only sensible for small `K n^2`.
    pub fn matrices(&self) -> Result<Vec<DMatrix<f64>>> {
        (0..self.k)
            .map(|key| self.rotation(key).map(|r| r.to_dense()))
            .collect()
    }
}
