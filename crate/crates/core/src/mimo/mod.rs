//! Rates for the MIMO channel with a rank-one jammer: `Y = X + W + s g`,
//! `W ~ N(0, diag(nu))`, `tr Sigma_X <= gamma`, `E s^2 <= lambda`.

mod jam;
mod maxmin;

pub use jam::{
    elementary_jam_rates, minmax_rate_oracle, optimal_jam_index, worst_g_oracle, worst_g_oracle_with, MinMaxOracle,
    OracleConfig, WorstJam,
};
pub use maxmin::{
    asymptotic_rate_221, maxmin_rate_221, maxmin_solver_general, rate_wfillnew, Case221, MaxMin221, MaxMinSolution,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_nonneg, GavcError, Result};
use crate::rates::half_log;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MimoSpec {
    nu: Vec<f64>,
    gamma: f64,
    lambda: f64,
}

impl MimoSpec {
    /// `nu` need not be sorted; the operations that depend on the ordering
    /// check it themselves.
    pub fn new(nu: Vec<f64>, gamma: f64, lambda: f64) -> Result<Self> {
        if nu.is_empty() {
            return Err(GavcError::param("nu", "need at least one antenna"));
        }
        for &v in &nu {
            ensure_finite("nu", v)?;
            if v <= 0.0 {
                return Err(GavcError::param("nu", "noise variances must be positive"));
            }
        }
        ensure_nonneg("gamma", gamma)?;
        ensure_nonneg("lambda", lambda)?;
        Ok(Self { nu, gamma, lambda })
    }

    pub fn m(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.nu.clone(), self.gamma, lambda)
    }

    pub fn is_sorted(&self) -> bool {
        self.nu.windows(2).all(|w| w[0] <= w[1])
    }

    pub(crate) fn require_sorted(&self) -> Result<()> {
        if self.is_sorted() {
            Ok(())
        } else {
            Err(GavcError::param("nu", "noise variances must be sorted ascending"))
        }
    }

    pub fn noise_cov(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.nu))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    /// Present when the allocation came from waterfilling.
    pub water_level: Option<f64>,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.powers))
    }
}

/// Unit jamming direction, sign-canonical (first nonzero entry positive)
/// since `g` and `-g` give the same jammer covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JamDirection {
    g: Vec<f64>,
}

impl JamDirection {
    pub fn new(g: Vec<f64>) -> Result<Self> {
        for &x in &g {
            ensure_finite("g", x)?;
        }
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if g.is_empty() || norm == 0.0 {
            return Err(GavcError::param("g", "direction must be a nonzero vector"));
        }
        let flip = g.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0);
        let s = if flip { -1.0 / norm } else { 1.0 / norm };
        Ok(Self {
            g: g.into_iter().map(|x| x * s).collect(),
        })
    }

    pub fn elementary(m: usize, index: usize) -> Result<Self> {
        if index >= m {
            return Err(GavcError::param("index", format!("{index} out of range for M = {m}")));
        }
        let mut g = vec![0.0; m];
        g[index] = 1.0;
        Ok(Self { g })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    /// Index of the coordinate axis this direction lies on, if any.
    pub fn elementary_index(&self, tol: f64) -> Option<usize> {
        let (i, &big) = self
            .g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))?;
        (1.0 - big.abs() <= tol).then_some(i)
    }
}

pub fn waterfill(noise: &[f64], budget: f64) -> Result<PowerAllocation> {
    ensure_nonneg("budget", budget)?;
    if noise.is_empty() {
        return Err(GavcError::param("noise", "empty noise vector"));
    }
    for &v in noise {
        ensure_finite("noise", v)?;
        if v <= 0.0 {
            return Err(GavcError::param("noise", "noise variances must be positive"));
        }
    }
    Ok(waterfill_unchecked(noise, budget))
}

pub(crate) fn waterfill_unchecked(noise: &[f64], budget: f64) -> PowerAllocation {
    let mut sorted: Vec<f64> = noise.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Grow the active set while the level clears the next noise floor.
    let mut sum = 0.0;
    let mut level = sorted[0];
    for (k, &v) in sorted.iter().enumerate() {
        let candidate = (budget + sum + v) / (k + 1) as f64;
        if k > 0 && candidate <= v {
            break;
        }
        sum += v;
        level = candidate;
    }
    let powers = noise.iter().map(|&v| (level - v).max(0.0)).collect();
    PowerAllocation {
        powers,
        water_level: Some(level),
    }
}

fn parallel_rate(powers: &[f64], noise: &[f64]) -> f64 {
    powers.iter().zip(noise).map(|(&p, &n)| half_log(1.0 + p / n)).sum()
}

/// Mutual waterfilling: the jammer spreads its power over all antennas, the
/// transmitter waterfills against the result.
pub fn full_rank_rate(spec: &MimoSpec) -> f64 {
    full_rank_allocation(spec).2
}

pub(crate) fn full_rank_allocation(spec: &MimoSpec) -> (PowerAllocation, PowerAllocation, f64) {
    let jam = waterfill_unchecked(&spec.nu, spec.lambda);
    let eff: Vec<f64> = spec.nu.iter().zip(&jam.powers).map(|(n, j)| n + j).collect();
    let tx = waterfill_unchecked(&eff, spec.gamma);
    let r = parallel_rate(&tx.powers, &eff);
    (jam, tx, r)
}

/// Rate when the jammer's whole budget sits on the quietest antenna.
pub fn upper_bound_rate(spec: &MimoSpec) -> f64 {
    let quiet = spec
        .nu
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let mut tau = spec.nu.clone();
    tau[quiet] += spec.lambda;
    let tx = waterfill_unchecked(&tau, spec.gamma);
    parallel_rate(&tx.powers, &tau)
}

/// Capacity of the channel with Gaussian noise of covariance `noise_cov`:
/// waterfilling over its eigenvalues.
pub fn colored_noise_capacity(noise_cov: &DMatrix<f64>, gamma: f64) -> Result<f64> {
    ensure_nonneg("gamma", gamma)?;
    let eig = SymmetricEigen::new(noise_cov.clone());
    let ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if ev.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
        return Err(GavcError::param("noise_cov", "must be positive definite"));
    }
    let tx = waterfill_unchecked(&ev, gamma);
    Ok(parallel_rate(&tx.powers, &ev))
}

pub(crate) fn check_covariance(spec: &MimoSpec, sx: &DMatrix<f64>) -> Result<()> {
    let m = spec.m();
    if sx.nrows() != m || sx.ncols() != m {
        return Err(GavcError::DimensionMismatch {
            expected: m,
            actual: sx.nrows().max(sx.ncols()),
        });
    }
    if sx.iter().any(|x| !x.is_finite()) {
        return Err(GavcError::param("sx", "entries must be finite"));
    }
    let scale = sx.amax().max(1.0);
    if (sx - sx.transpose()).amax() > 1e-9 * scale {
        return Err(GavcError::param("sx", "covariance must be symmetric"));
    }
    let min_ev = SymmetricEigen::new(sx.clone()).eigenvalues.min();
    if min_ev < -1e-9 * scale {
        return Err(GavcError::param("sx", "covariance must be positive semidefinite"));
    }
    if sx.trace() > spec.gamma + 1e-9 {
        return Err(GavcError::param(
            "sx",
            format!("trace {} exceeds the power budget {}", sx.trace(), spec.gamma),
        ));
    }
    Ok(())
}

fn log_det_pd(a: &DMatrix<f64>) -> Result<f64> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| GavcError::Numeric("matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Precomputed pieces of `J(g) = 1/2 log det(A + L gg')/det(B + L gg')`
/// with `A = Sigma_X + Sigma_W`, `B = Sigma_W`.
pub(crate) struct RankOneRate {
    pub(crate) base: f64,
    pub(crate) a_inv: DMatrix<f64>,
    pub(crate) b_inv: DMatrix<f64>,
    pub(crate) lambda: f64,
}

impl RankOneRate {
    pub(crate) fn new(spec: &MimoSpec, sx: &DMatrix<f64>) -> Result<Self> {
        let b = spec.noise_cov();
        let a = sx + &b;
        let base = (log_det_pd(&a)? - log_det_pd(&b)?) / (2.0 * crate::rates::RATE_UNIT_LN);
        let a_inv = a
            .try_inverse()
            .ok_or_else(|| GavcError::Numeric("Sigma_X + Sigma_W is singular".into()))?;
        let b_inv = DMatrix::from_diagonal(&DVector::from_iterator(spec.m(), spec.nu.iter().map(|v| 1.0 / v)));
        Ok(Self {
            base,
            a_inv,
            b_inv,
            lambda: spec.lambda,
        })
    }

    pub(crate) fn eval(&self, g: &DVector<f64>) -> f64 {
        let qa = g.dot(&(&self.a_inv * g));
        let qb = g.dot(&(&self.b_inv * g));
        self.base + half_log(1.0 + self.lambda * qa) - half_log(1.0 + self.lambda * qb)
    }

    /// Gradient in nats, up to the constant `1 / ln 2`.
    pub(crate) fn grad_nats(&self, g: &DVector<f64>) -> DVector<f64> {
        let ag = &self.a_inv * g;
        let bg = &self.b_inv * g;
        let qa = g.dot(&ag);
        let qb = g.dot(&bg);
        ag * (self.lambda / (1.0 + self.lambda * qa)) - bg * (self.lambda / (1.0 + self.lambda * qb))
    }
}

/// Mutual information with input covariance `sx` against a jammer on `g`,
/// via the matrix determinant lemma.
pub fn mimo_rate(spec: &MimoSpec, sx: &DMatrix<f64>, g: &JamDirection) -> Result<f64> {
    check_covariance(spec, sx)?;
    if g.dim() != spec.m() {
        return Err(GavcError::DimensionMismatch {
            expected: spec.m(),
            actual: g.dim(),
        });
    }
    let gv = DVector::from_column_slice(g.as_slice());
    let r = RankOneRate::new(spec, sx)?.eval(&gv);

    let ggt = &gv * gv.transpose() * spec.lambda;
    let b = spec.noise_cov() + &ggt;
    let direct = (log_det_pd(&(sx + &b))? - log_det_pd(&b)?) / (2.0 * crate::rates::RATE_UNIT_LN);
    if (r - direct).abs() > 1e-8 * direct.abs().max(1.0) {
        return Err(GavcError::Numeric(format!(
            "determinant lemma {r} disagrees with direct evaluation {direct}"
        )));
    }
    Ok(r)
}

/// `det(A + u v') = det(A) (1 + v' A^{-1} u)`.
pub fn det_rank_one_update(a: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
    if !a.is_square() {
        return Err(GavcError::param("a", "matrix must be square"));
    }
    for len in [u.len(), v.len()] {
        if len != a.nrows() {
            return Err(GavcError::DimensionMismatch {
                expected: a.nrows(),
                actual: len,
            });
        }
    }
    let lu = a.clone().lu();
    let det = lu.determinant();
    let x = lu
        .solve(u)
        .filter(|_| det != 0.0 && det.is_finite())
        .ok_or_else(|| GavcError::Numeric("matrix is singular".into()))?;
    Ok(det * (1.0 + v.dot(&x)))
}
