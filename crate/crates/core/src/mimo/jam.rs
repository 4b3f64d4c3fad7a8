use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_covariance, colored_noise_capacity, JamDirection, MimoSpec, RankOneRate};
use crate::channel::{sample_sphere, SeededRng};
use crate::dpc_opt::golden_max;
use crate::error::{ensure_nonneg, GavcError, Result};
use crate::rates::half_log;

/// Worst elementary jamming direction for a diagonal input: the index
/// maximizing `(p_i / nu_i) / (p_i + nu_i + lambda)`, lowest index on ties.
pub fn optimal_jam_index(sx_diag: &[f64], nu: &[f64], lambda: f64) -> Result<usize> {
    if sx_diag.len() != nu.len() {
        return Err(GavcError::DimensionMismatch {
            expected: nu.len(),
            actual: sx_diag.len(),
        });
    }
    if nu.is_empty() {
        return Err(GavcError::param("nu", "empty noise vector"));
    }
    ensure_nonneg("lambda", lambda)?;
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (i, (&p, &v)) in sx_diag.iter().zip(nu).enumerate() {
        let score = (p / v) / (p + v + lambda);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    Ok(best)
}

/// Rate against a jammer on each coordinate axis, for a diagonal input.
pub fn elementary_jam_rates(spec: &MimoSpec, powers: &[f64]) -> Result<Vec<f64>> {
    if powers.len() != spec.m() {
        return Err(GavcError::DimensionMismatch {
            expected: spec.m(),
            actual: powers.len(),
        });
    }
    Ok(elementary_rates_unchecked(spec, powers))
}

pub(crate) fn elementary_rates_unchecked(spec: &MimoSpec, powers: &[f64]) -> Vec<f64> {
    let clean: Vec<f64> = powers
        .iter()
        .zip(spec.nu())
        .map(|(&p, &v)| half_log(1.0 + p / v))
        .collect();
    let total: f64 = clean.iter().sum();
    (0..spec.m())
        .map(|m| total - clean[m] + half_log(1.0 + powers[m] / (spec.nu()[m] + spec.lambda())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Angle grid size for M = 2.
    pub angle_grid: usize,
    /// Random restarts for M > 2.
    pub starts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            angle_grid: 10_000,
            starts: 10_000,
            max_iter: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstJam {
    pub direction: JamDirection,
    pub rate: f64,
    /// The objective does not depend on `g` (no jammer, or M = 1).
    pub flat: bool,
}

/// Brute-force minimization of the rate over all unit jamming directions.
pub fn worst_g_oracle(spec: &MimoSpec, sx: &DMatrix<f64>) -> Result<WorstJam> {
    worst_g_oracle_with(spec, sx, &OracleConfig::default())
}

pub fn worst_g_oracle_with(spec: &MimoSpec, sx: &DMatrix<f64>, cfg: &OracleConfig) -> Result<WorstJam> {
    check_covariance(spec, sx)?;
    let j = RankOneRate::new(spec, sx)?;
    let m = spec.m();
    let flat_tol = |lo: f64, hi: f64| hi - lo <= 1e-12 * hi.abs().max(1.0);

    if m == 1 {
        return Ok(WorstJam {
            direction: JamDirection::elementary(1, 0)?,
            rate: j.eval(&DVector::from_element(1, 1.0)),
            flat: true,
        });
    }

    if m == 2 {
        if cfg.angle_grid < 2 {
            return Err(GavcError::param("angle_grid", "need at least two angles"));
        }
        let at = |t: f64| j.eval(&DVector::from_vec(vec![t.cos(), t.sin()]));
        let step = PI / cfg.angle_grid as f64;
        let (mut lo, mut hi, mut arg) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for k in 0..cfg.angle_grid {
            let v = at(k as f64 * step);
            hi = hi.max(v);
            if v < lo {
                lo = v;
                arg = k as f64 * step;
            }
        }
        let flat = flat_tol(lo, hi);
        let (mut theta, mut rate) = (arg, lo);
        if !flat {
            let (t, neg) = golden_max(|t| -at(t), arg - step, arg + step, 1e-13);
            if -neg < rate {
                theta = t;
                rate = -neg;
            }
        }
        return Ok(WorstJam {
            direction: JamDirection::new(vec![theta.cos(), theta.sin()])?,
            rate,
            flat,
        });
    }

    if cfg.starts == 0 {
        return Err(GavcError::param("starts", "need at least one start"));
    }
    let root = SeededRng::new(cfg.seed).derive(0x77_6f72_7374_5f67);
    let runs: Vec<(f64, f64, DVector<f64>)> = (0..cfg.starts as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = root.with_stream(s).stream();
            let mut g = DVector::from_vec(sample_sphere(m, 1.0, &mut rng).expect("m >= 1"));
            let first = j.eval(&g);
            let mut val = first;
            let mut t = 1.0;
            for _ in 0..cfg.max_iter {
                let grad = j.grad_nats(&g);
                let tangent = &grad - &g * g.dot(&grad);
                if tangent.norm() < 1e-12 {
                    break;
                }
                loop {
                    let mut cand = &g - &tangent * t;
                    cand /= cand.norm();
                    let v = j.eval(&cand);
                    if v < val {
                        g = cand;
                        val = v;
                        t *= 2.0;
                        break;
                    }
                    t *= 0.5;
                    if t < 1e-16 {
                        break;
                    }
                }
                if t < 1e-16 {
                    break;
                }
            }
            (first, val, g)
        })
        .collect();
    let first_hi = runs.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let first_lo = runs.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let best = runs.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("starts > 0");
    Ok(WorstJam {
        direction: JamDirection::new(best.2.iter().copied().collect())?,
        rate: best.1,
        flat: flat_tol(first_lo, first_hi),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxOracle {
    pub direction: JamDirection,
    pub rate: f64,
}

/// Jammer commits to `g` first, the transmitter waterfills against the
/// resulting colored noise: `min_g C(Sigma_W + lambda g g')`. Two antennas
/// only (angle grid plus golden-section polish).
pub fn minmax_rate_oracle(spec: &MimoSpec, angle_grid: usize) -> Result<MinMaxOracle> {
    if spec.m() != 2 {
        return Err(GavcError::DimensionMismatch {
            expected: 2,
            actual: spec.m(),
        });
    }
    if angle_grid < 2 {
        return Err(GavcError::param("angle_grid", "need at least two angles"));
    }
    let base = spec.noise_cov();
    let cap = |t: f64| {
        let g = DVector::from_vec(vec![t.cos(), t.sin()]);
        let n = &base + &g * g.transpose() * spec.lambda();
        colored_noise_capacity(&n, spec.gamma()).unwrap_or(f64::INFINITY)
    };
    let step = PI / angle_grid as f64;
    let (mut arg, mut lo) = (0.0, f64::INFINITY);
    for k in 0..angle_grid {
        let v = cap(k as f64 * step);
        if v < lo {
            lo = v;
            arg = k as f64 * step;
        }
    }
    let (t, neg) = golden_max(|t| -cap(t), arg - step, arg + step, 1e-13);
    let (theta, rate) = if -neg < lo { (t, -neg) } else { (arg, lo) };
    Ok(MinMaxOracle {
        direction: JamDirection::new(vec![theta.cos(), theta.sin()])?,
        rate,
    })
}
