//! Maximization of the dirty-paper rate over the feasible design points
//! `(alpha, rho)`, and the transmit-power threshold above which Costa's
//! point is feasible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_nonneg, ensure_positive, GavcError, Result};
use crate::rates::dpc::rate_expression;
use crate::rates::{costa_alpha, DpcParams, DpcSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DpcStatus {
    Feasible,
    /// No grid point clears the jammer; no rate is claimed.
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcOptResult {
    pub status: DpcStatus,
    pub best_params: Option<DpcParams>,
    /// Bits per symbol; zero when infeasible. The rate expression can be
    /// negative at feasible points (`rho` near 1), which also reports zero.
    pub best_rate: f64,
    /// `received_power - lambda` at the optimum, never below `delta`.
    pub feasibility_margin: f64,
    pub grid_step: f64,
    pub refine_tol: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcOptConfig {
    pub grid_step: f64,
    pub refine_tol: f64,
    /// Feasibility shrink; `None` means `1e-6 * (lambda + 1)`.
    pub delta: Option<f64>,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// `rho` is searched on `[-1 + rho_margin, 1 - rho_margin]`.
    pub rho_margin: f64,
    pub max_sweeps: usize,
}

impl DpcOptConfig {
    pub fn new(grid_step: f64, refine_tol: f64) -> Self {
        Self {
            grid_step,
            refine_tol,
            ..Self::default()
        }
    }
}

impl Default for DpcOptConfig {
    fn default() -> Self {
        Self {
            grid_step: 0.01,
            refine_tol: 1e-9,
            delta: None,
            alpha_min: -2.0,
            alpha_max: 3.0,
            rho_margin: 1e-6,
            max_sweeps: 200,
        }
    }
}

struct Objective<'a> {
    spec: &'a DpcSpec,
    delta: f64,
}

impl Objective<'_> {
    fn eval(&self, alpha: f64, rho: f64) -> Option<(f64, DpcParams)> {
        let p = DpcParams::new(self.spec, alpha, rho).ok()?;
        if p.received_power - self.spec.lambda < self.delta {
            return None;
        }
        let r = rate_expression(self.spec, &p);
        r.is_finite().then_some((r, p))
    }

    fn value(&self, alpha: f64, rho: f64) -> f64 {
        self.eval(alpha, rho).map_or(f64::NEG_INFINITY, |(r, _)| r)
    }
}

pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Grid search over the delta-shrunken feasible set followed by golden-section
/// coordinate ascent.
pub fn optimize_dpc(spec: &DpcSpec, grid_step: f64, refine_tol: f64) -> Result<DpcOptResult> {
    optimize_dpc_with(spec, &DpcOptConfig::new(grid_step, refine_tol))
}

pub fn optimize_dpc_with(spec: &DpcSpec, cfg: &DpcOptConfig) -> Result<DpcOptResult> {
    spec.validate()?;
    ensure_positive("grid_step", cfg.grid_step)?;
    ensure_positive("refine_tol", cfg.refine_tol)?;
    ensure_finite("alpha_min", cfg.alpha_min)?;
    ensure_finite("alpha_max", cfg.alpha_max)?;
    if cfg.alpha_max <= cfg.alpha_min {
        return Err(GavcError::param("alpha_max", "empty alpha search box"));
    }
    if !(0.0..0.5).contains(&cfg.rho_margin) {
        return Err(GavcError::param("rho_margin", "must lie in [0, 0.5)"));
    }
    let delta = cfg.delta.unwrap_or(1e-6 * (spec.lambda + 1.0));
    ensure_nonneg("delta", delta)?;
    let obj = Objective { spec, delta };

    let rho_lo = -1.0 + cfg.rho_margin;
    let rho_hi = 1.0 - cfg.rho_margin;
    let n_alpha = ((cfg.alpha_max - cfg.alpha_min) / cfg.grid_step).floor() as usize + 1;
    let n_rho = ((rho_hi - rho_lo) / cfg.grid_step).floor() as usize + 1;
    if n_alpha.saturating_mul(n_rho) > 50_000_000 {
        return Err(GavcError::param("grid_step", "grid too fine (over 5e7 cells)"));
    }
    let rho_at = |j: usize| (rho_lo + j as f64 * cfg.grid_step).min(rho_hi);

    let row_best: Vec<Option<(f64, f64, f64)>> = (0..n_alpha)
        .into_par_iter()
        .map(|i| {
            let alpha = cfg.alpha_min + i as f64 * cfg.grid_step;
            let mut best: Option<(f64, f64, f64)> = None;
            for j in 0..n_rho {
                let rho = rho_at(j);
                let r = obj.value(alpha, rho);
                if r.is_finite() && best.is_none_or(|b| r > b.0) {
                    best = Some((r, alpha, rho));
                }
            }
            best
        })
        .collect();

    let mut best: Option<(f64, f64, f64)> = None;
    let seeds = [(0.0, 0.0), (costa_alpha(spec), 0.0)];
    for cand in row_best.into_iter().flatten().chain(
        seeds
            .iter()
            .map(|&(a, r)| (obj.value(a, r), a, r))
            .filter(|c| c.0.is_finite()),
    ) {
        if best.is_none_or(|b| cand.0 > b.0) {
            best = Some(cand);
        }
    }

    let Some((mut rate, mut alpha, mut rho)) = best else {
        return Ok(DpcOptResult {
            status: DpcStatus::Infeasible,
            best_params: None,
            best_rate: 0.0,
            feasibility_margin: f64::NAN,
            grid_step: cfg.grid_step,
            refine_tol: cfg.refine_tol,
            delta,
        });
    };

    let width = cfg.grid_step;
    for _ in 0..cfg.max_sweeps {
        let before = rate;
        let (a, ra) = golden_max(
            |a| obj.value(a, rho),
            (alpha - width).max(cfg.alpha_min),
            (alpha + width).min(cfg.alpha_max),
            cfg.refine_tol,
        );
        if ra > rate {
            alpha = a;
            rate = ra;
        }
        let (r, rr) = golden_max(
            |r| obj.value(alpha, r),
            (rho - width).max(rho_lo),
            (rho + width).min(rho_hi),
            cfg.refine_tol,
        );
        if rr > rate {
            rho = r;
            rate = rr;
        }
        if rate - before <= cfg.refine_tol * 1e-3 {
            break;
        }
    }

    let (rate, params) = obj
        .eval(alpha, rho)
        .ok_or_else(|| GavcError::Numeric("refined point left the feasible set".into()))?;
    Ok(DpcOptResult {
        status: DpcStatus::Feasible,
        best_params: Some(params),
        best_rate: rate.max(0.0),
        feasibility_margin: params.received_power - spec.lambda,
        grid_step: cfg.grid_step,
        refine_tol: cfg.refine_tol,
        delta,
    })
}

/// Feasibility margin of Costa's point as a function of the transmit power.
pub fn costa_threshold_margin(gamma: f64, lambda: f64, sigma_t2: f64, sigma_w2: f64) -> f64 {
    let a0 = gamma / (gamma + lambda + sigma_w2);
    let den = gamma + a0 * a0 * sigma_t2;
    if den <= 0.0 {
        return -lambda;
    }
    let num = gamma + a0 * sigma_t2;
    num * num / den - lambda
}

/// Smallest transmit power at which Costa's point clears the jammer; equals
/// `lambda` without known interference. Bisection to `1e-9`.
pub fn dpc_gamma_threshold(lambda: f64, sigma_t2: f64, sigma_w2: f64) -> Result<f64> {
    ensure_nonneg("lambda", lambda)?;
    ensure_nonneg("sigma_t2", sigma_t2)?;
    ensure_nonneg("sigma_w2", sigma_w2)?;
    if sigma_t2 == 0.0 || lambda == 0.0 {
        return Ok(lambda);
    }
    let f = |g: f64| costa_threshold_margin(g, lambda, sigma_t2, sigma_w2);
    let (mut lo, mut hi) = (0.0, lambda);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(GavcError::Numeric(format!(
            "no sign change of the threshold margin on [0, {lambda}]"
        )));
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{dpc_outer_bound, dpc_rate};

    #[test]
    fn capacity_regime_hits_outer_bound() {
        let spec = DpcSpec::new(4.0, 5.0, 1.0, 2.0).unwrap();
        let res = optimize_dpc(&spec, 0.01, 1e-9).unwrap();
        let c = 0.5 * (1.0 + 4.0f64 / 6.0).log2();
        assert_eq!(res.status, DpcStatus::Feasible);
        assert!((res.best_rate - c).abs() <= 1e-6, "{}", res.best_rate);
        let p = res.best_params.unwrap();
        assert!((p.alpha - 0.4).abs() < 1e-3 && p.rho.abs() < 1e-3, "{p:?}");
        assert!(res.feasibility_margin >= res.delta);
        // interior of the alpha box
        assert!(p.alpha > -2.0 + 0.01 && p.alpha < 3.0 - 0.01);
    }

    #[test]
    fn symmetrizable_without_interference() {
        let spec = DpcSpec::new(1.0, 10.0, 1.0, 0.0).unwrap();
        let res = optimize_dpc(&spec, 0.05, 1e-6).unwrap();
        assert_eq!(res.status, DpcStatus::Infeasible);
        assert_eq!(res.best_rate, 0.0);
        assert!(res.best_params.is_none());
    }

    #[test]
    fn below_threshold_matches_dense_grid() {
        let spec = DpcSpec::new(2.0, 5.0, 1.0, 2.0).unwrap();
        let res = optimize_dpc(&spec, 0.01, 1e-9).unwrap();
        // brute force at step 1e-3
        let delta = 1e-6 * 6.0;
        let mut dense = f64::NEG_INFINITY;
        for i in 0..=5000 {
            let a = -2.0 + i as f64 * 1e-3;
            for j in 0..=1998 {
                let r = -0.999 + j as f64 * 1e-3;
                if let Ok(p) = DpcParams::new(&spec, a, r) {
                    if p.received_power - 5.0 >= delta {
                        if let Ok(v) = dpc_rate(&spec, &p) {
                            dense = dense.max(v);
                        }
                    }
                }
            }
        }
        assert_eq!(res.status, DpcStatus::Feasible);
        assert!(res.best_rate >= dense - 1e-6, "{} vs {dense}", res.best_rate);
        assert!(res.best_rate > 0.0);
        assert!(res.best_rate <= dpc_outer_bound(&spec).unwrap());
    }

    #[test]
    fn zero_interference_approaches_capacity() {
        let spec = DpcSpec::new(3.0, 1.0, 1.0, 0.0).unwrap();
        let res = optimize_dpc(&spec, 0.01, 1e-10).unwrap();
        let c = 0.5 * (1.0 + 3.0f64 / 2.0).log2();
        assert!((res.best_rate - c).abs() < 1e-6, "{}", res.best_rate);
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(dpc_gamma_threshold(5.0, 0.0, 1.0).unwrap(), 5.0);
        let g = dpc_gamma_threshold(5.0, 2.0, 1.0).unwrap();
        assert!((g - 3.71).abs() < 0.01, "{g}");
        assert!(costa_threshold_margin(g, 5.0, 2.0, 1.0).abs() < 1e-8);
        let g4 = dpc_gamma_threshold(5.0, 4.0, 1.0).unwrap();
        assert!(g4 < g, "{g4} vs {g}");
    }

    #[test]
    fn bad_config_rejected() {
        let spec = DpcSpec::new(4.0, 5.0, 1.0, 2.0).unwrap();
        assert!(optimize_dpc(&spec, 0.0, 1e-6).is_err());
        assert!(optimize_dpc(&spec, 0.1, -1.0).is_err());
    }
}
