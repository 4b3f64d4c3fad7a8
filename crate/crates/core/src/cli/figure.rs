//! Data behind the three plots. Each builder returns a [`Table`] whose header
//! is the documented CSV schema:
//!
//! * `dbc`: `alpha,r1_bits,r2_bits,segment` with `segment` either `boundary`
//!   (the power-split curve) or `time_sharing` (the two endpoints of the
//!   sum-rate segment). Header only when the region is empty.
//! * `dpc`: `gamma,dpc_bits,outer_bound_bits,no_interference_bits,
//!   no_interference_margin,costa_margin`. The margins are `gamma - lambda`
//!   and the feasibility margin of Costa's point; both thresholds are
//!   inserted into the sweep so the zero crossings appear exactly.
//! * `mimo221`: `lambda,r_wfill_bits,theorem_bits,upper_bound_bits,case`.

use serde::{Deserialize, Serialize};

use super::output::{Cell, Table};
use crate::channel::ScalarAvcSpec;
use crate::dpc_opt::{costa_threshold_margin, dpc_gamma_threshold, optimize_dpc};
use crate::error::{ensure_positive, GavcError, Result};
use crate::mimo::{full_rank_rate, maxmin_rate_221, upper_bound_rate, MimoSpec};
use crate::rates::{broadcast_region, deterministic_capacity, dpc_outer_bound, BroadcastSpec, DpcSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbcFigure {
    pub gamma: f64,
    pub lambda: f64,
    pub sigma1_2: f64,
    pub sigma2_2: f64,
    pub alpha_steps: usize,
}

impl Default for DbcFigure {
    fn default() -> Self {
        Self {
            gamma: 6.0,
            lambda: 1.0,
            sigma1_2: 0.1,
            sigma2_2: 5.0,
            alpha_steps: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcFigure {
    pub lambda: f64,
    pub sigma_t2: f64,
    pub sigma_w2: f64,
    pub gamma_max: f64,
    pub steps: usize,
    pub grid_step: f64,
}

impl Default for DpcFigure {
    fn default() -> Self {
        Self {
            lambda: 5.0,
            sigma_t2: 2.0,
            sigma_w2: 1.0,
            gamma_max: 10.0,
            steps: 200,
            grid_step: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MimoFigure {
    pub nu: Vec<f64>,
    pub gamma: f64,
    pub lambda_max: f64,
    pub steps: usize,
}

impl Default for MimoFigure {
    fn default() -> Self {
        Self {
            nu: vec![1.0, 3.0],
            gamma: 4.0,
            lambda_max: 10.0,
            steps: 100,
        }
    }
}

fn check_steps(steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(GavcError::param("steps", "must be >= 1"));
    }
    Ok(())
}

pub fn dbc_table(fig: &DbcFigure) -> Result<Table> {
    check_steps(fig.alpha_steps)?;
    let spec = BroadcastSpec::new(fig.gamma, fig.lambda, fig.sigma1_2, fig.sigma2_2)?;
    let mut table = Table::new(vec!["alpha", "r1_bits", "r2_bits", "segment"]);
    if spec.lambda >= spec.gamma {
        return Ok(table);
    }
    let corner = spec.lambda / spec.gamma;
    let grid: Vec<f64> = (1..=fig.alpha_steps)
        .map(|i| 1.0 - (1.0 - corner) * (fig.alpha_steps - i) as f64 / fig.alpha_steps as f64)
        .collect();
    let region = broadcast_region(&spec, &grid)?;
    for p in &region.curve {
        table.push(vec![p.alpha.into(), p.r1.into(), p.r2.into(), "boundary".into()]);
    }
    for p in region.time_sharing.iter().flatten() {
        table.push(vec![p.alpha.into(), p.r1.into(), p.r2.into(), "time_sharing".into()]);
    }
    Ok(table)
}

pub fn dpc_table(fig: &DpcFigure) -> Result<Table> {
    check_steps(fig.steps)?;
    ensure_positive("gamma_max", fig.gamma_max)?;
    let mut gammas: Vec<f64> = (1..=fig.steps)
        .map(|i| fig.gamma_max * i as f64 / fig.steps as f64)
        .collect();
    let star = dpc_gamma_threshold(fig.lambda, fig.sigma_t2, fig.sigma_w2)?;
    for g in [star, fig.lambda] {
        if g > 0.0 && g <= fig.gamma_max && !gammas.iter().any(|x| (x - g).abs() < 1e-12) {
            gammas.push(g);
        }
    }
    gammas.sort_by(f64::total_cmp);

    let mut table = Table::new(vec![
        "gamma",
        "dpc_bits",
        "outer_bound_bits",
        "no_interference_bits",
        "no_interference_margin",
        "costa_margin",
    ]);
    for g in gammas {
        let spec = DpcSpec::new(g, fig.lambda, fig.sigma_w2, fig.sigma_t2)?;
        let opt = optimize_dpc(&spec, fig.grid_step, 1e-9)?;
        let plain = deterministic_capacity(&ScalarAvcSpec::new(g, fig.lambda, fig.sigma_w2)?)?;
        table.push(vec![
            g.into(),
            opt.best_rate.into(),
            dpc_outer_bound(&spec)?.into(),
            plain.into(),
            (g - fig.lambda).into(),
            costa_threshold_margin(g, fig.lambda, fig.sigma_t2, fig.sigma_w2).into(),
        ]);
    }
    Ok(table)
}

pub fn mimo221_table(fig: &MimoFigure) -> Result<Table> {
    check_steps(fig.steps)?;
    if fig.nu.len() != 2 {
        return Err(GavcError::DimensionMismatch {
            expected: 2,
            actual: fig.nu.len(),
        });
    }
    let mut table = Table::new(vec![
        "lambda",
        "r_wfill_bits",
        "theorem_bits",
        "upper_bound_bits",
        "case",
    ]);
    for i in 0..=fig.steps {
        let lambda = fig.lambda_max * i as f64 / fig.steps as f64;
        let spec = MimoSpec::new(fig.nu.clone(), fig.gamma, lambda)?;
        let mm = maxmin_rate_221(&spec)?;
        table.push(vec![
            lambda.into(),
            full_rank_rate(&spec).into(),
            mm.rate.into(),
            upper_bound_rate(&spec).into(),
            Cell::Text(mm.case.label().into()),
        ]);
    }
    Ok(table)
}
