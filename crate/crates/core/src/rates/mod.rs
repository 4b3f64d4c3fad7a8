//! Closed-form rates, capacities, regions and thresholds for the scalar
//! channel families. All rates are in bits per channel use.

mod broadcast;
pub(crate) mod dpc;

pub use broadcast::{broadcast_region, BroadcastRegion, BroadcastSpec, RateRegionPoint};
pub use dpc::{
    costa_alpha, dpc_capacity_condition, dpc_feasible, dpc_outer_bound, dpc_rate, watermark_covertext_power,
    CovertextPower, DpcParams, DpcSpec,
};

use serde::{Deserialize, Serialize};

use crate::channel::ScalarAvcSpec;
use crate::error::{GavcError, Result};

/// Natural log of the rate unit. `LN_2` gives bits; every rate in the crate
/// goes through [`half_log`].
pub const RATE_UNIT_LN: f64 = std::f64::consts::LN_2;

/// `(1/2) log(x)` in the crate's rate unit.
#[inline]
pub fn half_log(x: f64) -> f64 {
    0.5 * x.ln() / RATE_UNIT_LN
}

/// `(1/2) log(1 + snr)`, using `ln_1p` for small SNR.
#[inline]
pub fn gaussian_capacity(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / RATE_UNIT_LN
}

/// Randomized-coding capacity: the jammer acts like extra Gaussian noise.
pub fn randomized_capacity(spec: &ScalarAvcSpec) -> Result<f64> {
    spec.validate()?;
    Ok(gaussian_capacity(spec.gamma / (spec.lambda + spec.sigma_w2)))
}

/// Deterministic-coding capacity under average error: zero whenever the
/// jammer can symmetrize (`gamma <= lambda`).
pub fn deterministic_capacity(spec: &ScalarAvcSpec) -> Result<f64> {
    spec.validate()?;
    if spec.gamma <= spec.lambda {
        Ok(0.0)
    } else {
        randomized_capacity(spec)
    }
}

/// Growth rule for the number of shared keys as a function of blocklength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyRule {
    /// `n * ceil(log2 n)`
    NLogN,
    /// `n^2`
    NSquared,
    /// `ceil(c * n)`
    Linear(f64),
    /// `2^n`; rejected, `log K / n` does not vanish.
    Exponential,
}

impl KeyRule {
    /// Whether `K(n)/n -> infinity`, the growth the vanishing-error bound needs.
    /// `Linear` keeps `log K = O(log n)` but not this.
    pub fn key_ratio_diverges(&self) -> bool {
        matches!(self, KeyRule::NLogN | KeyRule::NSquared)
    }
}

impl std::str::FromStr for KeyRule {
    type Err = GavcError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nlogn" => Ok(KeyRule::NLogN),
            "n2" | "nsquared" => Ok(KeyRule::NSquared),
            "n" => Ok(KeyRule::Linear(1.0)),
            "exp" | "2n" => Ok(KeyRule::Exponential),
            _ => {
                if let Some(c) = s.strip_prefix("linear:").or_else(|| s.strip_prefix("cn:")) {
                    let c: f64 = c
                        .parse()
                        .map_err(|_| GavcError::param("k_rule", format!("bad constant in `{s}`")))?;
                    Ok(KeyRule::Linear(c))
                } else {
                    Err(GavcError::param(
                        "k_rule",
                        format!("unknown rule `{s}` (nlogn, n2, n, linear:<c>, exp)"),
                    ))
                }
            }
        }
    }
}

/// Key size `K(n)` for a sub-exponential rule.
pub fn key_size_schedule(n: usize, rule: KeyRule) -> Result<u64> {
    if n < 2 {
        return Err(GavcError::param("n", "blocklength must be >= 2"));
    }
    let n64 = n as u64;
    match rule {
        KeyRule::NLogN => {
            let log = u64::from(usize::BITS - (n - 1).leading_zeros());
            n64.checked_mul(log)
                .ok_or_else(|| GavcError::InvalidSchedule("K(n) overflows u64".into()))
        }
        KeyRule::NSquared => n64
            .checked_mul(n64)
            .ok_or_else(|| GavcError::InvalidSchedule("K(n) overflows u64".into())),
        KeyRule::Linear(c) => {
            if !(c.is_finite() && c > 0.0) {
                return Err(GavcError::param("k_rule", format!("constant must be > 0, got {c}")));
            }
            Ok(((c * n as f64).ceil() as u64).max(1))
        }
        KeyRule::Exponential => Err(GavcError::InvalidSchedule(
            "K(n) = 2^n: (1/n) log(K(n)/n) does not vanish".into(),
        )),
    }
}
