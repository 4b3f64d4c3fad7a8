use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{wilson_interval, with_workers};
use crate::channel::{awgn, dot, norm_sq, Codebook, SeededRng};
use crate::error::{ensure_finite, ensure_nonneg, GavcError, Result};
use crate::rates::{half_log, DpcParams, DpcSpec};

const BIN_LABEL: u64 = 0x6269_6e73;
const ENCODE_LABEL: u64 = 0x656e_636f_6465;

/// Largest bin the simulator will materialize.
pub const MAX_BIN_SIZE: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcEncoderConfig {
    pub n: usize,
    /// Bits per symbol of codewords per bin.
    pub r_bin: f64,
    /// Bits per symbol of the whole auxiliary codebook.
    pub r_u: f64,
    pub alpha: f64,
    pub rho: f64,
    pub spec: DpcSpec,
    /// Slack on the correlation test; `None` means `0.05 sqrt(gamma sigma_t2)`.
    pub eps2: Option<f64>,
    pub seed: u64,
}

impl DpcEncoderConfig {
    pub fn params(&self) -> Result<DpcParams> {
        DpcParams::new(&self.spec, self.alpha, self.rho)
    }

    /// Bin rate above which a bin almost surely holds a good codeword:
    /// `1/2 log2(P_U / ((1 - rho^2) gamma))`.
    pub fn threshold_bits(&self) -> Result<f64> {
        let p = self.params()?;
        let innov = (1.0 - self.rho * self.rho) * self.spec.gamma;
        if innov <= 0.0 {
            return Err(GavcError::Degenerate("(1 - rho^2) gamma = 0".into()));
        }
        Ok(half_log(p.p_u / innov))
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
            .unwrap_or(0.05 * (self.spec.gamma * self.spec.sigma_t2).sqrt())
    }
}

/// The binned auxiliary codebook. Bins hold i.i.d. uniform points on the
/// `sqrt(n P_U)` sphere and are generated on demand from `(seed, bin)`; that
/// has the same law as a random partition of one i.i.d. codebook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpcBinnedCode {
    config: DpcEncoderConfig,
    params: DpcParams,
    bins: u64,
    total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpcEncodeOutcome {
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    /// Position of `u` inside its bin.
    pub index: usize,
    pub success: bool,
    /// `|x|^2 / n`.
    pub power: f64,
    /// `<x, t> / n`.
    pub correlation: f64,
}

fn pow2_ceil(bits: f64, what: &'static str) -> Result<u64> {
    if bits > 62.0 {
        return Err(GavcError::param(
            what,
            format!("2^{bits:.1} does not fit the simulator"),
        ));
    }
    Ok(2f64.powf(bits).ceil().max(1.0) as u64)
}

impl DpcBinnedCode {
    pub fn new(config: DpcEncoderConfig) -> Result<Self> {
        if config.n == 0 {
            return Err(GavcError::param("n", "blocklength must be >= 1"));
        }
        ensure_nonneg("r_bin", config.r_bin)?;
        ensure_finite("r_u", config.r_u)?;
        if config.r_u <= config.r_bin {
            return Err(GavcError::param("r_u", "need r_u > r_bin"));
        }
        ensure_nonneg("eps2", config.eps2())?;
        let params = config.params()?;
        if config.spec.sigma_t2 > 0.0 && params.beta2.is_none() {
            return Err(GavcError::Degenerate(
                "quantizer gain undefined: need P_U > (1 - rho^2) gamma".into(),
            ));
        }
        let n = config.n as f64;
        let total = pow2_ceil(n * config.r_u, "r_u")?;
        let bins = pow2_ceil(n * (config.r_u - config.r_bin), "r_u")?.min(total);
        let code = Self {
            config,
            params,
            bins,
            total,
        };
        if code.bin_size(0) > MAX_BIN_SIZE {
            return Err(GavcError::param(
                "r_bin",
                format!("bins of {} codewords exceed the limit {MAX_BIN_SIZE}", code.bin_size(0)),
            ));
        }
        Ok(code)
    }

    pub fn config(&self) -> &DpcEncoderConfig {
        &self.config
    }

    pub fn params(&self) -> &DpcParams {
        &self.params
    }

    pub fn bin_count(&self) -> u64 {
        self.bins
    }

    pub fn codebook_size(&self) -> u64 {
        self.total
    }

    /// Bin sizes differ by at most one.
    pub fn bin_size(&self, m: u64) -> u64 {
        self.total / self.bins + u64::from(m < self.total % self.bins)
    }

    pub fn bin(&self, m: u64) -> Result<Codebook> {
        if m >= self.bins {
            return Err(GavcError::param(
                "m",
                format!("bin {m} out of range ({} bins)", self.bins),
            ));
        }
        let size = self.bin_size(m);
        if size == 0 {
            return Err(GavcError::param("m", format!("bin {m} is empty")));
        }
        let mut rng = SeededRng::new(self.config.seed)
            .derive(BIN_LABEL)
            .with_stream(m)
            .stream();
        Codebook::random_sphere(self.config.n, size as usize, self.params.p_u, &mut rng)
    }

    /// Quantize `beta t` inside `bin` and form `x = u - alpha t`.
    pub fn encode_in_bin(&self, bin: &Codebook, t: &[f64]) -> Result<DpcEncodeOutcome> {
        let n = self.config.n;
        if t.len() != n || bin.blocklength() != n {
            return Err(GavcError::DimensionMismatch {
                expected: n,
                actual: if t.len() != n { t.len() } else { bin.blocklength() },
            });
        }
        // All codewords share a norm, so the closest to beta t (beta > 0) is
        // the one with the largest inner product with t.
        let mut index = 0;
        if self.params.beta2.is_some() {
            let mut best = f64::NEG_INFINITY;
            for (i, u) in bin.iter().enumerate() {
                let c = dot(u, t);
                if c > best {
                    best = c;
                    index = i;
                }
            }
        }
        let u = bin.codeword(index).to_vec();
        let x: Vec<f64> = u.iter().zip(t).map(|(a, b)| a - self.config.alpha * b).collect();
        let nf = n as f64;
        let power = norm_sq(&x) / nf;
        let correlation = dot(&x, t) / nf;
        let spec = &self.config.spec;
        let target = self.config.rho * (spec.gamma * spec.sigma_t2).sqrt() - self.config.eps2();
        let success = power <= spec.gamma * (1.0 + 1e-12) && correlation >= target;
        Ok(DpcEncodeOutcome {
            u,
            x,
            index,
            success,
            power,
            correlation,
        })
    }
}

/// Encode message `m` against interference `t`. A failed search is reported
/// through `success`, not as an error.
pub fn dpc_encode(code: &DpcBinnedCode, m: u64, t: &[f64]) -> Result<DpcEncodeOutcome> {
    code.encode_in_bin(&code.bin(m)?, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderReport {
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub ci95: (f64, f64),
    pub seed: u64,
}

/// Fraction of trials (uniform message, fresh Gaussian interference) in
/// which the encoder finds an admissible codeword.
pub fn encoder_success_rate(
    code: &DpcBinnedCode,
    trials: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<EncoderReport> {
    if trials == 0 {
        return Err(GavcError::param("trials", "must be >= 1"));
    }
    const BLOCK: u64 = 32;
    let root = SeededRng::new(seed).derive(ENCODE_LABEL);
    let n = code.config.n;
    let st2 = code.config.spec.sigma_t2;
    let blocks = trials.div_ceil(BLOCK);
    let per_block: Vec<Result<u64>> = with_workers(workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = root.with_stream(b).stream();
                let mut ok = 0;
                for _ in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                    let m = rng.random_range(0..code.bins);
                    let t = awgn(n, st2, &mut rng)?;
                    ok += u64::from(dpc_encode(code, m, &t)?.success);
                }
                Ok(ok)
            })
            .collect()
    })?;
    let successes = per_block.into_iter().sum::<Result<u64>>()?;
    Ok(EncoderReport {
        trials,
        successes,
        success_rate: successes as f64 / trials as f64,
        ci95: wilson_interval(successes, trials),
        seed,
    })
}
