//! Monte Carlo runs of the rotated sphere code, the dirty-paper encoder and
//! the superposition broadcast code.

mod dpc;
mod superposition;

pub use dpc::{
    dpc_encode, encoder_success_rate, DpcBinnedCode, DpcEncodeOutcome, DpcEncoderConfig, EncoderReport, MAX_BIN_SIZE,
};
pub use superposition::{
    ensemble_broadcast_error, explicit_broadcast_error, superposition_encode, BroadcastErrorReport, BroadcastMethod,
    BroadcastSimConfig, CloudEmbedding, SuperpositionCode,
};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{awgn, dist_sq, dot, norm_sq, sample_sphere, Codebook, RotationKeySet, ScalarAvcSpec, SeededRng};
use crate::error::{ensure_nonneg, ensure_positive, GavcError, Result};
use crate::rates::{key_size_schedule, randomized_capacity, KeyRule};

const TRIAL_LABEL: u64 = 0x7472_6961_6c73;
const SAMPLE_LABEL: u64 = 0x7361_6d70_6c65;
const CODEBOOK_LABEL: u64 = 0x636f_6465;
const KEY_LABEL: u64 = 0x6b65_7973;

/// 97.5% standard normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub trials: u64,
    pub errors: u64,
    pub rate_hat: f64,
    /// Wilson score interval.
    pub ci95: (f64, f64),
    pub seed: u64,
    /// Trials per independent random stream.
    pub block_size: u64,
}

impl ErrorEstimate {
    pub fn from_counts(errors: u64, trials: u64, seed: u64, block_size: u64) -> Self {
        Self {
            trials,
            errors,
            rate_hat: if trials == 0 {
                0.0
            } else {
                errors as f64 / trials as f64
            },
            ci95: wilson_interval(errors, trials),
            seed,
            block_size,
        }
    }
}

pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// What the jammer sends. It knows the codebook and the construction but not
/// the key or the noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JammerStrategy {
    None,
    /// i.i.d. `N(0, lambda)`, scaled back onto the `sqrt(n lambda)` ball on
    /// the rare draws that leave it.
    GaussianNoise {
        lambda: f64,
    },
    FixedVector {
        s: Vec<f64>,
    },
    SphereUniform {
        lambda: f64,
    },
    /// A uniformly chosen codeword rescaled to the jammer's power.
    SymmetrizeCodeword {
        lambda: f64,
    },
    /// Uniform on the `sqrt(n lambda)` sphere inside the hyperplane
    /// orthogonal to a uniformly chosen codeword.
    OrthogonalNoise {
        lambda: f64,
    },
}

impl JammerStrategy {
    /// Per-symbol power of the emitted vectors (an upper bound for noise).
    pub fn power(&self) -> f64 {
        match self {
            JammerStrategy::None => 0.0,
            JammerStrategy::FixedVector { s } => {
                if s.is_empty() {
                    0.0
                } else {
                    norm_sq(s) / s.len() as f64
                }
            }
            JammerStrategy::GaussianNoise { lambda }
            | JammerStrategy::SphereUniform { lambda }
            | JammerStrategy::SymmetrizeCodeword { lambda }
            | JammerStrategy::OrthogonalNoise { lambda } => *lambda,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JammerStrategy::None => "none",
            JammerStrategy::GaussianNoise { .. } => "gaussian",
            JammerStrategy::FixedVector { .. } => "fixed",
            JammerStrategy::SphereUniform { .. } => "sphere",
            JammerStrategy::SymmetrizeCodeword { .. } => "symmetrize",
            JammerStrategy::OrthogonalNoise { .. } => "orthogonal",
        }
    }

    /// Checks the strategy against blocklength `n` and the jammer budget.
    pub fn validate(&self, n: usize, lambda_max: f64) -> Result<()> {
        match self {
            JammerStrategy::None => {}
            JammerStrategy::FixedVector { s } => {
                if s.len() != n {
                    return Err(GavcError::DimensionMismatch {
                        expected: n,
                        actual: s.len(),
                    });
                }
                if s.iter().any(|x| !x.is_finite()) {
                    return Err(GavcError::param("s", "jamming vector must be finite"));
                }
            }
            JammerStrategy::GaussianNoise { lambda }
            | JammerStrategy::SphereUniform { lambda }
            | JammerStrategy::SymmetrizeCodeword { lambda }
            | JammerStrategy::OrthogonalNoise { lambda } => ensure_nonneg("lambda", *lambda)?,
        }
        let budget = n as f64 * lambda_max;
        let used = n as f64 * self.power();
        if used > budget + 1e-9 {
            return Err(GavcError::param(
                "jammer",
                format!("jammer power {used} exceeds the budget n*lambda = {budget}"),
            ));
        }
        Ok(())
    }

    pub fn emit<R: Rng + ?Sized>(&self, codebook: &Codebook, rng: &mut R) -> Result<Vec<f64>> {
        let n = codebook.blocklength();
        match self {
            JammerStrategy::None => Ok(vec![0.0; n]),
            JammerStrategy::FixedVector { s } => Ok(s.clone()),
            JammerStrategy::GaussianNoise { lambda } => {
                let mut s = awgn(n, *lambda, rng)?;
                let cap = n as f64 * lambda;
                let e = norm_sq(&s);
                if e > cap {
                    let scale = (cap / e).sqrt();
                    s.iter_mut().for_each(|x| *x *= scale);
                }
                Ok(s)
            }
            JammerStrategy::SphereUniform { lambda } => sample_sphere(n, (n as f64 * lambda).sqrt(), rng),
            JammerStrategy::SymmetrizeCodeword { lambda } => symmetrize_attack(codebook, *lambda, rng),
            JammerStrategy::OrthogonalNoise { lambda } => {
                let c = codebook.codeword(rng.random_range(0..codebook.len()));
                let cc = norm_sq(c);
                if n < 2 || *lambda == 0.0 {
                    return Ok(vec![0.0; n]);
                }
                loop {
                    let mut z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                    let k = dot(&z, c) / cc;
                    z.iter_mut().zip(c).for_each(|(a, b)| *a -= k * b);
                    let e = norm_sq(&z);
                    if e > f64::MIN_POSITIVE {
                        let scale = (n as f64 * lambda / e).sqrt();
                        z.iter_mut().for_each(|x| *x *= scale);
                        return Ok(z);
                    }
                }
            }
        }
    }
}

/// The jammer impersonates the encoder: a uniformly chosen codeword rescaled
/// to norm `sqrt(n lambda)`.
pub fn symmetrize_attack<R: Rng + ?Sized>(codebook: &Codebook, lambda: f64, rng: &mut R) -> Result<Vec<f64>> {
    ensure_nonneg("lambda", lambda)?;
    let j = rng.random_range(0..codebook.len());
    let scale = (lambda / codebook.power()).sqrt();
    Ok(codebook.codeword(j).iter().map(|x| x * scale).collect())
}

/// Nearest codeword to `z` in the codebook's own coordinates; ties go to the
/// lowest index.
pub(crate) fn nearest_codeword(codebook: &Codebook, z: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, x) in codebook.iter().enumerate() {
        let d = dist_sq(z, x);
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// `argmin_j |y - U_k x_j|`, computed as `argmin_j |U_k' y - x_j|`.
pub fn min_distance_decode(codebook: &Codebook, key: usize, keys: &RotationKeySet, y: &[f64]) -> Result<usize> {
    if y.len() != codebook.blocklength() || keys.dim() != codebook.blocklength() {
        return Err(GavcError::DimensionMismatch {
            expected: codebook.blocklength(),
            actual: if y.len() != codebook.blocklength() {
                y.len()
            } else {
                keys.dim()
            },
        });
    }
    let z = keys.rotation(key)?.apply_transpose(y);
    Ok(nearest_codeword(codebook, &z))
}

/// Which messages the trials send.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum MessageSelection {
    /// Fresh uniform message per trial; average error only.
    Random,
    /// Every message, round-robin.
    All,
    /// A seeded sample of distinct messages, round-robin.
    Sample(usize),
    Explicit(Vec<usize>),
}

impl MessageSelection {
    /// Sweep every message up to 1024 of them, otherwise a sample of 16.
    pub fn auto(codewords: usize) -> Self {
        if codewords <= 1024 {
            MessageSelection::All
        } else {
            MessageSelection::Sample(16)
        }
    }

    /// Message indices to sweep, or `None` for a fresh random message per trial.
    pub fn resolve(&self, codewords: usize, seed: u64) -> Result<Option<Vec<usize>>> {
        Ok(match self {
            MessageSelection::Random => None,
            MessageSelection::All => Some((0..codewords).collect()),
            MessageSelection::Sample(m) => {
                if *m == 0 {
                    return Err(GavcError::param("messages", "sample size must be >= 1"));
                }
                let mut rng = SeededRng::new(seed).derive(SAMPLE_LABEL).stream();
                let mut v = sample_indices(&mut rng, codewords, (*m).min(codewords)).into_vec();
                v.sort_unstable();
                Some(v)
            }
            MessageSelection::Explicit(v) => {
                if v.is_empty() {
                    return Err(GavcError::param("messages", "explicit message list is empty"));
                }
                if let Some(bad) = v.iter().find(|&&i| i >= codewords) {
                    return Err(GavcError::param(
                        "messages",
                        format!("message {bad} out of range for {codewords} codewords"),
                    ));
                }
                Some(v.clone())
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub trials: u64,
    pub seed: u64,
    pub messages: MessageSelection,
    /// Thread count; `None` uses the global pool. Never affects results.
    pub workers: Option<usize>,
    pub block_size: u64,
}

impl TrialConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            messages: MessageSelection::Random,
            workers: None,
            block_size: 256,
        }
    }

    pub fn messages(mut self, messages: MessageSelection) -> Self {
        self.messages = messages;
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageCount {
    pub message: usize,
    pub trials: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMessageError {
    pub message: usize,
    pub estimate: ErrorEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Pooled over all trials.
    pub average: ErrorEstimate,
    /// Worst message among those swept; absent for random messages.
    pub maximal: Option<MaxMessageError>,
    pub per_message: Vec<MessageCount>,
}

pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(GavcError::param("workers", "must be >= 1")),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| GavcError::param("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Sends messages through `y = U_k x + s + w` with a uniformly drawn key and
/// decodes by minimum distance. Trials are split into fixed-size blocks, each
/// with its own stream, so the counts do not depend on the thread count.
pub fn run_trials(
    codebook: &Codebook,
    keys: &RotationKeySet,
    spec: &ScalarAvcSpec,
    jammer: &JammerStrategy,
    cfg: &TrialConfig,
) -> Result<TrialReport> {
    spec.validate()?;
    let n = codebook.blocklength();
    if keys.dim() != n {
        return Err(GavcError::DimensionMismatch {
            expected: n,
            actual: keys.dim(),
        });
    }
    if codebook.power() > spec.gamma * (1.0 + 1e-12) {
        return Err(GavcError::param(
            "codebook",
            format!("codebook power {} exceeds gamma {}", codebook.power(), spec.gamma),
        ));
    }
    if cfg.trials == 0 {
        return Err(GavcError::param("trials", "must be >= 1"));
    }
    if cfg.block_size == 0 {
        return Err(GavcError::param("block_size", "must be >= 1"));
    }
    jammer.validate(n, spec.lambda)?;
    let schedule = cfg.messages.resolve(codebook.len(), cfg.seed)?;
    let slots = schedule.as_ref().map_or(1, Vec::len);
    let root = SeededRng::new(cfg.seed).derive(TRIAL_LABEL);
    let blocks = cfg.trials.div_ceil(cfg.block_size);

    let run_block = |b: u64| -> Result<Vec<(u64, u64)>> {
        let mut rng = root.with_stream(b).stream();
        let mut counts = vec![(0u64, 0u64); slots];
        let start = b * cfg.block_size;
        let end = (start + cfg.block_size).min(cfg.trials);
        for t in start..end {
            let (slot, msg) = match &schedule {
                None => (0, rng.random_range(0..codebook.len())),
                Some(v) => {
                    let slot = (t % v.len() as u64) as usize;
                    (slot, v[slot])
                }
            };
            let key = rng.random_range(0..keys.key_count());
            let s = jammer.emit(codebook, &mut rng)?;
            let w = awgn(n, spec.sigma_w2, &mut rng)?;
            let u = keys.rotation(key)?;
            let mut y = u.apply(codebook.codeword(msg));
            for ((yi, si), wi) in y.iter_mut().zip(&s).zip(&w) {
                *yi += si + wi;
            }
            u.apply_transpose_in_place(&mut y);
            let decoded = nearest_codeword(codebook, &y);
            counts[slot].0 += 1;
            counts[slot].1 += u64::from(decoded != msg);
        }
        Ok(counts)
    };

    let per_block: Vec<Vec<(u64, u64)>> = with_workers(cfg.workers, || {
        (0..blocks).into_par_iter().map(run_block).collect::<Result<Vec<_>>>()
    })??;
    let mut counts = vec![(0u64, 0u64); slots];
    for block in per_block {
        for (acc, c) in counts.iter_mut().zip(block) {
            acc.0 += c.0;
            acc.1 += c.1;
        }
    }

    let total_errors: u64 = counts.iter().map(|c| c.1).sum();
    let average = ErrorEstimate::from_counts(total_errors, cfg.trials, cfg.seed, cfg.block_size);
    let (maximal, per_message) = match schedule {
        None => (None, Vec::new()),
        Some(v) => {
            let per: Vec<MessageCount> = v
                .iter()
                .zip(&counts)
                .map(|(&message, &(trials, errors))| MessageCount {
                    message,
                    trials,
                    errors,
                })
                .collect();
            let worst = per
                .iter()
                .filter(|c| c.trials > 0)
                .max_by(|a, b| {
                    let ra = a.errors as f64 / a.trials as f64;
                    let rb = b.errors as f64 / b.trials as f64;
                    ra.total_cmp(&rb).then(b.message.cmp(&a.message))
                })
                .map(|c| MaxMessageError {
                    message: c.message,
                    estimate: ErrorEstimate::from_counts(c.errors, c.trials, cfg.seed, cfg.block_size),
                });
            (worst, per)
        }
    };
    Ok(TrialReport {
        average,
        maximal,
        per_message,
    })
}

/// Smallest distance between two codewords; `+inf` for a single codeword.
pub fn pairwise_min_distance(codebook: &Codebook) -> f64 {
    let n = codebook.len();
    if n < 2 {
        return f64::INFINITY;
    }
    (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let xi = codebook.codeword(i);
            (i + 1..n)
                .map(|j| dist_sq(xi, codebook.codeword(j)))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
        .sqrt()
}

/// Noise variance that puts `rate_bits` at `rate_fraction` of the randomized
/// capacity. This is how desk-scale runs reach a target fraction of capacity
/// with a codebook of a few thousand words.
pub fn noise_for_rate(gamma: f64, lambda: f64, rate_bits: f64, rate_fraction: f64) -> Result<f64> {
    ensure_positive("gamma", gamma)?;
    ensure_nonneg("lambda", lambda)?;
    ensure_positive("rate_bits", rate_bits)?;
    ensure_positive("rate_fraction", rate_fraction)?;
    let cap = rate_bits / rate_fraction;
    let sigma = gamma / (2f64.powf(2.0 * cap) - 1.0) - lambda;
    if sigma <= 0.0 {
        return Err(GavcError::Infeasible(format!(
            "rate {rate_bits} bits at fraction {rate_fraction} needs capacity {cap}, \
             which lambda = {lambda} does not leave room for"
        )));
    }
    Ok(sigma)
}

/// Largest codebook the simulator will build.
pub const MAX_CODEWORDS: usize = 1 << 16;

/// `round(2^(n R))`, bounded to desk scale.
pub fn codebook_size(n: usize, rate_bits: f64) -> Result<usize> {
    ensure_nonneg("rate_bits", rate_bits)?;
    let bits = n as f64 * rate_bits;
    if bits > (MAX_CODEWORDS as f64).log2() + 1e-9 {
        return Err(GavcError::param(
            "rate",
            format!("2^{bits:.2} codewords exceeds the desk-scale limit of {MAX_CODEWORDS}"),
        ));
    }
    Ok((2f64.powf(bits).round() as usize).max(1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub keys: u64,
    pub codewords: usize,
    pub report: TrialReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeySweep {
    pub rate_bits: f64,
    pub rows: Vec<SweepRow>,
    /// Each row's average error is no larger than the previous row's upper
    /// confidence limit.
    pub non_increasing: bool,
}

/// One `run_trials` row per blocklength at a fixed rate `rate_fraction * C_r`,
/// with `K(n)` from the key rule.
pub fn key_size_sweep(
    spec: &ScalarAvcSpec,
    rate_fraction: f64,
    n_list: &[usize],
    k_rule: KeyRule,
    jammer: &JammerStrategy,
    cfg: &TrialConfig,
) -> Result<KeySweep> {
    ensure_positive("rate_fraction", rate_fraction)?;
    let rate = rate_fraction * randomized_capacity(spec)?;
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let k = key_size_schedule(n, k_rule)?;
        let k = usize::try_from(k)
            .map_err(|_| GavcError::InvalidSchedule(format!("K = {k} does not fit in memory indexing")))?;
        let codewords = codebook_size(n, rate)?;
        let root = SeededRng::new(cfg.seed).with_stream(n as u64);
        let codebook = Codebook::random_sphere(n, codewords, spec.gamma, &mut root.derive(CODEBOOK_LABEL).stream())?;
        let keys = RotationKeySet::new(n, k, root.derive(KEY_LABEL))?;
        let report = run_trials(&codebook, &keys, spec, jammer, cfg)?;
        rows.push(SweepRow {
            n,
            keys: k as u64,
            codewords,
            report,
        });
    }
    let non_increasing = rows
        .windows(2)
        .all(|w| w[1].report.average.rate_hat <= w[0].report.average.ci95.1);
    Ok(KeySweep {
        rate_bits: rate,
        rows,
        non_increasing,
    })
}

/// Seeded codebook and key set for a single-blocklength run, drawn the same
/// way `key_size_sweep` draws them.
pub fn seeded_code(n: usize, codewords: usize, k: usize, gamma: f64, seed: u64) -> Result<(Codebook, RotationKeySet)> {
    let root = SeededRng::new(seed).with_stream(n as u64);
    let codebook = Codebook::random_sphere(n, codewords, gamma, &mut root.derive(CODEBOOK_LABEL).stream())?;
    let keys = RotationKeySet::new(n, k, root.derive(KEY_LABEL))?;
    Ok((codebook, keys))
}

/// Jamming vector of full power pushing codeword `target` toward its nearest
/// neighbour, in the unrotated frame. Against `K = 1` this is the best
/// fixed attack on that message; keys hide the frame.
pub fn adversarial_direction(codebook: &Codebook, target: usize, lambda: f64) -> Result<Vec<f64>> {
    ensure_nonneg("lambda", lambda)?;
    if codebook.len() < 2 {
        return Err(GavcError::param("codebook", "need a second codeword to aim at"));
    }
    if target >= codebook.len() {
        return Err(GavcError::param("target", "message index out of range"));
    }
    let x = codebook.codeword(target);
    let other = (0..codebook.len())
        .filter(|&j| j != target)
        .min_by(|&a, &b| dist_sq(x, codebook.codeword(a)).total_cmp(&dist_sq(x, codebook.codeword(b))))
        .expect("len >= 2");
    let mut d: Vec<f64> = codebook.codeword(other).iter().zip(x).map(|(a, b)| a - b).collect();
    let scale = (codebook.blocklength() as f64 * lambda / norm_sq(&d)).sqrt();
    d.iter_mut().for_each(|v| *v *= scale);
    Ok(d)
}
