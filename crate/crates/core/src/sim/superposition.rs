use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use super::{wilson_interval, with_workers, JammerStrategy};
use crate::channel::{awgn, dot, norm_sq, sample_sphere, Codebook, FactoredRotation, SeededRng};
use crate::error::{ensure_positive, GavcError, Result};
use crate::rates::BroadcastSpec;

const CLOUD_LABEL: u64 = 0x63_6c6f_7564;
const SAT_LABEL: u64 = 0x73_6174;
const ROT_LABEL: u64 = 0x72_6f74;
const BCAST_LABEL: u64 = 0x62_6361_7374;

/// Isometry from `R^(n-1)` onto the hyperplane orthogonal to `u`: a
/// Householder reflection taking `e_n` to `+-u/|u|`, applied to `(z, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudEmbedding {
    w: Vec<f64>,
    w_norm_sq: f64,
    flip: bool,
}

impl CloudEmbedding {
    pub fn new(u: &[f64]) -> Result<Self> {
        let n = u.len();
        let norm = norm_sq(u).sqrt();
        if n < 2 || norm == 0.0 || !norm.is_finite() {
            return Err(GavcError::Degenerate(
                "cloud center must be a nonzero vector in R^n, n >= 2".into(),
            ));
        }
        // Pick the reflection that avoids cancellation in the last entry.
        let flip = u[n - 1] > 0.0;
        let sign = if flip { 1.0 } else { -1.0 };
        let mut w: Vec<f64> = u.iter().map(|x| sign * x / norm).collect();
        w[n - 1] += 1.0;
        let w_norm_sq = norm_sq(&w);
        Ok(Self { w, w_norm_sq, flip })
    }

    fn reflect(&self, v: &mut [f64]) {
        let k = 2.0 * dot(&self.w, v) / self.w_norm_sq;
        v.iter_mut().zip(&self.w).for_each(|(a, b)| *a -= k * b);
    }

    /// `A z` for `z` in `R^(n-1)`.
    pub fn embed(&self, z: &[f64]) -> Vec<f64> {
        let mut v = z.to_vec();
        v.push(0.0);
        self.reflect(&mut v);
        if self.flip {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    }

    /// `A' y`.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let mut v = y.to_vec();
        self.reflect(&mut v);
        v.pop();
        if self.flip {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        v
    }
}

/// `x = u_i + A_i U_i v_ij`.
pub fn superposition_encode(
    cloud: &Codebook,
    satellite: &Codebook,
    rotation: &FactoredRotation,
    i: usize,
    j: usize,
) -> Result<Vec<f64>> {
    let n = cloud.blocklength();
    if satellite.blocklength() + 1 != n || rotation.dim() + 1 != n {
        return Err(GavcError::DimensionMismatch {
            expected: n - 1,
            actual: satellite.blocklength(),
        });
    }
    if i >= cloud.len() || j >= satellite.len() {
        return Err(GavcError::param("message", format!("pair ({i}, {j}) out of range")));
    }
    let u = cloud.codeword(i);
    let a = CloudEmbedding::new(u)?;
    let mut x = a.embed(&rotation.apply(satellite.codeword(j)));
    x.iter_mut().zip(u).for_each(|(a, b)| *a += b);
    Ok(x)
}

/// Explicit superposition code: a cloud codebook at power `alpha gamma` and,
/// per cloud center, a satellite codebook in `R^(n-1)` at power
/// `(1 - alpha) gamma` with its own random rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionCode {
    pub alpha: f64,
    pub gamma: f64,
    pub cloud: Codebook,
    pub satellites: Vec<Codebook>,
    rotation_seed: SeededRng,
}

impl SuperpositionCode {
    pub fn random(n: usize, gamma: f64, alpha: f64, clouds: usize, satellites: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(GavcError::param("n", "blocklength must be >= 2"));
        }
        ensure_positive("gamma", gamma)?;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(GavcError::param("alpha", "must lie in (0, 1)"));
        }
        let root = SeededRng::new(seed);
        let cloud = Codebook::random_sphere(n, clouds, alpha * gamma, &mut root.derive(CLOUD_LABEL).stream())?;
        let satellites = (0..clouds)
            .map(|i| {
                let mut rng = root.derive(SAT_LABEL).with_stream(i as u64).stream();
                Codebook::random_sphere(n - 1, satellites, (1.0 - alpha) * gamma, &mut rng)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            alpha,
            gamma,
            cloud,
            satellites,
            rotation_seed: root.derive(ROT_LABEL),
        })
    }

    pub fn blocklength(&self) -> usize {
        self.cloud.blocklength()
    }

    pub fn rotation(&self, i: usize) -> Result<FactoredRotation> {
        FactoredRotation::sample(
            self.blocklength() - 1,
            &mut self.rotation_seed.with_stream(i as u64).stream(),
        )
    }

    pub fn encode(&self, i: usize, j: usize) -> Result<Vec<f64>> {
        let sat = self
            .satellites
            .get(i)
            .ok_or_else(|| GavcError::param("message", format!("cloud index {i} out of range")))?;
        superposition_encode(&self.cloud, sat, &self.rotation(i)?, i, j)
    }

    /// Weak receiver: nearest cloud center.
    pub fn decode_weak(&self, y: &[f64]) -> usize {
        super::nearest_codeword(&self.cloud, y)
    }

    /// Strong receiver: cloud center, then the satellite in its hyperplane.
    pub fn decode_strong(&self, y: &[f64]) -> Result<(usize, usize)> {
        let i = super::nearest_codeword(&self.cloud, y);
        let u = self.cloud.codeword(i);
        let r: Vec<f64> = y.iter().zip(u).map(|(a, b)| a - b).collect();
        let z = CloudEmbedding::new(u)?.project(&r);
        let z = self.rotation(i)?.apply_transpose(&z);
        Ok((i, super::nearest_codeword(&self.satellites[i], &z)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastSimConfig {
    pub n: usize,
    pub alpha: f64,
    /// Satellite (strong user) rate, bits per symbol.
    pub r1_bits: f64,
    /// Cloud (weak user) rate, bits per symbol.
    pub r2_bits: f64,
    pub trials: u64,
    pub seed: u64,
    pub jammer: JammerStrategy,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BroadcastMethod {
    /// Counted decoding errors of one explicit code.
    Explicit,
    /// Error probability averaged over the random-code ensemble, computed
    /// exactly per channel realization.
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastErrorReport {
    pub method: BroadcastMethod,
    pub trials: u64,
    pub weak: f64,
    pub weak_ci95: (f64, f64),
    pub strong: f64,
    pub strong_ci95: (f64, f64),
}

/// Probability that a uniform point on the unit sphere in `R^d` has cosine
/// above `c` with a fixed direction.
pub(crate) fn cap_probability(d: usize, c: f64) -> f64 {
    if d < 2 {
        return if c < 1.0 { 0.5 } else { 0.0 };
    }
    let c = c.clamp(-1.0, 1.0);
    let half = 0.5 * beta_reg(0.5 * (d as f64 - 1.0), 0.5, 1.0 - c * c);
    if c >= 0.0 {
        half
    } else {
        1.0 - half
    }
}

/// `1 - (1 - p)^(competitors)` without losing tiny `p`.
fn any_of(competitors: f64, p: f64) -> f64 {
    if p >= 1.0 {
        return if competitors > 0.0 { 1.0 } else { 0.0 };
    }
    -(competitors * (-p).ln_1p()).exp_m1()
}

fn check_jammer_for_ensemble(jammer: &JammerStrategy) -> Result<()> {
    match jammer {
        JammerStrategy::SymmetrizeCodeword { .. } | JammerStrategy::OrthogonalNoise { .. } => Err(GavcError::param(
            "jammer",
            "codeword-based jammers need an explicit codebook; use the explicit simulation",
        )),
        _ => Ok(()),
    }
}

fn mean_ci(sum: f64, sum_sq: f64, trials: u64) -> (f64, (f64, f64)) {
    let t = trials as f64;
    let mean = sum / t;
    let var = if trials > 1 {
        ((sum_sq - t * mean * mean) / (t - 1.0)).max(0.0)
    } else {
        0.0
    };
    let half = 1.959_963_984_540_054 * (var / t).sqrt();
    (mean, ((mean - half).max(0.0), (mean + half).min(1.0)))
}

/// Error probabilities of minimum-distance decoding averaged over random
/// superposition codes, for codebooks far too large to build. For each
/// sampled channel realization the chance that some competing codeword beats
/// the true one is exact (spherical caps), so the only Monte Carlo error is
/// over the channel.
pub fn ensemble_broadcast_error(spec: &BroadcastSpec, cfg: &BroadcastSimConfig) -> Result<BroadcastErrorReport> {
    spec.validate()?;
    let n = cfg.n;
    if n < 3 {
        return Err(GavcError::param("n", "blocklength must be >= 3"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(GavcError::param("alpha", "must lie in (0, 1)"));
    }
    if cfg.trials == 0 {
        return Err(GavcError::param("trials", "must be >= 1"));
    }
    ensure_positive("r1_bits", cfg.r1_bits)?;
    ensure_positive("r2_bits", cfg.r2_bits)?;
    cfg.jammer.validate(n, spec.lambda)?;
    check_jammer_for_ensemble(&cfg.jammer)?;

    let nf = n as f64;
    let clouds_minus_one = (nf * cfg.r2_bits).exp2() - 1.0;
    let sats_minus_one = (nf * cfg.r1_bits).exp2() - 1.0;
    let r_u = (nf * cfg.alpha * spec.gamma).sqrt();
    let r_v = ((nf - 1.0) * (1.0 - cfg.alpha) * spec.gamma).sqrt();
    // The jammer only needs a codebook for codeword-based strategies.
    let dummy = Codebook::from_codewords(
        n,
        1.0,
        &[{
            let mut e = vec![0.0; n];
            e[0] = nf.sqrt();
            e
        }],
    )?;

    const BLOCK: u64 = 256;
    let root = SeededRng::new(cfg.seed).derive(BCAST_LABEL);
    let blocks = cfg.trials.div_ceil(BLOCK);
    let sums: Vec<Result<[f64; 4]>> = with_workers(cfg.workers, || {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = root.with_stream(b).stream();
                let mut acc = [0.0; 4];
                for _ in b * BLOCK..((b + 1) * BLOCK).min(cfg.trials) {
                    let u = sample_sphere(n, r_u, &mut rng)?;
                    let v = sample_sphere(n - 1, r_v, &mut rng)?;
                    let a = CloudEmbedding::new(&u)?;
                    let mut x = a.embed(&v);
                    x.iter_mut().zip(&u).for_each(|(p, q)| *p += q);
                    let s = cfg.jammer.emit(&dummy, &mut rng)?;
                    let w1 = awgn(n, spec.sigma1_2, &mut rng)?;
                    let w2 = awgn(n, spec.sigma2_2, &mut rng)?;

                    let cloud_err = |y: &[f64]| {
                        let c = dot(y, &u) / (norm_sq(y).sqrt() * r_u);
                        any_of(clouds_minus_one, cap_probability(n, c))
                    };
                    let y2: Vec<f64> = x.iter().zip(&s).zip(&w2).map(|((a, b), c)| a + b + c).collect();
                    let weak = cloud_err(&y2);

                    let y1: Vec<f64> = x.iter().zip(&s).zip(&w1).map(|((a, b), c)| a + b + c).collect();
                    let c1 = cloud_err(&y1);
                    let resid: Vec<f64> = y1.iter().zip(&u).map(|(a, b)| a - b).collect();
                    let z = a.project(&resid);
                    let c = dot(&z, &v) / (norm_sq(&z).sqrt() * r_v);
                    let sat = any_of(sats_minus_one, cap_probability(n - 1, c));
                    let strong = 1.0 - (1.0 - c1) * (1.0 - sat);

                    acc[0] += weak;
                    acc[1] += weak * weak;
                    acc[2] += strong;
                    acc[3] += strong * strong;
                }
                Ok(acc)
            })
            .collect()
    })?;
    let mut tot = [0.0; 4];
    for s in sums {
        let s = s?;
        tot.iter_mut().zip(s).for_each(|(a, b)| *a += b);
    }
    let (weak, weak_ci95) = mean_ci(tot[0], tot[1], cfg.trials);
    let (strong, strong_ci95) = mean_ci(tot[2], tot[3], cfg.trials);
    Ok(BroadcastErrorReport {
        method: BroadcastMethod::Ensemble,
        trials: cfg.trials,
        weak,
        weak_ci95,
        strong,
        strong_ci95,
    })
}

/// Counted decoding errors of an explicit code with uniformly drawn message
/// pairs.
pub fn explicit_broadcast_error(
    code: &SuperpositionCode,
    spec: &BroadcastSpec,
    jammer: &JammerStrategy,
    trials: u64,
    seed: u64,
) -> Result<BroadcastErrorReport> {
    spec.validate()?;
    if trials == 0 {
        return Err(GavcError::param("trials", "must be >= 1"));
    }
    if code.gamma > spec.gamma * (1.0 + 1e-12) {
        return Err(GavcError::param("code", "code power exceeds gamma"));
    }
    let n = code.blocklength();
    jammer.validate(n, spec.lambda)?;
    let root = SeededRng::new(seed).derive(BCAST_LABEL);
    const BLOCK: u64 = 64;
    let blocks = trials.div_ceil(BLOCK);
    let counts: Vec<Result<(u64, u64)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = root.with_stream(b).stream();
            let (mut weak, mut strong) = (0, 0);
            for _ in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let i = rng.random_range(0..code.cloud.len());
                let j = rng.random_range(0..code.satellites[i].len());
                let x = code.encode(i, j)?;
                let s = jammer.emit(&code.cloud, &mut rng)?;
                let w1 = awgn(n, spec.sigma1_2, &mut rng)?;
                let w2 = awgn(n, spec.sigma2_2, &mut rng)?;
                let y2: Vec<f64> = x.iter().zip(&s).zip(&w2).map(|((a, b), c)| a + b + c).collect();
                weak += u64::from(code.decode_weak(&y2) != i);
                let y1: Vec<f64> = x.iter().zip(&s).zip(&w1).map(|((a, b), c)| a + b + c).collect();
                strong += u64::from(code.decode_strong(&y1)? != (i, j));
            }
            Ok((weak, strong))
        })
        .collect();
    let (mut weak, mut strong) = (0, 0);
    for c in counts {
        let (w, s) = c?;
        weak += w;
        strong += s;
    }
    Ok(BroadcastErrorReport {
        method: BroadcastMethod::Explicit,
        trials,
        weak: weak as f64 / trials as f64,
        weak_ci95: wilson_interval(weak, trials),
        strong: strong as f64 / trials as f64,
        strong_ci95: wilson_interval(strong, trials),
    })
}
