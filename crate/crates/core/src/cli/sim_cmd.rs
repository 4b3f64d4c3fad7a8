use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::output::{round_json, Cell, Table};
use super::{Format, Outcome, EXIT_OK};
use crate::channel::ScalarAvcSpec;
use crate::error::{GavcError, Result};
use crate::rates::{key_size_schedule, randomized_capacity, KeyRule};
use crate::sim::{
    adversarial_direction, codebook_size, noise_for_rate, run_trials, seeded_code, JammerStrategy, MessageSelection,
    TrialConfig, TrialReport,
};

/// Default code rate: 4096 codewords at n = 256.
pub const DEFAULT_RATE_BITS: f64 = 12.0 / 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum JammerKind {
    None,
    Gaussian,
    Sphere,
    Fixed,
    Symmetrize,
    Orthogonal,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimArgs {
    /// Blocklength; a comma-separated list runs a sweep at a fixed rate.
    #[arg(long, value_delimiter = ',', default_value = "256")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Set the jammer power equal to the input power.
    #[arg(long, conflicts_with = "lambda")]
    pub lambda_eq_gamma: bool,
    /// Noise variance. When given, the code rate is rate_frac * C_r;
    /// otherwise the noise is chosen so that --rate-bits sits at that fraction.
    #[arg(long = "sigma-w2")]
    pub sigma_w2: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub rate_frac: f64,
    #[arg(long, default_value_t = DEFAULT_RATE_BITS, conflicts_with = "sigma_w2")]
    pub rate_bits: f64,
    /// Fixed key count (1 is a deterministic code).
    #[arg(long)]
    pub k: Option<usize>,
    /// Key growth rule: nlogn, n2, n, linear:<c>.
    #[arg(long, default_value = "nlogn")]
    pub k_rule: String,
    #[arg(long, value_enum, default_value_t = JammerKind::Sphere)]
    pub jammer: JammerKind,
    /// Message attacked by the fixed jammer; defaults to the first swept message.
    #[arg(long)]
    pub target: Option<usize>,
    /// auto, random, all, sample:<m>.
    #[arg(long, default_value = "auto")]
    pub messages: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, env = "GAVC_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Re-run the configuration embedded in an earlier JSON report.
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Fully resolved simulation input. Embedded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRunConfig {
    pub n: Vec<usize>,
    pub gamma: f64,
    pub lambda: f64,
    pub sigma_w2: f64,
    pub rate_frac: f64,
    pub rate_bits: f64,
    pub k: Option<usize>,
    pub k_rule: String,
    pub jammer: JammerKind,
    pub target: Option<usize>,
    pub messages: String,
    pub trials: u64,
    pub seed: u64,
    pub block_size: u64,
}

impl SimRunConfig {
    pub fn from_args(a: &SimArgs) -> Result<Self> {
        let lambda = if a.lambda_eq_gamma { a.gamma } else { a.lambda };
        let (sigma_w2, rate_bits) = match a.sigma_w2 {
            Some(s) => {
                let cap = randomized_capacity(&ScalarAvcSpec::new(a.gamma, lambda, s)?)?;
                (s, a.rate_frac * cap)
            }
            None => (noise_for_rate(a.gamma, lambda, a.rate_bits, a.rate_frac)?, a.rate_bits),
        };
        Ok(Self {
            n: a.n.clone(),
            gamma: a.gamma,
            lambda,
            sigma_w2,
            rate_frac: a.rate_frac,
            rate_bits,
            k: a.k,
            k_rule: a.k_rule.clone(),
            jammer: a.jammer,
            target: a.target,
            messages: a.messages.clone(),
            trials: a.trials,
            seed: a.seed,
            block_size: TrialConfig::new(1, 0).block_size,
        })
    }
}

fn parse_messages(s: &str, codewords: usize) -> Result<MessageSelection> {
    match s {
        "auto" => Ok(MessageSelection::auto(codewords)),
        "random" => Ok(MessageSelection::Random),
        "all" => Ok(MessageSelection::All),
        _ => s
            .strip_prefix("sample:")
            .and_then(|m| m.parse().ok())
            .map(MessageSelection::Sample)
            .ok_or_else(|| {
                GavcError::param(
                    "messages",
                    format!("unknown selection `{s}` (auto, random, all, sample:<m>)"),
                )
            }),
    }
}

fn estimate_json(e: &crate::sim::ErrorEstimate) -> Value {
    json!({
        "trials": e.trials,
        "errors": e.errors,
        "rate_hat": e.rate_hat,
        "ci95": [e.ci95.0, e.ci95.1],
    })
}

struct Row {
    n: usize,
    keys: usize,
    codewords: usize,
    target: Option<usize>,
    report: TrialReport,
}

/// Runs a resolved configuration and returns the JSON report (without the
/// timestamp) plus the CSV table.
pub fn run_sim(cfg: &SimRunConfig, workers: Option<usize>) -> Result<(Value, Table)> {
    if cfg.n.is_empty() {
        return Err(GavcError::param("n", "need at least one blocklength"));
    }
    let spec = ScalarAvcSpec::new(cfg.gamma, cfg.lambda, cfg.sigma_w2)?;
    let rule: KeyRule = cfg.k_rule.parse()?;
    let mut rows = Vec::with_capacity(cfg.n.len());
    for &n in &cfg.n {
        let keys = match cfg.k {
            Some(0) => return Err(GavcError::param("k", "need at least one key")),
            Some(k) => k,
            None => usize::try_from(key_size_schedule(n, rule)?)
                .map_err(|_| GavcError::InvalidSchedule("key count overflows".into()))?,
        };
        let codewords = codebook_size(n, cfg.rate_bits)?;
        let (codebook, key_set) = seeded_code(n, codewords, keys, cfg.gamma, cfg.seed)?;
        let messages = parse_messages(&cfg.messages, codewords)?;
        let mut trial_cfg = TrialConfig::new(cfg.trials, cfg.seed).messages(messages.clone());
        trial_cfg.block_size = cfg.block_size;
        trial_cfg.workers = workers;
        let lambda = cfg.lambda;
        let mut target = None;
        let jammer = match cfg.jammer {
            JammerKind::None => JammerStrategy::None,
            JammerKind::Gaussian => JammerStrategy::GaussianNoise { lambda },
            JammerKind::Sphere => JammerStrategy::SphereUniform { lambda },
            JammerKind::Symmetrize => JammerStrategy::SymmetrizeCodeword { lambda },
            JammerKind::Orthogonal => JammerStrategy::OrthogonalNoise { lambda },
            JammerKind::Fixed => {
                let t = match cfg.target {
                    Some(t) => t,
                    None => messages
                        .resolve(codewords, cfg.seed)?
                        .and_then(|v| v.first().copied())
                        .unwrap_or(0),
                };
                target = Some(t);
                JammerStrategy::FixedVector {
                    s: adversarial_direction(&codebook, t, lambda)?,
                }
            }
        };
        let report = run_trials(&codebook, &key_set, &spec, &jammer, &trial_cfg)?;
        rows.push(Row {
            n,
            keys,
            codewords,
            target,
            report,
        });
    }

    let mut table = Table::new(vec![
        "n",
        "keys",
        "codewords",
        "trials",
        "errors",
        "rate_hat",
        "ci95_lo",
        "ci95_hi",
        "max_message",
        "max_rate_hat",
        "max_ci95_hi",
    ]);
    let mut json_rows = Vec::with_capacity(rows.len());
    for r in &rows {
        let avg = &r.report.average;
        let max = r.report.maximal.as_ref();
        table.push(vec![
            Cell::Int(r.n as i64),
            Cell::Int(r.keys as i64),
            Cell::Int(r.codewords as i64),
            Cell::Int(avg.trials as i64),
            Cell::Int(avg.errors as i64),
            avg.rate_hat.into(),
            avg.ci95.0.into(),
            avg.ci95.1.into(),
            max.map_or(Cell::Text(String::new()), |m| Cell::Int(m.message as i64)),
            max.map_or(Cell::Text(String::new()), |m| m.estimate.rate_hat.into()),
            max.map_or(Cell::Text(String::new()), |m| m.estimate.ci95.1.into()),
        ]);
        let mut row = json!({
            "n": r.n,
            "keys": r.keys,
            "codewords": r.codewords,
            "average": estimate_json(avg),
            "max_message": max.map(|m| {
                let mut v = estimate_json(&m.estimate);
                v["message"] = json!(m.message);
                v
            }),
        });
        if let Some(t) = r.target {
            row["target"] = json!(t);
        }
        json_rows.push(row);
    }

    let mut results = json!({
        "capacity_bits": randomized_capacity(&spec)?,
        "rows": json_rows,
    });
    if let [only] = rows.as_slice() {
        results["rate_hat"] = json!(only.report.average.rate_hat);
        results["ci95"] = json!([only.report.average.ci95.0, only.report.average.ci95.1]);
    } else {
        let non_increasing = rows
            .windows(2)
            .all(|w| w[1].report.average.rate_hat <= w[0].report.average.ci95.1);
        results["non_increasing"] = json!(non_increasing);
    }
    if cfg.lambda >= cfg.gamma {
        let deterministic = rows.iter().all(|r| r.keys == 1);
        results["note"] = json!(if deterministic {
            "symmetrizable regime: lambda >= gamma, so deterministic codes have zero capacity"
        } else {
            "symmetrizable regime: lambda >= gamma; only the shared key protects the code"
        });
    }
    let mut report = round_json(results);
    report["command"] = json!("sim");
    report["seed"] = json!(cfg.seed);
    report["config"] = serde_json::to_value(cfg).expect("config serializes");
    Ok((report, table))
}

pub(super) fn cmd_sim(a: &SimArgs) -> Result<Outcome> {
    let cfg = match &a.replay {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| GavcError::param("replay", format!("{}: {e}", path.display())))?;
            let v: Value = serde_json::from_str(&text)
                .map_err(|e| GavcError::param("replay", format!("{}: {e}", path.display())))?;
            serde_json::from_value(v.get("config").cloned().unwrap_or(Value::Null))
                .map_err(|e| GavcError::param("replay", format!("no usable `config` object: {e}")))?
        }
        None => SimRunConfig::from_args(a)?,
    };
    let (mut report, table) = run_sim(&cfg, a.workers)?;
    let body = match a.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let ts = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            report["timestamp"] = json!(ts);
            serde_json::to_string_pretty(&report).expect("JSON values serialize") + "\n"
        }
    };
    Ok(Outcome {
        body,
        code: EXIT_OK,
        out: a.out.clone(),
    })
}
