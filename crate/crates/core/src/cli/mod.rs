//! `gavc` command-line front end. Every command prints one JSON object (or a
//! CSV table) and maps library errors onto exit codes: 2 for usage and
//! validation, 3 for numerical failures, 4 for infeasible operating points.

pub mod figure;
pub mod output;
mod sim_cmd;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::channel::ScalarAvcSpec;
use crate::dpc_opt::{dpc_gamma_threshold, optimize_dpc, DpcStatus};
use crate::error::GavcError;
use crate::mimo::{full_rank_rate, maxmin_rate_221, maxmin_solver_general, rate_wfillnew, upper_bound_rate, MimoSpec};
use crate::rates::{
    costa_alpha, deterministic_capacity, dpc_capacity_condition, dpc_outer_bound, randomized_capacity, DpcSpec,
};
use figure::{dbc_table, dpc_table, mimo221_table, DbcFigure, DpcFigure, MimoFigure};
use output::{round_json, Table};
pub use sim_cmd::{run_sim, SimRunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

pub fn exit_code(err: &GavcError) -> i32 {
    match err {
        GavcError::InvalidParameter { .. } | GavcError::InvalidSchedule(_) | GavcError::DimensionMismatch { .. } => {
            EXIT_USAGE
        }
        GavcError::Numeric(_) | GavcError::Degenerate(_) => EXIT_NUMERIC,
        GavcError::Infeasible(_) => EXIT_INFEASIBLE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "gavc", version, about = "Gaussian arbitrarily varying channel laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Randomized and deterministic capacities, optionally the dirty-paper bounds.
    Rate(RateArgs),
    /// Maximize the dirty-paper rate over (alpha, rho).
    Dpc(DpcArgs),
    /// Rank-one MIMO jamming rates and the max-min allocation.
    Mimo(MimoArgs),
    /// CSV (or JSON) data behind a figure.
    Figure(FigureArgs),
    /// Monte Carlo error estimate for rotated sphere codes.
    Sim(sim_cmd::SimArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct RateArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "sigma-w2")]
    pub sigma_w2: f64,
    /// Report the deterministic-code capacity instead.
    #[arg(long)]
    pub deterministic: bool,
    /// Known-interference variance; adds the dirty-paper quantities.
    #[arg(long = "sigma-t2")]
    pub sigma_t2: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DpcArgs {
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long = "sigma-w2")]
    pub sigma_w2: f64,
    #[arg(long = "sigma-t2")]
    pub sigma_t2: f64,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub refine_tol: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct MimoArgs {
    /// Per-antenna noise variances, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub nu: Vec<f64>,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    Dbc,
    Dpc,
    Mimo221,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FigureArgs {
    pub name: FigureName,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "sigma1-2")]
    pub sigma1_2: Option<f64>,
    #[arg(long = "sigma2-2")]
    pub sigma2_2: Option<f64>,
    #[arg(long = "sigma-t2")]
    pub sigma_t2: Option<f64>,
    #[arg(long = "sigma-w2")]
    pub sigma_w2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub nu: Option<Vec<f64>>,
    /// Boundary points of the broadcast region.
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    /// Sweep resolution (gamma for dpc, lambda for mimo221).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Upper end of the sweep.
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced and the exit code to report.
#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub code: i32,
    pub out: Option<PathBuf>,
}

impl Outcome {
    fn json(v: Value, code: i32) -> Self {
        Self {
            body: serde_json::to_string_pretty(&v).expect("JSON values serialize") + "\n",
            code,
            out: None,
        }
    }
}

pub fn execute(cli: Cli) -> Result<Outcome, GavcError> {
    match cli.command {
        Command::Rate(a) => cmd_rate(&a),
        Command::Dpc(a) => cmd_dpc(&a),
        Command::Mimo(a) => cmd_mimo(&a),
        Command::Figure(a) => cmd_figure(&a),
        Command::Sim(a) => sim_cmd::cmd_sim(&a),
    }
}

/// Parses `args`, runs the command and writes to `stdout`/`stderr`. Returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            let written = match &outcome.out {
                Some(path) => std::fs::write(path, &outcome.body),
                None => stdout.write_all(outcome.body.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                return EXIT_USAGE;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_rate(a: &RateArgs) -> Result<Outcome, GavcError> {
    let spec = ScalarAvcSpec::new(a.gamma, a.lambda, a.sigma_w2)?;
    let mut v = json!({
        "gamma": spec.gamma,
        "lambda": spec.lambda,
        "sigma_w2": spec.sigma_w2,
    });
    if a.deterministic {
        v["c_d_bits"] = json!(deterministic_capacity(&spec)?);
        v["formula"] = json!("deterministic_capacity");
        v["regime"] = json!(if spec.gamma <= spec.lambda {
            "symmetrizable"
        } else {
            "non_symmetrizable"
        });
    } else {
        v["c_r_bits"] = json!(randomized_capacity(&spec)?);
        v["formula"] = json!("randomized_capacity");
    }
    if let Some(st2) = a.sigma_t2 {
        let dspec = DpcSpec::new(a.gamma, a.lambda, a.sigma_w2, st2)?;
        v["sigma_t2"] = json!(st2);
        v["dpc_alpha0"] = json!(costa_alpha(&dspec));
        v["dpc_capacity_condition"] = json!(dpc_capacity_condition(&dspec)?);
        v["dpc_outer_bound_bits"] = json!(dpc_outer_bound(&dspec)?);
    }
    Ok(Outcome::json(round_json(v), EXIT_OK))
}

fn cmd_dpc(a: &DpcArgs) -> Result<Outcome, GavcError> {
    let spec = DpcSpec::new(a.gamma, a.lambda, a.sigma_w2, a.sigma_t2)?;
    let res = optimize_dpc(&spec, a.grid_step, a.refine_tol)?;
    let mut v = json!({
        "gamma": spec.gamma,
        "lambda": spec.lambda,
        "sigma_w2": spec.sigma_w2,
        "sigma_t2": spec.sigma_t2,
        "grid_step": a.grid_step,
        "refine_tol": a.refine_tol,
        "status": res.status,
        "rate_bits": res.best_rate,
        "outer_bound_bits": dpc_outer_bound(&spec)?,
        "capacity_condition": dpc_capacity_condition(&spec)?,
        "gamma_threshold": dpc_gamma_threshold(spec.lambda, spec.sigma_t2, spec.sigma_w2)?,
    });
    if let Some(p) = res.best_params {
        v["alpha"] = json!(p.alpha);
        v["rho"] = json!(p.rho);
        v["feasibility_margin"] = json!(res.feasibility_margin);
    }
    let code = match res.status {
        DpcStatus::Feasible => EXIT_OK,
        DpcStatus::Infeasible => EXIT_INFEASIBLE,
    };
    Ok(Outcome::json(round_json(v), code))
}

fn cmd_mimo(a: &MimoArgs) -> Result<Outcome, GavcError> {
    let spec = MimoSpec::new(a.nu.clone(), a.gamma, a.lambda)?;
    let sol = maxmin_solver_general(&spec, a.tol)?;
    let mut v = json!({
        "nu": spec.nu(),
        "gamma": spec.gamma(),
        "lambda": spec.lambda(),
        "tol": a.tol,
        "r_wfill_bits": full_rank_rate(&spec),
        "upper_bound_bits": upper_bound_rate(&spec),
        "maxmin_bits": sol.rate,
        "dual_bound_bits": sol.dual_bound,
        "allocation": sol.allocation.powers,
        "jammer_mix": sol.jammer_mix,
        "iterations": sol.iterations,
        "converged": sol.converged,
    });
    if spec.is_sorted() {
        v["wfillnew_bits"] = json!(rate_wfillnew(&spec)?);
        if spec.m() == 2 {
            let mm = maxmin_rate_221(&spec)?;
            v["closed_form_bits"] = json!(mm.rate);
            v["closed_form_allocation"] = json!(mm.allocation.powers);
            v["case"] = json!(mm.case.label());
        }
    }
    let code = if sol.converged { EXIT_OK } else { EXIT_NUMERIC };
    Ok(Outcome::json(round_json(v), code))
}

fn cmd_figure(a: &FigureArgs) -> Result<Outcome, GavcError> {
    let (table, config): (Table, Value) = match a.name {
        FigureName::Dbc => {
            let d = DbcFigure::default();
            let fig = DbcFigure {
                gamma: a.gamma.unwrap_or(d.gamma),
                lambda: a.lambda.unwrap_or(d.lambda),
                sigma1_2: a.sigma1_2.unwrap_or(d.sigma1_2),
                sigma2_2: a.sigma2_2.unwrap_or(d.sigma2_2),
                alpha_steps: a.alpha_steps.or(a.steps).unwrap_or(d.alpha_steps),
            };
            (dbc_table(&fig)?, json!(fig))
        }
        FigureName::Dpc => {
            let d = DpcFigure::default();
            let fig = DpcFigure {
                lambda: a.lambda.unwrap_or(d.lambda),
                sigma_t2: a.sigma_t2.unwrap_or(d.sigma_t2),
                sigma_w2: a.sigma_w2.unwrap_or(d.sigma_w2),
                gamma_max: a.max.unwrap_or(d.gamma_max),
                steps: a.steps.unwrap_or(d.steps),
                grid_step: d.grid_step,
            };
            (dpc_table(&fig)?, json!(fig))
        }
        FigureName::Mimo221 => {
            let d = MimoFigure::default();
            let fig = MimoFigure {
                nu: a.nu.clone().unwrap_or(d.nu),
                gamma: a.gamma.unwrap_or(d.gamma),
                lambda_max: a.max.unwrap_or(d.lambda_max),
                steps: a.steps.unwrap_or(d.steps),
            };
            (mimo221_table(&fig)?, json!(fig))
        }
    };
    let body = match a.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|r| {
                    Value::Object(
                        table
                            .header
                            .iter()
                            .zip(r)
                            .map(|(h, c)| {
                                let v = match c {
                                    output::Cell::Num(x) => json!(x),
                                    output::Cell::Int(i) => json!(i),
                                    output::Cell::Text(s) => json!(s),
                                };
                                (h.to_string(), v)
                            })
                            .collect(),
                    )
                })
                .collect();
            let v = json!({ "figure": format!("{:?}", a.name).to_lowercase(), "config": config, "rows": rows });
            serde_json::to_string_pretty(&round_json(v)).expect("JSON values serialize") + "\n"
        }
    };
    Ok(Outcome {
        body,
        code: EXIT_OK,
        out: a.out.clone(),
    })
}
