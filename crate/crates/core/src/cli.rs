//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{
    abp_bound, ads_bound, alasso_bound, minimax_lower, minimax_trace, power_law_risk, separation_bound, BoundInputs,
    MinimaxMode,
};
use crate::error::{Error, Result};
use crate::experiments::{
    emit_report, empirical_probability, read_csv, run_experiment, write_outputs, ExperimentPlan, ProbeEvent,
    ReportFormat, SweepAxis,
};
use crate::frames::{FrameKind, TightFrame};
use crate::linalg::mtx::{read_matrix, read_vector, write_matrix, write_vector};
use crate::noise::{ads_lambda, alasso_mu, l2_noise_bound};
use crate::sensing::{draw_sensing, drip_exact, drip_monte_carlo, SensingKind, SensingSpec};
use crate::solvers::{solve, solve_alasso_pdhg, Method, RecoveryProblem, SeparationVariant, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "frame-recovery", version, about = "Sparse recovery with coherent tight frames")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tight frame generation.
    Frame {
        #[command(subcommand)]
        action: FrameAction,
    },
    /// Sensing matrix generation.
    Sense {
        #[command(subcommand)]
        action: SenseAction,
    },
    /// D-RIP constant of A with respect to D, as JSON.
    Drip(DripArgs),
    /// Solve one recovery program.
    Recover(RecoverArgs),
    /// Evaluate an error bound, as JSON.
    Bound(BoundArgs),
    /// Monte Carlo probability of a noise or concentration event, as JSON.
    Probe(ProbeArgs),
    /// Run an experiment plan.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
    /// Convert a records CSV to another report format.
    Report(ReportArgs),
}

#[derive(Subcommand, Debug)]
pub enum FrameAction {
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum SenseAction {
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum ExperimentAction {
    Run {
        plan: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DripModeArg {
    Exact,
    Mc,
}

#[derive(Args, Debug)]
pub struct DripArgs {
    #[arg(long = "A")]
    pub a: PathBuf,
    #[arg(long = "D")]
    pub d: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: DripModeArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RecoverArgs {
    #[arg(long)]
    pub method: String,
    #[arg(long = "A")]
    pub a: PathBuf,
    #[arg(long = "D")]
    pub d: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// Sparsifying frame for the sparse noise (identity when omitted).
    #[arg(long)]
    pub omega: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub s_prime: usize,
    #[arg(long, group = "param")]
    pub lambda: Option<f64>,
    #[arg(long, group = "param")]
    pub mu: Option<f64>,
    #[arg(long, group = "param")]
    pub eps: Option<f64>,
    #[arg(long, group = "param", requires = "sigma")]
    pub paper_formula: bool,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Sets all three solver tolerances.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Solve ALASSO with PDHG instead of ADMM.
    #[arg(long)]
    pub pdhg: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the recovered sparse noise (separation methods).
    #[arg(long)]
    pub out_e: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BoundKind {
    Ads,
    Alasso,
    Abp,
    Separation,
    Minimax,
    Powerlaw,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Sabp,
    Sads,
    Salasso,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MinimaxArg {
    Expectation,
    HighProbability,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[arg(long)]
    pub which: BoundKind,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub s_prime: usize,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub norm11: f64,
    /// Comma-separated `‖D*f − (D*f)_[k]‖₁` for k = 1..s (zeros when omitted).
    #[arg(long, value_delimiter = ',')]
    pub tails: Vec<f64>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub c3: Option<f64>,
    #[arg(long)]
    pub c4: Option<f64>,
    #[arg(long)]
    pub c5: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, value_enum, default_value = "expectation")]
    pub mode: MinimaxArg,
    /// Design matrix for the trace form of the minimax risk.
    #[arg(long)]
    pub phi: Option<PathBuf>,
    #[arg(long = "R")]
    pub r: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EventArg {
    Lemma1,
    Gn,
    Lemma6,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub event: EventArg,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(long, default_value = "random_onb")]
    pub frame: String,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long, value_enum)]
    pub format: ReportFormatArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Records CSV written by `experiment run`.
    #[arg(long, default_value = "records.csv")]
    pub input: PathBuf,
    /// Sweep axis for plotdata (m, s, sigma or s_prime).
    #[arg(long)]
    pub axis: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReportFormatArg {
    Csv,
    Json,
    Plotdata,
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(format!("missing --{flag}")))
}

fn print_json(out: &mut dyn Write, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

fn say(out: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::io("<stdout>", e))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Parse(e.to_string()))?;
    run(cli, out)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Frame { action: FrameAction::Gen { kind, n, d, seed, out: path } } => {
            let frame = TightFrame::build(FrameKind::parse(&kind)?, n, d, seed)?;
            frame.write(&path)?;
            say(out, &format!("wrote {n}x{d} {kind} frame (residual {:.3e}) to {}", frame.residual(), path.display()))
        }
        Command::Sense { action: SenseAction::Gen { kind, m, n, seed, out: path } } => {
            let kind = SensingKind::parse(&kind)?;
            if kind == SensingKind::FromFile {
                return Err(Error::invalid("sense gen draws gaussian or bernoulli matrices"));
            }
            let a = draw_sensing(&SensingSpec::new(kind, m, n, seed))?;
            write_matrix(&path, &a, Some(&format!("{kind:?} sensing matrix, seed {seed}")))?;
            say(out, &format!("wrote {m}x{n} sensing matrix to {}", path.display()))
        }
        Command::Drip(args) => drip(args, out),
        Command::Recover(args) => recover(args, out),
        Command::Bound(args) => bound(args, out),
        Command::Probe(args) => probe(args, out),
        Command::Experiment { action: ExperimentAction::Run { plan, out_dir, workers } } => {
            experiment(&plan, &out_dir, workers, out)
        }
        Command::Report(args) => report(args, out),
    }
}

fn drip(args: DripArgs, out: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.a)?;
    let frame = TightFrame::from_file(&args.d)?;
    let report = match args.mode {
        DripModeArg::Exact => drip_exact(&a, &frame, args.s)?,
        DripModeArg::Mc => drip_monte_carlo(&a, &frame, args.s, args.trials, args.seed)?,
    };
    let mut value = serde_json::to_value(&report)?;
    if let Some(t) = &report.worst_support {
        value["worst_support"] = json!(t);
    }
    print_json(out, &value)
}

fn recover(args: RecoverArgs, out: &mut dyn Write) -> Result<()> {
    let a = read_matrix(&args.a)?;
    let frame = TightFrame::from_file(&args.d)?;
    let y = read_vector(&args.y)?;
    let (base, separation) = match args.method.as_str() {
        "abp" | "ads" | "alasso" => (args.method.as_str(), None),
        "sabp" => ("abp", Some(SeparationVariant::Sabp)),
        "sads" => ("ads", Some(SeparationVariant::Sads)),
        "salasso" => ("alasso", Some(SeparationVariant::Salasso)),
        other => return Err(Error::Parse(format!("unknown method {other:?}"))),
    };
    let omega = match (&args.omega, separation) {
        (Some(p), _) => Some(TightFrame::from_file(p)?),
        (None, Some(_)) => Some(TightFrame::build(FrameKind::Identity, y.len(), y.len(), 0)?),
        (None, None) => None,
    };
    let d_eff = frame.d() + omega.as_ref().filter(|_| separation.is_some()).map_or(0, |o| o.d());
    let explicit = match base {
        "ads" => args.lambda,
        "alasso" => args.mu,
        _ => args.eps,
    };
    let value = match (explicit, args.paper_formula) {
        (Some(v), _) => v,
        (None, true) => {
            let sigma = need(args.sigma, "sigma")?;
            match base {
                "ads" => ads_lambda(sigma, d_eff)?,
                "alasso" => alasso_mu(sigma, d_eff)?,
                _ => l2_noise_bound(sigma, y.len())?.0,
            }
        }
        (None, false) => {
            let flag = match base {
                "ads" => "lambda",
                "alasso" => "mu",
                _ => "eps",
            };
            return Err(Error::invalid(format!("{} needs --{flag} or --paper-formula --sigma", args.method)));
        }
    };
    let method = match base {
        "ads" => Method::Ads { lambda: value },
        "alasso" => Method::Alasso { mu: value },
        _ => Method::Abp { epsilon: value },
    };
    let mut config = SolverConfig::default();
    if let Some(t) = args.tol {
        config = config.with_tolerance(t);
    }
    if let Some(k) = args.max_iter {
        config.max_iter = k;
    }
    let mut problem = RecoveryProblem::new(a, frame, y, method)?;
    if separation.is_some() {
        let omega = omega.expect("built above for separation methods");
        problem = problem.with_separation(omega, args.s_prime)?;
    }
    let outcome = if args.pdhg && separation.is_none() && base == "alasso" {
        solve_alasso_pdhg(&problem, &config)?
    } else {
        solve(&problem, &config)?
    };
    write_vector(&args.out, &outcome.f_hat, Some(&format!("{} estimate", args.method)))?;
    if let (Some(path), Some(e)) = (&args.out_e, &outcome.e_hat) {
        write_vector(path, e, Some("sparse noise estimate"))?;
    }
    print_json(
        out,
        &json!({
            "method": args.method,
            "parameter": value,
            "iterations": outcome.iterations,
            "objective": outcome.objective,
            "duality_gap": outcome.duality_gap,
            "feasibility_margin": outcome.feasibility_margin,
            "converged": outcome.converged,
            "engine": outcome.engine,
        }),
    )
}

fn bound(args: BoundArgs, out: &mut dyn Write) -> Result<()> {
    let inputs = |param: f64| -> Result<BoundInputs> {
        let s = need(args.s, "s")?;
        let tails = if args.tails.is_empty() { vec![0.0; s] } else { args.tails.clone() };
        let mut i = BoundInputs::new(args.delta, param, tails).with_norm11(args.norm11).with_s_prime(args.s_prime);
        i.s = s;
        Ok(i)
    };
    let value = match args.which {
        BoundKind::Ads => serde_json::to_value(ads_bound(&inputs(need(args.lambda, "lambda")?)?)?)?,
        BoundKind::Alasso => serde_json::to_value(alasso_bound(&inputs(need(args.mu, "mu")?)?)?)?,
        BoundKind::Abp => {
            let s = need(args.s, "s")?;
            let tail = args.tails.last().copied().unwrap_or(0.0);
            let v = abp_bound(tail, s, need(args.eps, "eps")?, need(args.c2, "c2")?, need(args.c3, "c3")?)?;
            json!({ "bound": v })
        }
        BoundKind::Separation => {
            let variant = need(args.variant, "variant")?;
            let (variant, param) = match variant {
                VariantArg::Sads => (SeparationVariant::Sads, need(args.lambda, "lambda")?),
                VariantArg::Salasso => (SeparationVariant::Salasso, need(args.mu, "mu")?),
                VariantArg::Sabp => (SeparationVariant::Sabp, need(args.eps, "eps")?),
            };
            let constants = match (args.c4, args.c5) {
                (Some(a), Some(b)) => Some((a, b)),
                _ => None,
            };
            serde_json::to_value(separation_bound(variant, &inputs(param)?, constants)?)?
        }
        BoundKind::Minimax => {
            let sigma = need(args.sigma, "sigma")?;
            if let Some(path) = &args.phi {
                let risk = minimax_trace(&read_matrix(path)?, sigma)?;
                json!({ "risk": risk, "unbounded": risk.value().is_infinite() })
            } else {
                let mode = match args.mode {
                    MinimaxArg::Expectation => MinimaxMode::Expectation,
                    MinimaxArg::HighProbability => MinimaxMode::HighProbability,
                };
                let (v, floor) = minimax_lower(need(args.s, "s")?, sigma, args.delta, mode)?;
                json!({ "bound": v, "probability_floor": floor })
            }
        }
        BoundKind::Powerlaw => serde_json::to_value(power_law_risk(
            need(args.r, "R")?,
            need(args.p, "p")?,
            need(args.sigma, "sigma")?,
            need(args.d, "d")?,
            need(args.s, "s")?,
            args.c0,
        )?)?,
    };
    print_json(out, &value)
}

fn probe(args: ProbeArgs, out: &mut dyn Write) -> Result<()> {
    let event = match args.event {
        EventArg::Lemma1 => {
            let d = need(args.d, "d")?;
            ProbeEvent::Lemma1 {
                sigma: args.sigma,
                m: args.m,
                n: args.n.unwrap_or(d),
                d,
                alpha: args.alpha,
                frame: FrameKind::parse(&args.frame)?,
            }
        }
        EventArg::Gn => ProbeEvent::Gn { sigma: args.sigma, m: args.m },
        EventArg::Lemma6 => ProbeEvent::Lemma6 { m: args.m, n: args.n, delta: args.delta },
    };
    let result = empirical_probability(&event, args.trials, args.seed)?;
    print_json(out, &serde_json::to_value(result)?)
}

fn experiment(plan_path: &Path, out_dir: &Path, workers: Option<usize>, out: &mut dyn Write) -> Result<()> {
    let plan = ExperimentPlan::from_file(plan_path)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let output = run_experiment(&plan, workers)?;
    let written = write_outputs(&plan, &output, out_dir)?;
    let agg = &output.aggregate;
    say(out, &format!("{} records in {} cells; bound violations: {}", agg.records, agg.cells.len(), agg.bound_violations))?;
    for c in &agg.cells {
        say(
            out,
            &format!(
                "cell {:>3} {:<7} m={:<4} s={:<3} sigma={:<8} s'={:<3} median error {:.3e}  converged {}/{}",
                c.cell_index,
                c.method.name(),
                c.m,
                c.s,
                c.sigma,
                c.s_prime,
                c.median_error_l2,
                c.converged,
                c.trials
            ),
        )?;
    }
    for p in written {
        say(out, &format!("wrote {}", p.display()))?;
    }
    Ok(())
}

fn report(args: ReportArgs, out: &mut dyn Write) -> Result<()> {
    let records = read_csv(&args.input)?;
    let format = match args.format {
        ReportFormatArg::Csv => ReportFormat::Csv,
        ReportFormatArg::Json => ReportFormat::Json,
        ReportFormatArg::Plotdata => ReportFormat::Plotdata,
    };
    let axis = args.axis.as_deref().map(SweepAxis::parse).transpose()?;
    let agg = crate::experiments::aggregate(&records, None);
    emit_report(&records, Some(&agg), format, &args.out, axis)?;
    say(out, &format!("wrote {} records to {}", records.len(), args.out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String> {
        let mut buf = Vec::new();
        run_from(std::iter::once("frame-recovery").chain(args.iter().copied()), &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn bound_json() {
        let text = run_args(&["bound", "--which", "ads", "--delta", "0", "--s", "2", "--lambda", "1", "--tails", "2,0"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["k_star"], 2);
        assert!((v["bound"].as_f64().unwrap() - 8.0).abs() < 1e-12);
        let err = run_args(&["bound", "--which", "ads", "--delta", "0.5", "--s", "1", "--lambda", "1"]).unwrap_err();
        assert!(matches!(err, Error::HypothesisViolated(_)));
    }

    #[test]
    fn recover_needs_parameter() {
        let err = run_args(&["recover", "--method", "ads", "--A", "a", "--D", "d", "--y", "y", "--out", "f"]).unwrap_err();
        assert!(err.to_string().contains("a"), "{err}");
        assert!(run_args(&["recover", "--method", "ads"]).is_err());
    }
}
