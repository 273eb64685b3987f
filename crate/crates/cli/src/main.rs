use std::path::PathBuf;
use std::process::ExitCode;

use aup_core::catalog::{default_model, model_phi, ModelId};
use aup_core::prior::{construct_log_prior, integrability_check};
use aup_core::sim::{
    emit_csv, parse_grid_spec, render_csv, reproduce_figure, run_experiment, write_metadata,
    ExperimentConfig, Figure, MetricsRecord, Scenario,
};
use aup_core::tensor::{ParamPoint, TensorTolerance};
use aup_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aup",
    version,
    about = "Asymptotically unbiased priors: fields, existence checks and simulation"
)]
struct Cli {
    /// Log progress to stderr (RUST_LOG overrides).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the NER simulation study and write metrics as CSV.
    Simulate(Box<SimulateArgs>),
    /// Reproduce the data behind one of the simulation study figures.
    Reproduce(ReproduceArgs),
    /// Print the phi field of a catalog model at a point.
    Phi {
        #[arg(long)]
        model: ModelId,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        theta: ParamPoint,
    },
    /// Check the integrability condition on a grid.
    Integrability {
        #[arg(long)]
        model: ModelId,
        /// One axis per line: `v1, v2, ...` or `lo:hi:count`.
        #[arg(long)]
        grid_spec: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Build the log prior by path integration of phi from an anchor.
    ConstructPrior {
        #[arg(long)]
        model: ModelId,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        anchor: Option<ParamPoint>,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        theta: ParamPoint,
        #[arg(long, default_value_t = 1e-6)]
        quad_tol: f64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Flat key = value file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    /// Comma list of au, jeffreys, dg.
    #[arg(long)]
    prior: Option<String>,
    /// `i`, `ii`, or an explicit comma list for theta.
    #[arg(long, allow_hyphen_values = true)]
    scenario: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    #[arg(long)]
    chain: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
    #[arg(long)]
    dg_chain: Option<String>,
    #[arg(long)]
    dg_warmup: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<String>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    figure: Figure,
    #[arg(long, default_value = "i")]
    scenario: Scenario,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<ParamPoint, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| format!("bad number `{t}`"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(ParamPoint::from)
}

/// Fixed 10-decimal text, printing values that round to zero without a sign.
fn fmt_value(x: f64) -> String {
    let s = format!("{x:.10}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

fn fmt_values(v: &[f64]) -> String {
    v.iter()
        .map(|&x| fmt_value(x))
        .collect::<Vec<_>>()
        .join(",")
}

fn simulate_config(a: &SimulateArgs) -> aup_core::Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    let overrides = [
        ("model", &a.model),
        ("prior", &a.prior),
        ("scenario", &a.scenario),
        ("m", &a.m),
        ("n", &a.n),
        ("reps", &a.reps),
        ("chain", &a.chain),
        ("warmup", &a.warmup),
        ("dg-chain", &a.dg_chain),
        ("dg-warmup", &a.dg_warmup),
        ("seed", &a.seed),
        ("threads", &a.threads),
        ("out", &a.out),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_records(
    records: &[MetricsRecord],
    cfg: &ExperimentConfig,
    out: Option<&PathBuf>,
) -> aup_core::Result<()> {
    match out {
        Some(path) => {
            emit_csv(records, path)?;
            write_metadata(cfg, path)?;
            eprintln!("wrote {} rows to {}", records.len(), path.display());
        }
        None => print!("{}", render_csv(records)),
    }
    Ok(())
}

fn run(cli: Cli) -> aup_core::Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = simulate_config(&a)?;
            let records = run_experiment(&cfg)?;
            write_records(&records, &cfg, cfg.out.as_ref())
        }
        Command::Reproduce(a) => {
            let records =
                reproduce_figure(a.figure, a.scenario.clone(), a.reps, a.seed, a.threads)?;
            let cfg = aup_core::sim::figure_config(a.figure, a.scenario, a.reps, a.seed)?;
            write_records(&records, &cfg, a.out.as_ref())
        }
        Command::Phi { model, theta } => {
            let m = default_model(model);
            let phi = model_phi(m.as_ref());
            println!("{}", fmt_values(&phi.eval(&theta)?));
            Ok(())
        }
        Command::Integrability {
            model,
            grid_spec,
            tol,
        } => {
            let text = std::fs::read_to_string(&grid_spec).map_err(|e| Error::Io {
                path: grid_spec.clone(),
                source: e,
            })?;
            let grid = parse_grid_spec(&text)?;
            let m = default_model(model);
            let phi = model_phi(m.as_ref());
            let tol = TensorTolerance::new(tol, 1e-9, TensorTolerance::default().fd_step)?;
            let r = integrability_check(&phi, &grid, &tol)?;
            println!("integrable: {}", r.verdict);
            println!("points_tested: {}", r.points_tested);
            println!("points_skipped: {}", r.skipped.len());
            println!("max_asymmetry: {}", fmt_value(r.max_asymmetry));
            println!("threshold: {}", fmt_value(r.threshold));
            if let Some((i, j, at)) = &r.worst {
                println!("worst: d{i}/d{j} at {}", fmt_values(at));
            }
            Ok(())
        }
        Command::ConstructPrior {
            model,
            anchor,
            theta,
            quad_tol,
        } => {
            let m = default_model(model);
            let anchor = anchor.unwrap_or_else(|| m.default_anchor());
            let phi = model_phi(m.as_ref());
            let prior = construct_log_prior(&phi, &anchor, quad_tol)?;
            println!("{}", fmt_value(prior.eval(&theta)?));
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Aborted(_) => 3,
        Error::Io { .. } | Error::QuadratureFailure { .. } | Error::NonFiniteDraw { .. } => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
