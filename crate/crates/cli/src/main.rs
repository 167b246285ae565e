use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use liftfg::benchgen::{format_csv, format_summary, run_benchmark, BenchConfig};
use liftfg::inference::{
    counting_bp, joint_enumeration, loopy_bp, variable_elimination, KlDirection, DEFAULT_BP_ITERS,
    DEFAULT_STATE_CAP,
};
use liftfg::{
    parse_model, run_lifg, serialize_model, CpOptions, FactorGraph, LiftOutcome, Marginal,
    PositionMode, RvId,
};

/// Lifting and inference for factor graphs with unknown factors.
#[derive(Debug, Parser)]
#[command(name = "liftfg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fill unknown factors and compress the model.
    Lift(LiftArgs),
    /// Print marginals of a model.
    Infer(InferArgs),
    /// Run the synthetic benchmark battery.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct LiftOpts {
    /// Minimum agreeing fraction of candidates, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value = "canonical")]
    position_mode: PositionMode,
}

impl LiftOpts {
    fn cp(&self) -> CpOptions {
        CpOptions {
            position_mode: self.position_mode,
            ..CpOptions::default()
        }
    }

    fn lift(&self, g: &FactorGraph) -> Result<LiftOutcome> {
        if !(0.0..=1.0).contains(&self.theta) {
            bail!("--theta must lie in [0, 1], got {}", self.theta);
        }
        Ok(run_lifg(g, self.theta, &self.cp())?)
    }
}

#[derive(Debug, Args)]
struct LiftArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    opts: LiftOpts,
    /// Directory for `completed.fg`, `lifted.txt` and `report.txt`.
    /// Without it the report and lifted model go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Enumeration,
    Ve,
    Bp,
    Cbp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Debug, Args)]
struct InferArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum, default_value = "ve")]
    engine: Engine,
    /// Variables to query (comma separated or repeated). Defaults to all.
    #[arg(long, value_delimiter = ',')]
    query: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_BP_ITERS)]
    iters: usize,
    /// Lift models with unknown factors before inference.
    #[arg(long)]
    auto_lift: bool,
    #[command(flatten)]
    opts: LiftOpts,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Size parameters (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8, 16, 32])]
    d: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = DEFAULT_BP_ITERS)]
    iters: usize,
    #[arg(long, default_value = "pq")]
    kl_direction: KlDirection,
    /// KL is skipped above this d.
    #[arg(long, default_value_t = 32)]
    exact_limit: usize,
    /// Timed runs per engine; 0 disables timing.
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    /// Worker threads (overrides LIFTFG_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// A failure with a chosen exit status.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Exit {
    fn from(e: E) -> Self {
        Exit(1, e.into())
    }
}

fn read_model(path: &Path) -> Result<FactorGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_model(&text).with_context(|| format!("parsing {}", path.display()))
}

/// `x` with 12 significant digits, trailing zeros dropped.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (11 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.truncate(s.trim_end_matches('0').trim_end_matches('.').len());
    }
    s
}

fn cmd_lift(args: &LiftArgs) -> Result<u8, Exit> {
    let g = read_model(&args.model)?;
    let outcome = args.opts.lift(&g)?;
    let report = outcome.report.to_string();
    let lifted = outcome.lifted.as_ref().map(|m| m.to_text());
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(
                dir.join("completed.fg"),
                serialize_model(&outcome.completed),
            )?;
            fs::write(dir.join("report.txt"), &report)?;
            if let Some(text) = &lifted {
                fs::write(dir.join("lifted.txt"), text)?;
            }
            print!("{report}");
        }
        None => {
            print!("{report}");
            if let Some(text) = &lifted {
                print!("{text}");
            }
        }
    }
    Ok(if outcome.is_complete() { 0 } else { 2 })
}

fn cmd_infer(args: &InferArgs) -> Result<u8, Exit> {
    let mut g = read_model(&args.model)?;
    let queries: Vec<RvId> = if args.query.is_empty() {
        g.rv_ids().collect()
    } else {
        args.query
            .iter()
            .map(|name| {
                g.rv_by_name(name)
                    .with_context(|| format!("no variable named `{name}`"))
            })
            .collect::<Result<_>>()?
    };

    let needs_lift = !g.is_fully_known();
    if needs_lift && !args.auto_lift {
        return Err(Exit(
            2,
            anyhow::anyhow!(
                "model has {} unknown factors (use --auto-lift)",
                g.num_unknown()
            ),
        ));
    }
    let mut outcome = None;
    if needs_lift || args.engine == Engine::Cbp {
        let o = args.opts.lift(&g)?;
        if !o.is_complete() {
            eprint!("{}", o.report);
            return Err(Exit(2, anyhow::anyhow!("lifting left unknown factors")));
        }
        g = o.completed.clone();
        outcome = Some(o);
    }

    let marginals: Vec<Marginal> = match args.engine {
        Engine::Enumeration => queries
            .iter()
            .map(|&q| joint_enumeration(&g, q, DEFAULT_STATE_CAP))
            .collect::<Result<_, _>>()?,
        Engine::Ve => queries
            .iter()
            .map(|&q| variable_elimination(&g, q))
            .collect::<Result<_, _>>()?,
        Engine::Bp => {
            let all = loopy_bp(&g, args.iters)?;
            queries.iter().map(|q| all[q.0].clone()).collect()
        }
        Engine::Cbp => {
            let lifted = outcome
                .as_ref()
                .and_then(|o| o.lifted.as_ref())
                .expect("lifted above");
            let all = counting_bp(lifted, args.iters)?;
            queries
                .iter()
                .map(|&q| Marginal {
                    rv: q,
                    probs: all[lifted.supervar_of(q)].probs.clone(),
                })
                .collect()
        }
    };

    let mut out = String::new();
    if args.format == Format::Csv {
        out.push_str("rv,value,probability\n");
    }
    for m in &marginals {
        let rv = g.rv(m.rv);
        match args.format {
            Format::Text => {
                out.push_str(&format!("marginal {}:", rv.name));
                for p in &m.probs {
                    out.push(' ');
                    out.push_str(&sig12(*p));
                }
                out.push('\n');
            }
            Format::Csv => {
                for (label, p) in rv.range.iter().zip(&m.probs) {
                    out.push_str(&format!("{},{},{}\n", rv.name, label, sig12(*p)));
                }
            }
        }
    }
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(0)
}

fn cmd_bench(args: &BenchArgs) -> Result<u8, Exit> {
    if !(0.0..=1.0).contains(&args.theta) {
        return Err(anyhow::anyhow!("--theta must lie in [0, 1], got {}", args.theta).into());
    }
    if args.d.contains(&0) {
        return Err(anyhow::anyhow!("--d values must be positive").into());
    }
    let cfg = BenchConfig {
        ds: args.d.clone(),
        instances: args.instances,
        seed: args.seed,
        theta: args.theta,
        kl_direction: args.kl_direction,
        iters: args.iters,
        exact_limit: args.exact_limit,
        repetitions: args.repetitions,
        threads: args.threads,
    };
    let result = run_benchmark(&cfg)?;
    let timing = args.repetitions > 0;
    let csv = format_csv(&result, args.seed, timing);
    if let Some(path) = &args.out {
        fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
    }
    match args.format {
        Format::Csv => print!("{csv}"),
        Format::Text => {
            print!("{}", format_summary(&result, timing));
            let incomplete = result.records.iter().filter(|r| !r.complete).count();
            let short = result
                .records
                .iter()
                .filter(|r| r.removal_shortfall)
                .count();
            println!(
                "instances: {} incomplete: {incomplete} removal shortfall: {short}",
                result.records.len()
            );
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match &cli.command {
        Command::Lift(a) => cmd_lift(a),
        Command::Infer(a) => cmd_infer(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
