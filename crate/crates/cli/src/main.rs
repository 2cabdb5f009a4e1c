use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mfquad::geometry::Builtin;
use mfquad::harness::{default_constraint, reference_integral, run_study, runge_center, ExperimentConfig, Target, TestFunction};
use mfquad::mfd::Operator;
use mfquad::nodegen::{advancing_front, rejection_sample, SamplingMode};
use mfquad::quadrature::{compute_weights, ConstraintKind, Method, QuadratureOptions, SolverChoice, WeightTable};
use mfquad::NodeSet;

#[derive(Parser)]
#[command(name = "mfquad", version, about = "Moment-free quadrature weights on scattered nodes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a node set and write it as CSV.
    Nodes {
        #[command(flatten)]
        gen: NodeArgs,
        /// `front` (advancing front) or a rejection mode: `grid`, `halton`, `random`.
        #[arg(long, default_value = "front")]
        generator: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute quadrature weights and write them as CSV.
    Weights {
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a rule to a test function and compare with the reference value.
    Integrate {
        #[command(flatten)]
        rule: RuleArgs,
        /// Read weights from a file instead of computing them.
        #[arg(long, conflicts_with = "nodes")]
        weights: Option<PathBuf>,
        /// `runge`, `franke` or `one`.
        #[arg(long, default_value = "runge")]
        function: String,
        /// `interior` or `boundary`.
        #[arg(long, default_value = "interior")]
        target: String,
    },
    /// Run a convergence study from a `key = value` config file.
    Study {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the `out` key of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in domains.
    Domains,
}

#[derive(Args)]
struct NodeArgs {
    #[arg(long)]
    domain: Builtin,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct RuleArgs {
    #[command(flatten)]
    gen: NodeArgs,
    #[arg(long)]
    method: Method,
    #[arg(long, default_value_t = 4)]
    q: usize,
    /// Defaults to `boundary` when |∂Ω| is known, else `fundamental`.
    #[arg(long)]
    constraint: Option<ConstraintKind>,
    #[arg(long, default_value = "auto")]
    solver: SolverChoice,
    #[arg(long, default_value = "divergence")]
    operator: Operator,
    /// Read nodes from a file instead of generating them.
    #[arg(long)]
    nodes: Option<PathBuf>,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(anyhow::Error),
    Numerical(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<mfquad::Error>() {
            Some(mfquad::Error::Parse(_) | mfquad::Error::Io(_) | mfquad::Error::UnknownMeasure(_)) | None => Failure::Usage(e),
            Some(_) => Failure::Numerical(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command).map_err(Failure::from) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Domains => {
            let mut out = io::stdout().lock();
            for b in Builtin::ALL {
                writeln!(out, "{b}")?;
            }
        }
        Command::Nodes { gen, generator, out } => {
            let nodes = generate(&gen, &generator)?;
            nodes.write_csv(output(out.as_deref())?)?;
        }
        Command::Weights { rule, out } => {
            build_rule(&rule)?.write_csv(output(out.as_deref())?)?;
        }
        Command::Integrate { rule, weights, function, target } => integrate(&rule, weights.as_deref(), &function, &target)?,
        Command::Study { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ExperimentConfig::parse(&text)?;
            let report = run_study(&cfg)?;
            report.write_csv(output(out.as_deref().or(cfg.out.as_deref()))?)?;
        }
    }
    Ok(())
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn generate(gen: &NodeArgs, generator: &str) -> Result<NodeSet> {
    let d = gen.domain.model();
    Ok(match generator {
        "front" => advancing_front(&d, gen.h, gen.seed)?,
        mode => rejection_sample(&d, gen.h, mode.parse::<SamplingMode>()?, gen.seed)?,
    })
}

fn build_rule(args: &RuleArgs) -> Result<mfquad::QuadratureRule> {
    let d = args.gen.domain.model();
    let nodes = match &args.nodes {
        Some(p) => {
            let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let mut n = NodeSet::read_csv(BufReader::new(file))?;
            if !n.h.is_finite() {
                n.h = args.gen.h;
            }
            n
        }
        None => advancing_front(&d, args.gen.h, args.gen.seed)?,
    };
    let mut opts = QuadratureOptions::new(args.method, args.q, args.constraint.unwrap_or_else(|| default_constraint(args.gen.domain)));
    opts.solver = args.solver;
    opts.operator = args.operator;
    Ok(compute_weights(&d, &nodes, &opts)?)
}

fn integrate(args: &RuleArgs, weights: Option<&Path>, function: &str, target: &str) -> Result<()> {
    let b = args.gen.domain;
    let f = match function {
        "runge" => TestFunction::runge(runge_center(b), b.dim()),
        "franke" => TestFunction::franke(b.dim()),
        "one" => TestFunction::constant(1.0, b.dim()),
        other => bail!(mfquad::Error::Parse(format!("unknown function `{other}`"))),
    };
    let target = match target {
        "interior" => Target::Interior,
        "boundary" => Target::Boundary,
        other => bail!(mfquad::Error::Parse(format!("unknown target `{other}`"))),
    };
    let table = match weights {
        Some(p) => {
            let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            WeightTable::read_csv(BufReader::new(file))?
        }
        None => {
            let r = build_rule(args)?;
            WeightTable { dim: r.dim, y: r.y, w: r.w, z: r.z, v: r.v }
        }
    };
    let (pts, wts) = match target {
        Target::Interior => (&table.y, &table.w),
        Target::Boundary => (&table.z, &table.v),
    };
    let value: f64 = pts.iter().zip(wts).map(|(&p, w)| f.eval(p).map(|fp| w * fp)).sum::<mfquad::Result<f64>>()?;
    let mut out = io::stdout().lock();
    writeln!(out, "value {value:.16e}")?;
    match reference_integral(&b.model(), &f, target) {
        Ok(r) => {
            writeln!(out, "reference {r:.16e}")?;
            writeln!(out, "relative_error {:.6e}", ((value - r) / r).abs())?;
        }
        Err(_) => writeln!(out, "reference unavailable")?,
    }
    Ok(())
}
