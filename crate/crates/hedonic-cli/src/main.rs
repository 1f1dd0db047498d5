//! Command line front end: generate instances, run mechanisms, query the
//! exact oracle, measure ratios, verify strategyproofness/acceptability,
//! and reproduce the full acceptance suite.
//!
//! All values cross the boundary as exact rationals. Exit codes: 0 success,
//! 2 usage error, 3 validation error, 4 enumeration guard exceeded,
//! 5 reproduction failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hedonic::Rational;
use hedonic::game::{GameKind, Partition, ValuationClass, social_welfare};
use hedonic::instances::{self, Instance};
use hedonic::mechanisms::{AgentOrdering, MechanismId, run_mechanism};
use hedonic::oracle::optimal_partition;
use hedonic::repro;
use hedonic::verify::{self, DeviationSpace};

#[derive(Parser)]
#[command(
    name = "hedonic",
    version,
    about = "Coalition formation games: mechanisms, oracle, verifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a named instance and print or write it
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Run a mechanism on an instance and print the partition and welfare
    Run {
        /// grand | singletons | duplex-pairing | matching
        #[arg(long)]
        mechanism: String,
        /// `identity` or a comma-separated 1-indexed permutation
        #[arg(long, default_value = "identity")]
        order: String,
        instance: PathBuf,
    },
    /// Exhaustively compute the optimal partition and its welfare
    Opt { instance: PathBuf },
    /// Compare a mechanism's welfare with the optimum
    Ratio {
        #[arg(long)]
        mechanism: String,
        #[arg(long, default_value = "identity")]
        order: String,
        instance: PathBuf,
    },
    /// Search for profitable single-agent deviations
    VerifySp {
        #[arg(long)]
        mechanism: String,
        #[arg(long, default_value = "identity")]
        order: String,
        /// exhaustive | grid | sampled (default picked by class)
        #[arg(long)]
        mode: Option<String>,
        /// grid step (rational), default 1/10
        #[arg(long)]
        step: Option<String>,
        /// sampled rows per agent, default 100
        #[arg(long, default_value_t = 100)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        instance: PathBuf,
    },
    /// Check that a mechanism's outcomes have nonnegative welfare
    VerifyAcceptable {
        #[arg(long)]
        mechanism: String,
        #[arg(long, default_value = "identity")]
        order: String,
        #[arg(required = true)]
        instances: Vec<PathBuf>,
    },
    /// Run the reproduction suite against the golden corpus
    Repro {
        /// run only checks whose id contains this string
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value = "corpus")]
        corpus: PathBuf,
    },
}

#[derive(Subcommand)]
enum Family {
    /// 3-agent general-valuations gap pair (arcs eps, -1 or -eps, 9/10)
    GeneralGap {
        /// rational in (0, 1/10)
        #[arg(long)]
        eps: String,
        #[arg(long)]
        variant: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Even directed cycle with alternating alpha/beta arcs
    NonnegCycle {
        #[arg(long = "n")]
        agents: usize,
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Duplex star on n agents (variants 1 and 2)
    DuplexStar {
        #[arg(long = "n")]
        agents: usize,
        #[arg(long)]
        variant: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simple 7-cycle (variant 1) or 7-cycle plus chord (variant 2)
    SimpleCycle7 {
        #[arg(long)]
        variant: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Duplex 4-cycle with unit arcs
    FourCycle {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random instance
    Random {
        /// general | nonneg | duplex | simple
        #[arg(long)]
        class: String,
        #[arg(long = "n")]
        agents: usize,
        /// rational in [0, 1]
        #[arg(long)]
        density: String,
        #[arg(long)]
        seed: u64,
        /// ashg | fhg
        #[arg(long, default_value = "ashg")]
        game: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    Validation(String),
    Guard(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 3,
            CliError::Guard(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Guard(m) => m,
        }
    }
}

impl From<hedonic::GuardError> for CliError {
    fn from(e: hedonic::GuardError) -> Self {
        CliError::Guard(e.to_string())
    }
}

impl From<hedonic::mechanisms::MechanismError> for CliError {
    fn from(e: hedonic::mechanisms::MechanismError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<hedonic::instances::GeneratorError> for CliError {
    fn from(e: hedonic::instances::GeneratorError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<verify::VerifyError> for CliError {
    fn from(e: verify::VerifyError) -> Self {
        match e {
            verify::VerifyError::Guard(g) => CliError::Guard(g.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Gen { family } => {
            let (inst, out) = build_instance(family)?;
            emit(&inst, out.as_deref())?;
        }
        Command::Run {
            mechanism,
            order,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let id = parse_mechanism(&mechanism)?;
            let ord = parse_order(&order, inst.profile.n())?;
            let partition = run_mechanism(id, &inst.profile, &ord)?;
            print_partition(&partition);
            println!(
                "welfare {}",
                social_welfare(&inst.profile, inst.kind, &partition)
            );
        }
        Command::Opt { instance } => {
            let inst = load_instance(&instance)?;
            let opt = optimal_partition(&inst.profile, inst.kind)?;
            print_partition(&opt.best);
            println!("welfare {}", opt.welfare);
            println!("examined {}", opt.partitions_examined);
        }
        Command::Ratio {
            mechanism,
            order,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let id = parse_mechanism(&mechanism)?;
            let ord = parse_order(&order, inst.profile.n())?;
            let report = verify::approx_ratio(id, Some(&ord), &inst, inst.kind)?;
            println!("opt {}", report.opt_welfare);
            println!("mech {}", report.mechanism_welfare);
            println!("ratio {}", report.ratio);
        }
        Command::VerifySp {
            mechanism,
            order,
            mode,
            step,
            count,
            seed,
            instance,
        } => {
            let inst = load_instance(&instance)?;
            let id = parse_mechanism(&mechanism)?;
            let ord = parse_order(&order, inst.profile.n())?;
            let space = build_space(&inst, mode.as_deref(), step.as_deref(), count, seed)?;
            let report = verify::check_strategyproof(id, &ord, inst.kind, &inst.profile, &space)?;
            println!("verdict {}", report.outcome);
            println!("deviations {}", report.deviations_checked);
            if let Some(w) = report.witness {
                println!("witness-agent {}", w.agent + 1);
                println!("witness-truthful {}", w.utility_truthful);
                println!("witness-deviating {}", w.utility_deviating);
                let row: Vec<String> = w
                    .deviation
                    .iter()
                    .map(|(j, v)| format!("{}={}", j + 1, v))
                    .collect();
                println!("witness-row {}", row.join(" "));
            }
        }
        Command::VerifyAcceptable {
            mechanism,
            order,
            instances,
        } => {
            let id = parse_mechanism(&mechanism)?;
            let loaded: Vec<Instance<Rational>> = instances
                .iter()
                .map(|p| load_instance(p))
                .collect::<Result<_, _>>()?;
            let ordering = if order == "identity" {
                None
            } else {
                let n = loaded
                    .first()
                    .map(|i| i.profile.n())
                    .ok_or_else(|| CliError::Validation("no instances given".into()))?;
                Some(parse_order(&order, n)?)
            };
            match verify::check_acceptable(id, ordering.as_ref(), &loaded)? {
                verify::AcceptVerdict::Acceptable { instances_checked } => {
                    println!("acceptable ok");
                    println!("instances {instances_checked}");
                }
                verify::AcceptVerdict::Counterexample(ce) => {
                    println!("acceptable violated");
                    println!("instance {}", ce.label);
                    println!("welfare {}", ce.welfare);
                }
            }
        }
        Command::Repro { only, corpus } => {
            let results = repro::run_all(&corpus, only.as_deref());
            if results.is_empty() {
                return Err(CliError::Validation(format!(
                    "no reproduction check matches `{}`",
                    only.unwrap_or_default()
                )));
            }
            let mut failed = 0usize;
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!("{status} {}: {}", r.id, r.detail);
                if !r.passed {
                    failed += 1;
                }
            }
            if failed > 0 {
                println!("result FAIL ({failed}/{} checks failed)", results.len());
                return Ok(ExitCode::from(5));
            }
            println!("result PASS ({} checks)", results.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn build_instance(family: Family) -> Result<(Instance<Rational>, Option<PathBuf>), CliError> {
    Ok(match family {
        Family::GeneralGap { eps, variant, out } => {
            let eps = parse_rational(&eps, "eps")?;
            (instances::gen_general_gap(&eps, variant)?, out)
        }
        Family::NonnegCycle {
            agents,
            alpha,
            beta,
            out,
        } => {
            let alpha = parse_rational(&alpha, "alpha")?;
            let beta = parse_rational(&beta, "beta")?;
            (instances::gen_nonneg_cycle(agents, &alpha, &beta)?, out)
        }
        Family::DuplexStar {
            agents,
            variant,
            out,
        } => (instances::gen_duplex_star(agents, variant)?, out),
        Family::SimpleCycle7 { variant, out } => (instances::gen_simple_cycle7(variant)?, out),
        Family::FourCycle { out } => (instances::gen_four_cycle(), out),
        Family::Random {
            class,
            agents,
            density,
            seed,
            game,
            out,
        } => {
            if agents == 0 {
                return Err(CliError::Validation("a game needs at least one agent".into()));
            }
            let class: ValuationClass = class.parse().map_err(CliError::Validation)?;
            let kind: GameKind = game.parse().map_err(CliError::Validation)?;
            let density = parse_rational(&density, "density")?;
            (
                instances::gen_random(class, agents, &density, kind, seed)?,
                out,
            )
        }
    })
}

fn emit(inst: &Instance<Rational>, out: Option<&Path>) -> Result<(), CliError> {
    let text = instances::serialize_instance(inst);
    match out {
        Some(path) => {
            fs::write(path, &text).map_err(|e| {
                CliError::Validation(format!("cannot write {}: {e}", path.display()))
            })?;
            println!("label {}", inst.label);
            println!("agents {}", inst.profile.n());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn load_instance(path: &Path) -> Result<Instance<Rational>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    instances::parse_instance(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn parse_mechanism(s: &str) -> Result<MechanismId, CliError> {
    s.parse().map_err(CliError::Validation)
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, CliError> {
    s.parse()
        .map_err(|_| CliError::Validation(format!("invalid rational for {what}: `{s}`")))
}

fn parse_order(spec: &str, n: usize) -> Result<AgentOrdering, CliError> {
    if spec == "identity" {
        return Ok(AgentOrdering::identity(n));
    }
    let mut order = Vec::new();
    for tok in spec.split(',') {
        let agent: usize = tok
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("invalid agent `{tok}` in ordering")))?;
        if agent < 1 || agent > n {
            return Err(CliError::Validation(format!(
                "agent {agent} out of range 1..={n} in ordering"
            )));
        }
        order.push(agent - 1);
    }
    AgentOrdering::new(order).map_err(|e| CliError::Validation(e.to_string()))
}

fn build_space(
    inst: &Instance<Rational>,
    mode: Option<&str>,
    step: Option<&str>,
    count: u64,
    seed: u64,
) -> Result<DeviationSpace<Rational>, CliError> {
    let class = inst.profile.class();
    let n = inst.profile.n();
    let default_mode = match class {
        ValuationClass::Duplex | ValuationClass::Simple => "exhaustive",
        ValuationClass::General | ValuationClass::NonNegative => "grid",
    };
    match mode.unwrap_or(default_mode) {
        "exhaustive" => Ok(DeviationSpace::exhaustive(class, n)?),
        "grid" => {
            let step = match step {
                Some(s) => parse_rational(s, "step")?,
                None => Rational::new(1.into(), 10.into()),
            };
            Ok(DeviationSpace::grid(class, n, step)?)
        }
        "sampled" => Ok(DeviationSpace::sampled(class, n, count, seed)?),
        other => Err(CliError::Validation(format!(
            "unknown deviation mode `{other}` (expected exhaustive, grid or sampled)"
        ))),
    }
}

fn print_partition(p: &Partition) {
    for c in p.coalitions() {
        let members: Vec<String> = c.members().map(|m| (m + 1).to_string()).collect();
        println!("coalition {{{}}}", members.join(","));
    }
}
