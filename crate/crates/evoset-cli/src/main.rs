//! Batch command-line front end: generate benchmark chains, compute
//! profiles, evaluate bounds, simulate evolving-set traces, measure exact
//! mixing, run verification suites, and compare bounds against oracles.
//!
//! Machine-readable output goes to the `--out` files (or stdout); warnings
//! and diagnostics go to stderr. Every command is a pure function of its
//! inputs, flags, and seed. Exit codes: 1 usage, 2 validation or failed
//! verification, 3 state space too large, 4 divergent integral.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use evoset::bench::{self, BenchError};
use evoset::bounds::{self, AnalyticLaw, BoundError, GaugeModel};
use evoset::chain::{read_chain_tsv, write_chain_tsv, ChainError, ChainKernel, StateSet};
use evoset::checks;
use evoset::evolving::{self, EvolveError, TraceMode};
use evoset::mixing::{self, MixError};
use evoset::profiles::{
    self, Gauge, ProfileError, ProfileMethod, StepFunctionProfile, PROFILE_ENUM_MAX,
};

#[derive(Parser)]
#[command(name = "evoset", version, about = "Evolving-set mixing-time toolkit")]
struct Cli {
    /// Worker thread cap (falls back to the EVOSET_THREADS variable).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark chain generators.
    Bench {
        #[command(subcommand)]
        action: BenchCommand,
    },
    /// Compute a conductance-style profile of a chain.
    Profile(ProfileArgs),
    /// Evaluate a mixing-time bound over a profile.
    Bound(BoundArgs),
    /// Sample an evolving-set trajectory.
    Simulate(SimulateArgs),
    /// Measure exact mixing quantities by matrix powering.
    Mix(MixArgs),
    /// Run a verification suite against a chain.
    Verify(VerifyArgs),
    /// Tabulate bounds against exact mixing times for benchmark chains.
    Compare(CompareArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Generate a named benchmark chain (and optional set family).
    Make(MakeArgs),
}

#[derive(Args)]
struct MakeArgs {
    /// One of: cycle, box, percolation, lamplighter, hypercube, clique, expanders.
    name: String,
    /// Side length (box, percolation).
    #[arg(long)]
    side: Option<usize>,
    /// Holes for the box, as `r,c;r,c;...`.
    #[arg(long)]
    holes: Option<String>,
    /// Edge-keeping probability (percolation).
    #[arg(long)]
    p_keep: Option<f64>,
    /// Lamp count (lamplighter).
    #[arg(long)]
    lamps: Option<usize>,
    /// Dimension (hypercube).
    #[arg(long)]
    dim: Option<usize>,
    /// Vertex count (cycle, clique).
    #[arg(long)]
    size: Option<usize>,
    /// Left expander size.
    #[arg(long)]
    n1: Option<usize>,
    /// Right expander size.
    #[arg(long)]
    n2: Option<usize>,
    /// Expander degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Seed for stochastic generators.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Where to write the generator's canonical set family, if it has one.
    #[arg(long)]
    family: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    chain: PathBuf,
    /// phi | psi | theta
    #[arg(long)]
    gauge: String,
    /// enumerate | family | monte-carlo
    #[arg(long, default_value = "enumerate")]
    method: String,
    #[arg(long)]
    family_file: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// hk | hk2 | psith | hki | cont1 | convex
    #[arg(long)]
    theorem: String,
    /// psi | phi (convex variants only)
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    chain: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Registered analytic gauge, e.g. `powerlaw:a=0.3,b=0.5`.
    #[arg(long)]
    analytic: Option<String>,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    gamma: Option<f64>,
    /// Start state (with --chain); sets pi_x.
    #[arg(long)]
    x: Option<usize>,
    /// Target state (with --chain); sets pi_y.
    #[arg(long)]
    y: Option<usize>,
    #[arg(long)]
    pi_x: Option<f64>,
    #[arg(long)]
    pi_y: Option<f64>,
    /// Profile method when deriving from a chain (defaults to best feasible).
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    family_file: Option<PathBuf>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    chain: PathBuf,
    /// Comma-joined state ids of the start set.
    #[arg(long)]
    start: String,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    /// plain | doob-exact | doob-weighted
    #[arg(long, default_value = "plain")]
    mode: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MixArgs {
    #[arg(long)]
    chain: PathBuf,
    /// Comma-separated epsilon list.
    #[arg(long)]
    eps: String,
    /// Start state for the chi-square curve.
    #[arg(long, default_value_t = 0)]
    x: usize,
    #[arg(long, default_value_t = 100_000)]
    n_max: u64,
    /// Measure the continuous-time chain (uniformization) instead.
    #[arg(long)]
    continuous: bool,
    #[arg(long, default_value_t = 100.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.25)]
    resolution: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    chain: PathBuf,
    /// identities | inequalities | bounds
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated benchmark specs, e.g. `c2,c3,box:4,cube:3,clique:8,
    /// lamp:3,perc:16:0.8:1,exp:64:256:4:1`.
    #[arg(long)]
    chains: String,
    /// Comma-separated epsilon list.
    #[arg(long)]
    eps: String,
    /// Seed for stochastic profile fallbacks.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    n_max: u64,
    #[arg(long)]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Validation(String),
    TooLarge(String),
    Unbounded(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::TooLarge(_) => 3,
            CliError::Unbounded(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Validation(m)
            | CliError::TooLarge(m)
            | CliError::Unbounded(m) => m,
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::TooLarge(_) => CliError::TooLarge(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::TooLarge(_) => CliError::TooLarge(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<EvolveError> for CliError {
    fn from(e: EvolveError) -> Self {
        match e {
            EvolveError::TooLarge(_) => CliError::TooLarge(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::UnboundedIntegral(_) => CliError::Unbounded(e.to_string()),
            BoundError::Profile(p) => p.into(),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<MixError> for CliError {
    fn from(e: MixError) -> Self {
        match e {
            MixError::TooLarge(_) => CliError::TooLarge(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Validation(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("EVOSET_THREADS").ok().and_then(|v| v.parse().ok())
    });
    if let Some(threads) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Bench { action: BenchCommand::Make(args) } => cmd_bench_make(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Bound(args) => cmd_bound(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Mix(args) => cmd_mix(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Compare(args) => cmd_compare(args),
    }
}

fn require<T>(value: Option<T>, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag {what}")))
}

fn parse_holes(spec: &str) -> Result<Vec<(usize, usize)>, CliError> {
    spec.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (r, c) = pair
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("bad hole {pair:?}, want r,c")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad hole coordinate {v:?}")))
            };
            Ok((parse(r)?, parse(c)?))
        })
        .collect()
}

fn write_family(path: &Path, family: &[StateSet]) -> Result<(), CliError> {
    let mut out = String::new();
    for set in family {
        let ids: Vec<String> = set.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}", ids.join(","));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn read_family(path: &Path, chain: &ChainKernel) -> Result<Vec<StateSet>, CliError> {
    let text = std::fs::read_to_string(path)?;
    let mut family = Vec::new();
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let members: Result<Vec<usize>, _> =
            trimmed.split(',').map(|v| v.trim().parse::<usize>()).collect();
        let members =
            members.map_err(|_| CliError::Validation(format!("bad family line {trimmed:?}")))?;
        if members.iter().any(|&x| x >= chain.n()) {
            return Err(CliError::Validation(format!("family state out of range in {trimmed:?}")));
        }
        family.push(StateSet::new(chain, members));
    }
    Ok(family)
}

fn cmd_bench_make(args: MakeArgs) -> Result<(), CliError> {
    let (chain, family): (ChainKernel, Vec<StateSet>) = match args.name.as_str() {
        "cycle" => (bench::lazy_cycle(require(args.size, "--size")?)?, Vec::new()),
        "box" => {
            let holes = match &args.holes {
                Some(spec) => parse_holes(spec)?,
                None => Vec::new(),
            };
            let (chain, family) = bench::lazy_box(require(args.side, "--side")?, &holes)?;
            (chain, family)
        }
        "percolation" => (
            bench::percolation_box(
                require(args.side, "--side")?,
                require(args.p_keep, "--p-keep")?,
                require(args.seed, "--seed")?,
            )?,
            Vec::new(),
        ),
        "lamplighter" => {
            eprintln!(
                "note: lamplighter active step is uniform over {{toggle, move left, move right}}"
            );
            (bench::lamplighter_cycle(require(args.lamps, "--lamps")?)?, Vec::new())
        }
        "hypercube" => {
            let (chain, family) = bench::hypercube(require(args.dim, "--dim")?)?;
            (chain, family)
        }
        "clique" => (bench::clique(require(args.size, "--size")?)?, Vec::new()),
        "expanders" => (
            bench::two_expanders(
                require(args.n1, "--n1")?,
                require(args.n2, "--n2")?,
                require(args.degree, "--degree")?,
                require(args.seed, "--seed")?,
            )?,
            Vec::new(),
        ),
        other => return Err(CliError::Usage(format!("unknown benchmark {other:?}"))),
    };
    write_chain_tsv(&chain, &args.out)?;
    if let Some(family_path) = &args.family {
        if family.is_empty() {
            return Err(CliError::Usage(format!(
                "benchmark {:?} has no canonical set family",
                args.name
            )));
        }
        write_family(family_path, &family)?;
    }
    eprintln!("wrote {} states to {}", chain.n(), args.out.display());
    Ok(())
}

fn parse_gauge(name: &str) -> Result<Gauge, CliError> {
    Gauge::parse(name).ok_or_else(|| CliError::Usage(format!("unknown gauge {name:?}")))
}

fn profile_with_method(
    chain: &ChainKernel,
    gauge: Gauge,
    method: Option<&str>,
    family_file: Option<&Path>,
    samples: Option<usize>,
    seed: Option<u64>,
) -> Result<StepFunctionProfile, CliError> {
    let family = match family_file {
        Some(path) => Some(read_family(path, chain)?),
        None => None,
    };
    let method = match method {
        Some("enumerate") => ProfileMethod::Enumerate,
        Some("family") => ProfileMethod::Family(
            family.as_deref().ok_or_else(|| {
                CliError::Usage("--method family requires --family-file".into())
            })?,
        ),
        Some("monte-carlo") => ProfileMethod::MonteCarlo {
            samples: require(samples, "--samples")?,
            seed: require(seed, "--seed")?,
        },
        Some(other) => return Err(CliError::Usage(format!("unknown method {other:?}"))),
        None => {
            // Best feasible: exact enumeration when possible, then a supplied
            // family, then seeded greedy growth.
            if chain.n() <= PROFILE_ENUM_MAX {
                ProfileMethod::Enumerate
            } else if let Some(sets) = family.as_deref() {
                ProfileMethod::Family(sets)
            } else if let (Some(samples), Some(seed)) = (samples, seed) {
                ProfileMethod::MonteCarlo { samples, seed }
            } else {
                return Err(CliError::TooLarge(format!(
                    "{} states exceed exact enumeration ({PROFILE_ENUM_MAX}); supply \
                     --family-file or --samples with --seed",
                    chain.n()
                )));
            }
        }
    };
    Ok(profiles::gauge_profile(chain, gauge, method)?)
}

fn cmd_profile(args: ProfileArgs) -> Result<(), CliError> {
    let chain = read_chain_tsv(&args.chain)?;
    let gauge = parse_gauge(&args.gauge)?;
    let profile = profile_with_method(
        &chain,
        gauge,
        Some(args.method.as_str()),
        args.family_file.as_deref(),
        args.samples,
        args.seed,
    )?;
    profile.write_csv(&args.out)?;
    eprintln!(
        "wrote {} profile ({} breakpoints, provenance {}) to {}",
        profile.gauge().name(),
        profile.points().len(),
        profile.provenance().name(),
        args.out.display()
    );
    Ok(())
}

fn cmd_bound(args: BoundArgs) -> Result<(), CliError> {
    let sources = args.chain.is_some() as u8
        + args.profile.is_some() as u8
        + args.analytic.is_some() as u8;
    if sources != 1 {
        return Err(CliError::Usage(
            "provide exactly one of --chain, --profile, --analytic".into(),
        ));
    }
    let chain = match &args.chain {
        Some(path) => Some(read_chain_tsv(path)?),
        None => None,
    };
    let mass_of = |state: Option<usize>, flag: Option<f64>| -> Result<Option<f64>, CliError> {
        match (state, flag) {
            (Some(x), _) => {
                let chain = chain
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("--x/--y need --chain".into()))?;
                if x >= chain.n() {
                    return Err(CliError::Validation(format!("state {x} out of range")));
                }
                Ok(Some(chain.pi_of(x)))
            }
            (None, Some(v)) => Ok(Some(v)),
            (None, None) => Ok(None),
        }
    };
    let pi_x = mass_of(args.x, args.pi_x)?;
    let pi_y = mass_of(args.y, args.pi_y)?;

    let needed_gauge = match args.theorem.as_str() {
        "psith" => Gauge::Psi,
        "convex" if args.kind.as_deref() == Some("psi") => Gauge::Psi,
        _ => Gauge::Phi,
    };
    let step_profile: Option<StepFunctionProfile> = match (&chain, &args.profile) {
        (Some(chain), _) => Some(profile_with_method(
            chain,
            needed_gauge,
            args.method.as_deref(),
            args.family_file.as_deref(),
            args.samples,
            args.seed,
        )?),
        (None, Some(path)) => Some(StepFunctionProfile::read_csv(path)?),
        (None, None) => None,
    };
    let analytic: Option<AnalyticLaw> = match &args.analytic {
        Some(spec) => Some(AnalyticLaw::parse(spec)?),
        None => None,
    };
    let model = match (&step_profile, analytic) {
        (Some(p), None) => GaugeModel::Step(p),
        (None, Some(law)) => GaugeModel::Analytic(law),
        _ => unreachable!("source multiplicity checked above"),
    };

    let gamma_flag = args.gamma;
    let report = match args.theorem.as_str() {
        "hk" => {
            let p = step_profile
                .as_ref()
                .ok_or_else(|| CliError::Usage("hk needs a step profile".into()))?;
            if let Some(chain) = &chain {
                if chain.gamma() < 0.5 {
                    return Err(CliError::Validation(format!(
                        "chain has holding {} < 1/2; use hk2 with --gamma",
                        chain.gamma()
                    )));
                }
            }
            bounds::tau_uniform_bound(p, args.eps, 0.5, pi_x, pi_y)?
        }
        "hk2" => {
            let p = step_profile
                .as_ref()
                .ok_or_else(|| CliError::Usage("hk2 needs a step profile".into()))?;
            let gamma = require(gamma_flag, "--gamma")?;
            bounds::tau_uniform_bound(p, args.eps, gamma, pi_x, pi_y)?
        }
        "psith" => {
            let p = step_profile
                .as_ref()
                .ok_or_else(|| CliError::Usage("psith needs a step profile".into()))?;
            let pi_x = require(pi_x, "--x or --pi-x")?;
            bounds::chi_square_bound(p, pi_x, args.eps)?
        }
        "hki" => {
            let gamma = require(gamma_flag, "--gamma")?;
            let pi_x = require(pi_x, "--x or --pi-x")?;
            let pi_y = require(pi_y, "--y or --pi-y")?;
            bounds::infinite_bound(model, pi_x, pi_y, args.eps, gamma)?
        }
        "cont1" => {
            let p = step_profile
                .as_ref()
                .ok_or_else(|| CliError::Usage("cont1 needs a step profile".into()))?;
            bounds::continuous_bound(p, pi_x, pi_y, args.eps)?
        }
        "convex" => {
            let kind = match args.kind.as_deref() {
                Some("psi") => bounds::ConvexKind::Psi,
                Some("phi") => bounds::ConvexKind::Phi,
                Some(other) => {
                    return Err(CliError::Usage(format!("unknown convex kind {other:?}")))
                }
                None => return Err(CliError::Usage("convex needs --kind psi|phi".into())),
            };
            let pi_x = require(pi_x, "--x or --pi-x")?;
            bounds::convex_variant_bound(model, pi_x, pi_y, args.eps, gamma_flag, kind)?
        }
        other => return Err(CliError::Usage(format!("unknown theorem {other:?}"))),
    };
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let json = report.to_json();
    match &args.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let chain = read_chain_tsv(&args.chain)?;
    let members: Result<Vec<usize>, _> =
        args.start.split(',').map(|v| v.trim().parse::<usize>()).collect();
    let members =
        members.map_err(|_| CliError::Usage(format!("bad start set {:?}", args.start)))?;
    if members.iter().any(|&x| x >= chain.n()) {
        return Err(CliError::Validation("start state out of range".into()));
    }
    let mode = TraceMode::parse(&args.mode)
        .ok_or_else(|| CliError::Usage(format!("unknown mode {:?}", args.mode)))?;
    let start = StateSet::new(&chain, members);
    let trace = evolving::sample_trace(&chain, &start, args.steps, args.seed, mode)?;
    evolving::write_trace_csv(&trace, &args.out)?;
    Ok(())
}

fn parse_eps_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let eps: Result<Vec<f64>, _> = spec.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let eps = eps.map_err(|_| CliError::Usage(format!("bad epsilon list {spec:?}")))?;
    if eps.is_empty() || eps.iter().any(|&e| e <= 0.0) {
        return Err(CliError::Usage("epsilon values must be positive".into()));
    }
    Ok(eps)
}

fn cmd_mix(args: MixArgs) -> Result<(), CliError> {
    let chain = read_chain_tsv(&args.chain)?;
    let eps = parse_eps_list(&args.eps)?;
    if args.x >= chain.n() {
        return Err(CliError::Validation(format!("state {} out of range", args.x)));
    }
    let json = if args.continuous {
        if args.resolution <= 0.0 {
            return Err(CliError::Usage("--resolution must be positive".into()));
        }
        let report = mixing::continuous_mixing_report(
            &chain,
            args.x,
            &eps,
            args.t_max,
            args.resolution,
        );
        serde_json::to_string_pretty(&report).expect("report serializes")
    } else {
        let report = mixing::mixing_report(&chain, args.x, &eps, args.n_max);
        serde_json::to_string_pretty(&report).expect("report serializes")
    };
    std::fs::write(&args.out, json + "\n")?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), CliError> {
    let chain = read_chain_tsv(&args.chain)?;
    let rows = match args.suite.as_str() {
        "identities" => checks::identity_suite(&chain, args.seed),
        "inequalities" => checks::inequality_suite(&chain, args.seed),
        "bounds" => {
            if chain.n() > PROFILE_ENUM_MAX {
                return Err(CliError::TooLarge(format!(
                    "bound soundness needs exact profiles (<= {PROFILE_ENUM_MAX} states)"
                )));
            }
            checks::bound_suite(&chain, &[0.5, 0.25, 0.125])
        }
        other => return Err(CliError::Usage(format!("unknown suite {other:?}"))),
    };
    let mut out = String::from("check,max_violation,tolerance,pass\n");
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.name,
            evoset::fmt_g17(r.max_violation),
            evoset::fmt_g17(r.tolerance),
            r.pass
        );
    }
    std::fs::write(&args.out, out)?;
    if checks::all_pass(&rows) {
        Ok(())
    } else {
        let failed: Vec<&str> =
            rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        Err(CliError::Validation(format!("checks failed: {}", failed.join(", "))))
    }
}

struct BenchSpec {
    label: String,
    chain: ChainKernel,
    family: Vec<StateSet>,
}

fn parse_bench_spec(spec: &str) -> Result<BenchSpec, CliError> {
    let fields: Vec<&str> = spec.split(':').collect();
    let parse_usize = |v: &str| {
        v.parse::<usize>().map_err(|_| CliError::Usage(format!("bad number {v:?} in {spec:?}")))
    };
    let parse_f64 = |v: &str| {
        v.parse::<f64>().map_err(|_| CliError::Usage(format!("bad number {v:?} in {spec:?}")))
    };
    let parse_seed = |v: &str| {
        v.parse::<u64>().map_err(|_| CliError::Usage(format!("bad seed {v:?} in {spec:?}")))
    };
    let (chain, family) = match fields.as_slice() {
        ["c2"] => (bench::lazy_cycle(2)?, Vec::new()),
        ["c3"] => (bench::lazy_cycle(3)?, Vec::new()),
        ["cycle", n] => (bench::lazy_cycle(parse_usize(n)?)?, Vec::new()),
        ["box", n] => {
            let (c, f) = bench::lazy_box(parse_usize(n)?, &[])?;
            (c, f)
        }
        ["cube", n] => {
            let (c, f) = bench::hypercube(parse_usize(n)?)?;
            (c, f)
        }
        ["clique", n] => (bench::clique(parse_usize(n)?)?, Vec::new()),
        ["lamp", n] => (bench::lamplighter_cycle(parse_usize(n)?)?, Vec::new()),
        ["perc", n, p, s] => {
            (bench::percolation_box(parse_usize(n)?, parse_f64(p)?, parse_seed(s)?)?, Vec::new())
        }
        ["exp", n1, n2, d, s] => (
            bench::two_expanders(
                parse_usize(n1)?,
                parse_usize(n2)?,
                parse_usize(d)?,
                parse_seed(s)?,
            )?,
            Vec::new(),
        ),
        _ => return Err(CliError::Usage(format!("unknown benchmark spec {spec:?}"))),
    };
    Ok(BenchSpec { label: spec.to_string(), chain, family })
}

fn compare_profile(
    spec: &BenchSpec,
    gauge: Gauge,
    seed: Option<u64>,
) -> Result<StepFunctionProfile, CliError> {
    if spec.chain.n() <= PROFILE_ENUM_MAX {
        return Ok(profiles::gauge_profile(&spec.chain, gauge, ProfileMethod::Enumerate)?);
    }
    if !spec.family.is_empty() {
        eprintln!(
            "note: {} exceeds exact enumeration; using the generator's set family (upper estimate)",
            spec.label
        );
        return Ok(profiles::gauge_profile(
            &spec.chain,
            gauge,
            ProfileMethod::Family(&spec.family),
        )?);
    }
    let seed = seed.ok_or_else(|| {
        CliError::Usage(format!(
            "{} needs --seed for the greedy-growth profile fallback",
            spec.label
        ))
    })?;
    eprintln!(
        "note: {} exceeds exact enumeration; using greedy growth (upper estimate)",
        spec.label
    );
    Ok(profiles::gauge_profile(
        &spec.chain,
        gauge,
        ProfileMethod::MonteCarlo { samples: 64, seed },
    )?)
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let eps_list = parse_eps_list(&args.eps)?;
    let specs: Vec<&str> =
        args.chains.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if specs.is_empty() {
        return Err(CliError::Usage("empty benchmark list".into()));
    }
    let mut out = String::from(
        "chain,eps,bound_hk,bound_psith,bound_cont,tau_exact,tau_tv_exact,gap,psi_star,h2plus\n",
    );
    for spec_str in specs {
        let spec = parse_bench_spec(spec_str)?;
        let phi = compare_profile(&spec, Gauge::Phi, args.seed)?;
        let psi = compare_profile(&spec, Gauge::Psi, args.seed)?;
        let theta = compare_profile(&spec, Gauge::Theta, args.seed)?;
        let report = mixing::mixing_report(&spec.chain, 0, &eps_list, args.n_max);
        let gap = mixing::spectral_gap(&spec.chain).ok();
        let gamma = spec.chain.gamma().min(0.5);
        if gamma <= 0.0 {
            return Err(CliError::Validation(format!(
                "{spec_str}: bounds need positive holding probability"
            )));
        }
        for &eps in &eps_list {
            let hk = bounds::tau_uniform_bound(&phi, eps, gamma, None, None)?;
            // Worst start for the chi-square bound: the smallest mass.
            let psith = bounds::chi_square_bound(&psi, spec.chain.pi_star(), eps)?;
            let cont = bounds::continuous_bound(&phi, None, None, eps)?;
            let key = format!("{eps}");
            let fmt_tau = |t: &Option<u64>| t.map_or(String::new(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                spec.label,
                key,
                hk.bound.as_f64() as u64,
                psith.bound.as_f64() as u64,
                evoset::fmt_g17(cont.bound.as_f64()),
                fmt_tau(&report.tau[&key]),
                fmt_tau(&report.tau_tv[&key]),
                gap.map_or(String::new(), evoset::fmt_g17),
                evoset::fmt_g17(psi.star()),
                evoset::fmt_g17(theta.star()),
            );
        }
    }
    std::fs::write(&args.out, out)?;
    Ok(())
}
