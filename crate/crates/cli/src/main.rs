//! `dss`: construct, verify and use difference systems of sets.
//!
//! Exit codes: 0 success, 1 validation or decoding failure, 2 usage error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use dss_sync::channel::{self, NoiseSpec};
use dss_sync::codec::{SyncCode, SyncCodeConfig};
use dss_sync::constructor::{self, ConstructError, ConstructionConfig, Redundancy};
use dss_sync::dss::{self, Dss, ProfileMethod};
use dss_sync::pds::{self, Pds, PdsJson};
use dss_sync::shuffle::{sample_trace, Seed};
use dss_sync::{codec, text, Symbol};

#[derive(Parser, Debug)]
#[command(name = "dss", version, about = "Difference systems of sets for frame synchronization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a DSS with the randomized shuffle construction
    Construct(ConstructArgs),
    /// Compute the exact index of a DSS and report its parameters
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Evaluate the Levenshtein redundancy bound
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        rho: u64,
    },
    /// Print the template sequence of a DSS
    Template {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Encode one payload into a self-synchronizing frame
    Encode {
        /// Code configuration JSON
        #[arg(long)]
        code: PathBuf,
        /// Payload in sequence text format
        #[arg(long)]
        payload: String,
    },
    /// Pass a sequence through a seeded substitution channel
    Corrupt(CorruptArgs),
    /// Align and decode a received window
    Decode {
        #[arg(long)]
        code: PathBuf,
        /// Window file, or `-` for stdin
        #[arg(long, default_value = "-")]
        window: String,
    },
    /// Phase detection sequences
    Pds {
        #[command(subcommand)]
        command: PdsCommand,
    },
    /// Monte-Carlo statistics of the constructed index
    Stats(StatsArgs),
}

#[derive(clap::Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: usize,
    /// Marker fraction; redundancy is floor(n p)
    #[arg(long, conflicts_with = "r", required_unless_present = "r")]
    p: Option<f64>,
    /// Redundancy given directly
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    target_index: Option<u64>,
    #[arg(long, default_value_t = constructor::DEFAULT_MAX_ATTEMPTS)]
    max_attempts: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the shuffle trace of the returned attempt as a JSON array
    #[arg(long)]
    dump_trace: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum NoiseModeArg {
    Iid,
    Exact,
}

#[derive(clap::Args, Debug)]
struct CorruptArgs {
    #[arg(long, value_enum)]
    mode: NoiseModeArg,
    #[arg(long, required_if_eq("mode", "iid"))]
    rate: Option<f64>,
    #[arg(long, required_if_eq("mode", "exact"))]
    budget: Option<usize>,
    /// Window length for the exact mode
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value_t = 2)]
    q: usize,
    #[arg(long)]
    seed: u64,
    /// Input file (stdin when absent)
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Also write the substituted positions as JSON to this file
    #[arg(long)]
    positions: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum PdsCommand {
    /// Generate a PDS from a code configuration
    Gen {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        frames: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the phase from one window
    Locate {
        #[arg(long)]
        pds: PathBuf,
        #[arg(long, default_value = "-")]
        window: String,
    },
    /// Brute-force minimum window distance
    Verify {
        #[arg(long)]
        pds: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    /// Per-trial CSV output
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    Auto,
    Naive,
    Fast,
}

impl From<Method> for ProfileMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => ProfileMethod::Auto,
            Method::Naive => ProfileMethod::Naive,
            Method::Fast => ProfileMethod::Fast,
        }
    }
}

/// A failure that maps to exit code 1.
#[derive(Debug)]
struct Failure(anyhow::Error);

type CmdResult = Result<(), Failure>;

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.into())
    }
}

fn read_source(source: &str) -> anyhow::Result<String> {
    if source == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf).context("reading stdin")?;
        Ok(buf)
    } else {
        read_file(Path::new(source))
    }
}

fn read_file(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, content).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn load_dss(path: &Path) -> anyhow::Result<Dss> {
    Dss::from_json(&read_file(path)?).with_context(|| format!("parsing DSS from {}", path.display()))
}

fn load_code(path: &Path) -> anyhow::Result<SyncCode> {
    let config: SyncCodeConfig = serde_json::from_str(&read_file(path)?)
        .with_context(|| format!("parsing code configuration from {}", path.display()))?;
    Ok(SyncCode::from_config(&config)?)
}

fn construct(args: &ConstructArgs) -> CmdResult {
    let redundancy = match (args.p, args.r) {
        (Some(p), _) => Redundancy::Fraction(p),
        (None, Some(r)) => Redundancy::Count(r),
        (None, None) => unreachable!("clap requires one of --p / --r"),
    };
    let config = ConstructionConfig {
        n: args.n,
        q: args.q,
        redundancy,
        target_index: args.target_index,
        max_attempts: args.max_attempts,
        seed: Seed::new(args.seed),
        method: args.method.into(),
    };
    let (outcome, failure) = match constructor::construct_with_target(&config) {
        Ok(outcome) => (outcome, None),
        Err(ConstructError::TargetUnreached { best, target, attempts, .. }) => {
            let msg = anyhow!(
                "target index {target} not reached in {attempts} attempts; best index {} written",
                best.achieved_index
            );
            (*best, Some(msg))
        }
        Err(other) => return Err(other.into()),
    };
    log::info!(
        "index {} after {} attempt(s); expected {:.3}",
        outcome.achieved_index,
        outcome.attempts_used,
        outcome.expectation
    );
    emit(args.out.as_deref(), &format!("{}\n", outcome.dss.to_json()))?;
    if let Some(path) = &args.dump_trace {
        let trace = sample_trace(args.n, outcome.trace_seed);
        emit(Some(path), &format!("{}\n", serde_json::to_string(&trace)?))?;
    }
    match failure {
        Some(err) => Err(Failure(err)),
        None => Ok(()),
    }
}

fn verify(input: &Path, method: Method) -> CmdResult {
    let dss = load_dss(input)?;
    let report = dss::report_with(&dss, method.into());
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    Ok(())
}

fn bound(n: usize, q: usize, rho: u64) -> CmdResult {
    let value = dss::levenshtein_bound(n, q, rho)?;
    emit(None, &format!("{value:?}\n"))?;
    Ok(())
}

fn template(input: &Path) -> CmdResult {
    let dss = load_dss(input)?;
    emit(None, &format!("{}\n", codec::template_from_dss(&dss)))?;
    Ok(())
}

fn encode(code: &Path, payload: &str) -> CmdResult {
    let code = load_code(code)?;
    let payload = text::parse_symbols(payload, code.q())?;
    let frame = code.encode(&payload)?;
    emit(None, &format!("{}\n", text::format_symbols(&frame, code.q())))?;
    Ok(())
}

fn corrupt(args: &CorruptArgs) -> CmdResult {
    let raw = match &args.input {
        Some(path) => read_file(path)?,
        None => read_source("-")?,
    };
    let stream = text::parse_symbols(&raw, args.q)?;
    let seed = Seed::new(args.seed);
    let spec = match args.mode {
        NoiseModeArg::Iid => NoiseSpec::iid(args.rate.expect("required by clap"), seed),
        NoiseModeArg::Exact => {
            let window = args
                .window
                .ok_or_else(|| anyhow!("--window is required in exact mode"))?;
            NoiseSpec::exact(args.budget.expect("required by clap"), window, seed)
        }
    };
    let out = channel::corrupt(&stream, args.q, &spec)?;
    if let Some(path) = &args.positions {
        emit(Some(path), &format!("{}\n", serde_json::to_string(&out.error_positions)?))?;
    }
    emit(None, &format!("{}\n", text::format_symbols(&out.symbols, args.q)))?;
    Ok(())
}

fn decode(code: &Path, window: &str) -> CmdResult {
    let code = load_code(code)?;
    let window: Vec<Symbol> = text::parse_symbols(&read_source(window)?, code.q())?;
    let alignment = code.locate_frame(&window)?;
    let frame = &window[alignment.offset..alignment.offset + code.n()];
    let decoded = code.decode_payload(frame);
    let (payload, corrections) = match &decoded {
        Ok(d) => (Some(text::format_symbols(&d.payload, code.q())), Some(d.corrections)),
        Err(_) => (None, None),
    };
    let report = serde_json::json!({
        "offset": alignment.offset,
        "marker_mismatches": alignment.marker_mismatches,
        "confident": alignment.confident,
        "payload": payload,
        "corrections": corrections,
    });
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
    decoded?;
    if !alignment.confident {
        return Err(anyhow!(
            "alignment not confident: {} marker mismatches",
            alignment.marker_mismatches
        )
        .into());
    }
    Ok(())
}

fn load_pds(path: &Path) -> anyhow::Result<Pds> {
    let json: PdsJson = serde_json::from_str(&read_file(path)?)
        .with_context(|| format!("parsing PDS from {}", path.display()))?;
    Ok(Pds::from_json(&json)?)
}

fn pds_command(command: &PdsCommand) -> CmdResult {
    match command {
        PdsCommand::Gen { code, frames, out } => {
            let code = load_code(code)?;
            let built = pds::build_pds(&code, *frames)?;
            emit(out.as_deref(), &format!("{}\n", serde_json::to_string(&built.to_json()?)?))?;
        }
        PdsCommand::Locate { pds: path, window } => {
            let built = load_pds(path)?;
            let window = text::parse_symbols(&read_source(window)?, built.code().q())?;
            let estimate = pds::locate_phase(&built, &window)?;
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&estimate)?))?;
        }
        PdsCommand::Verify { pds: path } => {
            let built = load_pds(path)?;
            let distance = pds::verify_pds_bruteforce(&built)?;
            let report = serde_json::json!({
                "length": built.len(),
                "window_size": built.window_size(),
                "min_distance": distance,
                "claimed_min_distance": built.claimed_min_distance(),
            });
            emit(None, &format!("{}\n", serde_json::to_string_pretty(&report)?))?;
            if distance < built.claimed_min_distance() {
                return Err(anyhow!("minimum distance {distance} below the claimed bound").into());
            }
        }
    }
    Ok(())
}

fn stats(args: &StatsArgs) -> CmdResult {
    let result = constructor::min_index_statistics(args.n, args.q, args.p, args.trials, Seed::new(args.seed))?;
    if let Some(path) = &args.csv {
        emit(Some(path), &result.to_csv())?;
    }
    let summary = serde_json::json!({
        "n": result.n,
        "q": result.q,
        "r": result.r,
        "p": result.p,
        "trials": result.trials,
        "min": result.min,
        "median": result.median,
        "mean": result.mean,
        "expectation": result.expectation,
        "scale": result.scale,
        "min_ratio": result.min_ratio,
        "median_ratio": result.median_ratio,
        "mean_ratio": result.mean_ratio,
        "mean_shift_one": result.mean_shift_one,
        "shift_one_std_error": result.shift_one_std_error,
        "histogram": result.histogram,
    });
    emit(None, &format!("{}\n", serde_json::to_string_pretty(&summary)?))?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match &cli.command {
        Command::Construct(args) => construct(args),
        Command::Verify { input, method } => verify(input, *method),
        Command::Bound { n, q, rho } => bound(*n, *q, *rho),
        Command::Template { input } => template(input),
        Command::Encode { code, payload } => encode(code, payload),
        Command::Corrupt(args) => corrupt(args),
        Command::Decode { code, window } => decode(code, window),
        Command::Pds { command } => pds_command(command),
        Command::Stats(args) => stats(args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
