//! Batch interface: analyze specs and counts, regenerate sweeps, run the
//! randomized property suites and the general-system counterexamples.

mod error;
mod input;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use contextuality::general::{
    cyclic_subsystems, find_aligned_pair, is_contextual_general, star_scan, subsystem_is_contextual,
    tripartite_system, AlignedPair, Axis, StarPoint, StarSampling,
};
use contextuality::lemmas::{run_suites, Suite};
use contextuality::lp::SolverOptions;
use contextuality::sampling::stream_rng;
use contextuality::sweep::{sweep_diagonal, MarginalMode, DEFAULT_STEPS};
use contextuality::{Error, Units};

use error::{CliError, CliResult};
use input::{parse_counts, parse_spec, SystemSpec};
use report::{cyclic_report, general_report, Provenance};

/// Star scans smaller than this rarely contain an aligned pair.
const MIN_SCAN_SAMPLES: usize = 50;
/// Two scan samples share a measure when they differ by at most this.
const ALIGN_TOL: f64 = 1e-6;
/// ... and differ in the other by more than this.
const ALIGN_GAP: f64 = 1e-3;
const LATTICE_RESOLUTION: u32 = 8;

#[derive(Parser)]
#[command(name = "cyclic-cnt", version, about = "Contextuality measures for cyclic and general systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    /// Expectation (±1) units.
    E,
    /// Probability units.
    P,
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::E => Units::ExpectationSpace,
            UnitsArg::P => Units::ProbabilitySpace,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LpMode {
    Float,
    Exact,
}

impl LpMode {
    fn options(self) -> SolverOptions {
        match self {
            LpMode::Float => SolverOptions::default(),
            LpMode::Exact => SolverOptions::exact(),
        }
    }
}

#[derive(clap::Args)]
struct ReportArgs {
    #[arg(long, value_enum, default_value = "e")]
    units: UnitsArg,
    #[arg(long, value_enum, default_value = "float")]
    lp: LpMode,
    /// Recorded in the report; the analysis itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form measures of a TOML system spec, checked against the LP oracle.
    Analyze {
        path: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Estimate a cyclic system from a trial-count CSV and analyze it.
    Ingest {
        path: PathBuf,
        #[command(flatten)]
        report: ReportArgs,
    },
    /// Signed measure along the diagonal of the bunch box, as CSV.
    Sweep {
        #[arg(long)]
        rank: usize,
        #[arg(long, value_parser = parse_mode)]
        mode: MarginalMode,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized property suites for the polytope lemmas.
    Lemmas {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = contextuality::lemmas::DEFAULT_DRAWS)]
        draws: usize,
        /// Invert every verdict of one suite (to check that failures surface).
        #[arg(long, hide = true, value_parser = parse_suite)]
        corrupt: Option<Suite>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The tripartite system and the star-system scan.
    Counterexamples {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Write the scan as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<MarginalMode, String> {
    s.parse().map_err(|_| format!("unknown mode `{s}` (consistent or inconsistent)"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| format!("unknown suite `{s}`"))
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn utf8(bytes: &[u8]) -> CliResult<&str> {
    std::str::from_utf8(bytes).map_err(|e| CliError::Parse(format!("input is not UTF-8: {e}")))
}

fn analyze(path: &Path, args: &ReportArgs) -> CliResult<()> {
    let bytes = read(path)?;
    let spec = parse_spec(utf8(&bytes)?)?;
    let options = args.lp.options();
    let provenance = Provenance::new(&bytes, args.seed, &options);
    let text = match spec.system {
        SystemSpec::Cyclic(system) => {
            let v = system.validate()?;
            json(&cyclic_report(&v, spec.label, args.units.into(), &options, provenance)?)
        }
        SystemSpec::General(system) => json(&general_report(&system, spec.label, args.units.into(), &options, provenance)?),
    };
    emit(&text, args.out.as_deref())
}

fn ingest(path: &Path, args: &ReportArgs) -> CliResult<()> {
    let bytes = read(path)?;
    let counts = parse_counts(utf8(&bytes)?)?;
    let v = counts.estimate()?.validate()?;
    let options = args.lp.options();
    let provenance = Provenance::new(&bytes, args.seed, &options);
    let label = path.file_name().map(|n| n.to_string_lossy().into_owned());
    emit(&json(&cyclic_report(&v, label, args.units.into(), &options, provenance)?), args.out.as_deref())
}

fn lemmas(seed: u64, draws: usize, corrupt: Option<Suite>, out: Option<&Path>) -> CliResult<()> {
    let summary = run_suites(seed, draws, corrupt)?;
    emit(&json(&summary), out)?;
    if summary.all_passed() {
        Ok(())
    } else {
        let failing: Vec<&str> = summary.suites.iter().filter(|s| s.failed > 0).map(|s| s.suite.name()).collect();
        Err(CliError::Property(format!("{} failures in {}", summary.failed(), failing.join(", "))))
    }
}

#[derive(Serialize)]
struct Tripartite {
    contextual: bool,
    cyclic_subsystems: usize,
    contextual_cyclic_subsystems: usize,
}

#[derive(Serialize)]
struct CounterexampleSummary {
    seed: u64,
    samples: usize,
    summary: String,
    tripartite: Tripartite,
    contextual_samples: usize,
    equal_cnt1_pair: Option<AlignedPair>,
    equal_cnt2_pair: Option<AlignedPair>,
}

fn scan_csv(points: &[StarPoint]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "contextual", "cnt1", "cnt2"]).map_err(|e| CliError::Io(e.to_string()))?;
    for p in points {
        w.write_record([
            p.index.to_string(),
            p.contextual.to_string(),
            format!("{:.12}", p.cnt1),
            format!("{:.12}", p.cnt2),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii"))
}

fn counterexamples(seed: u64, samples: usize, csv_out: Option<&Path>, out: Option<&Path>) -> CliResult<()> {
    if samples < MIN_SCAN_SAMPLES {
        return Err(Error::SamplesTooFew { got: samples, min: MIN_SCAN_SAMPLES }.into());
    }
    let tri = tripartite_system();
    let contextual = is_contextual_general(&tri)?;
    let subs = cyclic_subsystems(&tri);
    let contextual_subs = subs.iter().filter(|s| subsystem_is_contextual(s)).count();

    let mut rng = stream_rng(seed, 0);
    let points = star_scan(samples, StarSampling::Lattice { resolution: LATTICE_RESOLUTION }, &mut rng)?;
    if let Some(path) = csv_out {
        emit(&scan_csv(&points)?, Some(path))?;
    }
    let summary = CounterexampleSummary {
        seed,
        samples,
        summary: format!(
            "contextual: {}; cyclic subsystems contextual: {contextual_subs}/{}",
            if contextual { "yes" } else { "no" },
            subs.len()
        ),
        tripartite: Tripartite {
            contextual,
            cyclic_subsystems: subs.len(),
            contextual_cyclic_subsystems: contextual_subs,
        },
        contextual_samples: points.iter().filter(|p| p.contextual).count(),
        equal_cnt1_pair: find_aligned_pair(&points, Axis::Cnt1, ALIGN_TOL, ALIGN_GAP),
        equal_cnt2_pair: find_aligned_pair(&points, Axis::Cnt2, ALIGN_TOL, ALIGN_GAP),
    };
    emit(&json(&summary), out)?;
    if !contextual || contextual_subs > 0 {
        return Err(CliError::Property(summary.summary));
    }
    if summary.equal_cnt1_pair.is_none() || summary.equal_cnt2_pair.is_none() {
        return Err(CliError::Property(
            "star scan found no pair equal in one measure and different in the other".into(),
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze { path, report } => analyze(&path, &report),
        Command::Ingest { path, report } => ingest(&path, &report),
        Command::Sweep { rank, mode, steps, out } => emit(&sweep_diagonal(rank, mode, steps)?.to_csv_string(), out.as_deref()),
        Command::Lemmas { seed, draws, corrupt, out } => lemmas(seed, draws, corrupt, out.as_deref()),
        Command::Counterexamples { seed, samples, csv, out } => {
            counterexamples(seed, samples, csv.as_deref(), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cyclic-cnt: {e}");
            e.exit_code()
        }
    }
}
