//! `biharm` — runs the exact Case I / Case II pipelines, replays recorded
//! traces and runs the numeric lab.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | every certificate verified, verdicts minimal-only, numeric suite passed |
//! | 1 | I/O failure (reading a config or trace, writing an output) |
//! | 2 | configuration or usage error |
//! | 3 | derivation mismatch: a certificate step failed or a case did not close |
//! | 4 | elimination collapse: a resultant vanished identically |
//! | 5 | numeric suite failure |
//! | 6 | replay mismatch |
//! | 7 | trace schema error |

mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biharm_core::certificate::{TraceBundle, TraceError};
use biharm_core::elimination::ElimError;
use biharm_core::ode::{draw_case1_on_manifold, sample_rng, IntegrateConfig};
use biharm_core::pipeline::{replay, run_case, run_numeric, CaseRun, NumericConfig, PipelineError};
use biharm_core::CaseTag;
use clap::{Args, Parser, Subcommand};

use config::{positive_flag, CaseSel, ConfigError, FileConfig, Format};
use report::Report;

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "BIHARM_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "biharm", version, about = "Exact verifier and numeric falsifier for biharmonic Lorentzian hypersurfaces with non-diagonalizable shape operator")]
struct Cli {
    /// Flat key=value config file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    numeric: NumericFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct NumericFlags {
    /// Number of seeded trajectories / falsification samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Seed of the sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Integration step.
    #[arg(long, global = true)]
    step: Option<f64>,
    /// Integration horizon.
    #[arg(long = "t-max", global = true)]
    t_max: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive, eliminate and conclude for the selected case(s).
    Verify {
        /// `case1`, `case2` or `both` (same as `--case`).
        #[arg(value_enum)]
        which: Option<CaseSel>,
        #[arg(long = "case", value_enum)]
        case: Option<CaseSel>,
        /// Write the certificate trace; without a path it goes to
        /// `<out-dir>/trace.json`.
        #[arg(long = "emit-trace", value_name = "PATH", num_args = 0..=1)]
        emit_trace: Option<Option<PathBuf>>,
        /// Also run the numeric suite.
        #[arg(long)]
        numeric: bool,
    },
    /// Re-execute a recorded trace and compare every step.
    Replay {
        trace: PathBuf,
    },
    /// Run the numeric suite for the selected case(s).
    Ode {
        #[arg(value_enum)]
        which: Option<CaseSel>,
        #[arg(long = "case", value_enum)]
        case: Option<CaseSel>,
        /// Write one sample trajectory per case as CSV into this directory
        /// (default `<out-dir>`).
        #[arg(long, value_name = "DIR", num_args = 0..=1)]
        csv: Option<Option<PathBuf>>,
    },
}

/// A terminating failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = match &e {
            PipelineError::Elimination(ElimError::EliminationCollapse { .. }) => 4,
            PipelineError::Derivation(_) | PipelineError::Elimination(_) => 3,
            PipelineError::Numeric(_) => 5,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, message: format!("{}: {e}", path.display()) }
}

struct Settings {
    file: FileConfig,
    format: Format,
    numeric: NumericConfig,
    out_dir: PathBuf,
}

fn settings(cli: &Cli) -> Result<Settings, Failure> {
    let file = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_failure(p, e))?;
            FileConfig::parse(&text, &p.display().to_string())?
        }
        None => FileConfig::default(),
    };
    let mut numeric = file.numeric_config();
    let flags = &cli.numeric;
    if let Some(s) = flags.samples {
        if s == 0 {
            return Err(positive_flag("samples", 0.0).unwrap_err().into());
        }
        numeric.samples = s;
    }
    if let Some(s) = flags.seed {
        numeric.seed = s;
    }
    if let Some(s) = flags.step {
        numeric.step = positive_flag("step", s)?;
    }
    if let Some(t) = flags.t_max {
        numeric.t_max = positive_flag("t-max", t)?;
    }
    let out_dir = file
        .out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Settings { format: cli.format.or(file.format).unwrap_or(Format::Text), file, numeric, out_dir })
}

fn cases_of(sel: CaseSel) -> Vec<CaseTag> {
    match sel {
        CaseSel::Case1 => vec![CaseTag::CaseI],
        CaseSel::Case2 => vec![CaseTag::CaseII],
        CaseSel::Both => vec![CaseTag::CaseI, CaseTag::CaseII],
    }
}

/// Run the selected pipelines concurrently; results come back in case order.
fn run_cases(cases: &[CaseTag]) -> Vec<Result<CaseRun, PipelineError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = cases.iter().map(|&c| s.spawn(move || run_case(c))).collect();
        handles.into_iter().map(|h| h.join().expect("pipeline thread panicked")).collect()
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| io_failure(path, e))
}

fn verify(
    set: &Settings,
    sel: CaseSel,
    emit: Option<Option<PathBuf>>,
    numeric: bool,
    report: &mut Report,
) -> Result<(), Failure> {
    let mut runs = Vec::new();
    let mut first_err = None;
    for r in run_cases(&cases_of(sel)) {
        match r {
            Ok(run) => {
                report.cases.push(run.report.clone());
                runs.push(run);
            }
            Err(e) => {
                let f = Failure::from(e);
                report.errors.push(f.message.clone());
                first_err.get_or_insert(f);
            }
        }
    }
    let emit = emit.map(|p| p.unwrap_or_else(|| set.out_dir.join("trace.json"))).or_else(|| set.file.emit_trace.clone());
    if let Some(path) = emit {
        let bundle = TraceBundle::new(runs.iter().flat_map(|r| r.certificates.clone()).collect());
        write_file(&path, &bundle.to_json())?;
        report.trace = Some(path.display().to_string());
    }
    if let Some(f) = first_err {
        return Err(f);
    }
    if let Some(bad) = runs.iter().find(|r| !r.report.minimal_only()) {
        return Err(Failure {
            code: 3,
            message: format!("{} did not close: {:?}", bad.report.case, bad.report.failed_steps),
        });
    }
    if numeric || set.file.numeric.unwrap_or(false) {
        numeric_suite(set, &runs, report)?;
    }
    Ok(())
}

fn numeric_suite(set: &Settings, runs: &[CaseRun], report: &mut Report) -> Result<(), Failure> {
    report.numeric_config = Some(set.numeric.clone());
    for run in runs {
        let s = run_numeric(run, &set.numeric)?;
        let passed = s.passed;
        report.numeric.push(s);
        if !passed {
            return Err(Failure { code: 5, message: format!("numeric suite failed for {}", run.report.case) });
        }
    }
    Ok(())
}

fn ode(set: &Settings, sel: CaseSel, csv: Option<Option<PathBuf>>, report: &mut Report) -> Result<(), Failure> {
    let mut runs = Vec::new();
    for r in run_cases(&cases_of(sel)) {
        runs.push(r?);
    }
    let csv_dir = csv.map(|d| d.unwrap_or_else(|| set.out_dir.clone()));
    if let Some(dir) = &csv_dir {
        let cfg = IntegrateConfig { t_max: set.numeric.t_max, step: set.numeric.step, ..IntegrateConfig::default() };
        for run in &runs {
            let lab = run.lab().map_err(PipelineError::from)?;
            let x0 = match run.flow.case {
                CaseTag::CaseI => draw_case1_on_manifold(&lab, &mut sample_rng(set.numeric.seed, 0), set.numeric.box_half_width)
                    .ok_or_else(|| Failure { code: 5, message: "no admissible Case I sample".into() })?,
                CaseTag::CaseII => vec![0.1, 1.0],
            };
            let traj = lab.integrate(&x0, &cfg).map_err(PipelineError::from)?;
            let path = dir.join(format!("trajectory-{}.csv", run.report.case));
            write_file(&path, &traj.to_csv())?;
            report.outputs.push(path.display().to_string());
        }
    }
    numeric_suite(set, &runs, report)
}

fn replay_trace(path: &Path, report: &mut Report) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let bundle = TraceBundle::from_json(&text).map_err(|e: TraceError| Failure { code: 7, message: e.to_string() })?;
    let out = replay(&bundle)?;
    let ok = out.ok();
    let first = out.mismatches.first().map(|m| format!("step mismatch at {}/{} ({})", m.certificate, m.step, m.field));
    let closed = out.verdicts.values().all(|v| v == biharm_core::pipeline::MINIMAL_ONLY);
    report.replay = Some(out);
    if !ok {
        return Err(Failure { code: 6, message: first.unwrap_or_default() });
    }
    if !closed {
        return Err(Failure { code: 3, message: "replayed verdicts are not minimal-only".into() });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    let mut report = Report::new(&command);
    let format = cli.format.unwrap_or(Format::Text);
    let result = settings(&cli).and_then(|set| {
        let sel = |which: Option<CaseSel>, case: Option<CaseSel>| which.or(case).or(set.file.case).unwrap_or(CaseSel::Both);
        let out = match cli.command {
            Command::Verify { which, case, emit_trace, numeric } => {
                verify(&set, sel(which, case), emit_trace, numeric, &mut report)
            }
            Command::Replay { ref trace } => replay_trace(trace, &mut report),
            Command::Ode { which, case, csv } => ode(&set, sel(which, case), csv, &mut report),
        };
        Ok((set.format, out))
    });
    let (format, outcome) = match result {
        Ok((f, o)) => (f, o),
        Err(f) => (format, Err(f)),
    };
    let code = match outcome {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("biharm: {}", f.message);
            if !report.errors.contains(&f.message) {
                report.errors.push(f.message);
            }
            f.code
        }
    };
    report.exit_code = code as i32;
    match format {
        Format::Json => println!("{}", report.to_json()),
        Format::Text => print!("{}", report.render_text()),
    }
    ExitCode::from(code)
}
