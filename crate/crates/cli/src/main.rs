//! `dsr`: restoration planning from the command line.
//!
//! Exit codes: 0 on success, 1 when verification finds violations, 2 on
//! input errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use restoration::formulation::{build_integrated, Instance, StageState};
use restoration::planner::{compare, replay, run, Algorithm};
use restoration::tooling::{
    comparison_report, emit_case, emit_plan, gen_feeder123, gen_feeder33, parse_case, parse_plan,
    search_ordering_seed, Case, DamageProfile,
};

#[derive(Parser, Debug)]
#[command(
    name = "dsr",
    version,
    about = "Cyber-physical distribution system restoration planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan a restoration with one algorithm.
    Solve {
        case: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        max_stages: Option<usize>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Replay a plan against its case and report violations.
    Verify { case: PathBuf, plan: PathBuf },
    /// Run all three algorithms and write a comparison report.
    Compare {
        case: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Generate a benchmark case.
    Gen {
        #[arg(value_enum)]
        feeder: Feeder,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// none, light, severe or severe:uplink=..,ring=..,term=..,line=..,bus=..
        #[arg(long, default_value = "none")]
        damage: DamageProfile,
        /// Try seeds from `--seed` on until OLR < SCLR < ICLR pickup holds
        /// with a multi-stage ICLR plan; prints the seed found.
        #[arg(long, value_name = "TRIES")]
        search: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the first-stage integrated model in LP format.
    ExportMilp {
        case: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Algo {
    Olr,
    Sclr,
    Iclr,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Olr => Algorithm::Olr,
            Algo::Sclr => Algorithm::Sclr,
            Algo::Iclr => Algorithm::Iclr,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Feeder {
    Feeder33,
    Feeder123,
}

/// A failure with its exit code; the message goes to standard error.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_case(path: &Path) -> Result<Case, Failure> {
    parse_case(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| input_error(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(text.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve {
            case,
            algo,
            max_stages,
            output,
        } => {
            let case = load_case(&case)?;
            let mut cfg = case.planner_config();
            if let Some(n) = max_stages {
                cfg.max_stages = n;
            }
            let plan = run(algo.into(), &case.net, &case.scenario, &cfg)
                .map_err(|e| input_error(format!("planning failed: {e}")))?;
            write_atomic(&output, &emit_plan(&plan))?;
            println!(
                "{}: {} stage(s), {:.3} kW picked up ({:.3} kW initially served)",
                plan.algorithm,
                plan.stages.len(),
                plan.total_pickup_kw,
                plan.initial_pickup_kw
            );
            Ok(())
        }
        Command::Verify { case, plan } => {
            let case = load_case(&case)?;
            let plan = parse_plan(&read(&plan)?)
                .map_err(|e| input_error(format!("{}: {e}", plan.display())))?;
            let report = replay(&case.net, &case.scenario, &case.formulation, &plan);
            if report.is_ok() {
                println!("ok: {} stage(s) verified", report.stages.len());
                return Ok(());
            }
            let lines: Vec<String> = report
                .stages
                .iter()
                .flat_map(|s| {
                    s.violations
                        .iter()
                        .map(move |v| format!("stage {}: {v}", s.index))
                })
                .collect();
            Err(Failure {
                code: 1,
                message: lines.join("\n"),
            })
        }
        Command::Compare { case, output, json } => {
            let case = load_case(&case)?;
            let entries = compare(&case.net, &case.scenario, &case.planner_config());
            let report = comparison_report(&entries);
            write_atomic(&output, &report.to_text())?;
            if let Some(j) = json {
                write_atomic(&j, &report.to_json())?;
            }
            print!("{}", report.to_text());
            Ok(())
        }
        Command::Gen {
            feeder,
            seed,
            damage,
            search,
            output,
        } => {
            let generate = |s: u64| match feeder {
                Feeder::Feeder33 => gen_feeder33(s, damage),
                Feeder::Feeder123 => gen_feeder123(s, damage),
            };
            let seed = match search {
                None => seed,
                Some(tries) => {
                    let (found, o) =
                        search_ordering_seed(generate, seed..seed.saturating_add(tries))
                            .ok_or_else(|| {
                                input_error(format!("no seed in {tries} tries shows the ordering"))
                            })?;
                    println!(
                        "seed {found}: OLR {:.3} kW < SCLR {:.3} kW < ICLR {:.3} kW in {} stages",
                        o.olr_kw, o.sclr_kw, o.iclr_kw, o.iclr_stages
                    );
                    found
                }
            };
            write_atomic(&output, &emit_case(&generate(seed)))
        }
        Command::ExportMilp { case, output } => {
            let case = load_case(&case)?;
            let stage = StageState::initial(&case.net, &case.scenario);
            let inst = Instance::new(&case.net, &case.scenario, &stage, &case.formulation);
            let f = build_integrated(&inst).map_err(|e| input_error(e.to_string()))?;
            write_atomic(&output, &f.model.to_lp_format())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
