//! `roadkernel` command-line front end.
//!
//! Exit codes: 0 pass, 2 semantic rejection, 1 operational error.

mod config;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use roadkernel::opendrive::{parse_opendrive_file, render_table, ComplianceReport, IngestConfig};
use roadkernel::stress::{stress, write_csv, CategoryMix};
use roadkernel::validator::{validate_str, Status};
use roadkernel::{analyze_facility, export_sumo, validate_asset, AnalysisError, Facility, SumoError};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Input(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Input(m) => write!(f, "invalid input: {m}"),
        }
    }
}

const PASS: u8 = 0;
const OPERATIONAL: u8 = 1;
const REJECTED: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "roadkernel", version, about = "Two-lane highway analysis with design-rule validation")]
struct Cli {
    /// Rules document [default: rules/two_lane_highway.json if present, else the built-in copy]
    #[arg(long, global = true, env = "ROADKERNEL_RULES")]
    rules: Option<PathBuf>,
    /// Analysis coefficient set [default: built-in]
    #[arg(long, global = true)]
    coeffs: Option<PathBuf>,
    /// Relational-rule bindings (superelevation, side friction) [default: built-in]
    #[arg(long, global = true)]
    bindings: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output_format: Format,
    /// Report unknown parameters without rejecting
    #[arg(long, global = true)]
    lenient: bool,
    /// Include wall-clock timings in the output (makes it non-reproducible)
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate and analyse a facility file
    Analyze { facility: PathBuf },
    /// Validate a flat parameter object
    Validate { params: PathBuf },
    /// Audit OpenDRIVE assets (files or directories of .xodr)
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Skip unparseable assets instead of failing
        #[arg(long)]
        skip_bad: bool,
        /// Design speed for roads without a speed record, mph
        #[arg(long, default_value_t = 55.0)]
        default_speed: f64,
        /// Lane-width samples per lane section
        #[arg(long, default_value_t = 1)]
        samples_per_section: usize,
    },
    /// Run the adversarial stress test
    Stress {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Category weights as `category=weight,...` [default: 26% valid, 74% attacks]
        #[arg(long)]
        mix: Option<String>,
        /// Write every vector with its label and verdict to this CSV file
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Drop a rule before running (harness self-check)
        #[arg(long, hide = true)]
        disable_rule: Vec<String>,
    },
    /// Write SUMO plain node/edge files for a facility
    ExportSumo {
        facility: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// File name stem [default: the facility file stem]
        #[arg(long)]
        stem: Option<String>,
    },
}

/// Writes to stdout; a closed pipe is not an error worth reporting.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(value: &impl serde::Serialize) {
    emit(&(serde_json::to_string_pretty(value).expect("report serializes") + "\n"));
}

fn eprint_json(value: &impl serde::Serialize) {
    eprintln!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn without(mut value: Value, key: &str) -> Value {
    if let Value::Object(map) = &mut value {
        map.remove(key);
    }
    value
}

fn load_facility(path: &Path) -> Result<Facility, CliError> {
    Facility::from_json(&config::read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn analysis_failure(e: AnalysisError) -> Result<u8, CliError> {
    match e {
        AnalysisError::Rejected(exception) => {
            eprint_json(&exception);
            Ok(REJECTED)
        }
        other => Err(CliError::Input(other.to_string())),
    }
}

fn xodr_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "xodr"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let graph = config::load_graph(cli.rules.as_ref())?;
    let bindings = config::load_bindings(cli.bindings.as_ref())?;
    let table = cli.output_format == Format::Table;

    match cli.command {
        Command::Analyze { facility } => {
            let coeffs = config::load_coefficients(cli.coeffs.as_ref())?;
            let facility = load_facility(&facility)?;
            match analyze_facility(&facility, &coeffs, &graph, &bindings) {
                Ok(result) => {
                    if table {
                        emit(&render::facility(&result));
                    } else {
                        print_json(&result);
                    }
                    Ok(PASS)
                }
                Err(e) => analysis_failure(e),
            }
        }
        Command::Validate { params } => {
            let options = roadkernel::ValidateOptions { lenient: cli.lenient };
            let (_, report) = validate_str(&graph, &config::read(&params)?, &bindings, options)
                .map_err(|e| CliError::Input(format!("{}: {e}", params.display())))?;
            if table {
                emit(&render::validation(&report, cli.timing));
            } else {
                let value = serde_json::to_value(&report).expect("report serializes");
                print_json(&if cli.timing { value } else { without(value, "elapsed_us") });
            }
            Ok(if report.status == Status::Pass { PASS } else { REJECTED })
        }
        Command::Ingest {
            paths,
            skip_bad,
            default_speed,
            samples_per_section,
        } => {
            let ingest = IngestConfig {
                default_design_speed_mph: default_speed,
                samples_per_section,
                ..IngestConfig::default()
            };
            let mut reports = Vec::new();
            for file in xodr_files(&paths)? {
                match parse_opendrive_file(&file) {
                    Ok(net) => reports.push(validate_asset(&net, &graph, &bindings, &ingest)),
                    Err(e) if skip_bad => eprintln!("skipping {}: {e}", file.display()),
                    Err(e) => return Err(CliError::Input(format!("{}: {e}", file.display()))),
                }
            }
            if table {
                emit(&render_table(&reports, true));
                let total = ComplianceReport::total(&reports);
                for (rule, n) in &total.violations_by_rule {
                    emit(&format!("{rule}: {n}\n"));
                }
            } else {
                let total = ComplianceReport::total(&reports);
                print_json(&serde_json::json!({ "assets": reports, "total": total }));
            }
            Ok(PASS)
        }
        Command::Stress {
            n,
            seed,
            mix,
            csv,
            disable_rule,
        } => {
            if n == 0 {
                return Err(CliError::Config("--n must be at least 1".into()));
            }
            let mix = match mix {
                Some(m) => m.parse::<CategoryMix>().map_err(|e| CliError::Config(e.to_string()))?,
                None => CategoryMix::standard(),
            };
            let mut graph = graph;
            for id in &disable_rule {
                if graph.rule(id).is_none() {
                    return Err(CliError::Config(format!("no rule `{id}` to disable")));
                }
                graph = graph.without_rule(id);
            }
            let (vectors, report) = stress(&graph, &bindings, n, seed, &mix);
            if let Some(path) = csv {
                let file = std::fs::File::create(&path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                write_csv(file, &vectors, &report).map_err(|e| CliError::Io(e.to_string()))?;
            }
            if table {
                emit(&render::stress(&report, cli.timing));
            } else {
                let value = serde_json::to_value(&report).expect("report serializes");
                print_json(&if cli.timing { value } else { without(value, "latency_us") });
            }
            Ok(if report.is_clean() { PASS } else { REJECTED })
        }
        Command::ExportSumo { facility, out, stem } => {
            let stem = stem.unwrap_or_else(|| {
                facility
                    .file_stem()
                    .map_or_else(|| "facility".into(), |s| s.to_string_lossy().into_owned())
            });
            let parsed = load_facility(&facility)?;
            match export_sumo(&parsed, &graph, &bindings, &out, &stem) {
                Ok((nodes, edges)) => {
                    if table {
                        emit(&format!("nodes: {}\nedges: {}\n", nodes.display(), edges.display()));
                    } else {
                        print_json(&serde_json::json!({
                            "nodes": nodes.display().to_string(),
                            "edges": edges.display().to_string(),
                            "segments": parsed.segments.len(),
                        }));
                    }
                    Ok(PASS)
                }
                Err(SumoError::Rejected(exception)) => {
                    eprint_json(&exception);
                    Ok(REJECTED)
                }
                Err(SumoError::Analysis(e)) => analysis_failure(e),
                Err(SumoError::Io { path, source }) => Err(CliError::Io(format!("{}: {source}", path.display()))),
                Err(e) => Err(CliError::Input(e.to_string())),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("roadkernel: {e}");
            ExitCode::from(OPERATIONAL)
        }
    }
}
