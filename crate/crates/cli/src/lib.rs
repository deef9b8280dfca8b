//! `rangepres` command line. [`run`] is the whole program minus process
//! plumbing, so tests can drive it in-process.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use rangepres_core::analyzer::{classify, extract_symbol, normalize, AnalysisConfig, SymbolExtraction};
use rangepres_core::approx::{tensor_approximate, Strategy};
use rangepres_core::funcspace::FunctionValues;
use rangepres_core::harness::{generate_spec, oracle_extract, CatalogKind, Instance, InstanceSpec, SCHEMA_VERSION};
use rangepres_core::ksfunc::{analyze_functional, FunctionalSpec};
use rangepres_core::lcs::{ComplexVector, Neighborhood, VectorSpaceModel};
use rangepres_core::par::Execution;
use rangepres_core::space::FiniteSpace;
use rangepres_core::DEFAULT_TOL;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(#[from] rangepres_core::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(
    name = "rangepres",
    version,
    about = "Classify range-preserving maps between vector-valued function tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args, Debug)]
struct Io {
    /// Input JSON file.
    #[arg(long, value_name = "PATH")]
    instance: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct Tuning {
    /// Override the seed from the instance.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the absolute tolerance from the instance.
    #[arg(long)]
    tol: Option<f64>,
    /// Range-preservation pair budget.
    #[arg(long)]
    pairs: Option<usize>,
    /// Evaluate samples on the calling thread only.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Assignment,
    Hat,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the full analysis on an instance and emit the report.
    Verify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Recover the offset and symbol from indicator probes only.
    Extract {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Check the spectral hypothesis and the conclusion for a functional.
    KsCheck {
        #[command(flatten)]
        io: Io,
        /// Override the seed from the instance.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the absolute tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Approximate a function by a finite tensor sum within a neighborhood.
    Approx {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "assignment")]
        strategy: StrategyArg,
    },
    /// Emit a seeded catalog instance.
    Gen {
        /// composition, constant, averaging, rotation, direction-dependent or perturbed.
        #[arg(long, default_value = "composition")]
        kind: String,
        /// Generator seed, also recorded in the instance.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance recorded in the instance instead of the kind's default.
        #[arg(long)]
        tol: Option<f64>,
        /// Write the instance here instead of standard output.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Compare the analyzer's extraction with the exhaustive oracle.
    Oracle {
        #[command(flatten)]
        io: Io,
        /// Override the seed from the instance.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the absolute tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KsSpec {
    schema: u32,
    x: FiniteSpace,
    functional: FunctionalSpec,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_tol")]
    tol: f64,
    /// Random samples added when the exhaustive grid is too large.
    #[serde(default = "default_extra")]
    extra: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproxSpec {
    schema: u32,
    x: FiniteSpace,
    model: VectorSpaceModel,
    function: FunctionValues,
    neighborhood: Neighborhood,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_extra() -> usize {
    16
}

fn check_schema(schema: u32) -> Result<(), CliError> {
    if schema == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(
            rangepres_core::Error::InvalidSpec(format!("unsupported schema {schema} (expected {SCHEMA_VERSION})"))
                .into(),
        )
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(report: Option<&Path>, body: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match report {
        Some(path) => fs::write(path, format!("{body}\n")).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => writeln!(out, "{body}").map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(value)?)
}

fn config(inst: &Instance, tuning: &Tuning) -> AnalysisConfig {
    let defaults = AnalysisConfig::default();
    AnalysisConfig {
        seed: tuning.seed.unwrap_or(inst.seed),
        tol: tuning.tol.unwrap_or(inst.tol),
        pairs: tuning.pairs.unwrap_or(defaults.pairs),
        family: inst.family,
        execution: if tuning.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        ..defaults
    }
}

fn load_instance(path: &Path) -> Result<Instance, CliError> {
    Ok(InstanceSpec::from_json(&read(path)?)?.instantiate()?)
}

fn extraction_json(ext: &SymbolExtraction) -> serde_json::Value {
    let coefficients: serde_json::Map<String, serde_json::Value> = ext
        .coefficients()
        .iter()
        .enumerate()
        .map(|(y, row)| {
            let per_x: serde_json::Map<String, serde_json::Value> = row
                .iter()
                .enumerate()
                .map(|(x, c)| (ext.target().label(x).to_string(), json!([c.re, c.im])))
                .collect();
            (ext.source().label(y).to_string(), per_x.into())
        })
        .collect();
    json!({
        "symbol": ext.symbol(),
        "coefficients": coefficients,
        "colinearity": ext.colinearity(),
        "witnesses": ext.ambiguities(),
    })
}

fn run_command(cmd: Cmd, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Cmd::Verify { io, tuning } => {
            let inst = load_instance(&io.instance)?;
            let report = classify(&inst.map, &config(&inst, &tuning));
            emit(io.report.as_deref(), &report.to_json_pretty(), out)?;
            Ok(if report.is_consistent() { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::Extract { io, tuning } => {
            let inst = load_instance(&io.instance)?;
            let cfg = config(&inst, &tuning);
            let (offset, tn) = normalize(&inst.map)?;
            let u = ComplexVector::basis(inst.model.dim(), 0);
            let ext = extract_symbol(&tn, &u, cfg.tol, cfg.execution)?;
            let mut body = extraction_json(&ext);
            body["offset"] = serde_json::to_value(&offset)?;
            body["probe_u"] = serde_json::to_value(&u)?;
            emit(io.report.as_deref(), &pretty(&body)?, out)?;
            Ok(if ext.is_unambiguous() { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::KsCheck { io, seed, tol } => {
            let spec: KsSpec = serde_json::from_str(&read(&io.instance)?)?;
            check_schema(spec.schema)?;
            let x = Arc::new(spec.x);
            let tol = tol.unwrap_or(spec.tol);
            let delta = spec.functional.build(&x)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(spec.seed));
            let report = analyze_functional(&delta, &mut rng, spec.extra, tol, Execution::Parallel)?;
            let consistent = report.consistent(tol);
            let body = json!({
                "verdict": if consistent { "point-evaluation" } else { "violated" },
                "functional": spec.functional,
                "hypothesis": report.hypothesis,
                "conclusion": report.conclusion,
                "tol": tol,
            });
            emit(io.report.as_deref(), &pretty(&body)?, out)?;
            Ok(if consistent { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::Approx { io, strategy } => {
            let spec: ApproxSpec = serde_json::from_str(&read(&io.instance)?)?;
            check_schema(spec.schema)?;
            let f = spec.function.resolve(Arc::new(spec.x), Arc::new(spec.model))?;
            let strategy = match strategy {
                StrategyArg::Assignment => Strategy::Assignment,
                StrategyArg::Hat => Strategy::Hat,
            };
            let (sum, cert) = tensor_approximate(&f, &spec.neighborhood, strategy)?;
            let body = json!({ "terms": sum, "certificate": cert });
            emit(io.report.as_deref(), &pretty(&body)?, out)?;
            Ok(if cert.in_v { EXIT_OK } else { EXIT_VIOLATED })
        }
        Cmd::Gen {
            kind,
            seed,
            tol,
            report,
        } => {
            let kind: CatalogKind = kind.parse()?;
            let mut spec = generate_spec(kind, seed);
            if let Some(t) = tol {
                spec.tol = t;
                spec.validate()?;
            }
            emit(report.as_deref(), &spec.to_json_pretty(), out)?;
            Ok(EXIT_OK)
        }
        Cmd::Oracle { io, seed, tol } => {
            let inst = load_instance(&io.instance)?;
            let seed = seed.unwrap_or(inst.seed);
            let tol = tol.unwrap_or(inst.tol);
            let u = ComplexVector::basis(inst.model.dim(), 0);
            let oracle = oracle_extract(&inst.map, &u, seed)?;
            let (_, tn) = normalize(&inst.map)?;
            let ext = extract_symbol(&tn, &u, tol, Execution::Parallel)?;
            let disagreements = oracle.disagreements(&ext, tol);
            let body = json!({
                "agree": disagreements.is_empty(),
                "disagreements": disagreements,
                "oracle": oracle,
                "analyzer": extraction_json(&ext),
            });
            emit(io.report.as_deref(), &pretty(&body)?, out)?;
            Ok(if disagreements.is_empty() {
                EXIT_OK
            } else {
                EXIT_VIOLATED
            })
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Reports
/// go to `out` unless `--report` is given; diagnostics go to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_MALFORMED
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    match run_command(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_MALFORMED
        }
    }
}
