//! The `squish` command line: `run`, `sweep`, `accuracy`, `mesh` and
//! `serve`.
//!
//! Exit codes: 0 on success, 1 on invalid input or I/O failure, 2 when a
//! scenario run diverged.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;
use squish::engine::{
    default_sweep_body, metrics_csv, run as run_script, stability_sweep, sweep_csv, BodySpec, ScenarioScript,
    SimConfig, DEFAULT_SWEEP_DTS,
};
use squish::export::MeshExport;
use squish::integrate::{order_of_accuracy, IntegratorKind, TestSystem};

use crate::server::{serve, ServeOptions, DEFAULT_FRAME_RATE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;

pub const SNAPSHOTS_FILE: &str = "snapshots.ndjson";
pub const METRICS_FILE: &str = "metrics.csv";

#[derive(Debug, Parser)]
#[command(name = "squish", version, about = "Two-layer soft body simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a scenario file.
    ///
    /// With --out, writes snapshots.ndjson and metrics.csv into the
    /// directory. Without it, prints the stream picked by --format.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Survival table for every step size and integrator.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_DTS.to_vec())]
        dts: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = IntegratorKind::ALL.to_vec())]
        integrators: Vec<IntegratorKind>,
        #[arg(long, default_value_t = 5000)]
        steps: u64,
        /// Body kind or JSON body spec. Defaults to a level-1 sphere
        /// dropped from 5 m.
        #[arg(long)]
        body: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global error and fitted convergence order of each integrator.
    Accuracy {
        #[arg(long, default_value = "oscillator")]
        system: TestSystem,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.02, 0.01, 0.005, 0.0025])]
        dts: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export a body's particles, springs and faces as JSON.
    Mesh {
        /// 1d, ring2d, sphere_polar or sphere_octa.
        kind: String,
        /// Subdivision level of sphere_octa.
        #[arg(long)]
        iterations: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Interactive WebSocket service on /ws.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Body kind or JSON body spec.
        #[arg(long, default_value = "ring2d")]
        body: String,
        #[arg(long)]
        dt: Option<f64>,
    },
}

/// A failure that maps to an exit code and a message on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    if std::env::var("SQUISH_SEEDLESS").as_deref() == Ok("1") && squish::USES_ENTROPY {
        eprintln!("error: SQUISH_SEEDLESS=1 but this build reads an entropy source");
        return EXIT_INVALID;
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: Command) -> CmdResult {
    match command {
        Command::Run { scenario, out, format } => cmd_run(&scenario, out.as_deref(), format),
        Command::Sweep {
            dts,
            integrators,
            steps,
            body,
            out,
        } => cmd_sweep(&dts, &integrators, steps, body.as_deref(), out.as_deref()),
        Command::Accuracy { system, dts, out } => cmd_accuracy(system, &dts, out.as_deref()),
        Command::Mesh { kind, iterations, out } => cmd_mesh(&kind, iterations, out.as_deref()),
        Command::Serve { port, host, body, dt } => cmd_serve(SocketAddr::new(host, port), &body, dt),
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            write_atomic(path, text.as_bytes()).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::invalid(format!("cannot write to stdout: {e}")))
        }
    }
}

/// Accepts a bare kind (`ring2d`) or a JSON body spec
/// (`{"kind": "ring2d", "n": 16}`).
pub fn parse_body(arg: &str) -> Result<BodySpec, Failure> {
    let arg = arg.trim();
    let parsed = if arg.starts_with('{') {
        serde_json::from_str::<Value>(arg)
            .map_err(squish::Error::from)
            .and_then(BodySpec::from_json)
    } else {
        BodySpec::from_kind(arg, Value::Null)
    };
    parsed.map_err(|e| Failure::invalid(format!("bad body '{arg}': {e}")))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioScript, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    let script: ScenarioScript = serde_json::from_str(&text).map_err(|e| {
        Failure::invalid(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    })?;
    script
        .validate()
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    Ok(script)
}

fn cmd_run(path: &Path, out: Option<&Path>, format: Format) -> CmdResult {
    let script = load_scenario(path)?;
    let engine_failure = |e: squish::Error| Failure::invalid(format!("{}: {e}", path.display()));

    let summary = match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::invalid(format!("cannot create {}: {e}", dir.display())))?;
            let mut stream = String::new();
            let summary = run_script(&script, |snap| {
                stream.push_str(&snap.to_json_line());
                Ok(())
            })
            .map_err(engine_failure)?;
            emit(Some(&dir.join(SNAPSHOTS_FILE)), &stream)?;
            emit(Some(&dir.join(METRICS_FILE)), &metrics_csv(&summary.metrics))?;
            summary
        }
        None if format == Format::Json => {
            let mut stdout = io::BufWriter::new(io::stdout().lock());
            let mut write_failed = None;
            let summary = run_script(&script, |snap| {
                if write_failed.is_none() {
                    if let Err(e) = stdout.write_all(snap.to_json_line().as_bytes()) {
                        write_failed = Some(e);
                    }
                }
                Ok(())
            })
            .map_err(engine_failure)?;
            if let Some(e) = write_failed.or_else(|| stdout.flush().err()) {
                return Err(Failure::invalid(format!("cannot write to stdout: {e}")));
            }
            summary
        }
        None => {
            let summary = run_script(&script, |_| Ok(())).map_err(engine_failure)?;
            emit(None, &metrics_csv(&summary.metrics))?;
            summary
        }
    };

    if summary.diverged {
        eprintln!("diverged at step {} ({} snapshots)", summary.steps_run, summary.snapshots);
        Ok(EXIT_DIVERGED)
    } else {
        if out.is_some() {
            eprintln!("{} steps, {} snapshots", summary.steps_run, summary.snapshots);
        }
        Ok(EXIT_OK)
    }
}

fn cmd_sweep(dts: &[f64], integrators: &[IntegratorKind], steps: u64, body: Option<&str>, out: Option<&Path>) -> CmdResult {
    let spec = match body {
        Some(arg) => parse_body(arg)?,
        None => default_sweep_body(),
    };
    let cells = stability_sweep(&spec, &SimConfig::default(), dts, integrators, steps)
        .map_err(|e| Failure::invalid(e.to_string()))?;
    emit(out, &sweep_csv(&cells))?;
    Ok(EXIT_OK)
}

fn cmd_accuracy(system: TestSystem, dts: &[f64], out: Option<&Path>) -> CmdResult {
    let table = order_of_accuracy(system, &IntegratorKind::ALL, dts).map_err(|e| Failure::invalid(e.to_string()))?;
    let system = serde_json::to_value(table.system).expect("system serialises");
    let system = system.as_str().unwrap_or_default();
    let mut csv = String::from("system,integrator,h,steps,error,order\n");
    for row in &table.rows {
        let order = table
            .orders
            .iter()
            .find(|(kind, _)| *kind == row.integrator)
            .and_then(|(_, order)| *order)
            .map(|p| p.to_string())
            .unwrap_or_default();
        let _ = writeln!(csv, "{system},{},{},{},{:e},{order}", row.integrator, row.h, row.steps, row.error);
    }
    emit(out, &csv)?;
    Ok(EXIT_OK)
}

fn cmd_mesh(kind: &str, iterations: Option<u32>, out: Option<&Path>) -> CmdResult {
    let params = match iterations {
        Some(_) if kind != "sphere_octa" => {
            return Err(Failure::invalid(format!("--iterations only applies to sphere_octa, not '{kind}'")));
        }
        Some(k) => serde_json::json!({ "iterations": k }),
        None => Value::Null,
    };
    let body = BodySpec::from_kind(kind, params)
        .and_then(|spec| spec.build(&SimConfig::default()))
        .map_err(|e| Failure::invalid(e.to_string()))?;
    let mut json = serde_json::to_string(&MeshExport::from_body(&body)).expect("mesh serialises");
    json.push('\n');
    emit(out, &json)?;
    Ok(EXIT_OK)
}

fn cmd_serve(addr: SocketAddr, body: &str, dt: Option<f64>) -> CmdResult {
    let mut config = SimConfig::default();
    if let Some(dt) = dt {
        config.set_param("dt", dt).map_err(|e| Failure::invalid(e.to_string()))?;
    }
    let opts = ServeOptions {
        body: parse_body(body)?,
        config,
        frame_rate: DEFAULT_FRAME_RATE,
    };
    let _ = tracing_subscriber::fmt().with_writer(io::stderr).try_init();
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::invalid(e.to_string()))?;
    runtime
        .block_on(serve(addr, opts))
        .map_err(|e| Failure::invalid(format!("{e:#}")))?;
    Ok(EXIT_OK)
}
