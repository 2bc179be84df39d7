use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use harmap::eellswood::gauss_transform;
use harmap::holomap::{ramification_data, HoloMap};
use harmap::paths::{connect, invariant_csv, verify_path, PathOptions};
use harmap::quadrature::{residual_csv, verify, QuadratureConfig};
use harmap::strata::{check_stratum_bounds, component_table, sample_stratum, table_csv, StratumPoint};
use harmap::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

const SCHEMA: &str = "harmap/1";

#[derive(Parser)]
#[command(name = "harmap", version, about = "Harmonic maps from the sphere to the complex projective plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gauss transform of a full holomorphic map
    Construct {
        /// Map JSON ({"k", "p"}), or - for standard input
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Ramification index, divisor and first associated curve
    Ramify {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
    },
    /// Integrate degree and energy of the Gauss transform and check harmonicity
    Verify {
        #[arg(short = 'f', long = "file")]
        file: PathBuf,
        /// Angular nodes at the coarsest level (at least 16)
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Maximum refinement levels
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Also write the residual against grid step as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Exit 2 when any check fails
        #[arg(long)]
        strict: bool,
    },
    /// Seeded samples from a stratum Hol_{k,r}
    Sample {
        #[arg(short = 'k')]
        k: usize,
        #[arg(short = 'r')]
        r: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Table of non-minimal harmonic components as CSV
    Table {
        #[arg(long = "max-k")]
        max_k: usize,
        #[arg(long = "max-r")]
        max_r: usize,
    },
    /// Numeric path between two sample records of the same stratum
    Path {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// Integrate invariants at every n-th step (0 disables)
        #[arg(long = "quad-every", default_value_t = 10)]
        quad_every: usize,
        /// Also write invariants against step as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the exact identity checks
    Selftest,
}

struct Failure {
    error: Error,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        Failure { error }
    }
}

type CmdResult = std::result::Result<String, Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure { error: Error::InvalidInput(msg.into()) }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

#[derive(serde::Deserialize)]
struct MapFile {
    k: usize,
    p: [harmap::poly::Poly; 3],
}

fn read_map(path: &Path) -> std::result::Result<HoloMap, Failure> {
    let text = read_text(path)?;
    let w: MapFile = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let f = HoloMap::from_array(w.p)?;
    if f.degree() != w.k {
        return Err(input(format!("declared k = {} but the polynomials have degree {}", w.k, f.degree())));
    }
    Ok(f)
}

fn read_point(path: &Path) -> std::result::Result<StratumPoint, Failure> {
    let text = read_text(path)?;
    let pt: StratumPoint = serde_json::from_str(&text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    Ok(pt.revalidate()?)
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure { error: Error::IntegrationFailure(format!("{}: {e}", path.display())) })
}

fn document(command: &str, body: impl Serialize) -> CmdResult {
    let mut v = serde_json::to_value(body).map_err(|e| input(e.to_string()))?;
    let obj = match v.as_object_mut() {
        Some(o) => o,
        None => {
            v = json!({ "result": v });
            v.as_object_mut().expect("object")
        }
    };
    obj.insert("schema".into(), json!(SCHEMA));
    obj.insert("command".into(), json!(command));
    serde_json::to_string_pretty(&v).map_err(|e| input(e.to_string()))
}

fn run(cmd: Command) -> std::result::Result<(String, bool), Failure> {
    match cmd {
        Command::Construct { file } => {
            let f = read_map(&file)?;
            Ok((document("construct", gauss_transform(&f)?)?, true))
        }
        Command::Ramify { file } => {
            let f = read_map(&file)?;
            let ram = ramification_data(&f)?;
            let body = json!({ "r": ram.index, "divisor": ram.divisor, "curve": ram.curve });
            Ok((document("ramify", body)?, true))
        }
        Command::Verify { file, grid, levels, csv, strict } => {
            let cfg = QuadratureConfig { resolution: grid, levels, ..QuadratureConfig::default() };
            cfg.validate()?;
            let f = read_map(&file)?;
            let rep = gauss_transform(&f)?;
            let report = verify(&rep, &cfg)?;
            if let Some(p) = csv {
                write_file(&p, &residual_csv(&report.tension_residuals))?;
            }
            let ok = !strict || report.pass.all();
            Ok((document("verify", report)?, ok))
        }
        Command::Sample { k, r, count, seed } => {
            check_stratum_bounds(k, r).map_err(|e| input(e.to_string()))?;
            let samples: Vec<StratumPoint> = (0..count as u64)
                .into_par_iter()
                .map(|i| sample_stratum(k, r, seed.wrapping_add(i)))
                .collect::<harmap::Result<_>>()?;
            Ok((document("sample", json!({ "k": k, "r": r, "seed": seed, "samples": samples }))?, true))
        }
        Command::Table { max_k, max_r } => {
            Ok((format!("# {SCHEMA} table\n{}", table_csv(&component_table(max_k, max_r))), true))
        }
        Command::Path { from, to, steps, quad_every, csv } => {
            let p = read_point(&from)?;
            let q = read_point(&to)?;
            let path = connect(&p, &q, steps, &PathOptions::default())?;
            let report = verify_path(&path, quad_every, &QuadratureConfig::default());
            if let Some(c) = csv {
                write_file(&c, &invariant_csv(&path, &report))?;
            }
            let ok = report.all_ok;
            Ok((document("path", json!({ "path": path, "report": report }))?, ok))
        }
        Command::Selftest => {
            let rep = harmap::selftest::run();
            let ok = rep.passed;
            Ok((document("selftest", rep)?, ok))
        }
    }
}

fn report_error(e: &Error) -> ExitCode {
    let v = json!({ "schema": SCHEMA, "error": e.kind(), "message": e.to_string() });
    eprintln!("{v}");
    ExitCode::from(if e.is_input_error() { 1 } else { 2 })
}

fn configure_threads() -> std::result::Result<(), Error> {
    let Ok(v) = std::env::var("HARMAP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("HARMAP_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report_error(&Error::InvalidInput(e.to_string())),
    };
    if let Err(e) = configure_threads() {
        return report_error(&e);
    }
    match run(cli.command) {
        Ok((out, ok)) => {
            // a closed pipe on stdout is not an error worth reporting
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.as_bytes());
            if !out.ends_with('\n') {
                let _ = stdout.write_all(b"\n");
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(f) => report_error(&f.error),
    }
}
