//! `qmlearn`: solve, tabulate, verify and simulate.
//!
//! Exit codes: 0 success, 1 verification or computation failure, 2 usage
//! error or unsupported input.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qmlearn::learn::{
    optimize_1to1, optimize_2to1, optimize_3to1_qubit, LearnError, LearnSolution, Mode,
};
use qmlearn::sim::{simulate_1to1, SimConfig};
use qmlearn::symmetry::haar::{haar_random_unitary, random_state};
use qmlearn::verify::{self, Suite};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "qmlearn",
    version,
    about = "Optimal learning of unknown von Neumann measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal N→1 learning scheme as JSON.
    Solve {
        #[arg(long = "n")]
        n_uses: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "sequential", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Figures of merit of the 1→1 and 2→1 schemes over a range of d.
    Table {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the invariant suites and reports pass/fail as JSON.
    Verify {
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo run of the 1→1 storage and retrieval circuit.
    Simulate {
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `identity`, `haar:<seed>` or a JSON row-major matrix whose entries
        /// are numbers or `[re, im]` pairs.
        #[arg(long, default_value = "identity")]
        u: String,
        /// `basis:<k>`, `haar:<seed>` or a JSON vector of numbers or `[re, im]` pairs.
        #[arg(long, default_value = "basis:0")]
        psi: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Failed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Failed(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    #[serde(flatten)]
    body: T,
}

fn envelope<T: Serialize>(command: &str, body: T) -> Result<String, Failure> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        body,
    };
    serde_json::to_string_pretty(&env)
        .map(|s| s + "\n")
        .map_err(|e| Failure::Failed(format!("serialization failed: {e}")))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Failed(format!("cannot write to stdout: {e}"))),
    }
}

fn learn_failure(e: LearnError) -> Failure {
    match e {
        LearnError::InvalidDimension(_) | LearnError::Unsupported(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Failed(other.to_string()),
    }
}

fn solve(n_uses: usize, d: usize, mode: Mode) -> Result<LearnSolution, Failure> {
    let sol = match (n_uses, d) {
        (_, d) if d < 2 => return Err(Failure::Usage(format!("dimension must be at least 2, got {d}"))),
        (1, _) => optimize_1to1(d),
        (2, _) => optimize_2to1(d),
        (3, 2) => optimize_3to1_qubit(mode),
        _ => return Err(Failure::Usage(format!("unsupported combination n = {n_uses}, d = {d}; supported: n = 1 or 2 with any d ≥ 2, n = 3 with d = 2"))),
    }
    .map_err(learn_failure)?;
    // Parallel and sequential schemes coincide for one and two uses.
    Ok(LearnSolution { mode, ..sol })
}

#[derive(Serialize)]
struct TableRow {
    d: usize,
    #[serde(rename = "F_1to1")]
    f_1to1: f64,
    #[serde(rename = "D_1to1")]
    d_1to1: f64,
    lambda_1to1: f64,
    #[serde(rename = "F_2to1")]
    f_2to1: f64,
    #[serde(rename = "D_2to1")]
    d_2to1: f64,
    lambda_2to1: f64,
}

fn table_rows(d_min: usize, d_max: usize) -> Result<Vec<TableRow>, Failure> {
    if !(2 <= d_min && d_min <= d_max && d_max <= 10) {
        return Err(Failure::Usage(format!(
            "need 2 ≤ d-min ≤ d-max ≤ 10, got {d_min}..{d_max}"
        )));
    }
    (d_min..=d_max)
        .map(|d| {
            let one = optimize_1to1(d).map_err(learn_failure)?;
            let two = optimize_2to1(d).map_err(learn_failure)?;
            Ok(TableRow {
                d,
                f_1to1: one.f,
                d_1to1: one.d_merit,
                lambda_1to1: one.lambda,
                f_2to1: two.f,
                d_2to1: two.d_merit,
                lambda_2to1: two.lambda,
            })
        })
        .collect()
}

/// Fixed-point rendering with 12 significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&magnitude) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("d,F_1to1,D_1to1,lambda_1to1,F_2to1,D_2to1,lambda_2to1\n");
    for r in rows {
        let vals = [
            r.f_1to1,
            r.d_1to1,
            r.lambda_1to1,
            r.f_2to1,
            r.d_2to1,
            r.lambda_2to1,
        ];
        let cells: Vec<String> = vals.iter().map(|&v| sig12(v)).collect();
        s.push_str(&format!("{},{}\n", r.d, cells.join(",")));
    }
    s
}

fn json_complex(v: &serde_json::Value) -> Option<Complex64> {
    match v {
        serde_json::Value::Number(n) => n.as_f64().map(|re| Complex64::new(re, 0.0)),
        serde_json::Value::Array(pair) if pair.len() == 2 => {
            Some(Complex64::new(pair[0].as_f64()?, pair[1].as_f64()?))
        }
        _ => None,
    }
}

fn parse_unitary(spec: &str, d: usize) -> Result<DMatrix<Complex64>, Failure> {
    let bad = |m: String| Failure::Usage(format!("invalid --u: {m}"));
    if spec == "identity" {
        return Ok(DMatrix::identity(d, d));
    }
    if let Some(seed) = spec.strip_prefix("haar:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| bad(format!("bad seed '{seed}'")))?;
        return Ok(haar_random_unitary(d, seed));
    }
    let value: serde_json::Value = serde_json::from_str(spec).map_err(|e| bad(e.to_string()))?;
    let rows = value
        .as_array()
        .ok_or_else(|| bad("expected an array of rows".into()))?;
    if rows.len() != d {
        return Err(bad(format!("expected {d} rows, got {}", rows.len())));
    }
    let mut entries = Vec::with_capacity(d * d);
    for row in rows {
        let row = row
            .as_array()
            .filter(|r| r.len() == d)
            .ok_or_else(|| bad(format!("every row needs {d} entries")))?;
        for e in row {
            entries.push(json_complex(e).ok_or_else(|| bad(format!("bad entry {e}")))?);
        }
    }
    Ok(DMatrix::from_row_slice(d, d, &entries))
}

fn parse_state(spec: &str, d: usize) -> Result<DVector<Complex64>, Failure> {
    let bad = |m: String| Failure::Usage(format!("invalid --psi: {m}"));
    if let Some(k) = spec.strip_prefix("basis:") {
        let k: usize = k.parse().map_err(|_| bad(format!("bad index '{k}'")))?;
        if k >= d {
            return Err(bad(format!("index {k} out of range for d = {d}")));
        }
        return Ok(qmlearn::tensor::basis(d, k));
    }
    if let Some(seed) = spec.strip_prefix("haar:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| bad(format!("bad seed '{seed}'")))?;
        return Ok(random_state(d, &mut ChaCha8Rng::seed_from_u64(seed)));
    }
    let value: serde_json::Value = serde_json::from_str(spec).map_err(|e| bad(e.to_string()))?;
    let amps = value
        .as_array()
        .ok_or_else(|| bad("expected an array".into()))?;
    let amps: Vec<Complex64> = amps
        .iter()
        .map(|e| json_complex(e).ok_or_else(|| bad(format!("bad amplitude {e}"))))
        .collect::<Result<_, _>>()?;
    Ok(DVector::from_vec(amps))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve {
            n_uses,
            d,
            mode,
            out,
        } => {
            let sol = solve(n_uses, d, mode)?;
            emit(&envelope("solve", sol)?, out.as_ref())
        }
        Command::Table {
            d_min,
            d_max,
            format,
            out,
        } => {
            let rows = table_rows(d_min, d_max)?;
            let text = match format {
                Format::Csv => table_csv(&rows),
                Format::Json => envelope("table", serde_json::json!({ "rows": rows }))?,
            };
            emit(&text, out.as_ref())
        }
        Command::Verify { suite, seed, out } => {
            let report = verify::run(suite, seed);
            let passed = report.passed;
            emit(&envelope("verify", report)?, out.as_ref())?;
            if passed {
                Ok(())
            } else {
                Err(Failure::Failed("verification failed".into()))
            }
        }
        Command::Simulate {
            d,
            shots,
            seed,
            u,
            psi,
            out,
        } => {
            if d < 2 {
                return Err(Failure::Usage(format!(
                    "dimension must be at least 2, got {d}"
                )));
            }
            let cfg = SimConfig {
                d,
                u: parse_unitary(&u, d)?,
                psi: parse_state(&psi, d)?,
                shots,
                seed,
            };
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let result = simulate_1to1(&cfg).map_err(|e| Failure::Failed(e.to_string()))?;
            emit(&envelope("simulate", result)?, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) | Failure::Failed(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
