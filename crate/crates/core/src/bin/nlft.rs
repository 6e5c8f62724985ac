use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nlft::config::{Config, GridSize};
use nlft::estimates::check_sinh_bound;
use nlft::io::{self, InputFile};
use nlft::rh::layer_strip_detailed;
use nlft::spectral::is_outer;
use nlft::{
    inverse_nlft, nlft_forward, run_suite, CoefficientSequence, IndexWindow, NlftError, NlftPair, SuiteInput,
};

/// SU(2) nonlinear Fourier transform: forward, inverse and verification.
#[derive(Parser)]
#[command(name = "nlft", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transform a potential F into the pair (a, b).
    Forward(Common),
    /// Recover F from b (or from a pair given with --a and --b).
    Inverse(Common),
    /// Run the verification suite on a potential, a pair, or a target b.
    Verify(Common),
    /// Print weighted norms of a potential and its transform.
    Norms(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Input file: a sequence or a pair.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Sequence file holding b.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Sequence file holding a, used together with --b.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Support window m..M of the potential.
    #[arg(long, allow_hyphen_values = true)]
    support: Option<String>,
    /// Grid size (power of two).
    #[arg(long)]
    grid: Option<usize>,
    /// Krylov solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Weight: `one` or `poly:alpha=<x>`.
    #[arg(long)]
    weight: Option<String>,
    /// Require purely imaginary recovered coefficients.
    #[arg(long)]
    imaginary: bool,
    /// Write the per-index decay table to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Seed for randomized probes.
    #[arg(long)]
    seed: Option<u64>,
}

/// Failure of a command, mapped to exit codes 1 and 2.
enum Failure {
    Input(String),
    Numerical(String),
}

impl From<NlftError> for Failure {
    fn from(e: NlftError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn config(args: &Common) -> Result<Config, Failure> {
    let mut cfg = Config::from_env()?;
    if let Some(n) = args.grid {
        cfg.grid_size = GridSize::Fixed(n);
    }
    if let Some(t) = args.tol {
        cfg.solver_tol = t;
    }
    if let Some(w) = &args.weight {
        cfg.weight = w.clone();
    }
    if let Some(s) = &args.support {
        cfg.window = Some(s.clone());
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Diagnostics go to stdout when the payload went to a file.
fn note(args: &Common, line: &str) {
    if args.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn require<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Failure> {
    p.as_deref().ok_or_else(|| Failure::Input(format!("missing --{flag}")))
}

fn read_potential(args: &Common) -> Result<CoefficientSequence, Failure> {
    Ok(io::read_sequence(require(&args.input, "input")?)?)
}

fn cmd_forward(args: &Common) -> CmdResult {
    let _cfg = config(args)?;
    let f = read_potential(args)?;
    let pair = nlft_forward(&f)?;
    emit(args.out.as_deref(), &io::pair_to_json(&pair)?)?;
    note(args, &format!("a*(0) = {:.17e}", pair.a_star_at_zero().re));
    note(args, &format!("determinant residual = {:.3e}", pair.grid_residual));
    Ok(())
}

fn cmd_inverse(args: &Common) -> CmdResult {
    let cfg = config(args)?;
    let b_path = args.b.as_deref().or(args.input.as_deref());
    let b = io::read_sequence(b_path.ok_or_else(|| Failure::Input("missing --b".into()))?)?;
    let window = match cfg.window()? {
        Some(w) => w,
        None => b.window().unwrap_or(IndexWindow { lo: 0, hi: 0 }),
    };
    let opts = cfg.inverse_options();

    let (f, residual, a0) = match &args.a {
        Some(a_path) => {
            let a = io::read_sequence(a_path)?;
            let pair = NlftPair::new(a, b.clone(), cfg.grid_size.fixed())?;
            if pair.grid_residual > 1e-10 {
                return Err(Failure::Numerical(format!(
                    "|a|^2 + |b|^2 deviates from 1 by {:.3e}",
                    pair.grid_residual
                )));
            }
            if !is_outer(&pair, 4 * pair.default_grid())? {
                return Err(Failure::Numerical("a* is not outer; the pair has no compactly supported potential".into()));
            }
            let strip = layer_strip_detailed(&pair, window, &opts)?;
            let residual = strip.solutions.iter().map(|s| s.residual).fold(0.0, f64::max);
            (strip.f, residual, pair.a_star_at_zero().re)
        }
        None => {
            let inv = inverse_nlft(&b, window, &opts)?;
            (inv.f, inv.max_solver_residual, inv.factor.pair.a_star_at_zero().re)
        }
    };
    let round_trip = nlft_forward(&f)?.b.max_abs_diff(&b);

    emit(args.out.as_deref(), &io::sequence_to_json(&f)?)?;
    note(args, &format!("a*(0) = {a0:.17e}"));
    note(args, &format!("max solver residual = {residual:.3e}"));
    note(args, &format!("round-trip error = {round_trip:.3e}"));

    if round_trip > cfg.round_trip_tol {
        return Err(Failure::Numerical(format!(
            "round-trip error {round_trip:.3e} exceeds {:.3e}",
            cfg.round_trip_tol
        )));
    }
    if args.imaginary {
        if let Some((n, c)) = f.iter().find(|(_, c)| c.re.abs() > cfg.round_trip_tol) {
            return Err(Failure::Numerical(format!(
                "F_{n} has real part {:.3e}; expected a purely imaginary potential",
                c.re
            )));
        }
    }
    Ok(())
}

fn cmd_verify(args: &Common) -> CmdResult {
    let cfg = config(args)?;
    let opts = cfg.suite_options()?;
    let input = match (&args.input, &args.b) {
        (Some(p), _) => match io::read_input(p)? {
            InputFile::Sequence(f) => SuiteInput::Potential(f),
            InputFile::Pair(p) => SuiteInput::Pair(p),
        },
        (None, Some(b)) => SuiteInput::Target(io::read_sequence(b)?),
        (None, None) => return Err(Failure::Input("missing --input or --b".into())),
    };
    let report = run_suite(&input, &opts)?;
    emit(args.out.as_deref(), &io::report_to_json(&report)?)?;
    if let Some(csv) = &args.csv {
        io::write_decay_csv(csv, &report.decay_rows)?;
    }
    for r in &report.records {
        let weight = r.weight.as_deref().map(|w| format!(" [{w}]")).unwrap_or_default();
        eprintln!(
            "{:<13} {}{weight}: residual {:.3e} (tol {:.1e})",
            format!("{:?}", r.status).to_uppercase(),
            r.name,
            r.residual,
            r.tolerance
        );
    }
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report.records.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
        Err(Failure::Numerical(format!("hard checks failed: {}", failed.join(", "))))
    }
}

#[derive(Serialize)]
struct NormRow {
    weight: String,
    f: f64,
    a: f64,
    b: f64,
    sinh_bound: f64,
}

#[derive(Serialize)]
struct NormsReport {
    support: Option<(i64, i64)>,
    f_l2: f64,
    b_l2: f64,
    a_star_at_zero: f64,
    determinant_residual: f64,
    weighted: Vec<NormRow>,
}

fn cmd_norms(args: &Common) -> CmdResult {
    let cfg = config(args)?;
    let f = read_potential(args)?;
    let pair = nlft_forward(&f)?;
    let opts = cfg.suite_options()?;
    let weighted = opts
        .weights
        .iter()
        .map(|w| NormRow {
            weight: w.to_string(),
            f: f.weighted_l1_norm(w),
            a: pair.a.weighted_l1_norm(w),
            b: pair.b.weighted_l1_norm(w),
            sinh_bound: check_sinh_bound(&f, &pair.b, w).rhs,
        })
        .collect();
    let report = NormsReport {
        support: f.support(),
        f_l2: f.l2_norm(),
        b_l2: pair.b.l2_norm(),
        a_star_at_zero: pair.a_star_at_zero().re,
        determinant_residual: pair.grid_residual,
        weighted,
    };
    emit(args.out.as_deref(), &io::to_json(&report)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Forward(a) => cmd_forward(a),
        Command::Inverse(a) => cmd_inverse(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Norms(a) => cmd_norms(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
