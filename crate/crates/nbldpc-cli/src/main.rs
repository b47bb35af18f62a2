//! `nbldpc`: decode single words, run error-rate sweeps, and check the
//! decoders against brute-force references.

mod config;
mod error;
mod selftest;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nbldpc::code_model::{BundledCode, NonbinaryCode};
use nbldpc::gf2m::FieldCtx;
use nbldpc::oracle::validate_conjecture_gf4;
use nbldpc::channel::Modulation;
use nbldpc::sim::{param_grid, run_sweep_with, write_csv, write_outputs, CodewordPolicy, GridParam, SimConfig, SimRecord};

use config::{parse_list, resolve, FileConfig, FlagValues, Settings};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "nbldpc", version, about = "ADMM LP and penalized decoding of non-binary LDPC codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decode one word from per-symbol LLRs (one symbol per line) on stdin.
    Decode {
        #[command(flatten)]
        common: CommonArgs,
        /// Read LLRs from this file instead of stdin.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Word-error-rate sweep over SNR points.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep one decoder parameter with matched noise, e.g. `--grid mu=0.5:0.5:3.5`.
    ParamSweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        grid: String,
    },
    /// Compare relaxed and exact GF(4) check-polytope projections on random points.
    Conjecture {
        /// Check length.
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Report file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the fast paths against the reference solvers.
    Selftest,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Config file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled code name or alist file path.
    #[arg(long)]
    code: Option<String>,
    /// lp, penalized or penalized-fast.
    #[arg(long)]
    decoder: Option<String>,
    /// flanagan or cw (LP decoder only).
    #[arg(long)]
    embedding: Option<String>,
    /// Es/N0 values in dB: `a,b,c` or `start:step:stop`.
    #[arg(long)]
    snr: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    /// Disable early termination.
    #[arg(long)]
    no_early_term: bool,
    /// Trials per point (a cap when --min-word-errors is set).
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    min_word_errors: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV; a `.timing.csv` sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fold the penalty into the LP decoder's x-update (faster, no
    /// codeword-independence guarantee).
    #[arg(long)]
    penalized_fast: bool,
}

impl CommonArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => Some(FileConfig::parse(&read_file(path)?)?),
            None => None,
        };
        let flags = FlagValues {
            code: self.code.clone(),
            decoder: self.decoder.clone(),
            penalized_fast: self.penalized_fast,
            embedding: self.embedding.clone(),
            snr: self.snr.clone(),
            mu: self.mu,
            rho: self.rho,
            alpha: self.alpha,
            tmax: self.tmax,
            eps: self.eps,
            no_early_term: self.no_early_term,
            trials: self.trials,
            min_word_errors: self.min_word_errors,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
        };
        resolve(file.as_ref(), &flags)
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Loads a bundled code by name, otherwise an alist file.
fn load_code(name: &str) -> Result<(String, NonbinaryCode, FieldCtx), CliError> {
    let (label, code) = match BundledCode::from_name(name) {
        Some(b) => (b.name().to_string(), b.build()),
        None => {
            let path = Path::new(name);
            let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| name.to_string());
            (label, NonbinaryCode::load(path)?)
        }
    };
    let ctx = code.field()?;
    Ok((label, code, ctx))
}

fn sim_configs(s: &Settings, label: &str) -> Vec<SimConfig> {
    s.snrs
        .iter()
        .map(|&snr| SimConfig {
            code_name: label.to_string(),
            snr_db: snr,
            decoder: s.decoder,
            max_trials: s.trials,
            min_word_errors: s.min_word_errors,
            seed: s.seed,
            codewords: CodewordPolicy::AllZero,
        })
        .collect()
}

fn modulation(s: &Settings, ctx: &FieldCtx) -> Result<Modulation, CliError> {
    let m = match &s.labels {
        Some(labels) => Modulation::labelled_psk(labels),
        None => Modulation::psk(ctx.q()),
    };
    m.map_err(|e| CliError::Config(e.to_string()))
}

fn emit(records: &[SimRecord], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => write_outputs(path, records)?,
        None => write_csv(std::io::stdout().lock(), records)?,
    }
    Ok(())
}

fn cmd_decode(common: &CommonArgs, input: Option<&Path>) -> Result<(), CliError> {
    let s = common.settings()?;
    let (_, code, ctx) = load_code(&s.code)?;
    let text = match input {
        Some(p) => read_file(p)?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|source| CliError::Io { path: "<stdin>".into(), source })?;
            buf
        }
    };
    let per_symbol = s.decoder.llr_kind().symbol_len(ctx.q());
    let mut llr = Vec::with_capacity(per_symbol * code.n());
    for (ln, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#')) {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| CliError::Usage(format!("line {}: bad number '{t}'", ln + 1))))
            .collect::<Result<_, _>>()?;
        if row.len() != per_symbol {
            return Err(CliError::Usage(format!("line {}: expected {per_symbol} values, found {}", ln + 1, row.len())));
        }
        llr.extend(row);
    }
    if llr.len() != per_symbol * code.n() {
        return Err(CliError::Usage(format!("expected {} symbols, found {}", code.n(), llr.len() / per_symbol)));
    }
    let mut dec = s.decoder.build(&ctx, &code).map_err(|e| CliError::Config(e.to_string()))?;
    let outcome = dec.decode(&llr).map_err(|e| CliError::Config(e.to_string()))?;
    let word: Vec<String> = outcome.word.iter().map(|a| a.to_string()).collect();
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", word.join(" ")).and_then(|_| {
        writeln!(stdout, "status={:?} iterations={} degraded_inner={}", outcome.status, outcome.iterations, outcome.degraded_inner)
    })
    .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn cmd_sweep(common: &CommonArgs) -> Result<(), CliError> {
    let s = common.settings()?;
    let (label, code, ctx) = load_code(&s.code)?;
    let records = run_sweep_with(&ctx, &code, &sim_configs(&s, &label), s.workers, &modulation(&s, &ctx)?)?;
    emit(&records, s.out.as_deref())
}

fn cmd_param_sweep(common: &CommonArgs, grid: &str) -> Result<(), CliError> {
    let s = common.settings()?;
    let (name, values) =
        grid.split_once('=').ok_or_else(|| CliError::Usage(format!("--grid expects name=values, got '{grid}'")))?;
    let param = GridParam::from_name(name.trim())
        .ok_or_else(|| CliError::Usage(format!("--grid parameter must be mu, rho or alpha, got '{name}'")))?;
    let values = parse_list("grid", values)?;
    let (label, code, ctx) = load_code(&s.code)?;
    let configs: Vec<SimConfig> = sim_configs(&s, &label).iter().flat_map(|c| param_grid(c, param, &values)).collect();
    let records = run_sweep_with(&ctx, &code, &configs, s.workers, &modulation(&s, &ctx)?)?;
    emit(&records, s.out.as_deref())
}

fn cmd_conjecture(d: usize, trials: usize, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let r = validate_conjecture_gf4(d, trials, seed)?;
    let report = format!(
        "d = {}\ntrials = {}\nseed = {seed}\nmax_diff = {:e}\nmean_diff = {:e}\n",
        r.d, r.trials, r.max_diff, r.mean_diff
    );
    match out {
        Some(path) => std::fs::write(path, report).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            print!("{report}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Decode { common, input } => cmd_decode(common, input.as_deref()),
        Command::Sweep { common } => cmd_sweep(common),
        Command::ParamSweep { common, grid } => cmd_param_sweep(common, grid),
        Command::Conjecture { d, trials, seed, out } => cmd_conjecture(*d, *trials, *seed, out.as_deref()),
        Command::Selftest => selftest::run(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
