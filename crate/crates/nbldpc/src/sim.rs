//! Monte-Carlo word- and symbol-error simulation over the AWGN channel.
//!
//! Trial `t` draws its noise from `trial_rng(seed, t)` only, so results do
//! not depend on the worker count and every point of a parameter grid sees
//! the same noise. Trials run in fixed-size batches; the word-error target
//! is checked between batches.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{sigma_from_esn0, trial_rng, ChannelError, Modulation};
use crate::code_model::{CodeError, NonbinaryCode};
use crate::decoder_admm_lp::{DecodeOutcome, DecodeStatus, LpDecoder, LpParams, ParamError};
use crate::decoder_penalized::{InnerParams, PenalizedDecoder, PenalizedParams};
use crate::embedding::EmbeddingKind;
use crate::gf2m::{Elem, FieldCtx};

/// Trials per batch; the stopping rule is evaluated only at batch ends.
pub const BATCH: u64 = 256;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Which decoder to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Lp,
    Penalized,
    /// Penalty folded into the LP decoder's closed-form x-update. Not
    /// covered by the codeword-independence argument.
    PenalizedFast,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Lp => "lp",
            DecoderKind::Penalized => "penalized",
            DecoderKind::PenalizedFast => "penalized-fast",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "lp" => Some(DecoderKind::Lp),
            "penalized" => Some(DecoderKind::Penalized),
            "penalized-fast" => Some(DecoderKind::PenalizedFast),
            _ => None,
        }
    }
}

/// Embedding name used in configs and CSV output.
pub fn embedding_name(kind: EmbeddingKind) -> &'static str {
    match kind {
        EmbeddingKind::Flanagan => "flanagan",
        EmbeddingKind::ConstantWeight => "cw",
    }
}

pub fn embedding_from_name(s: &str) -> Option<EmbeddingKind> {
    match s {
        "flanagan" => Some(EmbeddingKind::Flanagan),
        "cw" | "constant-weight" => Some(EmbeddingKind::ConstantWeight),
        _ => None,
    }
}

/// Decoder choice plus every tunable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    /// LP decoder embedding; the penalized decoders always use constant weight.
    pub embedding: EmbeddingKind,
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub t_max: usize,
    pub eps: f64,
    pub early_term: bool,
    pub inner: InnerParams,
}

impl DecoderSpec {
    /// Defaults for `kind`: `mu = 2, rho = 1.9, T = 200` for LP decoding,
    /// `mu = 4, rho = 1.5, alpha = 0.6, T = 100` for the penalized decoders.
    pub fn defaults(kind: DecoderKind) -> Self {
        match kind {
            DecoderKind::Lp => {
                let p = LpParams::default();
                Self {
                    kind,
                    embedding: p.kind,
                    mu: p.mu,
                    rho: p.rho,
                    alpha: 0.0,
                    t_max: p.t_max,
                    eps: p.eps,
                    early_term: p.early_term,
                    inner: InnerParams::default(),
                }
            }
            DecoderKind::Penalized | DecoderKind::PenalizedFast => {
                let p = PenalizedParams::default();
                Self {
                    kind,
                    embedding: EmbeddingKind::ConstantWeight,
                    mu: p.mu,
                    rho: p.rho,
                    alpha: p.alpha,
                    t_max: p.t_max,
                    eps: p.eps,
                    early_term: p.early_term,
                    inner: p.inner,
                }
            }
        }
    }

    /// Embedding the decoder consumes LLRs in.
    pub fn llr_kind(&self) -> EmbeddingKind {
        match self.kind {
            DecoderKind::Lp => self.embedding,
            _ => EmbeddingKind::ConstantWeight,
        }
    }

    pub fn lp_params(&self) -> LpParams {
        LpParams {
            mu: self.mu,
            rho: self.rho,
            t_max: self.t_max,
            eps: self.eps,
            early_term: self.early_term,
            kind: self.llr_kind(),
            alpha: if self.kind == DecoderKind::PenalizedFast { self.alpha } else { 0.0 },
        }
    }

    pub fn penalized_params(&self) -> PenalizedParams {
        PenalizedParams {
            mu: self.mu,
            rho: self.rho,
            alpha: self.alpha,
            t_max: self.t_max,
            eps: self.eps,
            early_term: self.early_term,
            inner: self.inner,
        }
    }

    /// Instantiates the decoder, validating every parameter.
    pub fn build<'a>(&self, ctx: &'a FieldCtx, code: &'a NonbinaryCode) -> Result<AnyDecoder<'a>, ParamError> {
        match self.kind {
            DecoderKind::Penalized => Ok(AnyDecoder::Penalized(PenalizedDecoder::new(ctx, code, self.penalized_params())?)),
            _ => Ok(AnyDecoder::Lp(LpDecoder::new(ctx, code, self.lp_params())?)),
        }
    }
}

/// Either decoder behind one interface.
pub enum AnyDecoder<'a> {
    Lp(LpDecoder<'a>),
    Penalized(PenalizedDecoder<'a>),
}

impl AnyDecoder<'_> {
    pub fn decode(&mut self, llr: &[f64]) -> Result<DecodeOutcome, ParamError> {
        match self {
            AnyDecoder::Lp(d) => d.decode(llr),
            AnyDecoder::Penalized(d) => d.decode(llr),
        }
    }
}

/// Which codeword each trial transmits.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CodewordPolicy {
    #[default]
    AllZero,
    /// Uniform choice from a stored list, drawn from the trial's generator
    /// before the noise.
    FromList(Vec<Vec<Elem>>),
}

/// All codewords of a small code, by exhaustive search.
pub fn enumerate_codewords(ctx: &FieldCtx, code: &NonbinaryCode, limit: usize) -> Result<Vec<Vec<Elem>>, SimError> {
    let q = ctx.q();
    let n = code.n();
    if (q as f64).powi(n as i32) > limit as f64 {
        return Err(SimError::Config(format!("exhaustive search over {q}^{n} words exceeds {limit}")));
    }
    let mut out = Vec::new();
    let mut word = vec![0 as Elem; n];
    loop {
        if code.syndrome_ok(ctx, &word) {
            out.push(word.clone());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            word[pos] += 1;
            if (word[pos] as usize) < q {
                break;
            }
            word[pos] = 0;
        }
    }
}

/// One simulation point.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub code_name: String,
    pub snr_db: f64,
    pub decoder: DecoderSpec,
    /// Trial cap (exact trial count when `min_word_errors` is unset).
    pub max_trials: u64,
    pub min_word_errors: Option<u64>,
    pub seed: u64,
    pub codewords: CodewordPolicy,
}

/// Aggregated results for one point; see [`write_csv`] for the schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRecord {
    pub code: String,
    pub decoder: &'static str,
    pub embedding: &'static str,
    pub snr_db: f64,
    pub mu: f64,
    pub rho: f64,
    pub alpha: f64,
    pub t_max: usize,
    pub eps: f64,
    pub early_term: bool,
    pub seed: u64,
    pub trials: u64,
    pub word_errors: u64,
    pub symbol_errors: u64,
    pub wer: f64,
    pub ser: f64,
    pub iters_mean: f64,
    pub iters_mean_correct: Option<f64>,
    pub iters_mean_error: Option<f64>,
    pub early_term_count: u64,
    pub degraded_inner_count: u64,
    #[serde(skip)]
    pub time_ms_mean: f64,
    #[serde(skip)]
    pub time_ms_mean_correct: Option<f64>,
    #[serde(skip)]
    pub time_ms_mean_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    trials: u64,
    word_errors: u64,
    symbol_errors: u64,
    iters_correct: u64,
    iters_error: u64,
    time_correct: f64,
    time_error: f64,
    early: u64,
    degraded: u64,
}

impl Tally {
    fn add(&mut self, o: &DecodeOutcome, sent: &[Elem]) {
        let sym = o.word.iter().zip(sent).filter(|(a, b)| a != b).count() as u64;
        let ms = o.wall_time.as_secs_f64() * 1e3;
        self.trials += 1;
        self.symbol_errors += sym;
        if sym > 0 {
            self.word_errors += 1;
            self.iters_error += o.iterations as u64;
            self.time_error += ms;
        } else {
            self.iters_correct += o.iterations as u64;
            self.time_correct += ms;
        }
        if o.status == DecodeStatus::CodewordEarly {
            self.early += 1;
        }
        self.degraded += o.degraded_inner as u64;
    }
}

fn ratio(num: f64, den: u64) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

fn record(cfg: &SimConfig, n: usize, t: &Tally) -> SimRecord {
    let d = &cfg.decoder;
    let correct = t.trials - t.word_errors;
    SimRecord {
        code: cfg.code_name.clone(),
        decoder: d.kind.name(),
        embedding: embedding_name(d.llr_kind()),
        snr_db: cfg.snr_db,
        mu: d.mu,
        rho: d.rho,
        alpha: if d.kind == DecoderKind::Lp { 0.0 } else { d.alpha },
        t_max: d.t_max,
        eps: d.eps,
        early_term: d.early_term,
        seed: cfg.seed,
        trials: t.trials,
        word_errors: t.word_errors,
        symbol_errors: t.symbol_errors,
        wer: ratio(t.word_errors as f64, t.trials).unwrap_or(0.0),
        ser: ratio(t.symbol_errors as f64, t.trials * n as u64).unwrap_or(0.0),
        iters_mean: ratio((t.iters_correct + t.iters_error) as f64, t.trials).unwrap_or(0.0),
        iters_mean_correct: ratio(t.iters_correct as f64, correct),
        iters_mean_error: ratio(t.iters_error as f64, t.word_errors),
        early_term_count: t.early,
        degraded_inner_count: t.degraded,
        time_ms_mean: ratio(t.time_correct + t.time_error, t.trials).unwrap_or(0.0),
        time_ms_mean_correct: ratio(t.time_correct, correct),
        time_ms_mean_error: ratio(t.time_error, t.word_errors),
    }
}

/// Word sent in trial `trial` plus its channel outputs.
pub fn trial_channel(
    policy: &CodewordPolicy,
    modulation: &Modulation,
    n: usize,
    sigma: f64,
    seed: u64,
    trial: u64,
) -> (Vec<Elem>, Vec<[f64; 2]>) {
    let mut rng = trial_rng(seed, trial);
    let word = match policy {
        CodewordPolicy::AllZero => vec![0; n],
        CodewordPolicy::FromList(list) => list[rng.gen_range(0..list.len())].clone(),
    };
    let ys = modulation.transmit(&word, sigma, &mut rng);
    (word, ys)
}

/// Runs one point on the current rayon pool with natural q-PSK.
pub fn run_point(ctx: &FieldCtx, code: &NonbinaryCode, cfg: &SimConfig) -> Result<SimRecord, SimError> {
    run_point_with(ctx, code, cfg, &Modulation::psk(ctx.q())?)
}

/// [`run_point`] with a caller-chosen constellation.
pub fn run_point_with(
    ctx: &FieldCtx,
    code: &NonbinaryCode,
    cfg: &SimConfig,
    modulation: &Modulation,
) -> Result<SimRecord, SimError> {
    if modulation.q() != ctx.q() {
        return Err(SimError::Config(format!("constellation has {} points, field has {}", modulation.q(), ctx.q())));
    }
    let sigma = sigma_from_esn0(cfg.snr_db, code.rate(ctx))?;
    if let CodewordPolicy::FromList(list) = &cfg.codewords {
        if list.is_empty() || list.iter().any(|w| w.len() != code.n()) {
            return Err(SimError::Config("codeword list is empty or has wrong lengths".into()));
        }
    }
    // Fail on bad parameters before any trial runs.
    cfg.decoder.build(ctx, code)?;
    let kind = cfg.decoder.llr_kind();
    let mut tally = Tally::default();
    let mut next = 0u64;
    while next < cfg.max_trials {
        if cfg.min_word_errors.is_some_and(|m| tally.word_errors >= m) {
            break;
        }
        let end = (next + BATCH).min(cfg.max_trials);
        let results: Vec<Result<(Vec<Elem>, DecodeOutcome), ParamError>> = (next..end)
            .into_par_iter()
            .map_init(
                || cfg.decoder.build(ctx, code).expect("parameters validated above"),
                |dec, t| {
                    let (word, ys) = trial_channel(&cfg.codewords, &modulation, code.n(), sigma, cfg.seed, t);
                    let llr = modulation.llr_word(&ys, sigma, kind);
                    dec.decode(&llr).map(|o| (word, o))
                },
            )
            .collect();
        for r in results {
            let (word, o) = r?;
            tally.add(&o, &word);
        }
        next = end;
    }
    Ok(record(cfg, code.n(), &tally))
}

/// Runs every configuration on a pool of `workers` threads, in order.
pub fn run_sweep(ctx: &FieldCtx, code: &NonbinaryCode, configs: &[SimConfig], workers: usize) -> Result<Vec<SimRecord>, SimError> {
    run_sweep_with(ctx, code, configs, workers, &Modulation::psk(ctx.q())?)
}

/// [`run_sweep`] with a caller-chosen constellation.
pub fn run_sweep_with(
    ctx: &FieldCtx,
    code: &NonbinaryCode,
    configs: &[SimConfig],
    workers: usize,
    modulation: &Modulation,
) -> Result<Vec<SimRecord>, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    pool.install(|| configs.iter().map(|c| run_point_with(ctx, code, c, modulation)).collect())
}

/// Parameter swept by [`param_grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridParam {
    Mu,
    Rho,
    Alpha,
}

impl GridParam {
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "mu" => Some(GridParam::Mu),
            "rho" => Some(GridParam::Rho),
            "alpha" => Some(GridParam::Alpha),
            _ => None,
        }
    }
}

/// Copies of `base` with one parameter replaced by each grid value. All
/// copies share the seed, hence the noise of every trial.
pub fn param_grid(base: &SimConfig, param: GridParam, values: &[f64]) -> Vec<SimConfig> {
    values
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            match param {
                GridParam::Mu => c.decoder.mu = v,
                GridParam::Rho => c.decoder.rho = v,
                GridParam::Alpha => c.decoder.alpha = v,
            }
            c
        })
        .collect()
}

/// Writes the deterministic columns of `records`, header included.
pub fn write_csv<W: Write>(out: W, records: &[SimRecord]) -> Result<(), SimError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Column order of [`write_csv`].
pub const CSV_HEADER: [&str; 21] = [
    "code",
    "decoder",
    "embedding",
    "snr_db",
    "mu",
    "rho",
    "alpha",
    "t_max",
    "eps",
    "early_term",
    "seed",
    "trials",
    "word_errors",
    "symbol_errors",
    "wer",
    "ser",
    "iters_mean",
    "iters_mean_correct",
    "iters_mean_error",
    "early_term_count",
    "degraded_inner_count",
];

/// Writes wall-clock means, which vary between runs, keyed by row index.
pub fn write_timing_csv<W: Write>(out: W, records: &[SimRecord]) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "snr_db", "time_ms_mean", "time_ms_mean_correct", "time_ms_mean_error"])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (i, r) in records.iter().enumerate() {
        w.write_record([
            i.to_string(),
            r.snr_db.to_string(),
            r.time_ms_mean.to_string(),
            opt(r.time_ms_mean_correct),
            opt(r.time_ms_mean_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `<path>` and the timing sidecar `<path>.timing.csv`.
pub fn write_outputs(path: &Path, records: &[SimRecord]) -> Result<(), SimError> {
    write_csv(std::fs::File::create(path)?, records)?;
    let mut side = path.as_os_str().to_owned();
    side.push(".timing.csv");
    write_timing_csv(std::fs::File::create(side)?, records)?;
    Ok(())
}
