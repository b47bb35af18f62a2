//! Settings resolution: built-in defaults, then the config file, then flags.
//!
//! Config files are `key = value` lines. Top-level keys set run options;
//! `[lp]`, `[penalized]` and `[penalized-fast]` sections hold decoder
//! parameters and apply only when that decoder is selected.

use std::collections::HashMap;
use std::path::PathBuf;

use ini::Ini;
use nbldpc::sim::{embedding_from_name, DecoderKind, DecoderSpec};

use crate::error::CliError;

const GENERAL_KEYS: [&str; 10] =
    ["code", "decoder", "embedding", "snr", "trials", "min_word_errors", "seed", "workers", "out", "labels"];
const DECODER_KEYS: [&str; 11] =
    ["mu", "rho", "alpha", "tmax", "eps", "early_term", "embedding", "inner_mu", "inner_rho", "inner_eps", "inner_tmax"];
const SECTIONS: [&str; 3] = ["lp", "penalized", "penalized-fast"];

/// Parsed config file, keys validated but values still raw.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    pub general: HashMap<String, String>,
    pub sections: HashMap<String, HashMap<String, String>>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config(format!("config syntax: {e}")))?;
        let mut cfg = FileConfig::default();
        for (section, props) in ini.iter() {
            let (allowed, target): (&[&str], &mut HashMap<String, String>) = match section {
                None => (&GENERAL_KEYS, &mut cfg.general),
                Some(name) if SECTIONS.contains(&name) => (&DECODER_KEYS, cfg.sections.entry(name.to_string()).or_default()),
                Some(name) => return Err(CliError::Config(format!("unknown section [{name}]"))),
            };
            for (k, v) in props.iter() {
                if !allowed.contains(&k) {
                    let place = section.map(|s| format!("[{s}]")).unwrap_or_else(|| "top level".into());
                    return Err(CliError::Config(format!("unknown key '{k}' at {place}")));
                }
                target.insert(k.to_string(), v.trim().to_string());
            }
        }
        Ok(cfg)
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Default, Clone)]
pub struct FlagValues {
    pub code: Option<String>,
    pub decoder: Option<String>,
    pub penalized_fast: bool,
    pub embedding: Option<String>,
    pub snr: Option<String>,
    pub mu: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub tmax: Option<usize>,
    pub eps: Option<f64>,
    pub no_early_term: bool,
    pub trials: Option<u64>,
    pub min_word_errors: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub code: String,
    pub decoder: DecoderSpec,
    pub snrs: Vec<f64>,
    pub trials: u64,
    pub min_word_errors: Option<u64>,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    /// PSK position of each field element; natural labelling when absent.
    pub labels: Option<Vec<usize>>,
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim().parse().map_err(|_| CliError::Config(format!("invalid value for {key}: '{raw}'")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("invalid value for {key}: '{raw}'"))),
    }
}

/// Parses `a,b,c` or an inclusive range `start:step:stop`.
pub fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>, CliError> {
    let raw = raw.trim();
    let parts: Vec<&str> = raw.split(':').collect();
    let values = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) =
                (parse_value(key, start)?, parse_value(key, step)?, parse_value(key, stop)?);
            if !(step > 0.0) || stop < start {
                return Err(CliError::Config(format!("invalid range for {key}: '{raw}'")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // Round to tame accumulated binary error in printed values.
            (0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
        }
        [_] => raw.split(',').map(|s| parse_value(key, s)).collect::<Result<Vec<f64>, _>>()?,
        _ => return Err(CliError::Config(format!("invalid list for {key}: '{raw}'"))),
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("empty list for {key}")));
    }
    Ok(values)
}

fn apply_decoder_key(spec: &mut DecoderSpec, key: &str, raw: &str) -> Result<(), CliError> {
    match key {
        "mu" => spec.mu = parse_value(key, raw)?,
        "rho" => spec.rho = parse_value(key, raw)?,
        "alpha" => spec.alpha = parse_value(key, raw)?,
        "tmax" => spec.t_max = parse_value(key, raw)?,
        "eps" => spec.eps = parse_value(key, raw)?,
        "early_term" => spec.early_term = parse_bool(key, raw)?,
        "embedding" => {
            spec.embedding =
                embedding_from_name(raw).ok_or_else(|| CliError::Config(format!("unknown embedding '{raw}'")))?
        }
        "inner_mu" => spec.inner.mu = parse_value(key, raw)?,
        "inner_rho" => spec.inner.rho = parse_value(key, raw)?,
        "inner_eps" => spec.inner.eps = parse_value(key, raw)?,
        "inner_tmax" => spec.inner.t_max = parse_value(key, raw)?,
        _ => return Err(CliError::Config(format!("unknown decoder key '{key}'"))),
    }
    Ok(())
}

/// Merges defaults, the optional config file and the flags.
pub fn resolve(file: Option<&FileConfig>, flags: &FlagValues) -> Result<Settings, CliError> {
    let empty = FileConfig::default();
    let file = file.unwrap_or(&empty);
    let general = |k: &str| file.general.get(k).map(String::as_str);

    let decoder_name = if flags.penalized_fast {
        DecoderKind::PenalizedFast.name().to_string()
    } else {
        flags.decoder.clone().or_else(|| general("decoder").map(str::to_string)).unwrap_or_else(|| "lp".into())
    };
    let kind = DecoderKind::from_name(&decoder_name)
        .ok_or_else(|| CliError::Config(format!("unknown decoder '{decoder_name}' (lp, penalized, penalized-fast)")))?;

    let mut spec = DecoderSpec::defaults(kind);
    if let Some(raw) = general("embedding") {
        apply_decoder_key(&mut spec, "embedding", raw)?;
    }
    if let Some(section) = file.sections.get(kind.name()) {
        let mut keys: Vec<_> = section.iter().collect();
        keys.sort();
        for (k, v) in keys {
            apply_decoder_key(&mut spec, k, v)?;
        }
    }
    if let Some(e) = &flags.embedding {
        apply_decoder_key(&mut spec, "embedding", e)?;
    }
    if kind != DecoderKind::Lp && spec.embedding != nbldpc::embedding::EmbeddingKind::ConstantWeight {
        return Err(CliError::Config("the penalized decoders require the constant-weight embedding".into()));
    }
    spec.mu = flags.mu.unwrap_or(spec.mu);
    spec.rho = flags.rho.unwrap_or(spec.rho);
    spec.alpha = flags.alpha.unwrap_or(spec.alpha);
    spec.t_max = flags.tmax.unwrap_or(spec.t_max);
    spec.eps = flags.eps.unwrap_or(spec.eps);
    if flags.no_early_term {
        spec.early_term = false;
    }

    let snr_raw = flags.snr.clone().or_else(|| general("snr").map(str::to_string)).unwrap_or_else(|| "5.0".into());
    let opt_u64 = |flag: Option<u64>, key: &str| -> Result<Option<u64>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => general(key).map(|r| parse_value(key, r)).transpose(),
        }
    };
    let workers = match flags.workers {
        Some(w) => w,
        None => general("workers").map(|r| parse_value("workers", r)).transpose()?.unwrap_or(1),
    };
    if workers == 0 {
        return Err(CliError::Config("workers must be at least 1".into()));
    }
    let trials = opt_u64(flags.trials, "trials")?.unwrap_or(1000);
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    Ok(Settings {
        code: flags.code.clone().or_else(|| general("code").map(str::to_string)).unwrap_or_else(|| "tanner1055-gf4".into()),
        decoder: spec,
        snrs: parse_list("snr", &snr_raw)?,
        trials,
        min_word_errors: opt_u64(flags.min_word_errors, "min_word_errors")?,
        seed: opt_u64(flags.seed, "seed")?.unwrap_or(1),
        workers,
        out: flags.out.clone().or_else(|| general("out").map(PathBuf::from)),
        labels: general("labels")
            .map(|raw| raw.split(',').map(|t| parse_value("labels", t)).collect::<Result<Vec<usize>, _>>())
            .transpose()?,
    })
}
