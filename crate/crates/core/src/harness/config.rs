//! Run configuration and its plain-text `key = value` form.

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, GeParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    /// Hard-decision Berlekamp-Massey.
    Bm,
    /// Plain OSD on channel LLRs.
    Osd,
    /// Fused scores, both pattern families.
    SemOsd,
    /// Fused scores, bit-flip family only.
    SemOsdBit,
    /// Fused scores, byte-substitution family only.
    SemOsdByte,
}

impl DecoderKind {
    pub fn uses_prior(self) -> bool {
        matches!(self, Self::SemOsd | Self::SemOsdBit | Self::SemOsdByte)
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bm" => Ok(Self::Bm),
            "osd" => Ok(Self::Osd),
            "semosd" | "sem-osd" => Ok(Self::SemOsd),
            "semosd-bit" | "sem-osd-bit" => Ok(Self::SemOsdBit),
            "semosd-byte" | "sem-osd-byte" => Ok(Self::SemOsdByte),
            _ => Err(Error::Config(format!("unknown decoder {s:?} (bm, osd, semosd, semosd-bit, semosd-byte)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorKind {
    Uniform,
    /// Mass `oracle_q` on the true byte; for experiments only.
    Oracle,
    /// Byte n-gram denoiser, loaded from `prior_model` or trained on the corpus split.
    Ngram,
    /// External server at `prior_endpoint`.
    Remote,
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "oracle" => Ok(Self::Oracle),
            "ngram" => Ok(Self::Ngram),
            "remote" => Ok(Self::Remote),
            _ => Err(Error::Config(format!("unknown prior {s:?} (uniform, oracle, ngram, remote)"))),
        }
    }
}

/// What to do when the prior backend fails on a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FallbackPolicy {
    /// Count the block as an error.
    Fail,
    /// Decode with a uniform prior instead.
    Uniform,
}

impl FromStr for FallbackPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fail" => Ok(Self::Fail),
            "uniform" => Ok(Self::Uniform),
            _ => Err(Error::Config(format!("unknown fallback {s:?} (fail, uniform)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub code: String,
    pub channel: ChannelKind,
    /// Rate used to convert Eb/N0 to noise variance; the code rate when unset.
    pub rate: Option<f64>,
    /// Fixed block-average noise variance, overriding the Eb/N0 conversion.
    pub noise_var: Option<f64>,
    pub decoder: DecoderKind,
    pub m: usize,
    pub omega: usize,
    pub t: usize,
    pub alpha: f64,
    pub early_stop: Option<f64>,
    pub prior: PriorKind,
    pub oracle_q: f64,
    pub ngram_order: usize,
    pub ngram_delta: f64,
    pub flip_rate: f64,
    pub prior_model: Option<PathBuf>,
    pub prior_endpoint: Option<String>,
    pub prior_timeout_ms: u64,
    pub fallback: FallbackPolicy,
    pub ebn0_db: Vec<f64>,
    pub max_blocks: u64,
    pub min_block_errors: u64,
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    pub workers: usize,
    pub corpus: Option<PathBuf>,
    pub min_len: usize,
    pub max_len: usize,
    pub train_ratio: f64,
    pub output: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            code: "rs16_8".into(),
            channel: ChannelKind::Awgn,
            rate: None,
            noise_var: None,
            decoder: DecoderKind::Osd,
            m: 3,
            omega: 2,
            t: 16,
            alpha: 0.5,
            early_stop: None,
            prior: PriorKind::Uniform,
            oracle_q: 0.9,
            ngram_order: 5,
            ngram_delta: 0.01,
            flip_rate: 0.1,
            prior_model: None,
            prior_endpoint: None,
            prior_timeout_ms: 10_000,
            fallback: FallbackPolicy::Fail,
            ebn0_db: vec![1.0],
            max_blocks: 10_000,
            min_block_errors: 100,
            seed: 1,
            workers: 0,
            corpus: None,
            min_len: 60,
            max_len: 64,
            train_ratio: 0.9,
            output: None,
            json: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("bad value {value:?} for {key}")))
}

fn ge_mut(cfg: &mut RunConfig) -> &mut GeParams {
    if !matches!(cfg.channel, ChannelKind::GilbertElliott(_)) {
        cfg.channel = ChannelKind::GilbertElliott(GeParams::default());
    }
    match &mut cfg.channel {
        ChannelKind::GilbertElliott(ge) => ge,
        ChannelKind::Awgn => unreachable!(),
    }
}

/// `a,b,c` or an inclusive range `start:step:stop`.
pub fn parse_grid(value: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 3 {
        let (a, s, b): (f64, f64, f64) = (parse("ebn0", parts[0])?, parse("ebn0", parts[1])?, parse("ebn0", parts[2])?);
        if s <= 0.0 || b < a {
            return Err(Error::Config(format!("bad grid {value:?}")));
        }
        let steps = ((b - a) / s + 1e-9).floor() as usize;
        return Ok((0..=steps).map(|i| a + i as f64 * s).collect());
    }
    value.split(',').map(|v| parse("ebn0", v.trim())).collect()
}

fn optional<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.is_empty() || value == "none" {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

impl RunConfig {
    /// Set one field by its key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "code" => self.code = value.to_string(),
            "channel" => {
                self.channel = match value {
                    "awgn" => ChannelKind::Awgn,
                    "ge" | "gilbert_elliott" | "gilbert-elliott" => ChannelKind::GilbertElliott(GeParams::default()),
                    _ => return Err(Error::Config(format!("unknown channel {value:?} (awgn, ge)"))),
                }
            }
            "ge_pi_b" => ge_mut(self).pi_b = parse(key, value)?,
            "ge_burst" => ge_mut(self).mean_burst = parse(key, value)?,
            "ge_rho_sq" => ge_mut(self).rho_sq = parse(key, value)?,
            "rate" => self.rate = optional(key, value)?,
            "noise_var" => self.noise_var = optional(key, value)?,
            "decoder" => self.decoder = value.parse()?,
            "m" => self.m = parse(key, value)?,
            "omega" => self.omega = parse(key, value)?,
            "t" => self.t = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "early_stop" => self.early_stop = optional(key, value)?,
            "prior" => self.prior = value.parse()?,
            "oracle_q" => self.oracle_q = parse(key, value)?,
            "ngram_order" => self.ngram_order = parse(key, value)?,
            "ngram_delta" => self.ngram_delta = parse(key, value)?,
            "flip_rate" => self.flip_rate = parse(key, value)?,
            "prior_model" => self.prior_model = optional(key, value)?,
            "prior_endpoint" => self.prior_endpoint = optional(key, value)?,
            "prior_timeout_ms" => self.prior_timeout_ms = parse(key, value)?,
            "fallback" => self.fallback = value.parse()?,
            "ebn0" | "ebn0_db" => self.ebn0_db = parse_grid(value)?,
            "max_blocks" => self.max_blocks = parse(key, value)?,
            "min_block_errors" => self.min_block_errors = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "corpus" => self.corpus = optional(key, value)?,
            "min_len" => self.min_len = parse(key, value)?,
            "max_len" => self.max_len = parse(key, value)?,
            "train_ratio" => self.train_ratio = parse(key, value)?,
            "output" => self.output = optional(key, value)?,
            "json" => self.json = optional(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            self.set(k, v).map_err(|e| Error::Config(format!("line {}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Checks that do not need the file system.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.ebn0_db.is_empty() {
            return bad("empty Eb/N0 grid".into());
        }
        if self.max_blocks == 0 {
            return bad("max_blocks must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        if self.decoder.uses_prior() && self.corpus.is_none() {
            return bad(format!("decoder {:?} needs a corpus", self.decoder));
        }
        if self.decoder.uses_prior() && self.prior == PriorKind::Remote && self.prior_endpoint.is_none() {
            return bad("remote prior needs prior_endpoint".into());
        }
        if let Some(r) = self.rate {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("rate {r} must lie in (0, 1]"));
            }
        }
        if let Some(v) = self.noise_var {
            if !(v > 0.0) {
                return bad(format!("noise_var {v} must be positive"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_overrides_defaults() {
        let cfg = RunConfig::from_text(
            "# GE sweep\ncode = bch127_64\nchannel = ge\nge_burst = 8\ndecoder = semosd-byte\nebn0 = 4:2:14\nalpha=0.1\n",
        )
        .unwrap();
        assert_eq!(cfg.code, "bch127_64");
        assert_eq!(cfg.decoder, DecoderKind::SemOsdByte);
        assert_eq!(cfg.ebn0_db, vec![4.0, 6.0, 8.0, 10.0, 12.0, 14.0]);
        assert_eq!(cfg.channel, ChannelKind::GilbertElliott(GeParams { mean_burst: 8.0, ..GeParams::default() }));
        assert_eq!(cfg.alpha, 0.1);
        assert_eq!(cfg.m, RunConfig::default().m);
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0,0.5, 1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0:0.25:1").unwrap().len(), 5);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn errors() {
        assert!(RunConfig::from_text("bogus = 1").is_err());
        assert!(RunConfig::from_text("m = three").is_err());
        assert!(RunConfig::from_text("just words").is_err());
        let mut cfg = RunConfig::default();
        cfg.set("decoder", "semosd").unwrap();
        assert!(cfg.validate().is_err());
        cfg.set("corpus", "x.txt").unwrap();
        assert!(cfg.validate().is_ok());
        cfg.set("prior", "remote").unwrap();
        assert!(cfg.validate().is_err());
    }
}
