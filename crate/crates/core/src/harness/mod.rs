//! Monte-Carlo BLER simulation.
//!
//! Trial `i` of grid point `p` draws everything from `trial_rng(seed, p, i)`.
//! Trials run in fixed-size batches in parallel and are accumulated in index
//! order, stopping at the exact trial that meets the stopping rule, so every
//! counter is independent of the worker count.

mod config;
mod output;

pub use config::{parse_grid, DecoderKind, FallbackPolicy, PriorKind, RunConfig};
pub use output::{write_json, CsvSink, CSV_HEADER};

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bm::{bm_decode_bits, BmStatus};
use crate::channel::{hard_bits, llr, Channel, ChannelConfig};
use crate::codes::{bits_to_bytes, by_name, bytes_to_bits, CodeSpec};
use crate::corpus::{block_index_range, load_sentences, make_trial, split_train_test, SENTENCE_BYTES};
use crate::error::{Error, Result};
use crate::fusion::{fuse, ScoreTable};
use crate::osd::{ByteTepParams, DecodeParams, Decoder, Family};
use crate::prior::{
    oracle_prior, Endpoint, NgramDenoiser, NgramModel, PriorBackend, PriorMatrix, RemotePrior, UniformPrior,
};
use crate::seed::trial_rng;

/// Trials per parallel batch. Fixed so results never depend on it.
pub const BATCH: u64 = 256;

/// Result of one trial.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialOutcome {
    pub block_error: bool,
    pub bit_errors: u64,
    pub byte_errors: u64,
    pub teps: u64,
    pub elapsed: Duration,
    pub winner: Option<Family>,
    pub tie: bool,
    pub early_stopped: bool,
    pub prior_failed: bool,
    pub bm_failed: bool,
}

/// Aggregate over one Eb/N0 point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub ebn0_db: f64,
    pub sigma_hat_sq: f64,
    pub blocks: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub byte_errors: u64,
    pub bler: f64,
    /// 95% normal-approximation half-width of the BLER estimate.
    pub ci_halfwidth: f64,
    /// Over information bits.
    pub ber: f64,
    /// Over information bytes; zero for codes that are not byte aligned.
    pub byte_error_rate: f64,
    pub mean_teps: f64,
    pub p50_teps: u64,
    pub p95_teps: u64,
    pub mean_ms: f64,
    /// Blocks won outright by each family; together with `ties` they sum to `blocks`
    /// for decoders that run both families.
    pub wins_bit: u64,
    pub wins_byte: u64,
    pub ties: u64,
    pub early_stops: u64,
    pub prior_failures: u64,
    pub bm_failures: u64,
}

impl PointStats {
    /// Every field except timing.
    pub fn same_counters(&self, other: &Self) -> bool {
        let strip = |s: &Self| Self { mean_ms: 0.0, ..s.clone() };
        strip(self) == strip(other)
    }

    /// Whether `other` has a lower BLER with the two 95% intervals disjoint.
    pub fn significantly_above(&self, other: &Self) -> bool {
        self.bler - self.ci_halfwidth > other.bler + other.ci_halfwidth
    }
}

#[derive(Default)]
struct Accumulator {
    blocks: u64,
    block_errors: u64,
    bit_errors: u64,
    byte_errors: u64,
    teps: Vec<u64>,
    elapsed: Duration,
    wins: [u64; 2],
    ties: u64,
    early_stops: u64,
    prior_failures: u64,
    bm_failures: u64,
}

impl Accumulator {
    fn add(&mut self, o: &TrialOutcome) {
        self.blocks += 1;
        self.block_errors += o.block_error as u64;
        self.bit_errors += o.bit_errors;
        self.byte_errors += o.byte_errors;
        self.teps.push(o.teps);
        self.elapsed += o.elapsed;
        match (o.winner, o.tie) {
            (_, true) => self.ties += 1,
            (Some(f), false) => self.wins[f as usize] += 1,
            (None, false) => {}
        }
        self.early_stops += o.early_stopped as u64;
        self.prior_failures += o.prior_failed as u64;
        self.bm_failures += o.bm_failed as u64;
    }

    fn finish(mut self, ebn0_db: f64, sigma_hat_sq: f64, k_b: usize, k: usize) -> PointStats {
        let n = self.blocks.max(1) as f64;
        let bler = self.block_errors as f64 / n;
        self.teps.sort_unstable();
        let pct = |q: f64| {
            if self.teps.is_empty() {
                0
            } else {
                self.teps[((q * self.teps.len() as f64).ceil() as usize).clamp(1, self.teps.len()) - 1]
            }
        };
        PointStats {
            ebn0_db,
            sigma_hat_sq,
            blocks: self.blocks,
            block_errors: self.block_errors,
            bit_errors: self.bit_errors,
            byte_errors: self.byte_errors,
            bler,
            ci_halfwidth: 1.96 * (bler * (1.0 - bler) / n).sqrt(),
            ber: self.bit_errors as f64 / (n * k_b as f64),
            byte_error_rate: if k == 0 { 0.0 } else { self.byte_errors as f64 / (n * k as f64) },
            mean_teps: self.teps.iter().sum::<u64>() as f64 / n,
            p50_teps: pct(0.5),
            p95_teps: pct(0.95),
            mean_ms: self.elapsed.as_secs_f64() * 1e3 / n,
            wins_bit: self.wins[0],
            wins_byte: self.wins[1],
            ties: self.ties,
            early_stops: self.early_stops,
            prior_failures: self.prior_failures,
            bm_failures: self.bm_failures,
        }
    }
}

/// A configured simulation: code, decoder tables, corpus and prior, ready to run.
pub struct Simulation {
    cfg: RunConfig,
    code: CodeSpec,
    decoder: Decoder,
    /// Evaluation sentences; empty means uniformly random messages.
    sentences: Vec<Vec<u8>>,
    backend: Option<Arc<dyn PriorBackend>>,
    pool: rayon::ThreadPool,
}

impl Simulation {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let code = by_name(&cfg.code)?;
        let decoder = Decoder::new(&code)?;
        if cfg.decoder == DecoderKind::Bm && code.symbol_code().is_none() && code.bch().is_none() {
            return Err(Error::Config(format!("no algebraic decoder for {}", code.name)));
        }
        let mut sentences = match &cfg.corpus {
            Some(path) => {
                if !code.is_byte_aligned() {
                    return Err(Error::NotByteAligned(code.name.clone()));
                }
                if SENTENCE_BYTES % code.k != 0 {
                    return Err(Error::Config(format!("{SENTENCE_BYTES}-byte sentences do not split into {}-byte blocks", code.k)));
                }
                block_index_range(SENTENCE_BYTES / code.k)?;
                load_sentences(path, cfg.min_len, cfg.max_len)?
            }
            None => Vec::new(),
        };
        let backend: Option<Arc<dyn PriorBackend>> = match (cfg.decoder.uses_prior(), cfg.prior) {
            (false, _) | (true, PriorKind::Oracle) => None,
            (true, PriorKind::Uniform) => Some(Arc::new(UniformPrior)),
            (true, PriorKind::Ngram) => {
                let model = match &cfg.prior_model {
                    Some(p) => NgramModel::load(p)?,
                    None => {
                        let (train, test) = split_train_test(&sentences, cfg.train_ratio, cfg.seed)?;
                        if test.is_empty() {
                            return Err(Error::EmptyCorpus("held-out split is empty".into()));
                        }
                        sentences = test;
                        NgramModel::train(&train, cfg.ngram_order, cfg.ngram_delta)?
                    }
                };
                Some(Arc::new(NgramDenoiser::new(Arc::new(model), cfg.flip_rate)?))
            }
            (true, PriorKind::Remote) => {
                let ep = Endpoint::parse(cfg.prior_endpoint.as_deref().unwrap_or_default())?;
                Some(Arc::new(RemotePrior::new(ep, Duration::from_millis(cfg.prior_timeout_ms))))
            }
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(Self { cfg, code, decoder, sentences, backend, pool })
    }

    /// Replace the prior backend, e.g. with an in-process test server client.
    pub fn with_backend(mut self, backend: Arc<dyn PriorBackend>) -> Self {
        self.backend = Some(backend);
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    pub fn sentences(&self) -> &[Vec<u8>] {
        &self.sentences
    }

    fn channel(&self, ebn0_db: f64) -> Result<Channel> {
        match self.cfg.noise_var {
            Some(v) => Channel::with_variance(self.cfg.channel, v),
            None => Channel::new(&ChannelConfig {
                kind: self.cfg.channel,
                ebn0_db,
                rate: self.cfg.rate.unwrap_or_else(|| self.code.rate()),
            }),
        }
    }

    fn decode_params(&self) -> DecodeParams {
        let c = &self.cfg;
        let bytes = Some(ByteTepParams { omega: c.omega, t: c.t });
        let (order, bytes) = match c.decoder {
            DecoderKind::Osd | DecoderKind::SemOsdBit => (Some(c.m), None),
            DecoderKind::SemOsd => (Some(c.m), bytes),
            DecoderKind::SemOsdByte => (None, bytes),
            DecoderKind::Bm => (None, None),
        };
        DecodeParams { order, bytes, early_stop: c.early_stop, prune: true }
    }

    /// Run one trial end to end.
    pub fn trial(&self, channel: &Channel, point: u64, index: u64) -> Result<TrialOutcome> {
        let code = &self.code;
        let mut rng = trial_rng(self.cfg.seed, point, index);
        let (msg, ctx) = if self.sentences.is_empty() {
            ((0..code.k_b).map(|_| rng.random_range(0..2u8)).collect::<Vec<_>>(), Vec::new())
        } else {
            let id = rng.random_range(0..self.sentences.len());
            let t = make_trial(&self.sentences[id], id, code.k, &mut rng)?;
            (bytes_to_bits(&t.block), t.ctx)
        };
        let c = code.encode(&msg)?;
        let obs = channel.transmit(&c, &mut rng);

        let start = Instant::now();
        let mut out = TrialOutcome::default();
        let decoded = match self.cfg.decoder {
            DecoderKind::Bm => {
                let (cw, status) = bm_decode_bits(code, &hard_bits(&obs.y))?;
                out.bm_failed = status == BmStatus::Failure;
                cw
            }
            DecoderKind::Osd => {
                let l = llr(&obs);
                let r = self.decoder.decode(&ScoreTable::channel_only(&l, code.k_b, code.k)?, &self.decode_params())?;
                out.teps = r.teps_evaluated;
                out.early_stopped = r.early_stopped;
                r.codeword
            }
            _ => {
                let l = llr(&obs);
                let hd = bits_to_bytes(&hard_bits(&obs.y[..code.k_b]))?;
                let truth = bits_to_bytes(&msg)?;
                let prior = match (self.cfg.prior, &self.backend) {
                    (PriorKind::Oracle, _) => oracle_prior(&truth, self.cfg.oracle_q),
                    (_, Some(b)) => b.query(&ctx, &hd),
                    (_, None) => Ok(PriorMatrix::uniform(code.k)),
                };
                let prior = match (prior, self.cfg.fallback) {
                    (Ok(p), _) => p,
                    (Err(e), FallbackPolicy::Uniform) => {
                        log::warn!("prior failed on trial {index}: {e}; using uniform");
                        out.prior_failed = true;
                        PriorMatrix::uniform(code.k)
                    }
                    (Err(e), FallbackPolicy::Fail) => {
                        log::warn!("prior failed on trial {index}: {e}; counting a block error");
                        out.prior_failed = true;
                        out.block_error = true;
                        out.bit_errors = code.k_b as u64;
                        out.byte_errors = code.k as u64;
                        out.elapsed = start.elapsed();
                        return Ok(out);
                    }
                };
                let scores = fuse(&l, Some(&prior), self.cfg.alpha, code.k_b, code.k)?;
                let r = self.decoder.decode(&scores, &self.decode_params())?;
                out.teps = r.teps_evaluated;
                out.early_stopped = r.early_stopped;
                out.winner = Some(r.winner);
                out.tie = r.tie;
                r.codeword
            }
        };
        out.elapsed = start.elapsed();
        out.block_error = decoded != c;
        out.bit_errors = decoded[..code.k_b].iter().zip(&msg).filter(|(a, b)| a != b).count() as u64;
        if code.is_byte_aligned() {
            out.byte_errors =
                decoded[..code.k_b].chunks(8).zip(msg.chunks(8)).filter(|(a, b)| a != b).count() as u64;
        }
        Ok(out)
    }

    /// All trials of grid point `point` until `max_blocks` or `min_block_errors`.
    pub fn run_point(&self, point: u64, ebn0_db: f64) -> Result<PointStats> {
        let channel = self.channel(ebn0_db)?;
        let mut acc = Accumulator::default();
        let max = self.cfg.max_blocks;
        let min_err = self.cfg.min_block_errors;
        let mut next = 0u64;
        'outer: while next < max {
            let end = (next + BATCH).min(max);
            let batch: Vec<TrialOutcome> = self.pool.install(|| {
                (next..end).into_par_iter().map(|i| self.trial(&channel, point, i)).collect::<Result<_>>()
            })?;
            for o in &batch {
                acc.add(o);
                if min_err > 0 && acc.block_errors >= min_err {
                    break 'outer;
                }
            }
            next = end;
        }
        let stats = acc.finish(ebn0_db, channel.calibration().sigma_hat_sq, self.code.k_b, self.code.k);
        log::info!(
            "{} {:?} at {:.2} dB: {} / {} blocks in error (BLER {:.3e})",
            self.code.name,
            self.cfg.decoder,
            ebn0_db,
            stats.block_errors,
            stats.blocks,
            stats.bler
        );
        Ok(stats)
    }

    /// Every grid point in order, appending CSV rows as they finish and writing
    /// JSON at the end when configured.
    pub fn run_sweep(&self) -> Result<Vec<PointStats>> {
        self.run_sweep_with(|_| {})
    }

    /// [`Simulation::run_sweep`], calling `on_point` after each point.
    pub fn run_sweep_with(&self, mut on_point: impl FnMut(&PointStats)) -> Result<Vec<PointStats>> {
        let mut sink = self.cfg.output.as_deref().map(CsvSink::open).transpose()?;
        let mut out = Vec::with_capacity(self.cfg.ebn0_db.len());
        for (i, &db) in self.cfg.ebn0_db.iter().enumerate() {
            let stats = self.run_point(i as u64, db)?;
            if let Some(s) = &mut sink {
                s.write(&stats)?;
            }
            on_point(&stats);
            out.push(stats);
        }
        if let Some(path) = &self.cfg.json {
            write_json(path, &self.cfg, &out)?;
        }
        Ok(out)
    }
}

/// Build and run a sweep.
pub fn run_sweep(cfg: RunConfig) -> Result<Vec<PointStats>> {
    Simulation::new(cfg)?.run_sweep()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_text(text).unwrap()
    }

    #[test]
    fn noiseless_blocks_never_fail() {
        for dec in ["bm", "osd"] {
            let c = cfg(&format!("decoder = {dec}\nnoise_var = 1e-9\nmax_blocks = 300\nm = 1\n"));
            let s = run_sweep(c).unwrap();
            assert_eq!(s[0].block_errors, 0);
            assert_eq!(s[0].blocks, 300);
        }
    }

    #[test]
    fn stops_at_the_error_target() {
        let c = cfg("decoder = bm\nebn0 = 0\nmax_blocks = 5000\nmin_block_errors = 7\n");
        let s = run_sweep(c).unwrap();
        assert_eq!(s[0].block_errors, 7);
        assert!(s[0].blocks < 5000);
    }

    #[test]
    fn worker_count_does_not_change_counters() {
        let base = "decoder = osd\nm = 1\nebn0 = 0,1,2\nmax_blocks = 600\nmin_block_errors = 50\n";
        let a = run_sweep(cfg(&format!("{base}workers = 1\n"))).unwrap();
        let b = run_sweep(cfg(&format!("{base}workers = 3\n"))).unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.same_counters(y), "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn percentile_and_interval() {
        let mut acc = Accumulator::default();
        for t in 1..=100u64 {
            acc.add(&TrialOutcome { teps: t, block_error: t % 4 == 0, ..Default::default() });
        }
        let s = acc.finish(1.0, 0.5, 64, 8);
        assert_eq!((s.p50_teps, s.p95_teps), (50, 95));
        assert_eq!(s.bler, 0.25);
        assert!((s.ci_halfwidth - 1.96 * (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
