//! Ordered statistics decoding over fused scores, with bit-flip and
//! byte-substitution test-error patterns.
//!
//! With `alpha = 1` scores and the byte family disabled this is plain order-`m`
//! OSD. Candidates from both families are scored by
//! `d(x) = -sum_l lambda_l(x_l)` in the original position order; the first
//! candidate reaching the minimum wins, bit family first.
//!
//! Codes up to 128 bits are handled with words packed into `u128`.

mod mrb;
mod tep;

pub use mrb::{build_mrb, reencode_bit, reencode_byte, MrbContext};
pub use tep::{rank_bytes, tep_count, BitTeps, ByteRanking, ByteTep, ByteTeps};

use serde::{Deserialize, Serialize};

use crate::codes::{bits_to_bytes, CodeSpec};
use crate::error::{Error, Result};
use crate::fusion::{score_candidate, ScoreTable};

/// Longest supported codeword.
pub const MAX_CODE_BITS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bit,
    Byte,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ByteTepParams {
    /// Largest number of substituted bytes.
    pub omega: usize,
    /// Alternatives per byte.
    pub t: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams {
    /// Bit-flip order `m`; `None` disables the bit family.
    pub order: Option<usize>,
    /// `None` disables the byte family.
    pub bytes: Option<ByteTepParams>,
    /// Stop once the best score is within this margin of [`ScoreTable::score_floor`].
    pub early_stop: Option<f64>,
    /// Skip bit patterns whose MRB cost alone already exceeds the best score.
    /// Never changes the result.
    pub prune: bool,
}

impl DecodeParams {
    pub fn osd(m: usize) -> Self {
        Self { order: Some(m), bytes: None, early_stop: None, prune: true }
    }

    pub fn sem_osd(m: usize, omega: usize, t: usize) -> Self {
        Self { order: Some(m), bytes: Some(ByteTepParams { omega, t }), early_stop: None, prune: true }
    }

    pub fn bytes_only(omega: usize, t: usize) -> Self {
        Self { order: None, bytes: Some(ByteTepParams { omega, t }), early_stop: None, prune: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeResult {
    pub codeword: Vec<u8>,
    /// Information bytes of `codeword`; empty for codes that are not byte aligned.
    pub info_bytes: Vec<u8>,
    pub score: f64,
    /// Patterns actually scored (pruned subtrees are not counted).
    pub teps_evaluated: u64,
    pub winner: Family,
    /// Both families reached the winning score.
    pub tie: bool,
    pub early_stopped: bool,
    pub swaps: usize,
}

/// Sums of reliabilities over 8-bit chunks of a mismatch word.
struct CostTable {
    chunks: Vec<[f64; 256]>,
}

impl CostTable {
    fn new(r: &[f64]) -> Self {
        let chunks = r
            .chunks(8)
            .map(|c| {
                let mut t = [0.0; 256];
                for v in 1..256usize {
                    let j = v.trailing_zeros() as usize;
                    t[v] = t[v & (v - 1)] + c.get(j).copied().unwrap_or(0.0);
                }
                t
            })
            .collect();
        Self { chunks }
    }

    #[inline]
    fn cost(&self, m: u128) -> f64 {
        self.chunks.iter().enumerate().map(|(c, t)| t[((m >> (8 * c)) & 0xff) as usize]).sum()
    }
}

fn pack(bits: &[u8]) -> u128 {
    bits.iter().enumerate().fold(0, |acc, (p, &b)| acc | (((b & 1) as u128) << p))
}

fn unpack(x: u128, n: usize) -> Vec<u8> {
    (0..n).map(|p| ((x >> p) & 1) as u8).collect()
}

struct Search<'a> {
    scores: &'a ScoreTable,
    floor: f64,
    tol: f64,
    stop_margin: Option<f64>,
    best: Option<(f64, Vec<u8>, Family)>,
    family_best: [f64; 2],
    teps: u64,
    stopped: bool,
}

impl Search<'_> {
    fn threshold(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.0 + self.tol)
    }

    /// Score a candidate whose fast cost is `fast`; only near-best candidates are built.
    fn offer(&mut self, fast: f64, family: Family, build: impl FnOnce() -> Vec<u8>) {
        self.teps += 1;
        if fast > self.threshold() {
            return;
        }
        let x = build();
        let d = score_candidate(self.scores, &x);
        let slot = &mut self.family_best[family as usize];
        *slot = slot.min(d);
        if self.best.as_ref().is_none_or(|b| d < b.0) {
            self.best = Some((d, x, family));
        }
        if let (Some(margin), Some(b)) = (self.stop_margin, &self.best) {
            if b.0 <= self.floor + margin {
                self.stopped = true;
            }
        }
    }
}

struct BitWalk<'a> {
    mrb: &'a MrbContext,
    reliab: &'a [f64],
    parity_rows: &'a [u128],
    parity_cost: CostTable,
    hard_parity: u128,
    base_mismatch: u128,
    prune: bool,
    n_b: usize,
}

impl BitWalk<'_> {
    fn walk(&self, s: &mut Search, support: &mut Vec<usize>, hi: usize, left: usize, mask: u128, info: f64) {
        if left == 0 {
            let mism = self.base_mismatch ^ mask;
            let fast = s.floor + info + self.parity_cost.cost(mism);
            s.offer(fast, Family::Bit, || self.build(support, mism));
            return;
        }
        for a in (left - 1..hi).rev() {
            // Every remaining pick sits at index <= a and costs at least reliab[a].
            if self.prune && s.floor + info + self.reliab[a] * left as f64 > s.threshold() {
                break;
            }
            support.push(a);
            self.walk(s, support, a, left - 1, mask ^ self.parity_rows[a], info + self.reliab[a]);
            support.pop();
            if s.stopped {
                return;
            }
        }
    }

    fn build(&self, support: &[usize], mism: u128) -> Vec<u8> {
        let k_b = self.mrb.u0.len();
        let mut x = vec![0u8; self.n_b];
        for (j, &u) in self.mrb.u0.iter().enumerate() {
            x[self.mrb.order[j]] = u;
        }
        for &a in support {
            x[self.mrb.order[a]] ^= 1;
        }
        let parity = mism ^ self.hard_parity;
        for j in 0..self.n_b - k_b {
            x[self.mrb.order[k_b + j]] = ((parity >> j) & 1) as u8;
        }
        x
    }
}

/// Per-code precomputation shared by every block.
#[derive(Debug, Clone)]
pub struct Decoder {
    code: CodeSpec,
    gen_rows: Vec<u128>,
    /// `byte_codewords[i][v]`: codeword of the message with byte `i` = `v`, zeros elsewhere.
    byte_codewords: Vec<[u128; 256]>,
}

impl Decoder {
    pub fn new(code: &CodeSpec) -> Result<Self> {
        if code.n_b > MAX_CODE_BITS {
            return Err(Error::InvalidParameter(format!("{} bits exceed the {MAX_CODE_BITS}-bit decoder", code.n_b)));
        }
        let gen_rows: Vec<u128> = (0..code.k_b).map(|r| pack(&code.generator.row_bits(r))).collect();
        let byte_codewords = (0..code.k)
            .map(|i| {
                let mut t = [0u128; 256];
                for v in 1..256usize {
                    t[v] = t[v & (v - 1)] ^ gen_rows[8 * i + v.trailing_zeros() as usize];
                }
                t
            })
            .collect();
        Ok(Self { code: code.clone(), gen_rows, byte_codewords })
    }

    pub fn code(&self) -> &CodeSpec {
        &self.code
    }

    fn check(&self, scores: &ScoreTable, params: &DecodeParams) -> Result<()> {
        let code = &self.code;
        if scores.n_b() != code.n_b || scores.k_b() != code.k_b {
            return Err(Error::LengthMismatch { expected: code.n_b, got: scores.n_b() });
        }
        if params.order.is_none() && params.bytes.is_none() {
            return Err(Error::InvalidParameter("both pattern families disabled".into()));
        }
        if let Some(m) = params.order {
            if m > code.k_b {
                return Err(Error::InvalidParameter(format!("order {m} exceeds k_b = {}", code.k_b)));
            }
        }
        if let Some(b) = params.bytes {
            if !code.is_byte_aligned() {
                return Err(Error::NotByteAligned(code.name.clone()));
            }
            if scores.k() != code.k {
                return Err(Error::LengthMismatch { expected: code.k, got: scores.k() });
            }
            if b.omega > code.k || !(1..=255).contains(&b.t) {
                return Err(Error::InvalidParameter(format!("omega = {}, T = {} out of range", b.omega, b.t)));
            }
        }
        Ok(())
    }

    pub fn decode(&self, scores: &ScoreTable, params: &DecodeParams) -> Result<DecodeResult> {
        self.check(scores, params)?;
        let code = &self.code;
        let (n_b, k_b) = (code.n_b, code.k_b);
        let llr = scores.llr();
        let hard: Vec<u8> = llr.iter().map(|&l| (l < 0.0) as u8).collect();
        let scale: f64 = scores.lambda().iter().map(|r| r[0].abs() + r[1].abs()).sum();
        let mut search = Search {
            scores,
            floor: scores.score_floor(),
            tol: 1e-9 * (1.0 + scale),
            stop_margin: params.early_stop,
            best: None,
            family_best: [f64::INFINITY; 2],
            teps: 0,
            stopped: false,
        };

        let mut swaps = 0;
        if let Some(m) = params.order {
            let mrb = build_mrb(code, scores)?;
            swaps = mrb.swaps;
            let reliab: Vec<f64> = mrb.order.iter().map(|&p| llr[p].abs()).collect();
            let parity_rows: Vec<u128> = (0..k_b)
                .map(|a| (k_b..n_b).fold(0u128, |acc, c| acc | ((mrb.systematic.get(a, c) as u128) << (c - k_b))))
                .collect();
            let hard_parity = (k_b..n_b).fold(0u128, |acc, j| acc | ((hard[mrb.order[j]] as u128) << (j - k_b)));
            let u0_parity =
                mrb.u0.iter().zip(&parity_rows).filter(|(&u, _)| u == 1).fold(0u128, |acc, (_, &r)| acc ^ r);
            let walk = BitWalk {
                mrb: &mrb,
                reliab: &reliab[..k_b],
                parity_rows: &parity_rows,
                parity_cost: CostTable::new(&reliab[k_b..]),
                hard_parity,
                base_mismatch: u0_parity ^ hard_parity,
                prune: params.prune,
                n_b,
            };
            let mut support = Vec::with_capacity(m);
            for w in 0..=m {
                walk.walk(&mut search, &mut support, k_b, w, 0, 0.0);
                if search.stopped {
                    break;
                }
            }
        }

        if let (Some(b), false) = (params.bytes, search.stopped) {
            let ranking = rank_bytes(scores, b.t)?;
            let top_cw = ranking.top.iter().enumerate().fold(0u128, |acc, (i, &v)| acc ^ self.byte_codewords[i][v as usize]);
            let deltas: Vec<Vec<u128>> = ranking
                .alternatives
                .iter()
                .enumerate()
                .map(|(i, alts)| alts.iter().map(|&v| self.byte_codewords[i][(v ^ ranking.top[i]) as usize]).collect())
                .collect();
            let base_mismatch = top_cw ^ pack(&hard);
            let cost = CostTable::new(&llr.iter().map(|l| l.abs()).collect::<Vec<_>>());
            for tep in ByteTeps::new(code.k, b.omega, b.t) {
                let delta = tep.iter().fold(0u128, |acc, &(i, r)| acc ^ deltas[i][r]);
                let fast = search.floor + cost.cost(base_mismatch ^ delta);
                search.offer(fast, Family::Byte, || unpack(top_cw ^ delta, n_b));
                if search.stopped {
                    break;
                }
            }
        }

        let (score, codeword, winner) = search.best.expect("every enabled family offers its zero pattern");
        debug_assert!(code.is_codeword(&codeword));
        let info_bytes = if code.is_byte_aligned() { bits_to_bytes(&codeword[..k_b])? } else { Vec::new() };
        let tie = search.family_best[0] == search.family_best[1];
        Ok(DecodeResult {
            codeword,
            info_bytes,
            score,
            teps_evaluated: search.teps,
            winner,
            tie,
            early_stopped: search.stopped,
            swaps,
        })
    }

    /// Generator row `r` packed with bit `p` = position `p`.
    pub fn generator_row(&self, r: usize) -> u128 {
        self.gen_rows[r]
    }
}

/// One-shot convenience over [`Decoder::decode`].
pub fn decode(code: &CodeSpec, scores: &ScoreTable, params: &DecodeParams) -> Result<DecodeResult> {
    Decoder::new(code)?.decode(scores, params)
}
