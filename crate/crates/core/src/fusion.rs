//! Channel posteriors, semantic bit marginals and the fused score tables.
//!
//! All tables are natural-log scores. Channel and semantic tables are
//! row-normalised so each row maximum is exactly zero before they are mixed.

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, softplus};
use crate::prior::{argmax256, PriorMatrix};

/// `lambda(beta) = -log(1 + exp(-(1 - 2 beta) L))` per bit.
pub fn bit_channel_logpost(llr: &[f64]) -> Vec<[f64; 2]> {
    llr.iter().map(|&l| [-softplus(-l), -softplus(l)]).collect()
}

/// Byte scores as sums of the eight bit scores, and the per-byte argmax
/// (smallest value on ties). Only the first `8k` rows of `bits` are used.
pub fn byte_channel_logpost(bits: &[[f64; 2]], k: usize) -> (Vec<[f64; 256]>, Vec<u8>) {
    let table = byte_sums(bits, k);
    let hard = table.iter().map(argmax256).collect();
    (table, hard)
}

fn byte_sums(bits: &[[f64; 2]], k: usize) -> Vec<[f64; 256]> {
    (0..k)
        .map(|i| {
            let b = &bits[8 * i..8 * i + 8];
            let mut row = [0.0; 256];
            for (v, slot) in row.iter_mut().enumerate() {
                *slot = (0..8).map(|j| b[j][(v >> j) & 1]).sum();
            }
            row
        })
        .collect()
}

/// Semantic bit marginals: for bit `j` of byte `i`, log-sum-exp of the prior row
/// over the 128 byte values whose bit `j` equals `beta`.
pub fn bit_marginalize(prior: &PriorMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(8 * prior.k());
    for row in prior.rows() {
        for j in 0..8 {
            let mut halves = [[0.0; 128]; 2];
            let mut fill = [0usize; 2];
            for (v, &x) in row.iter().enumerate() {
                let b = (v >> j) & 1;
                halves[b][fill[b]] = x;
                fill[b] += 1;
            }
            out.push([log_sum_exp(&halves[0]), log_sum_exp(&halves[1])]);
        }
    }
    out
}

fn normalise_pair(p: [f64; 2]) -> [f64; 2] {
    let m = p[0].max(p[1]);
    [p[0] - m, p[1] - m]
}

fn normalise_row(row: &[f64; 256]) -> [f64; 256] {
    let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = *row;
    out.iter_mut().for_each(|x| *x -= m);
    out
}

/// Row-normalised channel bit table, built from the LLR directly: `{0, -|L|}`.
///
/// Equal to normalising [`bit_channel_logpost`] and keeps `lambda(0) - lambda(1) = L` exact.
pub fn normalised_channel_bits(llr: &[f64]) -> Vec<[f64; 2]> {
    llr.iter().map(|&l| if l >= 0.0 { [0.0, -l] } else { [l, 0.0] }).collect()
}

/// Everything the decoder needs for one block.
#[derive(Debug, Clone)]
pub struct ScoreTable {
    lambda: Vec<[f64; 2]>,
    llr: Vec<f64>,
    byte_scores: Vec<[f64; 256]>,
    alpha: f64,
    k_b: usize,
}

impl ScoreTable {
    /// Channel-only scores, the `alpha = 1` case. Byte scores are filled when `k > 0`.
    pub fn channel_only(llr: &[f64], k_b: usize, k: usize) -> Result<Self> {
        fuse(llr, None, 1.0, k_b, k)
    }

    /// Fused bit scores `lambda_l(beta)`, one row per codeword position.
    pub fn lambda(&self) -> &[[f64; 2]] {
        &self.lambda
    }

    /// Fused LLRs `lambda_l(0) - lambda_l(1)`.
    pub fn llr(&self) -> &[f64] {
        &self.llr
    }

    /// Fused byte scores on the information bytes; empty for non-aligned codes.
    pub fn byte_scores(&self) -> &[[f64; 256]] {
        &self.byte_scores
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_b(&self) -> usize {
        self.lambda.len()
    }

    pub fn k_b(&self) -> usize {
        self.k_b
    }

    pub fn k(&self) -> usize {
        self.byte_scores.len()
    }

    /// `-sum_l max_beta lambda_l(beta)`: the smallest score any word can reach.
    pub fn score_floor(&self) -> f64 {
        -self.lambda.iter().map(|r| r[0].max(r[1])).sum::<f64>()
    }
}

/// Fuse channel LLRs with an optional byte prior.
///
/// Information bits mix `alpha * channel + (1 - alpha) * semantic`, parity bits
/// are channel only, and byte scores mix the same way. A missing prior acts as
/// uniform. The fused tables are not renormalised.
pub fn fuse(llr: &[f64], prior: Option<&PriorMatrix>, alpha: f64, k_b: usize, k: usize) -> Result<ScoreTable> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in [0, 1]")));
    }
    if k_b > llr.len() || (k > 0 && 8 * k != k_b) {
        return Err(Error::InvalidParameter(format!("k_b = {k_b}, k = {k} do not fit {} LLRs", llr.len())));
    }
    if llr.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidParameter("non-finite LLR".into()));
    }
    if let Some(p) = prior {
        if k == 0 {
            return Err(Error::NotByteAligned(format!("{k_b}-bit information word")));
        }
        if p.k() != k {
            return Err(Error::LengthMismatch { expected: k, got: p.k() });
        }
    }

    let channel = normalised_channel_bits(llr);
    let semantic: Vec<[f64; 2]> = match prior {
        Some(p) => bit_marginalize(p).into_iter().map(normalise_pair).collect(),
        None => vec![[0.0; 2]; k_b],
    };
    let beta = 1.0 - alpha;
    let mut lambda = channel;
    for (l, s) in lambda[..k_b].iter_mut().zip(&semantic) {
        *l = [alpha * l[0] + beta * s[0], alpha * l[1] + beta * s[1]];
    }
    let fused_llr = lambda.iter().map(|r| r[0] - r[1]).collect();

    let channel_bytes = byte_sums(&normalised_channel_bits(&llr[..8 * k]), k);
    let byte_scores = channel_bytes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let s = match prior {
                Some(p) => normalise_row(p.row(i)),
                None => [0.0; 256],
            };
            let mut row = [0.0; 256];
            for v in 0..256 {
                row[v] = alpha * c[v] + beta * s[v];
            }
            row
        })
        .collect();

    Ok(ScoreTable { lambda, llr: fused_llr, byte_scores, alpha, k_b })
}

/// `d(x) = -sum_l lambda_l(x_l)`, summed in position order.
pub fn score_candidate(scores: &ScoreTable, x: &[u8]) -> f64 {
    debug_assert_eq!(x.len(), scores.n_b());
    -scores.lambda.iter().zip(x).map(|(r, &b)| r[(b & 1) as usize]).sum::<f64>()
}
