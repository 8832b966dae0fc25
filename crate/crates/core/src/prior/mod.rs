//! Byte-level source priors `P(mu_i = v | ctx, hard decision)`.
//!
//! A [`PriorBackend`] turns the clean prefix and the channel hard decision of the
//! current block into a [`PriorMatrix`]. Three backends ship here: uniform, a
//! byte n-gram denoiser, and a client for an external model server.

mod ngram;
mod remote;

pub use ngram::{NgramDenoiser, NgramModel};
pub use remote::{serve_stream, Endpoint, PriorRequest, PriorResponse, RemotePrior, NORMALISATION_TOLERANCE};

use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

/// Per-entry floor on log-probabilities.
pub const LOG_FLOOR: f64 = -30.0;

// Slack for rows that went through the floor once already, e.g. over the wire.
const IDEMPOTENCE_TOLERANCE: f64 = 1e-12;

/// `k` rows of 256 natural-log probabilities, each row normalised and floored.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorMatrix {
    rows: Vec<[f64; 256]>,
}

impl PriorMatrix {
    pub fn uniform(k: usize) -> Self {
        Self { rows: vec![[-(256f64.ln()); 256]; k] }
    }

    /// Normalise arbitrary log-weights (logits) row by row and apply the floor.
    ///
    /// The floor mixes each row with the uniform distribution,
    /// `p' = (1 - 256 e^floor) p + e^floor`, so rows stay exactly normalised while
    /// every entry is at least [`LOG_FLOOR`]. Rows that are already normalised and
    /// floored pass through unchanged, so the conversion is idempotent.
    pub fn from_log_weights(rows: Vec<[f64; 256]>) -> Result<Self> {
        let eps = LOG_FLOOR.exp();
        let keep = 1.0 - 256.0 * eps;
        let mut out = rows;
        for row in &mut out {
            if row.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
                return Err(Error::InvalidParameter("prior row contains NaN or +inf".into()));
            }
            let z = log_sum_exp(row);
            if z == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter("prior row has no mass".into()));
            }
            if z.abs() <= IDEMPOTENCE_TOLERANCE && row.iter().all(|&x| x >= LOG_FLOOR - IDEMPOTENCE_TOLERANCE) {
                continue;
            }
            for x in row.iter_mut() {
                *x = (keep * (*x - z).exp() + eps).ln();
            }
        }
        Ok(Self { rows: out })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[[f64; 256]] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64; 256] {
        &self.rows[i]
    }

    /// Most probable byte per row, smallest value on ties.
    pub fn argmax(&self) -> Vec<u8> {
        self.rows.iter().map(argmax256).collect()
    }
}

pub(crate) fn argmax256(row: &[f64; 256]) -> u8 {
    let mut best = 0usize;
    for v in 1..256 {
        if row[v] > row[best] {
            best = v;
        }
    }
    best as u8
}

/// Anything that can produce a prior for one block.
pub trait PriorBackend: Send + Sync {
    /// `ctx` is the clean prefix (possibly empty); `hd` holds the `k` hard-decision bytes.
    fn query(&self, ctx: &[u8], hd: &[u8]) -> Result<PriorMatrix>;

    fn name(&self) -> &str;
}

/// Every byte equally likely.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformPrior;

pub fn uniform_prior(_ctx: &[u8], hd: &[u8]) -> PriorMatrix {
    PriorMatrix::uniform(hd.len())
}

impl PriorBackend for UniformPrior {
    fn query(&self, ctx: &[u8], hd: &[u8]) -> Result<PriorMatrix> {
        Ok(uniform_prior(ctx, hd))
    }

    fn name(&self) -> &str {
        "uniform"
    }
}

/// Genie prior for experiments: mass `q` on the true byte, `(1-q)/255` elsewhere.
pub fn oracle_prior(truth: &[u8], q: f64) -> Result<PriorMatrix> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("oracle mass q = {q} must lie in (0, 1)")));
    }
    let other = ((1.0 - q) / 255.0).ln();
    let rows = truth
        .iter()
        .map(|&t| {
            let mut row = [other; 256];
            row[t as usize] = q.ln();
            row
        })
        .collect();
    PriorMatrix::from_log_weights(rows)
}
