//! Reproducible decoder workloads shared by the benchmarks.

use rand::Rng;
use semosd::channel::{ebn0_to_sigma_sq, hard_bits, llr, Channel};
use semosd::codes::{bits_to_bytes, by_name, CodeSpec};
use semosd::fusion::{fuse, ScoreTable};
use semosd::prior::{oracle_prior, PriorMatrix};
use semosd::seed::trial_rng;

/// One received block with everything a decoder might need.
pub struct Block {
    pub codeword: Vec<u8>,
    pub llr: Vec<f64>,
    pub hard: Vec<u8>,
    pub prior: Option<PriorMatrix>,
}

/// `count` AWGN blocks of `code` at `ebn0_db`, with an oracle prior of mass `oracle_q`
/// on byte-aligned codes.
pub fn awgn_blocks(code: &CodeSpec, ebn0_db: f64, count: u64, oracle_q: f64) -> Vec<Block> {
    let channel = Channel::awgn_with_variance(ebn0_to_sigma_sq(ebn0_db, code.rate()));
    (0..count)
        .map(|i| {
            let mut rng = trial_rng(0xBE7C, 0, i);
            let msg: Vec<u8> = (0..code.k_b).map(|_| rng.random_range(0..2u8)).collect();
            let codeword = code.encode(&msg).expect("k_b bits");
            let obs = channel.transmit(&codeword, &mut rng);
            let prior = code.is_byte_aligned().then(|| {
                oracle_prior(&bits_to_bytes(&msg).expect("byte aligned"), oracle_q).expect("q in (0, 1)")
            });
            Block { llr: llr(&obs), hard: hard_bits(&obs.y), codeword, prior }
        })
        .collect()
}

/// Fused score tables for `blocks`; `alpha = 1` gives plain channel scores.
pub fn score_tables(code: &CodeSpec, blocks: &[Block], alpha: f64) -> Vec<ScoreTable> {
    blocks
        .iter()
        .map(|b| fuse(&b.llr, b.prior.as_ref(), alpha, code.k_b, code.k).expect("consistent block"))
        .collect()
}

pub fn code(name: &str) -> CodeSpec {
    by_name(name).expect("known code")
}
