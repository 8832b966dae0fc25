//! Most-reliable-basis construction.

use crate::codes::CodeSpec;
use crate::error::{Error, Result};
use crate::fusion::ScoreTable;
use crate::gf::{row_reduce_ordered, BitMatrix};

/// The reliability-sorted information set of one block.
#[derive(Debug, Clone)]
pub struct MrbContext {
    /// `order[j]` is the original position placed at permuted position `j`.
    pub order: Vec<usize>,
    /// `inverse[order[j]] = j`.
    pub inverse: Vec<usize>,
    /// `[I | P']` in permuted column order.
    pub systematic: BitMatrix,
    /// Hard decision on the first `k_b` permuted positions.
    pub u0: Vec<u8>,
    pub swaps: usize,
}

/// Stable sort by `|llr|` descending, then rank-repairing elimination.
pub fn build_mrb(code: &CodeSpec, scores: &ScoreTable) -> Result<MrbContext> {
    let llr = scores.llr();
    if llr.len() != code.n_b {
        return Err(Error::LengthMismatch { expected: code.n_b, got: llr.len() });
    }
    let mut sorted: Vec<usize> = (0..code.n_b).collect();
    sorted.sort_by(|&a, &b| llr[b].abs().total_cmp(&llr[a].abs()));
    let reduced = row_reduce_ordered(&code.generator, &sorted)?;
    let mut inverse = vec![0; code.n_b];
    for (j, &p) in reduced.order.iter().enumerate() {
        inverse[p] = j;
    }
    let u0 = reduced.order[..code.k_b].iter().map(|&p| (llr[p] < 0.0) as u8).collect();
    Ok(MrbContext { order: reduced.order, inverse, systematic: reduced.systematic, u0, swaps: reduced.swaps })
}

/// Candidate for bit pattern `e` (length `k_b`, permuted basis), back in the original order.
pub fn reencode_bit(mrb: &MrbContext, e: &[u8]) -> Result<Vec<u8>> {
    if e.len() != mrb.u0.len() {
        return Err(Error::LengthMismatch { expected: mrb.u0.len(), got: e.len() });
    }
    let u: Vec<u8> = mrb.u0.iter().zip(e).map(|(a, b)| (a ^ b) & 1).collect();
    let permuted = mrb.systematic.mul_vec(&u)?;
    let mut x = vec![0u8; permuted.len()];
    for (j, &b) in permuted.iter().enumerate() {
        x[mrb.order[j]] = b;
    }
    Ok(x)
}

/// Candidate for byte pattern `eta`: encode `top ^ eta`.
pub fn reencode_byte(code: &CodeSpec, top: &[u8], eta: &[u8]) -> Result<Vec<u8>> {
    if top.len() != eta.len() {
        return Err(Error::LengthMismatch { expected: top.len(), got: eta.len() });
    }
    let msg: Vec<u8> = top.iter().zip(eta).map(|(a, b)| a ^ b).collect();
    code.encode_bytes(&msg)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::codes::{build_bch_127_64, build_hamming_7_4, build_rs_16_8};

    #[test]
    fn equal_reliabilities_keep_identity() {
        let code = build_rs_16_8();
        let s = ScoreTable::channel_only(&[2.0; 128], 64, 8).unwrap();
        let mrb = build_mrb(&code, &s).unwrap();
        assert_eq!(mrb.order, (0..128).collect::<Vec<_>>());
        assert_eq!(mrb.swaps, 0);
    }

    #[test]
    fn noiseless_block_reencodes_to_truth() {
        let code = build_bch_127_64();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let u: Vec<u8> = (0..64).map(|_| rng.random_range(0..2)).collect();
            let c = code.encode(&u).unwrap();
            let llr: Vec<f64> = c.iter().map(|&b| (1.0 - 2.0 * b as f64) * rng.random_range(50.0..90.0)).collect();
            let s = ScoreTable::channel_only(&llr, 64, 8).unwrap();
            let mrb = build_mrb(&code, &s).unwrap();
            assert_eq!(reencode_bit(&mrb, &[0; 64]).unwrap(), c);
            let r: Vec<f64> = mrb.order[..64].iter().map(|&p| llr[p].abs()).collect();
            assert!(r.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rs_symbol_grouped_orders_need_no_swaps() {
        // Any 8 whole symbols form an information set of an MDS code.
        let code = build_rs_16_8();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let sym_rel: Vec<f64> = (0..16).map(|_| rng.random_range(0.1..5.0)).collect();
            let llr: Vec<f64> = (0..128).map(|p| sym_rel[p / 8] * if rng.random() { 1.0 } else { -1.0 }).collect();
            let s = ScoreTable::channel_only(&llr, 64, 8).unwrap();
            assert_eq!(build_mrb(&code, &s).unwrap().swaps, 0);
        }
    }

    #[test]
    fn rs_bit_level_orders_repair_rank() {
        // Sixty-four bits spread over more than eight symbols can be dependent.
        let code = build_rs_16_8();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut with_swaps = 0;
        for _ in 0..1000 {
            let llr: Vec<f64> = (0..128).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = ScoreTable::channel_only(&llr, 64, 8).unwrap();
            let mrb = build_mrb(&code, &s).unwrap();
            with_swaps += (mrb.swaps > 0) as usize;
            assert!(code.is_codeword(&reencode_bit(&mrb, &[0; 64]).unwrap()));
        }
        assert!(with_swaps > 0);
    }

    #[test]
    fn single_flip_adds_generator_row() {
        let code = build_hamming_7_4();
        let s = ScoreTable::channel_only(&[0.1, -3.0, 2.0, 0.5, -0.2, 4.0, 1.0], 4, 0).unwrap();
        let mrb = build_mrb(&code, &s).unwrap();
        let base = reencode_bit(&mrb, &[0; 4]).unwrap();
        assert!(code.is_codeword(&base));
        for a in 0..4 {
            let mut e = [0u8; 4];
            e[a] = 1;
            let x = reencode_bit(&mrb, &e).unwrap();
            assert!(code.is_codeword(&x));
            let row = mrb.systematic.row_bits(a);
            for (p, (&xb, &bb)) in x.iter().zip(&base).enumerate() {
                assert_eq!(xb ^ bb, row[mrb.inverse[p]]);
            }
        }
    }

    #[test]
    fn byte_reencode_is_systematic() {
        let code = build_rs_16_8();
        let x = reencode_byte(&code, b"abcdefgh", &[0, 0, 1, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(crate::codes::bits_to_bytes(&x[..64]).unwrap(), b"abbdefgh".to_vec());
        assert!(code.is_codeword(&x));
        assert_eq!(reencode_byte(&code, b"abcdefgh", &[0; 8]).unwrap(), code.encode_bytes(b"abcdefgh").unwrap());
    }
}
