//! Arithmetic substrate: binary extension fields and packed GF(2) matrices.

mod field;
mod matrix;

pub use field::{FieldSpec, GF128_POLY, GF256_POLY};
pub use matrix::{row_reduce_ordered, BitMatrix, Reduced};

/// Pack a 0/1 slice into little-endian 64-bit words (bit `i` is bit `i % 64` of word `i / 64`).
pub fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

/// Inverse of [`pack_bits`] for the first `len` bits.
pub fn unpack_bits(words: &[u64], len: usize) -> Vec<u8> {
    (0..len).map(|i| ((words[i / 64] >> (i % 64)) & 1) as u8).collect()
}
