//! Code construction: BCH(127,64), shortened RS(16,8) over GF(2^8) and its
//! binary image, and a Hamming(7,4) test code.
//!
//! Position `p` of a length-`n` codeword is the coefficient of `x^(n-1-p)`, so
//! the information part comes first and every generator is systematic
//! `[I | P]`. Bytes expand LSB first: bit `j` of byte `i` lands at `8i + j`.

use crate::error::{Error, Result};
use crate::gf::{pack_bits, unpack_bits, BitMatrix, FieldSpec};

/// Symbol-level view of a nonbinary code whose binary image is the [`CodeSpec`].
#[derive(Debug, Clone)]
pub struct SymbolCode {
    pub field: &'static FieldSpec,
    pub n_sym: usize,
    pub k_sym: usize,
    /// Generator polynomial, ascending degree, monic.
    pub generator: Vec<u16>,
    /// Roots are alpha^first_root .. alpha^(first_root + n_sym - k_sym - 1).
    pub first_root: i64,
}

/// A narrow-sense binary BCH code described by its generator polynomial.
#[derive(Debug, Clone)]
pub struct BinaryBch {
    pub field: &'static FieldSpec,
    /// Coefficient of x^d is bit d.
    pub generator: u128,
    pub t: usize,
}

#[derive(Debug, Clone)]
pub enum Structure {
    Hamming,
    Bch(BinaryBch),
    ReedSolomon(SymbolCode),
}

/// A binary linear block code with systematic generator `[I_kb | P]`.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    pub name: String,
    pub n_b: usize,
    pub k_b: usize,
    /// Information bytes; zero when `k_b` is not a multiple of 8.
    pub k: usize,
    pub d_min: usize,
    pub generator: BitMatrix,
    pub structure: Structure,
    // parity part of each generator row, packed
    parity_rows: Vec<u64>,
    parity_stride: usize,
}

impl CodeSpec {
    fn from_generator(name: &str, generator: BitMatrix, d_min: usize, byte_aligned: bool, structure: Structure) -> Self {
        let (k_b, n_b) = (generator.rows(), generator.cols());
        debug_assert!((0..k_b).all(|r| (0..k_b).all(|c| generator.get(r, c) == (r == c))));
        let parity_len = n_b - k_b;
        let parity_stride = parity_len.div_ceil(64).max(1);
        let mut parity_rows = vec![0u64; k_b * parity_stride];
        for r in 0..k_b {
            for j in 0..parity_len {
                if generator.get(r, k_b + j) {
                    parity_rows[r * parity_stride + j / 64] |= 1 << (j % 64);
                }
            }
        }
        Self {
            name: name.to_string(),
            n_b,
            k_b,
            k: if byte_aligned { k_b / 8 } else { 0 },
            d_min,
            generator,
            structure,
            parity_rows,
            parity_stride,
        }
    }

    pub fn is_byte_aligned(&self) -> bool {
        self.k > 0
    }

    pub fn rate(&self) -> f64 {
        self.k_b as f64 / self.n_b as f64
    }

    /// `c = u G_b`.
    pub fn encode(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.k_b {
            return Err(Error::LengthMismatch { expected: self.k_b, got: u.len() });
        }
        let parity = self.parity_of(u);
        let mut c = Vec::with_capacity(self.n_b);
        c.extend(u.iter().map(|b| b & 1));
        c.extend(unpack_bits(&parity, self.n_b - self.k_b));
        Ok(c)
    }

    /// Encode an information byte vector (length `k`).
    pub fn encode_bytes(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if !self.is_byte_aligned() {
            return Err(Error::NotByteAligned(self.name.clone()));
        }
        if msg.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: msg.len() });
        }
        self.encode(&bytes_to_bits(msg))
    }

    fn parity_of(&self, u: &[u8]) -> Vec<u64> {
        let mut acc = vec![0u64; self.parity_stride];
        for (r, &b) in u.iter().enumerate() {
            if b & 1 == 1 {
                let row = &self.parity_rows[r * self.parity_stride..(r + 1) * self.parity_stride];
                for (a, w) in acc.iter_mut().zip(row) {
                    *a ^= w;
                }
            }
        }
        acc
    }

    /// Packed parity part of generator row `r` (bit `j` = codeword position `k_b + j`).
    pub fn parity_row(&self, r: usize) -> &[u64] {
        &self.parity_rows[r * self.parity_stride..(r + 1) * self.parity_stride]
    }

    /// Membership via the systematic structure: the parity part must equal the
    /// re-encoded information part.
    pub fn is_codeword(&self, c: &[u8]) -> bool {
        c.len() == self.n_b && pack_bits(&c[self.k_b..]) == self.parity_of(&c[..self.k_b])
    }

    pub fn symbol_code(&self) -> Option<&SymbolCode> {
        match &self.structure {
            Structure::ReedSolomon(s) => Some(s),
            _ => None,
        }
    }

    pub fn bch(&self) -> Option<&BinaryBch> {
        match &self.structure {
            Structure::Bch(b) => Some(b),
            _ => None,
        }
    }
}

/// LSB-first expansion: `bits[8i + j] = (bytes[i] >> j) & 1`.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).map(move |j| (b >> j) & 1)).collect()
}

pub fn bits_to_bytes(bits: &[u8]) -> Result<Vec<u8>> {
    if bits.len() % 8 != 0 {
        return Err(Error::LengthMismatch { expected: bits.len().next_multiple_of(8), got: bits.len() });
    }
    Ok(bits
        .chunks_exact(8)
        .map(|ch| ch.iter().enumerate().fold(0u8, |acc, (j, &b)| acc | ((b & 1) << j)))
        .collect())
}

/// Standard (7,4) Hamming code, d_min 3.
pub fn build_hamming_7_4() -> CodeSpec {
    let g = BitMatrix::from_rows(&[
        [1, 0, 0, 0, 1, 1, 0],
        [0, 1, 0, 0, 1, 0, 1],
        [0, 0, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ])
    .expect("rectangular");
    CodeSpec::from_generator("hamming74", g, 3, false, Structure::Hamming)
}

/// Binary minimal polynomial of alpha^i over GF(2^m), bit d = coefficient of x^d.
pub fn minimal_polynomial(field: &FieldSpec, i: usize) -> u128 {
    let n = field.order();
    let mut coset = vec![i % n];
    let mut j = (2 * i) % n;
    while j != i % n {
        coset.push(j);
        j = (2 * j) % n;
    }
    let mut p: Vec<u16> = vec![1];
    for &e in &coset {
        p = field.poly_mul(&p, &[field.alpha_pow(e as i64), 1]);
    }
    p.iter().enumerate().fold(0u128, |acc, (d, &c)| {
        debug_assert!(c <= 1, "minimal polynomial must be binary");
        acc | ((c as u128) << d)
    })
}

fn binary_poly_mul(a: u128, b: u128) -> u128 {
    let mut out = 0u128;
    for d in 0..128 {
        if (b >> d) & 1 == 1 {
            out ^= a << d;
        }
    }
    out
}

/// Remainder of `a` modulo `g` over GF(2).
pub fn binary_poly_rem(mut a: u128, g: u128) -> u128 {
    let dg = 127 - g.leading_zeros();
    while a != 0 && 127 - a.leading_zeros() >= dg {
        a ^= g << (127 - a.leading_zeros() - dg);
    }
    a
}

/// Generator of the narrow-sense binary BCH code of length 2^m - 1 with roots
/// alpha^1 .. alpha^(2t): product of the distinct minimal polynomials.
pub fn bch_generator(field: &FieldSpec, t: usize) -> u128 {
    let n = field.order();
    let mut covered = vec![false; n];
    let mut g = 1u128;
    for i in 1..=2 * t {
        if covered[i % n] {
            continue;
        }
        let mut j = i % n;
        loop {
            covered[j] = true;
            j = (2 * j) % n;
            if j == i % n {
                break;
            }
        }
        g = binary_poly_mul(g, minimal_polynomial(field, i));
    }
    g
}

/// Narrow-sense BCH(127, 64), t = 10, over GF(2^7).
pub fn build_bch_127_64() -> CodeSpec {
    let field = FieldSpec::gf128();
    let (n, t) = (127usize, 10usize);
    let generator = bch_generator(field, t);
    let r = (127 - generator.leading_zeros()) as usize;
    let k_b = n - r;
    // Row l: message bit l sits at degree n-1-l; parity is x^(n-1-l) mod g,
    // written at positions p = n-1-d for d < r.
    let g = BitMatrix::from_fn(k_b, n, |row, col| {
        if col < k_b {
            return row == col;
        }
        let rem = binary_poly_rem(1u128 << (n - 1 - row), generator);
        (rem >> (n - 1 - col)) & 1 == 1
    });
    CodeSpec::from_generator("bch127_64", g, 2 * t + 1, true, Structure::Bch(BinaryBch { field, generator, t }))
}

impl BinaryBch {
    /// Codeword bits (position order) to polynomial.
    pub fn to_poly(&self, bits: &[u8]) -> u128 {
        let n = bits.len();
        bits.iter().enumerate().fold(0u128, |acc, (p, &b)| acc | (((b & 1) as u128) << (n - 1 - p)))
    }

    pub fn divides(&self, bits: &[u8]) -> bool {
        binary_poly_rem(self.to_poly(bits), self.generator) == 0
    }
}

impl SymbolCode {
    /// Systematic symbol-level encoding; the message occupies the first `k_sym` symbols.
    pub fn encode(&self, msg: &[u16]) -> Result<Vec<u16>> {
        if msg.len() != self.k_sym {
            return Err(Error::LengthMismatch { expected: self.k_sym, got: msg.len() });
        }
        let r = self.n_sym - self.k_sym;
        // LFSR division of m(x) x^r by the monic generator; msg[0] is the top coefficient.
        let mut rem = vec![0u16; r];
        for &m in msg {
            let fb = m ^ rem[r - 1];
            for d in (1..r).rev() {
                rem[d] = rem[d - 1] ^ self.field.mul(fb, self.generator[d]);
            }
            rem[0] = self.field.mul(fb, self.generator[0]);
        }
        let mut c = msg.to_vec();
        c.extend(rem.iter().rev());
        Ok(c)
    }

    /// S_j = c(alpha^(first_root + j)), j = 0..n-k, with symbol s at degree n-1-s.
    pub fn syndromes(&self, c: &[u16]) -> Vec<u16> {
        let n = c.len();
        (0..self.n_sym - self.k_sym)
            .map(|j| {
                let x = self.field.alpha_pow(self.first_root + j as i64);
                c.iter().enumerate().fold(0u16, |acc, (s, &v)| {
                    acc ^ self.field.mul(v, self.field.pow(x, (n - 1 - s) as u64))
                })
            })
            .collect()
    }
}

/// RS(255,247) over GF(2^8) shortened to (16,8): generator roots alpha^1..alpha^8,
/// binary image with each byte expanded LSB first.
pub fn build_rs_16_8() -> CodeSpec {
    let field = FieldSpec::gf256();
    let (n_sym, k_sym) = (16usize, 8usize);
    let mut gen: Vec<u16> = vec![1];
    for i in 1..=(n_sym - k_sym) as i64 {
        gen = field.poly_mul(&gen, &[field.alpha_pow(i), 1]);
    }
    let sym = SymbolCode { field, n_sym, k_sym, generator: gen, first_root: 1 };
    let k_b = 8 * k_sym;
    let mut g = BitMatrix::zeros(k_b, 8 * n_sym);
    for i in 0..k_sym {
        for j in 0..8 {
            let mut msg = vec![0u16; k_sym];
            msg[i] = 1 << j;
            let cw = sym.encode(&msg).expect("k_sym symbols");
            for (s, &v) in cw.iter().enumerate() {
                for b in 0..8 {
                    if (v >> b) & 1 == 1 {
                        g.set(8 * i + j, 8 * s + b, true);
                    }
                }
            }
        }
    }
    CodeSpec::from_generator("rs16_8", g, n_sym - k_sym + 1, true, Structure::ReedSolomon(sym))
}

/// Look a code up by its CLI name.
pub fn by_name(name: &str) -> Result<CodeSpec> {
    match name {
        "rs16_8" | "rs" => Ok(build_rs_16_8()),
        "bch127_64" | "bch" => Ok(build_bch_127_64()),
        "hamming74" | "hamming" => Ok(build_hamming_7_4()),
        other => Err(Error::Config(format!("unknown code {other:?} (rs16_8, bch127_64, hamming74)"))),
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn bit_conventions() {
        assert_eq!(bytes_to_bits(&[0x01]), vec![1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(bytes_to_bits(&[0x80]), vec![0, 0, 0, 0, 0, 0, 0, 1]);
        for b in 0..=255u8 {
            assert_eq!(bits_to_bytes(&bytes_to_bits(&[b])).unwrap(), vec![b]);
        }
        assert!(bits_to_bytes(&[1, 0, 1]).is_err());
    }

    #[test]
    fn hamming_codebook() {
        let code = build_hamming_7_4();
        let mut weights = Vec::new();
        for m in 0..16u8 {
            let u: Vec<u8> = (0..4).map(|j| (m >> j) & 1).collect();
            let c = code.encode(&u).unwrap();
            assert!(code.is_codeword(&c));
            weights.push(c.iter().filter(|&&b| b == 1).count());
        }
        assert_eq!(weights.len(), 16);
        assert_eq!(weights.iter().filter(|&&w| w > 0).min(), Some(&3));
        assert_eq!(code.encode(&[0; 4]).unwrap(), vec![0; 7]);
        assert_eq!(code.k, 0);
    }

    // Oracle: product of (x - alpha^j) over the full closure of {1..20} under doubling.
    #[test]
    fn bch_generator_degree_and_roots() {
        let code = build_bch_127_64();
        let bch = code.bch().unwrap();
        assert_eq!(127 - bch.generator.leading_zeros(), 63);
        assert_eq!((code.n_b, code.k_b, code.k, code.d_min), (127, 64, 8, 21));
        let f = bch.field;
        let gpoly: Vec<u16> = (0..64).map(|d| ((bch.generator >> d) & 1) as u16).collect();
        for i in 1..=20 {
            assert_eq!(f.poly_eval(&gpoly, f.alpha_pow(i)), 0, "alpha^{i} must be a root");
        }
        assert_ne!(f.poly_eval(&gpoly, f.alpha_pow(21)), 0);
    }

    #[test]
    fn bch_rows_are_codewords() {
        let code = build_bch_127_64();
        let bch = code.bch().unwrap();
        for r in 0..code.k_b {
            assert!(bch.divides(&code.generator.row_bits(r)));
        }
        assert_eq!(code.encode(&[0; 64]).unwrap(), vec![0; 127]);
        assert_eq!(code.generator.rank(), 64);
    }

    #[test]
    fn rs_binary_image() {
        let code = build_rs_16_8();
        let sym = code.symbol_code().unwrap();
        assert_eq!((code.n_b, code.k_b, code.k, code.d_min), (128, 64, 8, 9));
        assert_eq!(sym.n_sym - sym.k_sym + 1, 9);
        assert_eq!(code.generator.rank(), 64);
        let c = code.encode_bytes(b"ABCDEFGH").unwrap();
        assert_eq!(&bits_to_bytes(&c).unwrap()[..8], b"ABCDEFGH");

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let msg: Vec<u8> = (0..8).map(|_| rng.random()).collect();
            let c = code.encode_bytes(&msg).unwrap();
            let symbols: Vec<u16> = bits_to_bytes(&c).unwrap().into_iter().map(u16::from).collect();
            assert!(sym.syndromes(&symbols).iter().all(|&s| s == 0));
            let direct = sym.encode(&msg.iter().map(|&b| b as u16).collect::<Vec<_>>()).unwrap();
            assert_eq!(symbols, direct);
        }
    }

    #[test]
    fn encode_unit_vectors_are_rows() {
        let code = build_rs_16_8();
        for i in [0, 17, 63] {
            let mut u = vec![0u8; 64];
            u[i] = 1;
            assert_eq!(code.encode(&u).unwrap(), code.generator.row_bits(i));
        }
        assert!(code.encode(&[0; 3]).is_err());
    }
}
