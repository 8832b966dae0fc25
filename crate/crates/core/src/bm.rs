//! Hard-decision bounded-distance decoding: Berlekamp-Massey, Chien search and
//! Forney, for the symbol-level RS code and the binary BCH code.

use serde::{Deserialize, Serialize};

use crate::codes::{bits_to_bytes, bytes_to_bits, CodeSpec};
use crate::error::{Error, Result};
use crate::gf::FieldSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BmStatus {
    Corrected,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmOutcome {
    pub status: BmStatus,
    /// Symbols (RS) or bits (BCH); the unmodified input on failure.
    pub decoded: Vec<u8>,
    /// Corrected positions, ascending.
    pub positions: Vec<usize>,
    /// Error values at `positions` (all ones for binary codes).
    pub magnitudes: Vec<u16>,
}

impl BmOutcome {
    fn failure(input: &[u8]) -> Self {
        Self { status: BmStatus::Failure, decoded: input.to_vec(), positions: Vec::new(), magnitudes: Vec::new() }
    }
}

/// Shortest LFSR generating `s`; returns the connection polynomial, ascending.
pub fn berlekamp_massey(f: &FieldSpec, s: &[u16]) -> Vec<u16> {
    let mut c = vec![1u16];
    let mut b = vec![1u16];
    let mut len = 0usize;
    let mut shift = 1usize;
    let mut last = 1u16;
    for n in 0..s.len() {
        let d = (1..=len).fold(s[n], |acc, i| acc ^ f.mul(*c.get(i).unwrap_or(&0), s[n - i]));
        if d == 0 {
            shift += 1;
            continue;
        }
        let coef = f.div(d, last).expect("last discrepancy is nonzero");
        let prev = c.clone();
        if c.len() < b.len() + shift {
            c.resize(b.len() + shift, 0);
        }
        for (i, &bi) in b.iter().enumerate() {
            c[i + shift] ^= f.mul(coef, bi);
        }
        if 2 * len <= n {
            len = n + 1 - len;
            b = prev;
            last = d;
            shift = 1;
        } else {
            shift += 1;
        }
    }
    c.truncate(len + 1);
    c
}

fn degree(p: &[u16]) -> usize {
    p.iter().rposition(|&x| x != 0).unwrap_or(0)
}

/// `S_j = r(alpha^j)` for `j = first..first + count`, with position `p` at degree `n-1-p`.
fn syndromes(f: &FieldSpec, r: &[u16], first: i64, count: usize) -> Vec<u16> {
    (0..count)
        .map(|j| {
            let x = f.alpha_pow(first + j as i64);
            // Horner from the top-degree coefficient, position 0.
            r.iter().fold(0u16, |acc, &v| f.mul(acc, x) ^ v)
        })
        .collect()
}

/// Positions `p` (degree `n-1-p`) whose locator `X = alpha^(n-1-p)` has `Lambda(X^-1) = 0`.
fn chien(f: &FieldSpec, locator: &[u16], n: usize) -> Vec<usize> {
    (0..n).filter(|&p| f.poly_eval(locator, f.alpha_pow(-((n - 1 - p) as i64))) == 0).collect()
}

/// Decode 16 hard-decision bytes of the shortened RS code.
pub fn bm_decode_rs(code: &CodeSpec, hard: &[u8]) -> Result<BmOutcome> {
    let sym = code.symbol_code().ok_or_else(|| Error::InvalidParameter(format!("{} has no symbol structure", code.name)))?;
    if hard.len() != sym.n_sym {
        return Err(Error::LengthMismatch { expected: sym.n_sym, got: hard.len() });
    }
    let f = sym.field;
    let n = sym.n_sym;
    let two_t = sym.n_sym - sym.k_sym;
    let r: Vec<u16> = hard.iter().map(|&b| b as u16).collect();
    let s = syndromes(f, &r, sym.first_root, two_t);
    if s.iter().all(|&x| x == 0) {
        return Ok(BmOutcome { status: BmStatus::Corrected, decoded: hard.to_vec(), positions: vec![], magnitudes: vec![] });
    }
    let locator = berlekamp_massey(f, &s);
    let nu = degree(&locator);
    if nu == 0 || nu > two_t / 2 {
        return Ok(BmOutcome::failure(hard));
    }
    let positions = chien(f, &locator, n);
    if positions.len() != nu {
        return Ok(BmOutcome::failure(hard));
    }
    // Omega = S(x) Lambda(x) mod x^2t; formal derivative keeps odd terms.
    let mut omega = f.poly_mul(&s, &locator);
    omega.truncate(two_t);
    let deriv: Vec<u16> = (1..locator.len()).map(|i| if i % 2 == 1 { locator[i] } else { 0 }).collect();
    let mut out = r.clone();
    let mut magnitudes = Vec::with_capacity(nu);
    for &p in &positions {
        let x_inv = f.alpha_pow(-((n - 1 - p) as i64));
        let num = f.poly_eval(&omega, x_inv);
        let den = f.poly_eval(&deriv, x_inv);
        let Ok(e) = f.div(num, den) else {
            return Ok(BmOutcome::failure(hard));
        };
        // With first root alpha^b the magnitude carries a factor X^(1-b).
        let e = f.mul(e, f.alpha_pow((1 - sym.first_root) * (n - 1 - p) as i64));
        out[p] ^= e;
        magnitudes.push(e);
    }
    if syndromes(f, &out, sym.first_root, two_t).iter().any(|&x| x != 0) {
        return Ok(BmOutcome::failure(hard));
    }
    Ok(BmOutcome {
        status: BmStatus::Corrected,
        decoded: out.iter().map(|&v| v as u8).collect(),
        positions,
        magnitudes,
    })
}

/// Decode 127 hard-decision bits of the binary BCH code.
pub fn bm_decode_bch(code: &CodeSpec, hard: &[u8]) -> Result<BmOutcome> {
    let bch = code.bch().ok_or_else(|| Error::InvalidParameter(format!("{} is not a BCH code", code.name)))?;
    if hard.len() != code.n_b {
        return Err(Error::LengthMismatch { expected: code.n_b, got: hard.len() });
    }
    let f = bch.field;
    let n = code.n_b;
    let r: Vec<u16> = hard.iter().map(|&b| (b & 1) as u16).collect();
    let s = syndromes(f, &r, 1, 2 * bch.t);
    if s.iter().all(|&x| x == 0) {
        return Ok(BmOutcome { status: BmStatus::Corrected, decoded: hard.to_vec(), positions: vec![], magnitudes: vec![] });
    }
    let locator = berlekamp_massey(f, &s);
    let nu = degree(&locator);
    if nu == 0 || nu > bch.t {
        return Ok(BmOutcome::failure(hard));
    }
    let positions = chien(f, &locator, n);
    if positions.len() != nu {
        return Ok(BmOutcome::failure(hard));
    }
    let mut out = hard.to_vec();
    for &p in &positions {
        out[p] ^= 1;
    }
    if !bch.divides(&out) {
        return Ok(BmOutcome::failure(hard));
    }
    Ok(BmOutcome { status: BmStatus::Corrected, decoded: out, magnitudes: vec![1; positions.len()], positions })
}

/// Bounded-distance decode of hard-decision codeword bits, dispatching on the
/// code structure. Returns the output codeword bits and whether decoding succeeded.
pub fn bm_decode_bits(code: &CodeSpec, hard_bits: &[u8]) -> Result<(Vec<u8>, BmStatus)> {
    if code.symbol_code().is_some() {
        let out = bm_decode_rs(code, &bits_to_bytes(hard_bits)?)?;
        Ok((bytes_to_bits(&out.decoded), out.status))
    } else if code.bch().is_some() {
        let out = bm_decode_bch(code, hard_bits)?;
        Ok((out.decoded, out.status))
    } else {
        Err(Error::InvalidParameter(format!("no algebraic decoder for {}", code.name)))
    }
}
