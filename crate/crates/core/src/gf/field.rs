use std::sync::OnceLock;

use crate::error::{Error, Result};

/// x^8 + x^4 + x^3 + x^2 + 1, the usual Reed-Solomon choice over GF(256).
pub const GF256_POLY: u32 = 0x11d;
/// x^7 + x^3 + 1.
pub const GF128_POLY: u32 = 0x89;

/// A binary extension field GF(2^m) with log/antilog tables, `m <= 16`.
///
/// Elements are stored as `u16` in polynomial basis; `x` (the value 2) is the
/// primitive element `alpha`.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    degree: u32,
    poly: u32,
    // exp is doubled so exp[log a + log b] never needs a reduction.
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl FieldSpec {
    pub fn new(degree: u32, poly: u32) -> Result<Self> {
        if degree == 0 || degree > 16 || poly >> degree != 1 {
            return Err(Error::NotPrimitive(poly, degree));
        }
        let size = 1usize << degree;
        let order = size - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; size];
        let mut x: u32 = 1;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(Error::NotPrimitive(poly, degree));
            }
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << degree) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            return Err(Error::NotPrimitive(poly, degree));
        }
        let (lo, hi) = exp.split_at_mut(order);
        hi.copy_from_slice(lo);
        Ok(Self { degree, poly, exp, log })
    }

    /// GF(2^8) under [`GF256_POLY`].
    pub fn gf256() -> &'static FieldSpec {
        static F: OnceLock<FieldSpec> = OnceLock::new();
        F.get_or_init(|| FieldSpec::new(8, GF256_POLY).expect("primitive"))
    }

    /// GF(2^7) under [`GF128_POLY`].
    pub fn gf128() -> &'static FieldSpec {
        static F: OnceLock<FieldSpec> = OnceLock::new();
        F.get_or_init(|| FieldSpec::new(7, GF128_POLY).expect("primitive"))
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements, 2^m.
    pub fn size(&self) -> usize {
        1 << self.degree
    }

    /// Multiplicative group order, 2^m - 1.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
    }

    pub fn inv(&self, a: u16) -> Result<u16> {
        if a == 0 {
            return Err(Error::NoInverse);
        }
        let l = self.log[a as usize] as usize;
        Ok(self.exp[(self.order() - l) % self.order()])
    }

    pub fn div(&self, a: u16, b: u16) -> Result<u16> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// alpha^e for any integer exponent.
    #[inline]
    pub fn alpha_pow(&self, e: i64) -> u16 {
        self.exp[e.rem_euclid(self.order() as i64) as usize]
    }

    /// Discrete log base alpha; `None` for zero.
    pub fn log(&self, a: u16) -> Option<usize> {
        (a != 0).then(|| self.log[a as usize] as usize)
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        match self.log(a) {
            None => 0,
            Some(l) => self.exp[((l as u128 * e as u128) % self.order() as u128) as usize],
        }
    }

    /// Evaluate a polynomial (coefficients in ascending degree) at `x` by Horner's rule.
    pub fn poly_eval(&self, p: &[u16], x: u16) -> u16 {
        p.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Product of two polynomials with ascending-degree coefficients.
    pub fn poly_mul(&self, a: &[u16], b: &[u16]) -> Vec<u16> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u16; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= self.mul(x, y);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Schoolbook shift-and-reduce, independent of the tables.
    fn schoolbook(mut a: u32, mut b: u32, degree: u32, poly: u32) -> u16 {
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & (1 << degree) != 0 {
                a ^= poly;
            }
        }
        acc as u16
    }

    #[test]
    fn identity_and_known_product() {
        let f = FieldSpec::gf256();
        for a in 0..256u16 {
            assert_eq!(f.mul(a, 1), a);
        }
        assert_eq!(f.mul(0x80, 0x02), 0x1d);
    }

    #[test]
    fn exhaustive_mul_matches_schoolbook() {
        for (f, deg, poly) in [(FieldSpec::gf256(), 8, GF256_POLY), (FieldSpec::gf128(), 7, GF128_POLY)] {
            let n = 1u32 << deg;
            for a in 0..n {
                for b in 0..n {
                    assert_eq!(f.mul(a as u16, b as u16), schoolbook(a, b, deg, poly), "{a} * {b}");
                }
            }
        }
    }

    #[test]
    fn tables_roundtrip() {
        for f in [FieldSpec::gf256(), FieldSpec::gf128()] {
            assert_eq!(f.log(1), Some(0));
            for a in 1..f.size() as u16 {
                assert_eq!(f.alpha_pow(f.log(a).unwrap() as i64), a);
            }
        }
    }

    #[test]
    fn inverse() {
        let f = FieldSpec::gf256();
        assert_eq!(f.inv(1).unwrap(), 1);
        for a in 1..256u16 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        assert!(matches!(f.inv(0), Err(Error::NoInverse)));
    }

    #[test]
    fn rejects_non_primitive() {
        // x^8 + x^4 + x^3 + x + 1 (AES) is irreducible but x is not primitive.
        assert!(FieldSpec::new(8, 0x11b).is_err());
        assert!(FieldSpec::new(4, 0x13).is_ok());
    }

    #[test]
    fn poly_helpers() {
        let f = FieldSpec::gf256();
        // (x + a)(x + b) evaluated at a is zero.
        let p = f.poly_mul(&[3, 1], &[7, 1]);
        assert_eq!(f.poly_eval(&p, 3), 0);
        assert_eq!(f.poly_eval(&p, 7), 0);
        assert_eq!(f.pow(2, 8), 0x1d);
    }
}
