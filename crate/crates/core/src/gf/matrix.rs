use std::fmt;

use crate::error::{Error, Result};

/// Dense GF(2) matrix, row-major, each row packed into 64-bit words.
///
/// Column `c` of a row lives in bit `c % 64` of word `c / 64`. Padding bits past
/// `cols` are kept at zero by every mutating method.
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = cols.div_ceil(64);
        Self { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Build from 0/1 rows of equal length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::LengthMismatch { expected: cols, got: row.len() });
            }
            for (c, &b) in row.iter().enumerate() {
                m.set(r, c, b & 1 == 1);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Words per row.
    #[inline]
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        (0..self.cols).map(|c| self.get(r, c) as u8).collect()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// `row[dst] ^= row[src]`.
    #[inline]
    pub fn xor_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        for w in 0..self.stride {
            let s = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= s;
        }
    }

    /// Row vector times matrix over GF(2): `u * self`, with `u` given as 0/1 values.
    pub fn mul_vec(&self, u: &[u8]) -> Result<Vec<u8>> {
        if u.len() != self.rows {
            return Err(Error::LengthMismatch { expected: self.rows, got: u.len() });
        }
        let mut acc = vec![0u64; self.stride];
        for (r, &b) in u.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row(r)) {
                    *a ^= w;
                }
            }
        }
        Ok(super::unpack_bits(&acc, self.cols))
    }

    /// New matrix whose column `j` is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, perm.len());
        for r in 0..self.rows {
            for (j, &c) in perm.iter().enumerate() {
                if self.get(r, c) {
                    out.data[r * out.stride + j / 64] |= 1 << (j % 64);
                }
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(p, rank);
            for r in rank + 1..self.rows {
                if m.get(r, c) {
                    m.xor_row(r, rank);
                }
            }
            rank += 1;
        }
        rank
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let s: String = (0..self.cols).map(|c| if self.get(r, c) { '1' } else { '0' }).collect();
            writeln!(f, "  {s}")?;
        }
        Ok(())
    }
}

/// Output of [`row_reduce_ordered`].
#[derive(Debug, Clone)]
pub struct Reduced {
    /// `[I | P']` in the column order `order`.
    pub systematic: BitMatrix,
    /// `order[j]` is the original column placed at position `j`.
    pub order: Vec<usize>,
    /// Number of leading columns pushed out of the information set for rank.
    pub swaps: usize,
}

/// Permute the columns of `g` by `order` and Gauss-Jordan eliminate to `[I | P']`.
///
/// Columns are taken greedily in the given order; a column that is dependent on
/// the pivots already chosen is moved behind the information set. The pivots keep
/// their relative order, and so do the remaining columns.
pub fn row_reduce_ordered(g: &BitMatrix, order: &[usize]) -> Result<Reduced> {
    let (k, n) = (g.rows(), g.cols());
    if order.len() != n {
        return Err(Error::InvalidPermutation(n));
    }
    let mut seen = vec![false; n];
    for &c in order {
        if c >= n || std::mem::replace(&mut seen[c], true) {
            return Err(Error::InvalidPermutation(n));
        }
    }

    let mut m = g.permute_columns(order);
    let mut pivot_cols = Vec::with_capacity(k);
    let mut is_pivot = vec![false; n];
    let mut swaps = 0;
    for c in 0..n {
        let rank = pivot_cols.len();
        if rank == k {
            break;
        }
        let Some(p) = (rank..k).find(|&r| m.get(r, c)) else {
            swaps += 1;
            continue;
        };
        m.swap_rows(p, rank);
        for r in 0..k {
            if r != rank && m.get(r, c) {
                m.xor_row(r, rank);
            }
        }
        pivot_cols.push(c);
        is_pivot[c] = true;
    }
    if pivot_cols.len() < k {
        return Err(Error::NotFullRank { rank: pivot_cols.len(), expected: k });
    }

    let seq: Vec<usize> = pivot_cols.iter().copied().chain((0..n).filter(|&c| !is_pivot[c])).collect();
    let systematic = if swaps == 0 { m } else { m.permute_columns(&seq) };
    let order = seq.iter().map(|&j| order[j]).collect();
    Ok(Reduced { systematic, order, swaps })
}
