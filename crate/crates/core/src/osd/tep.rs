//! Test-error-pattern families and their closed-form sizes.

use crate::error::{Error, Result};
use crate::fusion::ScoreTable;

/// Bit-flip patterns of weight `0..=m` over `k_b` MRB positions, as supports.
///
/// Weight ascending. Within a weight, supports are strictly decreasing index
/// tuples in lexicographic order from the top, so the least reliable end of the
/// MRB is flipped first.
#[derive(Debug, Clone)]
pub struct BitTeps {
    k_b: usize,
    m: usize,
    cur: Option<Vec<usize>>,
}

impl BitTeps {
    pub fn new(k_b: usize, m: usize) -> Self {
        Self { k_b, m: m.min(k_b), cur: Some(Vec::new()) }
    }
}

impl Iterator for BitTeps {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.clone()?;
        let w = out.len();
        let mut a = out.clone();
        // Rightmost entry that can still move down; entry p needs at least w-1-p values below it.
        let movable = (0..w).rev().find(|&p| a[p] > w - 1 - p);
        self.cur = match movable {
            Some(p) => {
                a[p] -= 1;
                for q in p + 1..w {
                    a[q] = a[q - 1] - 1;
                }
                Some(a)
            }
            None if w < self.m => Some((0..=w).map(|i| self.k_b - 1 - i).collect()),
            None => None,
        };
        Some(out)
    }
}

/// Per-position byte ranking by fused byte score: the top value and the next `t` alternatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByteRanking {
    /// Top-ranked information word.
    pub top: Vec<u8>,
    /// `alternatives[i][r]` is the byte ranked `r + 2` at position `i`.
    pub alternatives: Vec<Vec<u8>>,
}

/// Rank all 256 values per information byte, higher score first, smaller value on ties.
pub fn rank_bytes(scores: &ScoreTable, t: usize) -> Result<ByteRanking> {
    if !(1..=255).contains(&t) {
        return Err(Error::InvalidParameter(format!("T = {t} must lie in 1..=255")));
    }
    let mut top = Vec::with_capacity(scores.k());
    let mut alternatives = Vec::with_capacity(scores.k());
    for row in scores.byte_scores() {
        let mut idx: Vec<u8> = (0..=255).collect();
        idx.sort_by(|&a, &b| row[b as usize].total_cmp(&row[a as usize]).then(a.cmp(&b)));
        top.push(idx[0]);
        alternatives.push(idx[1..=t].to_vec());
    }
    Ok(ByteRanking { top, alternatives })
}

/// One byte-substitution pattern: `(position, alternative index)` pairs, positions ascending.
pub type ByteTep = Vec<(usize, usize)>;

/// Byte-substitution patterns over `k` positions with at most `omega` substituted
/// bytes, each drawn from `t` alternatives.
///
/// `|S|` ascending, position sets lexicographic, then alternative-index tuples
/// lexicographic. Starts with the empty pattern.
#[derive(Debug, Clone)]
pub struct ByteTeps {
    k: usize,
    omega: usize,
    t: usize,
    state: Option<(Vec<usize>, Vec<usize>)>,
}

impl ByteTeps {
    pub fn new(k: usize, omega: usize, t: usize) -> Self {
        let state = (t > 0 || omega == 0).then(|| (Vec::new(), Vec::new()));
        Self { k, omega: omega.min(k), t, state }
    }

    fn advance(&self, set: &[usize], choice: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
        let w = set.len();
        let mut choice = choice.to_vec();
        for p in (0..w).rev() {
            if choice[p] + 1 < self.t {
                choice[p] += 1;
                choice[p + 1..].iter_mut().for_each(|c| *c = 0);
                return Some((set.to_vec(), choice));
            }
        }
        let mut set = set.to_vec();
        for p in (0..w).rev() {
            if set[p] < self.k - (w - p) {
                set[p] += 1;
                for q in p + 1..w {
                    set[q] = set[q - 1] + 1;
                }
                return Some((set, vec![0; w]));
            }
        }
        (w < self.omega).then(|| ((0..=w).collect(), vec![0; w + 1]))
    }
}

impl Iterator for ByteTeps {
    type Item = ByteTep;

    fn next(&mut self) -> Option<ByteTep> {
        let (set, choice) = self.state.take()?;
        self.state = self.advance(&set, &choice);
        Some(set.into_iter().zip(choice).collect())
    }
}

fn binomial(n: u64, r: u64) -> Option<u64> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.checked_mul((n - i) as u128)? / (i + 1) as u128;
    }
    u64::try_from(acc).ok()
}

/// Sizes of the two families and their sum:
/// `sum_{w<=m} C(k_b, w)`, `sum_{w<=omega} C(k, w) T^w`, total.
pub fn tep_count(k_b: usize, m: usize, k: usize, omega: usize, t: usize) -> Result<(u64, u64, u64)> {
    let (k_b, k, t) = (k_b as u64, k as u64, t as u64);
    let mut bits = 0u64;
    for w in 0..=(m as u64).min(k_b) {
        bits = bits.checked_add(binomial(k_b, w).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
    }
    let mut bytes = 0u64;
    for w in 0..=(omega as u64).min(k) {
        let pow = u32::try_from(w).ok().and_then(|w| t.checked_pow(w)).ok_or(Error::Overflow)?;
        let term = binomial(k, w).ok_or(Error::Overflow)?.checked_mul(pow).ok_or(Error::Overflow)?;
        bytes = bytes.checked_add(term).ok_or(Error::Overflow)?;
    }
    Ok((bits, bytes, bits.checked_add(bytes).ok_or(Error::Overflow)?))
}
