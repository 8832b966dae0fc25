//! Sentence loading, padding and trial construction.
//!
//! A sentence is split into `k`-byte blocks. A trial picks a block index `g`
//! from `2..=blocks-1`; the blocks before it are the error-free context.

use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::seed::mix;

/// Padded sentence length in bytes.
pub const SENTENCE_BYTES: usize = 64;
pub const PAD_BYTE: u8 = b' ';

/// Lines of `text` whose byte length lies in `[min_len, max_len]`, padded with
/// spaces to [`SENTENCE_BYTES`]. A trailing `\r` is dropped before measuring.
pub fn parse_sentences(text: &[u8], min_len: usize, max_len: usize) -> Result<Vec<Vec<u8>>> {
    if max_len > SENTENCE_BYTES || min_len > max_len {
        return Err(Error::InvalidParameter(format!(
            "length window [{min_len}, {max_len}] must lie within 0..={SENTENCE_BYTES}"
        )));
    }
    Ok(text
        .split(|&b| b == b'\n')
        .map(|l| l.strip_suffix(b"\r").unwrap_or(l))
        .filter(|l| (min_len..=max_len).contains(&l.len()))
        .map(|l| {
            let mut s = l.to_vec();
            s.resize(SENTENCE_BYTES, PAD_BYTE);
            s
        })
        .collect())
}

/// [`parse_sentences`] over a file; an empty result is an error.
pub fn load_sentences(path: &Path, min_len: usize, max_len: usize) -> Result<Vec<Vec<u8>>> {
    let text = std::fs::read(path)?;
    let out = parse_sentences(&text, min_len, max_len)?;
    if out.is_empty() {
        return Err(Error::EmptyCorpus(format!("no sentences of {min_len}..={max_len} bytes in {}", path.display())));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    /// Blocks `0..g`, error free.
    pub ctx: Vec<u8>,
    /// The `k` source bytes of block `g`.
    pub block: Vec<u8>,
    pub g: usize,
    pub sentence_id: usize,
}

/// Smallest and largest admissible block index for a sentence of `blocks` blocks.
pub fn block_index_range(blocks: usize) -> Result<(usize, usize)> {
    if blocks < 3 {
        return Err(Error::InvalidParameter(format!("{blocks} blocks leave no admissible block index")));
    }
    Ok((2, blocks - 1))
}

pub fn make_trial<R: Rng + ?Sized>(sentence: &[u8], sentence_id: usize, k: usize, rng: &mut R) -> Result<Trial> {
    if k == 0 || sentence.len() % k != 0 {
        return Err(Error::InvalidParameter(format!("sentence of {} bytes is not a whole number of {k}-byte blocks", sentence.len())));
    }
    let (lo, hi) = block_index_range(sentence.len() / k)?;
    let g = rng.random_range(lo..=hi);
    Ok(Trial { ctx: sentence[..g * k].to_vec(), block: sentence[g * k..(g + 1) * k].to_vec(), g, sentence_id })
}

/// Deterministic split by a seeded hash of each item's content, so repeated
/// sentences always land on the same side; `ratio` is the expected training fraction.
pub fn split_train_test<T: AsRef<[u8]> + Clone>(items: &[T], ratio: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidParameter(format!("split ratio {ratio} must lie in [0, 1]")));
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for item in items {
        let bytes = item.as_ref();
        let words: Vec<u64> = std::iter::once(seed)
            .chain(std::iter::once(bytes.len() as u64))
            .chain(bytes.chunks(8).map(|c| c.iter().rev().fold(0u64, |w, &b| (w << 8) | b as u64)))
            .collect();
        let u = (mix(&words) >> 11) as f64 / (1u64 << 53) as f64;
        if u < ratio { &mut train } else { &mut test }.push(item.clone());
    }
    Ok((train, test))
}
