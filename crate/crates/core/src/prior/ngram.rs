use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;
use std::sync::Arc;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{PriorBackend, PriorMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
struct ContextCounts {
    total: u64,
    // sorted by byte value
    counts: Vec<(u8, u32)>,
}

impl ContextCounts {
    fn bump(&mut self, b: u8) {
        self.total += 1;
        match self.counts.binary_search_by_key(&b, |&(v, _)| v) {
            Ok(i) => self.counts[i].1 += 1,
            Err(i) => self.counts.insert(i, (b, 1)),
        }
    }
}

/// Byte-level n-gram with additive smoothing and backoff to the longest seen context.
#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    delta: f64,
    // tables[len] maps a context of `len` bytes to its successor counts
    tables: Vec<HashMap<Vec<u8>, ContextCounts>>,
}

impl NgramModel {
    /// Count every context of length `0..order` in each sentence.
    pub fn train<I, S>(sentences: I, order: usize, delta: f64) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        if order == 0 {
            return Err(Error::InvalidParameter("n-gram order must be at least 1".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!("smoothing delta {delta} must be positive")));
        }
        let mut tables: Vec<HashMap<Vec<u8>, ContextCounts>> = vec![HashMap::new(); order];
        let mut seen_any = false;
        for s in sentences {
            let s = s.as_ref();
            for i in 0..s.len() {
                seen_any = true;
                for len in 0..order.min(i + 1) {
                    tables[len].entry(s[i - len..i].to_vec()).or_default().bump(s[i]);
                }
            }
        }
        if !seen_any {
            return Err(Error::EmptyCorpus("no bytes to train the n-gram prior on".into()));
        }
        Ok(Self { order, delta, tables })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same counts, different smoothing.
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    /// Natural-log conditional distribution of the next byte given `history`
    /// (only the last `order - 1` bytes matter).
    pub fn log_probs(&self, history: &[u8]) -> [f64; 256] {
        let max_len = (self.order - 1).min(history.len());
        let counts = (0..=max_len)
            .rev()
            .find_map(|len| self.tables[len].get(&history[history.len() - len..]))
            .expect("empty context is always trained");
        let denom = (counts.total as f64 + 256.0 * self.delta).ln();
        let mut row = [self.delta.ln() - denom; 256];
        for &(b, c) in &counts.counts {
            row[b as usize] = (c as f64 + self.delta).ln() - denom;
        }
        row
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = NgramFile {
            order: self.order,
            delta: self.delta,
            contexts: self
                .tables
                .iter()
                .flat_map(|t| t.iter())
                .map(|(ctx, c)| (B64.encode(ctx), c.counts.clone()))
                .collect(),
        };
        serde_json::to_writer(BufWriter::new(File::create(path)?), &file)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: NgramFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
        if file.order == 0 || !(file.delta > 0.0) {
            return Err(Error::InvalidParameter("corrupt n-gram model header".into()));
        }
        let mut tables = vec![HashMap::new(); file.order];
        for (ctx, counts) in file.contexts {
            let ctx = B64.decode(ctx).map_err(|e| Error::InvalidParameter(format!("n-gram context: {e}")))?;
            let Some(table) = tables.get_mut(ctx.len()) else {
                return Err(Error::InvalidParameter("n-gram context longer than order".into()));
            };
            let total = counts.iter().map(|&(_, c)| c as u64).sum();
            table.insert(ctx, ContextCounts { total, counts });
        }
        if !tables[0].contains_key(&Vec::new()) {
            return Err(Error::InvalidParameter("n-gram model lacks unigram counts".into()));
        }
        Ok(Self { order: file.order, delta: file.delta, tables })
    }
}

#[derive(Serialize, Deserialize)]
struct NgramFile {
    order: usize,
    delta: f64,
    contexts: Vec<(String, Vec<(u8, u32)>)>,
}

/// Context model times bit-flip likelihood: a stand-in denoiser that scores
/// each candidate byte by how well it continues the text and how close it is
/// to the noisy hard decision.
#[derive(Debug, Clone)]
pub struct NgramDenoiser {
    model: Arc<NgramModel>,
    flip_rate: f64,
}

impl NgramDenoiser {
    pub fn new(model: Arc<NgramModel>, flip_rate: f64) -> Result<Self> {
        if !(flip_rate > 0.0 && flip_rate < 0.5) {
            return Err(Error::InvalidParameter(format!("flip rate {flip_rate} must lie in (0, 0.5)")));
        }
        Ok(Self { model, flip_rate })
    }

    pub fn model(&self) -> &NgramModel {
        &self.model
    }
}

impl PriorBackend for NgramDenoiser {
    fn query(&self, ctx: &[u8], hd: &[u8]) -> Result<PriorMatrix> {
        let (lp, lq) = (self.flip_rate.ln(), (1.0 - self.flip_rate).ln());
        let keep = self.model.order - 1;
        let mut history: Vec<u8> = ctx[ctx.len().saturating_sub(keep)..].to_vec();
        let mut rows = Vec::with_capacity(hd.len());
        for &h in hd {
            let mut row = self.model.log_probs(&history);
            for (v, x) in row.iter_mut().enumerate() {
                let d = (v as u8 ^ h).count_ones() as f64;
                *x += d * lp + (8.0 - d) * lq;
            }
            rows.push(row);
            // Left context inside the block comes from the noisy hard decision.
            history.push(h);
            if history.len() > keep {
                history.remove(0);
            }
        }
        PriorMatrix::from_log_weights(rows)
    }

    fn name(&self) -> &str {
        "ngram"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::log_sum_exp;

    #[test]
    fn repeated_byte_is_certain() {
        let m = NgramModel::train(["aaaaaaaaaaaaaaaaaaaaaaaaaaaaaa"], 2, 0.01).unwrap();
        // c(a|a) = 29, total 29: (29 + .01) / (29 + 2.56)
        let p = m.log_probs(b"a")[b'a' as usize].exp();
        assert!((p - 29.01 / 31.56).abs() < 1e-12, "{p}");
        assert!(log_sum_exp(&m.log_probs(b"a")).abs() < 1e-12);
    }

    #[test]
    fn unseen_context_backs_off_to_unigram() {
        let m = NgramModel::train(["abab"], 2, 0.5).unwrap();
        assert_eq!(m.log_probs(b"z"), m.log_probs(b""));
        assert_ne!(m.log_probs(b"a"), m.log_probs(b""));
    }

    #[test]
    fn huge_delta_is_uniform() {
        let m = NgramModel::train(["hello world"], 3, 1e12).unwrap();
        let row = m.log_probs(b"he");
        for x in row {
            assert!((x + 256f64.ln()).abs() < 1e-6);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(NgramModel::train(Vec::<&[u8]>::new(), 2, 0.1), Err(Error::EmptyCorpus(_))));
        assert!(NgramModel::train(["a"], 0, 0.1).is_err());
        assert!(NgramModel::train(["a"], 2, 0.0).is_err());
        let m = Arc::new(NgramModel::train(["a"], 1, 0.1).unwrap());
        assert!(NgramDenoiser::new(m.clone(), 0.5).is_err());
        assert!(NgramDenoiser::new(m, 0.0).is_err());
    }

    #[test]
    fn denoiser_uses_context() {
        let corpus = vec!["he "; 1000];
        let m = Arc::new(NgramModel::train(corpus, 2, 0.01).unwrap());
        let d = NgramDenoiser::new(m, 0.1).unwrap();
        let p = d.query(b"h", b"x").unwrap();
        // 'e' differs from 'x' in 4 bits: P(e|h) (1/9)^4 beats P(x|h) by ~15x.
        assert_eq!(p.argmax(), b"e".to_vec());
    }

    #[test]
    fn flip_likelihood_alone_keeps_hard_decision() {
        // A model trained on all bytes equally often is uniform.
        let all: Vec<u8> = (0..=255u8).collect();
        let m = Arc::new(NgramModel::train([all], 1, 1.0).unwrap());
        let d = NgramDenoiser::new(m, 0.1).unwrap();
        let hd = b"?e s?fa!";
        assert_eq!(d.query(b"The cat", hd).unwrap().argmax(), hd.to_vec());
        // p -> 0 concentrates on the hard decision
        let sharp = NgramDenoiser::new(d.model.clone(), 1e-6).unwrap().query(b"", hd).unwrap();
        for (i, &h) in hd.iter().enumerate() {
            assert!(sharp.row(i)[h as usize] > -1e-3);
        }
    }

    #[test]
    fn save_load_roundtrip() {
        let m = NgramModel::train(["the cat sat on the mat", "a dog"], 3, 0.05).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        let back = NgramModel::load(&path).unwrap();
        for h in [&b"th"[..], b"", b"zz", b"at"] {
            assert_eq!(m.log_probs(h), back.log_probs(h));
        }
    }
}
