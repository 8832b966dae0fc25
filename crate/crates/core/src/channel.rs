//! BPSK over AWGN or a Gilbert-Elliott burst channel, calibrated to a common
//! Eb/N0 so both deliver the same average noise energy per bit.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gilbert-Elliott parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeParams {
    /// Stationary probability of the bad state.
    pub pi_b: f64,
    /// Mean bad-run length in bits, 1 / p_BG.
    pub mean_burst: f64,
    /// sigma_B^2 / sigma_G^2.
    pub rho_sq: f64,
}

impl Default for GeParams {
    fn default() -> Self {
        Self { pi_b: 0.10, mean_burst: 16.0, rho_sq: 100.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelKind {
    Awgn,
    GilbertElliott(GeParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    pub ebn0_db: f64,
    /// Code rate k_b / n_b.
    pub rate: f64,
}

/// Noise variances and transition probabilities derived from a [`ChannelConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Block-average variance the receiver uses for its LLRs.
    pub sigma_hat_sq: f64,
    pub sigma_g_sq: f64,
    pub sigma_b_sq: f64,
    pub p_gb: f64,
    pub p_bg: f64,
    /// Stationary bad-state probability (0 on AWGN).
    pub pi_b: f64,
}

/// sigma^2 = 1 / (2 R 10^(Eb/N0 / 10)).
pub fn ebn0_to_sigma_sq(ebn0_db: f64, rate: f64) -> f64 {
    1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))
}

pub fn calibrate(cfg: &ChannelConfig) -> Result<Calibration> {
    if !(cfg.rate > 0.0 && cfg.rate <= 1.0) || !cfg.ebn0_db.is_finite() {
        return Err(Error::DegenerateChannel(format!("rate {} / Eb/N0 {}", cfg.rate, cfg.ebn0_db)));
    }
    let s2 = ebn0_to_sigma_sq(cfg.ebn0_db, cfg.rate);
    match cfg.kind {
        ChannelKind::Awgn => Ok(Calibration::awgn(s2)),
        ChannelKind::GilbertElliott(ge) => Calibration::gilbert_elliott(s2, ge),
    }
}

impl Calibration {
    pub fn awgn(sigma_sq: f64) -> Self {
        Self { sigma_hat_sq: sigma_sq, sigma_g_sq: sigma_sq, sigma_b_sq: sigma_sq, p_gb: 0.0, p_bg: 1.0, pi_b: 0.0 }
    }

    pub fn gilbert_elliott(sigma_hat_sq: f64, ge: GeParams) -> Result<Self> {
        if !(ge.pi_b > 0.0 && ge.pi_b < 1.0) {
            return Err(Error::DegenerateChannel(format!("pi_B = {} must lie in (0, 1)", ge.pi_b)));
        }
        if ge.mean_burst < 1.0 || ge.rho_sq <= 1.0 {
            return Err(Error::DegenerateChannel(format!(
                "mean burst {} must be >= 1 and rho^2 {} > 1",
                ge.mean_burst, ge.rho_sq
            )));
        }
        let p_bg = 1.0 / ge.mean_burst;
        let p_gb = ge.pi_b * p_bg / (1.0 - ge.pi_b);
        if p_gb > 1.0 {
            return Err(Error::DegenerateChannel(format!("p_GB = {p_gb} exceeds 1")));
        }
        let sigma_g_sq = sigma_hat_sq / ((1.0 - ge.pi_b) + ge.pi_b * ge.rho_sq);
        Ok(Self { sigma_hat_sq, sigma_g_sq, sigma_b_sq: ge.rho_sq * sigma_g_sq, p_gb, p_bg, pi_b: ge.pi_b })
    }

    /// (1 - pi_B) sigma_G^2 + pi_B sigma_B^2, which equals `sigma_hat_sq`.
    pub fn mixture_variance(&self) -> f64 {
        (1.0 - self.pi_b) * self.sigma_g_sq + self.pi_b * self.sigma_b_sq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelState {
    Good,
    Bad,
}

/// What the receiver sees for one block, plus the hidden state trace.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: Vec<f64>,
    pub sigma_hat_sq: f64,
    /// Simulation bookkeeping; decoders never read this.
    pub hidden_states: Vec<ChannelState>,
}

#[derive(Debug, Clone, Copy)]
pub struct Channel {
    cal: Calibration,
    bursty: bool,
}

impl Channel {
    pub fn new(cfg: &ChannelConfig) -> Result<Self> {
        Ok(Self { cal: calibrate(cfg)?, bursty: matches!(cfg.kind, ChannelKind::GilbertElliott(_)) })
    }

    /// AWGN at an explicit noise variance.
    pub fn awgn_with_variance(sigma_sq: f64) -> Self {
        Self { cal: Calibration::awgn(sigma_sq), bursty: false }
    }

    /// Either channel at an explicit block-average noise variance.
    pub fn with_variance(kind: ChannelKind, sigma_hat_sq: f64) -> Result<Self> {
        match kind {
            ChannelKind::Awgn => Ok(Self::awgn_with_variance(sigma_hat_sq)),
            ChannelKind::GilbertElliott(ge) => {
                Ok(Self { cal: Calibration::gilbert_elliott(sigma_hat_sq, ge)?, bursty: true })
            }
        }
    }

    pub fn calibration(&self) -> &Calibration {
        &self.cal
    }

    /// State sequence of length `n`: stationary first draw, then one step per bit.
    pub fn states<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<ChannelState> {
        if !self.bursty {
            return vec![ChannelState::Good; n];
        }
        let mut out = Vec::with_capacity(n);
        let mut bad = rng.random::<f64>() < self.cal.pi_b;
        for _ in 0..n {
            out.push(if bad { ChannelState::Bad } else { ChannelState::Good });
            let u: f64 = rng.random();
            bad = if bad { u >= self.cal.p_bg } else { u < self.cal.p_gb };
        }
        out
    }

    /// BPSK-modulate `c` (0 -> +1, 1 -> -1) and add state-dependent Gaussian noise.
    pub fn transmit<R: Rng + ?Sized>(&self, c: &[u8], rng: &mut R) -> Observation {
        let states = self.states(c.len(), rng);
        let (sg, sb) = (self.cal.sigma_g_sq.sqrt(), self.cal.sigma_b_sq.sqrt());
        let y = c
            .iter()
            .zip(&states)
            .map(|(&bit, &s)| {
                let sym = 1.0 - 2.0 * (bit & 1) as f64;
                let sigma = if s == ChannelState::Bad { sb } else { sg };
                let z: f64 = rng.sample(StandardNormal);
                sym + sigma * z
            })
            .collect();
        Observation { y, sigma_hat_sq: self.cal.sigma_hat_sq, hidden_states: states }
    }
}

/// L = 2 y / sigma_hat^2; positive favours bit 0.
pub fn llr(obs: &Observation) -> Vec<f64> {
    let s = 2.0 / obs.sigma_hat_sq;
    obs.y.iter().map(|&y| s * y).collect()
}

/// Sign decisions on the channel output.
pub fn hard_bits(y: &[f64]) -> Vec<u8> {
    y.iter().map(|&v| (v < 0.0) as u8).collect()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn ge_cfg(db: f64) -> ChannelConfig {
        ChannelConfig { kind: ChannelKind::GilbertElliott(GeParams::default()), ebn0_db: db, rate: 0.5 }
    }

    #[test]
    fn calibration_values() {
        let awgn = calibrate(&ChannelConfig { kind: ChannelKind::Awgn, ebn0_db: 3.0, rate: 0.5 }).unwrap();
        assert!((awgn.sigma_hat_sq - 0.50119).abs() < 1e-5);
        let ge = calibrate(&ge_cfg(3.0)).unwrap();
        assert!((ge.sigma_g_sq - 0.045981).abs() < 1e-6);
        assert!((ge.sigma_b_sq - 4.5981).abs() < 1e-4);
        assert!((ge.p_bg - 0.0625).abs() < 1e-12);
        assert!((ge.p_gb - 0.0069444).abs() < 1e-7);
        assert_eq!(ge.sigma_hat_sq, awgn.sigma_hat_sq);
        assert!((ge.mixture_variance() - ge.sigma_hat_sq).abs() <= 4.0 * f64::EPSILON * ge.sigma_hat_sq);
    }

    #[test]
    fn degenerate_ge() {
        for pi_b in [0.0, 1.0] {
            let cfg = ChannelConfig {
                kind: ChannelKind::GilbertElliott(GeParams { pi_b, ..GeParams::default() }),
                ebn0_db: 3.0,
                rate: 0.5,
            };
            assert!(matches!(calibrate(&cfg), Err(Error::DegenerateChannel(_))));
        }
    }

    #[test]
    fn vanishing_noise_keeps_signs() {
        let ch = Channel::awgn_with_variance(1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c: Vec<u8> = (0..500).map(|i| (i % 3 == 0) as u8).collect();
        let obs = ch.transmit(&c, &mut rng);
        assert_eq!(hard_bits(&obs.y), c);
    }

    #[test]
    fn awgn_moments() {
        let ch = Channel::awgn_with_variance(0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let obs = ch.transmit(&vec![0u8; 1_000_000], &mut rng);
        let n = obs.y.len() as f64;
        let mean = obs.y.iter().map(|y| y - 1.0).sum::<f64>() / n;
        let var = obs.y.iter().map(|y| (y - 1.0 - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 4.0 * 0.5f64.sqrt() / 1e3, "mean {mean}");
        assert!((var / 0.5 - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn llr_formula() {
        let obs = Observation { y: vec![1.0, -1.0, 0.0], sigma_hat_sq: 0.5, hidden_states: vec![] };
        assert_eq!(llr(&obs), vec![4.0, -4.0, 0.0]);
    }
}
