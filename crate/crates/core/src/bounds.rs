//! Normal-approximation BLER for the binary-input AWGN channel.
//!
//! Capacity and dispersion are Gauss-Hermite integrals of the information
//! density over the Gaussian output.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::channel::ebn0_to_sigma_sq;
use crate::error::{Error, Result};
use crate::numeric::softplus;

/// Quadrature size.
pub const HERMITE_NODES: usize = 100;

/// Nodes and weights for `int exp(-x^2) f(x) dx`, by Newton iteration on the
/// orthonormal Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (pim4, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let step = p1 / pp;
            z -= step;
            if step.abs() <= 3e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn hermite() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(HERMITE_NODES))
}

/// Capacity (bits) and dispersion (bits^2) of BPSK over AWGN with noise variance `sigma_sq`.
pub fn biawgn_c_v(sigma_sq: f64) -> Result<(f64, f64)> {
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise variance {sigma_sq} must be positive")));
    }
    let (x, w) = hermite();
    let sigma = sigma_sq.sqrt();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (&xi, &wi) in x.iter().zip(w) {
        // Send +1, receive y = 1 + sigma z with z = sqrt(2) x.
        let y = 1.0 + sigma * std::f64::consts::SQRT_2 * xi;
        let density = 1.0 - softplus(-2.0 * y / sigma_sq) / std::f64::consts::LN_2;
        m1 += wi * density;
        m2 += wi * density * density;
    }
    let norm = std::f64::consts::PI.sqrt();
    let c = m1 / norm;
    Ok((c, (m2 / norm - c * c).max(0.0)))
}

/// Standard Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// `Q((n C - k + log2(n) / 2) / sqrt(n V))`.
pub fn na_bler(n: usize, k: usize, sigma_sq: f64) -> Result<f64> {
    if !(n > k && k > 0) {
        return Err(Error::InvalidParameter(format!("need n > k > 0, got n = {n}, k = {k}")));
    }
    let (c, v) = biawgn_c_v(sigma_sq)?;
    let nf = n as f64;
    let arg = (nf * c - k as f64 + 0.5 * nf.log2()) / (nf * v).sqrt();
    Ok(q_function(arg))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NaPoint {
    pub ebn0_db: f64,
    pub n: usize,
    pub k: usize,
    pub sigma_sq: f64,
    pub epsilon: f64,
}

/// Bound over an Eb/N0 grid, converting with the given rate.
pub fn na_curve(n: usize, k: usize, rate: f64, ebn0_db: &[f64]) -> Result<Vec<NaPoint>> {
    ebn0_db
        .iter()
        .map(|&db| {
            let sigma_sq = ebn0_to_sigma_sq(db, rate);
            Ok(NaPoint { ebn0_db: db, n, k, sigma_sq, epsilon: na_bler(n, k, sigma_sq)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;

    #[test]
    fn hermite_moments() {
        let (x, w) = gauss_hermite(HERMITE_NODES);
        let sp = std::f64::consts::PI.sqrt();
        assert!((w.iter().sum::<f64>() - sp).abs() < 1e-12);
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m2 - sp / 2.0).abs() < 1e-12);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.75 * sp).abs() < 1e-11);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
    }

    #[test]
    fn capacity_limits() {
        let (c, _) = biawgn_c_v(1e6).unwrap();
        assert!(c < 1e-5);
        let (c, v) = biawgn_c_v(1e-4).unwrap();
        assert!((c - 1.0).abs() < 1e-9 && v < 1e-9);
        assert!(biawgn_c_v(0.0).is_err());
    }

    #[test]
    fn capacity_matches_monte_carlo() {
        let sigma_sq: f64 = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 10_000_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            let y = 1.0 + sigma_sq.sqrt() * z;
            acc += 1.0 - softplus(-2.0 * y / sigma_sq) / std::f64::consts::LN_2;
        }
        let (c, _) = biawgn_c_v(sigma_sq).unwrap();
        assert!((acc / n as f64 - c).abs() < 1e-3);
    }

    #[test]
    fn bound_is_monotone() {
        let pts = na_curve(128, 64, 0.5, &(0..13).map(|i| i as f64 * 0.25).collect::<Vec<_>>()).unwrap();
        assert!(pts.windows(2).all(|p| p[1].epsilon < p[0].epsilon));
        assert!(pts.iter().all(|p| p.epsilon > 0.0 && p.epsilon < 1.0));
        assert!(na_bler(64, 64, 1.0).is_err());
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!((q_function(1.959963984540054) - 0.025).abs() < 1e-12);
    }
}
