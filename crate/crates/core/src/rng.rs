//! Hierarchically splittable random streams.
//!
//! A stream is identified by a master seed and a path of child indices. The
//! path is hashed into a ChaCha8 key, so the sequence a stream produces depends
//! only on `(master_seed, path)` and never on how many values its parent or
//! siblings have consumed. Channels, samples and epochs each get their own
//! child stream, which keeps parallel generation bit-identical to sequential
//! generation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Acceptance probability below which truncated-normal sampling switches
/// from rejection to inverse-CDF.
const MIN_REJECTION_ACCEPTANCE: f64 = 0.01;

/// The identity of a stream: everything needed to rebuild it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub master_seed: u64,
    pub path: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct RngStream {
    id: StreamId,
    rng: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_key(master_seed: u64, path: &[u32]) -> [u8; 32] {
    let mut h = splitmix64(master_seed ^ 0x5EED_5EED_5EED_5EED);
    for (depth, &index) in path.iter().enumerate() {
        // depth is mixed in so that [a, b] and [b, a] hash apart
        let tagged = (u64::from(index) << 16) ^ (depth as u64 + 1);
        h = splitmix64(h ^ splitmix64(tagged));
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = splitmix64(h.wrapping_add((i as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    key
}

impl RngStream {
    /// Root stream for a master seed.
    pub fn new(master_seed: u64) -> Self {
        Self::from_id(StreamId {
            master_seed,
            path: Vec::new(),
        })
    }

    pub fn from_id(id: StreamId) -> Self {
        let rng = ChaCha8Rng::from_seed(derive_key(id.master_seed, &id.path));
        RngStream { id, rng }
    }

    pub fn id(&self) -> &StreamId {
        &self.id
    }

    pub fn master_seed(&self) -> u64 {
        self.id.master_seed
    }

    pub fn path(&self) -> &[u32] {
        &self.id.path
    }

    /// Child stream at `path + [index]`. The parent is left untouched, and
    /// the child starts from its own fresh position regardless of how far
    /// the parent has advanced.
    pub fn derive_child(&self, index: u32) -> RngStream {
        let mut path = self.id.path.clone();
        path.push(index);
        Self::from_id(StreamId {
            master_seed: self.id.master_seed,
            path,
        })
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in the open interval `(0, 1)`.
    fn next_open01(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be non-empty");
        rand::Rng::random_range(self, 0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn normal(&mut self, mu: f64, sigma: f64) -> f64 {
        mu + sigma * self.standard_normal()
    }

    /// Normal restricted to `[lo, hi]`.
    pub fn trunc_normal(&mut self, mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) {
            return Err(Error::invalid(
                "bounds",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::invalid(
                "sigma",
                format!("must be finite and >= 0, got {sigma}"),
            ));
        }
        if sigma == 0.0 {
            return Ok(mu.clamp(lo, hi));
        }
        let a = (lo - mu) / sigma;
        let b = (hi - mu) / sigma;
        // Work in the lower tail so that both CDF values stay small and no
        // precision is lost to cancellation near 1.
        let (a_l, b_l, flip) = if a > 0.0 {
            (-b, -a, true)
        } else {
            (a, b, false)
        };
        let std = Normal::standard();
        let pa = std.cdf(a_l);
        let pb = std.cdf(b_l);
        let mass = pb - pa;

        if mass >= MIN_REJECTION_ACCEPTANCE {
            loop {
                let x = mu + sigma * self.standard_normal();
                if (lo..=hi).contains(&x) {
                    return Ok(x);
                }
            }
        }

        let z = if mass > 0.0 {
            let u = pa + mass * self.next_open01();
            std.inverse_cdf(u).clamp(a_l, b_l)
        } else {
            // both CDF values underflowed: all mass sits at the bound nearest mu
            b_l
        };
        let z = if flip { -z } else { z };
        Ok((mu + sigma * z).clamp(lo, hi))
    }

    /// Logarithm of a Gamma(shape, 1) draw (Marsaglia-Tsang). Kept in log
    /// space so that very small shapes cannot underflow to zero.
    fn log_gamma(&mut self, shape: f64) -> f64 {
        if shape < 1.0 {
            let u = self.next_open01();
            return self.log_gamma(shape + 1.0) + u.ln() / shape;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let z = self.standard_normal();
            let v = 1.0 + c * z;
            if v <= 0.0 {
                continue;
            }
            let v3 = v * v * v;
            let u = self.next_open01();
            if u.ln() < 0.5 * z * z + d - d * v3 + d * v3.ln() {
                return d.ln() + v3.ln();
            }
        }
    }

    pub fn gamma(&mut self, shape: f64) -> Result<f64> {
        check_shape("shape", shape)?;
        Ok(self.log_gamma(shape).exp())
    }

    /// Beta(a, b) through the ratio of two gamma draws.
    pub fn beta(&mut self, a: f64, b: f64) -> Result<f64> {
        check_shape("a", a)?;
        check_shape("b", b)?;
        Ok(self.dirichlet(&[a, b])?[0])
    }

    /// Dirichlet draw via normalised gamma variates.
    pub fn dirichlet(&mut self, alpha: &[f64]) -> Result<Vec<f64>> {
        if alpha.is_empty() {
            return Err(Error::invalid("alpha", "concentration vector is empty"));
        }
        for &a in alpha {
            check_shape("alpha", a)?;
        }
        let logs: Vec<f64> = alpha.iter().map(|&a| self.log_gamma(a)).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut w: Vec<f64> = logs.iter().map(|&l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        Ok(w)
    }

    /// Index drawn with probability proportional to `weights`.
    pub fn categorical(&mut self, weights: &[f64]) -> Result<usize> {
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(
                "weights",
                "entries must be finite and nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights", "all weights are zero"));
        }
        let u = self.next_f64() * total;
        let mut cum = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                cum += w;
                last_positive = i;
                if u < cum {
                    return Ok(i);
                }
            }
        }
        Ok(last_positive)
    }
}

fn check_shape(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: usize = 100_000;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn std_dev(xs: &[f64]) -> f64 {
        let m = mean(xs);
        (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
    }

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (mean(a), mean(b));
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    /// Mean of N(mu, sigma) truncated to [lo, hi] by Simpson quadrature.
    fn trunc_normal_mean_quadrature(mu: f64, sigma: f64, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let pdf = |x: f64| (-0.5 * ((x - mu) / sigma).powi(2)).exp();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            num += w * x * pdf(x);
            den += w * pdf(x);
        }
        num / den
    }

    #[test]
    fn derive_child_appends_index() {
        let parent = RngStream::new(7);
        let child = parent.derive_child(0);
        assert_eq!(child.master_seed(), 7);
        assert_eq!(child.path(), &[0]);
        assert!(parent.path().is_empty());
    }

    #[test]
    fn derive_child_is_pure() {
        let mut parent = RngStream::new(7);
        let mut a = parent.derive_child(0);
        parent.next_u64();
        let mut b = parent.derive_child(0);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn sibling_streams_are_uncorrelated() {
        let parent = RngStream::new(7);
        let mut c0 = parent.derive_child(0);
        let mut c1 = parent.derive_child(1);
        let a: Vec<f64> = (0..N).map(|_| c0.next_f64()).collect();
        let b: Vec<f64> = (0..N).map(|_| c1.next_f64()).collect();
        assert!(correlation(&a, &b).abs() < 0.02);
    }

    #[test]
    fn path_order_matters() {
        let mut a = RngStream::new(1).derive_child(2).derive_child(3);
        let mut b = RngStream::new(1).derive_child(3).derive_child(2);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn replay_is_bit_exact() {
        let mut a = RngStream::new(99).derive_child(4);
        let mut b = a.clone();
        assert_eq!(a.standard_normal().to_bits(), b.standard_normal().to_bits());
        assert_eq!(
            a.dirichlet(&[0.5, 2.0]).unwrap(),
            b.dirichlet(&[0.5, 2.0]).unwrap()
        );
    }

    #[test]
    fn trunc_normal_degenerate_spread() {
        let mut s = RngStream::new(1);
        assert_eq!(s.trunc_normal(0.5, 0.0, 0.0, 1.0).unwrap(), 0.5);
        let x = s.trunc_normal(0.5, 1e-12, 0.0, 1.0).unwrap();
        assert!((x - 0.5).abs() < 1e-9);
    }

    #[test]
    fn trunc_normal_mean_matches_quadrature() {
        // closed form: mu + sigma * pdf(2.5) / cdf(2.5) = 0.201411
        let oracle = trunc_normal_mean_quadrature(0.2, 0.08, 0.0, 1.0);
        assert!((oracle - 0.201411).abs() < 1e-5, "oracle {oracle}");
        let mut s = RngStream::new(11);
        let xs: Vec<f64> = (0..N)
            .map(|_| s.trunc_normal(0.2, 0.08, 0.0, 1.0).unwrap())
            .collect();
        assert!((mean(&xs) - oracle).abs() < 0.005);
    }

    #[test]
    fn trunc_normal_far_tails_stay_in_bounds() {
        let mut s = RngStream::new(3);
        let hi_side: Vec<f64> = (0..1000)
            .map(|_| s.trunc_normal(2.0, 0.1, 0.0, 1.0).unwrap())
            .collect();
        assert!(hi_side.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(mean(&hi_side) > 0.95);
        let lo_side: Vec<f64> = (0..1000)
            .map(|_| s.trunc_normal(-2.0, 0.1, 0.0, 1.0).unwrap())
            .collect();
        assert!(lo_side.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(mean(&lo_side) < 0.05);
        // entire mass beyond double precision reach
        assert_eq!(s.trunc_normal(100.0, 0.1, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn trunc_normal_rejects_bad_input() {
        let mut s = RngStream::new(3);
        assert!(s.trunc_normal(0.0, -1.0, 0.0, 1.0).is_err());
        assert!(s.trunc_normal(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn beta_means() {
        let mut s = RngStream::new(5);
        for (a, b) in [(2.0, 5.0), (2.0, 2.0), (5.0, 2.0)] {
            let xs: Vec<f64> = (0..N).map(|_| s.beta(a, b).unwrap()).collect();
            assert!(xs.iter().all(|x| *x > 0.0 && *x < 1.0));
            assert!((mean(&xs) - a / (a + b)).abs() < 0.005, "Beta({a},{b})");
        }
        assert!(s.beta(0.0, 1.0).is_err());
        assert!(s.beta(1.0, -2.0).is_err());
    }

    #[test]
    fn dirichlet_single_component() {
        let mut s = RngStream::new(5);
        assert_eq!(s.dirichlet(&[3.7]).unwrap(), vec![1.0]);
        assert_eq!(s.dirichlet(&[1e-3]).unwrap(), vec![1.0]);
    }

    #[test]
    fn dirichlet_mean_tracks_targets() {
        let tau = [0.92, 0.06, 0.02];
        let alpha: Vec<f64> = tau.iter().map(|t| 80.0 * t).collect();
        let mut s = RngStream::new(8);
        let mut acc = [0.0; 3];
        for _ in 0..N {
            let w = s.dirichlet(&alpha).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for k in 0..3 {
                acc[k] += w[k];
            }
        }
        for k in 0..3 {
            assert!((acc[k] / N as f64 - tau[k]).abs() < 0.01);
        }
    }

    #[test]
    fn dirichlet_spread_shrinks_with_concentration() {
        // Var(w_k) = m_k (1 - m_k) / (c + 1): std ratio sqrt(81 / 7) = 3.40
        let mut s = RngStream::new(9);
        let third = 1.0 / 3.0;
        let loose: Vec<f64> = (0..N)
            .map(|_| s.dirichlet(&[6.0 * third; 3]).unwrap()[0])
            .collect();
        let tight: Vec<f64> = (0..N)
            .map(|_| s.dirichlet(&[80.0 * third; 3]).unwrap()[0])
            .collect();
        assert!(std_dev(&loose) >= 3.0 * std_dev(&tight));
        let expected = (third * (1.0 - third) / 7.0).sqrt();
        assert!((std_dev(&loose) - expected).abs() < 0.005);
    }

    #[test]
    fn dirichlet_rejects_bad_input() {
        let mut s = RngStream::new(1);
        assert!(s.dirichlet(&[]).is_err());
        assert!(s.dirichlet(&[1.0, 0.0]).is_err());
        assert!(s.dirichlet(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn dirichlet_tiny_concentrations_never_nan() {
        let mut s = RngStream::new(2);
        for _ in 0..10_000 {
            let w = s.dirichlet(&[0.01, 0.01, 0.01]).unwrap();
            assert!(w.iter().all(|x| x.is_finite() && *x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn categorical_frequencies() {
        let mut s = RngStream::new(4);
        for _ in 0..1000 {
            assert_eq!(s.categorical(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0);
            assert!(s.categorical(&[0.5, 0.5]).unwrap() < 2);
        }
        let mut counts = [0usize; 4];
        for _ in 0..N {
            counts[s.categorical(&[0.25; 4]).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / N as f64 - 0.25).abs() < 0.01);
        }
        assert!(s.categorical(&[0.0, 0.0]).is_err());
        assert!(s.categorical(&[-0.5, 1.5]).is_err());
    }
}
