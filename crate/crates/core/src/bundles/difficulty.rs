//! Difficulty sampling and the difficulty-scaled parameter laws.
//!
//! Every law is linear in `d` unless noted. Higher difficulty means flatter
//! variance allocations, more harmonics, more frequent regime changes,
//! stronger volatility feedback, denser events and more observation noise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BundleKind;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const ALPHA_EASY: f64 = 80.0;
pub const ALPHA_HARD: f64 = 6.0;

/// Default mixture over difficulty: (weight, mean, std) per truncated-normal
/// component, each truncated to `[0, 1]`.
pub const DEFAULT_MIXTURE: [(f64, f64, f64); 3] =
    [(0.30, 0.20, 0.08), (0.40, 0.50, 0.10), (0.30, 0.80, 0.08)];

/// How a panel's difficulty is drawn. Serialized as a mode name or a bare
/// number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DifficultyRepr", into = "DifficultyRepr")]
pub enum DifficultySpec {
    #[default]
    DefaultMixture,
    Uniform,
    Easy,
    Medium,
    Hard,
    /// A fixed value in `[0, 1]`.
    Fixed(f64),
}

impl DifficultySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DifficultySpec::Fixed(d) => check_difficulty(d),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum DifficultyRepr {
    Value(f64),
    Name(String),
}

impl TryFrom<DifficultyRepr> for DifficultySpec {
    type Error = Error;

    fn try_from(repr: DifficultyRepr) -> Result<Self> {
        match repr {
            DifficultyRepr::Value(d) => {
                check_difficulty(d)?;
                Ok(DifficultySpec::Fixed(d))
            }
            DifficultyRepr::Name(name) => name.parse(),
        }
    }
}

impl From<DifficultySpec> for DifficultyRepr {
    fn from(spec: DifficultySpec) -> Self {
        match spec {
            DifficultySpec::Fixed(d) => DifficultyRepr::Value(d),
            DifficultySpec::DefaultMixture => DifficultyRepr::Name("default_mixture".into()),
            other => DifficultyRepr::Name(other.to_string()),
        }
    }
}

impl fmt::Display for DifficultySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DifficultySpec::DefaultMixture => f.write_str("default"),
            DifficultySpec::Uniform => f.write_str("uniform"),
            DifficultySpec::Easy => f.write_str("easy"),
            DifficultySpec::Medium => f.write_str("medium"),
            DifficultySpec::Hard => f.write_str("hard"),
            DifficultySpec::Fixed(d) => write!(f, "{d}"),
        }
    }
}

impl FromStr for DifficultySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "default" | "default_mixture" => Ok(DifficultySpec::DefaultMixture),
            "uniform" => Ok(DifficultySpec::Uniform),
            "easy" => Ok(DifficultySpec::Easy),
            "medium" => Ok(DifficultySpec::Medium),
            "hard" => Ok(DifficultySpec::Hard),
            other => {
                let d: f64 = other.parse().map_err(|_| {
                    Error::invalid(
                        "difficulty",
                        format!("expected default|uniform|easy|medium|hard or a number in [0, 1], got {s:?}"),
                    )
                })?;
                check_difficulty(d)?;
                Ok(DifficultySpec::Fixed(d))
            }
        }
    }
}

pub(crate) fn check_difficulty(d: f64) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(Error::invalid(
            "d",
            format!("difficulty must be in [0, 1], got {d}"),
        ))
    }
}

pub fn sample_difficulty(s: &mut RngStream, spec: DifficultySpec) -> Result<f64> {
    match spec {
        DifficultySpec::DefaultMixture => {
            let weights: Vec<f64> = DEFAULT_MIXTURE.iter().map(|c| c.0).collect();
            let (_, mu, sigma) = DEFAULT_MIXTURE[s.categorical(&weights)?];
            s.trunc_normal(mu, sigma, 0.0, 1.0)
        }
        DifficultySpec::Uniform => Ok(s.next_f64()),
        DifficultySpec::Easy => s.beta(2.0, 5.0),
        DifficultySpec::Medium => s.beta(2.0, 2.0),
        DifficultySpec::Hard => s.beta(5.0, 2.0),
        DifficultySpec::Fixed(d) => {
            check_difficulty(d)?;
            Ok(d)
        }
    }
}

/// Dirichlet concentration `(1 - d) * 80 + d * 6`.
pub fn concentration(d: f64) -> Result<f64> {
    check_difficulty(d)?;
    Ok((1.0 - d) * ALPHA_EASY + d * ALPHA_HARD)
}

/// Target variance shares of a bundle's three components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceTargets {
    pub tau: [f64; 3],
}

/// Easy (`d = 0`) and hard (`d = 1`) target shares for one bundle kind.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorPair {
    pub easy: [f64; 3],
    pub hard: [f64; 3],
}

/// Per-kind variance-share anchors. Only the seasonal-trend pair is fixed by
/// the method; the other three are tunable defaults.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceAnchors {
    pub st: AnchorPair,
    pub nr: AnchorPair,
    pub lm: AnchorPair,
    pub ve: AnchorPair,
}

impl Default for VarianceAnchors {
    fn default() -> Self {
        VarianceAnchors {
            st: AnchorPair {
                easy: [0.92, 0.06, 0.02],
                hard: [0.50, 0.20, 0.30],
            },
            nr: AnchorPair {
                easy: [0.80, 0.15, 0.05],
                hard: [0.55, 0.30, 0.15],
            },
            lm: AnchorPair {
                easy: [0.90, 0.05, 0.05],
                hard: [0.60, 0.20, 0.20],
            },
            ve: AnchorPair {
                easy: [0.70, 0.20, 0.10],
                hard: [0.50, 0.35, 0.15],
            },
        }
    }
}

impl VarianceAnchors {
    pub fn pair(&self, kind: BundleKind) -> &AnchorPair {
        match kind {
            BundleKind::St => &self.st,
            BundleKind::Nr => &self.nr,
            BundleKind::Lm => &self.lm,
            BundleKind::Ve => &self.ve,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in BundleKind::ALL {
            let pair = self.pair(kind);
            for tau in [pair.easy, pair.hard] {
                if tau.iter().any(|t| !(*t > 0.0)) || (tau.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(
                        "tau",
                        format!("{kind} anchors must be positive and sum to 1, got {tau:?}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Linear interpolation between the easy and hard anchors.
    pub fn target_fractions(&self, kind: BundleKind, d: f64) -> Result<VarianceTargets> {
        check_difficulty(d)?;
        let pair = self.pair(kind);
        let mut tau = [0.0; 3];
        for (k, t) in tau.iter_mut().enumerate() {
            *t = pair.easy[k] + d * (pair.hard[k] - pair.easy[k]);
        }
        Ok(VarianceTargets { tau })
    }
}

pub fn target_fractions(kind: BundleKind, d: f64) -> Result<VarianceTargets> {
    VarianceAnchors::default().target_fractions(kind, d)
}

/// Observation-noise scale, `U(0.02, 0.05 + 0.25 d)`.
pub fn noise_sigma(s: &mut RngStream, d: f64) -> Result<f64> {
    check_difficulty(d)?;
    Ok(s.uniform(0.02, 0.05 + 0.25 * d))
}

/// Harmonic amplitude decay exponent; smaller exponents keep more power in
/// higher harmonics.
pub fn fourier_decay(d: f64) -> f64 {
    2.2 - 1.6 * d
}

/// Std of the regime means.
pub fn regime_mean_scale(d: f64) -> f64 {
    0.5 + 1.5 * d
}

/// Std of the per-step regime slopes.
pub fn regime_slope_scale(d: f64) -> f64 {
    0.001 + 0.01 * d
}

pub fn stay_probability(d: f64) -> f64 {
    0.995 - 0.045 * d
}

/// `(omega, alpha_G, beta_G)` with unit unconditional variance.
pub fn garch_params(d: f64) -> (f64, f64, f64) {
    let alpha = 0.05 + 0.20 * d;
    let beta = (0.97 - alpha).min(0.9);
    (1.0 - alpha - beta, alpha, beta)
}

pub const HAWKES_DECAY: f64 = 0.5;

/// `(lambda_0, A, delta)` with branching ratio `A / delta = 0.2 + 0.5 d`.
pub fn hawkes_params(d: f64) -> (f64, f64, f64) {
    let lambda0 = 0.005 + 0.02 * d;
    let branching = 0.2 + 0.5 * d;
    (lambda0, branching * HAWKES_DECAY, HAWKES_DECAY)
}

pub fn spike_amplitude(d: f64) -> f64 {
    2.0 + 6.0 * d
}

/// Probability that a long-memory channel carries a seasonal overlay.
pub fn seasonal_overlay_probability(d: f64) -> f64 {
    0.05 + 0.40 * d
}

/// Overlays are drawn at a reduced difficulty.
pub const OVERLAY_DIFFICULTY_SCALE: f64 = 0.3;
