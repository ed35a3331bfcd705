//! Real/synthetic budgeting: sparsity, synthetic volume and annealing
//! schedules resolved into per-epoch counts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::floor_fraction;
use crate::error::{Error, Result};
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixMode {
    Real,
    Mixed,
    Anneal,
    AnnealInverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Hard,
    Gradual,
}

/// How sparsity picks the retained real windows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityMode {
    /// Uniform subset without replacement, kept in temporal order.
    #[default]
    Random,
    /// The earliest windows.
    Prefix,
}

macro_rules! text_enum {
    ($ty:ty, $field:literal, $($name:literal => $variant:expr),+) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    other => Err(Error::invalid(
                        $field,
                        format!("unknown value {other:?}, expected one of {}", [$($name),+].join(", ")),
                    )),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                $(if *self == $variant { return f.write_str($name); })+
                unreachable!()
            }
        }
    };
}

text_enum!(MixMode, "mode",
    "real" => MixMode::Real,
    "mixed" => MixMode::Mixed,
    "anneal" => MixMode::Anneal,
    "anneal_inverse" => MixMode::AnnealInverse);
text_enum!(Strategy, "strategy", "hard" => Strategy::Hard, "gradual" => Strategy::Gradual);
text_enum!(SparsityMode, "sparsity_mode", "random" => SparsityMode::Random, "prefix" => SparsityMode::Prefix);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixPlan {
    pub mode: MixMode,
    pub r_synth: f64,
    pub sparsity: f64,
    pub sparsity_mode: SparsityMode,
    pub strategy: Strategy,
    pub anneal_epoch: usize,
    pub epochs: usize,
    pub cache_size: usize,
}

impl Default for MixPlan {
    fn default() -> Self {
        MixPlan {
            mode: MixMode::Real,
            r_synth: 0.0,
            sparsity: 1.0,
            sparsity_mode: SparsityMode::Random,
            strategy: Strategy::Hard,
            anneal_epoch: 5,
            epochs: 10,
            cache_size: 0,
        }
    }
}

impl MixPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_synth >= 0.0) || !self.r_synth.is_finite() {
            return Err(Error::invalid(
                "r_synth",
                format!("must be finite and >= 0, got {}", self.r_synth),
            ));
        }
        check_sparsity(self.sparsity)?;
        if self.epochs == 0 {
            return Err(Error::invalid("epochs", "must be >= 1"));
        }
        if self.anneal_epoch >= self.epochs {
            return Err(Error::invalid(
                "anneal_epoch",
                format!("must be in [0, {}), got {}", self.epochs, self.anneal_epoch),
            ));
        }
        if self.is_anneal() && self.strategy == Strategy::Gradual && self.epochs < 2 {
            return Err(Error::invalid(
                "epochs",
                "gradual annealing needs at least 2 epochs",
            ));
        }
        Ok(())
    }

    pub fn is_anneal(&self) -> bool {
        matches!(self.mode, MixMode::Anneal | MixMode::AnnealInverse)
    }

    /// `(r_start, r_end)` for the anneal modes.
    pub fn endpoints(&self) -> Option<(f64, f64)> {
        match self.mode {
            MixMode::Anneal => Some((1.0, 0.0)),
            MixMode::AnnealInverse => Some((0.0, 1.0)),
            _ => None,
        }
    }

    pub fn from_json(text: &str) -> Result<MixPlan> {
        let plan: MixPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn check_sparsity(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::invalid(
            "sparsity",
            format!("must be in (0, 1], got {s}"),
        ));
    }
    Ok(())
}

/// Retained window indices, ascending, `floor(s * n)` of them.
pub fn apply_sparsity(s_stream: &mut RngStream, n_windows: usize, s: f64) -> Result<Vec<usize>> {
    apply_sparsity_with(s_stream, n_windows, s, SparsityMode::Random)
}

pub fn apply_sparsity_with(
    s_stream: &mut RngStream,
    n_windows: usize,
    s: f64,
    mode: SparsityMode,
) -> Result<Vec<usize>> {
    check_sparsity(s)?;
    let keep = floor_fraction(n_windows, s).min(n_windows);
    if keep == n_windows {
        return Ok((0..n_windows).collect());
    }
    Ok(match mode {
        SparsityMode::Prefix => (0..keep).collect(),
        SparsityMode::Random => {
            let mut idx = rand::seq::index::sample(s_stream, n_windows, keep).into_vec();
            idx.sort_unstable();
            idx
        }
    })
}

/// Synthetic volume as a multiple of the pre-sparsity training size.
pub fn synth_count(orig_train_size: usize, r_synth: f64) -> usize {
    if !(r_synth > 0.0) {
        return 0;
    }
    floor_fraction(orig_train_size, r_synth)
}

pub fn anneal_ratio(e: usize, plan: &MixPlan) -> Result<f64> {
    if e >= plan.epochs {
        return Err(Error::invalid(
            "epoch",
            format!("must be in [0, {}), got {e}", plan.epochs),
        ));
    }
    let (start, end) = match plan.endpoints() {
        Some(p) => p,
        None if plan.mode == MixMode::Mixed => return Ok(plan.r_synth),
        None => return Ok(0.0),
    };
    match plan.strategy {
        Strategy::Hard => Ok(if e < plan.anneal_epoch { start } else { end }),
        Strategy::Gradual => {
            if plan.epochs < 2 {
                return Err(Error::invalid(
                    "epochs",
                    "gradual annealing needs at least 2 epochs",
                ));
            }
            Ok(start + e as f64 / (plan.epochs - 1) as f64 * (end - start))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochCounts {
    pub epoch: usize,
    pub n_real: usize,
    pub n_synth: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochPlan {
    pub epochs: Vec<EpochCounts>,
}

impl EpochPlan {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EpochCounts> {
        self.epochs.iter()
    }

    pub fn total_synth(&self) -> usize {
        self.epochs.iter().map(|e| e.n_synth).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

impl<'a> IntoIterator for &'a EpochPlan {
    type Item = &'a EpochCounts;
    type IntoIter = std::slice::Iter<'a, EpochCounts>;

    fn into_iter(self) -> Self::IntoIter {
        self.epochs.iter()
    }
}

impl IntoIterator for EpochPlan {
    type Item = EpochCounts;
    type IntoIter = std::vec::IntoIter<EpochCounts>;

    fn into_iter(self) -> Self::IntoIter {
        self.epochs.into_iter()
    }
}

/// Aligned plain-text schedule table.
impl fmt::Display for EpochPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<[String; 4]> = self
            .epochs
            .iter()
            .map(|e| {
                [
                    e.epoch.to_string(),
                    format!("{:.4}", e.ratio),
                    e.n_real.to_string(),
                    e.n_synth.to_string(),
                ]
            })
            .collect();
        let header = ["epoch", "ratio", "n_real", "n_synth"];
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, cells: [&str; 4]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            writeln!(f, "{}", parts.join("  "))
        };
        line(f, header)?;
        for row in &rows {
            line(f, [&row[0], &row[1], &row[2], &row[3]])?;
        }
        Ok(())
    }
}

/// Synthetic count for one anneal epoch, `floor(orig * r(e))`, computed in
/// integers so gradual schedules are exact.
fn anneal_synth(plan: &MixPlan, e: usize, orig: usize) -> usize {
    let (start, _) = plan.endpoints().expect("anneal mode");
    let forward = start == 1.0;
    match plan.strategy {
        Strategy::Hard => {
            if (e < plan.anneal_epoch) == forward {
                orig
            } else {
                0
            }
        }
        Strategy::Gradual => {
            let span = (plan.epochs - 1) as u128;
            let steps = if forward { span - e as u128 } else { e as u128 };
            (orig as u128 * steps / span) as usize
        }
    }
}

pub fn build_epoch_plan(
    plan: &MixPlan,
    orig_train_size: usize,
    sparse_train_size: usize,
) -> Result<EpochPlan> {
    plan.validate()?;
    let epochs = (0..plan.epochs)
        .map(|e| {
            let ratio = anneal_ratio(e, plan)?;
            let n_synth = match plan.mode {
                MixMode::Real => 0,
                MixMode::Mixed => synth_count(orig_train_size, plan.r_synth),
                MixMode::Anneal | MixMode::AnnealInverse => anneal_synth(plan, e, orig_train_size),
            };
            Ok(EpochCounts {
                epoch: e,
                n_real: sparse_train_size,
                n_synth,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpochPlan { epochs })
}
