//! Statistical profiling of panels and bundle recommendation.
//!
//! The recommendation scores are simple heuristics, each in `[0, 1]` and
//! invariant to rescaling a channel:
//!
//! * ST: share of non-DC spectral power in the dominant seasonal peak.
//! * LM: `2 * (H - 0.5)` clipped, with `H` the smaller of the aggregated
//!   variance Hurst estimate and `d_GPH + 0.5`.
//! * VE: lag-one autocorrelation of squares in excess of the squared lag-one
//!   autocorrelation (zero for Gaussian linear processes).
//! * NR: share of variance carried by slowly varying block means.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundles::BundleKind;
use crate::error::{Error, Result};
use crate::stats::{
    acf, binned_counts, exceedance_events, fano_factor, gph_estimate, hurst_aggvar,
    level_shift_share, mean_abs_offdiag_correlation, periodogram_peak, AGGVAR_MIN_LEN, FANO_WINDOW,
    GPH_MIN_LEN,
};

/// Autocorrelation lags reported per channel.
pub const REPORT_LAGS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub name: String,
    /// Lags `0..=REPORT_LAGS` (fewer for very short series).
    pub acf: Vec<f64>,
    pub peak_frequency: f64,
    pub peak_power_share: f64,
    pub gph_d: Option<f64>,
    pub hurst: Option<f64>,
    pub vol_clustering: f64,
    /// Fano factor of |z| > 3 exceedances counted per window.
    pub fano: Option<f64>,
    pub level_shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub length: usize,
    pub channels: Vec<ChannelReport>,
    pub mean_abs_offdiag_corr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleScore {
    pub kind: BundleKind,
    pub score: f64,
}

/// All four bundle kinds, best first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BundleRanking {
    pub ranking: Vec<BundleScore>,
}

impl BundleRanking {
    pub fn best(&self) -> BundleKind {
        self.ranking[0].kind
    }

    pub fn order(&self) -> Vec<BundleKind> {
        self.ranking.iter().map(|s| s.kind).collect()
    }
}

fn volatility_clustering(x: &[f64]) -> f64 {
    if x.len() < 3 {
        return 0.0;
    }
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let (Ok(level), Ok(square)) = (acf(x, 1), acf(&sq, 1)) else {
        return 0.0;
    };
    square[1] - level[1] * level[1]
}

fn channel_report(name: String, x: &[f64]) -> ChannelReport {
    let peak = periodogram_peak(x);
    let fano = (x.len() >= 2 * FANO_WINDOW)
        .then(|| fano_factor(&binned_counts(&exceedance_events(x), x.len(), FANO_WINDOW)));
    ChannelReport {
        name,
        acf: acf(x, REPORT_LAGS.min(x.len() - 1)).unwrap_or_default(),
        peak_frequency: peak.frequency,
        peak_power_share: peak.power_share,
        gph_d: (x.len() >= GPH_MIN_LEN)
            .then(|| gph_estimate(x).ok())
            .flatten(),
        hurst: (x.len() >= AGGVAR_MIN_LEN)
            .then(|| hurst_aggvar(x).ok())
            .flatten(),
        vol_clustering: volatility_clustering(x),
        fano,
        level_shift: level_shift_share(x),
    }
}

/// Profile a `T x D` matrix. Column names default to `ch0 ..`.
pub fn profile(data: &Array2<f64>, names: Option<&[String]>) -> Result<StatReport> {
    if data.nrows() < 2 || data.ncols() == 0 {
        return Err(Error::invalid(
            "data",
            format!(
                "need at least 2 rows and 1 column, got {}x{}",
                data.nrows(),
                data.ncols()
            ),
        ));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("data", "contains non-finite values"));
    }
    let columns: Vec<(String, Vec<f64>)> = data
        .columns()
        .into_iter()
        .enumerate()
        .map(|(j, c)| {
            let name = names.map_or_else(|| format!("ch{j}"), |n| n[j].clone());
            (name, c.to_vec())
        })
        .collect();
    let channels = columns
        .into_par_iter()
        .map(|(name, x)| channel_report(name, &x))
        .collect();
    Ok(StatReport {
        length: data.nrows(),
        channels,
        mean_abs_offdiag_corr: mean_abs_offdiag_correlation(data),
    })
}

fn channel_scores(c: &ChannelReport) -> [f64; 4] {
    let h = match (c.hurst, c.gph_d) {
        (Some(h), Some(d)) => Some(h.min(d + 0.5)),
        (Some(h), None) => Some(h),
        (None, Some(d)) => Some(d + 0.5),
        (None, None) => None,
    };
    let lm = h.map_or(0.0, |h| 2.0 * (h - 0.5));
    let mut scores = [0.0; 4];
    scores[BundleKind::St.index()] = c.peak_power_share;
    scores[BundleKind::Nr.index()] = c.level_shift;
    scores[BundleKind::Lm.index()] = lm;
    scores[BundleKind::Ve.index()] = c.vol_clustering;
    scores.map(|s| {
        if s.is_finite() {
            s.clamp(0.0, 1.0)
        } else {
            0.0
        }
    })
}

/// Rank the bundle kinds by their channel-averaged scores. Ties keep the
/// ST, NR, LM, VE order.
pub fn recommend_bundle(report: &StatReport) -> BundleRanking {
    let mut totals = [0.0; 4];
    for c in &report.channels {
        for (t, s) in totals.iter_mut().zip(channel_scores(c)) {
            *t += s;
        }
    }
    let n = report.channels.len().max(1) as f64;
    let mut ranking: Vec<BundleScore> = BundleKind::ALL
        .iter()
        .map(|&kind| BundleScore {
            kind,
            score: totals[kind.index()] / n,
        })
        .collect();
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score));
    BundleRanking { ranking }
}
