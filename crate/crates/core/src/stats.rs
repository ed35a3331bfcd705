//! Sample statistics and the estimators used to validate generated data.

use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

/// Minimum length accepted by [`gph_estimate`].
pub const GPH_MIN_LEN: usize = 512;
/// Minimum length accepted by [`hurst_aggvar`].
pub const AGGVAR_MIN_LEN: usize = 1024;
/// Bin width used for event-count dispersion.
pub const FANO_WINDOW: usize = 50;
/// Absolute z-score above which a sample counts as an event.
pub const EVENT_Z: f64 = 3.0;

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub fn std_dev(x: &[f64]) -> f64 {
    variance(x).sqrt()
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Sample autocorrelation for lags `0..=max_lag` (biased normalisation).
/// A constant series has ACF 1 at lag 0 and 0 elsewhere.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if x.len() <= max_lag {
        return Err(Error::invalid(
            "max_lag",
            format!(
                "series of length {} is too short for lag {max_lag}",
                x.len()
            ),
        ));
    }
    let m = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - m).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    let mut out = vec![0.0; max_lag + 1];
    out[0] = 1.0;
    if c0 == 0.0 {
        return Ok(out);
    }
    for (lag, slot) in out.iter_mut().enumerate().skip(1) {
        let ck: f64 = centered[..x.len() - lag]
            .iter()
            .zip(&centered[lag..])
            .map(|(a, b)| a * b)
            .sum();
        *slot = (ck / c0).clamp(-1.0, 1.0);
    }
    Ok(out)
}

/// Periodogram `I_j = |sum_t (x_t - mean) e^{-2 pi i j t / n}|^2 / n` at the
/// Fourier frequencies `j = 0..=n/2`.
pub fn periodogram(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let m = mean(x);
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2]
        .iter()
        .map(|c| c.norm_sqr() / n as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPeak {
    /// Fourier index `j` of the peak.
    pub frequency_index: usize,
    /// Cycles per step, `j / n`.
    pub frequency: f64,
    /// Power in the peak bin and its two neighbours over total non-DC power.
    pub power_share: f64,
}

/// Lowest Fourier index considered for a spectral peak: periods longer than
/// a quarter of the series are treated as trend, not seasonality.
const PEAK_MIN_INDEX: usize = 4;

pub fn periodogram_peak(x: &[f64]) -> SpectralPeak {
    let n = x.len();
    let pg = periodogram(x);
    let total: f64 = pg.iter().skip(1).sum();
    let lo = PEAK_MIN_INDEX.min(pg.len().saturating_sub(1)).max(1);
    if pg.len() < 2 || total <= 0.0 {
        return SpectralPeak {
            frequency_index: 0,
            frequency: 0.0,
            power_share: 0.0,
        };
    }
    let mut best = lo;
    for j in lo..pg.len() {
        if pg[j] > pg[best] {
            best = j;
        }
    }
    let window: f64 = (best.saturating_sub(1).max(1)..=(best + 1).min(pg.len() - 1))
        .map(|j| pg[j])
        .sum();
    SpectralPeak {
        frequency_index: best,
        frequency: best as f64 / n as f64,
        power_share: (window / total).clamp(0.0, 1.0),
    }
}

/// Geweke-Porter-Hudak long-memory estimate: log-periodogram regression on
/// the lowest `floor(sqrt(n))` Fourier frequencies.
pub fn gph_estimate(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < GPH_MIN_LEN {
        return Err(Error::invalid(
            "series",
            format!("GPH needs at least {GPH_MIN_LEN} points, got {n}"),
        ));
    }
    let bandwidth = (n as f64).sqrt().floor() as usize;
    let pg = periodogram(x);
    let mut regressors = Vec::with_capacity(bandwidth);
    let mut responses = Vec::with_capacity(bandwidth);
    for (j, &power) in pg.iter().enumerate().take(bandwidth + 1).skip(1) {
        if power <= 0.0 {
            continue;
        }
        let lambda = 2.0 * PI * j as f64 / n as f64;
        regressors.push((4.0 * (lambda / 2.0).sin().powi(2)).ln());
        responses.push(power.ln());
    }
    if regressors.len() < 3 {
        return Ok(0.0);
    }
    // log I = c - d log(4 sin^2(lambda / 2)) + error
    Ok(-ols_slope(&regressors, &responses))
}

/// Block sizes used by the aggregated-variance estimator: powers of two
/// from 4 up to `n / 16`, so every level keeps at least 16 blocks.
fn aggvar_block_sizes(n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut m = 4;
    while m <= n / 16 {
        sizes.push(m);
        m *= 2;
    }
    sizes
}

/// Aggregated-variance Hurst estimate: the variance of block means scales as
/// `m^(2H - 2)`.
pub fn hurst_aggvar(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < AGGVAR_MIN_LEN {
        return Err(Error::invalid(
            "series",
            format!("aggregated variance needs at least {AGGVAR_MIN_LEN} points, got {n}"),
        ));
    }
    let mut log_m = Vec::new();
    let mut log_var = Vec::new();
    for m in aggvar_block_sizes(n) {
        let means: Vec<f64> = x.chunks_exact(m).map(mean).collect();
        let v = variance(&means);
        if v > 0.0 {
            log_m.push((m as f64).ln());
            log_var.push(v.ln());
        }
    }
    if log_m.len() < 2 {
        return Ok(0.5);
    }
    Ok(1.0 + ols_slope(&log_m, &log_var) / 2.0)
}

/// Event counts in consecutive windows of `window` steps (a trailing
/// partial window is dropped).
pub fn binned_counts(event_times: &[usize], len: usize, window: usize) -> Vec<f64> {
    let bins = len / window;
    let mut counts = vec![0.0; bins];
    for &t in event_times {
        let b = t / window;
        if b < bins {
            counts[b] += 1.0;
        }
    }
    counts
}

/// Variance-to-mean ratio; zero when no events occurred.
pub fn fano_factor(counts: &[f64]) -> f64 {
    let m = mean(counts);
    if m <= 0.0 {
        return 0.0;
    }
    variance(counts) / m
}

/// Steps where the absolute z-score exceeds [`EVENT_Z`].
pub fn exceedance_events(x: &[f64]) -> Vec<usize> {
    let m = mean(x);
    let sd = std_dev(x);
    if sd == 0.0 {
        return Vec::new();
    }
    x.iter()
        .enumerate()
        .filter(|(_, v)| ((*v - m) / sd).abs() > EVENT_Z)
        .map(|(t, _)| t)
        .collect()
}

/// Share of the series variance carried by block means over blocks of
/// `max(16, n / 32)` steps. Near `1 / block` for short-memory noise, near
/// one when the level shifts between regimes.
pub fn level_shift_share(x: &[f64]) -> f64 {
    let n = x.len();
    let block = (n / 32).max(16);
    let total = variance(x);
    if n < 2 * block || total <= 0.0 {
        return 0.0;
    }
    let means: Vec<f64> = x.chunks_exact(block).map(mean).collect();
    (variance(&means) / total).clamp(0.0, 1.0)
}

/// Mean absolute off-diagonal correlation between the columns of `data`.
pub fn mean_abs_offdiag_correlation(data: &Array2<f64>) -> f64 {
    let d = data.ncols();
    if d < 2 {
        return 0.0;
    }
    let cols: Vec<Vec<f64>> = data.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut acc = 0.0;
    let mut pairs = 0usize;
    for i in 0..d {
        for j in i + 1..d {
            acc += correlation(&cols[i], &cols[j]).abs();
            pairs += 1;
        }
    }
    acc / pairs as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{fourier_series, gen_ar1, gen_arfima, gen_fgn};
    use crate::rng::RngStream;

    fn white(seed: u64, n: usize) -> Vec<f64> {
        let mut s = RngStream::new(seed);
        (0..n).map(|_| s.standard_normal()).collect()
    }

    /// Direct DFT for cross-checking the FFT path.
    fn periodogram_direct(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let m = mean(x);
        (0..=n / 2)
            .map(|j| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let ang = 2.0 * PI * (j * t) as f64 / n as f64;
                    re += (v - m) * ang.cos();
                    im -= (v - m) * ang.sin();
                }
                (re * re + im * im) / n as f64
            })
            .collect()
    }

    #[test]
    fn acf_basics() {
        let x = white(1, 8192);
        let r = acf(&x, 3).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(r[1].abs() < 0.03);
        assert_eq!(acf(&[2.0; 10], 3).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!(acf(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn acf_recovers_ar1() {
        let x = gen_ar1(&mut RngStream::new(2), 8192, 0.8).unwrap();
        assert!((acf(&x, 1).unwrap()[1] - 0.8).abs() < 0.05);
    }

    #[test]
    fn fft_periodogram_matches_direct_dft() {
        let x = white(3, 137);
        for (a, b) in periodogram(&x).iter().zip(periodogram_direct(&x)) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b));
        }
    }

    #[test]
    fn sinusoid_peak_share() {
        let x = fourier_series(4096, 24.0, &[1.0], &[0.3]);
        let peak = periodogram_peak(&x);
        assert!((peak.frequency - 1.0 / 24.0).abs() < 1.0 / 4096.0);
        assert!(peak.power_share > 0.8);
        let w = periodogram_peak(&white(4, 4096));
        assert!(w.power_share < 0.02);
    }

    #[test]
    fn gph_white_noise_near_zero() {
        let avg: f64 = (0..20)
            .map(|s| gph_estimate(&white(100 + s, 4096)).unwrap())
            .sum::<f64>()
            / 20.0;
        assert!(avg.abs() < 0.1, "{avg}");
        assert!(gph_estimate(&white(1, 100)).is_err());
    }

    #[test]
    fn gph_recovers_arfima() {
        for d in [-0.3, 0.3] {
            let root = RngStream::new(5);
            let avg: f64 = (0..20)
                .map(|i| {
                    gph_estimate(&gen_arfima(&mut root.derive_child(i), 4096, d).unwrap()).unwrap()
                })
                .sum::<f64>()
                / 20.0;
            assert!((avg - d).abs() < 0.1, "d={d} avg={avg}");
        }
    }

    #[test]
    fn aggvar_white_and_fgn() {
        let avg: f64 = (0..20)
            .map(|s| hurst_aggvar(&white(200 + s, 4096)).unwrap())
            .sum::<f64>()
            / 20.0;
        assert!((avg - 0.5).abs() < 0.1, "{avg}");
        for h in [0.6, 0.8] {
            let root = RngStream::new(6);
            let avg: f64 = (0..20)
                .map(|i| {
                    hurst_aggvar(&gen_fgn(&mut root.derive_child(i), 4096, h).unwrap()).unwrap()
                })
                .sum::<f64>()
                / 20.0;
            assert!((avg - h).abs() < 0.1, "H={h} avg={avg}");
        }
        assert!(hurst_aggvar(&white(1, 1000)).is_err());
    }

    #[test]
    fn fano_of_regular_and_clustered_counts() {
        assert_eq!(fano_factor(&[0.0, 0.0]), 0.0);
        assert_eq!(fano_factor(&[2.0, 2.0, 2.0]), 0.0);
        assert!((fano_factor(&[0.0, 4.0]) - 2.0).abs() < 1e-12);
        let counts = binned_counts(&[0, 1, 49, 50, 120, 149], 150, 50);
        assert_eq!(counts, vec![3.0, 1.0, 2.0]);
    }

    #[test]
    fn level_shift_separates_regimes_from_noise() {
        let noise = white(7, 4096);
        assert!(level_shift_share(&noise) < 0.05);
        let steps: Vec<f64> = (0..4096)
            .map(|t| if (t / 512) % 2 == 0 { -2.0 } else { 2.0 })
            .collect();
        assert!(level_shift_share(&steps) > 0.9);
    }

    #[test]
    fn offdiag_correlation_of_copies() {
        let x = white(8, 500);
        let data = Array2::from_shape_fn((500, 3), |(t, j)| if j == 2 { -x[t] } else { x[t] });
        assert!((mean_abs_offdiag_correlation(&data) - 1.0).abs() < 1e-12);
    }
}
