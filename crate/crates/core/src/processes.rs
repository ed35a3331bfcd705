//! Univariate stochastic processes composed by the bundles.
//!
//! Every generator takes the stream it draws from by `&mut` and returns a
//! plain `Vec<f64>`. Parameters that the bundles sample and record live in
//! small serializable enums (`Trend`, `StochasticTrend`) so a stored draw can
//! be replayed.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::stats::{mean, variance};

/// Seasonal periods a Fourier component may use.
pub const PERIODS: [usize; 5] = [24, 48, 96, 168, 336];
pub const MAX_HARMONICS: usize = 6;

/// Minimum MA(inf) truncation length for ARFIMA.
const ARFIMA_MIN_TRUNCATION: usize = 1000;

/// Center and scale to unit variance: `(x - mean) / sqrt(var + eps)`, with
/// the population variance.
pub fn standardize(x: &[f64], eps: f64) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let m = mean(x);
    let var = variance(x);
    let denom = (var + eps).sqrt();
    if denom == 0.0 {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - m) / denom).collect()
}

/// `sum_k a_k sin(2 pi k t / P + phi_k)` for `t = 0..len`.
pub fn fourier_series(len: usize, period: f64, amplitudes: &[f64], phases: &[f64]) -> Vec<f64> {
    debug_assert_eq!(amplitudes.len(), phases.len());
    (0..len)
        .map(|t| {
            amplitudes
                .iter()
                .zip(phases)
                .enumerate()
                .map(|(k, (a, phi))| {
                    a * (2.0 * PI * (k + 1) as f64 * t as f64 / period + phi).sin()
                })
                .sum()
        })
        .collect()
}

/// Power-law harmonic amplitudes `a_k = k^-decay`, `k = 1..=harmonics`.
pub fn harmonic_amplitudes(harmonics: usize, decay: f64) -> Vec<f64> {
    (1..=harmonics).map(|k| (k as f64).powf(-decay)).collect()
}

pub(crate) fn check_fourier(harmonics: usize, period: usize, decay: f64) -> Result<()> {
    if !(1..=MAX_HARMONICS).contains(&harmonics) {
        return Err(Error::invalid(
            "K",
            format!("harmonic count must be in 1..=6, got {harmonics}"),
        ));
    }
    if !PERIODS.contains(&period) {
        return Err(Error::invalid(
            "P",
            format!("period must be one of {PERIODS:?}, got {period}"),
        ));
    }
    if !(decay > 0.0) {
        return Err(Error::invalid("decay", format!("must be > 0, got {decay}")));
    }
    Ok(())
}

/// Fourier seasonality with random phases in `[0, 2 pi)`.
pub fn gen_fourier(
    s: &mut RngStream,
    len: usize,
    harmonics: usize,
    period: usize,
    decay: f64,
) -> Result<Vec<f64>> {
    check_fourier(harmonics, period, decay)?;
    let amplitudes = harmonic_amplitudes(harmonics, decay);
    let phases: Vec<f64> = (0..harmonics).map(|_| s.uniform(0.0, 2.0 * PI)).collect();
    Ok(fourier_series(len, period as f64, &amplitudes, &phases))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    Linear,
    Quadratic,
    Exponential,
}

impl TrendKind {
    pub const ALL: [TrendKind; 3] = [
        TrendKind::Linear,
        TrendKind::Quadratic,
        TrendKind::Exponential,
    ];
}

/// Deterministic trend shape. Coefficients only matter up to sign once the
/// component is standardized, so their ranges are kept small.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trend {
    Linear { c: f64 },
    Quadratic { c: f64 },
    Exponential { b: f64 },
}

impl Trend {
    pub fn sample(s: &mut RngStream, kind: TrendKind) -> Trend {
        match kind {
            TrendKind::Linear => Trend::Linear {
                c: s.uniform(-0.01, 0.01),
            },
            TrendKind::Quadratic => Trend::Quadratic {
                c: s.uniform(-1e-4, 1e-4),
            },
            TrendKind::Exponential => Trend::Exponential {
                b: s.uniform(-0.01, 0.01),
            },
        }
    }

    pub fn kind(&self) -> TrendKind {
        match self {
            Trend::Linear { .. } => TrendKind::Linear,
            Trend::Quadratic { .. } => TrendKind::Quadratic,
            Trend::Exponential { .. } => TrendKind::Exponential,
        }
    }

    pub fn evaluate(&self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|t| {
                let t = t as f64;
                match *self {
                    Trend::Linear { c } => c * t,
                    Trend::Quadratic { c } => c * t * t,
                    Trend::Exponential { b } => (b * t).exp() - 1.0,
                }
            })
            .collect()
    }
}

pub fn gen_trend(s: &mut RngStream, len: usize, kind: TrendKind) -> Vec<f64> {
    Trend::sample(s, kind).evaluate(len)
}

fn check_ar_coefficient(name: &str, phi: f64) -> Result<()> {
    if phi.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("|phi| must be < 1, got {phi}"),
        ))
    }
}

/// AR(1) with standard normal innovations, started from its stationary law.
pub fn gen_ar1(s: &mut RngStream, len: usize, phi: f64) -> Result<Vec<f64>> {
    check_ar_coefficient("phi", phi)?;
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    let mut x = s.standard_normal() / (1.0 - phi * phi).sqrt();
    out.push(x);
    for _ in 1..len {
        x = phi * x + s.standard_normal();
        out.push(x);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StochasticTrendKind {
    RandomWalk,
    Gbm,
    Ou,
}

impl StochasticTrendKind {
    pub const ALL: [StochasticTrendKind; 3] = [
        StochasticTrendKind::RandomWalk,
        StochasticTrendKind::Gbm,
        StochasticTrendKind::Ou,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StochasticTrend {
    /// `x(t) = x(t-1) + sigma * eta`, `x(0) = 0`.
    RandomWalk { sigma: f64 },
    /// `exp` of a random walk in log-space with drift.
    Gbm { drift: f64, vol: f64 },
    /// `x(t) = x(t-1) + theta (mu - x(t-1)) + sigma * eta`.
    Ou {
        theta: f64,
        sigma: f64,
        mu: f64,
        x0: f64,
    },
}

impl StochasticTrend {
    pub fn sample(s: &mut RngStream, kind: StochasticTrendKind) -> StochasticTrend {
        match kind {
            StochasticTrendKind::RandomWalk => StochasticTrend::RandomWalk {
                sigma: s.uniform(0.01, 0.05),
            },
            StochasticTrendKind::Gbm => StochasticTrend::Gbm {
                drift: s.uniform(-0.0005, 0.0005),
                vol: s.uniform(0.005, 0.02),
            },
            StochasticTrendKind::Ou => StochasticTrend::Ou {
                theta: s.uniform(0.01, 0.1),
                sigma: s.uniform(0.05, 0.2),
                mu: 0.0,
                x0: 0.0,
            },
        }
    }

    pub fn kind(&self) -> StochasticTrendKind {
        match self {
            StochasticTrend::RandomWalk { .. } => StochasticTrendKind::RandomWalk,
            StochasticTrend::Gbm { .. } => StochasticTrendKind::Gbm,
            StochasticTrend::Ou { .. } => StochasticTrendKind::Ou,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StochasticTrend::RandomWalk { sigma } if !(sigma >= 0.0) => Err(Error::invalid(
                "sigma",
                format!("must be >= 0, got {sigma}"),
            )),
            StochasticTrend::Gbm { vol, .. } if !(vol >= 0.0) => {
                Err(Error::invalid("vol", format!("must be >= 0, got {vol}")))
            }
            StochasticTrend::Ou { theta, .. } if !(theta > 0.0 && theta <= 1.0) => Err(
                Error::invalid("theta", format!("must be in (0, 1], got {theta}")),
            ),
            StochasticTrend::Ou { sigma, .. } if !(sigma >= 0.0) => Err(Error::invalid(
                "sigma",
                format!("must be >= 0, got {sigma}"),
            )),
            _ => Ok(()),
        }
    }
}

pub fn gen_stochastic_trend(
    s: &mut RngStream,
    len: usize,
    trend: &StochasticTrend,
) -> Result<Vec<f64>> {
    trend.validate()?;
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    match *trend {
        StochasticTrend::RandomWalk { sigma } => {
            let mut x = 0.0;
            out.push(x);
            for _ in 1..len {
                x += sigma * s.standard_normal();
                out.push(x);
            }
        }
        StochasticTrend::Gbm { drift, vol } => {
            let mut log_x = 0.0_f64;
            out.push(1.0);
            for _ in 1..len {
                log_x += drift + vol * s.standard_normal();
                out.push(log_x.exp());
            }
        }
        StochasticTrend::Ou {
            theta,
            sigma,
            mu,
            x0,
        } => {
            let mut x = x0;
            out.push(x);
            for _ in 1..len {
                x = x + theta * (mu - x) + sigma * s.standard_normal();
                out.push(x);
            }
        }
    }
    Ok(out)
}

/// MA(inf) weights of `(1 - B)^-d`: `psi_0 = 1`, `psi_j = psi_{j-1} (j - 1 + d) / j`.
pub fn arfima_weights(d_frac: f64, n: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n);
    if n == 0 {
        return psi;
    }
    psi.push(1.0);
    for j in 1..n {
        let prev = psi[j - 1];
        psi.push(prev * (j as f64 - 1.0 + d_frac) / j as f64);
    }
    psi
}

/// ARFIMA(0, d, 0) by truncated MA(inf) filtering of white noise. The
/// truncation length `max(len, 1000)` is also discarded as burn-in.
pub fn gen_arfima(s: &mut RngStream, len: usize, d_frac: f64) -> Result<Vec<f64>> {
    if !(d_frac > -0.45 && d_frac < 0.45) {
        return Err(Error::invalid(
            "d_frac",
            format!("must be in (-0.45, 0.45), got {d_frac}"),
        ));
    }
    let trunc = len.max(ARFIMA_MIN_TRUNCATION);
    let psi = arfima_weights(d_frac, trunc);
    let noise: Vec<f64> = (0..trunc + len).map(|_| s.standard_normal()).collect();
    Ok((0..len)
        .map(|t| {
            let end = trunc + t;
            // y(t) = sum_j psi_j eps(end - j)
            psi.iter()
                .zip(noise[end + 1 - trunc..=end].iter().rev())
                .map(|(p, e)| p * e)
                .sum()
        })
        .collect())
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let h2 = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Fractional Gaussian noise via the Hosking (Durbin-Levinson) recursion.
/// Exact covariance, O(len^2).
pub fn gen_fgn(s: &mut RngStream, len: usize, hurst: f64) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::invalid(
            "H",
            format!("Hurst exponent must be in (0, 1), got {hurst}"),
        ));
    }
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok(out);
    }
    let gamma: Vec<f64> = (0..len).map(|k| fgn_autocovariance(k, hurst)).collect();
    let mut phi = vec![0.0; len];
    let mut prev = vec![0.0; len];
    let mut v = gamma[0];
    out.push(s.standard_normal() * v.sqrt());
    for n in 1..len {
        // phi_{n,n} = (gamma(n) - sum_{j<n} phi_{n-1,j} gamma(n-j)) / v_{n-1}
        let acc: f64 = (1..n).map(|j| prev[j] * gamma[n - j]).sum();
        let reflection = (gamma[n] - acc) / v;
        phi[n] = reflection;
        for j in 1..n {
            phi[j] = prev[j] - reflection * prev[n - j];
        }
        v *= 1.0 - reflection * reflection;
        let cond_mean: f64 = (1..=n).map(|j| phi[j] * out[n - j]).sum();
        out.push(cond_mean + v.max(0.0).sqrt() * s.standard_normal());
        prev[1..=n].copy_from_slice(&phi[1..=n]);
    }
    Ok(out)
}

/// Markov-switching process with linear drift inside each regime and an
/// AR(1) deviation. Returns the series and the regime sequence.
///
/// The slope term restarts at every regime entry.
pub fn gen_markov_regime(
    s: &mut RngStream,
    len: usize,
    p_stay: f64,
    mus: &[f64],
    betas: &[f64],
    phi: f64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    let regimes = mus.len();
    if !(2..=4).contains(&regimes) {
        return Err(Error::invalid(
            "M",
            format!("regime count must be in 2..=4, got {regimes}"),
        ));
    }
    if betas.len() != regimes {
        return Err(Error::LengthMismatch {
            expected: regimes,
            found: betas.len(),
        });
    }
    if !(p_stay > 0.0 && p_stay <= 1.0) {
        return Err(Error::invalid(
            "p_stay",
            format!("must be in (0, 1], got {p_stay}"),
        ));
    }
    check_ar_coefficient("phi", phi)?;

    let mut states = Vec::with_capacity(len);
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return Ok((out, states));
    }
    let mut state = s.index(regimes);
    let mut entered = 0usize;
    let mut x = s.standard_normal() / (1.0 - phi * phi).sqrt();
    for t in 0..len {
        if t > 0 {
            if !s.bernoulli(p_stay) {
                // off-diagonal mass split evenly over the other regimes
                let other = s.index(regimes - 1);
                state = if other >= state { other + 1 } else { other };
                entered = t;
            }
            x = phi * x + s.standard_normal();
        }
        states.push(state);
        out.push(mus[state] + betas[state] * (t - entered) as f64 + x);
    }
    Ok((out, states))
}

/// Number of regime changes in a state sequence.
pub fn count_switches(states: &[usize]) -> usize {
    states.windows(2).filter(|w| w[0] != w[1]).count()
}

/// GARCH(1,1) started at its unconditional variance.
pub fn gen_garch(
    s: &mut RngStream,
    len: usize,
    omega: f64,
    alpha_g: f64,
    beta_g: f64,
) -> Result<Vec<f64>> {
    if !(omega > 0.0) {
        return Err(Error::invalid("omega", format!("must be > 0, got {omega}")));
    }
    if !(alpha_g >= 0.0) || !(beta_g >= 0.0) {
        return Err(Error::invalid("alpha_G", "alpha_G and beta_G must be >= 0"));
    }
    if !(alpha_g + beta_g < 1.0) {
        return Err(Error::invalid(
            "alpha_G",
            format!(
                "alpha_G + beta_G must be < 1 for stationarity, got {}",
                alpha_g + beta_g
            ),
        ));
    }
    let mut out = Vec::with_capacity(len);
    let mut sigma2 = omega / (1.0 - alpha_g - beta_g);
    let mut prev = 0.0;
    for t in 0..len {
        if t > 0 {
            sigma2 = omega + alpha_g * prev * prev + beta_g * sigma2;
        }
        prev = sigma2.sqrt() * s.standard_normal();
        out.push(prev);
    }
    Ok(out)
}

/// Event times on the integer grid together with the intensity that
/// generated them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventTrain {
    pub event_times: Vec<usize>,
    pub intensity: Vec<f64>,
}

impl EventTrain {
    pub fn len(&self) -> usize {
        self.intensity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensity.is_empty()
    }

    pub fn event_count(&self) -> usize {
        self.event_times.len()
    }
}

/// Discrete-time Hawkes process with exponential kernel:
/// `h(t) = lambda0 + A sum_{tau < t} exp(-delta (t - tau))`, and an event at
/// step `t` with probability `min(h(t), 1)`.
pub fn gen_hawkes(
    s: &mut RngStream,
    len: usize,
    lambda0: f64,
    excitation: f64,
    delta: f64,
) -> Result<EventTrain> {
    if !(lambda0 >= 0.0) {
        return Err(Error::invalid(
            "lambda_0",
            format!("must be >= 0, got {lambda0}"),
        ));
    }
    if !(excitation >= 0.0) {
        return Err(Error::invalid(
            "A",
            format!("must be >= 0, got {excitation}"),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", format!("must be > 0, got {delta}")));
    }
    if !(excitation / delta < 1.0) {
        return Err(Error::invalid(
            "A",
            format!(
                "branching ratio A/delta must be < 1, got {}",
                excitation / delta
            ),
        ));
    }
    let decay = (-delta).exp();
    let mut event_times = Vec::new();
    let mut intensity = Vec::with_capacity(len);
    let mut kernel_sum = 0.0;
    for t in 0..len {
        let h = lambda0 + excitation * kernel_sum;
        intensity.push(h);
        let fired = s.next_f64() < h.min(1.0);
        if fired {
            event_times.push(t);
        }
        kernel_sum = decay * (kernel_sum + if fired { 1.0 } else { 0.0 });
    }
    Ok(EventTrain {
        event_times,
        intensity,
    })
}

/// `amplitude * sum_{ev <= t} exp(-rate (t - ev))`.
pub fn spikes_from_events(events: &EventTrain, amplitude: f64, rate: f64, len: usize) -> Vec<f64> {
    let decay = (-rate).exp();
    let mut counts = vec![0usize; len];
    for &t in &events.event_times {
        if t < len {
            counts[t] += 1;
        }
    }
    let mut level = 0.0;
    counts
        .iter()
        .map(|&c| {
            level = level * decay + amplitude * c as f64;
            level
        })
        .collect()
}
