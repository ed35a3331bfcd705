//! Bundle archetypes: seasonal-trend (ST), non-stationary regime (NR), long
//! memory (LM) and volatility events (VE).
//!
//! A bundle is generated in two stages. [`sample_draw`] materializes every
//! random parameter into a [`BundleDraw`] (using child 0 of the bundle
//! stream), and [`render`] turns a draw into a series (children 1 and 2 of
//! the same stream drive the innovations). A draw therefore replays
//! bit-exactly from its JSON form, and tests can force individual
//! parameters before rendering.
//!
//! Each bundle mixes three standardized components with Dirichlet weights so
//! that the mix has approximately unit variance. ST and NR add observation
//! noise after mixing; LM and VE carry noise as their third component.

mod difficulty;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use difficulty::check_difficulty;
pub use difficulty::{
    concentration, fourier_decay, garch_params, hawkes_params, noise_sigma, regime_mean_scale,
    regime_slope_scale, sample_difficulty, seasonal_overlay_probability, spike_amplitude,
    stay_probability, target_fractions, AnchorPair, DifficultySpec, VarianceAnchors,
    VarianceTargets, ALPHA_EASY, ALPHA_HARD, DEFAULT_MIXTURE, OVERLAY_DIFFICULTY_SCALE,
};

use crate::error::{Error, Result};
use crate::processes::{
    count_switches, fourier_series, gen_ar1, gen_arfima, gen_fgn, gen_garch, gen_hawkes,
    gen_markov_regime, gen_stochastic_trend, harmonic_amplitudes, spikes_from_events, standardize,
    StochasticTrend, StochasticTrendKind, Trend, TrendKind, MAX_HARMONICS, PERIODS,
};
use crate::rng::{RngStream, StreamId};

/// Variance floor used when standardizing components.
pub const STANDARDIZE_EPS: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BundleKind {
    #[serde(rename = "ST")]
    St,
    #[serde(rename = "NR")]
    Nr,
    #[serde(rename = "LM")]
    Lm,
    #[serde(rename = "VE")]
    Ve,
}

impl BundleKind {
    pub const ALL: [BundleKind; 4] = [
        BundleKind::St,
        BundleKind::Nr,
        BundleKind::Lm,
        BundleKind::Ve,
    ];

    pub fn index(self) -> usize {
        match self {
            BundleKind::St => 0,
            BundleKind::Nr => 1,
            BundleKind::Lm => 2,
            BundleKind::Ve => 3,
        }
    }
}

impl fmt::Display for BundleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BundleKind::St => "ST",
            BundleKind::Nr => "NR",
            BundleKind::Lm => "LM",
            BundleKind::Ve => "VE",
        })
    }
}

impl FromStr for BundleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "st" => Ok(BundleKind::St),
            "nr" => Ok(BundleKind::Nr),
            "lm" => Ok(BundleKind::Lm),
            "ve" => Ok(BundleKind::Ve),
            _ => Err(Error::invalid(
                "bundle",
                format!("expected st|nr|lm|ve, got {s:?}"),
            )),
        }
    }
}

/// Fourier seasonality with power-law harmonic amplitudes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Seasonality {
    #[serde(rename = "K")]
    pub harmonics: usize,
    #[serde(rename = "P")]
    pub period: usize,
    #[serde(rename = "alpha")]
    pub decay: f64,
    #[serde(rename = "a_k")]
    pub amplitudes: Vec<f64>,
    #[serde(rename = "phi_k")]
    pub phases: Vec<f64>,
}

impl Seasonality {
    pub fn sample(s: &mut RngStream, d: f64) -> Seasonality {
        let harmonics = 1 + s.index(MAX_HARMONICS);
        let period = PERIODS[s.index(PERIODS.len())];
        let decay = fourier_decay(d);
        let phases = (0..harmonics).map(|_| s.uniform(0.0, 2.0 * PI)).collect();
        Seasonality {
            harmonics,
            period,
            decay,
            amplitudes: harmonic_amplitudes(harmonics, decay),
            phases,
        }
    }

    pub fn evaluate(&self, len: usize) -> Vec<f64> {
        fourier_series(len, self.period as f64, &self.amplitudes, &self.phases)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeasonalTrendParams {
    pub seasonality: Seasonality,
    pub trend: Trend,
    /// Residual AR(1) coefficient.
    pub phi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeParams {
    #[serde(rename = "M")]
    pub regimes: usize,
    #[serde(rename = "mu_m")]
    pub means: Vec<f64>,
    #[serde(rename = "beta_m")]
    pub slopes: Vec<f64>,
    pub p_stay: f64,
    /// AR(1) coefficient of the within-regime deviation.
    pub phi_regime: f64,
    pub stochastic_trend: StochasticTrend,
    /// Residual AR(1) coefficient.
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LongMemory {
    Arfima {
        d_frac: f64,
    },
    Fgn {
        #[serde(rename = "H")]
        hurst: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LongMemoryParams {
    pub memory: LongMemory,
    pub p_seas: f64,
    pub overlay: Option<Seasonality>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarchParams {
    pub omega: f64,
    #[serde(rename = "alpha_G")]
    pub alpha: f64,
    #[serde(rename = "beta_G")]
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkesParams {
    #[serde(rename = "lambda_0")]
    pub lambda0: f64,
    #[serde(rename = "A")]
    pub excitation: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolatilityParams {
    pub garch: GarchParams,
    pub hawkes: HawkesParams,
    #[serde(rename = "A_spike")]
    pub spike_amplitude: f64,
    pub kernel_rate: f64,
}

/// Kind-specific component parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentParams {
    SeasonalTrend(SeasonalTrendParams),
    Regime(RegimeParams),
    LongMemory(LongMemoryParams),
    Volatility(VolatilityParams),
}

impl ComponentParams {
    pub fn kind(&self) -> BundleKind {
        match self {
            ComponentParams::SeasonalTrend(_) => BundleKind::St,
            ComponentParams::Regime(_) => BundleKind::Nr,
            ComponentParams::LongMemory(_) => BundleKind::Lm,
            ComponentParams::Volatility(_) => BundleKind::Ve,
        }
    }
}

/// Everything sampled for one channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleDraw {
    pub kind: BundleKind,
    #[serde(rename = "d")]
    pub difficulty: f64,
    pub component_params: ComponentParams,
    #[serde(rename = "w")]
    pub weights: Vec<f64>,
    pub sigma_obs: f64,
    /// Stream the draw was sampled from; rendering replays its children.
    pub stream: StreamId,
}

impl BundleDraw {
    pub fn validate(&self) -> Result<()> {
        check_difficulty(self.difficulty)?;
        if self.component_params.kind() != self.kind {
            return Err(Error::invalid(
                "component_params",
                format!(
                    "parameters describe {} but kind is {}",
                    self.component_params.kind(),
                    self.kind
                ),
            ));
        }
        if self.weights.len() != 3 {
            return Err(Error::LengthMismatch {
                expected: 3,
                found: self.weights.len(),
            });
        }
        if self.weights.iter().any(|w| !(*w >= 0.0))
            || (self.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::invalid(
                "w",
                "weights must be nonnegative and sum to 1",
            ));
        }
        if !(self.sigma_obs >= 0.0) {
            return Err(Error::invalid("sigma_obs", "must be >= 0"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<BundleDraw> {
        let draw: BundleDraw = serde_json::from_str(text)?;
        draw.validate()?;
        Ok(draw)
    }
}

/// Standardize each component and combine as `sum_k sqrt(w_k) c_k`.
pub fn mix_components(components: &[Vec<f64>], weights: &[f64]) -> Result<Vec<f64>> {
    if components.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: components.len(),
            found: weights.len(),
        });
    }
    let len = components.first().map_or(0, Vec::len);
    if let Some(bad) = components.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    let mut out = vec![0.0; len];
    for (component, &w) in components.iter().zip(weights) {
        let scale = w.sqrt();
        for (acc, v) in out.iter_mut().zip(standardize(component, STANDARDIZE_EPS)) {
            *acc += scale * v;
        }
    }
    Ok(out)
}

/// Dirichlet weights with concentration `concentration(d) * tau(kind, d)`.
pub fn sample_weights(
    s: &mut RngStream,
    kind: BundleKind,
    d: f64,
    anchors: &VarianceAnchors,
) -> Result<Vec<f64>> {
    let tau = anchors.target_fractions(kind, d)?.tau;
    let c = concentration(d)?;
    let alpha: Vec<f64> = tau.iter().map(|t| c * t).collect();
    s.dirichlet(&alpha)
}

/// Draw weights for `kind` at difficulty `d` and mix the components.
pub fn allocate_variance(
    s: &mut RngStream,
    components: &[Vec<f64>],
    kind: BundleKind,
    d: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if components.len() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            found: components.len(),
        });
    }
    let weights = sample_weights(s, kind, d, &VarianceAnchors::default())?;
    let mixed = mix_components(components, &weights)?;
    Ok((mixed, weights))
}

fn sample_params(s: &mut RngStream, kind: BundleKind, d: f64) -> Result<ComponentParams> {
    Ok(match kind {
        BundleKind::St => {
            let seasonality = Seasonality::sample(s, d);
            let phi = s.uniform(-0.9, 0.9);
            let trend_kind = TrendKind::ALL[s.index(TrendKind::ALL.len())];
            let trend = Trend::sample(s, trend_kind);
            ComponentParams::SeasonalTrend(SeasonalTrendParams {
                seasonality,
                trend,
                phi,
            })
        }
        BundleKind::Nr => {
            let regimes = 2 + s.index(3);
            let (mu_scale, beta_scale) = (regime_mean_scale(d), regime_slope_scale(d));
            let means = (0..regimes).map(|_| s.normal(0.0, mu_scale)).collect();
            let slopes = (0..regimes).map(|_| s.normal(0.0, beta_scale)).collect();
            let phi_regime = s.uniform(0.3, 0.9);
            let st_kind = StochasticTrendKind::ALL[s.index(StochasticTrendKind::ALL.len())];
            let stochastic_trend = StochasticTrend::sample(s, st_kind);
            let phi = s.uniform(-0.9, 0.9);
            ComponentParams::Regime(RegimeParams {
                regimes,
                means,
                slopes,
                p_stay: stay_probability(d),
                phi_regime,
                stochastic_trend,
                phi,
            })
        }
        BundleKind::Lm => {
            let memory = if s.bernoulli(0.5) {
                // open interval: resample the (measure-zero) lower endpoint
                let mut d_frac = s.uniform(-0.45, 0.45);
                while d_frac <= -0.45 {
                    d_frac = s.uniform(-0.45, 0.45);
                }
                LongMemory::Arfima { d_frac }
            } else {
                LongMemory::Fgn {
                    hurst: s.uniform(0.6, 0.9),
                }
            };
            let p_seas = seasonal_overlay_probability(d);
            let overlay = if s.next_f64() < p_seas {
                Some(Seasonality::sample(s, OVERLAY_DIFFICULTY_SCALE * d))
            } else {
                None
            };
            ComponentParams::LongMemory(LongMemoryParams {
                memory,
                p_seas,
                overlay,
            })
        }
        BundleKind::Ve => {
            let (omega, alpha, beta) = garch_params(d);
            let (lambda0, excitation, delta) = hawkes_params(d);
            ComponentParams::Volatility(VolatilityParams {
                garch: GarchParams { omega, alpha, beta },
                hawkes: HawkesParams {
                    lambda0,
                    excitation,
                    delta,
                },
                spike_amplitude: spike_amplitude(d),
                kernel_rate: delta,
            })
        }
    })
}

/// Sample every parameter of a `kind` bundle at difficulty `d`. Only child 0
/// of `stream` is consumed.
pub fn sample_draw(
    stream: &RngStream,
    kind: BundleKind,
    d: f64,
    anchors: &VarianceAnchors,
) -> Result<BundleDraw> {
    check_difficulty(d)?;
    let mut s = stream.derive_child(0);
    let component_params = sample_params(&mut s, kind, d)?;
    let weights = sample_weights(&mut s, kind, d, anchors)?;
    let sigma_obs = noise_sigma(&mut s, d)?;
    Ok(BundleDraw {
        kind,
        difficulty: d,
        component_params,
        weights,
        sigma_obs,
        stream: stream.id().clone(),
    })
}

/// Diagnostics collected while rendering.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RenderTrace {
    pub regime_switches: Option<usize>,
    pub event_count: Option<usize>,
}

/// Turn a draw into its series.
pub fn render(draw: &BundleDraw, len: usize) -> Result<Vec<f64>> {
    render_traced(draw, len).map(|(series, _)| series)
}

pub fn render_traced(draw: &BundleDraw, len: usize) -> Result<(Vec<f64>, RenderTrace)> {
    draw.validate()?;
    let root = RngStream::from_id(draw.stream.clone());
    let components = root.derive_child(1);
    let component = |k: u32| components.derive_child(k);
    let white = |mut s: RngStream| -> Vec<f64> { (0..len).map(|_| s.standard_normal()).collect() };
    let mut trace = RenderTrace::default();

    let (mixed, post_noise) = match &draw.component_params {
        ComponentParams::SeasonalTrend(p) => {
            let seasonal = p.seasonality.evaluate(len);
            let trend = p.trend.evaluate(len);
            let residual = gen_ar1(&mut component(2), len, p.phi)?;
            (
                mix_components(&[seasonal, trend, residual], &draw.weights)?,
                true,
            )
        }
        ComponentParams::Regime(p) => {
            if p.means.len() != p.regimes {
                return Err(Error::LengthMismatch {
                    expected: p.regimes,
                    found: p.means.len(),
                });
            }
            let (regime, states) = gen_markov_regime(
                &mut component(0),
                len,
                p.p_stay,
                &p.means,
                &p.slopes,
                p.phi_regime,
            )?;
            trace.regime_switches = Some(count_switches(&states));
            let trend = gen_stochastic_trend(&mut component(1), len, &p.stochastic_trend)?;
            let residual = gen_ar1(&mut component(2), len, p.phi)?;
            (
                mix_components(&[regime, trend, residual], &draw.weights)?,
                true,
            )
        }
        ComponentParams::LongMemory(p) => {
            let memory = match p.memory {
                LongMemory::Arfima { d_frac } => gen_arfima(&mut component(0), len, d_frac)?,
                LongMemory::Fgn { hurst } => gen_fgn(&mut component(0), len, hurst)?,
            };
            let overlay = match &p.overlay {
                Some(seasonality) => seasonality.evaluate(len),
                None => vec![0.0; len],
            };
            let noise = white(component(2));
            (
                mix_components(&[memory, overlay, noise], &draw.weights)?,
                false,
            )
        }
        ComponentParams::Volatility(p) => {
            let garch = gen_garch(
                &mut component(0),
                len,
                p.garch.omega,
                p.garch.alpha,
                p.garch.beta,
            )?;
            let events = gen_hawkes(
                &mut component(1),
                len,
                p.hawkes.lambda0,
                p.hawkes.excitation,
                p.hawkes.delta,
            )?;
            trace.event_count = Some(events.event_count());
            let spikes = spikes_from_events(&events, p.spike_amplitude, p.kernel_rate, len);
            let noise = white(component(2));
            (
                mix_components(&[garch, spikes, noise], &draw.weights)?,
                false,
            )
        }
    };

    let series = if post_noise {
        let mut noise = root.derive_child(2);
        mixed
            .into_iter()
            .map(|v| v + draw.sigma_obs * noise.standard_normal())
            .collect()
    } else {
        mixed
    };
    Ok((series, trace))
}

/// Sample and render one bundle with the default variance anchors.
pub fn gen_bundle(
    stream: &RngStream,
    kind: BundleKind,
    len: usize,
    d: f64,
) -> Result<(Vec<f64>, BundleDraw)> {
    gen_bundle_with(stream, kind, len, d, &VarianceAnchors::default())
}

pub fn gen_bundle_with(
    stream: &RngStream,
    kind: BundleKind,
    len: usize,
    d: f64,
    anchors: &VarianceAnchors,
) -> Result<(Vec<f64>, BundleDraw)> {
    let draw = sample_draw(stream, kind, d, anchors)?;
    let series = render(&draw, len)?;
    Ok((series, draw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{acf, mean, std_dev, variance};

    fn draw(seed: u64, kind: BundleKind, d: f64) -> BundleDraw {
        sample_draw(&RngStream::new(seed), kind, d, &VarianceAnchors::default()).unwrap()
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("ST".parse::<BundleKind>().unwrap(), BundleKind::St);
        assert_eq!("ve".parse::<BundleKind>().unwrap(), BundleKind::Ve);
        assert!("xx".parse::<BundleKind>().is_err());
        assert_eq!(serde_json::to_string(&BundleKind::Lm).unwrap(), "\"LM\"");
    }

    #[test]
    fn single_weight_returns_standardized_component() {
        let mut s = RngStream::new(1);
        let a: Vec<f64> = (0..100).map(|_| s.normal(3.0, 2.0)).collect();
        let b: Vec<f64> = (0..100).map(|_| s.standard_normal()).collect();
        let mixed = mix_components(&[a.clone(), b], &[1.0, 0.0]).unwrap();
        assert_eq!(mixed, standardize(&a, STANDARDIZE_EPS));
    }

    #[test]
    fn mix_rejects_ragged_components() {
        assert!(mix_components(&[vec![0.0; 5], vec![0.0; 4]], &[0.5, 0.5]).is_err());
        let mut s = RngStream::new(1);
        assert!(allocate_variance(
            &mut s,
            &[vec![0.0; 5], vec![0.0; 4], vec![0.0; 5]],
            BundleKind::St,
            0.5
        )
        .is_err());
    }

    #[test]
    fn seasonal_trend_easy_weights_track_anchor() {
        let mut s = RngStream::new(2);
        let comps = vec![vec![0.0; 4]; 3];
        let mut acc = [0.0; 3];
        for _ in 0..1000 {
            let (_, w) = allocate_variance(&mut s, &comps, BundleKind::St, 0.0).unwrap();
            for k in 0..3 {
                acc[k] += w[k];
            }
        }
        for (k, tau) in [0.92, 0.06, 0.02].iter().enumerate() {
            assert!((acc[k] / 1000.0 - tau).abs() <= 0.02);
        }
    }

    #[test]
    fn mixing_independent_components_keeps_unit_variance() {
        let mut s = RngStream::new(3);
        let comps: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..4096).map(|_| s.standard_normal()).collect())
            .collect();
        for d in [0.0, 0.5, 1.0] {
            let (y, _) = allocate_variance(&mut s, &comps, BundleKind::Ve, d).unwrap();
            assert!((variance(&y) - 1.0).abs() < 0.1);
        }
    }

    #[test]
    fn draws_respect_documented_ranges() {
        for seed in 0..200 {
            for kind in BundleKind::ALL {
                let d = (seed % 11) as f64 / 10.0;
                let draw = draw(seed, kind, d);
                draw.validate().unwrap();
                assert!((draw.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(draw.sigma_obs >= 0.02 && draw.sigma_obs <= 0.05 + 0.25 * d);
                match &draw.component_params {
                    ComponentParams::SeasonalTrend(p) => {
                        assert!((1..=6).contains(&p.seasonality.harmonics));
                        assert!(PERIODS.contains(&p.seasonality.period));
                        assert!(p.phi.abs() <= 0.9);
                        assert!(p
                            .seasonality
                            .phases
                            .iter()
                            .all(|ph| (0.0..2.0 * PI).contains(ph)));
                    }
                    ComponentParams::Regime(p) => {
                        assert!((2..=4).contains(&p.regimes));
                        assert_eq!(p.means.len(), p.regimes);
                        assert!((0.3..0.9).contains(&p.phi_regime));
                        assert!((p.p_stay - stay_probability(d)).abs() < 1e-15);
                    }
                    ComponentParams::LongMemory(p) => match p.memory {
                        LongMemory::Arfima { d_frac } => assert!(d_frac > -0.45 && d_frac < 0.45),
                        LongMemory::Fgn { hurst } => assert!((0.6..0.9).contains(&hurst)),
                    },
                    ComponentParams::Volatility(p) => {
                        assert!(p.garch.alpha + p.garch.beta < 1.0);
                        assert!(p.hawkes.excitation / p.hawkes.delta < 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn json_roundtrip_regenerates_identically() {
        for kind in BundleKind::ALL {
            let stream = RngStream::new(42).derive_child(7);
            let (series, draw) = gen_bundle(&stream, kind, 600, 0.6).unwrap();
            let text = draw.to_json().unwrap();
            let back = BundleDraw::from_json(&text).unwrap();
            assert_eq!(back, draw);
            let again = render(&back, 600).unwrap();
            assert_eq!(
                series.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                again.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn draw_json_uses_symbol_names() {
        let draw = draw(5, BundleKind::Ve, 0.5);
        let v: serde_json::Value = serde_json::from_str(&draw.to_json().unwrap()).unwrap();
        assert!(v.get("w").is_some());
        assert!(v.get("d").is_some());
        let p = &v["component_params"];
        assert!(p["garch"].get("alpha_G").is_some());
        assert!(p["hawkes"].get("lambda_0").is_some());
        assert!(p.get("A_spike").is_some());
    }

    #[test]
    fn kind_mismatch_rejected() {
        let mut d = draw(1, BundleKind::St, 0.5);
        d.kind = BundleKind::Nr;
        assert!(d.validate().is_err());
        assert!(gen_bundle(&RngStream::new(1), BundleKind::St, 10, 1.2).is_err());
    }

    #[test]
    fn long_memory_degenerate_reduction_is_white() {
        let mut d = draw(6, BundleKind::Lm, 0.5);
        d.component_params = ComponentParams::LongMemory(LongMemoryParams {
            memory: LongMemory::Arfima { d_frac: 0.0 },
            p_seas: 0.0,
            overlay: None,
        });
        d.weights = vec![1.0, 0.0, 0.0];
        let y = render(&d, 8192).unwrap();
        let r = acf(&y, 5).unwrap();
        assert!(r[1..].iter().all(|v| v.abs() < 0.05));
    }

    #[test]
    fn volatility_without_events_is_pure_garch() {
        let mut d = draw(7, BundleKind::Ve, 0.5);
        if let ComponentParams::Volatility(p) = &mut d.component_params {
            p.hawkes.excitation = 0.0;
            p.spike_amplitude = 0.0;
            p.garch = GarchParams {
                omega: 0.05,
                alpha: 0.25,
                beta: 0.7,
            };
        }
        d.weights = vec![1.0, 0.0, 0.0];
        let y = render(&d, 8192).unwrap();
        let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
        assert!(acf(&sq, 1).unwrap()[1] > 0.05);
    }

    #[test]
    fn seasonal_trend_variance_includes_noise() {
        let root = RngStream::new(8);
        let mut vars = Vec::new();
        let mut noise = Vec::new();
        for i in 0..500 {
            let (y, draw) = gen_bundle(&root.derive_child(i), BundleKind::St, 1024, 0.5).unwrap();
            vars.push(variance(&y));
            noise.push(draw.sigma_obs * draw.sigma_obs);
        }
        assert!((mean(&vars) - (1.0 + mean(&noise))).abs() < 0.15);
    }

    #[test]
    fn easy_weights_concentrate_and_hard_weights_spread() {
        let anchors = VarianceAnchors::default();
        let mut s = RngStream::new(9);
        let tau = anchors.target_fractions(BundleKind::St, 0.0).unwrap().tau;
        let mut close = 0;
        let mut easy = vec![Vec::new(); 3];
        let mut hard = vec![Vec::new(); 3];
        for _ in 0..1000 {
            let w = sample_weights(&mut s, BundleKind::St, 0.0, &anchors).unwrap();
            if w.iter().zip(&tau).all(|(a, b)| (a - b).abs() <= 0.1) {
                close += 1;
            }
            let h = sample_weights(&mut s, BundleKind::St, 1.0, &anchors).unwrap();
            for k in 0..3 {
                easy[k].push(w[k]);
                hard[k].push(h[k]);
            }
        }
        assert!(close >= 990);
        for k in 0..3 {
            assert!(std_dev(&hard[k]) > std_dev(&easy[k]));
        }
    }

    #[test]
    fn difficulty_monotonicity() {
        let root = RngStream::new(10);
        let mut switches = [0usize; 2];
        let mut events = [0usize; 2];
        let mut sigma = [0.0; 2];
        for (slot, d) in [0.0, 1.0].into_iter().enumerate() {
            for i in 0..200 {
                let nr = sample_draw(
                    &root.derive_child(i),
                    BundleKind::Nr,
                    d,
                    &VarianceAnchors::default(),
                )
                .unwrap();
                let (_, t) = render_traced(&nr, 512).unwrap();
                switches[slot] += t.regime_switches.unwrap();
                sigma[slot] += nr.sigma_obs;
                let ve = sample_draw(
                    &root.derive_child(1000 + i),
                    BundleKind::Ve,
                    d,
                    &VarianceAnchors::default(),
                )
                .unwrap();
                let (_, t) = render_traced(&ve, 512).unwrap();
                events[slot] += t.event_count.unwrap();
            }
        }
        assert!(switches[1] > switches[0]);
        assert!(events[1] > events[0]);
        assert!(sigma[1] > sigma[0]);
    }
}
