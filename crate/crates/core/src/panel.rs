//! Multichannel panels: per-channel bundle generation plus optional
//! latent-factor mixing across channels.
//!
//! Stream layout under the panel root:
//!
//! ```text
//! root/0          panel difficulty
//! root/1/j/0      channel j bundle kind
//! root/1/j/1      channel j difficulty (per-channel mode only)
//! root/1/j/2      channel j bundle stream
//! root/2/0        latent coin flip
//! root/2/1        latent rho and mixing matrix
//! ```

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundles::{
    check_difficulty, gen_bundle_with, sample_difficulty, BundleDraw, BundleKind, DifficultySpec,
    VarianceAnchors, STANDARDIZE_EPS,
};
use crate::error::{Error, Result};
use crate::processes::standardize;
use crate::rng::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    /// Time steps per channel.
    pub length: usize,
    pub channels: usize,
    /// Probabilities of ST, NR, LM, VE.
    pub bundle_weights: [f64; 4],
    /// Restrict every channel to one bundle kind; overrides the weights.
    pub bundle_filter: Option<BundleKind>,
    pub difficulty: DifficultySpec,
    /// Draw a difficulty per channel instead of one per panel.
    pub per_channel_difficulty: bool,
    pub p_latent: f64,
    pub master_seed: u64,
    pub anchors: VarianceAnchors,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            length: 1000,
            channels: 7,
            bundle_weights: [0.25; 4],
            bundle_filter: None,
            difficulty: DifficultySpec::DefaultMixture,
            per_channel_difficulty: false,
            p_latent: 0.5,
            master_seed: 0,
            anchors: VarianceAnchors::default(),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::invalid("channels", "need at least one channel"));
        }
        if self.length < 2 {
            return Err(Error::invalid(
                "length",
                format!("need at least 2 time steps, got {}", self.length),
            ));
        }
        if self
            .bundle_weights
            .iter()
            .any(|w| !(*w >= 0.0) || !w.is_finite())
        {
            return Err(Error::invalid(
                "bundle_weights",
                "entries must be finite and nonnegative",
            ));
        }
        let total: f64 = self.bundle_weights.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::invalid(
                "bundle_weights",
                format!("must sum to 1, got {total}"),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_latent) {
            return Err(Error::invalid(
                "p_latent",
                format!("must be in [0, 1], got {}", self.p_latent),
            ));
        }
        self.difficulty.validate()?;
        self.anchors.validate()
    }

    /// Effective kind probabilities after applying the filter.
    pub fn kind_weights(&self) -> [f64; 4] {
        match self.bundle_filter {
            Some(kind) => {
                let mut w = [0.0; 4];
                w[kind.index()] = 1.0;
                w
            }
            None => self.bundle_weights,
        }
    }

    pub fn from_json(text: &str) -> Result<GeneratorConfig> {
        let config: GeneratorConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentRecord {
    pub rho: f64,
    /// Row-major `D x D` matrix `A = (1 - rho) I + rho A~`.
    pub mix_matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Panel {
    /// `T x D`.
    pub data: Array2<f64>,
    /// Panel-level difficulty (also drives the latent mixing strength).
    pub difficulty: f64,
    pub channel_meta: Vec<BundleDraw>,
    pub latent_record: Option<LatentRecord>,
}

/// Whether channels are generated on the rayon pool or one after another.
/// Both produce identical panels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Generate a panel from `config.master_seed`.
pub fn gen_panel(config: &GeneratorConfig) -> Result<Panel> {
    gen_panel_from(
        &RngStream::new(config.master_seed),
        config,
        Execution::Parallel,
    )
}

/// Generate a panel rooted at an arbitrary stream (used for cached and
/// per-epoch synthetic samples).
pub fn gen_panel_from(
    root: &RngStream,
    config: &GeneratorConfig,
    execution: Execution,
) -> Result<Panel> {
    config.validate()?;
    let panel_d = sample_difficulty(&mut root.derive_child(0), config.difficulty)?;
    let kind_weights = config.kind_weights();
    let channels_root = root.derive_child(1);

    let channel = |j: usize| -> Result<(Vec<f64>, BundleDraw)> {
        let c = channels_root.derive_child(j as u32);
        let kind = BundleKind::ALL[c.derive_child(0).categorical(&kind_weights)?];
        let d = if config.per_channel_difficulty {
            sample_difficulty(&mut c.derive_child(1), config.difficulty)?
        } else {
            panel_d
        };
        gen_bundle_with(&c.derive_child(2), kind, config.length, d, &config.anchors)
    };

    let generated: Vec<(Vec<f64>, BundleDraw)> = match execution {
        Execution::Parallel => (0..config.channels)
            .into_par_iter()
            .map(channel)
            .collect::<Result<_>>()?,
        Execution::Sequential => (0..config.channels).map(channel).collect::<Result<_>>()?,
    };

    let mut data = Array2::zeros((config.length, config.channels));
    let mut channel_meta = Vec::with_capacity(config.channels);
    for (j, (series, draw)) in generated.into_iter().enumerate() {
        data.column_mut(j).assign(&Array1::from(series));
        channel_meta.push(draw);
    }
    let panel = Panel {
        data,
        difficulty: panel_d,
        channel_meta,
        latent_record: None,
    };

    let latent = root.derive_child(2);
    if latent.derive_child(0).bernoulli(config.p_latent) {
        apply_latent(&mut latent.derive_child(1), panel, panel_d)
    } else {
        Ok(panel)
    }
}

/// Latent-factor mixing with `rho ~ U(0.20, 0.50 + 0.20 d)`.
pub fn apply_latent(s: &mut RngStream, panel: Panel, d: f64) -> Result<Panel> {
    check_difficulty(d)?;
    let rho = s.uniform(0.20, 0.50 + 0.20 * d);
    apply_latent_with_rho(s, panel, rho)
}

/// `Y = X A^T` with `A = (1 - rho) I + rho A~`, where `A~` has standard normal
/// entries and unit-norm rows. Output channels are re-standardized.
pub fn apply_latent_with_rho(s: &mut RngStream, mut panel: Panel, rho: f64) -> Result<Panel> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(
            "rho",
            format!("must be in [0, 1], got {rho}"),
        ));
    }
    let d = panel.data.ncols();
    let mut raw = Array2::from_shape_fn((d, d), |_| s.standard_normal());
    for mut row in raw.axis_iter_mut(Axis(0)) {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    let mix = Array2::from_shape_fn((d, d), |(i, j)| {
        let identity = if i == j { 1.0 } else { 0.0 };
        (1.0 - rho) * identity + rho * raw[[i, j]]
    });
    let mut mixed = panel.data.dot(&mix.t());
    for mut col in mixed.columns_mut() {
        let z = standardize(&col.to_vec(), STANDARDIZE_EPS);
        col.assign(&Array1::from(z));
    }
    panel.data = mixed;
    panel.latent_record = Some(LatentRecord {
        rho,
        mix_matrix: mix.rows().into_iter().map(|r| r.to_vec()).collect(),
    });
    Ok(panel)
}

/// JSON sidecar written next to a panel CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PanelMetadata {
    pub config: GeneratorConfig,
    pub difficulty: f64,
    pub channel_meta: Vec<BundleDraw>,
    pub latent_record: Option<LatentRecord>,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.data.ncols()
    }

    pub fn metadata(&self, config: &GeneratorConfig) -> PanelMetadata {
        PanelMetadata {
            config: config.clone(),
            difficulty: self.difficulty,
            channel_meta: self.channel_meta.clone(),
            latent_record: self.latent_record.clone(),
        }
    }

    /// CSV with columns `index, ch0 .. ch{D-1}`, one row per time step.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_matrix_csv(out, &self.data, None)
    }

    pub fn save(&self, config: &GeneratorConfig, csv_path: &Path, meta_path: &Path) -> Result<()> {
        let file = std::fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| with_path(e, csv_path))?;
        let meta = serde_json::to_string_pretty(&self.metadata(config))?;
        std::fs::write(meta_path, meta + "\n").map_err(|e| Error::io(meta_path, e))
    }
}

pub(crate) fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    }
}

/// Write `data` with an integer index column. Column names default to
/// `ch0 .. ch{D-1}`.
pub fn write_matrix_csv<W: Write>(
    mut out: W,
    data: &Array2<f64>,
    names: Option<&[String]>,
) -> Result<()> {
    let io = |e| Error::io("<csv>", e);
    let mut header = String::from("index");
    for j in 0..data.ncols() {
        header.push(',');
        match names {
            Some(n) => header.push_str(&n[j]),
            None => header.push_str(&format!("ch{j}")),
        }
    }
    writeln!(out, "{header}").map_err(io)?;
    let mut line = String::new();
    for (t, row) in data.rows().into_iter().enumerate() {
        line.clear();
        line.push_str(&t.to_string());
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}
