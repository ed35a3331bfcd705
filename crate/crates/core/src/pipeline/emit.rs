//! Resolving a mixing plan against real data and writing the dataset.
//!
//! Stream layout under the dataset seed:
//!
//! ```text
//! root/0      sparsity selection
//! root/1/i    cache slot i
//! root/2/e    epoch e synthetic draws
//! ```

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cache::{draw_synthetic, init_cache, SampleCache, SyntheticSource};
use super::ingest::{RealSplits, SplitFractions, Table};
use super::mixing::{apply_sparsity_with, build_epoch_plan, EpochPlan, MixPlan};
use super::windows::{make_windows, Window, WindowSpec};
use crate::error::{Error, Result};
use crate::panel::{GeneratorConfig, Panel};
use crate::rng::{RngStream, StreamId};

pub const CONCAT_ORDER: &str = "real_then_synthetic";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRows {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// One synthetic panel written to `synthetic.csv`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: usize,
    pub stream: StreamId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochProvenance {
    pub epoch: usize,
    pub n_real: usize,
    /// Sample ids into `synthetic.csv`, in draw order.
    pub synthetic: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub seed: u64,
    pub source: String,
    pub index_name: String,
    pub columns: Vec<String>,
    pub splits: SplitFractions,
    pub rows: SplitRows,
    pub generator: GeneratorConfig,
    pub plan: MixPlan,
    pub windows: WindowSpec,
    /// Window layout relative to a window start.
    pub window_layout: Window,
    pub orig_train_windows: usize,
    /// Start rows (within the train split) of the retained real windows.
    pub retained_windows: Vec<usize>,
    /// Largest per-epoch synthetic count.
    pub n_synth: usize,
    pub epoch_plan: EpochPlan,
    pub order: String,
    pub synthetic_samples: Vec<SampleRecord>,
    pub epochs: Vec<EpochProvenance>,
}

/// What is needed to produce a mixed dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSpec {
    pub generator: GeneratorConfig,
    pub plan: MixPlan,
    pub windows: WindowSpec,
    pub seed: u64,
}

/// A plan resolved against real data, ready to emit.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub real: RealSplits,
    /// Generator settings for synthetic windows: one panel per window.
    pub generator: GeneratorConfig,
    pub plan: MixPlan,
    pub windows: WindowSpec,
    pub seed: u64,
    pub orig_train_windows: usize,
    pub retained: Vec<usize>,
    pub epoch_plan: EpochPlan,
    pub cache: Option<SampleCache>,
}

pub fn build_dataset(real: RealSplits, spec: &DatasetSpec) -> Result<Dataset> {
    spec.plan.validate()?;
    spec.windows.validate()?;
    let generator = GeneratorConfig {
        length: spec.windows.span(),
        channels: real.channels(),
        master_seed: spec.seed,
        ..spec.generator.clone()
    };
    generator.validate()?;

    let root = RngStream::new(spec.seed);
    let windows = make_windows(real.train.rows(), &spec.windows)?;
    let orig = windows.len();
    let retained = apply_sparsity_with(
        &mut root.derive_child(0),
        orig,
        spec.plan.sparsity,
        spec.plan.sparsity_mode,
    )?;
    let epoch_plan = build_epoch_plan(&spec.plan, orig, retained.len())?;
    let cache = if spec.plan.cache_size > 0 && epoch_plan.total_synth() > 0 {
        Some(init_cache(
            &root.derive_child(1),
            &generator,
            spec.plan.cache_size,
        )?)
    } else {
        None
    };
    Ok(Dataset {
        real,
        generator,
        plan: spec.plan.clone(),
        windows: spec.windows,
        seed: spec.seed,
        orig_train_windows: orig,
        retained: retained.into_iter().map(|i| windows[i].start).collect(),
        epoch_plan,
        cache,
    })
}

fn create(path: &Path) -> Result<BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(out, "{},{}", table.index_name, table.columns.join(",")).map_err(io)?;
    let mut line = String::new();
    for (label, row) in table.index.iter().zip(table.data.rows()) {
        line.clear();
        line.push_str(label);
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

fn write_sample<W: Write>(
    out: &mut W,
    id: usize,
    panel: &Panel,
    line: &mut String,
) -> std::io::Result<()> {
    for (t, row) in panel.data.rows().into_iter().enumerate() {
        line.clear();
        line.push_str(&format!("{id},{t}"));
        for v in row {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Write `train.csv`, `val.csv`, `test.csv`, `synthetic.csv` and
/// `manifest.json` into `out_dir`.
pub fn emit_dataset(out_dir: &Path, dataset: &Dataset) -> Result<Manifest> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let real = &dataset.real;
    write_table(&out_dir.join("train.csv"), &real.train)?;
    write_table(&out_dir.join("val.csv"), &real.val)?;
    write_table(&out_dir.join("test.csv"), &real.test)?;

    let synth_path = out_dir.join("synthetic.csv");
    let io = |e| Error::io(&synth_path, e);
    let mut out = create(&synth_path)?;
    writeln!(out, "sample,index,{}", real.train.columns.join(",")).map_err(io)?;
    let mut line = String::new();
    let mut records = Vec::new();
    let mut epochs = Vec::new();
    let root = RngStream::new(dataset.seed);

    if let Some(cache) = &dataset.cache {
        for slot in 0..cache.len() {
            write_sample(&mut out, slot, cache.get(slot).expect("slot"), &mut line).map_err(io)?;
            records.push(SampleRecord {
                id: slot,
                stream: cache.stream_of(slot).expect("slot").clone(),
            });
        }
    }
    for counts in &dataset.epoch_plan {
        let epoch_stream = root.derive_child(2).derive_child(counts.epoch as u32);
        let source = match &dataset.cache {
            Some(cache) => SyntheticSource::Cache(cache),
            None => SyntheticSource::Fresh(&dataset.generator),
        };
        let draws = draw_synthetic(source, &epoch_stream, counts.n_synth)?;
        let mut ids = Vec::with_capacity(draws.len());
        for draw in draws {
            match draw.origin {
                super::cache::SampleOrigin::Cache { slot } => ids.push(slot),
                super::cache::SampleOrigin::Fresh { stream } => {
                    let id = records.len();
                    write_sample(&mut out, id, &draw.panel, &mut line).map_err(io)?;
                    records.push(SampleRecord { id, stream });
                    ids.push(id);
                }
            }
        }
        epochs.push(EpochProvenance {
            epoch: counts.epoch,
            n_real: counts.n_real,
            synthetic: ids,
        });
    }
    out.flush().map_err(io)?;

    let spec = &dataset.windows;
    let manifest = Manifest {
        version: crate::VERSION.to_string(),
        seed: dataset.seed,
        source: real.source.clone(),
        index_name: real.train.index_name.clone(),
        columns: real.train.columns.clone(),
        splits: real.fractions,
        rows: SplitRows {
            train: real.train.rows(),
            val: real.val.rows(),
            test: real.test.rows(),
        },
        generator: dataset.generator.clone(),
        plan: dataset.plan.clone(),
        windows: *spec,
        window_layout: make_windows(spec.span(), spec)?.remove(0),
        orig_train_windows: dataset.orig_train_windows,
        retained_windows: dataset.retained.clone(),
        n_synth: dataset
            .epoch_plan
            .iter()
            .map(|e| e.n_synth)
            .max()
            .unwrap_or(0),
        epoch_plan: dataset.epoch_plan.clone(),
        order: CONCAT_ORDER.to_string(),
        synthetic_samples: records,
        epochs,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
