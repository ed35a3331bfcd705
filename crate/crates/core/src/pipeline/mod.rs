//! Real-data ingestion and real/synthetic dataset assembly.

mod cache;
mod emit;
mod ingest;
mod mixing;
mod windows;

pub use cache::{
    draw_synthetic, init_cache, SampleCache, SampleOrigin, SyntheticSample, SyntheticSource,
};
pub use emit::{
    build_dataset, emit_dataset, Dataset, DatasetSpec, EpochProvenance, Manifest, SampleRecord,
    SplitRows, CONCAT_ORDER,
};
pub use ingest::{load_real_csv, read_table, RealSplits, SplitFractions, Table};
pub use mixing::{
    anneal_ratio, apply_sparsity, apply_sparsity_with, build_epoch_plan, synth_count, EpochCounts,
    EpochPlan, MixMode, MixPlan, SparsityMode, Strategy,
};
pub use windows::{make_windows, Window, WindowSpec};

/// `floor(n * frac)`, nudged so that products like `1000 * 0.29` land on the
/// intended integer.
pub(crate) fn floor_fraction(n: usize, frac: f64) -> usize {
    let x = n as f64 * frac;
    (x + 1e-9 * x.max(1.0)).floor() as usize
}
