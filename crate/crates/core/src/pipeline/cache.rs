use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{gen_panel_from, Execution, GeneratorConfig, Panel};
use crate::rng::{RngStream, StreamId};

/// A fixed set of pre-generated panels. Slot `i` comes from `stream/i`.
#[derive(Clone, Debug)]
pub struct SampleCache {
    capacity: usize,
    panels: Vec<Arc<Panel>>,
    streams: Vec<StreamId>,
}

impl SampleCache {
    /// Wrap already generated panels. Fails when there are more panels than
    /// slots.
    pub fn from_panels(capacity: usize, panels: Vec<(StreamId, Panel)>) -> Result<SampleCache> {
        if panels.len() > capacity {
            return Err(Error::invalid(
                "cache_size",
                format!("{} panels exceed capacity {capacity}", panels.len()),
            ));
        }
        let (streams, panels) = panels.into_iter().map(|(id, p)| (id, Arc::new(p))).unzip();
        Ok(SampleCache {
            capacity,
            panels,
            streams,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn get(&self, slot: usize) -> Option<&Arc<Panel>> {
        self.panels.get(slot)
    }

    pub fn stream_of(&self, slot: usize) -> Option<&StreamId> {
        self.streams.get(slot)
    }
}

pub fn init_cache(
    stream: &RngStream,
    config: &GeneratorConfig,
    capacity: usize,
) -> Result<SampleCache> {
    config.validate()?;
    let panels = (0..capacity)
        .into_par_iter()
        .map(|i| {
            let root = stream.derive_child(i as u32);
            gen_panel_from(&root, config, Execution::Sequential).map(|p| (root.id().clone(), p))
        })
        .collect::<Result<Vec<_>>>()?;
    SampleCache::from_panels(capacity, panels)
}

/// Where synthetic samples come from.
#[derive(Clone, Copy, Debug)]
pub enum SyntheticSource<'a> {
    /// Generate a new panel for every request.
    Fresh(&'a GeneratorConfig),
    Cache(&'a SampleCache),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum SampleOrigin {
    Fresh { stream: StreamId },
    Cache { slot: usize },
}

#[derive(Clone, Debug)]
pub struct SyntheticSample {
    pub panel: Arc<Panel>,
    pub origin: SampleOrigin,
}

/// Draw `count` synthetic panels. Fresh panels use `epoch_stream/i`; cached
/// panels are picked uniformly with replacement using `epoch_stream` itself.
pub fn draw_synthetic(
    source: SyntheticSource<'_>,
    epoch_stream: &RngStream,
    count: usize,
) -> Result<Vec<SyntheticSample>> {
    match source {
        SyntheticSource::Fresh(config) => (0..count)
            .into_par_iter()
            .map(|i| {
                let root = epoch_stream.derive_child(i as u32);
                let panel = gen_panel_from(&root, config, Execution::Sequential)?;
                Ok(SyntheticSample {
                    panel: Arc::new(panel),
                    origin: SampleOrigin::Fresh {
                        stream: root.id().clone(),
                    },
                })
            })
            .collect(),
        SyntheticSource::Cache(cache) => {
            if count == 0 {
                return Ok(Vec::new());
            }
            if cache.is_empty() {
                return Err(Error::EmptyCache);
            }
            let mut s = epoch_stream.clone();
            Ok((0..count)
                .map(|_| {
                    let slot = s.index(cache.len());
                    SyntheticSample {
                        panel: Arc::clone(&cache.panels[slot]),
                        origin: SampleOrigin::Cache { slot },
                    }
                })
                .collect())
        }
    }
}
