//! JSON form of a mining run.

use mint_core::eval::{real_rectangles, RectMapping};
use mint_core::miner::{MinerConfig, MiningResult, PruneMode, TraceEntry};
use mint_core::{
    Dataset, DiscretizationGrid, HyperRectangle, LengthBreakdown, PatternSet, RealRect,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternDocument {
    pub attributes: Vec<String>,
    pub n_objects: usize,
    pub grid: DiscretizationGrid,
    pub config: ConfigRecord,
    pub compression_ratio: f64,
    pub lengths: LengthBreakdown,
    pub baseline: LengthBreakdown,
    pub initial_candidates: usize,
    pub patterns: Vec<PatternRecord>,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub bins: Vec<usize>,
    pub k_neighbors: usize,
    pub epsilon: f64,
    pub prune: PruneMode,
    pub prune_top_n: Option<usize>,
    pub knn_propagate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternRecord {
    pub id: usize,
    /// Inclusive `[first, last]` interval index per attribute.
    pub bounds: Vec<[u32; 2]>,
    pub sizes: Vec<u32>,
    /// Outer cut points of the spanned intervals.
    pub interval: Vec<[f64; 2]>,
    /// Bounding box of the covered objects' values.
    pub extent: Vec<[f64; 2]>,
    pub usage: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<Vec<usize>>,
}

fn pairs(r: &RealRect) -> Vec<[f64; 2]> {
    r.lo.iter().zip(&r.hi).map(|(&l, &h)| [l, h]).collect()
}

impl PatternDocument {
    pub fn new(
        data: &Dataset,
        grid: &DiscretizationGrid,
        cfg: &MinerConfig,
        result: &MiningResult,
        emit_covers: bool,
    ) -> Self {
        let intervals = real_rectangles(&result.patterns, data, grid, RectMapping::Grid);
        let extents = real_rectangles(&result.patterns, data, grid, RectMapping::Cover);
        let patterns = result
            .patterns
            .iter()
            .zip(&result.ids)
            .zip(intervals.iter().zip(&extents))
            .map(|((h, &id), (interval, extent))| PatternRecord {
                id,
                bounds: h
                    .lower
                    .iter()
                    .zip(&h.upper)
                    .map(|(&l, &u)| [l, u])
                    .collect(),
                sizes: h.sizes(),
                interval: pairs(interval),
                extent: pairs(extent),
                usage: h.usage(),
                cover: emit_covers.then(|| h.cover.clone()),
            })
            .collect();
        PatternDocument {
            attributes: data.attributes().to_vec(),
            n_objects: data.n_objects(),
            grid: grid.clone(),
            config: ConfigRecord {
                bins: grid.all_bins(),
                k_neighbors: cfg.k_neighbors,
                epsilon: cfg.epsilon,
                prune: cfg.prune,
                prune_top_n: cfg.prune_top_n,
                knn_propagate: cfg.knn_propagate,
            },
            compression_ratio: result.compression_ratio(),
            lengths: result.lengths,
            baseline: result.baseline,
            initial_candidates: result.initial_candidates,
            patterns,
            trace: result.trace.clone(),
        }
    }

    pub fn has_covers(&self) -> bool {
        self.patterns.iter().all(|p| p.cover.is_some())
    }

    /// Rebuilds the index rectangles; covers are empty unless stored.
    pub fn pattern_set(&self) -> mint_core::Result<PatternSet> {
        let rects = self
            .patterns
            .iter()
            .map(|p| {
                HyperRectangle::new(
                    p.bounds.iter().map(|b| b[0]).collect(),
                    p.bounds.iter().map(|b| b[1]).collect(),
                    p.cover.clone().unwrap_or_default(),
                )
            })
            .collect::<mint_core::Result<Vec<_>>>()?;
        Ok(PatternSet::new(rects))
    }

    pub fn rectangles(&self, mapping: RectMapping) -> Vec<RealRect> {
        self.patterns
            .iter()
            .map(|p| {
                let side = match mapping {
                    RectMapping::Grid => &p.interval,
                    RectMapping::Cover => &p.extent,
                };
                RealRect::new(
                    side.iter().map(|s| s[0]).collect(),
                    side.iter().map(|s| s[1]).collect(),
                )
            })
            .collect()
    }
}
