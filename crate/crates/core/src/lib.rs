//! Mining of MDL-optimal sets of hyper-rectangle patterns in numerical data.
//!
//! The pipeline is: load a [`Dataset`], build a [`DiscretizationGrid`],
//! [`discretize`], then [`mine`] a [`PatternSet`] whose description length
//! is as small as the greedy search can make it.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod mdl;
pub mod miner;
pub mod pattern;
pub mod synth;

pub use dataset::{
    discretize, elementary_cells, equal_width_grid, import_grid, load_csv, parse_grid, read_csv,
    BinsSpec, Dataset, DiscretizationGrid, DiscretizedDataset, ElementaryCell,
};
pub use error::{Error, Result};
pub use mdl::{
    merge_gain, model_bits, plugin_data_bits, residual_bits, total_bits, universal_int,
    EncodingContext, LengthBreakdown,
};
pub use miner::{
    initial_candidates, mine, prune, CandidateStore, MinerConfig, MiningResult, PruneMode,
};
pub use pattern::{HyperRectangle, PatternSet, RealRect};
