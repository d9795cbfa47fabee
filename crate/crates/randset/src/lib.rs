//! randset: a deterministic laboratory for corpus reduction in fuzzing seed
//! scheduling.
//!
//! The crate simulates coverage-guided fuzzing campaigns against synthetic
//! control-flow-graph targets and compares seed-scheduling strategies built
//! on set-cover corpus reduction: a randomized single-pass cover, a
//! deterministic greedy cover, a cull-queue emulation, and weighted-random
//! full-corpus sampling. Every run is a pure function of its inputs and one
//! 64-bit seed.

pub mod bitmap;
pub mod cfg;
pub mod cli;
pub mod corpus;
pub mod metrics;
pub mod rng;
pub mod scheduler;
pub mod setcover;
pub mod target;

pub use bitmap::{Bitmap, EdgeBitmap, FeatureBitmap, NodeBitmap};
pub use cfg::{
    build_cfg, frontier_nodes, generate_random_cfg, parse_cfg, serialize_cfg, Cfg, CfgError,
    CfgSpec, EdgeId, NodeId,
};
pub use corpus::{Corpus, CorpusIoError, FeatureMode, SeedId, SeedRecord};
pub use metrics::{cdf_dominates, CampaignStats, CdfPoint, RoundLog};
pub use rng::{shuffled_indices, DetRng, Purpose};
pub use scheduler::{
    cull_queue_select, mutate, run_campaign, select_newest, weighted_random_select,
    CampaignConfig, CampaignError, Strategy, DEFAULT_MUTANTS_PER_ROUND,
};
pub use setcover::{
    exact_min_cover, greedy_cover, randomized_cover, CoverError, CoverInstance, CoverResult,
    EXACT_SET_LIMIT,
};
pub use target::{execute, Trace, DEFAULT_MAX_STEPS};
