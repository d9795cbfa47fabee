//! Campaign driver: per round, build a subset of the corpus under the
//! configured strategy, pick a seed from it, then mutate and execute a batch
//! of children, saving the ones that reach new edges.
//!
//! Strategies:
//! * `RandSet` — randomized single-pass cover, newest seed from the subset.
//! * `GreedySubset` — deterministic greedy cover, newest seed from the subset.
//! * `CullQueue` — favored-set emulation: per edge the cheapest covering
//!   seed (cost times length) becomes favored, then the first not-yet-fuzzed
//!   favored seed is picked.
//! * `WeightedRandom` — full-corpus sampling weighted by edge coverage.
//!
//! The whole loop is single-threaded and fully determined by the
//! configuration seed.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::bitmap::EdgeBitmap;
use crate::cfg::Cfg;
use crate::corpus::{Corpus, FeatureMode, SeedId};
use crate::metrics::{CampaignStats, RoundLog};
use crate::rng::{DetRng, Purpose};
use crate::setcover::{greedy_cover, randomized_cover, CoverError};
use crate::target::execute;

/// Default number of mutants generated per scheduling round.
pub const DEFAULT_MUTANTS_PER_ROUND: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    RandSet,
    GreedySubset,
    CullQueue,
    WeightedRandom,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::RandSet => "randset",
            Strategy::GreedySubset => "greedy",
            Strategy::CullQueue => "cullqueue",
            Strategy::WeightedRandom => "wrandom",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub cfg: Arc<Cfg>,
    pub initial_seeds: Vec<Vec<u8>>,
    pub strategy: Strategy,
    pub feature_mode: FeatureMode,
    pub rounds: usize,
    pub mutants_per_round: usize,
    pub max_steps: usize,
    pub rng_seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("invalid campaign config: {0}")]
    InvalidConfig(&'static str),
    #[error("corpus is empty after initialization")]
    EmptyCorpus,
    #[error("corpus reduction failed: {0}")]
    Cover(#[from] CoverError),
}

/// Runs a full campaign and returns its round-by-round record.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignStats, CampaignError> {
    if config.rounds == 0 {
        return Err(CampaignError::InvalidConfig("rounds must be at least 1"));
    }
    if config.mutants_per_round == 0 {
        return Err(CampaignError::InvalidConfig(
            "mutants_per_round must be at least 1",
        ));
    }
    if config.max_steps == 0 {
        return Err(CampaignError::InvalidConfig("max_steps must be at least 1"));
    }

    let mut corpus = Corpus::new(config.cfg.clone());
    for bytes in &config.initial_seeds {
        let trace = execute(&config.cfg, bytes, config.max_steps);
        corpus.insert_seed(bytes, &trace, 0);
    }
    if corpus.is_empty() {
        return Err(CampaignError::EmptyCorpus);
    }

    // One stream per purpose, all carved from the campaign seed, so that
    // strategies compared under one seed draw identical streams.
    let mut shuffle_rng = DetRng::for_purpose(config.rng_seed, Purpose::Shuffle);
    let mut mutation_rng = DetRng::for_purpose(config.rng_seed, Purpose::Mutation);
    let mut sampling_rng = DetRng::for_purpose(config.rng_seed, Purpose::Sampling);

    let mut rounds = Vec::with_capacity(config.rounds);
    for round in 1..=config.rounds {
        let round_start = Instant::now();
        let corpus_size = corpus.len();

        let (selected, subset, reduction_time) = match config.strategy {
            Strategy::RandSet | Strategy::GreedySubset => {
                let instance = corpus.cover_instance(config.feature_mode);
                let result = match config.strategy {
                    Strategy::RandSet => randomized_cover(&instance, &mut shuffle_rng)?,
                    _ => greedy_cover(&instance)?,
                };
                // An empty cover means there was nothing left to cover (an
                // exhausted frontier, say); fall back to the whole corpus.
                let subset: Vec<SeedId> = if result.chosen.is_empty() {
                    corpus.seed_ids().collect()
                } else {
                    result.chosen
                };
                (select_newest(&subset, &corpus), subset, result.elapsed)
            }
            Strategy::CullQueue => {
                let start = Instant::now();
                let favored = cull_favored(&corpus);
                // No covered edges means no favored seeds; rotate over the
                // whole corpus instead.
                let pool: Vec<SeedId> = if favored.is_empty() {
                    corpus.seed_ids().collect()
                } else {
                    favored
                };
                let selected = cull_pick_favored(&mut corpus, &pool);
                (selected, pool, start.elapsed())
            }
            Strategy::WeightedRandom => {
                let selected = weighted_random_select(&corpus, &mut sampling_rng);
                let subset: Vec<SeedId> = corpus.seed_ids().collect();
                (selected, subset, Duration::ZERO)
            }
        };

        log::debug!(
            "round {round}: strategy {} selected seed {selected} from subset of {}",
            config.strategy.name(),
            subset.len()
        );

        let parent = corpus.get(selected).bytes.clone();
        for _ in 0..config.mutants_per_round {
            let child = mutate(&parent, &mut mutation_rng);
            let trace = execute(&config.cfg, &child, config.max_steps);
            corpus.maybe_save(&child, &trace, round);
        }

        rounds.push(RoundLog {
            round,
            selected,
            subset_size: subset.len(),
            subset,
            corpus_size,
            reduction_time,
            round_time: round_start.elapsed(),
            edges_covered: corpus.global_edges().count_ones(),
        });
    }

    Ok(CampaignStats {
        strategy: config.strategy,
        feature_mode: config.feature_mode,
        rounds,
        final_nodes: corpus.global_nodes().clone(),
        final_edges: corpus.global_edges().clone(),
        final_corpus_size: corpus.len(),
    })
}

/// Picks the seed with the greatest discovery round; ties go to the greatest
/// id. Panics on an empty subset.
pub fn select_newest(subset: &[SeedId], corpus: &Corpus) -> SeedId {
    assert!(!subset.is_empty(), "cannot select from an empty subset");
    *subset
        .iter()
        .max_by_key(|&&id| (corpus.get(id).discovery_round, id))
        .expect("subset is nonempty")
}

/// Stage one of the cull-queue emulation: walk edges in id order and, for
/// each edge not yet covered by the favored set, add the covering seed with
/// the smallest cost-times-length product (ties by lowest id).
pub fn cull_favored(corpus: &Corpus) -> Vec<SeedId> {
    let edge_count = corpus.cfg().edge_count();
    let mut covered = EdgeBitmap::new(edge_count);
    let mut favored = Vec::new();
    for edge in 0..edge_count {
        if !corpus.global_edges().get(edge) || covered.get(edge) {
            continue;
        }
        let mut top: Option<(u128, SeedId)> = None;
        for seed in corpus.seeds() {
            if !seed.edges.get(edge) {
                continue;
            }
            let score = seed.cost as u128 * seed.length as u128;
            let better = match top {
                None => true,
                Some((best, best_id)) => score < best || (score == best && seed.id < best_id),
            };
            if better {
                top = Some((score, seed.id));
            }
        }
        let (_, winner) = top.expect("a globally covered edge has a covering seed");
        debug_assert!(!favored.contains(&winner));
        favored.push(winner);
        covered.union_with(&corpus.get(winner).edges);
    }
    favored
}

/// Stage two: the first favored seed (in id order) not yet fuzzed; when
/// every favored seed has been fuzzed already, the first favored one. The
/// returned seed is marked as fuzzed.
fn cull_pick_favored(corpus: &mut Corpus, favored: &[SeedId]) -> SeedId {
    assert!(!favored.is_empty(), "cannot pick from an empty favored set");
    let mut ordered = favored.to_vec();
    ordered.sort();
    let pick = ordered
        .iter()
        .copied()
        .find(|&id| !corpus.get(id).fuzzed_before)
        .unwrap_or_else(|| ordered[0]);
    corpus.get_mut(pick).fuzzed_before = true;
    pick
}

/// The two-stage cull-queue selection over the current corpus. Falls back to
/// rotating over the whole corpus when no edge has been covered yet.
pub fn cull_queue_select(corpus: &mut Corpus) -> SeedId {
    let favored = cull_favored(corpus);
    let pool: Vec<SeedId> = if favored.is_empty() {
        corpus.seed_ids().collect()
    } else {
        favored
    };
    cull_pick_favored(corpus, &pool)
}

/// Samples a seed from the whole corpus with probability proportional to
/// `1 + popcount(edges)`.
pub fn weighted_random_select(corpus: &Corpus, rng: &mut DetRng) -> SeedId {
    assert!(!corpus.is_empty(), "cannot sample from an empty corpus");
    let total: u64 = corpus
        .seeds()
        .iter()
        .map(|s| 1 + s.edges.count_ones() as u64)
        .sum();
    let mut draw = rng.below(total);
    for seed in corpus.seeds() {
        let weight = 1 + seed.edges.count_ones() as u64;
        if draw < weight {
            return seed.id;
        }
        draw -= weight;
    }
    unreachable!("draw is below the total weight");
}

/// Byte-level mutation operators, havoc style.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MutOp {
    BitFlip,
    ByteSet,
    ByteInsert,
    ByteDelete,
    ChunkDuplicate,
}

/// Applies 1 to 8 stacked operators to a copy of the parent. The output
/// length stays within `[0, 4 * parent_len + 16]`.
pub fn mutate(parent: &[u8], rng: &mut DetRng) -> Vec<u8> {
    mutate_logged(parent, rng).0
}

/// Like [`mutate`], also reporting which operators were drawn.
pub fn mutate_logged(parent: &[u8], rng: &mut DetRng) -> (Vec<u8>, Vec<MutOp>) {
    let cap = 4 * parent.len() + 16;
    let mut buf = parent.to_vec();
    let count = 1 + rng.below(8) as usize;
    let mut ops = Vec::with_capacity(count);
    for _ in 0..count {
        let op = match rng.below(5) {
            0 => MutOp::BitFlip,
            1 => MutOp::ByteSet,
            2 => MutOp::ByteInsert,
            3 => MutOp::ByteDelete,
            _ => MutOp::ChunkDuplicate,
        };
        ops.push(op);
        apply_op(op, &mut buf, cap, rng);
    }
    (buf, ops)
}

fn apply_op(op: MutOp, buf: &mut Vec<u8>, cap: usize, rng: &mut DetRng) {
    match op {
        MutOp::BitFlip => {
            if !buf.is_empty() {
                let i = rng.below(buf.len() as u64) as usize;
                let bit = rng.below(8) as u8;
                buf[i] ^= 1 << bit;
            }
        }
        MutOp::ByteSet => {
            if !buf.is_empty() {
                let i = rng.below(buf.len() as u64) as usize;
                buf[i] = rng.next_u64() as u8;
            }
        }
        MutOp::ByteInsert => {
            if buf.len() < cap {
                let pos = rng.below(buf.len() as u64 + 1) as usize;
                buf.insert(pos, rng.next_u64() as u8);
            }
        }
        MutOp::ByteDelete => {
            if !buf.is_empty() {
                let pos = rng.below(buf.len() as u64) as usize;
                buf.remove(pos);
            }
        }
        MutOp::ChunkDuplicate => {
            if !buf.is_empty() {
                let start = rng.below(buf.len() as u64) as usize;
                let max_len = buf.len() - start;
                let chunk_len = 1 + rng.below(max_len as u64) as usize;
                if buf.len() + chunk_len <= cap {
                    let chunk: Vec<u8> = buf[start..start + chunk_len].to_vec();
                    let pos = rng.below(buf.len() as u64 + 1) as usize;
                    buf.splice(pos..pos, chunk);
                }
            }
        }
    }
}
