//! Corpus reduction engines.
//!
//! Three ways to pick a subset of seeds whose feature sets cover a universe:
//!
//! * [`randomized_cover`] shuffles the sets with a pre-drawn batch of random
//!   numbers, then makes a single pass, keeping every set that still covers
//!   something. One shuffle plus one pass over the sets.
//! * [`greedy_cover`] repeatedly rescans all sets for the one covering the
//!   most remaining features. Deterministic, and quadratic in the number of
//!   picks times sets.
//! * [`exact_min_cover`] enumerates subsets by size and is the optimality
//!   reference for tiny instances.
//!
//! All three guarantee on success that the union of the chosen feature sets
//! covers the universe; an instance that cannot be covered is reported as an
//! error carrying the residual features.

use std::time::{Duration, Instant};

use crate::bitmap::FeatureBitmap;
use crate::corpus::SeedId;
use crate::rng::{shuffled_indices, DetRng};

/// Exhaustive-search bound for [`exact_min_cover`].
pub const EXACT_SET_LIMIT: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CoverError {
    #[error("feature bitmap width mismatch: universe {universe} vs set {set}")]
    WidthMismatch { universe: usize, set: usize },
    #[error("instance is infeasible: {residual} feature(s) cannot be covered", residual = .residual.count_ones())]
    Infeasible { residual: FeatureBitmap },
    #[error("instance has {count} sets, above the exhaustive bound of {limit}")]
    TooManySets { count: usize, limit: usize },
}

/// A reduction problem: the feature universe and one feature set per seed.
#[derive(Debug, Clone)]
pub struct CoverInstance {
    universe: FeatureBitmap,
    sets: Vec<(SeedId, FeatureBitmap)>,
}

impl CoverInstance {
    /// Widths must agree; feasibility is checked by the algorithms, which
    /// report [`CoverError::Infeasible`] with the uncoverable residue.
    pub fn new(
        universe: FeatureBitmap,
        sets: Vec<(SeedId, FeatureBitmap)>,
    ) -> Result<Self, CoverError> {
        for (_, set) in &sets {
            if set.width() != universe.width() {
                return Err(CoverError::WidthMismatch {
                    universe: universe.width(),
                    set: set.width(),
                });
            }
        }
        Ok(CoverInstance { universe, sets })
    }

    pub fn universe(&self) -> &FeatureBitmap {
        &self.universe
    }

    pub fn sets(&self) -> &[(SeedId, FeatureBitmap)] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// A computed cover and how long the call took.
#[derive(Debug, Clone)]
pub struct CoverResult {
    /// Chosen seed ids, in pick order. Distinct, drawn from the instance.
    pub chosen: Vec<SeedId>,
    pub elapsed: Duration,
}

/// Randomized single-pass cover: shuffle the sets (Fisher-Yates over one
/// batch of pre-drawn random numbers), then walk them once, keeping each set
/// that intersects the remaining uncovered features, stopping as soon as
/// nothing is uncovered.
pub fn randomized_cover(
    instance: &CoverInstance,
    rng: &mut DetRng,
) -> Result<CoverResult, CoverError> {
    let start = Instant::now();
    let order = shuffled_indices(instance.sets.len(), rng);
    let mut uncovered = instance.universe.clone();
    let mut chosen = Vec::new();
    for idx in order {
        if uncovered.is_empty() {
            break;
        }
        let (id, set) = &instance.sets[idx];
        if set.intersects(&uncovered) {
            chosen.push(*id);
            uncovered.subtract(set);
        }
    }
    if !uncovered.is_empty() {
        return Err(CoverError::Infeasible {
            residual: uncovered,
        });
    }
    Ok(CoverResult {
        chosen,
        elapsed: start.elapsed(),
    })
}

/// Deterministic greedy cover: at each step pick the set covering the most
/// remaining features, breaking ties by lowest seed id.
pub fn greedy_cover(instance: &CoverInstance) -> Result<CoverResult, CoverError> {
    let start = Instant::now();
    let mut uncovered = instance.universe.clone();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let mut best: Option<(usize, SeedId, usize)> = None;
        for (idx, (id, set)) in instance.sets.iter().enumerate() {
            let gain = set.intersection_count(&uncovered);
            if gain == 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((best_gain, best_id, _)) => {
                    gain > best_gain || (gain == best_gain && *id < best_id)
                }
            };
            if better {
                best = Some((gain, *id, idx));
            }
        }
        match best {
            Some((_, id, idx)) => {
                chosen.push(id);
                uncovered.subtract(&instance.sets[idx].1);
            }
            None => {
                return Err(CoverError::Infeasible {
                    residual: uncovered,
                });
            }
        }
    }
    Ok(CoverResult {
        chosen,
        elapsed: start.elapsed(),
    })
}

/// Exact minimum cover by exhaustive search, usable up to
/// [`EXACT_SET_LIMIT`] sets. Subsets are enumerated by size and, within a
/// size, in lexicographic order of the seed-id list, so the returned cover is
/// the canonically smallest one.
pub fn exact_min_cover(instance: &CoverInstance) -> Result<CoverResult, CoverError> {
    let start = Instant::now();
    let m = instance.sets.len();
    if m > EXACT_SET_LIMIT {
        return Err(CoverError::TooManySets {
            count: m,
            limit: EXACT_SET_LIMIT,
        });
    }

    // Positions ordered by seed id, so lexicographic combinations of
    // positions enumerate id lists in lexicographic order.
    let mut positions: Vec<usize> = (0..m).collect();
    positions.sort_by_key(|&p| instance.sets[p].0);

    for size in 0..=m {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let mut union = FeatureBitmap::new(instance.universe.width());
            for &c in &combo {
                union.union_with(&instance.sets[positions[c]].1);
            }
            if instance.universe.is_subset_of(&union) {
                let chosen = combo
                    .iter()
                    .map(|&c| instance.sets[positions[c]].0)
                    .collect();
                return Ok(CoverResult {
                    chosen,
                    elapsed: start.elapsed(),
                });
            }
            if !next_combination(&mut combo, m) {
                break;
            }
        }
    }

    // Even the union of everything misses part of the universe.
    let mut residual = instance.universe.clone();
    for (_, set) in &instance.sets {
        residual.subtract(set);
    }
    Err(CoverError::Infeasible { residual })
}

/// Advances `combo` to the next size-k combination of `0..m` in lexicographic
/// order. Returns false when exhausted.
fn next_combination(combo: &mut [usize], m: usize) -> bool {
    let k = combo.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < m - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Union of the chosen sets, for completeness checks.
pub fn union_of(instance: &CoverInstance, chosen: &[SeedId]) -> FeatureBitmap {
    let mut union = FeatureBitmap::new(instance.universe().width());
    for id in chosen {
        let (_, set) = instance
            .sets
            .iter()
            .find(|(sid, _)| sid == id)
            .expect("chosen id comes from the instance");
        union.union_with(set);
    }
    union
}
