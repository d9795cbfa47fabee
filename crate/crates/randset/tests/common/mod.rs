//! Shared fixtures for the integration suites.

use std::sync::Arc;

use randset::{build_cfg, Cfg, CfgSpec};

/// A 4-node chain: every execution covers all three edges, so any corpus on
/// it is fully redundant and coverage plateaus immediately.
pub fn plateau_cfg() -> Arc<Cfg> {
    Arc::new(
        build_cfg(&CfgSpec {
            node_count: 4,
            edges: vec![(0, 1), (1, 2), (2, 3)],
            branches: vec![],
        })
        .unwrap(),
    )
}

/// Thirty seeds with varying bytes and lengths but identical (full) coverage
/// of the plateau chain.
pub fn plateau_seeds() -> Vec<Vec<u8>> {
    (0..30u8).map(|i| vec![i; 1 + (i as usize % 7)]).collect()
}

/// Five behavior classes: the entry fans out to five branch nodes, each with
/// two children of which seeds only ever visit the first. Each class leaves
/// its branch node on the frontier, giving five disjoint singleton frontier
/// feature sets.
pub fn five_class_cfg() -> Arc<Cfg> {
    let mut edges = vec![(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)];
    for i in 1..=5u32 {
        edges.push((i, 2 * i + 4));
        edges.push((i, 2 * i + 5));
    }
    let mut branches = vec![(0u32, vec![51u8, 102, 153, 204])];
    for i in 1..=5u32 {
        branches.push((i, vec![128]));
    }
    Arc::new(
        build_cfg(&CfgSpec {
            node_count: 16,
            edges,
            branches,
        })
        .unwrap(),
    )
}

/// Byte steering the entry branch into class `class` (0..5).
pub fn five_class_byte(class: usize) -> u8 {
    [0u8, 51, 102, 153, 204][class]
}

/// The duplicated corpus: 5 distinct feature classes, `copies` inputs each.
/// Trailing bytes differ per copy but are never read by the walk.
pub fn duplicated_seeds(copies: usize) -> Vec<Vec<u8>> {
    let mut seeds = Vec::with_capacity(5 * copies);
    for class in 0..5 {
        for copy in 0..copies {
            seeds.push(vec![five_class_byte(class), 0, copy as u8]);
        }
    }
    seeds
}
