//! Deterministic synthetic target: executes an input byte string over a CFG
//! and reports the nodes and edges it touched.

use crate::bitmap::{EdgeBitmap, NodeBitmap};
use crate::cfg::Cfg;

/// Default transition budget; bounds loops in cyclic graphs.
pub const DEFAULT_MAX_STEPS: usize = 4096;

/// Coverage of a single execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// Nodes touched: edge endpoints plus the entry node.
    pub nodes: NodeBitmap,
    /// Edges traversed.
    pub edges: EdgeBitmap,
    /// Transitions taken.
    pub steps: usize,
    /// Abstract execution cost; equals `steps`.
    pub cost: u64,
}

/// Walks the graph from the entry node, consuming one input byte per branch
/// decision. Missing bytes read as 0, so every input executes. Nodes with a
/// single child are followed without consuming a byte. The walk stops at a
/// leaf or after `max_steps` transitions.
pub fn execute(cfg: &Cfg, input: &[u8], max_steps: usize) -> Trace {
    assert!(max_steps >= 1, "max_steps must be at least 1");
    let mut nodes = NodeBitmap::new(cfg.node_count());
    let mut edges = EdgeBitmap::new(cfg.edge_count());

    let mut current = cfg.entry();
    nodes.set(current.index());
    let mut cursor = 0usize;
    let mut steps = 0usize;

    loop {
        let children = cfg.children(current);
        if children.is_empty() || steps == max_steps {
            break;
        }
        let (next, edge) = if children.len() == 1 {
            children[0]
        } else {
            let byte = input.get(cursor).copied().unwrap_or(0);
            cursor += 1;
            children[cfg.branch_choice(current, byte)]
        };
        edges.set(edge.index());
        nodes.set(next.index());
        current = next;
        steps += 1;
    }

    Trace {
        nodes,
        edges,
        steps,
        cost: steps as u64,
    }
}
