//! Directed control-flow graphs for synthetic targets.
//!
//! A graph is a dense set of nodes with node 0 as the entry, an ordered edge
//! list (edge ids follow list order), and per-node branch thresholds that
//! partition byte values `[0, 255]` into child choices. Graphs are immutable
//! after construction and safe to share across threads.

use crate::bitmap::NodeBitmap;
use crate::rng::{DetRng, Purpose};

/// Dense node index; node 0 is always the entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

/// Dense edge index, assigned in edge-list order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("edge ({src}, {dst}) references node {bad} but node_count is {node_count}")]
    DanglingNode {
        src: u32,
        dst: u32,
        bad: u32,
        node_count: usize,
    },
    #[error("duplicate edge ({src}, {dst})")]
    DuplicateEdge { src: u32, dst: u32 },
    #[error("branch rule references node {node} but node_count is {node_count}")]
    BranchNodeOutOfRange { node: u32, node_count: usize },
    #[error("node {node} has {children} children but {thresholds} thresholds; expected {expected}")]
    ThresholdCount {
        node: u32,
        children: usize,
        thresholds: usize,
        expected: usize,
    },
    #[error("thresholds for node {node} are not strictly increasing")]
    ThresholdOrder { node: u32 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Structured description of a graph, as produced by the parser or a
/// generator. Validated into a [`Cfg`] by [`build_cfg`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CfgSpec {
    pub node_count: usize,
    /// `(src, dst)` pairs; edge ids are assigned in this order.
    pub edges: Vec<(u32, u32)>,
    /// `(node, thresholds)` pairs for branching nodes.
    pub branches: Vec<(u32, Vec<u8>)>,
}

/// A validated control-flow graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    node_count: usize,
    edges: Vec<(NodeId, NodeId)>,
    /// Outgoing `(child, edge)` pairs per node, in edge-list order.
    children: Vec<Vec<(NodeId, EdgeId)>>,
    /// Branch thresholds per node; empty for nodes with fewer than 2 children.
    thresholds: Vec<Vec<u8>>,
}

/// Validates a [`CfgSpec`] and derives the adjacency structure.
pub fn build_cfg(spec: &CfgSpec) -> Result<Cfg, CfgError> {
    if spec.node_count == 0 {
        return Err(CfgError::EmptyGraph);
    }
    let n = spec.node_count;
    let mut children: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); n];
    let mut edges = Vec::with_capacity(spec.edges.len());

    for (i, &(src, dst)) in spec.edges.iter().enumerate() {
        let bad = if src as usize >= n {
            Some(src)
        } else if dst as usize >= n {
            Some(dst)
        } else {
            None
        };
        if let Some(bad) = bad {
            return Err(CfgError::DanglingNode {
                src,
                dst,
                bad,
                node_count: n,
            });
        }
        if children[src as usize].iter().any(|(c, _)| c.0 == dst) {
            return Err(CfgError::DuplicateEdge { src, dst });
        }
        let edge_id = EdgeId(i as u32);
        children[src as usize].push((NodeId(dst), edge_id));
        edges.push((NodeId(src), NodeId(dst)));
    }

    let mut thresholds: Vec<Vec<u8>> = vec![Vec::new(); n];
    for (node, ts) in &spec.branches {
        if *node as usize >= n {
            return Err(CfgError::BranchNodeOutOfRange {
                node: *node,
                node_count: n,
            });
        }
        thresholds[*node as usize] = ts.clone();
    }

    for node in 0..n {
        let k = children[node].len();
        let expected = k.saturating_sub(1);
        let got = thresholds[node].len();
        if got != expected {
            return Err(CfgError::ThresholdCount {
                node: node as u32,
                children: k,
                thresholds: got,
                expected,
            });
        }
        if !thresholds[node].windows(2).all(|w| w[0] < w[1]) {
            return Err(CfgError::ThresholdOrder { node: node as u32 });
        }
    }

    Ok(Cfg {
        node_count: n,
        edges,
        children,
        thresholds,
    })
}

impl Cfg {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn entry(&self) -> NodeId {
        NodeId(0)
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Outgoing `(child, edge)` pairs of `node`, in edge-list order.
    pub fn children(&self, node: NodeId) -> &[(NodeId, EdgeId)] {
        &self.children[node.index()]
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        self.children[node.index()].is_empty()
    }

    pub fn thresholds(&self, node: NodeId) -> &[u8] {
        &self.thresholds[node.index()]
    }

    /// Index of the child chosen by `byte` at a branching node: the number of
    /// thresholds less than or equal to the byte. Thresholds `t1 < ... < tk`
    /// partition bytes into `[0,t1), [t1,t2), ..., [tk,255]`.
    pub fn branch_choice(&self, node: NodeId, byte: u8) -> usize {
        self.thresholds[node.index()]
            .iter()
            .take_while(|&&t| byte >= t)
            .count()
    }
}

/// Computes the frontier of a visited set: every visited node with at least
/// one unvisited child. Leaves have no children and are never frontier.
pub fn frontier_nodes(cfg: &Cfg, visited: &NodeBitmap) -> NodeBitmap {
    assert_eq!(
        visited.width(),
        cfg.node_count(),
        "visited bitmap width {} does not match cfg node count {}",
        visited.width(),
        cfg.node_count()
    );
    let mut frontier = NodeBitmap::new(cfg.node_count());
    for node in visited.iter_ones() {
        let has_unvisited_child = cfg.children[node]
            .iter()
            .any(|(child, _)| !visited.get(child.index()));
        if has_unvisited_child {
            frontier.set(node);
        }
    }
    frontier
}

/// Generates a random graph that is connected from the entry node. The same
/// arguments always produce the same graph.
///
/// Nodes `1..n` are attached to an earlier node with spare child capacity,
/// which guarantees reachability from the entry. Each node then gains one
/// loop-back edge to an earlier-or-equal node with probability
/// `loop_back_prob`. Branch thresholds are drawn so that every child is
/// reachable by some byte value.
pub fn generate_random_cfg(
    node_count: usize,
    max_children: usize,
    loop_back_prob: f64,
    rng_seed: u64,
) -> Cfg {
    assert!(node_count >= 1, "node_count must be at least 1");
    assert!(
        (1..=256).contains(&max_children),
        "max_children must be in 1..=256"
    );
    let mut rng = DetRng::for_purpose(rng_seed, Purpose::Generation);
    let mut child_count = vec![0usize; node_count];
    let mut edges: Vec<(u32, u32)> = Vec::new();

    for node in 1..node_count {
        let candidates: Vec<usize> = (0..node)
            .filter(|&p| child_count[p] < max_children)
            .collect();
        // Capacity of the first `node` nodes exceeds the edges used so far,
        // so there is always a candidate.
        let parent = candidates[rng.below(candidates.len() as u64) as usize];
        edges.push((parent as u32, node as u32));
        child_count[parent] += 1;
    }

    #[allow(clippy::needless_range_loop)]
    for node in 1..node_count {
        if child_count[node] < max_children && rng.chance(loop_back_prob) {
            let target = rng.below(node as u64 + 1) as u32;
            let exists = edges
                .iter()
                .any(|&(s, d)| s == node as u32 && d == target);
            if !exists {
                edges.push((node as u32, target));
                child_count[node] += 1;
            }
        }
    }

    let mut branches = Vec::new();
    for (node, &k) in child_count.iter().enumerate() {
        if k > 1 {
            branches.push((node as u32, draw_thresholds(k - 1, &mut rng)));
        }
    }

    let spec = CfgSpec {
        node_count,
        edges,
        branches,
    };
    build_cfg(&spec).expect("generated spec is structurally valid")
}

/// Draws `count` distinct thresholds from `1..=255`, sorted ascending. Zero is
/// excluded so that the first branch bucket is never empty.
fn draw_thresholds(count: usize, rng: &mut DetRng) -> Vec<u8> {
    debug_assert!(count <= 255);
    let mut picked: Vec<u8> = Vec::with_capacity(count);
    while picked.len() < count {
        let t = 1 + rng.below(255) as u8;
        if !picked.contains(&t) {
            picked.push(t);
        }
    }
    picked.sort_unstable();
    picked
}

/// Renders a graph in the line-oriented text format:
///
/// ```text
/// cfg <node_count>
/// edge <src> <dst>
/// branch <node> <t1> <t2> ...
/// ```
pub fn serialize_cfg(cfg: &Cfg) -> String {
    let mut out = String::new();
    out.push_str(&format!("cfg {}\n", cfg.node_count));
    for &(src, dst) in &cfg.edges {
        out.push_str(&format!("edge {} {}\n", src.0, dst.0));
    }
    for node in 0..cfg.node_count {
        let ts = &cfg.thresholds[node];
        if !ts.is_empty() {
            out.push_str(&format!("branch {node}"));
            for t in ts {
                out.push_str(&format!(" {t}"));
            }
            out.push('\n');
        }
    }
    out
}

/// Parses the text format accepted by [`serialize_cfg`]. Blank lines and
/// lines starting with `#` are ignored; edge ids follow edge-line order.
pub fn parse_cfg(text: &str) -> Result<Cfg, CfgError> {
    let mut node_count: Option<usize> = None;
    let mut spec = CfgSpec::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("trimmed line is nonempty");
        let parse_err = |reason: &str| CfgError::Parse {
            line: line_no,
            reason: reason.to_string(),
        };
        match keyword {
            "cfg" => {
                if node_count.is_some() {
                    return Err(parse_err("duplicate cfg header"));
                }
                let n: usize = tokens
                    .next()
                    .ok_or_else(|| parse_err("missing node count"))?
                    .parse()
                    .map_err(|_| parse_err("invalid node count"))?;
                if tokens.next().is_some() {
                    return Err(parse_err("trailing tokens after node count"));
                }
                node_count = Some(n);
            }
            "edge" => {
                if node_count.is_none() {
                    return Err(parse_err("edge before cfg header"));
                }
                let src: u32 = tokens
                    .next()
                    .ok_or_else(|| parse_err("missing edge source"))?
                    .parse()
                    .map_err(|_| parse_err("invalid edge source"))?;
                let dst: u32 = tokens
                    .next()
                    .ok_or_else(|| parse_err("missing edge destination"))?
                    .parse()
                    .map_err(|_| parse_err("invalid edge destination"))?;
                if tokens.next().is_some() {
                    return Err(parse_err("trailing tokens after edge"));
                }
                spec.edges.push((src, dst));
            }
            "branch" => {
                if node_count.is_none() {
                    return Err(parse_err("branch before cfg header"));
                }
                let node: u32 = tokens
                    .next()
                    .ok_or_else(|| parse_err("missing branch node"))?
                    .parse()
                    .map_err(|_| parse_err("invalid branch node"))?;
                let mut ts = Vec::new();
                for tok in tokens {
                    let t: u8 = tok
                        .parse()
                        .map_err(|_| parse_err("invalid branch threshold"))?;
                    ts.push(t);
                }
                if ts.is_empty() {
                    return Err(parse_err("branch line without thresholds"));
                }
                if spec.branches.iter().any(|(n, _)| *n == node) {
                    return Err(parse_err("duplicate branch line for node"));
                }
                spec.branches.push((node, ts));
            }
            other => {
                return Err(parse_err(&format!("unknown keyword `{other}`")));
            }
        }
    }

    spec.node_count = node_count.ok_or(CfgError::Parse {
        line: 0,
        reason: "missing cfg header".to_string(),
    })?;
    build_cfg(&spec)
}
