//! Seed store, global coverage state, and feature-set extraction.
//!
//! The corpus grows monotonically: seeds are appended, never evicted. A seed
//! is saved by the campaign policy when it triggers edges not yet in the
//! global coverage; imports and initial seeds are appended unconditionally so
//! redundant corpora stay redundant. Feature sets are computed on demand:
//! edge mode returns the stored edge bitmap, frontier mode intersects the
//! stored node bitmap with the frontier supplied by the caller, which changes
//! as coverage grows.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::bitmap::{EdgeBitmap, FeatureBitmap, NodeBitmap};
use crate::cfg::{frontier_nodes, Cfg};
use crate::setcover::CoverInstance;
use crate::target::{execute, Trace};

/// Dense seed index in creation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeedId(pub u32);

impl SeedId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for SeedId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Feature family used for corpus reduction. The seed-saving policy always
/// uses new edges; this only governs the cover instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Visited nodes with at least one unvisited child.
    Frontier,
    /// Raw edge coverage.
    Edge,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Frontier => "frontier",
            FeatureMode::Edge => "edge",
        }
    }
}

/// A saved input and the coverage it produced.
#[derive(Debug, Clone)]
pub struct SeedRecord {
    pub id: SeedId,
    pub bytes: Vec<u8>,
    pub nodes: NodeBitmap,
    pub edges: EdgeBitmap,
    /// Abstract execution cost (trace steps).
    pub cost: u64,
    pub length: usize,
    /// Scheduling round in which the seed was discovered; 0 for imports.
    pub discovery_round: usize,
    /// Whether a cull-queue pass has already handed this seed out.
    pub fuzzed_before: bool,
}

impl SeedRecord {
    /// The feature set used by cover construction: stored edges in edge
    /// mode, stored nodes intersected with the current frontier otherwise.
    pub fn feature_set(&self, mode: FeatureMode, current_frontier: &NodeBitmap) -> FeatureBitmap {
        match mode {
            FeatureMode::Edge => self.edges.clone(),
            FeatureMode::Frontier => {
                let mut features = self.nodes.clone();
                features.intersect_with(current_frontier);
                features
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusIoError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("unexpected file name `{name}` (expected id_<n>.bin)")]
    BadSeedFileName { name: String },
}

/// Append-only seed store plus global coverage state.
#[derive(Debug, Clone)]
pub struct Corpus {
    cfg: Arc<Cfg>,
    seeds: Vec<SeedRecord>,
    global_nodes: NodeBitmap,
    global_edges: EdgeBitmap,
}

impl Corpus {
    pub fn new(cfg: Arc<Cfg>) -> Self {
        let global_nodes = NodeBitmap::new(cfg.node_count());
        let global_edges = EdgeBitmap::new(cfg.edge_count());
        Corpus {
            cfg,
            seeds: Vec::new(),
            global_nodes,
            global_edges,
        }
    }

    pub fn cfg(&self) -> &Cfg {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn seeds(&self) -> &[SeedRecord] {
        &self.seeds
    }

    pub fn get(&self, id: SeedId) -> &SeedRecord {
        &self.seeds[id.index()]
    }

    pub fn get_mut(&mut self, id: SeedId) -> &mut SeedRecord {
        &mut self.seeds[id.index()]
    }

    pub fn global_nodes(&self) -> &NodeBitmap {
        &self.global_nodes
    }

    pub fn global_edges(&self) -> &EdgeBitmap {
        &self.global_edges
    }

    pub fn seed_ids(&self) -> impl Iterator<Item = SeedId> + '_ {
        (0..self.seeds.len()).map(|i| SeedId(i as u32))
    }

    /// Appends a seed unconditionally (imports and initial seeds) and folds
    /// its coverage into the global bitmaps.
    pub fn insert_seed(&mut self, input: &[u8], trace: &Trace, round: usize) -> SeedId {
        assert_eq!(
            trace.nodes.width(),
            self.global_nodes.width(),
            "trace node bitmap width mismatch"
        );
        assert_eq!(
            trace.edges.width(),
            self.global_edges.width(),
            "trace edge bitmap width mismatch"
        );
        let id = SeedId(self.seeds.len() as u32);
        self.global_nodes.union_with(&trace.nodes);
        self.global_edges.union_with(&trace.edges);
        self.seeds.push(SeedRecord {
            id,
            bytes: input.to_vec(),
            nodes: trace.nodes.clone(),
            edges: trace.edges.clone(),
            cost: trace.cost,
            length: input.len(),
            discovery_round: round,
            fuzzed_before: false,
        });
        id
    }

    /// Campaign saving policy: the seed is kept only if its trace covers at
    /// least one edge outside the global coverage.
    pub fn maybe_save(&mut self, input: &[u8], trace: &Trace, round: usize) -> Option<SeedId> {
        assert_eq!(
            trace.edges.width(),
            self.global_edges.width(),
            "trace edge bitmap width mismatch"
        );
        if trace.edges.is_subset_of(&self.global_edges) {
            return None;
        }
        Some(self.insert_seed(input, trace, round))
    }

    /// Frontier of the global visited-node set.
    pub fn current_frontier(&self) -> NodeBitmap {
        frontier_nodes(&self.cfg, &self.global_nodes)
    }

    /// Feature universe under the given mode: global edges, or the frontier
    /// of the global visited nodes.
    pub fn universe(&self, mode: FeatureMode) -> FeatureBitmap {
        match mode {
            FeatureMode::Edge => self.global_edges.clone(),
            FeatureMode::Frontier => self.current_frontier(),
        }
    }

    /// Snapshots the corpus into a cover instance. The frontier is computed
    /// once and every seed's feature set is taken against it.
    pub fn cover_instance(&self, mode: FeatureMode) -> CoverInstance {
        let universe = self.universe(mode);
        let frontier = match mode {
            FeatureMode::Frontier => self.current_frontier(),
            FeatureMode::Edge => NodeBitmap::new(self.cfg.node_count()),
        };
        let sets = self
            .seeds
            .iter()
            .map(|seed| (seed.id, seed.feature_set(mode, &frontier)))
            .collect();
        CoverInstance::new(universe, sets).expect("corpus feature sets share one width")
    }

    /// Writes one `id_<n>.bin` file per seed.
    pub fn export_dir(&self, dir: &Path) -> Result<(), CorpusIoError> {
        fs::create_dir_all(dir).map_err(|source| CorpusIoError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for seed in &self.seeds {
            let path = dir.join(format!("id_{}.bin", seed.id.0));
            fs::write(&path, &seed.bytes).map_err(|source| CorpusIoError::Io {
                path: path.display().to_string(),
                source,
            })?;
        }
        Ok(())
    }

    /// Reads an exported corpus directory, re-executing every file to
    /// recompute coverage. Files are appended in ascending `<n>` order and
    /// ids are reassigned densely.
    pub fn import_dir(
        cfg: Arc<Cfg>,
        dir: &Path,
        max_steps: usize,
    ) -> Result<Corpus, CorpusIoError> {
        let mut entries: Vec<(u64, std::path::PathBuf)> = Vec::new();
        let read_dir = fs::read_dir(dir).map_err(|source| CorpusIoError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for entry in read_dir {
            let entry = entry.map_err(|source| CorpusIoError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            if !entry.path().is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            // Sidecar files (manifests, notes) are tolerated; anything that
            // claims to be a seed must follow the naming scheme.
            if !name.ends_with(".bin") {
                continue;
            }
            let number = name
                .strip_prefix("id_")
                .and_then(|rest| rest.strip_suffix(".bin"))
                .and_then(|digits| digits.parse::<u64>().ok())
                .ok_or(CorpusIoError::BadSeedFileName { name: name.clone() })?;
            entries.push((number, entry.path()));
        }
        entries.sort_by_key(|(n, _)| *n);

        let mut corpus = Corpus::new(cfg.clone());
        for (_, path) in entries {
            let bytes = fs::read(&path).map_err(|source| CorpusIoError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let trace = execute(&cfg, &bytes, max_steps);
            corpus.insert_seed(&bytes, &trace, 0);
        }
        Ok(corpus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::{build_cfg, generate_random_cfg, CfgSpec};
    use crate::target::DEFAULT_MAX_STEPS;

    fn two_branch_cfg() -> Arc<Cfg> {
        Arc::new(
            build_cfg(&CfgSpec {
                node_count: 3,
                edges: vec![(0, 1), (0, 2)],
                branches: vec![(0, vec![128])],
            })
            .unwrap(),
        )
    }

    fn save(corpus: &mut Corpus, input: &[u8], round: usize) -> Option<SeedId> {
        let trace = execute(corpus.cfg(), input, DEFAULT_MAX_STEPS);
        corpus.maybe_save(input, &trace, round)
    }

    #[test]
    fn first_execution_is_saved_with_id_zero() {
        let mut corpus = Corpus::new(two_branch_cfg());
        assert_eq!(save(&mut corpus, &[0x00], 0), Some(SeedId(0)));
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn replaying_a_saved_seed_is_not_saved() {
        let mut corpus = Corpus::new(two_branch_cfg());
        save(&mut corpus, &[0x00], 0).unwrap();
        assert_eq!(save(&mut corpus, &[0x00], 1), None);
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn one_new_edge_grows_global_by_exactly_that_edge() {
        // Flipping the branch byte covers edge 1 instead of edge 0.
        let mut corpus = Corpus::new(two_branch_cfg());
        save(&mut corpus, &[0x00], 0).unwrap();
        let before = corpus.global_edges().clone();
        let id = save(&mut corpus, &[0xFF], 1).expect("new edge saves the seed");
        let mut gained = corpus.global_edges().clone();
        gained.subtract(&before);
        assert_eq!(gained.iter_ones().collect::<Vec<_>>(), vec![1]);
        assert_eq!(corpus.get(id).discovery_round, 1);
    }

    #[test]
    fn feature_set_edge_mode_is_stored_edges() {
        let mut corpus = Corpus::new(two_branch_cfg());
        let id = save(&mut corpus, &[0x00], 0).unwrap();
        let seed = corpus.get(id);
        let frontier = corpus.current_frontier();
        assert_eq!(seed.feature_set(FeatureMode::Edge, &frontier), seed.edges);
    }

    #[test]
    fn feature_set_empty_frontier_is_empty() {
        let mut corpus = Corpus::new(two_branch_cfg());
        let id = save(&mut corpus, &[0x00], 0).unwrap();
        let empty = NodeBitmap::new(3);
        assert!(corpus
            .get(id)
            .feature_set(FeatureMode::Frontier, &empty)
            .is_empty());
    }

    #[test]
    fn feature_set_chain_fixture() {
        // Chain 0 -> 1 -> 2: a seed visiting {0, 1} against frontier {1}
        // keeps exactly {1}.
        let cfg = Arc::new(
            build_cfg(&CfgSpec {
                node_count: 3,
                edges: vec![(0, 1), (1, 2)],
                branches: vec![],
            })
            .unwrap(),
        );
        let seed = SeedRecord {
            id: SeedId(0),
            bytes: vec![],
            nodes: NodeBitmap::from_indices(3, &[0, 1]),
            edges: EdgeBitmap::from_indices(2, &[0]),
            cost: 1,
            length: 0,
            discovery_round: 0,
            fuzzed_before: false,
        };
        let frontier = frontier_nodes(&cfg, &seed.nodes);
        assert_eq!(frontier.iter_ones().collect::<Vec<_>>(), vec![1]);
        let features = seed.feature_set(FeatureMode::Frontier, &frontier);
        assert_eq!(features.iter_ones().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn empty_corpus_has_empty_universe() {
        let corpus = Corpus::new(two_branch_cfg());
        assert!(corpus.universe(FeatureMode::Edge).is_empty());
        assert!(corpus.universe(FeatureMode::Frontier).is_empty());
    }

    #[test]
    fn universe_equals_union_of_feature_sets() {
        let cfg = Arc::new(generate_random_cfg(30, 3, 0.2, 99));
        let mut corpus = Corpus::new(cfg.clone());
        for b in 0..40u8 {
            let input = [b, b.wrapping_mul(7), b.wrapping_add(100)];
            let trace = execute(&cfg, &input, DEFAULT_MAX_STEPS);
            corpus.maybe_save(&input, &trace, b as usize);
        }
        assert!(!corpus.is_empty());
        for mode in [FeatureMode::Edge, FeatureMode::Frontier] {
            let universe = corpus.universe(mode);
            let frontier = corpus.current_frontier();
            let mut union = FeatureBitmap::new(universe.width());
            for seed in corpus.seeds() {
                union.union_with(&seed.feature_set(mode, &frontier));
            }
            assert_eq!(union, universe, "mode {:?}", mode);
        }
    }

    #[test]
    fn four_feature_fixture_universe() {
        // Six seeds over a 4-way branch; the universe is exactly the four
        // child edges even though two seeds are redundant.
        let cfg = Arc::new(
            build_cfg(&CfgSpec {
                node_count: 5,
                edges: vec![(0, 1), (0, 2), (0, 3), (0, 4)],
                branches: vec![(0, vec![64, 128, 192])],
            })
            .unwrap(),
        );
        let mut corpus = Corpus::new(cfg.clone());
        for input in [[0u8], [64], [128], [192], [1], [65]] {
            let trace = execute(&cfg, &input, DEFAULT_MAX_STEPS);
            corpus.insert_seed(&input, &trace, 0);
        }
        assert_eq!(corpus.len(), 6);
        assert_eq!(corpus.universe(FeatureMode::Edge).count_ones(), 4);
    }

    #[test]
    fn global_bitmaps_equal_union_over_seeds() {
        let cfg = Arc::new(generate_random_cfg(25, 3, 0.3, 5));
        let mut corpus = Corpus::new(cfg.clone());
        for b in 0..30u8 {
            let input = [b, 255 - b];
            let trace = execute(&cfg, &input, DEFAULT_MAX_STEPS);
            corpus.insert_seed(&input, &trace, 0);
        }
        let mut nodes = NodeBitmap::new(cfg.node_count());
        let mut edges = EdgeBitmap::new(cfg.edge_count());
        for seed in corpus.seeds() {
            nodes.union_with(&seed.nodes);
            edges.union_with(&seed.edges);
        }
        assert_eq!(&nodes, corpus.global_nodes());
        assert_eq!(&edges, corpus.global_edges());
    }

    #[test]
    fn saturated_node_leaves_every_feature_set() {
        // Chain 0 -> 1 -> 2. After node 1's only child is visited, node 1
        // saturates and must vanish from all frontier feature sets.
        let cfg = Arc::new(
            build_cfg(&CfgSpec {
                node_count: 3,
                edges: vec![(0, 1), (1, 2)],
                branches: vec![],
            })
            .unwrap(),
        );
        let mut corpus = Corpus::new(cfg.clone());
        // max_steps = 1 stops the walk after one transition, covering only
        // nodes {0, 1}.
        let short = execute(&cfg, &[], 1);
        corpus.insert_seed(&[], &short, 0);
        let frontier = corpus.current_frontier();
        assert!(frontier.get(1));

        let full = execute(&cfg, &[], DEFAULT_MAX_STEPS);
        corpus.insert_seed(&[0x01], &full, 1);
        let frontier = corpus.current_frontier();
        assert!(!frontier.get(1));
        for seed in corpus.seeds() {
            assert!(!seed.feature_set(FeatureMode::Frontier, &frontier).get(1));
        }
    }

    #[test]
    fn export_import_round_trip() {
        let cfg = Arc::new(generate_random_cfg(20, 3, 0.1, 3));
        let mut corpus = Corpus::new(cfg.clone());
        for b in 0..10u8 {
            let input = vec![b; (b as usize % 4) + 1];
            let trace = execute(&cfg, &input, DEFAULT_MAX_STEPS);
            corpus.insert_seed(&input, &trace, 0);
        }
        let dir = tempfile::tempdir().unwrap();
        corpus.export_dir(dir.path()).unwrap();
        let imported = Corpus::import_dir(cfg, dir.path(), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(imported.len(), corpus.len());
        assert_eq!(imported.global_edges(), corpus.global_edges());
        for (a, b) in corpus.seeds().iter().zip(imported.seeds()) {
            assert_eq!(a.bytes, b.bytes);
            assert_eq!(a.edges, b.edges);
        }
    }

    #[test]
    fn import_rejects_misnamed_seed_files() {
        let cfg = two_branch_cfg();
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("stray.bin"), b"x").unwrap();
        let err = Corpus::import_dir(cfg, dir.path(), DEFAULT_MAX_STEPS).unwrap_err();
        assert!(matches!(err, CorpusIoError::BadSeedFileName { .. }));
    }

    #[test]
    fn import_ignores_sidecar_files() {
        let cfg = two_branch_cfg();
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("id_0.bin"), [0u8]).unwrap();
        fs::write(dir.path().join("manifest.json"), b"{}").unwrap();
        let corpus = Corpus::import_dir(cfg, dir.path(), DEFAULT_MAX_STEPS).unwrap();
        assert_eq!(corpus.len(), 1);
    }
}
