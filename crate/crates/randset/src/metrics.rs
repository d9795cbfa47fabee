//! Per-round campaign observations and the derived evaluation quantities:
//! subset ratio, total unique seeds, selection-frequency CDF, and the
//! fraction of campaign time spent on reduction.
//!
//! Timers use the monotonic clock. Everything built on them is reported as a
//! ratio, never as an absolute duration, so results are comparable across
//! machines.

use std::collections::BTreeMap;
use std::time::Duration;

use crate::bitmap::{EdgeBitmap, NodeBitmap};
use crate::corpus::{FeatureMode, SeedId};
use crate::scheduler::Strategy;

/// One scheduling round as recorded by the campaign loop.
#[derive(Debug, Clone)]
pub struct RoundLog {
    pub round: usize,
    pub selected: SeedId,
    /// The subset the selection was made from (cover result, favored set, or
    /// the whole corpus for full-corpus strategies).
    pub subset: Vec<SeedId>,
    pub subset_size: usize,
    /// Corpus size at selection time.
    pub corpus_size: usize,
    pub reduction_time: Duration,
    pub round_time: Duration,
    /// Global edge coverage after the round's mutants ran.
    pub edges_covered: usize,
}

/// Full record of one campaign.
#[derive(Debug, Clone)]
pub struct CampaignStats {
    pub strategy: Strategy,
    pub feature_mode: FeatureMode,
    pub rounds: Vec<RoundLog>,
    pub final_nodes: NodeBitmap,
    pub final_edges: EdgeBitmap,
    pub final_corpus_size: usize,
}

/// One point of the selection-frequency CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfPoint {
    /// 1-based rank after sorting by descending frequency.
    pub rank: usize,
    pub seed_id: SeedId,
    pub frequency: usize,
    /// Cumulative fraction of all selections, nondecreasing, ending at 1.0.
    pub cumulative: f64,
}

impl CampaignStats {
    /// Last subset size over last corpus size, in percent.
    pub fn subset_ratio(&self) -> f64 {
        let last = self.rounds.last().expect("campaigns run at least one round");
        100.0 * last.subset_size as f64 / last.corpus_size as f64
    }

    /// Number of distinct seed ids ever selected for mutation.
    pub fn unique_seeds(&self) -> usize {
        let mut seen: Vec<u32> = self.rounds.iter().map(|r| r.selected.0).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Selection frequencies sorted descending (ties by ascending seed id),
    /// with cumulative fractions.
    pub fn selection_cdf(&self) -> Vec<CdfPoint> {
        let mut counts: BTreeMap<SeedId, usize> = BTreeMap::new();
        for r in &self.rounds {
            *counts.entry(r.selected).or_insert(0) += 1;
        }
        let mut entries: Vec<(SeedId, usize)> = counts.into_iter().collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let total: usize = entries.iter().map(|(_, f)| f).sum();
        let mut running = 0usize;
        entries
            .into_iter()
            .enumerate()
            .map(|(i, (seed_id, frequency))| {
                running += frequency;
                CdfPoint {
                    rank: i + 1,
                    seed_id,
                    frequency,
                    cumulative: running as f64 / total as f64,
                }
            })
            .collect()
    }

    /// Share of total round time spent constructing subsets, in percent.
    pub fn overhead_fraction(&self) -> f64 {
        let reduction: f64 = self.rounds.iter().map(|r| r.reduction_time.as_secs_f64()).sum();
        let total: f64 = self.rounds.iter().map(|r| r.round_time.as_secs_f64()).sum();
        if total == 0.0 {
            return 0.0;
        }
        100.0 * reduction / total
    }

    /// `round,selected_id,subset_size,corpus_size,reduction_us,round_us`
    pub fn rounds_csv(&self) -> String {
        let mut out = String::from("round,selected_id,subset_size,corpus_size,reduction_us,round_us\n");
        for r in &self.rounds {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.round,
                r.selected,
                r.subset_size,
                r.corpus_size,
                r.reduction_time.as_micros(),
                r.round_time.as_micros()
            ));
        }
        out
    }

    /// `rank,seed_id,frequency,cumulative`
    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("rank,seed_id,frequency,cumulative\n");
        for p in self.selection_cdf() {
            out.push_str(&format!(
                "{},{},{},{:.6}\n",
                p.rank, p.seed_id, p.frequency, p.cumulative
            ));
        }
        out
    }

    /// `strategy,feature_mode,final_edges,subset_ratio_pct,unique_seeds,overhead_pct`
    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("strategy,feature_mode,final_edges,subset_ratio_pct,unique_seeds,overhead_pct\n");
        out.push_str(&self.summary_row());
        out
    }

    /// One summary row without the header, for multi-strategy reports.
    pub fn summary_row(&self) -> String {
        format!(
            "{},{},{},{:.4},{},{:.4}\n",
            self.strategy.name(),
            self.feature_mode.name(),
            self.final_edges.count_ones(),
            self.subset_ratio(),
            self.unique_seeds(),
            self.overhead_fraction()
        )
    }
}

/// True when `a` lies weakly below `b` at every rank. Ranks past the end of a
/// curve count as complete (cumulative 1.0).
pub fn cdf_dominates(a: &[CdfPoint], b: &[CdfPoint]) -> bool {
    let len = a.len().max(b.len());
    let at = |cdf: &[CdfPoint], rank: usize| cdf.get(rank).map_or(1.0, |p| p.cumulative);
    (0..len).all(|rank| at(a, rank) <= at(b, rank) + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats_with(rounds: Vec<RoundLog>) -> CampaignStats {
        CampaignStats {
            strategy: Strategy::RandSet,
            feature_mode: FeatureMode::Edge,
            rounds,
            final_nodes: NodeBitmap::new(1),
            final_edges: EdgeBitmap::new(1),
            final_corpus_size: 0,
        }
    }

    fn round(
        round: usize,
        selected: u32,
        subset_size: usize,
        corpus_size: usize,
        reduction_us: u64,
        round_us: u64,
    ) -> RoundLog {
        RoundLog {
            round,
            selected: SeedId(selected),
            subset: Vec::new(),
            subset_size,
            corpus_size,
            reduction_time: Duration::from_micros(reduction_us),
            round_time: Duration::from_micros(round_us),
            edges_covered: 0,
        }
    }

    #[test]
    fn subset_ratio_arithmetic() {
        let stats = stats_with(vec![round(1, 0, 3, 6, 0, 1)]);
        assert_eq!(stats.subset_ratio(), 50.0);
        let stats = stats_with(vec![round(1, 0, 6, 6, 0, 1)]);
        assert_eq!(stats.subset_ratio(), 100.0);
    }

    #[test]
    fn unique_seeds_counts_distinct_ids() {
        let stats = stats_with(vec![
            round(1, 0, 1, 1, 0, 1),
            round(2, 0, 1, 1, 0, 1),
            round(3, 0, 1, 1, 0, 1),
        ]);
        assert_eq!(stats.unique_seeds(), 1);

        let stats = stats_with(vec![
            round(1, 0, 1, 3, 0, 1),
            round(2, 1, 1, 3, 0, 1),
            round(3, 0, 1, 3, 0, 1),
            round(4, 2, 1, 3, 0, 1),
        ]);
        assert_eq!(stats.unique_seeds(), 3);
    }

    #[test]
    fn cdf_from_known_frequencies() {
        // Selections: seed 7 five times, seed 2 three times, seed 9 twice.
        let mut rounds = Vec::new();
        let picks = [7u32, 7, 2, 9, 7, 2, 7, 9, 2, 7];
        for (i, &s) in picks.iter().enumerate() {
            rounds.push(round(i + 1, s, 1, 3, 0, 1));
        }
        let cdf = stats_with(rounds).selection_cdf();
        assert_eq!(cdf.len(), 3);
        assert_eq!((cdf[0].rank, cdf[0].seed_id, cdf[0].frequency), (1, SeedId(7), 5));
        assert!((cdf[0].cumulative - 0.5).abs() < 1e-12);
        assert_eq!((cdf[1].rank, cdf[1].frequency), (2, 3));
        assert!((cdf[1].cumulative - 0.8).abs() < 1e-12);
        assert_eq!((cdf[2].rank, cdf[2].frequency), (3, 2));
        assert!((cdf[2].cumulative - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_uniform_is_a_straight_line() {
        let k = 8;
        let rounds: Vec<RoundLog> = (0..k)
            .map(|i| round(i + 1, i as u32, 1, k, 0, 1))
            .collect();
        let cdf = stats_with(rounds).selection_cdf();
        for (i, p) in cdf.iter().enumerate() {
            let expected = (i + 1) as f64 / k as f64;
            assert!((p.cumulative - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_is_a_valid_distribution() {
        let picks = [0u32, 1, 1, 2, 2, 2, 3, 0, 1, 2, 5, 5];
        let rounds: Vec<RoundLog> = picks
            .iter()
            .enumerate()
            .map(|(i, &s)| round(i + 1, s, 1, 6, 0, 1))
            .collect();
        let cdf = stats_with(rounds).selection_cdf();
        for w in cdf.windows(2) {
            assert!(w[1].cumulative >= w[0].cumulative);
            assert!(w[0].frequency >= w[1].frequency);
        }
        assert!((cdf.last().unwrap().cumulative - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overhead_extremes() {
        let stats = stats_with(vec![round(1, 0, 1, 1, 0, 100), round(2, 0, 1, 1, 0, 50)]);
        assert_eq!(stats.overhead_fraction(), 0.0);
        let stats = stats_with(vec![round(1, 0, 1, 1, 80, 80), round(2, 0, 1, 1, 20, 20)]);
        assert!((stats.overhead_fraction() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn dominance_handles_unequal_lengths() {
        let a = vec![
            CdfPoint { rank: 1, seed_id: SeedId(0), frequency: 1, cumulative: 0.25 },
            CdfPoint { rank: 2, seed_id: SeedId(1), frequency: 1, cumulative: 0.5 },
            CdfPoint { rank: 3, seed_id: SeedId(2), frequency: 1, cumulative: 0.75 },
            CdfPoint { rank: 4, seed_id: SeedId(3), frequency: 1, cumulative: 1.0 },
        ];
        let b = vec![CdfPoint { rank: 1, seed_id: SeedId(0), frequency: 4, cumulative: 1.0 }];
        assert!(cdf_dominates(&a, &b));
        assert!(!cdf_dominates(&b, &a));
    }

    #[test]
    fn csv_headers_match_schema() {
        let stats = stats_with(vec![round(1, 4, 2, 8, 10, 40)]);
        assert!(stats
            .rounds_csv()
            .starts_with("round,selected_id,subset_size,corpus_size,reduction_us,round_us\n"));
        assert!(stats
            .cdf_csv()
            .starts_with("rank,seed_id,frequency,cumulative\n"));
        assert!(stats.summary_csv().starts_with(
            "strategy,feature_mode,final_edges,subset_ratio_pct,unique_seeds,overhead_pct\n"
        ));
        assert_eq!(stats.rounds_csv().lines().nth(1).unwrap(), "1,4,2,8,10,40");
    }
}
