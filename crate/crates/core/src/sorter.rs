//! The full sorter: tree-sorted blocks of length `k`, then three layers of
//! pattern-agnostic merging.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::merge::{merge_agnostic, MergeStats, MergeSummary, Run};
use crate::pattern::{keyed, Key};
use crate::treesort::{binary_insertion_sort, BlockSorter, TreeSortStats, MAX_BLOCK_LEN};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SorterConfig {
    /// Forces the block length instead of deriving it from `n`.
    pub k_override: Option<usize>,
    pub k_max: usize,
    /// Cap on tree advances. `None` allows one advance per full block, which
    /// keeps the cost of failed tree runs within that of the successful ones.
    pub tree_budget: Option<u64>,
    /// Inputs up to this length are sorted directly.
    pub small_n_cutoff: usize,
}

impl Default for SorterConfig {
    fn default() -> Self {
        SorterConfig {
            k_override: None,
            k_max: 3,
            tree_budget: None,
            small_n_cutoff: 64,
        }
    }
}

impl SorterConfig {
    pub fn validate(&self) -> Result<()> {
        let max = MAX_BLOCK_LEN as u128;
        if self.k_max == 0 || self.k_max > MAX_BLOCK_LEN {
            return Err(Error::OutOfRange {
                what: "k_max",
                value: self.k_max as u128,
                expected: format!("1..={max}"),
            });
        }
        if let Some(k) = self.k_override {
            if k == 0 || k > MAX_BLOCK_LEN {
                return Err(Error::OutOfRange {
                    what: "k_override",
                    value: k as u128,
                    expected: format!("1..={max}"),
                });
            }
        }
        if self.small_n_cutoff < 2 {
            return Err(Error::OutOfRange {
                what: "small_n_cutoff",
                value: self.small_n_cutoff as u128,
                expected: ">= 2".into(),
            });
        }
        Ok(())
    }
}

/// `log2` applied `t` times to `n`, each step clamped to at least 1.
pub fn iterated_log2(n: f64, t: u32) -> f64 {
    let mut x = n.max(1.0);
    for _ in 0..t {
        x = x.log2().max(1.0);
    }
    x
}

/// Ceiling of [`iterated_log2`], at least 1.
pub fn iterated_log(n: u64, t: u32) -> u64 {
    if t == 0 {
        return n.max(1);
    }
    // Exact for powers of two, where f64 rounding would otherwise matter.
    let x = iterated_log2(n as f64, t);
    let r = x.round();
    let v = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (v as u64).max(1)
}

/// Block length and layer tuple sizes for an input of length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SortPlan {
    pub k: usize,
    pub t1: usize,
    pub t2: usize,
}

pub fn plan(n: usize, cfg: &SorterConfig) -> SortPlan {
    let nf = n as f64;
    let l1 = iterated_log2(nf, 1);
    let l2 = iterated_log2(nf, 2);
    let l3 = iterated_log2(nf, 3);
    let k = cfg
        .k_override
        .unwrap_or_else(|| (iterated_log(n as u64, 3) as usize).min(cfg.k_max));
    let t1 = ((l2 / l3).ceil() as usize).max(2);
    let t2 = ((l1 / l2).ceil() as usize).max(2);
    SortPlan { k, t1, t2 }
}

/// One merge layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerReport {
    /// Runs per group; `None` for the final layer, which merges everything.
    pub tuple_size: Option<usize>,
    pub runs_in: usize,
    pub runs_out: usize,
    pub comparisons: u64,
    /// Most phases used by any group.
    pub max_phases: usize,
    pub rounds: usize,
    pub merges: Vec<MergeSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SortReport {
    pub n: usize,
    /// `None` when the input was sorted directly.
    pub plan: Option<SortPlan>,
    pub blocks: Option<TreeSortStats>,
    /// Comparisons spent on the short last block, or on the direct sort.
    pub direct_comparisons: u64,
    pub layers: Vec<LayerReport>,
    pub comparisons: u64,
}

impl SortReport {
    pub fn k(&self) -> Option<usize> {
        self.plan.map(|p| p.k)
    }

    pub fn tree_advances(&self) -> u64 {
        self.blocks.as_ref().map_or(0, |b| b.tree_advances)
    }

    pub fn fallback_blocks(&self) -> usize {
        self.blocks.as_ref().map_or(0, |b| b.fallback_blocks)
    }

    pub fn final_merge(&self) -> Option<&LayerReport> {
        self.layers.last()
    }
}

fn merge_layer<V: Ord + Clone>(
    runs: Vec<Run<V>>,
    tuple_size: Option<usize>,
) -> (Vec<Run<V>>, LayerReport) {
    let runs_in = runs.len();
    let mut report = LayerReport {
        tuple_size,
        runs_in,
        runs_out: 0,
        comparisons: 0,
        max_phases: 0,
        rounds: 0,
        merges: Vec::new(),
    };
    let size = tuple_size.unwrap_or(runs_in.max(1));
    let mut out = Vec::with_capacity(runs_in.div_ceil(size));
    let mut iter = runs.into_iter().peekable();
    while iter.peek().is_some() {
        let group: Vec<Run<V>> = iter.by_ref().take(size).collect();
        let (merged, stats): (_, MergeStats<V>) = merge_agnostic(group);
        report.comparisons += stats.comparisons;
        report.max_phases = report.max_phases.max(stats.phases.len());
        report.rounds += stats.rounds();
        report.merges.push(stats.summary());
        out.push(Run::from_sorted(merged));
    }
    report.runs_out = out.len();
    (out, report)
}

/// Stable sort of `values`, returned as keys carrying input positions.
pub fn sort_pattern_avoiding_keys<V: Ord + Clone>(
    values: &[V],
    cfg: &SorterConfig,
) -> Result<(Vec<Key<V>>, SortReport)> {
    cfg.validate()?;
    let n = values.len();
    let mut keys = keyed(values);
    let mut report = SortReport {
        n,
        plan: None,
        blocks: None,
        direct_comparisons: 0,
        layers: Vec::new(),
        comparisons: 0,
    };
    if n <= cfg.small_n_cutoff {
        let mut c = 0u64;
        keys.sort_by(|a, b| {
            c += 1;
            a.cmp(b)
        });
        report.direct_comparisons = c;
        report.comparisons = c;
        return Ok((keys, report));
    }

    let plan = plan(n, cfg);
    let k = plan.k;
    report.plan = Some(plan);

    let budget = cfg.tree_budget.unwrap_or((n / k) as u64);
    let mut sorter = BlockSorter::new(k, Some(budget))?;
    let mut runs = Vec::with_capacity(n.div_ceil(k));
    for chunk in keys.chunks_mut(k) {
        if chunk.len() == k {
            sorter.sort_block(chunk)?;
        } else {
            binary_insertion_sort(chunk, &mut report.direct_comparisons);
        }
        runs.push(Run::from_sorted(chunk.to_vec()));
    }
    drop(keys);
    let blocks = sorter.into_stats();
    let mut comparisons = blocks.comparisons + report.direct_comparisons;
    report.blocks = Some(blocks);

    for size in [Some(plan.t1), Some(plan.t2), None] {
        let (next, layer) = merge_layer(runs, size);
        comparisons += layer.comparisons;
        report.layers.push(layer);
        runs = next;
    }
    report.comparisons = comparisons;
    let sorted = runs.pop().map(Run::into_remaining).unwrap_or_default();
    debug_assert!(runs.is_empty());
    Ok((sorted, report))
}

/// Stable ascending sort. Pattern avoidance in the input lowers the cost but
/// never affects the result.
pub fn sort_pattern_avoiding<V: Ord + Clone>(
    values: &[V],
    cfg: &SorterConfig,
) -> Result<(Vec<V>, SortReport)> {
    let (keys, report) = sort_pattern_avoiding_keys(values, cfg)?;
    Ok((keys.into_iter().map(|k| k.value).collect(), report))
}
