//! Sorting many short blocks with a shared, advancing decision tree.
//!
//! A decision tree for blocks of length `k` is a perfect binary tree of height
//! `h` stored in heap layout: internal node `i` (1-based) has children `2i` and
//! `2i + 1`, each internal node holds a pair code `c` standing for the
//! comparison `s[c / k] <= s[c % k]`, and each leaf holds the lexicographic rank
//! of a permutation. Trees are enumerated height by height, and within a height
//! in lexicographic order of (internal codes, leaf ranks).
//!
//! [`BlockSorter`] keeps one candidate tree. For every block it runs the tree,
//! checks the result in `k - 1` comparisons and on failure moves to the next
//! tree in the enumeration, never going back.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pattern::{factorial, Key, Pattern};

/// Largest block length with a materialized permutation table.
pub const MAX_BLOCK_LEN: usize = 8;

/// All permutations of length `k` in lexicographic order, stored as 0-based
/// positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermTable {
    k: usize,
    positions: Vec<u8>,
}

impl PermTable {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 || k > MAX_BLOCK_LEN {
            return Err(Error::OutOfRange {
                what: "block length",
                value: k as u128,
                expected: format!("1..={MAX_BLOCK_LEN}"),
            });
        }
        let positions = Pattern::all(k)
            .flat_map(|p| {
                p.entries()
                    .iter()
                    .map(|&e| (e - 1) as u8)
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(PermTable { k, positions })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.positions.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// 0-based positions of permutation `rank`.
    pub fn positions(&self, rank: usize) -> &[u8] {
        &self.positions[rank * self.k..(rank + 1) * self.k]
    }

    pub fn pattern(&self, rank: usize) -> Pattern {
        Pattern::new(
            self.positions(rank)
                .iter()
                .map(|&p| p as usize + 1)
                .collect(),
        )
        .expect("table rows are permutations")
    }
}

/// A perfect comparison tree in heap layout.
///
/// The derived ordering (height, then internal codes, then leaf ranks) is the
/// enumeration order for trees with the same `k`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DecisionTree {
    k: usize,
    height: usize,
    internal: Vec<u32>,
    leaves: Vec<u32>,
}

impl DecisionTree {
    pub fn new(k: usize, internal: Vec<u32>, leaves: Vec<u32>) -> Result<Self> {
        let height = leaves.len().trailing_zeros() as usize;
        if k == 0 || k > MAX_BLOCK_LEN {
            return Err(Error::Contract(format!(
                "block length {k} not in 1..={MAX_BLOCK_LEN}"
            )));
        }
        if height == 0 || leaves.len() != 1 << height || internal.len() + 1 != leaves.len() {
            return Err(Error::Contract(format!(
                "{} internal nodes and {} leaves do not form a perfect tree of height >= 1",
                internal.len(),
                leaves.len()
            )));
        }
        let codes = (k * k) as u32;
        let ranks = factorial(k).unwrap() as u32;
        if internal.iter().any(|&c| c >= codes) || leaves.iter().any(|&r| r >= ranks) {
            return Err(Error::Contract(
                "pair code or permutation rank out of range".into(),
            ));
        }
        Ok(DecisionTree {
            k,
            height,
            internal,
            leaves,
        })
    }

    /// Builds a tree from 1-based index pairs and leaf permutations in heap order.
    pub fn from_labels(k: usize, pairs: &[(usize, usize)], leaves: &[Pattern]) -> Result<Self> {
        let internal = pairs
            .iter()
            .map(|&(i, j)| {
                if i == 0 || j == 0 || i > k || j > k {
                    Err(Error::Contract(format!("pair ({i}, {j}) outside 1..={k}")))
                } else {
                    Ok(((i - 1) * k + (j - 1)) as u32)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let ranks = leaves
            .iter()
            .map(|p| {
                if p.len() == k {
                    Ok(crate::pattern::perm_rank(p) as u32)
                } else {
                    Err(Error::Contract(format!("leaf {p} is not of length {k}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        DecisionTree::new(k, internal, ranks)
    }

    fn zeros(k: usize, height: usize) -> Self {
        DecisionTree {
            k,
            height,
            internal: vec![0; (1 << height) - 1],
            leaves: vec![0; 1 << height],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn internal(&self) -> &[u32] {
        &self.internal
    }

    pub fn leaves(&self) -> &[u32] {
        &self.leaves
    }

    /// The 1-based index pair compared at internal node `node` (1-based).
    pub fn pair(&self, node: usize) -> (usize, usize) {
        let code = self.internal[node - 1] as usize;
        (code / self.k + 1, code % self.k + 1)
    }

    /// Rank of the leaf reached on `s`, charging one comparison per level.
    fn leaf_rank<V: Ord>(&self, s: &[Key<V>], comparisons: &mut u64) -> usize {
        let k = self.k as u32;
        let mut node = 1usize;
        for _ in 0..self.height {
            let code = self.internal[node - 1];
            let (i, j) = ((code / k) as usize, (code % k) as usize);
            node = 2 * node + usize::from(s[i] > s[j]);
        }
        *comparisons += self.height as u64;
        self.leaves[node - (1 << self.height)] as usize
    }
}

fn check_len<T>(s: &[T], k: usize) -> Result<()> {
    if s.len() == k {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "sequence of length {} given to a tree for length {k}",
            s.len()
        )))
    }
}

/// The permutation labelling the leaf that `tree` reaches on `s`.
pub fn run_tree<V: Ord>(tree: &DecisionTree, table: &PermTable, s: &[Key<V>]) -> Result<Pattern> {
    check_len(s, tree.k)?;
    if table.k() != tree.k {
        return Err(Error::Contract(
            "permutation table built for another block length".into(),
        ));
    }
    let mut c = 0;
    Ok(table.pattern(tree.leaf_rank(s, &mut c)))
}

/// Whether listing `s` in the order given by `sigma` is non-decreasing.
pub fn check_sorts<V: Ord>(s: &[Key<V>], sigma: &Pattern) -> Result<bool> {
    check_len(s, sigma.len())?;
    let e = sigma.entries();
    Ok(e.windows(2).all(|w| s[w[0] - 1] <= s[w[1] - 1]))
}

fn sorted_by(s: &[Key<impl Ord>], positions: &[u8], comparisons: &mut u64) -> bool {
    for w in positions.windows(2) {
        *comparisons += 1;
        if s[w[0] as usize] > s[w[1] as usize] {
            return false;
        }
    }
    true
}

/// `(k^2)^(2^h - 1) * (k!)^(2^h)`: trees of height exactly `h` in heap layout.
pub fn count_trees_exact(k: usize, h: usize) -> BigUint {
    let leaves = 1u32 << h;
    let perms = BigUint::from(factorial(k).expect("k! fits in 64 bits"));
    BigUint::from(k * k).pow(leaves - 1) * perms.pow(leaves)
}

/// `(k^2)^(2^h) * (k!)^(2^h)`, the per-height bound with the internal-node
/// count rounded up to `2^h`.
pub fn tree_count_bound(k: usize, h: usize) -> BigUint {
    let leaves = 1u32 << h;
    (BigUint::from(k * k) * BigUint::from(factorial(k).expect("k! fits in 64 bits"))).pow(leaves)
}

/// Walks all decision trees for block length `k`, by increasing height.
#[derive(Debug, Clone)]
pub struct TreeEnumerator {
    table: PermTable,
    current: DecisionTree,
    advances: u64,
}

impl TreeEnumerator {
    /// Starts at the first tree of height `k`.
    pub fn new(k: usize) -> Result<Self> {
        TreeEnumerator::starting_at(k, k)
    }

    pub fn starting_at(k: usize, height: usize) -> Result<Self> {
        let table = PermTable::new(k)?;
        if height == 0 || height > 24 {
            return Err(Error::OutOfRange {
                what: "tree height",
                value: height as u128,
                expected: "1..=24".into(),
            });
        }
        Ok(TreeEnumerator {
            table,
            current: DecisionTree::zeros(k, height),
            advances: 0,
        })
    }

    pub fn table(&self) -> &PermTable {
        &self.table
    }

    pub fn current(&self) -> &DecisionTree {
        &self.current
    }

    pub fn advances(&self) -> u64 {
        self.advances
    }

    /// Moves to the next tree: an odometer over the leaf ranks (fastest) and
    /// internal codes; past the last tree of a height, the all-zero tree one
    /// level taller.
    pub fn next_tree(&mut self) -> &DecisionTree {
        self.advances += 1;
        let t = &mut self.current;
        let ranks = self.table.len() as u32;
        for r in t.leaves.iter_mut().rev() {
            *r += 1;
            if *r < ranks {
                return &self.current;
            }
            *r = 0;
        }
        let codes = (t.k * t.k) as u32;
        for c in t.internal.iter_mut().rev() {
            *c += 1;
            if *c < codes {
                return &self.current;
            }
            *c = 0;
        }
        self.current = DecisionTree::zeros(t.k, t.height + 1);
        &self.current
    }
}

/// Counters for one [`BlockSorter`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TreeSortStats {
    pub k: usize,
    pub blocks: usize,
    pub successful_runs: u64,
    pub unsuccessful_runs: u64,
    pub tree_advances: u64,
    /// Blocks sorted by binary insertion after the advance budget ran out.
    pub fallback_blocks: usize,
    pub budget_exhausted: bool,
    pub initial_height: usize,
    pub final_height: usize,
    pub comparisons: u64,
}

/// Sorts blocks of length `k` one at a time with a shared candidate tree.
#[derive(Debug, Clone)]
pub struct BlockSorter {
    enumerator: TreeEnumerator,
    budget: Option<u64>,
    stats: TreeSortStats,
    scratch: Vec<usize>,
}

impl BlockSorter {
    /// `budget` caps the number of tree advances; `None` never gives up.
    pub fn new(k: usize, budget: Option<u64>) -> Result<Self> {
        BlockSorter::with_enumerator(TreeEnumerator::new(k)?, budget)
    }

    pub fn with_enumerator(enumerator: TreeEnumerator, budget: Option<u64>) -> Result<Self> {
        let k = enumerator.current().k();
        let height = enumerator.current().height();
        Ok(BlockSorter {
            enumerator,
            budget,
            stats: TreeSortStats {
                k,
                initial_height: height,
                final_height: height,
                ..TreeSortStats::default()
            },
            scratch: Vec::with_capacity(k),
        })
    }

    pub fn candidate(&self) -> &DecisionTree {
        self.enumerator.current()
    }

    pub fn stats(&self) -> &TreeSortStats {
        &self.stats
    }

    pub fn into_stats(self) -> TreeSortStats {
        self.stats
    }

    /// Sorts one block in place.
    pub fn sort_block<V: Ord + Clone>(&mut self, block: &mut [Key<V>]) -> Result<()> {
        check_len(block, self.stats.k)?;
        self.stats.blocks += 1;
        if !self.stats.budget_exhausted {
            loop {
                let mut c = 0;
                let rank = self.enumerator.current().leaf_rank(block, &mut c);
                let positions = self.enumerator.table().positions(rank);
                let ok = sorted_by(block, positions, &mut c);
                self.stats.comparisons += c;
                if ok {
                    self.stats.successful_runs += 1;
                    self.scratch.clear();
                    self.scratch.extend(positions.iter().map(|&p| p as usize));
                    let sorted: Vec<Key<V>> =
                        self.scratch.iter().map(|&p| block[p].clone()).collect();
                    block.clone_from_slice(&sorted);
                    return Ok(());
                }
                self.stats.unsuccessful_runs += 1;
                if self.budget.is_some_and(|b| self.enumerator.advances() >= b) {
                    self.stats.budget_exhausted = true;
                    break;
                }
                self.enumerator.next_tree();
                self.stats.tree_advances = self.enumerator.advances();
                self.stats.final_height = self.enumerator.current().height();
            }
        }
        self.stats.fallback_blocks += 1;
        binary_insertion_sort(block, &mut self.stats.comparisons);
        Ok(())
    }
}

/// Sorts every block (all of one length `k >= 1`) with a shared candidate tree
/// starting at height `k`.
pub fn sort_blocks<V: Ord + Clone>(
    mut blocks: Vec<Vec<Key<V>>>,
    budget: Option<u64>,
) -> Result<(Vec<Vec<Key<V>>>, TreeSortStats)> {
    let Some(k) = blocks.first().map(Vec::len) else {
        return Ok((blocks, TreeSortStats::default()));
    };
    if blocks.iter().any(|b| b.len() != k) {
        return Err(Error::Contract("blocks of unequal length".into()));
    }
    let mut sorter = BlockSorter::new(k, budget)?;
    for b in &mut blocks {
        sorter.sort_block(b)?;
    }
    Ok((blocks, sorter.into_stats()))
}

/// Stable binary insertion sort, counting comparisons.
pub fn binary_insertion_sort<T: Ord>(s: &mut [T], comparisons: &mut u64) {
    for i in 1..s.len() {
        let (mut lo, mut hi) = (0, i);
        while lo < hi {
            let mid = (lo + hi) / 2;
            *comparisons += 1;
            if s[mid] <= s[i] {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        s[lo..=i].rotate_right(1);
    }
}
