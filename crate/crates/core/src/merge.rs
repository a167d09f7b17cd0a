//! Multi-way merging of presorted runs in rounds.
//!
//! A *round* pops the `d + 1` runs with the smallest heads, merges the first
//! `d` of them up to (excluding) the head of the last one, and pushes every
//! non-empty run back. [`merge_known`] runs rounds with a fixed `d` until the
//! input is exhausted. [`merge_agnostic`] does not know a good `d`: it works in
//! phases, doubling `d` and halving the run count at the start of each phase,
//! and cuts a phase off once it has spent as many rounds as it has runs.
//!
//! Both record every round in [`MergeStats`], from which
//! [`certificate_matrices`] rebuilds the run-by-round incidence matrices. On
//! pattern-avoiding input these matrices avoid the same pattern, which is what
//! bounds the number of rounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;
use crate::pattern::Key;

/// A sorted run of keys consumed front to back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run<V> {
    elements: Vec<Key<V>>,
    cursor: usize,
}

impl<V: Ord> Run<V> {
    /// Panics if `elements` is not strictly increasing.
    pub fn new(elements: Vec<Key<V>>) -> Self {
        assert!(
            elements.windows(2).all(|w| w[0] < w[1]),
            "run elements must be strictly increasing"
        );
        Run {
            elements,
            cursor: 0,
        }
    }
}

impl<V> Run<V> {
    /// Trusts the caller that `elements` is strictly increasing (checked in
    /// debug builds only).
    pub fn from_sorted(elements: Vec<Key<V>>) -> Self
    where
        V: Ord,
    {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        Run {
            elements,
            cursor: 0,
        }
    }

    fn from_sorted_unchecked(elements: Vec<Key<V>>) -> Self {
        Run {
            elements,
            cursor: 0,
        }
    }

    pub fn head(&self) -> Option<&Key<V>> {
        self.elements.get(self.cursor)
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_exhausted(&self) -> bool {
        self.cursor == self.elements.len()
    }

    /// Unconsumed elements.
    pub fn remaining(&self) -> &[Key<V>] {
        &self.elements[self.cursor..]
    }

    pub fn into_remaining(mut self) -> Vec<Key<V>> {
        self.elements.split_off(self.cursor)
    }
}

/// Binary min-heap of run indices, keyed by each run's head.
///
/// Every key comparison is added to the caller's counter.
#[derive(Debug, Default, Clone)]
pub struct RunHeap {
    ids: Vec<usize>,
}

impl RunHeap {
    pub fn new() -> Self {
        RunHeap::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn peek(&self) -> Option<usize> {
        self.ids.first().copied()
    }

    fn less<V: Ord>(runs: &[Run<V>], a: usize, b: usize, comparisons: &mut u64) -> bool {
        *comparisons += 1;
        runs[a].head().expect("exhausted run in heap")
            < runs[b].head().expect("exhausted run in heap")
    }

    /// Panics if run `id` is exhausted.
    pub fn push<V: Ord>(&mut self, id: usize, runs: &[Run<V>], comparisons: &mut u64) {
        assert!(!runs[id].is_exhausted(), "cannot queue an exhausted run");
        self.ids.push(id);
        let mut i = self.ids.len() - 1;
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::less(runs, self.ids[i], self.ids[parent], comparisons) {
                break;
            }
            self.ids.swap(i, parent);
            i = parent;
        }
    }

    pub fn pop<V: Ord>(&mut self, runs: &[Run<V>], comparisons: &mut u64) -> Option<usize> {
        if self.ids.is_empty() {
            return None;
        }
        let top = self.ids.swap_remove(0);
        self.sift_down(runs, comparisons);
        Some(top)
    }

    /// Restores the heap after the head of the top run grew.
    pub fn sift_down<V: Ord>(&mut self, runs: &[Run<V>], comparisons: &mut u64) {
        let n = self.ids.len();
        let mut i = 0;
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child =
                if right < n && Self::less(runs, self.ids[right], self.ids[left], comparisons) {
                    right
                } else {
                    left
                };
            if !Self::less(runs, self.ids[child], self.ids[i], comparisons) {
                break;
            }
            self.ids.swap(i, child);
            i = child;
        }
    }

    fn drain(&mut self) -> Vec<usize> {
        std::mem::take(&mut self.ids)
    }
}

/// Merges the runs named by `ids`, emitting every unconsumed key strictly
/// below `cutoff` (all of them when `cutoff` is `None`). Returns the number of
/// keys emitted.
fn merge_ids_below<V: Ord + Clone>(
    runs: &mut [Run<V>],
    ids: &[usize],
    cutoff: Option<&Key<V>>,
    out: &mut Vec<Key<V>>,
    comparisons: &mut u64,
) -> usize {
    let start = out.len();
    let mut heap = RunHeap::new();
    for &id in ids {
        if !runs[id].is_exhausted() {
            heap.push(id, runs, comparisons);
        }
    }
    while let Some(top) = heap.peek() {
        if heap.len() == 1 && cutoff.is_none() {
            let run = &mut runs[top];
            out.extend_from_slice(run.remaining());
            run.cursor = run.elements.len();
            break;
        }
        let head = runs[top].head().expect("heap holds live runs");
        if let Some(c) = cutoff {
            *comparisons += 1;
            if head >= c {
                break;
            }
        }
        out.push(head.clone());
        runs[top].cursor += 1;
        if runs[top].is_exhausted() {
            heap.pop(runs, comparisons);
        } else {
            heap.sift_down(runs, comparisons);
        }
    }
    out.len() - start
}

/// Merges all `runs`, emitting in key order every unconsumed key strictly
/// below `cutoff` and advancing each cursor past what was emitted.
pub fn kway_merge_below<V: Ord + Clone>(
    runs: &mut [Run<V>],
    cutoff: Option<&Key<V>>,
    comparisons: &mut u64,
) -> Vec<Key<V>> {
    let ids: Vec<usize> = (0..runs.len()).collect();
    let mut out = Vec::new();
    merge_ids_below(runs, &ids, cutoff, &mut out, comparisons);
    out
}

fn merge_two<V: Ord + Clone>(a: Run<V>, b: Run<V>, comparisons: &mut u64) -> Run<V> {
    let (a, b) = (a.into_remaining(), b.into_remaining());
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        *comparisons += 1;
        if a[i] < b[j] {
            out.push(a[i].clone());
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Run::from_sorted_unchecked(out)
}

fn merge_group<V: Ord + Clone>(mut group: Vec<Run<V>>, comparisons: &mut u64) -> Run<V> {
    match group.len() {
        0 => Run::from_sorted_unchecked(Vec::new()),
        1 => Run::from_sorted_unchecked(group.pop().unwrap().into_remaining()),
        _ => Run::from_sorted_unchecked(kway_merge_below(&mut group, None, comparisons)),
    }
}

/// One round of the merge engine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundRecord<V> {
    /// Indices (into the phase's runs) of the runs merged this round, ascending.
    pub touched: Vec<usize>,
    /// Head of the `(d + 1)`-th run; `None` for the final merge-everything round.
    pub cutoff: Option<Key<V>>,
    pub emitted: usize,
    /// Smallest key emitted this round.
    pub low: Key<V>,
    /// True when every emitted key has the same value.
    pub heavy: bool,
}

/// A phase: a fixed `d` applied to a fixed set of runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseRecord<V> {
    pub d: usize,
    /// Number of runs the phase works with.
    pub runs: usize,
    /// Maximum number of rounds, `None` when unbounded.
    pub round_budget: Option<usize>,
    pub rounds: Vec<RoundRecord<V>>,
    /// Whether the input was exhausted within this phase.
    pub completed: bool,
    /// Key comparisons spent in this phase, including its initial merges.
    pub comparisons: u64,
}

impl<V> PhaseRecord<V> {
    pub fn is_full(&self, round: &RoundRecord<V>) -> bool {
        round.touched.len() == self.d
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeStats<V> {
    pub phases: Vec<PhaseRecord<V>>,
    pub comparisons: u64,
    pub elements_emitted: usize,
}

impl<V> Default for MergeStats<V> {
    fn default() -> Self {
        MergeStats {
            phases: Vec::new(),
            comparisons: 0,
            elements_emitted: 0,
        }
    }
}

impl<V> MergeStats<V> {
    pub fn rounds(&self) -> usize {
        self.phases.iter().map(|p| p.rounds.len()).sum()
    }

    pub fn summary(&self) -> MergeSummary {
        MergeSummary {
            phases: self
                .phases
                .iter()
                .map(|p| PhaseSummary {
                    d: p.d,
                    runs: p.runs,
                    rounds: p.rounds.len(),
                    full_rounds: p.rounds.iter().filter(|r| p.is_full(r)).count(),
                    heavy_rounds: p.rounds.iter().filter(|r| r.heavy).count(),
                    completed: p.completed,
                    comparisons: p.comparisons,
                })
                .collect(),
            comparisons: self.comparisons,
            elements_emitted: self.elements_emitted,
        }
    }
}

/// Value-free digest of a [`PhaseRecord`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseSummary {
    pub d: usize,
    pub runs: usize,
    pub rounds: usize,
    pub full_rounds: usize,
    pub heavy_rounds: usize,
    pub completed: bool,
    pub comparisons: u64,
}

/// Value-free digest of [`MergeStats`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MergeSummary {
    pub phases: Vec<PhaseSummary>,
    pub comparisons: u64,
    pub elements_emitted: usize,
}

/// Runs rounds over `runs` until the input is exhausted or `budget` rounds
/// have been spent. Returns whether the input was exhausted.
fn run_rounds<V: Ord + Clone>(
    runs: &mut [Run<V>],
    phase: &mut PhaseRecord<V>,
    out: &mut Vec<Key<V>>,
    comparisons: &mut u64,
) -> bool {
    let d = phase.d;
    let mut queue = RunHeap::new();
    for id in 0..runs.len() {
        if !runs[id].is_exhausted() {
            queue.push(id, runs, comparisons);
        }
    }
    while !queue.is_empty() && phase.round_budget.is_none_or(|b| phase.rounds.len() < b) {
        let start = out.len();
        if queue.len() <= d {
            let mut ids = queue.drain();
            ids.sort_unstable();
            let emitted = merge_ids_below(runs, &ids, None, out, comparisons);
            phase
                .rounds
                .push(round_record(ids, None, &out[start..], emitted));
            return true;
        }
        let mut ids = Vec::with_capacity(d + 1);
        for _ in 0..=d {
            ids.push(
                queue
                    .pop(runs, comparisons)
                    .expect("queue holds more than d runs"),
            );
        }
        let cutoff = runs[ids[d]].head().expect("queued runs are live").clone();
        let emitted = merge_ids_below(runs, &ids[..d], Some(&cutoff), out, comparisons);
        debug_assert!(emitted > 0, "the smallest head is below the cutoff");
        for &id in &ids {
            if !runs[id].is_exhausted() {
                queue.push(id, runs, comparisons);
            }
        }
        let mut touched = ids[..d].to_vec();
        touched.sort_unstable();
        phase
            .rounds
            .push(round_record(touched, Some(cutoff), &out[start..], emitted));
    }
    queue.is_empty()
}

fn round_record<V: Ord + Clone>(
    touched: Vec<usize>,
    cutoff: Option<Key<V>>,
    emitted_keys: &[Key<V>],
    emitted: usize,
) -> RoundRecord<V> {
    let low = emitted_keys[0].clone();
    let heavy = emitted_keys.iter().all(|k| k.value == low.value);
    RoundRecord {
        touched,
        cutoff,
        emitted,
        low,
        heavy,
    }
}

fn live_runs<V>(runs: Vec<Run<V>>) -> Vec<Run<V>> {
    runs.into_iter().filter(|r| !r.is_exhausted()).collect()
}

/// Merges `runs` with a fixed round width `d`.
///
/// Consecutive `d`-tuples are merged first; if `d` does not divide the number
/// of runs the last two merged runs are merged again, leaving `floor(m / d)`
/// runs. Rounds then continue until everything is emitted.
pub fn merge_known<V: Ord + Clone>(runs: Vec<Run<V>>, d: usize) -> (Vec<Key<V>>, MergeStats<V>) {
    assert!(d >= 1, "round width must be at least 1");
    let runs = live_runs(runs);
    let total: usize = runs.iter().map(|r| r.remaining().len()).sum();
    let mut stats = MergeStats::default();
    let mut out = Vec::with_capacity(total);
    if runs.is_empty() {
        return (out, stats);
    }
    let mut comparisons = 0;
    let m = runs.len();
    let mut merged = Vec::with_capacity(m.div_ceil(d));
    let mut iter = runs.into_iter();
    loop {
        let group: Vec<Run<V>> = iter.by_ref().take(d).collect();
        if group.is_empty() {
            break;
        }
        merged.push(merge_group(group, &mut comparisons));
    }
    if merged.len() > 1 && !m.is_multiple_of(d) {
        let last = merged.pop().unwrap();
        let prev = merged.pop().unwrap();
        merged.push(merge_two(prev, last, &mut comparisons));
    }
    let mut phase = PhaseRecord {
        d,
        runs: merged.len(),
        round_budget: None,
        rounds: Vec::new(),
        completed: true,
        comparisons: 0,
    };
    if merged.len() == 1 {
        out.extend(merged.pop().unwrap().into_remaining());
    } else {
        run_rounds(&mut merged, &mut phase, &mut out, &mut comparisons);
    }
    phase.comparisons = comparisons;
    stats.phases.push(phase);
    stats.comparisons = comparisons;
    stats.elements_emitted = out.len();
    debug_assert_eq!(out.len(), total);
    (out, stats)
}

/// Pairs consecutive runs; with an odd count the leftover joins the last pair.
fn pair_runs<V: Ord + Clone>(runs: Vec<Run<V>>, comparisons: &mut u64) -> Vec<Run<V>> {
    if runs.len() < 2 {
        return runs;
    }
    let mut out: Vec<Run<V>> = Vec::with_capacity(runs.len() / 2);
    let mut iter = runs.into_iter();
    while let Some(a) = iter.next() {
        let merged = match iter.next() {
            Some(b) => merge_two(a, b, comparisons),
            None => merge_two(out.pop().expect("at least one pair"), a, comparisons),
        };
        out.push(merged);
    }
    out
}

/// Merges `runs` without a known round width.
///
/// Phase `i` uses `d = 2^i`: the surviving runs are merged in consecutive
/// pairs, then at most as many rounds as there are runs are played. Output
/// from a cut-off phase is kept; the next phase resumes from the partially
/// consumed runs.
pub fn merge_agnostic<V: Ord + Clone>(runs: Vec<Run<V>>) -> (Vec<Key<V>>, MergeStats<V>) {
    let mut runs = live_runs(runs);
    let total: usize = runs.iter().map(|r| r.remaining().len()).sum();
    let mut out = Vec::with_capacity(total);
    let mut stats = MergeStats::default();
    let mut d = 1usize;
    while !runs.is_empty() {
        d = d.saturating_mul(2);
        let mut comparisons = 0;
        let mut paired = pair_runs(runs, &mut comparisons);
        let mut phase = PhaseRecord {
            d,
            runs: paired.len(),
            round_budget: Some(paired.len()),
            rounds: Vec::new(),
            completed: false,
            comparisons: 0,
        };
        phase.completed = run_rounds(&mut paired, &mut phase, &mut out, &mut comparisons);
        phase.comparisons = comparisons;
        stats.comparisons += comparisons;
        stats.phases.push(phase);
        runs = live_runs(paired);
    }
    stats.elements_emitted = out.len();
    debug_assert_eq!(out.len(), total);
    (out, stats)
}

/// Run-by-round incidence matrices of one phase. Columns are the phase's runs
/// in index order; rows go bottom to top in emission order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificates {
    /// One row per round; a one where the run was touched.
    pub touch: BinaryMatrix,
    /// One row per distinct value of a full heavy round, ascending; a one where
    /// the run was touched by a full heavy round of that value.
    pub heavy: BinaryMatrix,
    /// The touch rows of the 1st, 3rd, 5th, ... full light round.
    pub odd_light: BinaryMatrix,
}

/// Builds the certificate matrices of `phase` (1-based, so phase `i` has
/// `d = 2^i` in [`merge_agnostic`]).
pub fn certificate_matrices<V: Ord + Clone>(
    stats: &MergeStats<V>,
    phase: usize,
) -> Result<Certificates> {
    let record = phase
        .checked_sub(1)
        .and_then(|i| stats.phases.get(i))
        .ok_or_else(|| Error::OutOfRange {
            what: "phase",
            value: phase as u128,
            expected: format!("1..={}", stats.phases.len()),
        })?;
    let cols = record.runs;
    let rows_of = |rounds: &[&RoundRecord<V>]| {
        let cells = rounds
            .iter()
            .enumerate()
            .flat_map(|(j, r)| r.touched.iter().map(move |&c| (c + 1, j + 1)));
        BinaryMatrix::from_cells(cols, rounds.len(), cells).expect("touched runs are in range")
    };

    let all: Vec<&RoundRecord<V>> = record.rounds.iter().collect();
    let touch = rows_of(&all);

    let full_heavy: Vec<&RoundRecord<V>> = all
        .iter()
        .copied()
        .filter(|r| record.is_full(r) && r.heavy)
        .collect();
    let mut values: Vec<&V> = full_heavy.iter().map(|r| &r.low.value).collect();
    values.sort();
    values.dedup();
    let heavy_cells = full_heavy.iter().flat_map(|r| {
        let row = values.binary_search(&&r.low.value).unwrap() + 1;
        r.touched.iter().map(move |&c| (c + 1, row))
    });
    let heavy = BinaryMatrix::from_cells(cols, values.len(), heavy_cells).expect("in range");

    let odd: Vec<&RoundRecord<V>> = all
        .iter()
        .copied()
        .filter(|r| record.is_full(r) && !r.heavy)
        .step_by(2)
        .collect();
    let odd_light = rows_of(&odd);

    Ok(Certificates {
        touch,
        heavy,
        odd_light,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::keyed;
    use proptest::prelude::*;

    /// Runs over values with ties assigned left to right across the runs.
    fn runs_of(parts: &[&[i64]]) -> Vec<Run<i64>> {
        let mut tie = 0;
        parts
            .iter()
            .map(|p| {
                let keys = p
                    .iter()
                    .map(|&v| {
                        tie += 1;
                        Key::new(v, tie - 1)
                    })
                    .collect::<Vec<_>>();
                let mut keys = keys;
                keys.sort();
                Run::new(keys)
            })
            .collect()
    }

    fn values(keys: &[Key<i64>]) -> Vec<i64> {
        keys.iter().map(|k| k.value).collect()
    }

    fn reference(runs: &[Run<i64>]) -> Vec<Key<i64>> {
        let mut all: Vec<Key<i64>> = runs.iter().flat_map(|r| r.remaining().to_vec()).collect();
        all.sort();
        all
    }

    #[test]
    fn kway_examples() {
        let mut c = 0;
        let mut runs = runs_of(&[&[1, 3], &[2, 4]]);
        assert_eq!(
            values(&kway_merge_below(&mut runs, None, &mut c)),
            vec![1, 2, 3, 4]
        );
        assert!(runs.iter().all(Run::is_exhausted));

        let mut runs = runs_of(&[&[1, 3], &[2, 4]]);
        let three = *runs[0].remaining().last().unwrap();
        assert_eq!(three, Key::new(3, 1));
        let out = kway_merge_below(&mut runs, Some(&three), &mut c);
        assert_eq!(values(&out), vec![1, 2]);
        assert_eq!(runs[0].cursor(), 1);
        assert_eq!(runs[1].cursor(), 1);

        let mut runs = runs_of(&[&[]]);
        assert!(kway_merge_below(&mut runs, Some(&Key::new(0, 0)), &mut c).is_empty());
    }

    #[test]
    fn heap_counts_comparisons() {
        let runs = runs_of(&[&[5], &[3], &[4], &[1]]);
        let mut c = 0;
        let mut heap = RunHeap::new();
        for id in 0..4 {
            heap.push(id, &runs, &mut c);
        }
        assert!(c > 0);
        let order: Vec<usize> = std::iter::from_fn(|| heap.pop(&runs, &mut c)).collect();
        assert_eq!(order, vec![3, 1, 2, 0]);
    }

    #[test]
    #[should_panic(expected = "strictly increasing")]
    fn unsorted_run_rejected() {
        Run::new(vec![Key::new(2, 0), Key::new(1, 1)]);
    }

    #[test]
    fn known_premerge_collapses() {
        let (out, stats) = merge_known(runs_of(&[&[2], &[1], &[3]]), 2);
        assert_eq!(values(&out), vec![1, 2, 3]);
        assert_eq!(stats.rounds(), 0);
        assert_eq!(stats.phases[0].runs, 1);

        let (out, stats) = merge_known(runs_of(&[&[1, 2, 3, 4, 5]]), 3);
        assert_eq!(values(&out), vec![1, 2, 3, 4, 5]);
        assert_eq!(stats.rounds(), 0);
        assert_eq!(stats.comparisons, 0);
    }

    #[test]
    fn known_rounds_touch_d_runs() {
        // interleaved runs force many rounds with d = 1
        let (out, stats) = merge_known(runs_of(&[&[1, 3, 5, 7], &[2, 4, 6, 8]]), 1);
        assert_eq!(values(&out), (1..=8).collect::<Vec<_>>());
        let phase = &stats.phases[0];
        assert_eq!(phase.runs, 2);
        let (last, rest) = phase.rounds.split_last().unwrap();
        assert!(rest.iter().all(|r| r.touched.len() == 1 && r.emitted == 1));
        assert!(last.cutoff.is_none());
    }

    #[test]
    fn agnostic_examples() {
        let (out, stats) = merge_agnostic(runs_of(&[&[1], &[2], &[3], &[4]]));
        assert_eq!(values(&out), vec![1, 2, 3, 4]);
        assert_eq!(stats.phases.len(), 1);
        let phase = &stats.phases[0];
        assert_eq!((phase.d, phase.runs, phase.rounds.len()), (2, 2, 1));
        assert!(phase.rounds[0].cutoff.is_none());
        assert!(phase.completed);

        let (out, stats) = merge_agnostic::<i64>(Vec::new());
        assert!(out.is_empty());
        assert!(stats.phases.is_empty());

        let (out, _) = merge_agnostic(runs_of(&[&[5], &[5], &[3]]));
        assert_eq!(out, vec![Key::new(3, 2), Key::new(5, 0), Key::new(5, 1)]);
    }

    #[test]
    fn agnostic_single_run_terminates() {
        let (out, stats) = merge_agnostic(runs_of(&[&[], &[4, 6], &[]]));
        assert_eq!(values(&out), vec![4, 6]);
        assert_eq!(stats.phases.len(), 1);
        assert_eq!(stats.phases[0].runs, 1);
    }

    #[test]
    fn odd_pairing_keeps_half() {
        let mut c = 0;
        let paired = pair_runs(runs_of(&[&[1], &[2], &[3], &[4], &[5]]), &mut c);
        assert_eq!(paired.len(), 2);
        assert_eq!(values(paired[1].remaining()), vec![3, 4, 5]);
    }

    #[test]
    fn agnostic_phase_cutoff_resumes() {
        // alternating values across many runs exhaust the round budget early
        let parts: Vec<Vec<i64>> = (0..16)
            .map(|i| (0..8).map(|j| j * 16 + i).collect())
            .collect();
        let refs: Vec<&[i64]> = parts.iter().map(|p| p.as_slice()).collect();
        let runs = runs_of(&refs);
        let expected = reference(&runs);
        let (out, stats) = merge_agnostic(runs);
        assert_eq!(out, expected);
        assert!(stats.phases.len() > 1);
        assert!(!stats.phases[0].completed);
        for p in &stats.phases {
            assert!(p.rounds.len() <= p.runs);
            assert_eq!(
                p.d,
                1 << (stats.phases.iter().position(|q| q == p).unwrap() + 1)
            );
        }
    }

    #[test]
    fn certificates_basic() {
        let (_, stats) = merge_agnostic(runs_of(&[&[1], &[2], &[3], &[4]]));
        let cert = certificate_matrices(&stats, 1).unwrap();
        assert_eq!(cert.touch.rows(), 1);
        assert!(cert.touch.count_ones() <= 2);
        assert_eq!(cert.heavy.rows(), 0);
        assert!(certificate_matrices(&stats, 0).is_err());
        assert!(certificate_matrices(&stats, 2).is_err());
    }

    #[test]
    fn heavy_rows_group_by_value() {
        let (_, stats) = merge_known(runs_of(&[&[1], &[1], &[2], &[2], &[3, 9]]), 1);
        let phase = &stats.phases[0];
        let cert = certificate_matrices(&stats, 1).unwrap();
        let heavy_full: Vec<_> = phase
            .rounds
            .iter()
            .filter(|r| r.heavy && phase.is_full(r))
            .collect();
        assert!(!heavy_full.is_empty());
        assert_eq!(
            cert.heavy.count_ones(),
            heavy_full.iter().map(|r| r.touched.len()).sum::<usize>()
        );
        assert!(cert.heavy.rows() <= heavy_full.len());
    }

    fn arb_runs() -> impl Strategy<Value = Vec<Vec<i64>>> {
        prop::collection::vec(prop::collection::vec(-20i64..20, 0..12), 0..24)
    }

    fn build(parts: &[Vec<i64>]) -> Vec<Run<i64>> {
        let refs: Vec<&[i64]> = parts.iter().map(|p| p.as_slice()).collect();
        runs_of(&refs)
    }

    proptest! {
        #[test]
        fn merges_match_reference(parts in arb_runs(), d in 1usize..6) {
            let runs = build(&parts);
            let expected = reference(&runs);
            let (known, ks) = merge_known(runs.clone(), d);
            let (agnostic, st) = merge_agnostic(runs);
            prop_assert_eq!(&known, &expected);
            prop_assert_eq!(&agnostic, &expected);
            prop_assert_eq!(ks.elements_emitted, expected.len());
            prop_assert_eq!(st.elements_emitted, expected.len());
        }

        #[test]
        fn round_accounting(parts in arb_runs()) {
            let (_, stats) = merge_agnostic(build(&parts));
            for phase in &stats.phases {
                prop_assert!(phase.rounds.len() <= phase.runs);
                let short = phase.rounds.iter().filter(|r| r.touched.len() != phase.d).count();
                prop_assert!(short <= 1);
                for (j, r) in phase.rounds.iter().enumerate() {
                    prop_assert!(r.emitted >= 1);
                    if r.cutoff.is_some() {
                        prop_assert_eq!(r.touched.len(), phase.d);
                    } else {
                        prop_assert_eq!(j, phase.rounds.len() - 1);
                    }
                }
                let cert = certificate_matrices(&stats, stats.phases.iter().position(|p| p == phase).unwrap() + 1).unwrap();
                let touched: usize = phase.rounds.iter().map(|r| r.touched.len()).sum();
                prop_assert_eq!(cert.touch.count_ones(), touched);
            }
        }

        #[test]
        fn kway_respects_cutoff(parts in arb_runs(), cut in -20i64..20, tie in 0usize..200) {
            let mut runs = build(&parts);
            let cutoff = Key::new(cut, tie);
            let expected: Vec<Key<i64>> = reference(&runs).into_iter().filter(|k| *k < cutoff).collect();
            let mut c = 0;
            let out = kway_merge_below(&mut runs, Some(&cutoff), &mut c);
            prop_assert_eq!(&out, &expected);
            for r in &runs {
                prop_assert!(r.head().is_none_or(|h| *h >= cutoff));
            }
        }
    }

    #[test]
    fn keyed_single_run() {
        let keys = keyed(&[1i64, 2, 3]);
        let (out, stats) = merge_agnostic(vec![Run::new(keys.clone())]);
        assert_eq!(out, keys);
        assert_eq!(stats.rounds(), 1);
    }
}
