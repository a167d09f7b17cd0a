//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use patsort::generators::{
    gen_layered_runs, gen_stack_family, inject_duplicates, partition_into_runs, rng, StackTarget,
};
use patsort::matrix::{
    count_avoiders, count_t, ex_brute, matrix_contains, BinaryMatrix, OracleLimits,
};
use patsort::merge::{certificate_matrices, merge_agnostic, MergeStats};
use patsort::pattern::{contains_pattern, keyed, Key, Pattern};
use patsort::sorter::{sort_pattern_avoiding, sort_pattern_avoiding_keys, SorterConfig};
use patsort::treesort::{
    check_sorts, count_trees_exact, run_tree, sort_blocks, DecisionTree, PermTable, TreeEnumerator,
};
use rand::Rng;

/// Largest comparisons-per-element over the scaling sizes, measured once on
/// seed 0 with the default configuration.
const SCALING_T_STAR: f64 = 9.671;

type Outcome = Result<String, String>;
type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn reference<V: Ord + Clone>(s: &[V]) -> Vec<Key<V>> {
    let mut k = keyed(s);
    k.sort();
    k
}

/// Fuzz input of length `n` drawn from one of several shapes.
fn fuzz_input(n: usize, shape: u32, r: &mut impl Rng) -> Vec<i64> {
    let n64 = n as i64;
    match shape {
        0 => (0..n).map(|_| r.gen_range(-1_000_000..1_000_000)).collect(),
        1 => (0..n).map(|_| r.gen_range(0..4)).collect(),
        2 => (0..n64).collect(),
        3 => (0..n64).rev().collect(),
        4 => (0..n64).map(|i| i % 17).collect(),
        5 => (0..n64)
            .map(|i| if i < n64 / 2 { i } else { n64 - i })
            .collect(),
        6 if n > 0 => gen_stack_family(n, StackTarget::ALL[r.gen_range(0..4)], r.gen())
            .entries()
            .iter()
            .map(|&v| v as i64)
            .collect(),
        7 if n > 0 => gen_layered_runs(n, r.gen_range(1..6), r.gen())
            .unwrap()
            .entries()
            .iter()
            .map(|&v| v as i64)
            .collect(),
        8 if n > 0 => {
            let p = gen_stack_family(n, StackTarget::P231, r.gen());
            inject_duplicates(&p, r.gen_range(1..=n), r.gen())
                .into_iter()
                .map(|v| v as i64)
                .collect()
        }
        _ => vec![i64::MIN; n],
    }
}

fn criterion_1() -> Outcome {
    let mut r = rng(0x5eed_0001);
    let cfg = SorterConfig::default();
    let mut total = 0usize;
    for case in 0..1000 {
        // Log-uniform lengths over 0..=100_000.
        let n = ((100_001f64).powf(r.gen::<f64>()) - 1.0).floor() as usize;
        let s = fuzz_input(n.min(100_000), r.gen_range(0..10), &mut r);
        total += s.len();
        let (out, _) = sort_pattern_avoiding_keys(&s, &cfg).map_err(|e| e.to_string())?;
        check(out == reference(&s), || {
            format!("case {case} (n = {}) differs from the reference", s.len())
        })?;
    }
    Ok(format!(
        "1000 inputs, {total} elements, all equal to the reference stable sort"
    ))
}

fn height_three_tree() -> DecisionTree {
    let pairs = [(1, 2), (2, 3), (1, 3), (2, 3), (1, 3), (1, 3), (2, 3)];
    let leaves: Vec<Pattern> = ["123", "123", "132", "312", "213", "213", "231", "321"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    DecisionTree::from_labels(3, &pairs, &leaves).unwrap()
}

fn criterion_2() -> Outcome {
    let tree = height_three_tree();
    let table = PermTable::new(3).map_err(|e| e.to_string())?;
    let s = keyed(&[7, 2, 3]);
    let sigma = run_tree(&tree, &table, &s).map_err(|e| e.to_string())?;
    check(sigma.entries() == [2, 3, 1], || {
        format!("leaf {sigma}, expected 2,3,1")
    })?;
    let sorts = check_sorts(&s, &sigma).map_err(|e| e.to_string())?;
    check(sorts, || "check_sorts rejected 2,3,1 on (7,2,3)".into())?;
    Ok(format!("run_tree(7,2,3) = {sigma}, check_sorts = true"))
}

struct Instance {
    family: &'static str,
    pattern: Pattern,
    perm: Pattern,
    dup: Vec<usize>,
}

fn corpus() -> Vec<Instance> {
    let mut r = rng(0x5eed_0003);
    let mut out = Vec::new();
    for family in ["stack-231", "layered-3"] {
        for _ in 0..200 {
            let n = r.gen_range(1..=512);
            let (perm, pattern) = if family == "stack-231" {
                (
                    gen_stack_family(n, StackTarget::P231, r.gen()),
                    StackTarget::P231.pattern(),
                )
            } else {
                (
                    gen_layered_runs(n, 3, r.gen()).unwrap(),
                    Pattern::decreasing(4),
                )
            };
            let distinct = r.gen_range(1..=n.div_ceil(4));
            let dup = inject_duplicates(&perm, distinct, r.gen());
            out.push(Instance {
                family,
                pattern,
                perm,
                dup,
            });
        }
    }
    out
}

fn merged<V: Ord + Clone>(s: &[V]) -> (Vec<Key<V>>, MergeStats<V>) {
    merge_agnostic(partition_into_runs(s, 16))
}

fn criterion_3(corpus: &[Instance]) -> Outcome {
    let mut matrices = 0usize;
    for (i, inst) in corpus.iter().enumerate() {
        let p = BinaryMatrix::from_permutation(&inst.pattern);
        check(
            !contains_pattern(inst.perm.entries(), &inst.pattern),
            || {
                format!(
                    "instance {i} ({}) does not avoid {}",
                    inst.family, inst.pattern
                )
            },
        )?;
        check(!contains_pattern(&inst.dup, &inst.pattern), || {
            format!(
                "duplicated instance {i} ({}) does not avoid {}",
                inst.family, inst.pattern
            )
        })?;
        let (_, stats) = merged(inst.perm.entries());
        for phase in 1..=stats.phases.len() {
            let c = certificate_matrices(&stats, phase).map_err(|e| e.to_string())?;
            check(!matrix_contains(&c.touch, &p), || {
                format!(
                    "instance {i} ({}) phase {phase}: touch matrix contains {}",
                    inst.family, inst.pattern
                )
            })?;
            matrices += 1;
        }
        let (_, stats) = merged(&inst.dup);
        for phase in 1..=stats.phases.len() {
            let c = certificate_matrices(&stats, phase).map_err(|e| e.to_string())?;
            check(!matrix_contains(&c.heavy, &p), || {
                format!(
                    "duplicated instance {i} ({}) phase {phase}: heavy matrix contains {}",
                    inst.family, inst.pattern
                )
            })?;
            check(!matrix_contains(&c.odd_light, &p), || {
                format!(
                    "duplicated instance {i} ({}) phase {phase}: odd-light matrix contains {}",
                    inst.family, inst.pattern
                )
            })?;
            matrices += 2;
        }
    }
    Ok(format!(
        "{} instances, {matrices} certificate matrices, 0 violations",
        corpus.len()
    ))
}

fn rounds_ok<V: Ord + Clone>(stats: &MergeStats<V>, what: &str) -> Result<usize, String> {
    let mut rounds = 0;
    for (pi, phase) in stats.phases.iter().enumerate() {
        check(phase.rounds.len() <= phase.runs, || {
            format!(
                "{what} phase {}: {} rounds > m_i = {}",
                pi + 1,
                phase.rounds.len(),
                phase.runs
            )
        })?;
        for (ri, round) in phase.rounds.iter().enumerate() {
            check(round.emitted >= 1, || {
                format!("{what} phase {} round {}: emitted nothing", pi + 1, ri + 1)
            })?;
            if round.cutoff.is_some() {
                check(round.touched.len() == phase.d, || {
                    format!(
                        "{what} phase {} round {}: touched {} runs, d = {}",
                        pi + 1,
                        ri + 1,
                        round.touched.len(),
                        phase.d
                    )
                })?;
            } else {
                check(ri + 1 == phase.rounds.len() && phase.completed, || {
                    format!(
                        "{what} phase {} round {}: merge-all round is not terminal",
                        pi + 1,
                        ri + 1
                    )
                })?;
            }
            rounds += 1;
        }
    }
    Ok(rounds)
}

fn criterion_4(corpus: &[Instance]) -> Outcome {
    let mut rounds = 0;
    for (i, inst) in corpus.iter().enumerate() {
        let (out, stats) = merged(inst.perm.entries());
        check(out == reference(inst.perm.entries()), || {
            format!("instance {i}: merge output is not sorted")
        })?;
        rounds += rounds_ok(&stats, &format!("instance {i}"))?;
        let (out, stats) = merged(&inst.dup);
        check(out == reference(&inst.dup), || {
            format!("duplicated instance {i}: merge output is not sorted")
        })?;
        rounds += rounds_ok(&stats, &format!("duplicated instance {i}"))?;
    }
    Ok(format!("{rounds} rounds checked"))
}

fn criterion_5() -> Outcome {
    let mut e = TreeEnumerator::starting_at(2, 1).map_err(|e| e.to_string())?;
    let mut seen = BTreeSet::new();
    seen.insert(e.current().clone());
    while e.advances() < 15 {
        seen.insert(e.next_tree().clone());
    }
    let count = count_trees_exact(2, 1);
    check(BigUint::from(seen.len()) == count, || {
        format!("{} distinct trees, expected {count}", seen.len())
    })?;
    check(seen.iter().all(|t| t.height() == 1), || {
        "a tree of the wrong height".into()
    })?;
    check(e.next_tree().height() == 2, || {
        "enumeration did not move to height 2".into()
    })?;

    let mut e = TreeEnumerator::new(3).map_err(|e| e.to_string())?;
    let mut prev = e.current().clone();
    for i in 1..100_000 {
        let next = e.next_tree().clone();
        check(prev < next, || {
            format!("tree {i} is not after tree {}", i - 1)
        })?;
        prev = next;
    }
    Ok(format!(
        "k=2 h=1: {} distinct trees = {count}; k=3: 100000 trees strictly increasing",
        seen.len()
    ))
}

fn criterion_6() -> Outcome {
    let p = StackTarget::P231.pattern();
    let avoiders: Vec<Pattern> = Pattern::all(3)
        .filter(|s| !contains_pattern(s.entries(), &p))
        .collect();
    check(avoiders.len() == 5, || {
        format!("{} avoiders of 231", avoiders.len())
    })?;
    let blocks: Vec<Vec<Key<usize>>> = avoiders.iter().map(|s| keyed(s.entries())).collect();
    let (sorted, stats) = sort_blocks(blocks, Some(10_000_000)).map_err(|e| e.to_string())?;
    for (s, out) in avoiders.iter().zip(&sorted) {
        check(*out == reference(s.entries()), || {
            format!("block {s} not sorted")
        })?;
    }
    let bound = 3 + 6; // ceil(log2 5) + 6
    check(
        stats.fallback_blocks == 0 && !stats.budget_exhausted,
        || "fell back to insertion sort".into(),
    )?;
    check(
        stats.final_height == 3 && stats.final_height <= bound,
        || format!("final height {}, bound {bound}", stats.final_height),
    )?;
    Ok(format!(
        "height {} <= {bound} after {} advances, no fallback",
        stats.final_height, stats.tree_advances
    ))
}

fn criterion_7() -> Outcome {
    let limits = OracleLimits::default();
    let p231 = StackTarget::P231.pattern();
    for (n, expect) in [(3, 5u32), (4, 14), (5, 42)] {
        let got = count_avoiders(&p231, n, &limits).map_err(|e| e.to_string())?;
        check(got == BigUint::from(expect), || {
            format!("count_avoiders(231, {n}) = {got}, expected {expect}")
        })?;
    }
    let p12 = Pattern::identity(2);
    let t = count_t(&p12, 2, 2, &limits).map_err(|e| e.to_string())?;
    check(t == BigUint::from(5u32), || {
        format!("count_T(12, 2, 2) = {t}, expected 5")
    })?;
    for n in 1..=5 {
        let ex = ex_brute(&p12, n, &limits).map_err(|e| e.to_string())?;
        check(ex == 2 * n - 1, || {
            format!("ex(12, {n}) = {ex}, expected {}", 2 * n - 1)
        })?;
    }
    Ok("avoiders 5,14,42; count_T = 5; ex(12, n) = 2n-1 for n = 1..5".into())
}

fn criterion_8() -> Outcome {
    let cfg = SorterConfig::default();
    let mut per = Vec::new();
    for e in [12u32, 14, 16, 18] {
        let n = 1usize << e;
        let p = gen_stack_family(n, StackTarget::P231, 0);
        let (out, report) = sort_pattern_avoiding(p.entries(), &cfg).map_err(|e| e.to_string())?;
        check(out.iter().copied().eq(1..=n), || {
            format!("n = 2^{e} not sorted")
        })?;
        per.push((e, report.comparisons as f64 / n as f64));
    }
    let shown: Vec<String> = per.iter().map(|(e, c)| format!("2^{e}: {c:.3}")).collect();
    for &(e, c) in &per {
        check(c <= 1.1 * SCALING_T_STAR, || {
            format!(
                "n = 2^{e}: {c:.3} > 1.1 * T* = {:.3} [{}]",
                1.1 * SCALING_T_STAR,
                shown.join(", ")
            )
        })?;
    }
    for w in per.windows(2) {
        check(w[1].1 <= 1.1 * w[0].1, || {
            format!(
                "growth from 2^{} to 2^{} exceeds 10% [{}]",
                w[0].0,
                w[1].0,
                shown.join(", ")
            )
        })?;
    }
    Ok(format!(
        "comparisons/n {}; T* = {SCALING_T_STAR}",
        shown.join(", ")
    ))
}

fn criterion_9() -> Outcome {
    let mut r = rng(0x5eed_0009);
    let cfg = SorterConfig::default();
    for case in 0..200 {
        let n = r.gen_range(0..=10_000);
        let s: Vec<char> = (0..n)
            .map(|_| ['a', 'b', 'c', 'd'][r.gen_range(0..4)])
            .collect();
        let (out, _) = sort_pattern_avoiding_keys(&s, &cfg).map_err(|e| e.to_string())?;
        check(out.len() == n, || format!("case {case}: length changed"))?;
        for w in out.windows(2) {
            let ordered =
                w[0].value < w[1].value || (w[0].value == w[1].value && w[0].tie < w[1].tie);
            check(ordered, || {
                format!("case {case}: {:?} before {:?}", w[0], w[1])
            })?;
        }
        check(out.iter().all(|k| s[k.tie] == k.value), || {
            format!("case {case}: value moved")
        })?;
    }
    Ok("200 inputs over a 4-letter alphabet, equal values in input order".into())
}

fn main() -> ExitCode {
    let corpus = corpus();
    let criteria: Vec<Criterion> = vec![
        (1, "universal correctness", Box::new(criterion_1)),
        (2, "decision tree fixture", Box::new(criterion_2)),
        (
            3,
            "certificate avoidance",
            Box::new(|| criterion_3(&corpus)),
        ),
        (4, "round accounting", Box::new(|| criterion_4(&corpus))),
        (5, "tree enumeration", Box::new(criterion_5)),
        (6, "tree reachability", Box::new(criterion_6)),
        (7, "counting oracles", Box::new(criterion_7)),
        (8, "scaling regression", Box::new(criterion_8)),
        (9, "stability", Box::new(criterion_9)),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let outcome =
            catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} ({name}): PASS [{secs:.1}s] {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL [{secs:.1}s] {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
