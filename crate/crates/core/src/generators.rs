//! Seeded instance families for tests and benchmarks.
//!
//! All randomness comes from ChaCha8 seeded with a `u64` through
//! `SeedableRng::seed_from_u64`, so a seed reproduces the same instance on
//! every platform.

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::merge::Run;
use crate::pattern::{contains_pattern, keyed, Pattern};

pub type Seed = u64;

/// Largest `n` accepted by [`gen_rejection`].
pub const REJECTION_MAX_N: usize = 10;
pub const REJECTION_MAX_TRIES: u64 = 1_000_000;

pub fn rng(seed: Seed) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The length-3 pattern a stack family avoids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StackTarget {
    P231,
    P312,
    P132,
    P213,
}

impl StackTarget {
    pub const ALL: [StackTarget; 4] = [
        StackTarget::P231,
        StackTarget::P312,
        StackTarget::P132,
        StackTarget::P213,
    ];

    pub fn pattern(self) -> Pattern {
        let e = match self {
            StackTarget::P231 => vec![2, 3, 1],
            StackTarget::P312 => vec![3, 1, 2],
            StackTarget::P132 => vec![1, 3, 2],
            StackTarget::P213 => vec![2, 1, 3],
        };
        Pattern::new(e).expect("valid permutation")
    }
}

impl fmt::Display for StackTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StackTarget::P231 => "231",
            StackTarget::P312 => "312",
            StackTarget::P132 => "132",
            StackTarget::P213 => "213",
        };
        f.write_str(s)
    }
}

impl FromStr for StackTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().replace([',', ' '], "").as_str() {
            "231" => Ok(StackTarget::P231),
            "312" => Ok(StackTarget::P312),
            "132" => Ok(StackTarget::P132),
            "213" => Ok(StackTarget::P213),
            _ => Err(Error::InvalidPattern(format!(
                "no stack family avoids {s:?}"
            ))),
        }
    }
}

/// Uniform Dyck word of semilength `n` (`true` = push), by the cycle lemma.
fn dyck_word(n: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut w: Vec<bool> = std::iter::repeat_n(true, n)
        .chain(std::iter::repeat_n(false, n + 1))
        .collect();
    w.shuffle(rng);
    let (mut sum, mut min, mut at) = (0i64, 0i64, 0usize);
    for (i, &up) in w.iter().enumerate() {
        sum += if up { 1 } else { -1 };
        if sum < min {
            min = sum;
            at = i + 1;
        }
    }
    w.rotate_left(at);
    w.pop();
    w
}

/// Output of pushing `1..=n` in order through a stack driven by `word`.
fn stack_output(word: &[bool]) -> Vec<usize> {
    let mut stack = Vec::new();
    let mut next = 1;
    let mut out = Vec::with_capacity(word.len() / 2);
    for &push in word {
        if push {
            stack.push(next);
            next += 1;
        } else {
            out.push(stack.pop().expect("balanced word"));
        }
    }
    out
}

/// Random permutation of length `n` avoiding `target`.
///
/// A uniform push/pop word drives a stack fed with `1..=n`; the popped
/// sequence avoids 312 and is mapped to the target by a symmetry.
pub fn gen_stack_family(n: usize, target: StackTarget, seed: Seed) -> Pattern {
    let mut rng = rng(seed);
    let out =
        Pattern::new(stack_output(&dyck_word(n, &mut rng))).expect("stack output is a permutation");
    match target {
        StackTarget::P312 => out,
        StackTarget::P231 => out.inverse(),
        StackTarget::P132 => out.complement(),
        StackTarget::P213 => out.reverse(),
    }
}

/// Random interleaving of `t` increasing blocks of consecutive values; avoids
/// the decreasing pattern of length `t + 1`.
pub fn gen_layered_runs(n: usize, t: usize, seed: Seed) -> Result<Pattern> {
    if t == 0 {
        return Err(Error::OutOfRange {
            what: "t",
            value: 0,
            expected: ">= 1".into(),
        });
    }
    let mut rng = rng(seed);
    let mut labels: Vec<usize> = (0..t)
        .flat_map(|b| std::iter::repeat_n(b, block_size(n, t, b)))
        .collect();
    labels.shuffle(&mut rng);
    let mut next: Vec<usize> = (0..t).map(|b| block_start(n, t, b)).collect();
    let entries = labels
        .into_iter()
        .map(|b| {
            next[b] += 1;
            next[b]
        })
        .collect();
    Pattern::new(entries)
}

fn block_size(n: usize, t: usize, b: usize) -> usize {
    n / t + usize::from(b < n % t)
}

/// Number of values below block `b`.
fn block_start(n: usize, t: usize, b: usize) -> usize {
    b * (n / t) + b.min(n % t)
}

/// Uniform random element of `Av_n(p)` for `n <= 10`, by rejection.
pub fn gen_rejection(p: &Pattern, n: usize, seed: Seed) -> Result<Pattern> {
    if n > REJECTION_MAX_N {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as u128,
            expected: format!("<= {REJECTION_MAX_N}"),
        });
    }
    let mut rng = rng(seed);
    let mut s: Vec<usize> = (1..=n).collect();
    for _ in 0..REJECTION_MAX_TRIES {
        s.shuffle(&mut rng);
        if !contains_pattern(&s, p) {
            return Pattern::new(s);
        }
    }
    Err(Error::ResourceLimit(format!(
        "no avoider of {p} among {REJECTION_MAX_TRIES} samples of length {n}"
    )))
}

/// Cuts `s` into consecutive blocks of length `block` (the last may be
/// shorter) and stably sorts each into a run. Ties are broken by position in
/// `s`. Panics if `block == 0`.
pub fn partition_into_runs<V: Ord + Clone>(s: &[V], block: usize) -> Vec<Run<V>> {
    assert!(block >= 1, "block length must be at least 1");
    keyed(s)
        .chunks(block)
        .map(|c| {
            let mut c = c.to_vec();
            c.sort();
            Run::new(c)
        })
        .collect()
}

/// Maps the values `1..=n` of `perm` onto `1..=distinct` through a random
/// non-decreasing surjection. Strict order between images implies strict
/// order between preimages, so every pattern the input avoids is still
/// avoided.
pub fn inject_duplicates(perm: &Pattern, distinct: usize, seed: Seed) -> Vec<usize> {
    let n = perm.len();
    if n == 0 {
        return Vec::new();
    }
    let distinct = distinct.clamp(1, n);
    let mut rng = rng(seed);
    // A cut after value c (1 <= c < n) starts a new output value at c + 1.
    let mut cuts: Vec<usize> = index::sample(&mut rng, n - 1, distinct - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut image = vec![0; n + 1];
    let mut level = 1;
    let mut ci = 0;
    for (v, slot) in image.iter_mut().enumerate().skip(1) {
        if ci < cuts.len() && cuts[ci] < v {
            level += 1;
            ci += 1;
        }
        *slot = level;
    }
    perm.entries().iter().map(|&v| image[v]).collect()
}
