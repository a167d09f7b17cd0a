//! Keys, permutations and brute-force pattern containment.
//!
//! Every element that flows through the sorter is wrapped in a [`Key`], which
//! pairs the input value with its position in the input. Comparing keys
//! lexicographically makes the order strict even when values repeat, and a
//! sort by key is a stable sort by value.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An input value tagged with its original position.
///
/// The derived ordering compares `value` first and `tie` second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key<V> {
    pub value: V,
    pub tie: usize,
}

impl<V> Key<V> {
    pub fn new(value: V, tie: usize) -> Self {
        Key { value, tie }
    }
}

/// Tags `values` with their 0-based positions.
pub fn keyed<V: Clone>(values: &[V]) -> Vec<Key<V>> {
    values
        .iter()
        .enumerate()
        .map(|(tie, v)| Key::new(v.clone(), tie))
        .collect()
}

/// An input sequence in key form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceData<V> {
    elements: Vec<Key<V>>,
}

impl<V: Clone> SequenceData<V> {
    pub fn from_values(values: &[V]) -> Self {
        SequenceData {
            elements: keyed(values),
        }
    }
}

impl<V> SequenceData<V> {
    pub fn elements(&self) -> &[Key<V>] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<Key<V>> {
        self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// True when the tie indices are consecutive, i.e. the keys form a
    /// contiguous slice of the original input in input order.
    pub fn is_contiguous(&self) -> bool {
        self.elements.windows(2).all(|w| w[1].tie == w[0].tie + 1)
    }
}

/// A permutation of `1..=k`, stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Pattern {
    entries: Vec<usize>,
}

impl Pattern {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        let k = entries.len();
        if k == 0 {
            return Err(Error::InvalidPattern("empty pattern".into()));
        }
        let mut seen = vec![false; k + 1];
        for &e in &entries {
            if e == 0 || e > k || seen[e] {
                return Err(Error::InvalidPattern(format!("{entries:?}")));
            }
            seen[e] = true;
        }
        Ok(Pattern { entries })
    }

    pub fn identity(k: usize) -> Self {
        assert!(k >= 1, "pattern length must be at least 1");
        Pattern {
            entries: (1..=k).collect(),
        }
    }

    /// The decreasing permutation `k, k-1, ..., 1`.
    pub fn decreasing(k: usize) -> Self {
        assert!(k >= 1, "pattern length must be at least 1");
        Pattern {
            entries: (1..=k).rev().collect(),
        }
    }

    /// Relative order of distinct values, e.g. `(7, 2, 3)` becomes `(3, 1, 2)`.
    pub fn standardize<V: Ord>(values: &[V]) -> Result<Self> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].cmp(&values[b]));
        if idx.windows(2).any(|w| values[w[0]] == values[w[1]]) {
            return Err(Error::InvalidPattern("repeated values".into()));
        }
        let mut entries = vec![0; values.len()];
        for (rank, &i) in idx.iter().enumerate() {
            entries[i] = rank + 1;
        }
        Pattern::new(entries)
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn inverse(&self) -> Pattern {
        inverse(self)
    }

    pub fn reverse(&self) -> Pattern {
        Pattern {
            entries: self.entries.iter().rev().copied().collect(),
        }
    }

    pub fn complement(&self) -> Pattern {
        let k = self.len() + 1;
        Pattern {
            entries: self.entries.iter().map(|&e| k - e).collect(),
        }
    }

    /// Lexicographic successor among permutations of the same length.
    pub fn next_lexicographic(&self) -> Option<Pattern> {
        let mut e = self.entries.clone();
        let i = (0..e.len().saturating_sub(1))
            .rev()
            .find(|&i| e[i] < e[i + 1])?;
        let j = (i + 1..e.len()).rev().find(|&j| e[j] > e[i])?;
        e.swap(i, j);
        e[i + 1..].reverse();
        Some(Pattern { entries: e })
    }

    /// All permutations of length `k` in lexicographic order.
    pub fn all(k: usize) -> impl Iterator<Item = Pattern> {
        std::iter::successors(Some(Pattern::identity(k)), Pattern::next_lexicographic)
    }
}

impl TryFrom<Vec<usize>> for Pattern {
    type Error = Error;

    fn try_from(entries: Vec<usize>) -> Result<Self> {
        Pattern::new(entries)
    }
}

impl From<Pattern> for Vec<usize> {
    fn from(p: Pattern) -> Self {
        p.entries
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Parses `"2,3,1"`, `"2 3 1"` or the compact `"231"` (lengths below 10 only).
impl FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        let entries: Vec<usize> = if parts.len() == 1 && parts[0].len() > 1 {
            parts[0]
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as usize))
                .collect::<Option<_>>()
                .ok_or_else(|| Error::InvalidPattern(s.to_string()))?
        } else {
            parts
                .iter()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidPattern(s.to_string()))?
        };
        Pattern::new(entries)
    }
}

/// Whether `a` and `b` have the same length and the same pairwise order
/// relations (`<`, `=`, `>`) at every index pair.
pub fn is_order_isomorphic<A: Ord, B: Ord>(a: &[A], b: &[B]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    (0..a.len()).all(|i| (0..a.len()).all(|j| a[i].cmp(&a[j]) == b[i].cmp(&b[j])))
}

/// Whether some subsequence of `s` is order-isomorphic to `p`.
///
/// Depth-first search that extends a partial occurrence left to right and
/// abandons it as soon as the new element breaks the order relations. This is
/// exponential in `p.len()` and only meant as an oracle for short inputs.
/// Monotone patterns are decided by a longest-monotone-subsequence scan.
pub fn contains_pattern<V: Ord>(s: &[V], p: &Pattern) -> bool {
    let e = p.entries();
    if e.windows(2).all(|w| w[0] < w[1]) {
        return longest_monotone(s.iter(), |a, b| a < b) >= e.len();
    }
    if e.windows(2).all(|w| w[0] > w[1]) {
        return longest_monotone(s.iter(), |a, b| a > b) >= e.len();
    }
    let mut chosen = Vec::with_capacity(p.len());
    extend_occurrence(s, p.entries(), &mut chosen, 0)
}

/// Length of the longest subsequence whose consecutive elements satisfy
/// `before`, a strict order.
fn longest_monotone<'a, V: 'a>(
    s: impl Iterator<Item = &'a V>,
    before: impl Fn(&V, &V) -> bool,
) -> usize {
    // tails[i]: best last element of a chain of length i + 1.
    let mut tails: Vec<&V> = Vec::new();
    for x in s {
        let at = tails.partition_point(|t| before(t, x));
        if at == tails.len() {
            tails.push(x);
        } else {
            tails[at] = x;
        }
    }
    tails.len()
}

fn extend_occurrence<V: Ord>(s: &[V], p: &[usize], chosen: &mut Vec<usize>, start: usize) -> bool {
    let j = chosen.len();
    if j == p.len() {
        return true;
    }
    let need = p.len() - j;
    if s.len() < start + need {
        return false;
    }
    for i in start..=s.len() - need {
        let fits = chosen.iter().enumerate().all(|(t, &c)| {
            let want = p[j].cmp(&p[t]);
            s[i].cmp(&s[c]) == want
        });
        if fits {
            chosen.push(i);
            if extend_occurrence(s, p, chosen, i + 1) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// The inverse permutation: `tau[sigma[i]] = i`.
pub fn inverse(sigma: &Pattern) -> Pattern {
    let mut entries = vec![0; sigma.len()];
    for (i, &e) in sigma.entries().iter().enumerate() {
        entries[e - 1] = i + 1;
    }
    Pattern { entries }
}

/// `k!`, or `None` on overflow.
pub fn factorial(k: usize) -> Option<u64> {
    (1..=k as u64).try_fold(1u64, |acc, i| acc.checked_mul(i))
}

/// Lexicographic rank of `p` among the permutations of its length.
///
/// Panics if `p.len() > 20`, where the rank no longer fits in 64 bits.
pub fn perm_rank(p: &Pattern) -> u64 {
    let e = p.entries();
    let k = e.len();
    assert!(
        k <= 20,
        "rank of a permutation longer than 20 overflows u64"
    );
    let mut rank = 0u64;
    for i in 0..k {
        let smaller_later = e[i + 1..].iter().filter(|&&x| x < e[i]).count() as u64;
        rank += smaller_later * factorial(k - 1 - i).unwrap();
    }
    rank
}

/// The permutation of length `k` with lexicographic rank `r`.
pub fn perm_unrank(r: u64, k: usize) -> Result<Pattern> {
    let total = match factorial(k) {
        Some(t) if k >= 1 => t,
        _ => {
            return Err(Error::OutOfRange {
                what: "permutation length",
                value: k as u128,
                expected: "1..=20".into(),
            })
        }
    };
    if r >= total {
        return Err(Error::OutOfRange {
            what: "permutation rank",
            value: r as u128,
            expected: format!("0..{total}"),
        });
    }
    let mut pool: Vec<usize> = (1..=k).collect();
    let mut rest = r;
    let mut entries = Vec::with_capacity(k);
    for i in 0..k {
        let f = factorial(k - 1 - i).unwrap();
        let digit = (rest / f) as usize;
        rest %= f;
        entries.push(pool.remove(digit));
    }
    Ok(Pattern { entries })
}
