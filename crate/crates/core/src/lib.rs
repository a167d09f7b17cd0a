//! Sorting of pattern-avoiding sequences.
//!
//! A sequence that avoids some fixed permutation pattern can be sorted with a
//! linear number of comparisons, with a constant that depends on the pattern,
//! even when the pattern is not known. [`sort_pattern_avoiding`] does this by
//! sorting short blocks with decision trees found by enumeration
//! ([`treesort`]) and combining them with phased multi-way merging
//! ([`merge`]). The [`matrix`] module holds the brute-force 0/1 matrix
//! oracles used to check the merge engine's certificates, and [`generators`]
//! produces seeded pattern-avoiding inputs.

pub mod error;
pub mod generators;
pub mod matrix;
pub mod merge;
pub mod pattern;
pub mod sorter;
pub mod treesort;

pub use error::{Error, Result};
pub use pattern::{contains_pattern, keyed, Key, Pattern, SequenceData};
pub use sorter::{sort_pattern_avoiding, sort_pattern_avoiding_keys, SortReport, SorterConfig};
