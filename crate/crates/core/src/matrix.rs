//! Brute-force combinatorics over 0/1 matrices.
//!
//! Columns and rows are 1-based and rows are numbered bottom to top, so the
//! matrix of a permutation `p` has a one at `(i, p[i])`. Everything in here is
//! exhaustive search sized for verification work, not production use.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pattern::{contains_pattern, Pattern};

/// A dense 0/1 matrix with `cols` columns and `rows` rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    cols: usize,
    rows: usize,
    // column-major, cell (c, r) at (c - 1) * rows + (r - 1)
    cells: Vec<bool>,
}

impl BinaryMatrix {
    pub fn zeros(cols: usize, rows: usize) -> Self {
        BinaryMatrix {
            cols,
            rows,
            cells: vec![false; cols * rows],
        }
    }

    pub fn from_cells<I>(cols: usize, rows: usize, ones: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = BinaryMatrix::zeros(cols, rows);
        for (c, r) in ones {
            if c == 0 || c > cols || r == 0 || r > rows {
                return Err(Error::OutOfRange {
                    what: "matrix cell",
                    value: (c as u128) << 64 | r as u128,
                    expected: format!("columns 1..={cols}, rows 1..={rows}"),
                });
            }
            m.set(c, r, true);
        }
        Ok(m)
    }

    /// The permutation matrix of `p`.
    pub fn from_permutation(p: &Pattern) -> Self {
        let k = p.len();
        let mut m = BinaryMatrix::zeros(k, k);
        for (i, &e) in p.entries().iter().enumerate() {
            m.set(i + 1, e, true);
        }
        m
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    fn index(&self, col: usize, row: usize) -> usize {
        assert!(
            (1..=self.cols).contains(&col) && (1..=self.rows).contains(&row),
            "cell ({col}, {row}) outside a {}x{} matrix",
            self.cols,
            self.rows
        );
        (col - 1) * self.rows + (row - 1)
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[self.index(col, row)]
    }

    pub fn set(&mut self, col: usize, row: usize, one: bool) {
        let i = self.index(col, row);
        self.cells[i] = one;
    }

    /// The 1-entries in column-major order from the bottom-left corner.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let rows = self.rows;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / rows + 1, i % rows + 1))
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    /// Rows of 1-entries per column, ascending.
    fn column_rows(&self) -> Vec<Vec<usize>> {
        (1..=self.cols)
            .map(|c| (1..=self.rows).filter(|&r| self.get(c, r)).collect())
            .collect()
    }

    /// The permutation this matrix encodes, if it is a permutation matrix.
    pub fn as_permutation(&self) -> Option<Pattern> {
        if self.cols != self.rows || self.cols == 0 {
            return None;
        }
        let entries: Option<Vec<usize>> = self
            .column_rows()
            .into_iter()
            .map(|rows| if rows.len() == 1 { Some(rows[0]) } else { None })
            .collect();
        Pattern::new(entries?).ok()
    }
}

/// Top row first, `*` for ones and `.` for zeros.
impl fmt::Display for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in (1..=self.rows).rev() {
            for c in 1..=self.cols {
                f.write_str(if self.get(c, r) { "*" } else { "." })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Whether `m` contains `p`: some choice of increasing columns and increasing
/// rows of `m` covers every 1-entry of `p` with a 1-entry of `m`.
pub fn matrix_contains(m: &BinaryMatrix, p: &BinaryMatrix) -> bool {
    match p.as_permutation() {
        Some(pattern) => contains_permutation(m, &pattern),
        None => contains_general(m, p),
    }
}

/// Containment of a permutation matrix: pick one 1-entry per pattern column in
/// strictly increasing columns, with rows in the pattern's relative order.
pub fn contains_permutation(m: &BinaryMatrix, p: &Pattern) -> bool {
    let by_col = m.column_rows();
    let mut chosen = Vec::with_capacity(p.len());
    place_points(&by_col, p.entries(), &mut chosen, 0, m.cols, None)
}

// Chooses points for the pattern positions not covered by `tail`. When `tail`
// is set it is the point for the last pattern position and every chosen point
// must lie in a column before it.
fn place_points(
    by_col: &[Vec<usize>],
    p: &[usize],
    chosen: &mut Vec<(usize, usize)>,
    first_col: usize,
    col_end: usize,
    tail: Option<(usize, usize)>,
) -> bool {
    let j = chosen.len();
    let free = if tail.is_some() { p.len() - 1 } else { p.len() };
    if j == free {
        return true;
    }
    let need = free - j;
    if col_end < first_col + need {
        return false;
    }
    for c in first_col..=col_end - need {
        for &r in &by_col[c] {
            let consistent = chosen
                .iter()
                .enumerate()
                .all(|(t, &(_, rt))| r.cmp(&rt) == p[j].cmp(&p[t]))
                && tail.is_none_or(|(_, rt)| r.cmp(&rt) == p[j].cmp(&p[p.len() - 1]));
            if consistent {
                chosen.push((c, r));
                if place_points(by_col, p, chosen, c + 1, col_end, tail) {
                    return true;
                }
                chosen.pop();
            }
        }
    }
    false
}

/// Whether some occurrence of `p` in `m` ends at the 1-entry `(col, row)`,
/// assuming `(col, row)` is the last 1-entry of `m` in column-major order.
fn completes_occurrence(by_col: &[Vec<usize>], p: &Pattern, col: usize, row: usize) -> bool {
    if p.len() > col {
        return false;
    }
    let mut chosen = Vec::with_capacity(p.len());
    place_points(
        by_col,
        p.entries(),
        &mut chosen,
        0,
        col - 1,
        Some((col, row)),
    )
}

/// Containment of an arbitrary pattern matrix: enumerate increasing column
/// embeddings, then place rows greedily bottom to top.
fn contains_general(m: &BinaryMatrix, p: &BinaryMatrix) -> bool {
    if p.cols > m.cols || p.rows > m.rows {
        return false;
    }
    let p_cols = p.column_rows();
    let mut cols = Vec::with_capacity(p.cols);
    embed_columns(m, p, &p_cols, &mut cols)
}

fn embed_columns(
    m: &BinaryMatrix,
    p: &BinaryMatrix,
    p_cols: &[Vec<usize>],
    cols: &mut Vec<usize>,
) -> bool {
    let i = cols.len();
    if i == p.cols {
        return rows_fit(m, p, cols);
    }
    let start = cols.last().map_or(1, |&c| c + 1);
    let need = p.cols - i;
    if m.cols + 1 < start + need {
        return false;
    }
    for c in start..=m.cols + 1 - need {
        let ones_in_col = (1..=m.rows).filter(|&r| m.get(c, r)).count();
        if ones_in_col < p_cols[i].len() {
            continue;
        }
        cols.push(c);
        if embed_columns(m, p, p_cols, cols) {
            return true;
        }
        cols.pop();
    }
    false
}

// With columns fixed, each pattern row's feasibility depends only on its own
// image, so taking the lowest feasible row each time is optimal.
fn rows_fit(m: &BinaryMatrix, p: &BinaryMatrix, cols: &[usize]) -> bool {
    let mut next = 1;
    for pr in 1..=p.rows {
        let hit = (next..=m.rows)
            .find(|&r| (1..=p.cols).all(|pc| !p.get(pc, pr) || m.get(cols[pc - 1], r)));
        match hit {
            Some(r) => next = r + 1,
            None => return false,
        }
    }
    true
}

/// Size caps for the exhaustive counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest side length accepted by [`ex_brute`].
    pub ex_max_n: usize,
    /// Largest permutation length accepted by [`count_avoiders`].
    pub avoiders_max_n: usize,
    /// Largest side length accepted by [`count_t`].
    pub t_max_side: usize,
    /// Largest number of 1-entries accepted by [`count_t`].
    pub t_max_ones: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            ex_max_n: 5,
            avoiders_max_n: 10,
            t_max_side: 4,
            t_max_ones: 6,
        }
    }
}

/// Maximum number of 1-entries in an `n x n` matrix avoiding `p`.
///
/// Branch and bound over cells in column-major order from the bottom-left:
/// each cell is either added (if no occurrence of `p` appears) or skipped, and
/// a branch is cut when even filling every remaining cell cannot beat the best
/// matrix found so far.
pub fn ex_brute(p: &Pattern, n: usize, limits: &OracleLimits) -> Result<usize> {
    if n > limits.ex_max_n {
        return Err(Error::ResourceLimit(format!(
            "ex with n = {n} exceeds the cap of {}",
            limits.ex_max_n
        )));
    }
    let mut search = ExSearch {
        p,
        n,
        by_col: vec![Vec::new(); n],
        best: 0,
    };
    search.run(0, 0);
    Ok(search.best)
}

struct ExSearch<'a> {
    p: &'a Pattern,
    n: usize,
    by_col: Vec<Vec<usize>>,
    best: usize,
}

impl ExSearch<'_> {
    fn run(&mut self, cell: usize, ones: usize) {
        let total = self.n * self.n;
        if ones + (total - cell) <= self.best {
            return;
        }
        if cell == total {
            self.best = ones;
            return;
        }
        let (c, r) = (cell / self.n, cell % self.n + 1);
        self.by_col[c].push(r);
        if !completes_occurrence(&self.by_col, self.p, c + 1, r) {
            self.run(cell + 1, ones + 1);
        }
        self.by_col[c].pop();
        self.run(cell + 1, ones);
    }
}

/// `|Av_n(p)|`, by filtering all `n!` permutations.
pub fn count_avoiders(p: &Pattern, n: usize, limits: &OracleLimits) -> Result<BigUint> {
    if n > limits.avoiders_max_n {
        return Err(Error::ResourceLimit(format!(
            "enumerating permutations of length {n} exceeds the cap of {}",
            limits.avoiders_max_n
        )));
    }
    if n == 0 {
        return Ok(BigUint::one());
    }
    let count = Pattern::all(n)
        .filter(|s| !contains_pattern(s.entries(), p))
        .count();
    Ok(BigUint::from(count))
}

/// Number of `m x m` matrices with exactly `n` 1-entries that avoid `p`.
///
/// Enumerates cell subsets in column-major order; a partial subset that
/// already contains `p` is dropped together with all its extensions.
pub fn count_t(p: &Pattern, m: usize, n: usize, limits: &OracleLimits) -> Result<BigUint> {
    if m > limits.t_max_side || n > limits.t_max_ones {
        return Err(Error::ResourceLimit(format!(
            "counting {m}x{m} matrices with {n} ones exceeds the caps ({}x{}, {} ones)",
            limits.t_max_side, limits.t_max_side, limits.t_max_ones
        )));
    }
    if n > m * m {
        return Ok(BigUint::zero());
    }
    let mut search = TSearch {
        p,
        m,
        target: n,
        by_col: vec![Vec::new(); m],
        count: BigUint::zero(),
    };
    search.run(0, 0);
    Ok(search.count)
}

struct TSearch<'a> {
    p: &'a Pattern,
    m: usize,
    target: usize,
    by_col: Vec<Vec<usize>>,
    count: BigUint,
}

impl TSearch<'_> {
    fn run(&mut self, cell: usize, ones: usize) {
        if ones == self.target {
            self.count += 1u32;
            return;
        }
        let total = self.m * self.m;
        if total - cell < self.target - ones {
            return;
        }
        let (c, r) = (cell / self.m, cell % self.m + 1);
        self.by_col[c].push(r);
        if !completes_occurrence(&self.by_col, self.p, c + 1, r) {
            self.run(cell + 1, ones + 1);
        }
        self.by_col[c].pop();
        self.run(cell + 1, ones);
    }
}
