//! Rectangular linear sum assignment.
//!
//! The solver pads to a square problem, runs the shortest-augmenting-path
//! Hungarian method with row/column potentials, then walks the equality graph
//! (edges with zero reduced cost) to pick the lexicographically smallest of
//! all optimal assignments.
//!
//! Entries at or above the matrix sentinel are forbidden. They are costed
//! lexicographically: an assignment using fewer forbidden entries always
//! wins, and only then is the finite cost compared. This is what a large
//! finite sentinel is meant to approximate, without the sentinel swamping the
//! precision of the finite costs.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use core::cmp::Ordering;
use core::ops::{Add, Sub};

use crate::error::{Error, Result};

/// Marker value for forbidden entries.
pub const DEFAULT_SENTINEL: f64 = 1e12;

/// Dense `rows × cols` matrix of nonnegative costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
    sentinel: f64,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, costs: Vec<f64>) -> Result<Self> {
        Self::with_sentinel(rows, cols, costs, DEFAULT_SENTINEL)
    }

    pub fn with_sentinel(rows: usize, cols: usize, costs: Vec<f64>, sentinel: f64) -> Result<Self> {
        if rows.checked_mul(cols) != Some(costs.len()) {
            return Err(Error::InvalidShape {
                height: rows,
                width: cols,
                len: costs.len(),
            });
        }
        if costs.iter().any(|c| c.is_nan() || *c < 0.0) {
            return Err(Error::InvalidConfig("costs must be nonnegative and not NaN"));
        }
        if sentinel.is_nan() || sentinel <= 0.0 {
            return Err(Error::InvalidConfig("sentinel must be positive"));
        }
        Ok(Self {
            rows,
            cols,
            costs,
            sentinel,
        })
    }

    /// Builds a matrix from a row-major closure.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut costs = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                costs.push(f(r, c));
            }
        }
        Self::new(rows, cols, costs)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sentinel(&self) -> f64 {
        self.sentinel
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.cols + col]
    }

    pub fn is_forbidden(&self, row: usize, col: usize) -> bool {
        self.get(row, col) >= self.sentinel
    }

    /// Sum of the entries named by `pairs`, in the order given.
    pub fn total(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs.iter().map(|&(r, c)| self.get(r, c)).sum()
    }
}

/// Cost with a forbidden-entry count that dominates the finite part.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    forbidden: i64,
    finite: f64,
}

impl Cost {
    const ZERO: Cost = Cost {
        forbidden: 0,
        finite: 0.0,
    };
    const INF: Cost = Cost {
        forbidden: i64::MAX / 4,
        finite: 0.0,
    };

    fn lt(self, other: Cost) -> bool {
        self.cmp_total(other) == Ordering::Less
    }

    fn cmp_total(self, other: Cost) -> Ordering {
        self.forbidden
            .cmp(&other.forbidden)
            .then(self.finite.total_cmp(&other.finite))
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, o: Cost) -> Cost {
        Cost {
            forbidden: self.forbidden + o.forbidden,
            finite: self.finite + o.finite,
        }
    }
}

impl Sub for Cost {
    type Output = Cost;
    fn sub(self, o: Cost) -> Cost {
        Cost {
            forbidden: self.forbidden - o.forbidden,
            finite: self.finite - o.finite,
        }
    }
}

struct Square {
    n: usize,
    cells: Vec<Cost>,
}

impl Square {
    fn from_matrix(m: &CostMatrix) -> Self {
        let n = m.rows.max(m.cols);
        let mut cells = vec![Cost::ZERO; n * n];
        for r in 0..m.rows {
            for c in 0..m.cols {
                let v = m.get(r, c);
                cells[r * n + c] = if v >= m.sentinel {
                    Cost {
                        forbidden: 1,
                        finite: 0.0,
                    }
                } else {
                    Cost {
                        forbidden: 0,
                        finite: v,
                    }
                };
            }
        }
        Square { n, cells }
    }

    fn at(&self, r: usize, c: usize) -> Cost {
        self.cells[r * self.n + c]
    }
}

/// Hungarian method; returns `(row_to_col, u, v)` with 1-based potentials.
fn hungarian(sq: &Square) -> (Vec<usize>, Vec<Cost>, Vec<Cost>) {
    let n = sq.n;
    let mut u = vec![Cost::ZERO; n + 1];
    let mut v = vec![Cost::ZERO; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![Cost::INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = Cost::INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = sq.at(i0 - 1, j - 1) - u[i0] - v[j];
                if cur.lt(minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j].lt(delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] = u[owner[j]] + delta;
                    v[j] = v[j] - delta;
                } else {
                    minv[j] = minv[j] - delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[owner[j] - 1] = j - 1;
    }
    (row_to_col, u, v)
}

/// Rewrites an optimal matching into the lexicographically smallest perfect
/// matching of the equality graph.
fn lexicographic_min(tight: &[bool], n: usize, row_to_col: &mut [usize]) {
    let mut col_to_row = vec![0usize; n];
    for (r, &c) in row_to_col.iter().enumerate() {
        col_to_row[c] = r;
    }
    // `next_col[r]` is the column row `r` moves to on a path ending at the freed column.
    let mut next_col = vec![usize::MAX; n];
    let mut reaches = vec![false; n];
    let mut queue = VecDeque::new();

    for i in 0..n {
        let freed = row_to_col[i];
        reaches.iter_mut().for_each(|x| *x = false);
        queue.clear();
        // Reverse BFS over unfixed rows (> i): which rows can shift toward `freed`?
        queue.push_back(freed);
        while let Some(col) = queue.pop_front() {
            for r in (i + 1)..n {
                if !reaches[r] && tight[r * n + col] && row_to_col[r] != col {
                    reaches[r] = true;
                    next_col[r] = col;
                    queue.push_back(row_to_col[r]);
                }
            }
        }
        let best = (0..freed).find(|&c| tight[i * n + c] && col_to_row[c] > i && reaches[col_to_row[c]]);
        if let Some(target) = best {
            let mut chain = vec![(i, target)];
            let mut r = col_to_row[target];
            loop {
                let c = next_col[r];
                chain.push((r, c));
                if c == freed {
                    break;
                }
                r = col_to_row[c];
            }
            for (r, c) in chain {
                row_to_col[r] = c;
                col_to_row[c] = r;
            }
        }
    }
}

/// Minimum-cost assignment of `min(rows, cols)` disjoint `(row, col)` pairs,
/// sorted by row. Among optimal assignments the lexicographically smallest
/// pair list is returned.
pub fn solve_assignment(costs: &CostMatrix) -> Vec<(usize, usize)> {
    if costs.rows == 0 || costs.cols == 0 {
        return Vec::new();
    }
    let sq = Square::from_matrix(costs);
    let n = sq.n;
    let (mut row_to_col, u, v) = hungarian(&sq);

    let scale = costs
        .costs
        .iter()
        .filter(|c| **c < costs.sentinel)
        .fold(0.0f64, |m, &c| m.max(c));
    let eps = 1e-9 * (1.0 + scale);
    let mut tight = vec![false; n * n];
    for r in 0..n {
        for c in 0..n {
            let reduced = sq.at(r, c) - u[r + 1] - v[c + 1];
            tight[r * n + c] = reduced.forbidden == 0 && reduced.finite.abs() <= eps;
        }
        tight[r * n + row_to_col[r]] = true;
    }
    lexicographic_min(&tight, n, &mut row_to_col);

    row_to_col
        .iter()
        .enumerate()
        .filter(|&(r, &c)| r < costs.rows && c < costs.cols)
        .map(|(r, &c)| (r, c))
        .collect()
}
