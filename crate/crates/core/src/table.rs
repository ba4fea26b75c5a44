//! Tables of split mixed Hodge numbers `(n, i, p, q) -> dim`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

/// Which configuration space a table describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    /// `F(X, n)`
    Ordered,
    /// `Conf^n(X) = F(X, n) / S_n`
    Unordered,
}

/// Mixed Hodge numbers of a family of spaces, indexed by
/// `(n, cohomological degree i, p, q)`. Zero entries are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HodgeTable {
    pub rows: BTreeMap<(usize, usize, u32, u32), u64>,
}

impl HodgeTable {
    pub fn new() -> HodgeTable {
        HodgeTable::default()
    }

    pub fn add(&mut self, n: usize, i: usize, p: u32, q: u32, dim: u64) {
        if dim == 0 {
            return;
        }
        *self.rows.entry((n, i, p, q)).or_insert(0) += dim;
    }

    pub fn get(&self, n: usize, i: usize, p: u32, q: u32) -> u64 {
        self.rows.get(&(n, i, p, q)).copied().unwrap_or(0)
    }

    /// Betti numbers of the `n`-th space: sums over `(p, q)` per degree.
    pub fn betti(&self, n: usize) -> Vec<u64> {
        let mut out = Vec::new();
        for (&(m, i, _, _), &dim) in &self.rows {
            if m != n {
                continue;
            }
            if out.len() <= i {
                out.resize(i + 1, 0);
            }
            out[i] += dim;
        }
        out
    }

    /// Distinct weights `p + q` present in `H^i` of the `n`-th space.
    pub fn weights_at(&self, n: usize, i: usize) -> BTreeSet<u32> {
        self.rows
            .iter()
            .filter(|(&(m, j, _, _), _)| m == n && j == i)
            .map(|(&(_, _, p, q), _)| p + q)
            .collect()
    }

    /// Degrees with a nonzero entry for the `n`-th space.
    pub fn degrees(&self, n: usize) -> BTreeSet<usize> {
        self.rows
            .iter()
            .filter(|(&(m, _, _, _), _)| m == n)
            .map(|(&(_, i, _, _), _)| i)
            .collect()
    }

    pub fn max_n(&self) -> Option<usize> {
        self.rows.keys().map(|&(n, _, _, _)| n).max()
    }
}
