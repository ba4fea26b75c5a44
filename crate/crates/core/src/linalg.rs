//! Exact rational scalars and sparse matrices.
//!
//! Everything in the engine reduces to kernels, ranks and quotients of
//! matrices over Q. Arithmetic is exact (arbitrary-precision rationals),
//! elimination uses deterministic pivoting (first nonzero entry in row-major
//! order), so every basis produced here is reproducible run to run.

use num::{BigInt, BigRational, One, Zero};

/// Scalar type of the whole engine: arbitrary-precision rationals, always
/// reduced to lowest terms with positive denominator (`num` maintains both).
pub type Rational = BigRational;

/// Rational from an integer pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    assert!(den != 0, "zero denominator");
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(num: i64) -> Rational {
    Rational::from(BigInt::from(num))
}

/// Parses `"a/b"` or `"a"` into a rational.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| format!("invalid numerator in rational `{s}`"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| format!("invalid denominator in rational `{s}`"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in rational `{s}`"));
    }
    Ok(Rational::new(num, den))
}

/// Formats a rational as `"a/b"`, or `"a"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Sparse vector: `(position, value)` pairs sorted by position, values nonzero.
pub type SparseVec = Vec<(usize, Rational)>;

/// Adds `c * v` into `acc`, keeping `acc` sorted and free of zeros.
pub fn axpy(acc: &mut SparseVec, c: &Rational, v: &[(usize, Rational)]) {
    if c.is_zero() || v.is_empty() {
        return;
    }
    let mut out = Vec::with_capacity(acc.len() + v.len());
    let mut a = acc.iter().peekable();
    let mut b = v.iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some((ia, _)), Some((ib, _))) if ia < ib => {
                out.push(a.next().unwrap().clone());
            }
            (Some((ia, _)), Some((ib, _))) if ia > ib => {
                let (i, x) = b.next().unwrap();
                out.push((*i, c * x));
            }
            (Some(_), Some(_)) => {
                let (i, xa) = a.next().unwrap();
                let (_, xb) = b.next().unwrap();
                let sum = xa + c * xb;
                if !sum.is_zero() {
                    out.push((*i, sum));
                }
            }
            (Some(_), None) => out.push(a.next().unwrap().clone()),
            (None, Some(_)) => {
                let (i, x) = b.next().unwrap();
                out.push((*i, c * x));
            }
            (None, None) => break,
        }
    }
    *acc = out;
}

fn get(v: &[(usize, Rational)], pos: usize) -> Option<&Rational> {
    v.binary_search_by_key(&pos, |e| e.0).ok().map(|k| &v[k].1)
}

/// Sparse matrix over Q. Rows are sorted sparse vectors with no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    rows: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets.
    /// Duplicate positions are rejected, zero values dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        entries: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self, String> {
        let mut m = SparseMatrix::zero(nrows, ncols);
        for (r, c, v) in entries {
            if r >= nrows || c >= ncols {
                return Err(format!("entry ({r},{c}) out of bounds {nrows}x{ncols}"));
            }
            if v.is_zero() {
                continue;
            }
            match m.rows[r].binary_search_by_key(&c, |e| e.0) {
                Ok(_) => return Err(format!("duplicate entry at ({r},{c})")),
                Err(k) => m.rows[r].insert(k, (c, v)),
            }
        }
        Ok(m)
    }

    /// Builds the matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(nrows: usize, cols: &[SparseVec]) -> Self {
        let mut m = SparseMatrix::zero(nrows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col {
                m.rows[*i].push((j, v.clone()));
            }
        }
        // per-column insertion above appends in column order; restore row order
        for row in &mut m.rows {
            row.sort_by_key(|e| e.0);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rows(&self) -> &[SparseVec] {
        &self.rows
    }

    pub fn entry(&self, r: usize, c: usize) -> Rational {
        get(&self.rows[r], c).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut m = SparseMatrix::zero(self.ncols, self.nrows);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                m.rows[*c].push((r, v.clone()));
            }
        }
        m
    }

    /// Matrix-vector product; `v` is indexed by columns.
    pub fn apply(&self, v: &[(usize, Rational)]) -> SparseVec {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc = Rational::zero();
            // both sorted: merge walk
            let mut i = 0;
            let mut j = 0;
            while i < row.len() && j < v.len() {
                match row[i].0.cmp(&v[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        acc += &row[i].1 * &v[j].1;
                        i += 1;
                        j += 1;
                    }
                }
            }
            if !acc.is_zero() {
                out.push((r, acc));
            }
        }
        out
    }

    /// Composition `self * rhs`.
    pub fn matmul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, rhs.nrows, "shape mismatch in matmul");
        let rhs_t = rhs.transpose();
        let mut cols = Vec::with_capacity(rhs.ncols);
        for j in 0..rhs.ncols {
            cols.push(self.apply(&rhs_t.rows[j]));
        }
        SparseMatrix::from_columns(self.nrows, &cols)
    }

    /// Rank over Q.
    pub fn rank(&self) -> usize {
        RowEchelon::from_rows(self.ncols, self.rows.iter().cloned()).rank()
    }

    /// Basis of the right kernel `{v : M v = 0}`, one sparse vector per free
    /// column, listed in ascending free-column order.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        let ech = RowEchelon::from_rows(self.ncols, self.rows.iter().cloned());
        ech.kernel_basis()
    }
}

/// Reduced row echelon form accumulated row by row.
///
/// Rows are fully reduced against each other (leading coefficient 1, pivot
/// column cleared in all other rows), pivots recorded in ascending column
/// order. Insertion order of equal candidates decides pivots, which keeps
/// every downstream basis deterministic.
#[derive(Clone, Debug)]
pub struct RowEchelon {
    ncols: usize,
    /// (pivot column, row) sorted by pivot column.
    rows: Vec<(usize, SparseVec)>,
}

impl RowEchelon {
    pub fn new(ncols: usize) -> Self {
        RowEchelon {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(ncols: usize, rows: impl IntoIterator<Item = SparseVec>) -> Self {
        let mut ech = RowEchelon::new(ncols);
        for row in rows {
            ech.insert(row);
        }
        ech
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    /// Echelon rows (a basis of the row space), ascending pivot order.
    pub fn basis_rows(&self) -> impl Iterator<Item = &SparseVec> {
        self.rows.iter().map(|(_, r)| r)
    }

    /// Reduces `v` against the echelon rows: the result has no support on
    /// pivot columns and is congruent to `v` modulo the row space.
    pub fn reduce(&self, mut v: SparseVec) -> SparseVec {
        // pivot columns ascend, and reducing by a row only touches columns
        // >= its pivot plus already-cleared pivot columns, so one pass works
        for (p, row) in &self.rows {
            if let Some(c) = get(&v, *p) {
                let c = -c.clone();
                axpy(&mut v, &c, row);
            }
        }
        v
    }

    /// Reduces `v` and, if nonzero, installs it as a new echelon row.
    /// Returns the new pivot column, or `None` if `v` was in the row space.
    pub fn insert(&mut self, v: SparseVec) -> Option<usize> {
        let v = self.reduce(v);
        if v.is_empty() {
            return None;
        }
        let pivot = v[0].0;
        let lead = v[0].1.clone();
        let mut row: SparseVec = v
            .into_iter()
            .map(|(i, x)| (i, x / &lead))
            .collect();
        // clear the new pivot column from existing rows
        for (_, r) in &mut self.rows {
            if let Some(c) = get(r, pivot) {
                let c = -c.clone();
                axpy(r, &c, &row);
            }
        }
        row.shrink_to_fit();
        let k = self.rows.partition_point(|(p, _)| *p < pivot);
        self.rows.insert(k, (pivot, row));
        Some(pivot)
    }

    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Kernel of the matrix whose rows built this echelon form.
    pub fn kernel_basis(&self) -> Vec<SparseVec> {
        let pivot_set: Vec<usize> = self.pivots().collect();
        let mut kernel = Vec::new();
        for f in 0..self.ncols {
            if pivot_set.binary_search(&f).is_ok() {
                continue;
            }
            let mut v: SparseVec = Vec::new();
            for (p, row) in &self.rows {
                if let Some(c) = get(row, f) {
                    v.push((*p, -c.clone()));
                }
            }
            v.push((f, Rational::one()));
            v.sort_by_key(|e| e.0);
            kernel.push(v);
        }
        kernel
    }
}

/// Quotient of an ambient coordinate space by a subspace: representatives
/// completing the subspace to a basis, plus the projection onto them.
#[derive(Clone, Debug)]
pub struct Quotient {
    ambient_dim: usize,
    echelon: RowEchelon,
    free_cols: Vec<usize>,
}

impl Quotient {
    /// `subspace` vectors live in a coordinate space of dimension
    /// `ambient_dim`; representatives are the unit vectors on the non-pivot
    /// coordinates.
    pub fn new(ambient_dim: usize, subspace: impl IntoIterator<Item = SparseVec>) -> Self {
        let echelon = RowEchelon::from_rows(ambient_dim, subspace);
        let pivots: Vec<usize> = echelon.pivots().collect();
        let free_cols = (0..ambient_dim)
            .filter(|c| pivots.binary_search(c).is_err())
            .collect();
        Quotient {
            ambient_dim,
            echelon,
            free_cols,
        }
    }

    pub fn dim(&self) -> usize {
        self.free_cols.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Ambient coordinates of the representatives (unit vectors).
    pub fn representatives(&self) -> Vec<SparseVec> {
        self.free_cols
            .iter()
            .map(|&c| vec![(c, Rational::one())])
            .collect()
    }

    /// Coordinates of `v` in the representative basis, modulo the subspace.
    pub fn project(&self, v: SparseVec) -> SparseVec {
        let reduced = self.echelon.reduce(v);
        reduced
            .into_iter()
            .map(|(c, x)| {
                let k = self
                    .free_cols
                    .binary_search(&c)
                    .expect("reduced vector supported on a pivot column");
                (k, x)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(nrows: usize, ncols: usize, data: &[&[i64]]) -> SparseMatrix {
        let mut trips = Vec::new();
        for (r, row) in data.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if v != 0 {
                    trips.push((r, c, rat_int(v)));
                }
            }
        }
        SparseMatrix::from_triplets(nrows, ncols, trips).unwrap()
    }

    #[test]
    fn rank_identity() {
        let m = mat(2, 2, &[&[1, 0], &[0, 1]]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_zero_matrix() {
        let m = SparseMatrix::zero(3, 4);
        assert_eq!(m.rank(), 0);
    }

    #[test]
    fn rank_proportional_rows() {
        let m = mat(2, 2, &[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let m = mat(2, 2, &[&[1, 0], &[0, 1]]);
        assert!(m.kernel_basis().is_empty());
    }

    #[test]
    fn kernel_of_zero_is_full() {
        let m = SparseMatrix::zero(2, 3);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 3);
        for (f, v) in k.iter().enumerate() {
            assert_eq!(v, &vec![(f, rat_int(1))]);
        }
    }

    #[test]
    fn kernel_of_row_sum() {
        let m = mat(1, 2, &[&[1, 1]]);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 1);
        // proportional to (1, -1)
        let v = &k[0];
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].1, -v[1].1.clone());
    }

    #[test]
    fn quotient_line_in_plane() {
        let q = Quotient::new(2, vec![vec![(0, rat_int(1))]]);
        assert_eq!(q.dim(), 1);
        let p = q.project(vec![(0, rat_int(3)), (1, rat_int(5))]);
        assert_eq!(p, vec![(0, rat_int(5))]);
    }

    #[test]
    fn quotient_by_nothing_is_identity() {
        let q = Quotient::new(3, Vec::new());
        assert_eq!(q.dim(), 3);
        let v = vec![(0, rat_int(2)), (2, rat_int(7))];
        assert_eq!(q.project(v.clone()), v);
    }

    #[test]
    fn quotient_by_everything_is_trivial() {
        let q = Quotient::new(
            2,
            vec![
                vec![(0, rat_int(1)), (1, rat_int(1))],
                vec![(0, rat_int(1)), (1, rat_int(-1))],
            ],
        );
        assert_eq!(q.dim(), 0);
        assert!(q.project(vec![(0, rat_int(9)), (1, rat_int(4))]).is_empty());
    }

    #[test]
    fn projection_kills_subspace_and_fixes_representatives() {
        let sub = vec![vec![(0, rat_int(1)), (1, rat_int(2)), (2, rat_int(3))]];
        let q = Quotient::new(3, sub.clone());
        assert!(q.project(sub[0].clone()).is_empty());
        for (k, rep) in q.representatives().into_iter().enumerate() {
            assert_eq!(q.project(rep), vec![(k, rat_int(1))]);
        }
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-2").unwrap(), rat_int(-2));
        assert_eq!(parse_rational("4/-6").unwrap(), rat(-2, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-2, 3)), "-2/3");
        assert_eq!(format_rational(&rat_int(5)), "5");
    }

    proptest! {
        #[test]
        fn rank_plus_kernel_dim_is_ncols(
            entries in proptest::collection::vec((0usize..5, 0usize..6, -4i64..5), 0..18)
        ) {
            let mut seen = std::collections::BTreeSet::new();
            let trips: Vec<_> = entries
                .into_iter()
                .filter(|(r, c, _)| seen.insert((*r, *c)))
                .map(|(r, c, v)| (r, c, rat_int(v)))
                .collect();
            let m = SparseMatrix::from_triplets(5, 6, trips).unwrap();
            let rank = m.rank();
            let kernel = m.kernel_basis();
            prop_assert_eq!(rank + kernel.len(), 6);
            for v in &kernel {
                prop_assert!(m.apply(v).is_empty());
            }
        }

        #[test]
        fn rank_equals_transpose_rank(
            entries in proptest::collection::vec((0usize..4, 0usize..4, -3i64..4), 0..12)
        ) {
            let mut seen = std::collections::BTreeSet::new();
            let trips: Vec<_> = entries
                .into_iter()
                .filter(|(r, c, _)| seen.insert((*r, *c)))
                .map(|(r, c, v)| (r, c, rat_int(v)))
                .collect();
            let m = SparseMatrix::from_triplets(4, 4, trips).unwrap();
            prop_assert_eq!(m.rank(), m.transpose().rank());
        }
    }
}
