//! The diagonal-plus-puncture arrangement on `X^n` and its intersection
//! lattice.
//!
//! Members are the diagonals `x_i = x_j` and the puncture loci `x_i = P^s`,
//! `1 <= s <= r`. A stratum is a nonempty intersection of members; it is
//! indexed by a coloring `[n] -> {0..r}` (0 = unconstrained) together with a
//! partition of the uncolored coordinates. The lattice is ordered by
//! inclusion of subvarieties, with top element `X^n` itself.

use std::collections::BTreeMap;

/// One member of the arrangement. Diagonals store `i < j`; punctures store a
/// color `1 <= s <= r`. Coordinates are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    /// `x_coord = P^color`
    Punct { coord: usize, color: usize },
    /// `x_i = x_j`
    Diag { i: usize, j: usize },
}

impl Generator {
    pub fn diag(i: usize, j: usize) -> Generator {
        assert!(i != j);
        Generator::Diag {
            i: i.min(j),
            j: i.max(j),
        }
    }

    /// Relabels coordinates by `perm` (coordinate `i` moves to `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Generator {
        match *self {
            Generator::Punct { coord, color } => Generator::Punct {
                coord: perm[coord],
                color,
            },
            Generator::Diag { i, j } => Generator::diag(perm[i], perm[j]),
        }
    }
}

impl std::fmt::Display for Generator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Generator::Punct { coord, color } => write!(f, "g_{}^{}", coord + 1, color),
            Generator::Diag { i, j } => write!(f, "g_{}{}", i + 1, j + 1),
        }
    }
}

/// Index into [`Arrangement::generators`]. The generator order (punctures
/// sorted by (color, coordinate), then diagonals lexicographically) is fixed
/// globally; NBC bases depend on it.
pub type GenId = usize;

/// A stratum `(coloring, partition)`. `blocks` lists the cells of the
/// partition of the uncolored coordinates (singletons included), each sorted,
/// ordered by minimum element — the canonical form used for identity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stratum {
    pub coloring: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl Stratum {
    /// The top stratum `X^n`: everything uncolored, partition discrete.
    pub fn top(n: usize) -> Stratum {
        Stratum {
            coloring: vec![0; n],
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.coloring.len()
    }

    /// Codimension divided by `dim_c X`: number of colored coordinates plus
    /// (number of uncolored coordinates minus number of blocks).
    pub fn rank(&self) -> usize {
        let colored = self.coloring.iter().filter(|&&c| c != 0).count();
        let uncolored = self.coloring.len() - colored;
        colored + (uncolored - self.blocks.len())
    }

    /// Block index of an uncolored coordinate.
    pub fn block_of(&self, coord: usize) -> Option<usize> {
        if self.coloring[coord] != 0 {
            return None;
        }
        self.blocks.iter().position(|b| b.contains(&coord))
    }

    /// Whether `x_i = x_j` holds identically on this stratum.
    pub fn coords_equal(&self, i: usize, j: usize) -> bool {
        if i == j {
            return true;
        }
        match (self.coloring[i], self.coloring[j]) {
            (0, 0) => self.block_of(i) == self.block_of(j),
            (a, b) => a == b && a != 0,
        }
    }

    /// Whether the constraint cut out by `g` holds identically here.
    pub fn satisfies(&self, g: &Generator) -> bool {
        match *g {
            Generator::Punct { coord, color } => self.coloring[coord] == color,
            Generator::Diag { i, j } => self.coords_equal(i, j),
        }
    }

    /// Containment of subvarieties: `self <= other` iff every constraint of
    /// `other` holds on `self`.
    pub fn leq(&self, other: &Stratum) -> bool {
        for (i, &c) in other.coloring.iter().enumerate() {
            if c != 0 && self.coloring[i] != c {
                return false;
            }
        }
        for block in &other.blocks {
            for w in block.windows(2) {
                if !self.coords_equal(w[0], w[1]) {
                    return false;
                }
            }
        }
        true
    }

    /// Canonical label, e.g. `chi=(1,0,0) blocks={2,3}`.
    pub fn label(&self) -> String {
        let chi: Vec<String> = self.coloring.iter().map(|c| c.to_string()).collect();
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .filter(|b| b.len() > 1)
            .map(|b| {
                format!(
                    "{{{}}}",
                    b.iter()
                        .map(|i| (i + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        if blocks.is_empty() {
            format!("chi=({})", chi.join(","))
        } else {
            format!("chi=({}) blocks={}", chi.join(","), blocks.join(""))
        }
    }
}

/// Computes the stratum cut out by a set of generators, or `None` when the
/// constraints are inconsistent (the intersection is empty).
pub fn stratum_of_generators(
    n: usize,
    gens: impl IntoIterator<Item = Generator>,
) -> Option<Stratum> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut color: Vec<usize> = vec![0; n];
    let mut pending_diag = Vec::new();
    for g in gens {
        match g {
            Generator::Punct { coord, color: s } => {
                let root = find(&mut parent, coord);
                if color[root] != 0 && color[root] != s {
                    return None;
                }
                color[root] = s;
            }
            Generator::Diag { i, j } => pending_diag.push((i, j)),
        }
    }
    for (i, j) in pending_diag {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        let merged_color = match (color[ri], color[rj]) {
            (0, c) | (c, 0) => c,
            (a, b) if a == b => a,
            _ => return None,
        };
        parent[rj] = ri;
        color[ri] = merged_color;
    }
    // canonicalize
    let mut coloring = vec![0; n];
    let mut block_map: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        if color[root] != 0 {
            coloring[i] = color[root];
        } else {
            block_map.entry(root).or_default().push(i);
        }
    }
    let mut blocks: Vec<Vec<usize>> = block_map.into_values().collect();
    blocks.sort_by_key(|b| b[0]);
    Some(Stratum { coloring, blocks })
}

/// The full arrangement for `(n, r)`: generators in the global order, all
/// strata with Moebius numbers, and the order relation.
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub n: usize,
    pub r: usize,
    pub generators: Vec<Generator>,
    /// Ascending by (rank, canonical form); index 0 is the top stratum.
    pub strata: Vec<Stratum>,
    index: BTreeMap<Stratum, usize>,
    /// Signed Moebius number `mu(F, top)` per stratum.
    pub mobius: Vec<i64>,
}

impl Arrangement {
    pub fn build(n: usize, r: usize) -> Arrangement {
        let mut generators = Vec::new();
        for color in 1..=r {
            for coord in 0..n {
                generators.push(Generator::Punct { coord, color });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                generators.push(Generator::Diag { i, j });
            }
        }

        let mut strata = Vec::new();
        enumerate_strata(n, r, &mut strata);
        strata.sort_by_key(|s| (s.rank(), s.clone()));
        let index: BTreeMap<Stratum, usize> = strata
            .iter()
            .enumerate()
            .map(|(k, s)| (s.clone(), k))
            .collect();

        // mu(F, top) by downward recursion over ranks
        let mut mobius = vec![0i64; strata.len()];
        for (k, f) in strata.iter().enumerate() {
            if f.rank() == 0 {
                mobius[k] = 1;
                continue;
            }
            let mut acc: i64 = 0;
            for (g_idx, g) in strata.iter().enumerate() {
                if g_idx != k && f.leq(g) {
                    acc += mobius[g_idx];
                }
            }
            mobius[k] = -acc;
        }

        Arrangement {
            n,
            r,
            generators,
            strata,
            index,
            mobius,
        }
    }

    pub fn gen_id(&self, g: &Generator) -> GenId {
        self.generators
            .iter()
            .position(|h| h == g)
            .expect("generator outside arrangement")
    }

    pub fn stratum_id(&self, s: &Stratum) -> usize {
        *self.index.get(s).expect("stratum outside lattice")
    }

    pub fn top_id(&self) -> usize {
        0
    }

    /// Stratum cut out by a set of generator ids; `None` when empty.
    pub fn stratum_of(&self, gens: &[GenId]) -> Option<usize> {
        let s = stratum_of_generators(self.n, gens.iter().map(|&g| self.generators[g]))?;
        Some(self.stratum_id(&s))
    }

    /// Members containing the stratum (the central subarrangement `A_F`).
    pub fn generators_on(&self, stratum: usize) -> Vec<GenId> {
        let s = &self.strata[stratum];
        (0..self.generators.len())
            .filter(|&g| s.satisfies(&self.generators[g]))
            .collect()
    }

    pub fn max_rank(&self) -> usize {
        self.strata.last().map(|s| s.rank()).unwrap_or(0)
    }

    /// Number of strata per rank.
    pub fn strata_by_rank(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.max_rank() + 1];
        for s in &self.strata {
            counts[s.rank()] += 1;
        }
        counts
    }
}

fn enumerate_strata(n: usize, r: usize, out: &mut Vec<Stratum>) {
    let mut coloring = vec![0usize; n];
    enumerate_colorings(n, r, 0, &mut coloring, out);
}

fn enumerate_colorings(
    n: usize,
    r: usize,
    pos: usize,
    coloring: &mut Vec<usize>,
    out: &mut Vec<Stratum>,
) {
    if pos == n {
        let uncolored: Vec<usize> = (0..n).filter(|&i| coloring[i] == 0).collect();
        for blocks in set_partitions(&uncolored) {
            out.push(Stratum {
                coloring: coloring.clone(),
                blocks,
            });
        }
        return;
    }
    for c in 0..=r {
        coloring[pos] = c;
        enumerate_colorings(n, r, pos + 1, coloring, out);
    }
    coloring[pos] = 0;
}

/// All set partitions of `items`, blocks sorted by minimum, canonical.
pub fn set_partitions(items: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let rest = &items[1..];
    let mut out = Vec::new();
    for mut partition in set_partitions(rest) {
        // insert `first` into each existing block, or as a new block
        for k in 0..partition.len() {
            let mut p = partition.clone();
            p[k].push(first);
            p[k].sort_unstable();
            p.sort_by_key(|b| b[0]);
            out.push(p);
        }
        partition.push(vec![first]);
        partition.sort_by_key(|b| b[0]);
        out.push(partition);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strata_count_n2_r1() {
        // chi=(0,0) with 2 partitions, chi=(1,0),(0,1),(1,1)
        let arr = Arrangement::build(2, 1);
        assert_eq!(arr.strata.len(), 5);
        assert_eq!(arr.strata_by_rank(), vec![1, 3, 1]);
    }

    #[test]
    fn strata_count_n1_r0() {
        let arr = Arrangement::build(1, 0);
        assert_eq!(arr.strata.len(), 1);
        assert_eq!(arr.strata[0].rank(), 0);
    }

    #[test]
    fn strata_count_n3_r0_is_bell() {
        let arr = Arrangement::build(3, 0);
        assert_eq!(arr.strata.len(), 5); // Bell(3)
        assert_eq!(arr.strata_by_rank(), vec![1, 3, 1]);
    }

    #[test]
    fn generator_order_punctures_then_diagonals() {
        let arr = Arrangement::build(3, 2);
        let expected = vec![
            Generator::Punct { coord: 0, color: 1 },
            Generator::Punct { coord: 1, color: 1 },
            Generator::Punct { coord: 2, color: 1 },
            Generator::Punct { coord: 0, color: 2 },
            Generator::Punct { coord: 1, color: 2 },
            Generator::Punct { coord: 2, color: 2 },
            Generator::diag(0, 1),
            Generator::diag(0, 2),
            Generator::diag(1, 2),
        ];
        assert_eq!(arr.generators, expected);
    }

    #[test]
    fn stratum_of_conflicting_colors_is_empty() {
        assert!(stratum_of_generators(
            2,
            vec![
                Generator::Punct { coord: 0, color: 1 },
                Generator::Punct { coord: 0, color: 2 },
            ],
        )
        .is_none());
        assert!(stratum_of_generators(
            2,
            vec![
                Generator::Punct { coord: 0, color: 1 },
                Generator::Punct { coord: 1, color: 2 },
                Generator::diag(0, 1),
            ],
        )
        .is_none());
    }

    #[test]
    fn rank_counts_constraints() {
        let s = stratum_of_generators(
            4,
            vec![Generator::diag(0, 1), Generator::Punct { coord: 2, color: 1 }],
        )
        .unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.coloring, vec![0, 0, 1, 0]);
        assert_eq!(s.blocks, vec![vec![0, 1], vec![3]]);
    }

    #[test]
    fn coloring_spreads_over_merged_blocks() {
        let s = stratum_of_generators(
            3,
            vec![Generator::diag(0, 1), Generator::Punct { coord: 1, color: 2 }],
        )
        .unwrap();
        assert_eq!(s.coloring, vec![2, 2, 0]);
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn mobius_of_braid_lattice() {
        // interval below the full-merge stratum of the braid arrangement has
        // |mu| = (n-1)!
        for n in 2..=5usize {
            let arr = Arrangement::build(n, 0);
            let bottom = arr.strata.last().unwrap();
            assert_eq!(bottom.rank(), n - 1);
            let mu = arr.mobius[arr.strata.len() - 1];
            let fact: i64 = (1..n as i64).product();
            assert_eq!(mu.unsigned_abs() as i64, fact);
            assert_eq!(mu.signum(), if (n - 1) % 2 == 0 { 1 } else { -1 });
        }
    }

    #[test]
    fn leq_is_constraint_containment() {
        let arr = Arrangement::build(3, 1);
        let top = &arr.strata[arr.top_id()];
        for s in &arr.strata {
            assert!(s.leq(top));
            assert!(s.leq(s));
        }
        let merged = stratum_of_generators(3, vec![Generator::diag(0, 1)]).unwrap();
        let colored = stratum_of_generators(
            3,
            vec![
                Generator::Punct { coord: 0, color: 1 },
                Generator::Punct { coord: 1, color: 1 },
            ],
        )
        .unwrap();
        assert!(colored.leq(&merged));
        assert!(!merged.leq(&colored));
    }

    #[test]
    fn mobius_matches_interval_definition() {
        // sum over [F, top] of mu(G, top) is zero for F < top
        let arr = Arrangement::build(3, 1);
        for (k, f) in arr.strata.iter().enumerate() {
            if f.rank() == 0 {
                continue;
            }
            let total: i64 = arr
                .strata
                .iter()
                .enumerate()
                .filter(|(_, g)| f.leq(g))
                .map(|(g_idx, _)| arr.mobius[g_idx])
                .sum();
            assert_eq!(total, 0, "interval sum fails at {}", arr.strata[k].label());
        }
    }
}
