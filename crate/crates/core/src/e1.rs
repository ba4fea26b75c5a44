//! The first page of the Orlik-Solomon spectral sequence for configuration
//! spaces of punctured varieties.
//!
//! For a model of `H^*(Xbar)` and a puncture count `r`, the page is
//!
//! ```text
//!   E1 = (+)_F  H^*(F) (x) A_F
//! ```
//!
//! summed over strata `F` of the diagonal-plus-puncture arrangement in
//! `Xbar^n`. A basis element is a choice of stratum, an NBC monomial of `A_F`
//! and one model class per uncolored block of `F`. `H^k(F)` sits in bidegree
//! `(k + 2d rk F, rk F)`; the OS factor adds `(d rk F, d rk F)` to the Hodge
//! type. Cohomological degree is `i - j`, and the parity of a bidegree
//! `(i, j)` element is `i - j` mod 2: that single convention drives every
//! Koszul sign below.
//!
//! Words in classes and generators are brought to the stratum basis by the
//! normal-form routine: generators are sorted and rewritten through the
//! circuit relations, classes move onto block representatives (relation
//! `g_ij a_i = g_ij a_j` carries no sign) and multiply within blocks, classes
//! of positive degree die on colored coordinates.

use std::collections::BTreeMap;

use num::Zero;

use crate::arrangement::Generator;
use crate::error::Error;
use crate::linalg::{rat_int, Rational, SparseMatrix, SparseVec};
use crate::model::{ClassId, HodgeType, TensorPower, VarietyModel};
use crate::os::{sort_with_sign, MonoId, OsAlgebra};

/// A level of the page: `(i, j, p, q)`.
pub type Level = (usize, usize, u32, u32);

/// Index of a basis element in [`E1Page::basis`].
pub type ElemId = usize;

/// One basis element: an NBC monomial and the block classes, written as the
/// product `class_1 ... class_k g_1 ... g_m` with classes ordered by block
/// representative and generators ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E1Elem {
    pub os_mono: MonoId,
    /// `(block representative coordinate, non-unit class)`, sorted.
    pub classes: Vec<(usize, ClassId)>,
    pub level: Level,
}

/// A factor of a raw (unnormalized) word.
#[derive(Clone, Copy, Debug)]
pub enum Factor {
    Class { coord: usize, class: ClassId },
    Gen(Generator),
}

/// Linear combination of basis elements.
pub type E1Combination = Vec<(Rational, ElemId)>;

/// The bigraded dga `E1(X_r, n)` in its stratum basis.
#[derive(Clone, Debug)]
pub struct E1Page {
    pub model: VarietyModel,
    pub r: usize,
    pub n: usize,
    pub os: OsAlgebra,
    pub basis: Vec<E1Elem>,
    /// Basis elements per level, in deterministic construction order.
    pub levels: BTreeMap<Level, Vec<ElemId>>,
    index: BTreeMap<(MonoId, Vec<(usize, ClassId)>), ElemId>,
    /// `d1` blocks keyed by source level; block at `(i,j,p,q)` maps into
    /// `(i, j-1, p, q)`, rows indexed by the target level basis.
    d1: BTreeMap<Level, SparseMatrix>,
}

impl E1Page {
    /// Builds the page basis. `max_basis` is the resource ceiling on the
    /// total number of basis elements.
    pub fn build(
        model: &VarietyModel,
        r: usize,
        n: usize,
        max_basis: usize,
    ) -> Result<E1Page, Error> {
        let report = model.validate();
        if !report.is_empty() {
            return Err(Error::InvalidModel(report.join("; ")));
        }
        let os = OsAlgebra::build(n, r);
        let d = model.dim_c;
        let mut basis: Vec<E1Elem> = Vec::new();
        let mut levels: BTreeMap<Level, Vec<ElemId>> = BTreeMap::new();

        for (sid, stratum) in os.arr.strata.iter().enumerate() {
            let rank = stratum.rank();
            let blocks: Vec<usize> = stratum.blocks.iter().map(|b| b[0]).collect();
            for &mono in &os.by_stratum[sid] {
                // every assignment of a model class to each block
                let mut assignment = vec![0usize; blocks.len()];
                loop {
                    let mut degree = 0u32;
                    let mut hodge = HodgeType::new(0, 0);
                    let mut classes = Vec::new();
                    for (b, &k) in assignment.iter().enumerate() {
                        let class = ClassId(k);
                        let c = model.class(class);
                        if c.degree > 0 {
                            classes.push((blocks[b], class));
                            degree += c.degree;
                            hodge = hodge.plus(c.hodge);
                        }
                    }
                    let level = (
                        degree as usize + 2 * d as usize * rank,
                        rank,
                        hodge.p + d * rank as u32,
                        hodge.q + d * rank as u32,
                    );
                    let id = basis.len();
                    basis.push(E1Elem {
                        os_mono: mono,
                        classes,
                        level,
                    });
                    levels.entry(level).or_default().push(id);
                    if basis.len() > max_basis {
                        return Err(Error::ResourceGuard(format!(
                            "E1 page for model `{}`, r={r}, n={n} exceeds {max_basis} basis elements",
                            model.name
                        )));
                    }
                    // next assignment
                    let mut pos = 0;
                    loop {
                        if pos == assignment.len() {
                            break;
                        }
                        assignment[pos] += 1;
                        if assignment[pos] < model.classes.len() {
                            break;
                        }
                        assignment[pos] = 0;
                        pos += 1;
                    }
                    if pos == assignment.len() {
                        break;
                    }
                }
            }
        }
        let index = basis
            .iter()
            .enumerate()
            .map(|(id, e)| ((e.os_mono, e.classes.clone()), id))
            .collect();
        Ok(E1Page {
            model: model.clone(),
            r,
            n,
            os,
            basis,
            levels,
            index,
            d1: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn level_dim(&self, level: Level) -> usize {
        self.levels.get(&level).map(Vec::len).unwrap_or(0)
    }

    /// Dimensions summed over Hodge types, keyed by `(i, j)`.
    pub fn dims_ij(&self) -> BTreeMap<(usize, usize), usize> {
        let mut out = BTreeMap::new();
        for ((i, j, _, _), elems) in &self.levels {
            *out.entry((*i, *j)).or_insert(0) += elems.len();
        }
        out
    }

    /// Position of an element within its level's basis.
    pub fn position_in_level(&self, id: ElemId) -> usize {
        let level = self.basis[id].level;
        self.levels[&level]
            .iter()
            .position(|&e| e == id)
            .expect("element listed in its level")
    }

    /// Expresses a combination of elements (all at `level`) in level
    /// coordinates.
    pub fn level_vector(&self, level: Level, comb: &E1Combination) -> SparseVec {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        for (c, id) in comb {
            assert_eq!(self.basis[*id].level, level, "combination crosses levels");
            *acc.entry(self.position_in_level(*id))
                .or_insert_with(Rational::zero) += c;
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }

    /// Brings a raw word to the stratum basis.
    pub fn normalize(&self, coeff: Rational, factors: &[Factor]) -> E1Combination {
        // move generators right past classes, preserving relative orders
        let mut sign = 1i64;
        let mut gens_before = 0usize;
        let mut classes: Vec<(usize, ClassId)> = Vec::new();
        let mut gens: Vec<usize> = Vec::new();
        for f in factors {
            match f {
                Factor::Gen(g) => {
                    gens.push(self.os.arr.gen_id(g));
                    gens_before += 1;
                }
                Factor::Class { coord, class } => {
                    let deg = self.model.class(*class).degree;
                    if deg == 0 {
                        continue; // unit
                    }
                    if gens_before % 2 == 1 && deg % 2 == 1 {
                        sign = -sign;
                    }
                    classes.push((*coord, *class));
                }
            }
        }
        let coeff = coeff * rat_int(sign);
        let mut out: BTreeMap<ElemId, Rational> = BTreeMap::new();
        for (c_os, mono) in self.os.normalize_word(&gens) {
            self.normalize_classes(&(&coeff * &c_os), mono, &classes, &mut out);
        }
        out.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(id, c)| (c, id))
            .collect()
    }

    /// Places the class word onto the stratum of `mono` and accumulates the
    /// resulting basis elements.
    fn normalize_classes(
        &self,
        coeff: &Rational,
        mono: MonoId,
        classes: &[(usize, ClassId)],
        out: &mut BTreeMap<ElemId, Rational>,
    ) {
        let sid = self.os.mono(mono).stratum;
        let stratum = &self.os.arr.strata[sid];
        // classes of positive degree die on colored coordinates
        let mut placed: Vec<(usize, ClassId)> = Vec::with_capacity(classes.len());
        for &(coord, class) in classes {
            if stratum.coloring[coord] != 0 {
                return;
            }
            let block = stratum.block_of(coord).expect("uncolored coordinate");
            placed.push((stratum.blocks[block][0], class));
        }
        // stable sort by representative with Koszul signs
        let mut sign = 1i64;
        for i in 1..placed.len() {
            let mut k = i;
            while k > 0 && placed[k - 1].0 > placed[k].0 {
                let (da, db) = (
                    self.model.class(placed[k - 1].1).degree,
                    self.model.class(placed[k].1).degree,
                );
                if da % 2 == 1 && db % 2 == 1 {
                    sign = -sign;
                }
                placed.swap(k - 1, k);
                k -= 1;
            }
        }
        self.fold_blocks(&(coeff * rat_int(sign)), mono, placed, out);
    }

    /// Multiplies out adjacent classes on the same block until each block
    /// carries at most one non-unit class, then looks the element up.
    fn fold_blocks(
        &self,
        coeff: &Rational,
        mono: MonoId,
        placed: Vec<(usize, ClassId)>,
        out: &mut BTreeMap<ElemId, Rational>,
    ) {
        for k in 1..placed.len() {
            if placed[k - 1].0 == placed[k].0 {
                let (rep, a) = placed[k - 1];
                let b = placed[k].1;
                for (c, product) in self.model.multiply(a, b) {
                    let mut next = placed.clone();
                    next.remove(k);
                    if self.model.class(*product).degree == 0 {
                        next.remove(k - 1);
                    } else {
                        next[k - 1] = (rep, *product);
                    }
                    self.fold_blocks(&(coeff * c), mono, next, out);
                }
                return;
            }
        }
        let id = *self
            .index
            .get(&(mono, placed.clone()))
            .expect("canonical word is a basis element");
        *out.entry(id).or_insert_with(Rational::zero) += coeff;
    }

    /// Image of a single basis element under `d1`: each OS generator is
    /// replaced in place by its boundary class (`p_ij^* [Delta]` for
    /// diagonals, the pulled-back point class for punctures), with the
    /// graded Leibniz sign.
    pub fn d1_of_elem(&self, id: ElemId) -> E1Combination {
        let elem = &self.basis[id];
        let deg_h: u32 = elem
            .classes
            .iter()
            .map(|(_, c)| self.model.class(*c).degree)
            .sum();
        let gens = &self.os.mono(elem.os_mono).gens;
        let mut acc: BTreeMap<ElemId, Rational> = BTreeMap::new();
        for (k, &g) in gens.iter().enumerate() {
            let leibniz = if (deg_h as usize + k) % 2 == 0 { 1 } else { -1 };
            let boundary: Vec<(Rational, Vec<Factor>)> = match self.os.arr.generators[g] {
                Generator::Diag { i, j } => self
                    .model
                    .diagonal
                    .iter()
                    .map(|(c, l, rr)| {
                        (
                            c.clone(),
                            vec![
                                Factor::Class {
                                    coord: i,
                                    class: *l,
                                },
                                Factor::Class {
                                    coord: j,
                                    class: *rr,
                                },
                            ],
                        )
                    })
                    .collect(),
                Generator::Punct { coord, .. } => self
                    .model
                    .point_class
                    .iter()
                    .map(|(c, cls)| {
                        (
                            c.clone(),
                            vec![Factor::Class {
                                coord,
                                class: *cls,
                            }],
                        )
                    })
                    .collect(),
            };
            for (c, replacement) in boundary {
                let mut word: Vec<Factor> = elem
                    .classes
                    .iter()
                    .map(|&(coord, class)| Factor::Class { coord, class })
                    .collect();
                for (pos, &h) in gens.iter().enumerate() {
                    if pos == k {
                        word.extend(replacement.iter().copied());
                    } else {
                        word.push(Factor::Gen(self.os.arr.generators[h]));
                    }
                }
                for (c2, target) in self.normalize(c * rat_int(leibniz), &word) {
                    *acc.entry(target).or_insert_with(Rational::zero) += c2;
                }
            }
        }
        acc.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(id, c)| (c, id))
            .collect()
    }

    /// Populates the `d1` blocks, verifying that `d1` respects the Hodge
    /// splitting and squares to zero. Aborts with a diagnostic otherwise.
    pub fn differential(&mut self) -> Result<(), Error> {
        let mut blocks: BTreeMap<Level, SparseMatrix> = BTreeMap::new();
        for (&level, elems) in &self.levels {
            let (i, j, p, q) = level;
            if j == 0 {
                continue;
            }
            let target = (i, j - 1, p, q);
            let target_dim = self.level_dim(target);
            let mut cols: Vec<SparseVec> = Vec::with_capacity(elems.len());
            for &e in elems {
                let image = self.d1_of_elem(e);
                for (_, t) in &image {
                    let tl = self.basis[*t].level;
                    if tl != target {
                        return Err(Error::SignConsistency(format!(
                            "d1 maps level {:?} outside {:?} (hit {:?})",
                            level, target, tl
                        )));
                    }
                }
                cols.push(self.level_vector(target, &image));
            }
            blocks.insert(level, SparseMatrix::from_columns(target_dim, &cols));
        }
        // d1 after d1 = 0
        for (&(i, j, p, q), m) in &blocks {
            if j >= 2 {
                if let Some(next) = blocks.get(&(i, j - 1, p, q)) {
                    if !next.matmul(m).is_zero() {
                        return Err(Error::SignConsistency(format!(
                            "d1 o d1 != 0 out of level {:?}",
                            (i, j, p, q)
                        )));
                    }
                }
            }
        }
        self.d1 = blocks;
        Ok(())
    }

    pub fn d1_block(&self, level: Level) -> Option<&SparseMatrix> {
        self.d1.get(&level)
    }

    pub fn has_differential(&self) -> bool {
        !self.d1.is_empty() || self.levels.keys().all(|&(_, j, _, _)| j == 0)
    }

    /// Kernel of `d1` out of a level, as vectors in level coordinates.
    /// Levels with `j = 0` have zero differential.
    pub fn d1_kernel(&self, level: Level) -> Vec<SparseVec> {
        let dim = self.level_dim(level);
        match self.d1.get(&level) {
            Some(m) => m.kernel_basis(),
            None => (0..dim).map(|k| vec![(k, rat_int(1))]).collect(),
        }
    }

    /// Image of `d1` arriving at a level (columns of the block one `j` up).
    pub fn d1_image_into(&self, level: Level) -> Vec<SparseVec> {
        let (i, j, p, q) = level;
        let above = (i, j + 1, p, q);
        match self.d1.get(&above) {
            Some(m) => {
                let t = m.transpose();
                (0..m.ncols())
                    .map(|c| t.rows()[c].clone())
                    .filter(|v| !v.is_empty())
                    .collect()
            }
            None => Vec::new(),
        }
    }

    /// Action of a coordinate permutation on a basis element (`perm[c]` is
    /// the image of coordinate `c`): subscripts move, the word order stays,
    /// normalization supplies the Koszul signs.
    pub fn permute_elem(&self, perm: &[usize], id: ElemId) -> E1Combination {
        let elem = &self.basis[id];
        let mut word: Vec<Factor> = elem
            .classes
            .iter()
            .map(|&(coord, class)| Factor::Class {
                coord: perm[coord],
                class,
            })
            .collect();
        for &g in &self.os.mono(elem.os_mono).gens {
            word.push(Factor::Gen(self.os.arr.generators[g].permuted(perm)));
        }
        self.normalize(rat_int(1), &word)
    }

    /// Matrices of the permutation action, one block per level.
    pub fn sn_matrices(&self, perm: &[usize]) -> BTreeMap<Level, SparseMatrix> {
        let mut out = BTreeMap::new();
        for (&level, elems) in &self.levels {
            let mut cols = Vec::with_capacity(elems.len());
            for &e in elems {
                let image = self.permute_elem(perm, e);
                cols.push(self.level_vector(level, &image));
            }
            out.insert(level, SparseMatrix::from_columns(elems.len(), &cols));
        }
        out
    }

    /// Euler characteristic `sum (-1)^{i-j} dim E1^{i,j}`.
    pub fn euler_characteristic(&self) -> i64 {
        let mut acc = 0i64;
        for ((i, j, _, _), elems) in &self.levels {
            let sign = if (i - j) % 2 == 0 { 1 } else { -1 };
            acc += sign * elems.len() as i64;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// The decomposition map Phi
// ---------------------------------------------------------------------------

/// Outcome of the per-level checks of the decomposition
/// `E1(X, n) (+) (+)_c E1(X-P, [n]-c) -> E1(X-P, n)`.
#[derive(Clone, Debug)]
pub struct PhiReport {
    /// `(level, source dim, target dim, bijective)`
    pub levels: Vec<(Level, usize, usize, bool)>,
    pub bijective: bool,
    /// `None` when the differential was not populated on all pages.
    pub commutes: Option<bool>,
}

/// The decomposition of `E1(X-P, n)` over `E1(X, n)`: `X` has `r - 1`
/// punctures and `X - P` has `r`, over the same base model.
pub struct Phi<'a> {
    pub x_page: &'a E1Page,
    pub xp_page: &'a E1Page,
    pub xp_small: &'a E1Page,
}

impl<'a> Phi<'a> {
    /// `x_page = E1(model, r-1, n)`, `xp_page = E1(model, r, n)`,
    /// `xp_small = E1(model, r, n-1)`.
    pub fn new(x_page: &'a E1Page, xp_page: &'a E1Page, xp_small: &'a E1Page) -> Result<Self, Error> {
        if xp_page.r == 0 || x_page.r + 1 != xp_page.r || xp_small.r != xp_page.r {
            return Err(Error::Input(
                "Phi needs pages with puncture counts (r-1, r, r)".to_string(),
            ));
        }
        if xp_page.n == 0 || x_page.n != xp_page.n || xp_small.n + 1 != xp_page.n {
            return Err(Error::Input(
                "Phi needs pages with point counts (n, n, n-1)".to_string(),
            ));
        }
        Ok(Phi {
            x_page,
            xp_page,
            xp_small,
        })
    }

    fn relabel(&self, skip: usize, coord: usize) -> usize {
        if coord < skip {
            coord
        } else {
            coord + 1
        }
    }

    /// Natural algebra map on the first summand: same word, read in the
    /// larger arrangement.
    pub fn natural(&self, id: ElemId) -> E1Combination {
        let elem = &self.x_page.basis[id];
        let mut word: Vec<Factor> = elem
            .classes
            .iter()
            .map(|&(coord, class)| Factor::Class { coord, class })
            .collect();
        for &g in &self.x_page.os.mono(elem.os_mono).gens {
            word.push(Factor::Gen(self.x_page.os.arr.generators[g]));
        }
        self.xp_page.normalize(rat_int(1), &word)
    }

    /// The `E1(X, [n]-c)`-linear map on the `c`-th summand: `1 -> g_c^r` and
    /// `g_j^r -> g_cj g_c^r`. Words with several color-`r` generators are
    /// first brought to module form through `g_a^r g_b^r = g_ab g_a^r -
    /// g_ab g_b^r`.
    pub fn summand(&self, c: usize, id: ElemId) -> E1Combination {
        let elem = &self.xp_small.basis[id];
        let r = self.xp_page.r;
        let mut word: Vec<Factor> = elem
            .classes
            .iter()
            .map(|&(coord, class)| Factor::Class {
                coord: self.relabel(c, coord),
                class,
            })
            .collect();
        for &g in &self.xp_small.os.mono(elem.os_mono).gens {
            let g = self.xp_small.os.arr.generators[g];
            let relabeled = match g {
                Generator::Punct { coord, color } => Generator::Punct {
                    coord: self.relabel(c, coord),
                    color,
                },
                Generator::Diag { i, j } => {
                    Generator::diag(self.relabel(c, i), self.relabel(c, j))
                }
            };
            word.push(Factor::Gen(relabeled));
        }
        // move the color-r generators to the right end, preserving order
        let mut sign = 1i64;
        let mut head: Vec<Factor> = Vec::new();
        let mut tail: Vec<usize> = Vec::new(); // coordinates of color-r puncture gens
        for f in word {
            if let Factor::Gen(Generator::Punct { coord, color }) = f {
                if color == r {
                    tail.push(coord);
                    continue;
                }
            }
            let parity = match f {
                Factor::Class { class, .. } => self.xp_page.model.class(class).degree % 2,
                Factor::Gen(_) => 1,
            };
            if parity == 1 && tail.len() % 2 == 1 {
                // this factor passes left over every color-r gen seen so far
                sign = -sign;
            }
            head.push(f);
        }
        let mut acc: BTreeMap<ElemId, Rational> = BTreeMap::new();
        self.fold_summand(c, rat_int(sign), head, tail, &mut acc);
        acc.into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(id, v)| (v, id))
            .collect()
    }

    /// Reduces the tail of color-`r` generators to length <= 1 and applies
    /// the module map, accumulating normalized target elements.
    fn fold_summand(
        &self,
        c: usize,
        coeff: Rational,
        head: Vec<Factor>,
        tail: Vec<usize>,
        acc: &mut BTreeMap<ElemId, Rational>,
    ) {
        let r = self.xp_page.r;
        if tail.len() >= 2 {
            // rewrite the last two through the boundary relation of the
            // triangle circuit: g_a^r g_b^r = -g_ab g_a^r + g_ab g_b^r; the
            // new diagonal factor joins the head (it moves left past the
            // remaining tail generators, all odd)
            let b = tail[tail.len() - 1];
            let a = tail[tail.len() - 2];
            let remaining = tail.len() - 2;
            let move_sign = if remaining % 2 == 1 { -1 } else { 1 };
            for (s, keep) in [(-1i64, a), (1i64, b)] {
                let mut head2 = head.clone();
                head2.push(Factor::Gen(Generator::diag(a, b)));
                let mut tail2 = tail[..remaining].to_vec();
                tail2.push(keep);
                self.fold_summand(
                    c,
                    &coeff * rat_int(s * move_sign),
                    head2,
                    tail2,
                    acc,
                );
            }
            return;
        }
        let mut word = head;
        match tail.first() {
            None => {
                word.push(Factor::Gen(Generator::Punct { coord: c, color: r }));
            }
            Some(&j) => {
                word.push(Factor::Gen(Generator::diag(c, j)));
                word.push(Factor::Gen(Generator::Punct { coord: c, color: r }));
            }
        }
        for (v, id) in self.xp_page.normalize(coeff, &word) {
            *acc.entry(id).or_insert_with(Rational::zero) += v;
        }
    }

    /// Source levels feeding a target level: the same level on `E1(X, n)`
    /// plus the shifted level on each `E1(X-P, n-1)` summand.
    fn shifted(&self, level: Level) -> Option<Level> {
        let (i, j, p, q) = level;
        let d = self.xp_page.model.dim_c;
        if i < 2 * d as usize || j < 1 || p < d || q < d {
            return None;
        }
        Some((i - 2 * d as usize, j - 1, p - d, q - d))
    }

    /// Checks bijectivity per level and, when differentials are populated on
    /// all three pages, commutation with `d1`.
    pub fn check(&self) -> Result<PhiReport, Error> {
        // collect every candidate target level
        let mut all_levels: std::collections::BTreeSet<Level> = self
            .xp_page
            .levels
            .keys()
            .copied()
            .collect();
        for &level in self.x_page.levels.keys() {
            all_levels.insert(level);
        }
        let d = self.xp_page.model.dim_c;
        for &(i, j, p, q) in self.xp_small.levels.keys() {
            all_levels.insert((i + 2 * d as usize, j + 1, p + d, q + d));
        }

        let mut report = Vec::new();
        let mut bijective = true;
        for level in all_levels {
            let target_dim = self.xp_page.level_dim(level);
            let mut cols: Vec<SparseVec> = Vec::new();
            if let Some(elems) = self.x_page.levels.get(&level) {
                for &e in elems {
                    let image = self.natural(e);
                    cols.push(self.xp_page.level_vector(level, &image));
                }
            }
            if let Some(shifted) = self.shifted(level) {
                for c in 0..self.xp_page.n {
                    if let Some(elems) = self.xp_small.levels.get(&shifted) {
                        for &e in elems {
                            let image = self.summand(c, e);
                            cols.push(self.xp_page.level_vector(level, &image));
                        }
                    }
                }
            }
            let source_dim = cols.len();
            let m = SparseMatrix::from_columns(target_dim, &cols);
            let ok = source_dim == target_dim && m.rank() == target_dim;
            bijective &= ok;
            if source_dim > 0 || target_dim > 0 {
                report.push((level, source_dim, target_dim, ok));
            }
        }

        let commutes = if self.x_page.has_differential()
            && self.xp_page.has_differential()
            && self.xp_small.has_differential()
        {
            Some(self.commutes_with_d1()?)
        } else {
            None
        };

        Ok(PhiReport {
            levels: report,
            bijective,
            commutes,
        })
    }

    /// The dimension form of the decomposition:
    /// `dim E1(X-P,n)^{i,j} = dim E1(X,n)^{i,j} + n dim E1(X-P,n-1)^{i-2d,j-1}`
    /// at every bidegree.
    pub fn dimension_identity(&self) -> bool {
        let d = self.xp_page.model.dim_c as usize;
        let n = self.xp_page.n;
        let xp = self.xp_page.dims_ij();
        let x = self.x_page.dims_ij();
        let small = self.xp_small.dims_ij();
        let mut keys: std::collections::BTreeSet<(usize, usize)> = xp.keys().copied().collect();
        keys.extend(x.keys().copied());
        for &(i, j) in small.keys() {
            keys.insert((i + 2 * d, j + 1));
        }
        for (i, j) in keys {
            let lhs = xp.get(&(i, j)).copied().unwrap_or(0);
            let shifted = if i >= 2 * d && j >= 1 {
                small.get(&(i - 2 * d, j - 1)).copied().unwrap_or(0)
            } else {
                0
            };
            let rhs = x.get(&(i, j)).copied().unwrap_or(0) + n * shifted;
            if lhs != rhs {
                return false;
            }
        }
        true
    }

    fn commutes_with_d1(&self) -> Result<bool, Error> {
        // natural summand
        for id in 0..self.x_page.basis.len() {
            let lhs = apply_then(self.xp_page, &self.natural(id), |p, e| p.d1_of_elem(e));
            let rhs = map_comb(&self.x_page.d1_of_elem(id), |e| self.natural(e));
            if !comb_eq(&lhs, &rhs) {
                return Ok(false);
            }
        }
        // coordinate summands
        for c in 0..self.xp_page.n {
            for id in 0..self.xp_small.basis.len() {
                let lhs = apply_then(self.xp_page, &self.summand(c, id), |p, e| p.d1_of_elem(e));
                let rhs = map_comb(&self.xp_small.d1_of_elem(id), |e| self.summand(c, e));
                if !comb_eq(&lhs, &rhs) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn apply_then(
    page: &E1Page,
    comb: &E1Combination,
    f: impl Fn(&E1Page, ElemId) -> E1Combination,
) -> E1Combination {
    let mut acc: BTreeMap<ElemId, Rational> = BTreeMap::new();
    for (c, id) in comb {
        for (c2, id2) in f(page, *id) {
            *acc.entry(id2).or_insert_with(Rational::zero) += c * c2;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(id, c)| (c, id))
        .collect()
}

fn map_comb(comb: &E1Combination, f: impl Fn(ElemId) -> E1Combination) -> E1Combination {
    let mut acc: BTreeMap<ElemId, Rational> = BTreeMap::new();
    for (c, id) in comb {
        for (c2, id2) in f(*id) {
            *acc.entry(id2).or_insert_with(Rational::zero) += c * c2;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(id, c)| (c, id))
        .collect()
}

fn comb_eq(a: &E1Combination, b: &E1Combination) -> bool {
    let to_map = |v: &E1Combination| -> BTreeMap<ElemId, Rational> {
        let mut m: BTreeMap<ElemId, Rational> = BTreeMap::new();
        for (c, id) in v {
            *m.entry(*id).or_insert_with(Rational::zero) += c;
        }
        m.retain(|_, c| !c.is_zero());
        m
    };
    to_map(a) == to_map(b)
}

// ---------------------------------------------------------------------------
// Quotient-presentation oracle
// ---------------------------------------------------------------------------

/// Dimensions of `E1(X_r, n)` per level computed from the quotient
/// presentation: the free graded-commutative algebra `H^*(X^n)[g_ij, g_i^s]`
/// modulo the span of the six relation families times all monomials. Used as
/// an oracle for [`E1Page::build`]; guarded by a generator-count ceiling.
pub fn brute_force_e1_dims(
    model: &VarietyModel,
    r: usize,
    n: usize,
    max_gens: usize,
) -> Result<BTreeMap<Level, usize>, Error> {
    use crate::arrangement::Arrangement;
    let arr = Arrangement::build(n, r);
    let gens = arr.generators.len();
    if gens > max_gens {
        return Err(Error::ResourceGuard(format!(
            "brute-force E1 oracle: {gens} generators exceeds ceiling {max_gens}"
        )));
    }
    let tensor = TensorPower::new(model, n);
    let d = model.dim_c;

    // free-algebra basis: (tensor word, sorted generator subset)
    let words = tensor.basis();
    let word_index: BTreeMap<Vec<ClassId>, usize> = words
        .iter()
        .enumerate()
        .map(|(k, w)| (w.clone(), k))
        .collect();
    let subsets = {
        let mut out: Vec<Vec<usize>> = Vec::with_capacity(1 << gens);
        for mask in 0u64..(1u64 << gens) {
            out.push((0..gens).filter(|k| mask >> k & 1 == 1).collect());
        }
        out.sort_by_key(|s: &Vec<usize>| (s.len(), s.clone()));
        out
    };
    let subset_index: BTreeMap<Vec<usize>, usize> = subsets
        .iter()
        .enumerate()
        .map(|(k, s)| (s.clone(), k))
        .collect();
    let monomial_id = |w: usize, s: usize| w * subsets.len() + s;

    let level_of = |w: &Vec<ClassId>, s: &Vec<usize>| -> Level {
        let deg = tensor.degree(w) as usize;
        let h = tensor.hodge(w);
        (
            deg + 2 * d as usize * s.len(),
            s.len(),
            h.p + d * s.len() as u32,
            h.q + d * s.len() as u32,
        )
    };

    // a free-algebra element as a sparse vector over (word, subset) pairs
    type FreeVec = Vec<(usize, Rational)>;
    let normalize_product = |coeff: &Rational,
                             word: &Vec<ClassId>,
                             gens_word: &[usize]|
     -> Vec<(Rational, usize)> {
        let Some((sign, sorted)) = sort_with_sign(gens_word) else {
            return Vec::new();
        };
        let sid = subset_index[&sorted];
        vec![(coeff * rat_int(sign), monomial_id(word_index[word], sid))]
    };

    // multiply a free element (given on basis pairs) by a basis monomial on
    // the right: (w, S) * (w', S') = +-(w w') (x) (S u S')
    let times_monomial = |elem: &[(Rational, usize)], w2: &Vec<ClassId>, s2: &Vec<usize>| -> FreeVec {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        let deg_w2 = tensor.degree(w2);
        for (c, mid) in elem {
            let w = &words[mid / subsets.len()];
            let s = &subsets[mid % subsets.len()];
            let koszul = if (s.len() as u32 * deg_w2) % 2 == 1 {
                rat_int(-1)
            } else {
                rat_int(1)
            };
            let mut gens_word: Vec<usize> = s.clone();
            gens_word.extend(s2.iter().copied());
            let Some((sign, sorted)) = sort_with_sign(&gens_word) else {
                continue;
            };
            let sid = subset_index[&sorted];
            for (cw, prod) in tensor.multiply(w, w2) {
                let target = monomial_id(word_index[&prod], sid);
                *acc.entry(target).or_insert_with(Rational::zero) +=
                    c * &koszul * &cw * rat_int(sign);
            }
        }
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    };

    // relation elements
    let unit_word: Vec<ClassId> = vec![model.unit().expect("validated model has a unit"); n];
    let place = |coord: usize, class: ClassId| -> Vec<ClassId> {
        let mut w = unit_word.clone();
        w[coord] = class;
        w
    };
    let mut relations: Vec<Vec<(Rational, usize)>> = Vec::new();
    let diag_id = |i: usize, j: usize| arr.gen_id(&Generator::diag(i, j));
    let punct_id =
        |i: usize, s: usize| arr.gen_id(&Generator::Punct { coord: i, color: s });
    // (2) Arnold
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let mut rel = Vec::new();
                for (a, b) in [(diag_id(i, j), diag_id(j, k)), (diag_id(j, k), diag_id(k, i)), (diag_id(k, i), diag_id(i, j))] {
                    rel.extend(normalize_product(&rat_int(1), &unit_word, &[a, b]));
                }
                relations.push(rel);
            }
        }
    }
    // (3) g_ij (a_i - a_j); (4) g_i^s a_i
    for (k, class) in model.classes.iter().enumerate() {
        if class.degree == 0 {
            continue;
        }
        let cid = ClassId(k);
        for i in 0..n {
            for j in (i + 1)..n {
                let g = diag_id(i, j);
                let parity_sign = if class.degree % 2 == 1 { -1 } else { 1 };
                // g * a_i = (-1)^{deg a} a_i * g in the (word, subset) order
                let mut rel = Vec::new();
                rel.extend(normalize_product(
                    &rat_int(parity_sign),
                    &place(i, cid),
                    &[g],
                ));
                rel.extend(normalize_product(
                    &rat_int(-parity_sign),
                    &place(j, cid),
                    &[g],
                ));
                relations.push(rel);
            }
            for s in 1..=r {
                let g = punct_id(i, s);
                let parity_sign = if class.degree % 2 == 1 { -1 } else { 1 };
                relations.push(normalize_product(
                    &rat_int(parity_sign),
                    &place(i, cid),
                    &[g],
                ));
            }
        }
    }
    // (5) g_i^s g_j^s + g_ij g_i^s - g_ij g_j^s (the triangle boundary;
    // the opposite diagonal sign is the basis change g^s -> -g^s and is not
    // compatible with d1 over a compact base)
    for s in 1..=r {
        for i in 0..n {
            for j in (i + 1)..n {
                let mut rel = Vec::new();
                rel.extend(normalize_product(&rat_int(1), &unit_word, &[punct_id(i, s), punct_id(j, s)]));
                rel.extend(normalize_product(&rat_int(1), &unit_word, &[diag_id(i, j), punct_id(i, s)]));
                rel.extend(normalize_product(&rat_int(-1), &unit_word, &[diag_id(i, j), punct_id(j, s)]));
                relations.push(rel);
            }
        }
    }
    // (6) g_i^s g_i^t
    for s in 1..=r {
        for t in (s + 1)..=r {
            for i in 0..n {
                relations.push(normalize_product(
                    &rat_int(1),
                    &unit_word,
                    &[punct_id(i, s), punct_id(i, t)],
                ));
            }
        }
    }

    // bidegree and Hodge type of each free monomial
    let mono_level = |mid: usize| -> Level {
        let w = &words[mid / subsets.len()];
        let s = &subsets[mid % subsets.len()];
        level_of(w, s)
    };

    // span the ideal per level
    let mut echelons: BTreeMap<Level, crate::linalg::RowEchelon> = BTreeMap::new();
    let total = words.len() * subsets.len();
    for rel in &relations {
        if rel.is_empty() {
            continue;
        }
        for w2 in &words {
            for s2 in &subsets {
                let product = times_monomial(rel, w2, s2);
                if product.is_empty() {
                    continue;
                }
                let level = mono_level(product[0].0);
                debug_assert!(product.iter().all(|(m, _)| mono_level(*m) == level));
                echelons
                    .entry(level)
                    .or_insert_with(|| crate::linalg::RowEchelon::new(total))
                    .insert(product);
            }
        }
    }

    let mut dims: BTreeMap<Level, usize> = BTreeMap::new();
    for (w_idx, w) in words.iter().enumerate() {
        for (s_idx, s) in subsets.iter().enumerate() {
            let _ = (w_idx, s_idx);
            let level = level_of(w, s);
            *dims.entry(level).or_insert(0) += 1;
        }
    }
    for (level, ech) in &echelons {
        let entry = dims.get_mut(level).expect("relations live inside the algebra");
        *entry -= ech.rank();
    }
    dims.retain(|_, v| *v > 0);
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn dims_of(model: &VarietyModel, r: usize, n: usize) -> BTreeMap<(usize, usize), usize> {
        E1Page::build(model, r, n, 200_000).unwrap().dims_ij()
    }

    #[test]
    fn affine_r0_n2_dims() {
        let dims = dims_of(&catalog::affine_space(1), 0, 2);
        let expected: BTreeMap<(usize, usize), usize> =
            [((0, 0), 1), ((2, 1), 1)].into_iter().collect();
        assert_eq!(dims, expected);
    }

    #[test]
    fn affine_r1_n2_dims() {
        let dims = dims_of(&catalog::affine_space(1), 1, 2);
        let expected: BTreeMap<(usize, usize), usize> =
            [((0, 0), 1), ((2, 1), 3), ((4, 2), 2)].into_iter().collect();
        assert_eq!(dims, expected);
    }

    #[test]
    fn elliptic_r1_n1_dims() {
        let dims = dims_of(&catalog::elliptic(), 1, 1);
        let expected: BTreeMap<(usize, usize), usize> =
            [((0, 0), 1), ((1, 0), 2), ((2, 0), 1), ((2, 1), 1)]
                .into_iter()
                .collect();
        assert_eq!(dims, expected);
    }

    #[test]
    fn elliptic_r0_n2_dims() {
        let dims = dims_of(&catalog::elliptic(), 0, 2);
        let expected: BTreeMap<(usize, usize), usize> = [
            ((0, 0), 1),
            ((1, 0), 4),
            ((2, 0), 6),
            ((3, 0), 4),
            ((4, 0), 1),
            ((2, 1), 1),
            ((3, 1), 2),
            ((4, 1), 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(dims, expected);
    }

    #[test]
    fn n0_page_is_one_dimensional() {
        for model in [catalog::affine_space(1), catalog::elliptic()] {
            let page = E1Page::build(&model, 1, 0, 1000).unwrap();
            assert_eq!(page.dim(), 1);
            assert_eq!(page.basis[0].level, (0, 0, 0, 0));
        }
    }

    #[test]
    fn differential_vanishes_for_affine() {
        let mut page = E1Page::build(&catalog::affine_space(1), 1, 2, 10_000).unwrap();
        page.differential().unwrap();
        for (_, block) in page.d1.iter() {
            assert!(block.is_zero());
        }
    }

    #[test]
    fn differential_rank_on_open_curve() {
        // d1(g_12) = b_1 a_2 - a_1 b_2 has rank 1 on bidegree (2,1)
        let mut page = E1Page::build(&catalog::curve_open(1, 1), 0, 2, 10_000).unwrap();
        page.differential().unwrap();
        let mut total_rank = 0;
        for (&(i, j, _, _), block) in page.d1.iter() {
            if (i, j) == (2, 1) {
                total_rank += block.rank();
            }
        }
        assert_eq!(total_rank, 1);
    }

    #[test]
    fn differential_squares_to_zero_on_catalog() {
        for (model, r, n) in [
            (catalog::elliptic(), 1, 2),
            (catalog::elliptic(), 2, 2),
            (catalog::elliptic(), 1, 3),
            (catalog::curve_open(1, 1), 1, 2),
            (catalog::curve_open(1, 2), 0, 3),
            (catalog::curve_compact(2), 1, 2),
            (catalog::proj_line(), 1, 2),
            (catalog::proj_line(), 0, 3),
            (catalog::torus(1), 1, 2),
            (catalog::p2_minus_curve(1), 1, 2),
        ] {
            let mut page = E1Page::build(&model, r, n, 200_000).unwrap();
            page.differential()
                .unwrap_or_else(|e| panic!("{} r={r} n={n}: {e}", model.name));
        }
    }

    #[test]
    fn elliptic_n2_d1_kills_expected_dimensions() {
        // hand-checked: on F(E-O, 2) the kernel of d1 at (2,1) is 0 and the
        // rank arriving at (2,0) is 3
        let mut page = E1Page::build(&catalog::elliptic(), 1, 2, 10_000).unwrap();
        page.differential().unwrap();
        let mut rank_21 = 0;
        for (&(i, j, _, _), block) in page.d1.iter() {
            if (i, j) == (2, 1) {
                rank_21 += block.rank();
            }
        }
        assert_eq!(rank_21, 3);
    }

    #[test]
    fn sn_action_identity_is_identity() {
        let page = E1Page::build(&catalog::affine_space(1), 1, 2, 10_000).unwrap();
        let id_perm: Vec<usize> = (0..2).collect();
        for (level, m) in page.sn_matrices(&id_perm) {
            let dim = page.level_dim(level);
            for k in 0..dim {
                assert_eq!(m.entry(k, k), rat_int(1));
            }
            assert_eq!(m.rank(), dim);
        }
    }

    #[test]
    fn sn_action_trace_on_affine_r1_bidegree21() {
        // swap fixes g_12 and exchanges g_1^1, g_2^1: trace 1
        let page = E1Page::build(&catalog::affine_space(1), 1, 2, 10_000).unwrap();
        let swap = vec![1usize, 0];
        let ms = page.sn_matrices(&swap);
        let mut trace = Rational::zero();
        for (&(i, j, _, _), m) in &ms {
            if (i, j) == (2, 1) {
                for k in 0..m.nrows() {
                    trace += m.entry(k, k);
                }
            }
        }
        assert_eq!(trace, rat_int(1));
    }

    #[test]
    fn sn_action_trace_on_elliptic_h1() {
        // swap on H^1(E^2) = span{a_1, b_1, a_2, b_2}: trace 0
        let page = E1Page::build(&catalog::elliptic(), 0, 2, 10_000).unwrap();
        let swap = vec![1usize, 0];
        let ms = page.sn_matrices(&swap);
        let mut trace = Rational::zero();
        for (&(i, j, _, _), m) in &ms {
            if (i, j) == (1, 0) {
                for k in 0..m.nrows() {
                    trace += m.entry(k, k);
                }
            }
        }
        assert_eq!(trace, rat_int(0));
    }

    #[test]
    fn sn_action_satisfies_symmetric_group_relations() {
        for (model, r, n) in [
            (catalog::affine_space(1), 1usize, 3usize),
            (catalog::elliptic(), 1, 2),
            (catalog::curve_open(1, 2), 0, 3),
        ] {
            let mut page = E1Page::build(&model, r, n, 200_000).unwrap();
            page.differential().unwrap();
            let transpositions: Vec<Vec<usize>> = (0..n - 1)
                .map(|k| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.swap(k, k + 1);
                    p
                })
                .collect();
            let mats: Vec<_> = transpositions.iter().map(|p| page.sn_matrices(p)).collect();
            for (&level, _) in &page.levels {
                let dim = page.level_dim(level);
                let identity = SparseMatrix::from_columns(
                    dim,
                    &(0..dim)
                        .map(|k| vec![(k, rat_int(1))])
                        .collect::<Vec<_>>(),
                );
                // involutions
                for m in &mats {
                    let s = &m[&level];
                    assert_eq!(&s.matmul(s), &identity, "{}: s^2 != 1", model.name);
                }
                // braid relation s_k s_{k+1} s_k = s_{k+1} s_k s_{k+1}
                for k in 0..n.saturating_sub(2) {
                    let a = &mats[k][&level];
                    let b = &mats[k + 1][&level];
                    let lhs = a.matmul(&b.matmul(a));
                    let rhs = b.matmul(&a.matmul(b));
                    assert_eq!(lhs, rhs, "{}: braid fails", model.name);
                }
                // commuting transpositions
                for k in 0..n.saturating_sub(3) {
                    for l in (k + 2)..(n - 1) {
                        let a = &mats[k][&level];
                        let b = &mats[l][&level];
                        assert_eq!(a.matmul(b), b.matmul(a));
                    }
                }
            }
            // the action commutes with d1
            for m in &mats {
                for (&level @ (i, j, p, q), block) in page.d1.iter() {
                    if j == 0 {
                        continue;
                    }
                    let target = (i, j - 1, p, q);
                    let s_src = &m[&level];
                    let dim_target = page.level_dim(target);
                    let s_tgt = m
                        .get(&target)
                        .cloned()
                        .unwrap_or_else(|| SparseMatrix::zero(dim_target, dim_target));
                    assert_eq!(
                        s_tgt.matmul(block),
                        block.matmul(s_src),
                        "{}: sigma does not commute with d1",
                        model.name
                    );
                }
            }
        }
    }

    #[test]
    fn brute_force_matches_build_on_small_instances() {
        let cases: Vec<(VarietyModel, usize, usize)> = vec![
            (catalog::affine_space(1), 0, 2),
            (catalog::affine_space(1), 1, 2),
            (catalog::affine_space(1), 1, 3),
            (catalog::affine_space(2), 1, 2),
            (catalog::torus(1), 0, 3),
            (catalog::torus(1), 1, 2),
            (catalog::elliptic(), 0, 2),
            (catalog::elliptic(), 1, 2),
            (catalog::elliptic(), 2, 2),
            (catalog::curve_open(1, 1), 0, 3),
            (catalog::curve_open(1, 2), 1, 2),
            (catalog::proj_line(), 2, 2),
            (catalog::p2_minus_curve(1), 1, 2),
        ];
        for (model, r, n) in cases {
            let page = E1Page::build(&model, r, n, 200_000).unwrap();
            let mut built: BTreeMap<Level, usize> = BTreeMap::new();
            for (&level, elems) in &page.levels {
                built.insert(level, elems.len());
            }
            let oracle = brute_force_e1_dims(&model, r, n, 12).unwrap();
            assert_eq!(built, oracle, "{} r={r} n={n}", model.name);
        }
    }

    #[test]
    fn oracle_on_affine_r1_n2_values() {
        let oracle = brute_force_e1_dims(&catalog::affine_space(1), 1, 2, 12).unwrap();
        let expected: BTreeMap<Level, usize> = [
            ((0, 0, 0, 0), 1),
            ((2, 1, 1, 1), 3),
            ((4, 2, 2, 2), 2),
        ]
        .into_iter()
        .collect();
        assert_eq!(oracle, expected);
    }

    #[test]
    fn phi_dimension_examples() {
        // n = 1, affine: E1(C,1) + E1(C*,0) -> E1(C*,1)
        let model = catalog::affine_space(1);
        let x = E1Page::build(&model, 0, 1, 1000).unwrap();
        let xp = E1Page::build(&model, 1, 1, 1000).unwrap();
        let small = E1Page::build(&model, 1, 0, 1000).unwrap();
        let phi = Phi::new(&x, &xp, &small).unwrap();
        let report = phi.check().unwrap();
        assert!(report.bijective, "{:?}", report.levels);
        assert_eq!(xp.dim(), x.dim() + 1 * small.dim());

        // n = 2: at bidegree (2,1) target dim 3 = 1 + 2 units
        let x2 = E1Page::build(&model, 0, 2, 1000).unwrap();
        let xp2 = E1Page::build(&model, 1, 2, 1000).unwrap();
        let small2 = E1Page::build(&model, 1, 1, 1000).unwrap();
        let phi2 = Phi::new(&x2, &xp2, &small2).unwrap();
        let report2 = phi2.check().unwrap();
        assert!(report2.bijective, "{:?}", report2.levels);
        let (src, tgt) = report2
            .levels
            .iter()
            .find(|(l, _, _, _)| (l.0, l.1) == (2, 1))
            .map(|(_, s, t, _)| (*s, *t))
            .unwrap();
        assert_eq!((src, tgt), (3, 3));
    }

    #[test]
    fn phi_commutes_for_noncompact_bases() {
        for (model, r, n) in [
            (catalog::affine_space(1), 1usize, 2usize),
            (catalog::curve_open(1, 1), 1, 2),
            (catalog::torus(1), 1, 2),
        ] {
            let mut x = E1Page::build(&model, r - 1, n, 100_000).unwrap();
            let mut xp = E1Page::build(&model, r, n, 100_000).unwrap();
            let mut small = E1Page::build(&model, r, n - 1, 100_000).unwrap();
            x.differential().unwrap();
            xp.differential().unwrap();
            small.differential().unwrap();
            let phi = Phi::new(&x, &xp, &small).unwrap();
            let report = phi.check().unwrap();
            assert!(report.bijective, "{} r={r} n={n}", model.name);
            assert_eq!(report.commutes, Some(true), "{} r={r} n={n}", model.name);
        }
    }

    #[test]
    fn phi_commutation_fails_for_compact_base() {
        // with a compact base d(g_i^r) = pt_i != 0 while the summand unit has
        // zero differential, so the commutation check must report false
        let model = catalog::elliptic();
        let mut x = E1Page::build(&model, 0, 1, 1000).unwrap();
        let mut xp = E1Page::build(&model, 1, 1, 1000).unwrap();
        let mut small = E1Page::build(&model, 1, 0, 1000).unwrap();
        x.differential().unwrap();
        xp.differential().unwrap();
        small.differential().unwrap();
        let phi = Phi::new(&x, &xp, &small).unwrap();
        let report = phi.check().unwrap();
        assert!(report.bijective);
        assert_eq!(report.commutes, Some(false));
    }

    #[test]
    fn phi_dimension_identity() {
        // dim E1(X-P,n)^{i,j} = dim E1(X,n)^{i,j} + n dim E1(X-P,n-1)^{i-2d,j-1}
        for (model, r, n) in [
            (catalog::affine_space(1), 1usize, 2usize),
            (catalog::affine_space(1), 1, 3),
            (catalog::elliptic(), 1, 2),
            (catalog::elliptic(), 2, 2),
            (catalog::curve_open(1, 2), 1, 2),
        ] {
            let d = model.dim_c as usize;
            let x = E1Page::build(&model, r - 1, n, 200_000).unwrap();
            let xp = E1Page::build(&model, r, n, 200_000).unwrap();
            let small = E1Page::build(&model, r, n - 1, 200_000).unwrap();
            let mut keys: std::collections::BTreeSet<(usize, usize)> = Default::default();
            keys.extend(xp.dims_ij().keys().copied());
            keys.extend(x.dims_ij().keys().copied());
            for (i, j) in keys {
                let lhs = xp
                    .dims_ij()
                    .get(&(i, j))
                    .copied()
                    .unwrap_or(0);
                let shifted = if i >= 2 * d && j >= 1 {
                    small.dims_ij().get(&(i - 2 * d, j - 1)).copied().unwrap_or(0)
                } else {
                    0
                };
                let rhs = x.dims_ij().get(&(i, j)).copied().unwrap_or(0) + n * shifted;
                assert_eq!(lhs, rhs, "{} r={r} n={n} at ({i},{j})", model.name);
            }
        }
    }

    #[test]
    fn invalid_models_are_rejected_at_build() {
        use crate::model::{CohClass, HodgeType};
        // two degree-0 classes violate connectedness
        let bad = VarietyModel::assemble(
            "disconnected",
            1,
            false,
            vec![
                CohClass {
                    name: "1".into(),
                    degree: 0,
                    hodge: HodgeType::new(0, 0),
                },
                CohClass {
                    name: "1b".into(),
                    degree: 0,
                    hodge: HodgeType::new(0, 0),
                },
            ],
            vec![],
            vec![],
            vec![],
            None,
        )
        .unwrap();
        assert!(matches!(
            E1Page::build(&bad, 0, 1, 1000),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn normalize_is_identity_on_basis_words() {
        for (model, r, n) in [
            (catalog::elliptic(), 1usize, 2usize),
            (catalog::curve_open(1, 2), 1, 2),
        ] {
            let page = E1Page::build(&model, r, n, 50_000).unwrap();
            for (id, elem) in page.basis.iter().enumerate() {
                let mut word: Vec<Factor> = elem
                    .classes
                    .iter()
                    .map(|&(coord, class)| Factor::Class { coord, class })
                    .collect();
                for &g in &page.os.mono(elem.os_mono).gens {
                    word.push(Factor::Gen(page.os.arr.generators[g]));
                }
                let norm = page.normalize(rat_int(1), &word);
                assert_eq!(norm, vec![(rat_int(1), id)], "{} elem {id}", model.name);
            }
        }
    }

    #[test]
    fn resource_guard_triggers() {
        assert!(matches!(
            E1Page::build(&catalog::elliptic(), 1, 3, 10),
            Err(Error::ResourceGuard(_))
        ));
    }
}
