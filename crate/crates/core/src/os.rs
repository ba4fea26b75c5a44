//! The Orlik-Solomon algebra of the diagonal-plus-puncture arrangement.
//!
//! `A = B/I` where `B` is the exterior algebra on one degree-1 generator per
//! arrangement member and `I` is generated by `e_S` for vanishing sets and
//! `del e_S` for dependent sets. `A` splits as a direct sum over strata, and
//! each summand `A_F` carries a no-broken-circuit monomial basis with respect
//! to the global generator order. Monomials that are not in the basis are
//! rewritten through the circuit relations; that rewriting is the normal-form
//! engine everything downstream relies on.

use std::collections::BTreeMap;

use num::Zero;

use crate::arrangement::{Arrangement, GenId};
use crate::error::Error;
use crate::linalg::{rat_int, Rational, RowEchelon, SparseVec};

/// Id of an NBC basis monomial.
pub type MonoId = usize;

/// Linear combination of NBC monomials.
pub type OsCombination = Vec<(Rational, MonoId)>;

/// An NBC basis monomial: generators ascending, cutting out `stratum`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OsMonomial {
    pub gens: Vec<GenId>,
    pub stratum: usize,
}

/// The Orlik-Solomon algebra of `Arrangement::build(n, r)` in its per-stratum
/// NBC basis. Immutable once built.
#[derive(Clone, Debug)]
pub struct OsAlgebra {
    pub arr: Arrangement,
    pub monomials: Vec<OsMonomial>,
    /// Monomial ids per stratum, same index space as `arr.strata`.
    pub by_stratum: Vec<Vec<MonoId>>,
    index: BTreeMap<Vec<GenId>, MonoId>,
}

impl OsAlgebra {
    pub fn build(n: usize, r: usize) -> OsAlgebra {
        let arr = Arrangement::build(n, r);
        let mut monomials = Vec::new();
        let mut by_stratum = vec![Vec::new(); arr.strata.len()];
        for (sid, stratum) in arr.strata.iter().enumerate() {
            let ambient = arr.generators_on(sid);
            let rank = stratum.rank();
            let mut found = Vec::new();
            enumerate_nbc(&arr, &ambient, rank, &mut Vec::new(), 0, &mut found);
            for gens in found {
                debug_assert_eq!(arr.stratum_of(&gens), Some(sid));
                by_stratum[sid].push(monomials.len());
                monomials.push(OsMonomial {
                    gens,
                    stratum: sid,
                });
            }
        }
        let index = monomials
            .iter()
            .enumerate()
            .map(|(k, m)| (m.gens.clone(), k))
            .collect();
        OsAlgebra {
            arr,
            monomials,
            by_stratum,
            index,
        }
    }

    pub fn mono(&self, id: MonoId) -> &OsMonomial {
        &self.monomials[id]
    }

    pub fn lookup(&self, gens: &[GenId]) -> Option<MonoId> {
        self.index.get(gens).copied()
    }

    /// Basis dimension per OS-degree (= stratum rank).
    pub fn dims_by_rank(&self) -> Vec<u64> {
        let mut dims = vec![0u64; self.arr.max_rank() + 1];
        for m in &self.monomials {
            dims[m.gens.len()] += 1;
        }
        dims
    }

    /// Expresses an arbitrary word in the generators in the NBC basis.
    pub fn normalize_word(&self, word: &[GenId]) -> OsCombination {
        let Some((sign, sorted)) = sort_with_sign(word) else {
            return Vec::new(); // repeated generator
        };
        let mut acc: BTreeMap<MonoId, Rational> = BTreeMap::new();
        self.normalize_sorted(&sorted, &rat_int(sign), &mut acc);
        collect(acc)
    }

    fn normalize_sorted(
        &self,
        sorted: &[GenId],
        coeff: &Rational,
        acc: &mut BTreeMap<MonoId, Rational>,
    ) {
        let Some(sid) = self.arr.stratum_of(sorted) else {
            return; // vanishing set
        };
        if self.arr.strata[sid].rank() < sorted.len() {
            return; // dependent set: e_S = 0 in A
        }
        if let Some(id) = self.lookup(sorted) {
            *acc.entry(id).or_insert_with(Rational::zero) += coeff;
            return;
        }
        // independent but contains a broken circuit: rewrite through the
        // smallest breaking generator
        let (y, circuit_rest) = self
            .find_broken_circuit(sorted)
            .expect("independent non-NBC set must contain a broken circuit");
        // e_T = sign * e_D * e_E with D the broken circuit part
        let d_set = circuit_rest;
        let e_set: Vec<GenId> = sorted.iter().copied().filter(|g| !d_set.contains(g)).collect();
        let pull_sign = extraction_sign(sorted, &d_set);
        // del e_C = 0 with C = {y} u D, y minimal: e_D = sum_j (-1)^{j+1} e_{C \ c_j}
        let mut circuit = vec![y];
        circuit.extend(d_set.iter().copied());
        // circuit is ascending: y below everything in D
        for j in 1..circuit.len() {
            let term_sign = if (j + 1) % 2 == 0 { 1 } else { -1 };
            let mut replacement: Vec<GenId> = circuit
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, g)| *g)
                .collect();
            replacement.extend(e_set.iter().copied());
            let Some((s2, resorted)) = sort_with_sign(&replacement) else {
                continue;
            };
            let c = coeff * rat_int(pull_sign * term_sign * s2);
            self.normalize_sorted(&resorted, &c, acc);
        }
    }

    /// Finds the minimal generator `y` outside `sorted` whose constraint
    /// already holds on the stratum of `{t in sorted : t > y}`; returns `y`
    /// and the fundamental circuit minus `y`.
    fn find_broken_circuit(&self, sorted: &[GenId]) -> Option<(GenId, Vec<GenId>)> {
        let &max = sorted.last()?;
        for y in 0..max {
            if sorted.binary_search(&y).is_ok() {
                continue;
            }
            let above: Vec<GenId> = sorted.iter().copied().filter(|&t| t > y).collect();
            if above.is_empty() {
                continue;
            }
            let sid = self
                .arr
                .stratum_of(&above)
                .expect("subset of independent set vanishes");
            if self.arr.strata[sid].satisfies(&self.arr.generators[y]) {
                // shrink to the fundamental circuit
                let mut d = above.clone();
                let mut k = d.len();
                while k > 0 {
                    k -= 1;
                    let mut trial = d.clone();
                    trial.remove(k);
                    if let Some(tid) = self.arr.stratum_of(&trial) {
                        if self.arr.strata[tid].satisfies(&self.arr.generators[y]) {
                            d = trial;
                        }
                    }
                }
                return Some((y, d));
            }
        }
        None
    }

    /// Product of two basis monomials in the NBC basis.
    pub fn multiply(&self, a: MonoId, b: MonoId) -> OsCombination {
        let mut word = self.monomials[a].gens.clone();
        word.extend(self.monomials[b].gens.iter().copied());
        self.normalize_word(&word)
    }

    /// The Orlik-Solomon differential `del` on a basis monomial. Subsets of
    /// NBC sets are NBC, so no rewriting is needed.
    pub fn partial(&self, m: MonoId) -> OsCombination {
        let gens = &self.monomials[m].gens;
        let mut out = Vec::new();
        for j in 0..gens.len() {
            let mut rest: Vec<GenId> = gens.clone();
            rest.remove(j);
            let id = self
                .lookup(&rest)
                .expect("subset of an NBC monomial is NBC");
            let sign = if j % 2 == 0 { 1 } else { -1 };
            out.push((rat_int(sign), id));
        }
        out
    }

    /// Action of a coordinate permutation on a basis monomial (`perm[i]` is
    /// the image of coordinate `i`), expressed in the NBC basis.
    pub fn permute_monomial(&self, perm: &[usize], m: MonoId) -> OsCombination {
        let word: Vec<GenId> = self.monomials[m]
            .gens
            .iter()
            .map(|&g| self.arr.gen_id(&self.arr.generators[g].permuted(perm)))
            .collect();
        self.normalize_word(&word)
    }
}

/// Sorts a generator word, tracking the Koszul sign (all generators are odd).
/// Returns `None` when a generator repeats.
pub fn sort_with_sign(word: &[GenId]) -> Option<(i64, Vec<GenId>)> {
    let mut v = word.to_vec();
    let mut sign = 1i64;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut k = i;
        while k > 0 && v[k - 1] > v[k] {
            v.swap(k - 1, k);
            sign = -sign;
            k -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((sign, v))
}

/// Sign of pulling the (ascending) subset `d` to the front of the ascending
/// word `sorted`, preserving the order of the complement: each pulled
/// generator passes the outside elements sitting before it.
fn extraction_sign(sorted: &[GenId], d: &[GenId]) -> i64 {
    let mut sign = 1i64;
    let mut outside_before = 0usize;
    for g in sorted {
        if d.contains(g) {
            if outside_before % 2 == 1 {
                sign = -sign;
            }
        } else {
            outside_before += 1;
        }
    }
    sign
}

fn enumerate_nbc(
    arr: &Arrangement,
    ambient: &[GenId],
    target_len: usize,
    current: &mut Vec<GenId>,
    start: usize,
    out: &mut Vec<Vec<GenId>>,
) {
    if current.len() == target_len {
        if arr.stratum_of(current).is_some() && is_nbc(arr, current) {
            // full rank within A_F is guaranteed by independence at length
            // rank(F); reject dependent sets via the rank check
            let sid = arr.stratum_of(current).unwrap();
            if arr.strata[sid].rank() == current.len() {
                out.push(current.clone());
            }
        }
        return;
    }
    for k in start..ambient.len() {
        current.push(ambient[k]);
        // prune: keep only independent prefixes
        if let Some(sid) = arr.stratum_of(current) {
            if arr.strata[sid].rank() == current.len() {
                enumerate_nbc(arr, ambient, target_len, current, k + 1, out);
            }
        }
        current.pop();
    }
}

/// `sorted` contains no broken circuit: no generator `y` outside the set is
/// implied by the members above it.
fn is_nbc(arr: &Arrangement, sorted: &[GenId]) -> bool {
    let Some(&max) = sorted.last() else {
        return true;
    };
    for y in 0..max {
        if sorted.binary_search(&y).is_ok() {
            continue;
        }
        let above: Vec<GenId> = sorted.iter().copied().filter(|&t| t > y).collect();
        if above.is_empty() {
            continue;
        }
        if let Some(sid) = arr.stratum_of(&above) {
            if arr.strata[sid].satisfies(&arr.generators[y]) {
                return false;
            }
        }
    }
    true
}

fn collect(acc: BTreeMap<MonoId, Rational>) -> OsCombination {
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| (c, m))
        .collect()
}

/// Per-rank dimensions of `A` computed from the quotient presentation: span
/// the ideal generated by `e_S` for minimal vanishing `S` and `del e_C` for
/// circuits `C` inside the free exterior algebra, degree by degree. Oracle
/// for [`OsAlgebra::dims_by_rank`]; guarded by a generator-count ceiling.
pub fn brute_force_os_dims(n: usize, r: usize, max_gens: usize) -> Result<Vec<u64>, Error> {
    let arr = Arrangement::build(n, r);
    let gens = arr.generators.len();
    if gens > max_gens {
        return Err(Error::ResourceGuard(format!(
            "brute-force OS oracle: {gens} generators exceeds ceiling {max_gens}"
        )));
    }

    // monomials of the free exterior algebra, as sorted subsets
    let subsets = all_subsets(gens);
    let subset_index: BTreeMap<Vec<GenId>, usize> = subsets
        .iter()
        .enumerate()
        .map(|(k, s)| (s.clone(), k))
        .collect();

    // classify subsets
    let mut circuits: Vec<Vec<GenId>> = Vec::new();
    let mut min_vanishing: Vec<Vec<GenId>> = Vec::new();
    for s in &subsets {
        if s.is_empty() {
            continue;
        }
        match arr.stratum_of(s) {
            None => {
                let minimal = proper_subsets_one_less(s)
                    .all(|t| arr.stratum_of(&t).is_some());
                if minimal {
                    min_vanishing.push(s.clone());
                }
            }
            Some(sid) => {
                if arr.strata[sid].rank() < s.len() {
                    let minimal = proper_subsets_one_less(s).all(|t| {
                        arr.stratum_of(&t)
                            .map(|tid| arr.strata[tid].rank() == t.len())
                            .unwrap_or(false)
                    });
                    if minimal {
                        circuits.push(s.clone());
                    }
                }
            }
        }
    }

    // relation elements as (degree, vector over subsets)
    let mut relations: Vec<(usize, SparseVec)> = Vec::new();
    for v in &min_vanishing {
        let col = subset_index[v];
        relations.push((v.len(), vec![(col, rat_int(1))]));
    }
    for c in &circuits {
        let mut vec: SparseVec = Vec::new();
        for j in 0..c.len() {
            let mut rest = c.clone();
            rest.remove(j);
            let col = subset_index[&rest];
            let sign = if j % 2 == 0 { 1 } else { -1 };
            vec.push((col, rat_int(sign)));
        }
        vec.sort_by_key(|e| e.0);
        relations.push((c.len() - 1, vec));
    }

    // span the ideal degree by degree
    let mut dims = Vec::new();
    for k in 0..=gens {
        let degree_cols: Vec<usize> = subsets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() == k)
            .map(|(idx, _)| idx)
            .collect();
        if degree_cols.is_empty() {
            break;
        }
        let mut echelon = RowEchelon::new(subsets.len());
        for (deg, rel) in &relations {
            if *deg > k {
                continue;
            }
            for m in &subsets {
                if m.len() != k - deg {
                    continue;
                }
                // product rel * e_m inside the exterior algebra
                let mut product: SparseVec = Vec::new();
                for (col, coeff) in rel {
                    let s = &subsets[*col];
                    let mut word: Vec<GenId> = s.clone();
                    word.extend(m.iter().copied());
                    if let Some((sign, sorted)) = sort_with_sign(&word) {
                        let target = subset_index[&sorted];
                        product.push((target, coeff * rat_int(sign)));
                    }
                }
                product.sort_by_key(|e| e.0);
                // merge duplicate columns (cannot happen: distinct sources
                // stay distinct after adjoining the same m), insert
                echelon.insert(product);
            }
        }
        dims.push(degree_cols.len() as u64 - echelon.rank() as u64);
    }
    while dims.last() == Some(&0) {
        dims.pop();
    }
    Ok(dims)
}

fn all_subsets(gens: usize) -> Vec<Vec<GenId>> {
    let mut out: Vec<Vec<GenId>> = Vec::with_capacity(1 << gens);
    for mask in 0u64..(1u64 << gens) {
        out.push((0..gens).filter(|k| mask >> k & 1 == 1).collect());
    }
    out.sort_by_key(|s: &Vec<GenId>| (s.len(), s.clone()));
    out
}

fn proper_subsets_one_less(s: &[GenId]) -> impl Iterator<Item = Vec<GenId>> + '_ {
    (0..s.len()).map(move |j| {
        let mut t = s.to_vec();
        t.remove(j);
        t
    })
}
