//! Finite presentations of cohomology rings of smooth complex varieties.
//!
//! A [`VarietyModel`] records a basis of `H^*(X;Q)` with Hodge bigrading, the
//! cup-product structure constants, the diagonal class in `H^{2d}(X x X)`, the
//! point class, a compactness flag and an optional purity slope. Models are
//! the only ingestion path of the engine: nothing is ever computed from
//! equations of a variety.

use std::collections::BTreeMap;
use std::fmt;

use num::Zero;
use serde::Deserialize;

use crate::linalg::{parse_rational, rat_int, Rational};

/// Hodge type `(p, q)` of a cohomology class; weight is `p + q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HodgeType {
    pub p: u32,
    pub q: u32,
}

impl HodgeType {
    pub fn new(p: u32, q: u32) -> Self {
        HodgeType { p, q }
    }

    pub fn weight(&self) -> u32 {
        self.p + self.q
    }

    /// Tate twist by `t`: `(p, q) -> (p + t, q + t)`.
    pub fn twist(&self, t: u32) -> HodgeType {
        HodgeType::new(self.p + t, self.q + t)
    }

    pub fn plus(&self, other: HodgeType) -> HodgeType {
        HodgeType::new(self.p + other.p, self.q + other.q)
    }
}

impl fmt::Display for HodgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// Index of a basis class in a [`VarietyModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub usize);

/// One basis class of `H^*(X;Q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohClass {
    pub name: String,
    pub degree: u32,
    pub hodge: HodgeType,
}

/// Linear combination of basis classes.
pub type ClassCombination = Vec<(Rational, ClassId)>;

/// Finite presentation of `H^*(X;Q)` for a connected smooth complex variety
/// `X` of complex dimension `dim_c`.
#[derive(Clone, Debug)]
pub struct VarietyModel {
    pub name: String,
    pub dim_c: u32,
    pub compact: bool,
    pub classes: Vec<CohClass>,
    /// Full product table: every ordered pair present (zero = empty vec).
    products: BTreeMap<(ClassId, ClassId), ClassCombination>,
    pub diagonal: Vec<(Rational, ClassId, ClassId)>,
    pub point_class: ClassCombination,
    pub slope: Option<Rational>,
    unit: Option<ClassId>,
}

impl VarietyModel {
    /// Assembles a model from its parts. `products` needs only one order per
    /// unordered pair; the mirror is filled in by graded commutativity and
    /// unit products are filled in automatically. No validation happens here;
    /// call [`VarietyModel::validate`].
    pub fn assemble(
        name: impl Into<String>,
        dim_c: u32,
        compact: bool,
        classes: Vec<CohClass>,
        products: Vec<((ClassId, ClassId), ClassCombination)>,
        diagonal: Vec<(Rational, ClassId, ClassId)>,
        point_class: ClassCombination,
        slope: Option<Rational>,
    ) -> Result<Self, String> {
        let unit = {
            let zeros: Vec<ClassId> = classes
                .iter()
                .enumerate()
                .filter(|(_, c)| c.degree == 0)
                .map(|(k, _)| ClassId(k))
                .collect();
            if zeros.len() == 1 {
                Some(zeros[0])
            } else {
                None
            }
        };
        let mut table: BTreeMap<(ClassId, ClassId), ClassCombination> = BTreeMap::new();
        for ((l, r), terms) in products {
            if l.0 >= classes.len() || r.0 >= classes.len() {
                return Err(format!("product pair ({},{}) out of range", l.0, r.0));
            }
            if table.contains_key(&(l, r)) {
                return Err(format!(
                    "product of `{}` and `{}` defined twice",
                    classes[l.0].name, classes[r.0].name
                ));
            }
            let mirror_sign = if classes[l.0].degree % 2 == 1 && classes[r.0].degree % 2 == 1 {
                rat_int(-1)
            } else {
                rat_int(1)
            };
            let mirror: ClassCombination = terms
                .iter()
                .map(|(c, g)| (c * &mirror_sign, *g))
                .collect();
            table.insert((l, r), terms);
            if l != r {
                if table.contains_key(&(r, l)) {
                    return Err(format!(
                        "product of `{}` and `{}` defined twice",
                        classes[r.0].name, classes[l.0].name
                    ));
                }
                table.insert((r, l), mirror);
            }
        }
        if let Some(u) = unit {
            for k in 0..classes.len() {
                let c = ClassId(k);
                table
                    .entry((u, c))
                    .or_insert_with(|| vec![(rat_int(1), c)]);
                table
                    .entry((c, u))
                    .or_insert_with(|| vec![(rat_int(1), c)]);
            }
        }
        Ok(VarietyModel {
            name: name.into(),
            dim_c,
            compact,
            classes,
            products: table,
            diagonal,
            point_class,
            slope,
            unit,
        })
    }

    pub fn class(&self, id: ClassId) -> &CohClass {
        &self.classes[id.0]
    }

    pub fn class_by_name(&self, name: &str) -> Option<ClassId> {
        self.classes
            .iter()
            .position(|c| c.name == name)
            .map(ClassId)
    }

    /// The unique degree-0 class, when the model has one.
    pub fn unit(&self) -> Option<ClassId> {
        self.unit
    }

    /// Cup product of two basis classes as a combination of basis classes.
    pub fn multiply(&self, a: ClassId, b: ClassId) -> &[(Rational, ClassId)] {
        static EMPTY: &[(Rational, ClassId)] = &[];
        self.products.get(&(a, b)).map(Vec::as_slice).unwrap_or(EMPTY)
    }

    /// Betti numbers by degree, `0 ..= 2 dim_c`.
    pub fn betti(&self) -> Vec<u64> {
        let mut dims = vec![0u64; 2 * self.dim_c as usize + 1];
        for c in &self.classes {
            dims[c.degree as usize] += 1;
        }
        dims
    }

    /// Checks every model invariant and lists the violations; an empty report
    /// means the model is valid.
    pub fn validate(&self) -> Vec<String> {
        let mut report = Vec::new();
        let d = self.dim_c;
        if d == 0 {
            report.push("dim_c must be positive".to_string());
        }
        let zero_classes: Vec<&CohClass> =
            self.classes.iter().filter(|c| c.degree == 0).collect();
        if zero_classes.len() != 1 {
            report.push(format!(
                "expected exactly one degree-0 class, found {}",
                zero_classes.len()
            ));
        } else if zero_classes[0].hodge != HodgeType::new(0, 0) {
            report.push(format!(
                "degree-0 class `{}` must have Hodge type (0,0), found {}",
                zero_classes[0].name, zero_classes[0].hodge
            ));
        }
        let mut names = BTreeMap::new();
        for c in &self.classes {
            if names.insert(&c.name, ()).is_some() {
                report.push(format!("duplicate class name `{}`", c.name));
            }
        }

        let n = self.classes.len();
        for a in 0..n {
            for b in 0..n {
                let (ia, ib) = (ClassId(a), ClassId(b));
                let ca = &self.classes[a];
                let cb = &self.classes[b];
                for (coeff, g) in self.multiply(ia, ib) {
                    if coeff.is_zero() {
                        report.push(format!(
                            "stored zero coefficient in product {}*{}",
                            ca.name, cb.name
                        ));
                    }
                    let cg = self.class(*g);
                    if cg.degree != ca.degree + cb.degree {
                        report.push(format!(
                            "product {}*{} hits `{}` of wrong degree",
                            ca.name, cb.name, cg.name
                        ));
                    }
                    if cg.hodge != ca.hodge.plus(cb.hodge) {
                        report.push(format!(
                            "product {}*{} violates Hodge additivity at `{}`",
                            ca.name, cb.name, cg.name
                        ));
                    }
                }
                // graded commutativity
                let sign = if ca.degree % 2 == 1 && cb.degree % 2 == 1 {
                    rat_int(-1)
                } else {
                    rat_int(1)
                };
                let lhs = combination_map(self.multiply(ia, ib));
                let rhs: BTreeMap<ClassId, Rational> = combination_map(self.multiply(ib, ia))
                    .into_iter()
                    .map(|(g, c)| (g, c * &sign))
                    .collect();
                if lhs != rhs {
                    report.push(format!(
                        "graded commutativity fails for {} and {}",
                        ca.name, cb.name
                    ));
                }
            }
        }
        if let Some(u) = self.unit {
            for k in 0..n {
                let c = ClassId(k);
                let want = vec![(rat_int(1), c)];
                if combination_map(self.multiply(u, c)) != combination_map(&want)
                    || combination_map(self.multiply(c, u)) != combination_map(&want)
                {
                    report.push(format!(
                        "degree-0 class is not a unit on `{}`",
                        self.classes[k].name
                    ));
                }
            }
        }
        // associativity on all basis triples
        'outer: for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let (ia, ib, ic) = (ClassId(a), ClassId(b), ClassId(c));
                    let left = self.multiply_combination(&self.scaled(self.multiply(ia, ib)), ic);
                    let right = self.multiply_class_combination(ia, self.multiply(ib, ic));
                    if combination_map(&left) != combination_map(&right) {
                        report.push(format!(
                            "associativity fails on ({}, {}, {})",
                            self.classes[a].name, self.classes[b].name, self.classes[c].name
                        ));
                        break 'outer;
                    }
                }
            }
        }

        for (coeff, l, r) in &self.diagonal {
            if coeff.is_zero() {
                report.push("stored zero coefficient in diagonal".to_string());
            }
            let (cl, cr) = (self.class(*l), self.class(*r));
            if cl.degree + cr.degree != 2 * d {
                report.push(format!(
                    "diagonal term {}(x){} has degree {} != 2d",
                    cl.name,
                    cr.name,
                    cl.degree + cr.degree
                ));
            }
            if cl.hodge.plus(cr.hodge) != HodgeType::new(d, d) {
                report.push(format!(
                    "diagonal term {}(x){} has Hodge type {} != (d,d)",
                    cl.name,
                    cr.name,
                    cl.hodge.plus(cr.hodge)
                ));
            }
        }
        // diagonal symmetry under swapping factors with the Koszul sign
        let mut swapped: BTreeMap<(ClassId, ClassId), Rational> = BTreeMap::new();
        for (coeff, l, r) in &self.diagonal {
            let sign = if self.class(*l).degree % 2 == 1 && self.class(*r).degree % 2 == 1 {
                rat_int(-1)
            } else {
                rat_int(1)
            };
            *swapped.entry((*r, *l)).or_insert_with(Rational::zero) += coeff * &sign;
        }
        swapped.retain(|_, c| !c.is_zero());
        let mut original: BTreeMap<(ClassId, ClassId), Rational> = BTreeMap::new();
        for (coeff, l, r) in &self.diagonal {
            *original.entry((*l, *r)).or_insert_with(Rational::zero) += coeff;
        }
        original.retain(|_, c| !c.is_zero());
        if swapped != original {
            report.push("diagonal is not symmetric under the Koszul swap".to_string());
        }

        for (coeff, g) in &self.point_class {
            if coeff.is_zero() {
                report.push("stored zero coefficient in point class".to_string());
            }
            let cg = self.class(*g);
            if cg.degree != 2 * d {
                report.push(format!(
                    "point class term `{}` has degree {} != 2d",
                    cg.name, cg.degree
                ));
            }
            if cg.hodge != HodgeType::new(d, d) {
                report.push(format!(
                    "point class term `{}` has Hodge type {} != (d,d)",
                    cg.name, cg.hodge
                ));
            }
        }

        if !self.compact {
            for c in &self.classes {
                if c.degree >= 2 * d {
                    report.push(format!(
                        "noncompact model has class `{}` in degree {} >= 2d",
                        c.name, c.degree
                    ));
                }
            }
            if !self.point_class.is_empty() {
                report.push("noncompact model must have zero point class".to_string());
            }
        }

        if let Some(lambda) = &self.slope {
            for c in &self.classes {
                let weight = rat_int(c.hodge.weight() as i64);
                let expected = lambda * rat_int(c.degree as i64);
                if weight != expected {
                    report.push(format!(
                        "slope {} violated by `{}`: weight {} != slope * degree",
                        crate::linalg::format_rational(lambda),
                        c.name,
                        c.hodge.weight()
                    ));
                }
            }
        }
        report
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    fn scaled(&self, terms: &[(Rational, ClassId)]) -> ClassCombination {
        terms.to_vec()
    }

    fn multiply_combination(&self, comb: &[(Rational, ClassId)], b: ClassId) -> ClassCombination {
        let mut acc: BTreeMap<ClassId, Rational> = BTreeMap::new();
        for (c, g) in comb {
            for (c2, g2) in self.multiply(*g, b) {
                *acc.entry(*g2).or_insert_with(Rational::zero) += c * c2;
            }
        }
        acc.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (c, g))
            .collect()
    }

    fn multiply_class_combination(
        &self,
        a: ClassId,
        comb: &[(Rational, ClassId)],
    ) -> ClassCombination {
        let mut acc: BTreeMap<ClassId, Rational> = BTreeMap::new();
        for (c, g) in comb {
            for (c2, g2) in self.multiply(a, *g) {
                *acc.entry(*g2).or_insert_with(Rational::zero) += c * c2;
            }
        }
        acc.into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(g, c)| (c, g))
            .collect()
    }
}

fn combination_map(terms: &[(Rational, ClassId)]) -> BTreeMap<ClassId, Rational> {
    let mut acc: BTreeMap<ClassId, Rational> = BTreeMap::new();
    for (c, g) in terms {
        *acc.entry(*g).or_insert_with(Rational::zero) += c;
    }
    acc.retain(|_, c| !c.is_zero());
    acc
}

/// The Kuenneth tensor power `H^*(X^n) = H^*(X)^(x)n`. Basis elements are
/// words of `n` class ids; multiplication carries the Koszul sign.
pub struct TensorPower<'a> {
    pub model: &'a VarietyModel,
    pub n: usize,
}

/// A basis element of `H^*(X^n)`: the class placed at each coordinate.
pub type TensorWord = Vec<ClassId>;

impl<'a> TensorPower<'a> {
    pub fn new(model: &'a VarietyModel, n: usize) -> Self {
        TensorPower { model, n }
    }

    pub fn degree(&self, w: &TensorWord) -> u32 {
        w.iter().map(|c| self.model.class(*c).degree).sum()
    }

    pub fn hodge(&self, w: &TensorWord) -> HodgeType {
        w.iter().fold(HodgeType::new(0, 0), |h, c| {
            h.plus(self.model.class(*c).hodge)
        })
    }

    /// All basis words, grouped as a flat deterministic enumeration.
    pub fn basis(&self) -> Vec<TensorWord> {
        let mut out = vec![Vec::new()];
        for _ in 0..self.n {
            let mut next = Vec::with_capacity(out.len() * self.model.classes.len());
            for w in &out {
                for k in 0..self.model.classes.len() {
                    let mut w2 = w.clone();
                    w2.push(ClassId(k));
                    next.push(w2);
                }
            }
            out = next;
        }
        out
    }

    pub fn dims_by_degree(&self) -> Vec<u64> {
        let mut dims = Vec::new();
        for w in self.basis() {
            let d = self.degree(&w) as usize;
            if dims.len() <= d {
                dims.resize(d + 1, 0);
            }
            dims[d] += 1;
        }
        dims
    }

    /// Product of two basis words with the Koszul sign
    /// `(-1)^{sum_{k>l} deg a_k deg b_l}`, expanded over the per-coordinate
    /// cup products.
    pub fn multiply(&self, a: &TensorWord, b: &TensorWord) -> Vec<(Rational, TensorWord)> {
        assert_eq!(a.len(), self.n);
        assert_eq!(b.len(), self.n);
        let mut sign_exp = 0u32;
        for k in 0..self.n {
            for l in 0..k {
                sign_exp +=
                    self.model.class(a[k]).degree * self.model.class(b[l]).degree;
            }
        }
        let sign = if sign_exp % 2 == 1 {
            rat_int(-1)
        } else {
            rat_int(1)
        };
        let mut terms: Vec<(Rational, TensorWord)> = vec![(sign, Vec::with_capacity(self.n))];
        for k in 0..self.n {
            let factors = self.model.multiply(a[k], b[k]);
            if factors.is_empty() {
                return Vec::new();
            }
            let mut next = Vec::with_capacity(terms.len() * factors.len());
            for (c, w) in &terms {
                for (c2, g) in factors {
                    let mut w2 = w.clone();
                    w2.push(*g);
                    next.push((c * c2, w2));
                }
            }
            terms = next;
        }
        terms
    }
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    dim_c: u32,
    compact: bool,
    classes: Vec<ClassFile>,
    #[serde(default)]
    products: Vec<ProductFile>,
    #[serde(default)]
    diagonal: Vec<DiagonalTermFile>,
    #[serde(default)]
    point_class: Vec<PointTermFile>,
    #[serde(default)]
    slope: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassFile {
    name: String,
    degree: u32,
    p: u32,
    q: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductFile {
    left: String,
    right: String,
    terms: Vec<TermFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    coeff: String,
    class: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalTermFile {
    coeff: String,
    left: String,
    right: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointTermFile {
    coeff: String,
    class: String,
}

/// Parses a model from its JSON document. Unknown fields are rejected; the
/// returned model has passed [`VarietyModel::validate`].
pub fn model_from_json(name: &str, json: &str) -> Result<VarietyModel, String> {
    let file: ModelFile = serde_json::from_str(json).map_err(|e| format!("model file: {e}"))?;
    let classes: Vec<CohClass> = file
        .classes
        .iter()
        .map(|c| CohClass {
            name: c.name.clone(),
            degree: c.degree,
            hodge: HodgeType::new(c.p, c.q),
        })
        .collect();
    let lookup = |name: &str| -> Result<ClassId, String> {
        classes
            .iter()
            .position(|c| c.name == name)
            .map(ClassId)
            .ok_or_else(|| format!("unknown class name `{name}`"))
    };
    let mut products = Vec::new();
    for p in &file.products {
        let l = lookup(&p.left)?;
        let r = lookup(&p.right)?;
        let mut terms = Vec::new();
        for t in &p.terms {
            terms.push((parse_rational(&t.coeff)?, lookup(&t.class)?));
        }
        products.push(((l, r), terms));
    }
    let mut diagonal = Vec::new();
    for t in &file.diagonal {
        diagonal.push((parse_rational(&t.coeff)?, lookup(&t.left)?, lookup(&t.right)?));
    }
    let mut point_class = Vec::new();
    for t in &file.point_class {
        point_class.push((parse_rational(&t.coeff)?, lookup(&t.class)?));
    }
    let slope = match &file.slope {
        Some(s) => Some(parse_rational(s)?),
        None => None,
    };
    let model = VarietyModel::assemble(
        name,
        file.dim_c,
        file.compact,
        classes,
        products,
        diagonal,
        point_class,
        slope,
    )?;
    let report = model.validate();
    if !report.is_empty() {
        return Err(format!("invalid model: {}", report.join("; ")));
    }
    Ok(model)
}
