//! Symmetric group combinatorics: cycle types, class functions, induction.

use std::collections::BTreeMap;

use num::Zero;

use crate::error::Error;
use crate::linalg::{rat_int, Rational};

/// A partition, parts descending. The empty partition is the cycle type of
/// the unique element of `S_0`.
pub type Partition = Vec<usize>;

/// All partitions of `n`, deterministic order (descending first part).
pub fn partitions(n: usize) -> Vec<Partition> {
    fn go(remaining: usize, max_part: usize, prefix: &mut Partition, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            go(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n.max(1), &mut Vec::new(), &mut out);
    out
}

/// Centralizer order `z_mu = prod_k k^{m_k} m_k!`.
pub fn centralizer_order(mu: &Partition) -> u64 {
    let mut mult: BTreeMap<usize, u64> = BTreeMap::new();
    for &part in mu {
        *mult.entry(part).or_insert(0) += 1;
    }
    let mut z = 1u64;
    for (k, m) in mult {
        z *= (k as u64).pow(m as u32);
        for f in 1..=m {
            z *= f;
        }
    }
    z
}

/// A permutation of `{0..n}` with cycle type `mu`, cycles laid out over
/// consecutive letters.
pub fn representative(mu: &Partition) -> Vec<usize> {
    let n: usize = mu.iter().sum();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut start = 0;
    for &len in mu {
        for k in 0..len {
            perm[start + k] = start + (k + 1) % len;
        }
        start += len;
    }
    perm
}

/// Cycle type of a permutation, parts descending.
pub fn cycle_type(perm: &[usize]) -> Partition {
    let mut seen = vec![false; perm.len()];
    let mut parts = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        parts.push(len);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    parts
}

/// All permutations of `{0..n}`, lexicographic.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(items, k - 1, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    if n == 0 {
        return vec![Vec::new()];
    }
    heap(&mut items, n, &mut out);
    out.sort();
    out
}

/// A class function on `S_n`, one rational value per cycle type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub n: usize,
    pub values: BTreeMap<Partition, Rational>,
}

impl Character {
    pub fn zero(n: usize) -> Character {
        let values = partitions(n)
            .into_iter()
            .map(|mu| (mu, Rational::zero()))
            .collect();
        Character { n, values }
    }

    pub fn trivial(n: usize) -> Character {
        let values = partitions(n)
            .into_iter()
            .map(|mu| (mu, rat_int(1)))
            .collect();
        Character { n, values }
    }

    pub fn value(&self, mu: &Partition) -> Rational {
        self.values.get(mu).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, mu: Partition, v: Rational) {
        self.values.insert(mu, v);
    }

    /// Dimension of the underlying representation: value at `1^n`.
    pub fn dim(&self) -> Rational {
        self.value(&vec![1; self.n])
    }

    pub fn add_assign(&mut self, other: &Character) {
        assert_eq!(self.n, other.n);
        for (mu, v) in &other.values {
            *self
                .values
                .entry(mu.clone())
                .or_insert_with(Rational::zero) += v;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|v| v.is_zero())
    }

    /// Induced character from `S_n` to `S_{n + t}` along the subgroup fixing
    /// the last `t` letters: zero unless the cycle type has at least `t`
    /// fixed points, in which case the value is `(z_mu / z_nu) chi(nu)` where
    /// `nu` drops `t` one-parts from `mu`.
    pub fn induce(&self, t: usize) -> Character {
        let n = self.n + t;
        let mut out = Character::zero(n);
        for mu in partitions(n) {
            let ones = mu.iter().filter(|&&p| p == 1).count();
            if ones < t {
                continue;
            }
            let mut nu = mu.clone();
            for _ in 0..t {
                let pos = nu.iter().rposition(|&p| p == 1).unwrap();
                nu.remove(pos);
            }
            let z_mu = centralizer_order(&mu);
            let z_nu = centralizer_order(&nu);
            let factor = rat_int(z_mu as i64) / rat_int(z_nu as i64);
            out.set(mu, factor * self.value(&nu));
        }
        out
    }

    /// Dimension of the invariant subspace: the inner product with the
    /// trivial character. Errors when the average is not a nonnegative
    /// integer, which would signal a corrupted action.
    pub fn invariant_dim(&self) -> Result<u64, Error> {
        let mut acc = Rational::zero();
        for (mu, v) in &self.values {
            acc += v / rat_int(centralizer_order(mu) as i64);
        }
        if !acc.is_integer() || acc < Rational::zero() {
            return Err(Error::NonIntegerInvariant(format!(
                "character average {} is not a nonnegative integer",
                acc
            )));
        }
        let digits = acc.to_integer().to_string();
        Ok(digits.parse::<u64>().expect("nonnegative integer"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        assert_eq!(partitions(0).len(), 1);
        assert_eq!(partitions(1).len(), 1);
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(5).len(), 7);
        assert_eq!(partitions(6).len(), 11);
    }

    #[test]
    fn centralizer_orders_sum_to_group_order() {
        for n in 1..=6usize {
            let total: Rational = partitions(n)
                .iter()
                .map(|mu| rat_int(1) / rat_int(centralizer_order(mu) as i64))
                .sum();
            // sum of class sizes / n! = 1
            assert_eq!(total, rat_int(1), "n = {n}");
        }
    }

    #[test]
    fn representative_has_right_type() {
        for n in 1..=5usize {
            for mu in partitions(n) {
                assert_eq!(cycle_type(&representative(&mu)), mu);
            }
        }
    }

    #[test]
    fn induce_trivial_from_s1_to_s2_is_regular() {
        let chi = Character::trivial(1);
        let ind = chi.induce(1);
        assert_eq!(ind.value(&vec![1, 1]), rat_int(2));
        assert_eq!(ind.value(&vec![2]), rat_int(0));
    }

    #[test]
    fn induced_dimension_is_index_times_dim() {
        let mut chi = Character::trivial(3);
        // a non-trivial class function: sign character of S_3
        chi.set(vec![2, 1], rat_int(-1));
        chi.set(vec![1, 1, 1], rat_int(1));
        chi.set(vec![3], rat_int(1));
        for t in 1..=2usize {
            let ind = chi.induce(t);
            let n = 3 + t;
            let index: i64 = ((4)..=(n as i64)).product();
            assert_eq!(ind.dim(), chi.dim() * rat_int(index));
        }
    }

    #[test]
    fn shapiro_invariants_preserved_under_induction() {
        // several class functions with integer invariants
        let mut regular = Character::zero(2);
        regular.set(vec![1, 1], rat_int(2));
        regular.set(vec![2], rat_int(0));
        let sign3 = {
            let mut c = Character::zero(3);
            c.set(vec![1, 1, 1], rat_int(1));
            c.set(vec![2, 1], rat_int(-1));
            c.set(vec![3], rat_int(1));
            c
        };
        for chi in [Character::trivial(2), regular, sign3] {
            for t in 1..=2usize {
                let ind = chi.induce(t);
                assert_eq!(
                    ind.invariant_dim().unwrap(),
                    chi.invariant_dim().unwrap(),
                    "Shapiro fails for {chi:?} t={t}"
                );
            }
        }
    }

    #[test]
    fn invariant_dim_rejects_non_integer_averages() {
        let mut chi = Character::zero(2);
        chi.set(vec![1, 1], rat_int(1));
        chi.set(vec![2], rat_int(0));
        assert!(chi.invariant_dim().is_err());
    }

    #[test]
    fn all_permutations_count() {
        assert_eq!(all_permutations(0).len(), 1);
        assert_eq!(all_permutations(3).len(), 6);
        assert_eq!(all_permutations(4).len(), 24);
    }
}
