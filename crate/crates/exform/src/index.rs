//! Combinatorics of alternating multi-indices.
//!
//! Strictly increasing index tuples label the coefficients of a k-form in a
//! chart. Everything downstream (exterior derivative, Hodge star, the
//! reflection sign rules) reduces to permutation signs and complement
//! bookkeeping on these tuples. Indices are 1-based throughout.

use crate::error::{Error, Result};

/// A strictly increasing tuple of indices in `1..=n`, labelling one
/// coefficient of a degree-k form in ambient dimension n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    entries: Vec<usize>,
    n: usize,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>, n: usize) -> Result<Self> {
        if entries.len() > n {
            return Err(Error::DegreeOutOfRange {
                n,
                k: entries.len() as isize,
            });
        }
        for w in entries.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Invalid(format!(
                    "multi-index entries must be strictly increasing, got {entries:?}"
                )));
            }
        }
        for &e in &entries {
            if e < 1 || e > n {
                return Err(Error::IndexOutOfRange { index: e, n });
            }
        }
        Ok(Self { entries, n })
    }

    pub fn empty(n: usize) -> Self {
        Self { entries: vec![], n }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn degree(&self) -> usize {
        self.entries.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    /// Whether some entry equals n. Drives every sign rule in the
    /// reflection extension.
    pub fn contains_n(&self) -> bool {
        self.entries.last() == Some(&self.n)
    }

    pub fn contains(&self, j: usize) -> bool {
        self.entries.binary_search(&j).is_ok()
    }

    /// Label used in serialized coefficient maps, e.g. "1,3".
    pub fn label(&self) -> String {
        self.entries
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// The increasing complement J of self in {1..n} together with the sign
    /// of the permutation (self ‖ J).
    pub fn complement_with_sign(&self) -> (MultiIndex, i32) {
        let comp: Vec<usize> = (1..=self.n).filter(|j| !self.contains(*j)).collect();
        let mut concat = self.entries.clone();
        concat.extend_from_slice(&comp);
        let sign = permutation_sign_unchecked(&concat);
        (
            MultiIndex {
                entries: comp,
                n: self.n,
            },
            sign,
        )
    }

    /// Where j sorts into self and the sign (−1)^position, or `None` if j is
    /// already present.
    pub fn insert_index(&self, j: usize) -> Option<(usize, i32)> {
        match self.entries.binary_search(&j) {
            Ok(_) => None,
            Err(pos) => Some((pos, if pos % 2 == 0 { 1 } else { -1 })),
        }
    }

    /// The tuple with j inserted in sorted position. Caller must ensure j is
    /// absent.
    pub fn with_inserted(&self, j: usize) -> MultiIndex {
        let mut entries = self.entries.clone();
        let pos = entries.binary_search(&j).unwrap_err();
        entries.insert(pos, j);
        MultiIndex { entries, n: self.n }
    }

    /// The tuple with the entry at `pos` removed.
    pub fn with_removed(&self, pos: usize) -> MultiIndex {
        let mut entries = self.entries.clone();
        entries.remove(pos);
        MultiIndex { entries, n: self.n }
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})", self.label())
    }
}

/// All C(n,k) strictly increasing tuples in lexicographic order.
pub fn enumerate_multi_indices(n: usize, k: usize) -> Result<Vec<MultiIndex>> {
    if k > n {
        return Err(Error::DegreeOutOfRange { n, k: k as isize });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
        if current.len() == k {
            out.push(MultiIndex {
                entries: current.clone(),
                n,
            });
            return;
        }
        let remaining = k - current.len();
        for j in start..=(n + 1 - remaining) {
            current.push(j);
            rec(j + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(1, n, k, &mut current, &mut out);
    Ok(out)
}

/// Parity sign of the sequence: 0 on a repeat, otherwise ±1 by inversion
/// count. Entries must lie in `1..=n`.
pub fn permutation_sign(seq: &[usize], n: usize) -> Result<i32> {
    for &e in seq {
        if e < 1 || e > n {
            return Err(Error::IndexOutOfRange { index: e, n });
        }
    }
    Ok(permutation_sign_unchecked(seq))
}

fn permutation_sign_unchecked(seq: &[usize]) -> i32 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in (i + 1)..seq.len() {
            if seq[i] == seq[j] {
                return 0;
            }
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Binomial coefficient C(n,k) for desk-scale n.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1usize;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_basis_one_forms() {
        let v = enumerate_multi_indices(3, 1).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0].entries(), &[1]);
        assert_eq!(v[2].entries(), &[3]);
    }

    #[test]
    fn enumerate_zero_forms() {
        let v = enumerate_multi_indices(3, 0).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].entries().is_empty());
    }

    #[test]
    fn enumerate_two_forms_dim_four() {
        let v = enumerate_multi_indices(4, 2).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v[0].entries(), &[1, 2]);
        assert_eq!(v[5].entries(), &[3, 4]);
    }

    #[test]
    fn enumerate_rejects_k_above_n() {
        assert!(enumerate_multi_indices(2, 3).is_err());
    }

    #[test]
    fn permutation_signs() {
        assert_eq!(permutation_sign(&[1, 2, 3], 3).unwrap(), 1);
        assert_eq!(permutation_sign(&[2, 1, 3], 3).unwrap(), -1);
        assert_eq!(permutation_sign(&[1, 1, 2], 3).unwrap(), 0);
        assert!(permutation_sign(&[0, 1], 3).is_err());
        assert!(permutation_sign(&[1, 4], 3).is_err());
    }

    #[test]
    fn complements() {
        let i = MultiIndex::new(vec![1], 3).unwrap();
        let (j, s) = i.complement_with_sign();
        assert_eq!(j.entries(), &[2, 3]);
        assert_eq!(s, 1);

        let i = MultiIndex::new(vec![2], 3).unwrap();
        let (j, s) = i.complement_with_sign();
        assert_eq!(j.entries(), &[1, 3]);
        assert_eq!(s, -1);

        let i = MultiIndex::new(vec![1, 2], 2).unwrap();
        let (j, s) = i.complement_with_sign();
        assert!(j.entries().is_empty());
        assert_eq!(s, 1);
    }

    #[test]
    fn double_complement_sign() {
        // ε_{I,J}·ε_{J,I} = (−1)^{k(n−k)}
        for n in 1..=5 {
            for k in 0..=n {
                for idx in enumerate_multi_indices(n, k).unwrap() {
                    let (j, s1) = idx.complement_with_sign();
                    let (back, s2) = j.complement_with_sign();
                    assert_eq!(back, idx);
                    let expect = if (k * (n - k)) % 2 == 0 { 1 } else { -1 };
                    assert_eq!(s1 * s2, expect, "n={n} k={k} I={idx}");
                }
            }
        }
    }

    #[test]
    fn insert_positions() {
        let i = MultiIndex::new(vec![2, 3], 4).unwrap();
        assert_eq!(i.insert_index(1), Some((0, 1)));
        let i = MultiIndex::new(vec![1, 3], 4).unwrap();
        assert_eq!(i.insert_index(2), Some((1, -1)));
        let i = MultiIndex::new(vec![1, 2], 4).unwrap();
        assert_eq!(i.insert_index(2), None);
    }

    #[test]
    fn enumeration_counts_and_distinct() {
        for n in 0..=6 {
            for k in 0..=n {
                let v = enumerate_multi_indices(n, k).unwrap();
                assert_eq!(v.len(), binomial(n, k));
                let mut w = v.clone();
                w.dedup();
                assert_eq!(w.len(), v.len());
            }
        }
    }

    #[test]
    fn sign_multiplicative_on_disjoint_transpositions() {
        // swapping two disjoint pairs composes multiplicatively
        let base = [1usize, 2, 3, 4, 5];
        let mut s1 = base;
        s1.swap(0, 1);
        let mut s2 = base;
        s2.swap(2, 3);
        let mut s12 = base;
        s12.swap(0, 1);
        s12.swap(2, 3);
        let a = permutation_sign(&s1, 5).unwrap();
        let b = permutation_sign(&s2, 5).unwrap();
        let c = permutation_sign(&s12, 5).unwrap();
        assert_eq!(a * b, c);
    }
}
