//! Canonical forms up to partition-preserving relabeling.
//!
//! The canonical matrix is the row-major lexicographic minimum of
//! `b[p(i)][p(j)]` over all permutations `p` that map mutable indices to
//! mutable indices. The search fixes one position at a time. Positions not yet
//! fixed are kept in ordered cells: members of a cell agree on every entry of
//! the rows fixed so far, so placing them in any order leaves those rows
//! unchanged. The row for the next position is fully determined by which
//! member of the leading cell is placed there, which lets the search keep only
//! the candidates with the smallest row (at the first step that is the sorted
//! out-weight profile of each index). Candidates that are twins, i.e. swapped
//! by an automorphism of the whole matrix, are explored once.

use std::cmp::Ordering;
use std::fmt;

use sha2::{Digest, Sha256};

use super::ExchangeMatrix;

/// The lexicographically least relabeling of a matrix, plus its content hash.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    matrix: ExchangeMatrix,
    hash: [u8; 32],
}

impl CanonicalForm {
    pub fn matrix(&self) -> &ExchangeMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ExchangeMatrix {
        self.matrix
    }

    pub fn hash(&self) -> &[u8; 32] {
        &self.hash
    }

    /// Lowercase hex of the 256-bit content hash.
    pub fn hex(&self) -> String {
        hex::encode(self.hash)
    }

    /// Wraps a matrix that is already canonical.
    pub(crate) fn from_canonical_matrix(matrix: ExchangeMatrix) -> Self {
        let hash = content_hash(&matrix);
        Self { matrix, hash }
    }
}

impl fmt::Debug for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalForm({}, {:?})", &self.hex()[..12], self.matrix.rows())
    }
}

/// SHA-256 of `n|m|e1,e2,…` over the row-major entries.
pub(crate) fn content_hash(matrix: &ExchangeMatrix) -> [u8; 32] {
    let entries: Vec<String> = matrix.entries().iter().map(i64::to_string).collect();
    let text = format!("{}|{}|{}", matrix.mutable(), matrix.frozen(), entries.join(","));
    Sha256::digest(text.as_bytes()).into()
}

pub fn canonical_form(b: &ExchangeMatrix) -> CanonicalForm {
    canonical_labeling(b).0
}

/// The canonical form together with a permutation `p` such that the canonical
/// matrix is `b.permuted(&p)`.
pub fn canonical_labeling(b: &ExchangeMatrix) -> (CanonicalForm, Vec<usize>) {
    let size = b.rank();
    let mut cells = Vec::with_capacity(2);
    if b.mutable() > 0 {
        cells.push((0..b.mutable()).collect::<Vec<_>>());
    }
    if b.frozen() > 0 {
        cells.push((b.mutable()..size).collect::<Vec<_>>());
    }
    let mut search = Search {
        b,
        size,
        prefix: Vec::with_capacity(size),
        rows: Vec::with_capacity(size * size),
        best: None,
    };
    search.descend(cells);
    let (rows, perm) = search.best.expect("at least one leaf");
    let matrix = b.permuted(&perm);
    debug_assert_eq!(matrix.entries(), rows.as_slice());
    (CanonicalForm::from_canonical_matrix(matrix), perm)
}

pub fn is_isomorphic(a: &ExchangeMatrix, b: &ExchangeMatrix) -> bool {
    a.mutable() == b.mutable() && a.frozen() == b.frozen() && canonical_form(a) == canonical_form(b)
}

struct Search<'a> {
    b: &'a ExchangeMatrix,
    size: usize,
    prefix: Vec<usize>,
    rows: Vec<i64>,
    best: Option<(Vec<i64>, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, cells: Vec<Vec<usize>>) {
        let t = self.prefix.len();
        if t == self.size {
            if self.best.as_ref().is_none_or(|(best, _)| self.rows < *best) {
                self.best = Some((self.rows.clone(), self.prefix.clone()));
            }
            return;
        }

        let mut candidates: Vec<(usize, Vec<i64>)> = Vec::new();
        for &v in &cells[0] {
            if candidates.iter().any(|&(u, _)| self.twins(u, v)) {
                continue;
            }
            let row = self.row_for(v, &cells);
            match candidates.first().map(|(_, r)| row.cmp(r)) {
                Some(Ordering::Greater) => {}
                Some(Ordering::Less) => candidates = vec![(v, row)],
                _ => candidates.push((v, row)),
            }
        }

        for (v, row) in candidates {
            self.rows.extend_from_slice(&row);
            let beaten = self
                .best
                .as_ref()
                .is_some_and(|(best, _)| self.rows.as_slice() > &best[..self.rows.len()]);
            if !beaten {
                let refined = self.refine(v, &cells);
                self.prefix.push(v);
                self.descend(refined);
                self.prefix.pop();
            }
            self.rows.truncate(t * self.size);
        }
    }

    /// Row `t` of the relabeled matrix when `v` is placed at position `t`.
    fn row_for(&self, v: usize, cells: &[Vec<usize>]) -> Vec<i64> {
        let mut row: Vec<i64> = self.prefix.iter().map(|&p| self.b.get(v, p)).collect();
        row.push(0);
        for cell in cells {
            let start = row.len();
            row.extend(cell.iter().filter(|&&u| u != v).map(|&u| self.b.get(v, u)));
            row[start..].sort_unstable();
        }
        row
    }

    /// Splits every cell by `b[v][u]`, ascending, after removing `v`.
    fn refine(&self, v: usize, cells: &[Vec<usize>]) -> Vec<Vec<usize>> {
        let mut out = Vec::with_capacity(cells.len() + 1);
        for cell in cells {
            let mut members: Vec<usize> = cell.iter().copied().filter(|&u| u != v).collect();
            members.sort_by_key(|&u| self.b.get(v, u));
            let mut start = 0;
            for end in 1..=members.len() {
                if end == members.len() || self.b.get(v, members[end]) != self.b.get(v, members[start]) {
                    out.push(members[start..end].to_vec());
                    start = end;
                }
            }
        }
        out
    }

    /// Whether swapping `u` and `v` is an automorphism. Callers only pass
    /// indices from the same cell, hence the same block.
    fn twins(&self, u: usize, v: usize) -> bool {
        self.b.get(u, v) == self.b.get(v, u)
            && (0..self.size)
                .filter(|&w| w != u && w != v)
                .all(|w| self.b.get(u, w) == self.b.get(v, w) && self.b.get(w, u) == self.b.get(w, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(b: &ExchangeMatrix) -> ExchangeMatrix {
        let mut best: Option<ExchangeMatrix> = None;
        let mut mutable: Vec<usize> = (0..b.mutable()).collect();
        loop {
            let mut frozen: Vec<usize> = (b.mutable()..b.rank()).collect();
            loop {
                let perm: Vec<usize> = mutable.iter().chain(&frozen).copied().collect();
                let c = b.permuted(&perm);
                if best.as_ref().is_none_or(|x| c.entries() < x.entries()) {
                    best = Some(c);
                }
                if !next_permutation(&mut frozen) {
                    break;
                }
            }
            if !next_permutation(&mut mutable) {
                break;
            }
        }
        best.unwrap()
    }

    fn next_permutation(v: &mut [usize]) -> bool {
        if v.len() < 2 {
            return false;
        }
        let mut i = v.len() - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = v.len() - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }

    #[test]
    fn reversed_arrow_is_same_form() {
        let a = ExchangeMatrix::kronecker(1);
        let b = ExchangeMatrix::quiver(&[vec![0, -1], vec![1, 0]]).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_eq!(canonical_form(&a).matrix().rows(), vec![vec![0, -1], vec![1, 0]]);
    }

    #[test]
    fn source_and_sink_centered_paths_differ() {
        // 1 ← 2 → 3 against 1 → 2 ← 3
        let source = ExchangeMatrix::quiver(&[vec![0, -1, 0], vec![1, 0, 1], vec![0, -1, 0]]).unwrap();
        let sink = ExchangeMatrix::quiver(&[vec![0, 1, 0], vec![-1, 0, -1], vec![0, 1, 0]]).unwrap();
        assert_ne!(canonical_form(&source), canonical_form(&sink));
        assert!(!is_isomorphic(&source, &sink));
    }

    #[test]
    fn isolated_fixed() {
        let i2 = ExchangeMatrix::isolated(2).unwrap();
        assert_eq!(canonical_form(&i2).matrix(), &i2);
    }

    #[test]
    fn isomorphism_examples() {
        let a2 = ExchangeMatrix::kronecker(1);
        assert!(is_isomorphic(&a2, &a2.mutate(0).unwrap()));
        assert!(!is_isomorphic(&a2, &ExchangeMatrix::kronecker(2)));
        let markov = ExchangeMatrix::cycle3(2, 2, 2);
        assert!(is_isomorphic(&markov, &markov.mutate(0).unwrap()));
        assert!(!is_isomorphic(&ExchangeMatrix::point(), &a2));
    }

    #[test]
    fn labeling_reproduces_form() {
        let q = ExchangeMatrix::quiver(&[
            vec![0, 2, -1, 0],
            vec![-2, 0, 1, 1],
            vec![1, -1, 0, 0],
            vec![0, -1, 0, 0],
        ])
        .unwrap();
        let (form, perm) = canonical_labeling(&q);
        assert_eq!(&q.permuted(&perm), form.matrix());
        assert_eq!(form.matrix(), &brute_force(&q));
    }

    #[test]
    fn frozen_block_stays_last() {
        let ice = ExchangeMatrix::from_rows(1, 2, &[vec![0, 1, -1], vec![-1, 0, 0], vec![1, 0, 0]]).unwrap();
        let form = canonical_form(&ice);
        assert_eq!(form.matrix().mutable(), 1);
        assert_eq!(form.matrix(), &brute_force(&ice));
    }

    #[test]
    fn skew_symmetrizable_matches_brute_force() {
        let b = ExchangeMatrix::from_rows(3, 0, &[vec![0, 1, 0], vec![-2, 0, 2], vec![0, -1, 0]]).unwrap();
        let form = canonical_form(&b);
        assert_eq!(form.matrix(), &brute_force(&b));
        assert!(form.matrix().is_symmetrized_by(form.matrix().skew_symmetrizer()));
    }

    #[test]
    fn idempotent() {
        let q = ExchangeMatrix::cycle3(3, 2, 1);
        let once = canonical_form(&q);
        assert_eq!(canonical_form(once.matrix()), once);
    }

    #[test]
    fn hash_encoding() {
        let form = canonical_form(&ExchangeMatrix::point());
        let expected: [u8; 32] = Sha256::digest(b"1|0|0").into();
        assert_eq!(form.hash(), &expected);
        assert_eq!(form.hex().len(), 64);
        assert!(form.hex().chars().all(|c| c.is_ascii_digit() || ('a'..='f').contains(&c)));
    }

    #[test]
    fn large_isolated_is_fast() {
        let i9 = ExchangeMatrix::isolated(9).unwrap();
        assert_eq!(canonical_form(&i9).matrix(), &i9);
    }
}
