//! Exchange matrices and the matrix-level operations on them.
//!
//! A quiver is the skew-symmetric, frozen-free special case: entry `b[i][j]`
//! counts arrows `i → j` minus arrows `j → i`. Every operation here is a pure
//! function of immutable values.
//!
//! Indices are 0-based in the API. External text and JSON formats, and the
//! CLI, use 1-based indices.

mod canonical;
mod format;
mod symmetrizer;

use std::fmt;

use crate::error::{MatrixError, Result};

pub use canonical::{canonical_form, canonical_labeling, is_isomorphic, CanonicalForm};
pub use format::MatrixJson;

/// An integer exchange matrix with `mutable` mutable indices followed by
/// `frozen` frozen indices, together with its derived skew-symmetrizer.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExchangeMatrix {
    n: usize,
    m: usize,
    b: Vec<i64>,
    d: Vec<i64>,
}

impl ExchangeMatrix {
    /// Validates `b` (row-major, side `n + m`) and derives its skew-symmetrizer.
    pub fn new(n: usize, m: usize, b: Vec<i64>) -> Result<Self> {
        if n == 0 {
            return Err(MatrixError::NoMutableIndex);
        }
        let size = n + m;
        if b.len() != size * size {
            return Err(MatrixError::Shape {
                expected: size * size,
                got: b.len(),
            });
        }
        let d = symmetrizer::skew_symmetrizer(size, &b)?;
        Ok(Self { n, m, b, d })
    }

    /// Builds from nested rows.
    pub fn from_rows(n: usize, m: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let size = n + m;
        if rows.len() != size || rows.iter().any(|r| r.len() != size) {
            return Err(MatrixError::Shape {
                expected: size * size,
                got: rows.iter().map(Vec::len).sum(),
            });
        }
        Self::new(n, m, rows.concat())
    }

    /// A frozen-free quiver from its skew-symmetric matrix rows.
    pub fn quiver(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.len(), 0, rows)
    }

    /// The quiver on `n` vertices with no arrows.
    pub fn isolated(n: usize) -> Result<Self> {
        Self::new(n, 0, vec![0; n * n])
    }

    /// The single-vertex quiver.
    pub fn point() -> Self {
        Self {
            n: 1,
            m: 0,
            b: vec![0],
            d: vec![1],
        }
    }

    /// The rank-2 quiver with `weight` arrows `1 → 2`.
    pub fn kronecker(weight: i64) -> Self {
        Self::new(2, 0, vec![0, weight, -weight, 0]).expect("rank-2 skew-symmetric")
    }

    /// Oriented 3-cycle `1 → 2 → 3 → 1` with weights `(b12, b23, b31)`.
    pub fn cycle3(w12: i64, w23: i64, w31: i64) -> Self {
        Self::quiver(&[vec![0, w12, -w31], vec![-w12, 0, w23], vec![w31, -w23, 0]])
            .expect("skew-symmetric cycle")
    }

    /// Linearly oriented path `1 → 2 → … → n`.
    pub fn path(n: usize) -> Result<Self> {
        let mut b = vec![0; n * n];
        for i in 1..n {
            b[(i - 1) * n + i] = 1;
            b[i * n + i - 1] = -1;
        }
        Self::new(n, 0, b)
    }

    /// Skips validation; callers guarantee the invariants and pass a valid `d`.
    pub(crate) fn from_parts(n: usize, m: usize, b: Vec<i64>, d: Vec<i64>) -> Self {
        debug_assert_eq!(b.len(), (n + m) * (n + m));
        Self { n, m, b, d }
    }

    pub fn mutable(&self) -> usize {
        self.n
    }

    pub fn frozen(&self) -> usize {
        self.m
    }

    /// Total number of indices, `n + m`. This is the poset rank of the class.
    pub fn rank(&self) -> usize {
        self.n + self.m
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.b[i * self.rank() + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[i64] {
        &self.b
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.b.chunks(self.rank().max(1)).map(<[i64]>::to_vec).collect()
    }

    pub fn skew_symmetrizer(&self) -> &[i64] {
        &self.d
    }

    pub fn is_skew_symmetric(&self) -> bool {
        self.d.iter().all(|&x| x == 1)
    }

    pub fn max_abs_entry(&self) -> u64 {
        self.b.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    /// Whether `d` balances every entry pair of this matrix.
    pub fn is_symmetrized_by(&self, d: &[i64]) -> bool {
        let size = self.rank();
        d.len() == size
            && d.iter().all(|&x| x > 0)
            && (0..size).all(|i| {
                (0..size).all(|j| d[i] as i128 * self.get(i, j) as i128 == -(d[j] as i128) * self.get(j, i) as i128)
            })
    }

    /// Whether the support graph (on all indices) is connected.
    pub fn is_connected(&self) -> bool {
        let size = self.rank();
        let mut seen = vec![false; size];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..size {
                if !seen[j] && self.get(i, j) != 0 {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Matrix mutation at the mutable index `k`.
    pub fn mutate(&self, k: usize) -> Result<Self> {
        if k >= self.n {
            return Err(MatrixError::FrozenMutation {
                index: k + 1,
                mutable: self.n,
            });
        }
        let size = self.rank();
        let mut b = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let value = if i == k || j == k {
                    -self.get(i, j)
                } else {
                    let (bik, bkj) = (self.get(i, k), self.get(k, j));
                    bik.checked_mul(bkj.max(0))
                        .and_then(|x| (-bik).max(0).checked_mul(bkj).and_then(|y| x.checked_add(y)))
                        .and_then(|x| x.checked_add(self.get(i, j)))
                        .ok_or(MatrixError::EntryOverflow(k + 1))?
                };
                b.push(value);
            }
        }
        Ok(Self::from_parts(self.n, self.m, b, self.d.clone()))
    }

    /// Applies a mutation sequence left to right.
    pub fn mutate_along(&self, seq: &MutationSequence) -> Result<Self> {
        seq.indices()
            .iter()
            .try_fold(self.clone(), |acc, &k| acc.mutate(k))
    }

    /// The full submatrix on `subset`. Retained mutable indices come first, in
    /// subset order, followed by the retained frozen ones.
    pub fn restrict(&self, subset: &IndexSubset) -> Result<Self> {
        let order = subset.partitioned(self.n);
        let n = subset.indices().iter().filter(|&&i| i < self.n).count();
        if n == 0 {
            return Err(MatrixError::NoMutableIndex);
        }
        if let Some(&bad) = subset.indices().iter().find(|&&i| i >= self.rank()) {
            return Err(MatrixError::IndexOutOfRange {
                index: bad + 1,
                size: self.rank(),
            });
        }
        let b = order
            .iter()
            .flat_map(|&i| order.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Self::new(n, order.len() - n, b)
    }

    /// Block-diagonal union. Mutable indices of `self` then `other`, then the
    /// frozen indices of `self` then `other`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let (left, right) = Self::union_blocks(self, other);
        let size = self.rank() + other.rank();
        let mut b = vec![0; size * size];
        let mut d = vec![1; size];
        for (factor, positions) in [(self, left.indices()), (other, right.indices())] {
            for (a, &pa) in positions.iter().enumerate() {
                d[pa] = factor.d[a];
                for (c, &pc) in positions.iter().enumerate() {
                    b[pa * size + pc] = factor.get(a, c);
                }
            }
        }
        Self::from_parts(self.n + other.n, self.m + other.m, b, d)
    }

    /// Positions of the two factors inside [`Self::disjoint_union`].
    pub fn union_blocks(p: &Self, q: &Self) -> (IndexSubset, IndexSubset) {
        let n = p.n + q.n;
        let left = (0..p.n).chain(n..n + p.m).collect();
        let right = (p.n..n).chain(n + p.m..n + p.m + q.m).collect();
        (IndexSubset(left), IndexSubset(right))
    }

    /// Whether the digraph on mutable indices with `i → j` for `b[i][j] > 0`
    /// has no directed cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.n;
        let mut indegree: Vec<usize> = (0..n)
            .map(|j| (0..n).filter(|&i| self.get(i, j) > 0).count())
            .collect();
        let mut ready: Vec<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
        let mut removed = 0;
        while let Some(i) = ready.pop() {
            removed += 1;
            for j in 0..n {
                if self.get(i, j) > 0 {
                    indegree[j] -= 1;
                    if indegree[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        removed == n
    }

    /// Relabels so that entry `(i, j)` of the result is `self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let size = self.rank();
        let b = (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .map(|(i, j)| self.get(perm[i], perm[j]))
            .collect();
        let d = perm.iter().map(|&p| self.d[p]).collect();
        Self::from_parts(self.n, self.m, b, d)
    }

    /// Nonzero arrows `(i, j, multiplicity)` with `b[i][j] > 0`, for display.
    pub fn arrows(&self) -> Vec<(usize, usize, i64)> {
        let size = self.rank();
        (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .filter(|&(i, j)| self.get(i, j) > 0)
            .map(|(i, j)| (i, j, self.get(i, j)))
            .collect()
    }
}

impl fmt::Debug for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ExchangeMatrix({}+{}, {:?})", self.n, self.m, self.rows())
    }
}

/// Plain-text format: `n m` on the first line, then one row per line.
impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n, self.m)?;
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// An ordered list of distinct indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexSubset(Vec<usize>);

impl IndexSubset {
    pub fn new(indices: Vec<usize>, size: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(MatrixError::EmptySubset);
        }
        let mut seen = vec![false; size];
        for &i in &indices {
            if i >= size {
                return Err(MatrixError::IndexOutOfRange { index: i + 1, size });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(MatrixError::DuplicateIndex(i + 1));
            }
        }
        Ok(Self(indices))
    }

    /// Every index of a matrix of the given size.
    pub fn all(size: usize) -> Self {
        Self((0..size).collect())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn partitioned(&self, mutable: usize) -> Vec<usize> {
        let (mut low, high): (Vec<usize>, Vec<usize>) = self.0.iter().partition(|&&i| i < mutable);
        low.extend(high);
        low
    }
}

/// A finite sequence of mutable indices, applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MutationSequence(Vec<usize>);

impl MutationSequence {
    pub fn new(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn then(&self, k: usize) -> Self {
        let mut next = self.0.clone();
        next.push(k);
        Self(next)
    }

    /// Rewrites the indices through a relabeling `perm`.
    pub fn relabeled(&self, perm: &[usize]) -> Self {
        Self(self.0.iter().map(|&k| perm[k]).collect())
    }

    /// 1-based indices for external formats.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|k| k + 1).collect()
    }

    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        indices
            .iter()
            .map(|&k| k.checked_sub(1).ok_or_else(|| MatrixError::Parse("indices are 1-based".into())))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}
