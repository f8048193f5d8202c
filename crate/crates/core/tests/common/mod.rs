//! Naive reference implementations used as oracles. Nothing here calls the
//! optimized search code: canonical forms try every permutation, classes are
//! explored one matrix at a time, and embedding tries every subset.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use mutclass::ExchangeMatrix;
use rand::Rng;

/// Plain `(n, m, row-major entries)` triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plain {
    pub n: usize,
    pub m: usize,
    pub b: Vec<i64>,
}

impl Plain {
    pub fn of(b: &ExchangeMatrix) -> Self {
        Self {
            n: b.mutable(),
            m: b.frozen(),
            b: b.entries().to_vec(),
        }
    }

    pub fn size(&self) -> usize {
        self.n + self.m
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.b[i * self.size() + j]
    }

    pub fn to_matrix(&self) -> ExchangeMatrix {
        ExchangeMatrix::new(self.n, self.m, self.b.clone()).expect("oracle matrices are valid")
    }
}

/// Every permutation of `0..k`, by Heap's algorithm.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, a, out);
            let j = if k % 2 == 0 { i } else { 0 };
            a.swap(j, k - 1);
        }
    }
    let mut out = Vec::new();
    heap(k, &mut (0..k).collect(), &mut out);
    out
}

/// Entries of `b` relabeled so that new index `i` is old index `perm[i]`.
pub fn permute(b: &Plain, perm: &[usize]) -> Plain {
    let s = b.size();
    let mut out = vec![0; s * s];
    for i in 0..s {
        for j in 0..s {
            out[i * s + j] = b.at(perm[i], perm[j]);
        }
    }
    Plain { n: b.n, m: b.m, b: out }
}

/// Row-major lex-minimum over permutations fixing the mutable/frozen split.
pub fn canonical(b: &Plain) -> Plain {
    let mut best: Option<Plain> = None;
    for pm in permutations(b.n) {
        for pf in permutations(b.m) {
            let perm: Vec<usize> = pm.iter().copied().chain(pf.iter().map(|&f| b.n + f)).collect();
            let cand = permute(b, &perm);
            if best.as_ref().is_none_or(|x| cand.b < x.b) {
                best = Some(cand);
            }
        }
    }
    best.expect("at least one permutation")
}

/// Mutation straight from the matrix formula, in i128 so overflow is detected.
pub fn mutate(b: &Plain, k: usize) -> Option<Plain> {
    let s = b.size();
    let mut out = vec![0i64; s * s];
    for i in 0..s {
        for j in 0..s {
            let v: i128 = if i == k || j == k {
                -(b.at(i, j) as i128)
            } else {
                let (bik, bkj) = (b.at(i, k) as i128, b.at(k, j) as i128);
                b.at(i, j) as i128 + bik * bkj.max(0) + (-bik).max(0) * bkj
            };
            out[i * s + j] = i64::try_from(v).ok()?;
        }
    }
    Some(Plain { n: b.n, m: b.m, b: out })
}

/// Quiver mutation as three graph steps on arrow counts: add `i → j` for
/// every path `i → k → j`, reverse arrows at `k`, cancel 2-cycles.
pub fn quiver_mutate(b: &Plain, k: usize) -> Plain {
    let s = b.size();
    let mut arrows = vec![vec![0i64; s]; s];
    for i in 0..s {
        for j in 0..s {
            arrows[i][j] = b.at(i, j).max(0);
        }
    }
    let mut next = arrows.clone();
    for i in 0..s {
        for j in 0..s {
            if i != k && j != k && i != j {
                next[i][j] += arrows[i][k] * arrows[k][j];
            }
        }
    }
    for x in 0..s {
        next[x][k] = arrows[k][x];
        next[k][x] = arrows[x][k];
    }
    for i in 0..s {
        for j in i + 1..s {
            let c = next[i][j].min(next[j][i]);
            next[i][j] -= c;
            next[j][i] -= c;
        }
    }
    let mut out = vec![0; s * s];
    for i in 0..s {
        for j in 0..s {
            out[i * s + j] = next[i][j] - next[j][i];
        }
    }
    Plain { n: b.n, m: b.m, b: out }
}

/// Canonical members of the class of `b`, or `None` if exploration exceeds
/// `cap` members or overflows.
pub fn class(b: &Plain, cap: usize) -> Option<BTreeSet<Plain>> {
    let start = canonical(b);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for k in 0..x.n {
            let y = canonical(&mutate(&x, k)?);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen)
}

/// Restriction to `subset`, mutable indices first.
pub fn restrict(b: &Plain, subset: &[usize]) -> Plain {
    let mut order: Vec<usize> = subset.iter().copied().filter(|&i| i < b.n).collect();
    let n = order.len();
    order.extend(subset.iter().copied().filter(|&i| i >= b.n));
    let s = order.len();
    let mut out = vec![0; s * s];
    for (a, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            out[a * s + c] = b.at(i, j);
        }
    }
    Plain { n, m: s - n, b: out }
}

/// All subsets of `0..size` with `k` elements, by bitmask.
pub fn subsets(size: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << size)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..size).filter(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// `Some(does [p] embed in [q])` when both classes close within `cap`.
pub fn embeds(p: &Plain, q: &Plain, cap: usize) -> Option<bool> {
    if p.n > q.n || p.m > q.m {
        return Some(false);
    }
    let lower = class(p, cap)?;
    let upper = class(q, cap)?;
    Some(upper.iter().any(|member| {
        subsets(member.size(), p.size()).iter().any(|s| {
            let r = restrict(member, s);
            r.n == p.n && lower.contains(&canonical(&r))
        })
    }))
}

/// Skew-symmetric `n × n` quiver with entries in `-w..=w`.
pub fn random_quiver(rng: &mut impl Rng, n: usize, w: i64) -> ExchangeMatrix {
    let mut b = vec![0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let x = rng.gen_range(-w..=w);
            b[i * n + j] = x;
            b[j * n + i] = -x;
        }
    }
    ExchangeMatrix::new(n, 0, b).expect("skew-symmetric")
}

/// Skew-symmetrizable matrix `D⁻¹S` style: a random skew-symmetric pattern
/// scaled by a random symmetrizer, with some frozen indices.
pub fn random_matrix(rng: &mut impl Rng, n: usize, m: usize, w: i64) -> ExchangeMatrix {
    let size = n + m;
    let d: Vec<i64> = (0..size).map(|_| rng.gen_range(1..=2)).collect();
    let mut b = vec![0; size * size];
    for i in 0..size {
        for j in i + 1..size {
            // d_i b_ij = -d_j b_ji with b_ij = s d_j, b_ji = -s d_i
            let s = rng.gen_range(-w..=w);
            b[i * size + j] = s * d[j];
            b[j * size + i] = -s * d[i];
        }
    }
    ExchangeMatrix::new(n, m, b).expect("symmetrizable by construction")
}

/// All skew-symmetric `n × n` matrices with entries in `-w..=w`.
pub fn all_quivers(n: usize, w: i64) -> Vec<Plain> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let base = (2 * w + 1) as usize;
    let total = base.pow(pairs.len() as u32);
    (0..total)
        .map(|mut code| {
            let mut b = vec![0; n * n];
            for &(i, j) in &pairs {
                let x = (code % base) as i64 - w;
                code /= base;
                b[i * n + j] = x;
                b[j * n + i] = -x;
            }
            Plain { n, m: 0, b }
        })
        .collect()
}

pub fn distinct_canonical(all: &[Plain]) -> Vec<Plain> {
    let set: HashSet<Plain> = all.iter().map(canonical).collect();
    let mut out: Vec<Plain> = set.into_iter().collect();
    out.sort();
    out
}
