//! Finite universes: every class with a seed of bounded size and entries,
//! together with the full matrix of embedding verdicts between them.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::class::{finiteness_of, Budget, ClassEnumeration, FinitenessVerdict, Status, Verdict};
use crate::engine::Engine;
use crate::error::TopologyError;
use crate::exchange::{canonical_form, CanonicalForm, ExchangeMatrix, MatrixJson};

/// Which matrices seed a universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniverseKind {
    /// Skew-symmetric, no frozen indices.
    #[default]
    Quiver,
    /// Skew-symmetric, any number of frozen indices.
    Ice,
    /// Skew-symmetrizable, any number of frozen indices.
    Matrix,
}

impl std::str::FromStr for UniverseKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quiver" => Ok(Self::Quiver),
            "ice" => Ok(Self::Ice),
            "matrix" => Ok(Self::Matrix),
            other => Err(format!("unknown universe kind {other:?} (quiver, ice, matrix)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseParams {
    pub r: usize,
    pub w: u64,
    pub kind: UniverseKind,
    pub budget: Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Finiteness {
    Finite,
    Infinite,
    Unknown,
}

impl From<&FinitenessVerdict> for Finiteness {
    fn from(v: &FinitenessVerdict) -> Self {
        match v {
            FinitenessVerdict::Finite { .. } => Finiteness::Finite,
            FinitenessVerdict::Infinite { .. } => Finiteness::Infinite,
            FinitenessVerdict::Unknown { .. } => Finiteness::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniverseClass {
    /// Hash of the class key.
    pub hash: String,
    /// Least generated seed in the class; embedding verdicts are computed from it.
    pub seed: CanonicalForm,
    /// Hashes of every generated seed that fell into this class.
    pub seeds: Vec<String>,
    pub status: Status,
    pub members: usize,
    pub finiteness: Finiteness,
}

impl UniverseClass {
    pub fn rank(&self) -> usize {
        self.seed.matrix().rank()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    params: UniverseParams,
    classes: Vec<UniverseClass>,
    relation: Vec<Vec<Verdict>>,
    by_seed: HashMap<String, usize>,
}

/// Serialized universe: `{"params", "classes", "relation"}` with verdict codes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseFile {
    pub params: UniverseParams,
    pub classes: Vec<ClassEntry>,
    pub relation: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub hash: String,
    pub seed: String,
    pub rank: usize,
    pub mutable: usize,
    pub frozen: usize,
    pub status: Status,
    pub members: usize,
    pub finiteness: Finiteness,
    pub matrix: MatrixJson,
    pub seeds: Vec<String>,
}

/// All valid matrices of `kind` with at most `r` indices and entries at most
/// `w` in magnitude, as distinct canonical forms in ascending order.
pub fn generate_seeds(r: usize, w: u64, kind: UniverseKind) -> Vec<CanonicalForm> {
    let w = i64::try_from(w).unwrap_or(i64::MAX);
    let mut forms = BTreeSet::new();
    for size in 1..=r {
        let frozen_range = match kind {
            UniverseKind::Quiver => 0..=0,
            UniverseKind::Ice | UniverseKind::Matrix => 0..=size - 1,
        };
        for m in frozen_range {
            let n = size - m;
            let pairs: Vec<(usize, usize)> = (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).collect();
            let choices = pair_choices(w, kind);
            let mut digits = vec![0usize; pairs.len()];
            loop {
                let mut b = vec![0i64; size * size];
                for (&(i, j), &d) in pairs.iter().zip(&digits) {
                    let (x, y) = choices[d];
                    b[i * size + j] = x;
                    b[j * size + i] = y;
                }
                if let Ok(matrix) = ExchangeMatrix::new(n, m, b) {
                    forms.insert(SortKey(canonical_form(&matrix)));
                }
                if !advance(&mut digits, choices.len()) {
                    break;
                }
            }
        }
    }
    forms.into_iter().map(|k| k.0).collect()
}

/// Orders forms by size, then frozen count, then entries.
#[derive(PartialEq, Eq)]
struct SortKey(CanonicalForm);

impl Ord for SortKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        let key = |f: &CanonicalForm| {
            let b = f.matrix();
            (b.rank(), b.frozen(), b.entries().to_vec())
        };
        key(&self.0).cmp(&key(&other.0))
    }
}

impl PartialOrd for SortKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Possible `(b_ij, b_ji)` for one unordered pair.
fn pair_choices(w: i64, kind: UniverseKind) -> Vec<(i64, i64)> {
    let mut out = vec![(0, 0)];
    for x in (-w..=w).filter(|&x| x != 0) {
        match kind {
            UniverseKind::Quiver | UniverseKind::Ice => out.push((x, -x)),
            UniverseKind::Matrix => {
                for y in 1..=w {
                    out.push((x, -x.signum() * y));
                }
            }
        }
    }
    out
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

struct Group {
    seeds: Vec<CanonicalForm>,
    enumerations: Vec<Arc<ClassEnumeration>>,
}

impl Group {
    fn contains(&self, form: &CanonicalForm) -> bool {
        self.enumerations.iter().any(|e| e.contains(form))
    }
}

/// Partitions ascending seeds into mutation classes. A seed joins a group
/// when some enumeration of one contains the other; a seed that links several
/// groups merges them.
pub(crate) fn group_seeds(engine: &Engine, seeds: Vec<CanonicalForm>) -> Vec<(Vec<CanonicalForm>, Arc<ClassEnumeration>)> {
    let mut groups: Vec<Group> = Vec::new();
    for seed in seeds {
        let mut linked: Vec<usize> = (0..groups.len()).filter(|&g| groups[g].contains(&seed)).collect();
        let mut fresh = None;
        if linked.is_empty() {
            let class = engine.enumerate_canonical(&seed);
            linked = (0..groups.len())
                .filter(|&g| groups[g].seeds.iter().any(|s| class.contains(s)))
                .collect();
            fresh = Some(class);
        }
        match linked.split_first() {
            None => groups.push(Group {
                seeds: vec![seed],
                enumerations: fresh.into_iter().collect(),
            }),
            Some((&target, rest)) => {
                for &g in rest.iter().rev() {
                    let absorbed = groups.remove(g);
                    groups[target].seeds.extend(absorbed.seeds);
                    groups[target].enumerations.extend(absorbed.enumerations);
                }
                groups[target].seeds.push(seed);
                groups[target].enumerations.extend(fresh);
            }
        }
    }
    groups
        .into_iter()
        .map(|mut g| {
            g.seeds.sort_by_key(|a| SortKey(a.clone()));
            let head = engine.enumerate_canonical(&g.seeds[0]);
            (g.seeds, head)
        })
        .collect()
}

/// Builds the universe of `kind` seeds with at most `r` indices and entries
/// bounded by `w`, under the engine's budget.
pub fn build_universe(engine: &Engine, r: usize, w: u64, kind: UniverseKind) -> Universe {
    build_universe_from(engine, r, w, kind, generate_seeds(r, w, kind))
}

/// [`build_universe`] over an explicit seed list, given in any order. Seeds
/// are deduplicated and sorted first, so the order never affects the result.
pub fn build_universe_from(
    engine: &Engine,
    r: usize,
    w: u64,
    kind: UniverseKind,
    seeds: Vec<CanonicalForm>,
) -> Universe {
    let seeds: Vec<CanonicalForm> = seeds.into_iter().map(SortKey).collect::<BTreeSet<_>>().into_iter().map(|k| k.0).collect();
    let groups = group_seeds(engine, seeds);
    let classes: Vec<UniverseClass> = groups
        .iter()
        .map(|(seeds, class)| UniverseClass {
            hash: class.key().hex(),
            seed: seeds[0].clone(),
            seeds: seeds.iter().map(CanonicalForm::hex).collect(),
            status: class.status(),
            members: class.len(),
            finiteness: Finiteness::from(&finiteness_of(class, engine.uses_infinite_exit())),
        })
        .collect();

    // restriction indexes shared by many pairs are built once up front
    let shapes: BTreeSet<(usize, usize)> = classes
        .iter()
        .map(|c| (c.seed.matrix().mutable(), c.seed.matrix().frozen()))
        .collect();
    let jobs: Vec<(usize, (usize, usize))> = (0..classes.len())
        .flat_map(|q| shapes.iter().map(move |&s| (q, s)))
        .filter(|&(q, (n, m))| {
            let b = classes[q].seed.matrix();
            n <= b.mutable() && m <= b.frozen()
        })
        .collect();
    jobs.par_iter().for_each(|&(q, (n, m))| {
        engine.restriction_index(&groups[q].1, n, m);
    });

    let size = classes.len();
    let relation: Vec<Vec<Verdict>> = (0..size)
        .into_par_iter()
        .map(|i| {
            (0..size)
                .map(|j| engine.embeds_canonical(&classes[i].seed, &classes[j].seed).verdict())
                .collect()
        })
        .collect();

    Universe::from_parts(
        UniverseParams {
            r,
            w,
            kind,
            budget: *engine.budget(),
        },
        classes,
        relation,
    )
}

impl Universe {
    fn from_parts(params: UniverseParams, classes: Vec<UniverseClass>, relation: Vec<Vec<Verdict>>) -> Self {
        let by_seed = classes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.seeds.iter().map(move |s| (s.clone(), i)))
            .collect();
        Self {
            params,
            classes,
            relation,
            by_seed,
        }
    }

    pub fn params(&self) -> &UniverseParams {
        &self.params
    }

    pub fn classes(&self) -> &[UniverseClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Verdict for `[lower] ⪯ [upper]`.
    pub fn relation(&self, lower: usize, upper: usize) -> Verdict {
        self.relation[lower][upper]
    }

    pub fn unknown_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|i| (0..self.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| self.relation[i][j] == Verdict::Unknown)
            .collect()
    }

    /// Index of the class whose generated seeds include `b` up to isomorphism.
    pub fn locate(&self, b: &ExchangeMatrix) -> Option<usize> {
        self.by_seed.get(&canonical_form(b).hex()).copied()
    }

    /// Like [`locate`](Self::locate), falling back to searching each class's
    /// enumeration for `b`.
    pub fn locate_in(&self, engine: &Engine, b: &ExchangeMatrix) -> Option<usize> {
        self.locate(b).or_else(|| {
            let form = canonical_form(b);
            (0..self.len()).find(|&i| {
                let seed = self.classes[i].seed.matrix();
                seed.mutable() == b.mutable()
                    && seed.frozen() == b.frozen()
                    && engine.enumerate_canonical(&self.classes[i].seed).contains(&form)
            })
        })
    }

    pub fn index_of_hash(&self, hash: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.hash == hash || c.seed.hex() == hash)
    }

    /// The sub-universe on `indices`, in the given order.
    pub fn restrict_to(&self, indices: &[usize]) -> Result<Universe, TopologyError> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(TopologyError::NotInUniverse {
                index: bad,
                size: self.len(),
            });
        }
        let classes = indices.iter().map(|&i| self.classes[i].clone()).collect();
        let relation = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.relation[i][j]).collect())
            .collect();
        Ok(Self::from_parts(self.params, classes, relation))
    }

    pub fn to_file(&self) -> UniverseFile {
        UniverseFile {
            params: self.params,
            classes: self
                .classes
                .iter()
                .map(|c| {
                    let b = c.seed.matrix();
                    ClassEntry {
                        hash: c.hash.clone(),
                        seed: c.seed.hex(),
                        rank: b.rank(),
                        mutable: b.mutable(),
                        frozen: b.frozen(),
                        status: c.status,
                        members: c.members,
                        finiteness: c.finiteness,
                        matrix: MatrixJson::from(b),
                        seeds: c.seeds.clone(),
                    }
                })
                .collect(),
            relation: self
                .relation
                .iter()
                .map(|row| row.iter().map(|v| v.code().to_string()).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("plain data serializes")
    }

    pub fn from_file(file: UniverseFile) -> Result<Self, String> {
        let size = file.classes.len();
        let mut classes = Vec::with_capacity(size);
        for (i, entry) in file.classes.into_iter().enumerate() {
            let b = ExchangeMatrix::try_from(entry.matrix).map_err(|e| format!("class {}: {e}", i + 1))?;
            let seed = canonical_form(&b);
            if seed.hex() != entry.seed || seed.matrix() != &b {
                return Err(format!("class {}: seed matrix does not match its hash", i + 1));
            }
            classes.push(UniverseClass {
                hash: entry.hash,
                seed,
                seeds: entry.seeds,
                status: entry.status,
                members: entry.members,
                finiteness: entry.finiteness,
            });
        }
        if file.relation.len() != size || file.relation.iter().any(|row| row.len() != size) {
            return Err(format!("relation must be {size}x{size}"));
        }
        let relation = file
            .relation
            .iter()
            .map(|row| {
                row.iter()
                    .map(|code| match code.as_str() {
                        "Y" => Ok(Verdict::Yes),
                        "N" => Ok(Verdict::No),
                        "U" => Ok(Verdict::Unknown),
                        other => Err(format!("bad verdict code {other:?}")),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_parts(file.params, classes, relation))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        Self::from_file(serde_json::from_str(text).map_err(|e| e.to_string())?)
    }
}
