//! Append-only JSON-lines cache of class enumerations and embedding verdicts.
//!
//! Each line is `{"crc":<crc32 of the rec bytes>,"rec":{…}}`. Records are keyed
//! by canonical-form hashes plus the budget they were computed under. A record
//! is validated when the file is opened: checksum, JSON shape, and a replay of
//! every stored mutation sequence.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::class::{Budget, Cap, ClassEnumeration, EnumerationDump, Verdict};
use crate::error::StoreError;
use crate::exchange::{canonical_form, CanonicalForm, ExchangeMatrix, MatrixJson};
use crate::poset::{EmbedVerdict, WitnessJson};

pub const CACHE_FILE: &str = "cache.jsonl";
pub const CACHE_DIR_ENV: &str = "MUTCLASS_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    Class(ClassRecord),
    Embed(EmbedRecord),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    /// Hash of the class key (least member found).
    pub key: String,
    pub enumeration: EnumerationDump,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedRecord {
    pub lower: String,
    pub upper: String,
    pub lower_seed: MatrixJson,
    pub upper_seed: MatrixJson,
    pub budget: Budget,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tripped: Vec<Cap>,
}

impl EmbedRecord {
    pub fn new(lower: &CanonicalForm, upper: &CanonicalForm, budget: Budget, verdict: &EmbedVerdict) -> Self {
        let (witness, tripped) = match verdict {
            EmbedVerdict::Yes(w) => (Some(w.to_json()), Vec::new()),
            EmbedVerdict::No => (None, Vec::new()),
            EmbedVerdict::Unknown { tripped } => (None, tripped.clone()),
        };
        Self {
            lower: lower.hex(),
            upper: upper.hex(),
            lower_seed: MatrixJson::from(lower.matrix()),
            upper_seed: MatrixJson::from(upper.matrix()),
            budget,
            verdict: verdict.verdict(),
            witness,
            tripped,
        }
    }

    /// Decodes the verdict, checking the seeds against their hashes and
    /// replaying a YES witness.
    pub fn to_verdict(&self) -> Result<EmbedVerdict, String> {
        let seed = |json: &MatrixJson, hex: &str| -> Result<ExchangeMatrix, String> {
            let b = ExchangeMatrix::try_from(json.clone()).map_err(|e| e.to_string())?;
            let form = canonical_form(&b);
            if form.hex() != hex || form.matrix() != &b {
                return Err("embed seed does not match its hash".into());
            }
            Ok(b)
        };
        let lower = seed(&self.lower_seed, &self.lower)?;
        let upper = seed(&self.upper_seed, &self.upper)?;
        match (self.verdict, &self.witness) {
            (Verdict::Yes, Some(json)) => {
                let w = json.to_witness(upper.rank())?;
                if !w.replays(&lower, &upper) {
                    return Err("embedding witness does not replay".into());
                }
                Ok(EmbedVerdict::Yes(w))
            }
            (Verdict::Yes, None) => Err("YES verdict without witness".into()),
            (Verdict::No, None) => Ok(EmbedVerdict::No),
            (Verdict::Unknown, None) if !self.tripped.is_empty() => Ok(EmbedVerdict::Unknown {
                tripped: self.tripped.clone(),
            }),
            _ => Err("verdict disagrees with its witness fields".into()),
        }
    }
}

impl Record {
    pub fn class(class: &ClassEnumeration) -> Self {
        Record::Class(ClassRecord {
            key: class.key().hex(),
            enumeration: class.dump(),
        })
    }

    pub fn key(&self) -> RecordKey {
        match self {
            Record::Class(c) => RecordKey::Class {
                seed: c.enumeration.seed.clone(),
                budget: c.enumeration.budget,
            },
            Record::Embed(e) => RecordKey::Embed {
                lower: e.lower.clone(),
                upper: e.upper.clone(),
                budget: e.budget,
            },
        }
    }

    fn budget(&self) -> &Budget {
        match self {
            Record::Class(c) => &c.enumeration.budget,
            Record::Embed(e) => &e.budget,
        }
    }

    fn subject(&self) -> (&str, &str) {
        match self {
            Record::Class(c) => (&c.enumeration.seed, ""),
            Record::Embed(e) => (&e.lower, &e.upper),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RecordKey {
    Class { seed: String, budget: Budget },
    Embed { lower: String, upper: String, budget: Budget },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ack {
    Appended,
    AlreadyPresent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompactStats {
    pub kept: usize,
    pub dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StoreStats {
    pub classes: usize,
    pub embeds: usize,
    pub bytes: u64,
}

#[derive(Deserialize)]
struct Line<'a> {
    crc: u32,
    #[serde(borrow)]
    rec: &'a RawValue,
}

fn encode(record: &Record) -> Result<String, StoreError> {
    let rec = serde_json::to_string(record)?;
    Ok(format!("{{\"crc\":{},\"rec\":{rec}}}\n", crc32fast::hash(rec.as_bytes())))
}

/// Single-writer handle on a cache file, guarded by a `.lock` file that is
/// removed on drop.
#[derive(Debug)]
pub struct Store {
    path: PathBuf,
    lock: PathBuf,
    file: File,
    records: Vec<Record>,
    index: HashMap<RecordKey, usize>,
    classes: HashMap<usize, ClassEnumeration>,
}

impl Store {
    /// Default cache directory: `$MUTCLASS_CACHE_DIR` if set.
    pub fn env_dir() -> Option<PathBuf> {
        std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)
    }

    /// Opens (creating if needed) `dir/cache.jsonl`. A trailing partial line
    /// from an interrupted write is dropped; any other bad line is an error.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let lock = dir.join(format!("{CACHE_FILE}.lock"));
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(_) => {}
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(StoreError::Locked(path.display().to_string()))
            }
            Err(e) => return Err(e.into()),
        }
        let guard = LockGuard(&lock);
        let (records, classes, valid_len) = Self::load(&path)?;
        let file = OpenOptions::new().create(true).read(true).append(true).open(&path)?;
        if file.metadata()?.len() > valid_len {
            file.set_len(valid_len)?;
        }
        std::mem::forget(guard);
        let index = records.iter().enumerate().map(|(i, r)| (r.key(), i)).collect();
        Ok(Self {
            path,
            lock,
            file,
            records,
            index,
            classes,
        })
    }

    #[allow(clippy::type_complexity)]
    fn load(path: &Path) -> Result<(Vec<Record>, HashMap<usize, ClassEnumeration>, u64), StoreError> {
        let text = match fs::read(path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Default::default()),
            Err(e) => return Err(e.into()),
        };
        let complete = text.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        let mut records = Vec::new();
        let mut classes = HashMap::new();
        for (i, raw) in text[..complete].split(|&b| b == b'\n').enumerate() {
            if raw.is_empty() {
                continue;
            }
            let line_no = i + 1;
            let corrupt = |reason: String| StoreError::CorruptRecord { line: line_no, reason };
            let raw = std::str::from_utf8(raw).map_err(|e| corrupt(e.to_string()))?;
            let line: Line = serde_json::from_str(raw).map_err(|e| corrupt(e.to_string()))?;
            if crc32fast::hash(line.rec.get().as_bytes()) != line.crc {
                return Err(corrupt("checksum mismatch".into()));
            }
            let record: Record = serde_json::from_str(line.rec.get()).map_err(|e| corrupt(e.to_string()))?;
            match &record {
                Record::Class(c) => {
                    let class = ClassEnumeration::from_dump(&c.enumeration).map_err(corrupt)?;
                    if class.key().hex() != c.key {
                        return Err(corrupt("class key does not match its members".into()));
                    }
                    classes.insert(records.len(), class);
                }
                Record::Embed(e) => {
                    e.to_verdict().map_err(corrupt)?;
                }
            }
            records.push(record);
        }
        Ok((records, classes, complete as u64))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Appends `record` unless an identical one is present.
    pub fn put(&mut self, record: &Record) -> Result<Ack, StoreError> {
        let key = record.key();
        if let Some(&i) = self.index.get(&key) {
            if &self.records[i] == record {
                return Ok(Ack::AlreadyPresent);
            }
        }
        self.file.write_all(encode(record)?.as_bytes())?;
        self.file.flush()?;
        self.index.insert(key, self.records.len());
        self.records.push(record.clone());
        Ok(Ack::Appended)
    }

    pub fn get(&self, key: &RecordKey) -> Option<&Record> {
        self.index.get(key).map(|&i| &self.records[i])
    }

    fn class_at(&mut self, i: usize) -> Option<&ClassEnumeration> {
        if !self.classes.contains_key(&i) {
            let Record::Class(c) = &self.records[i] else {
                return None;
            };
            let class = ClassEnumeration::from_dump(&c.enumeration).ok()?;
            self.classes.insert(i, class);
        }
        self.classes.get(&i)
    }

    /// An enumeration identical to what `budget` would compute from `seed`:
    /// a record made under exactly that budget, or a closed one that stays
    /// within it.
    pub fn lookup_class(&mut self, seed: &str, budget: &Budget) -> Option<ClassEnumeration> {
        let exact = RecordKey::Class {
            seed: seed.to_string(),
            budget: *budget,
        };
        if let Some(&i) = self.index.get(&exact) {
            return self.class_at(i).cloned();
        }
        let candidates: Vec<usize> = self
            .records
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, Record::Class(c) if c.enumeration.seed == seed))
            .map(|(i, _)| i)
            .collect();
        candidates.into_iter().find_map(|i| {
            let class = self.class_at(i)?;
            class.closed_within(budget).then(|| class.clone().with_budget(*budget))
        })
    }

    /// Embedding verdicts are served only for the budget they were computed under.
    pub fn lookup_embed(&self, lower: &str, upper: &str, budget: &Budget) -> Option<EmbedVerdict> {
        let key = RecordKey::Embed {
            lower: lower.to_string(),
            upper: upper.to_string(),
            budget: *budget,
        };
        match self.get(&key)? {
            Record::Embed(e) => e.to_verdict().ok(),
            Record::Class(_) => None,
        }
    }

    pub fn stats(&self) -> Result<StoreStats, StoreError> {
        let classes = self.records.iter().filter(|r| matches!(r, Record::Class(_))).count();
        Ok(StoreStats {
            classes,
            embeds: self.records.len() - classes,
            bytes: fs::metadata(&self.path)?.len(),
        })
    }

    /// Drops records superseded by one for the same subject under a budget
    /// that covers theirs, then rewrites the file atomically.
    pub fn compact(&mut self) -> Result<CompactStats, StoreError> {
        let mut by_subject: HashMap<(&str, &str, bool), Vec<usize>> = HashMap::new();
        for (i, r) in self.records.iter().enumerate() {
            let (a, b) = r.subject();
            by_subject
                .entry((a, b, matches!(r, Record::Class(_))))
                .or_default()
                .push(i);
        }
        let mut keep = vec![true; self.records.len()];
        for group in by_subject.values() {
            for &i in group {
                let bi = self.records[i].budget();
                keep[i] = !group.iter().any(|&j| {
                    let bj = self.records[j].budget();
                    j != i && bj.covers(bi) && (bj != bi || j < i)
                });
            }
        }

        let tmp = self.path.with_extension("jsonl.tmp");
        {
            let mut out = File::create(&tmp)?;
            for (r, _) in self.records.iter().zip(&keep).filter(|(_, &k)| k) {
                out.write_all(encode(r)?.as_bytes())?;
            }
            out.sync_all()?;
        }
        fs::rename(&tmp, &self.path)?;
        self.file = OpenOptions::new().read(true).append(true).open(&self.path)?;

        let dropped = keep.iter().filter(|&&k| !k).count();
        let old = std::mem::take(&mut self.records);
        self.records = old.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect();
        self.index = self.records.iter().enumerate().map(|(i, r)| (r.key(), i)).collect();
        self.classes.clear();
        Ok(CompactStats {
            kept: self.records.len(),
            dropped,
        })
    }
}

impl Drop for Store {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

/// Removes the lock file if opening fails after taking it.
struct LockGuard<'a>(&'a Path);

impl Drop for LockGuard<'_> {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.0);
    }
}
