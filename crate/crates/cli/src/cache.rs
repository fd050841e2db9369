//! Content-addressed disk cache: canonical-text payloads under `objects/` and a JSON index.
//!
//! Every write goes to a temporary file in the same directory and is renamed into place.
//! Payloads are checked against their recorded SHA-256 on load and dropped when they differ.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hodge_core::hierarchy::{DiffOperator, EpsOperator};
use hodge_core::hodge_recursion::{StageKey, StageStore};
use hodge_core::{DiffPoly, EpsExpansion, HodgeError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

const INDEX_FORMAT: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    FreeEnergy,
    HodgeStage,
    Gf,
    Operator,
    Flow,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::FreeEnergy => "free-energy",
            Kind::HodgeStage => "hodge-stage",
            Kind::Gf => "gf",
            Kind::Operator => "operator",
            Kind::Flow => "flow",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub kind: String,
    pub key: String,
    pub file: String,
    pub payload_sha256: String,
    pub created_at: u64,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
struct Index {
    format: u32,
    entries: BTreeMap<String, Entry>,
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

pub struct Cache {
    root: PathBuf,
    index: RefCell<Index>,
    verbose: bool,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Cache(format!("{}: {e}", path.display()))
}

/// Write `data` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, data: &[u8]) -> CliResult<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("entry"),
        std::process::id()
    ));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(data).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

impl Cache {
    /// Open (creating if needed) the cache rooted at `root`. An unreadable index starts empty.
    pub fn open(root: &Path, verbose: bool) -> CliResult<Self> {
        fs::create_dir_all(root.join("objects")).map_err(|e| io_err(root, e))?;
        let cache = Cache { root: root.to_path_buf(), index: RefCell::new(Index::default()), verbose };
        *cache.index.borrow_mut() = cache.read_index();
        Ok(cache)
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index.json")
    }

    fn read_index(&self) -> Index {
        let path = self.index_path();
        let Ok(text) = fs::read_to_string(&path) else {
            return Index { format: INDEX_FORMAT, entries: BTreeMap::new() };
        };
        match serde_json::from_str::<Index>(&text) {
            Ok(ix) if ix.format == INDEX_FORMAT => ix,
            _ => {
                self.log(format!("ignoring unreadable index {}", path.display()));
                Index { format: INDEX_FORMAT, entries: BTreeMap::new() }
            }
        }
    }

    fn log(&self, msg: String) {
        if self.verbose {
            eprintln!("cache: {msg}");
        }
    }

    pub fn id(kind: Kind, key: &str) -> String {
        sha256_hex(format!("{}\n{key}", kind.name()).as_bytes())
    }

    pub fn entry(&self, kind: Kind, key: &str) -> Option<Entry> {
        self.index.borrow().entries.get(&Self::id(kind, key)).cloned()
    }

    /// The payload for (kind, key), if present and intact.
    pub fn load(&self, kind: Kind, key: &str) -> Option<String> {
        let entry = self.entry(kind, key)?;
        let path = self.root.join(&entry.file);
        let data = fs::read(&path).ok()?;
        if sha256_hex(&data) != entry.payload_sha256 {
            self.log(format!("checksum mismatch for {} {key}", kind.name()));
            return None;
        }
        self.log(format!("hit {} {key}", kind.name()));
        String::from_utf8(data).ok()
    }

    pub fn store(&self, kind: Kind, key: &str, payload: &str, meta: BTreeMap<String, String>) -> CliResult<()> {
        let id = Self::id(kind, key);
        let file = format!("objects/{id}.txt");
        write_atomic(&self.root.join(&file), payload.as_bytes())?;
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let entry = Entry {
            kind: kind.name().to_string(),
            key: key.to_string(),
            file,
            payload_sha256: sha256_hex(payload.as_bytes()),
            created_at,
            meta,
        };
        // Merge with whatever another process may have written since we opened.
        let mut ix = self.read_index();
        ix.entries.extend(self.index.borrow().entries.clone());
        ix.entries.insert(id, entry);
        ix.format = INDEX_FORMAT;
        let text = serde_json::to_string_pretty(&ix).map_err(|e| CliError::Cache(e.to_string()))?;
        write_atomic(&self.index_path(), text.as_bytes())?;
        *self.index.borrow_mut() = ix;
        self.log(format!("stored {} {key}", kind.name()));
        Ok(())
    }

    pub fn load_poly(&self, kind: Kind, key: &str) -> Option<DiffPoly> {
        self.load(kind, key).and_then(|t| DiffPoly::parse(&t).ok())
    }

    pub fn store_poly(&self, kind: Kind, key: &str, p: &DiffPoly, meta: BTreeMap<String, String>) -> CliResult<()> {
        self.store(kind, key, &p.canonical_text(), meta)
    }

    pub fn load_series(&self, kind: Kind, key: &str) -> Option<EpsExpansion> {
        self.load(kind, key).and_then(|t| parse_series(&t).ok())
    }

    pub fn load_operator(&self, kind: Kind, key: &str) -> Option<EpsOperator> {
        self.load(kind, key).and_then(|t| parse_operator(&t).ok())
    }

    /// Brackets memoized by the intersection-number oracle, as `"g:[k,…]" -> "p/q"`.
    pub fn load_oracle(&self) -> BTreeMap<String, String> {
        fs::read_to_string(self.root.join("oracle.json"))
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    pub fn store_oracle(&self, entries: &BTreeMap<String, String>) -> CliResult<()> {
        let text = serde_json::to_string(entries).map_err(|e| CliError::Cache(e.to_string()))?;
        write_atomic(&self.root.join("oracle.json"), text.as_bytes())
    }
}

pub fn stage_key(key: &StageKey) -> String {
    format!("g={} h={} F={}", key.genus, key.stage, sha256_hex(key.provenance.as_bytes()))
}

impl StageStore for Cache {
    fn load(&self, key: &StageKey) -> Option<DiffPoly> {
        self.load_poly(Kind::HodgeStage, &stage_key(key))
    }

    fn store(&self, key: &StageKey, value: &DiffPoly) -> hodge_core::Result<()> {
        self.store_poly(Kind::HodgeStage, &stage_key(key), value, BTreeMap::new())
            .map_err(|e| HodgeError::Storage(e.to_string()))
    }
}

/// `order|K` followed by one `n|poly` line per nonzero coefficient.
pub fn series_text(e: &EpsExpansion) -> String {
    let mut out = format!("order|{}\n", e.order());
    for (n, p) in e.iter() {
        out.push_str(&format!("{n}|{}\n", p.canonical_text()));
    }
    out
}

/// `order|K` followed by one `n|k|poly` line per coefficient of ε^n ∂^k.
pub fn operator_text(op: &EpsOperator) -> String {
    let mut out = format!("order|{}\n", op.order());
    for (n, o) in op.iter() {
        for (k, c) in o.terms() {
            out.push_str(&format!("{n}|{k}|{}\n", c.canonical_text()));
        }
    }
    out
}

fn bad(msg: &str) -> HodgeError {
    HodgeError::Parse { pos: 0, msg: msg.to_string() }
}

fn header(text: &str) -> hodge_core::Result<(u32, std::str::Lines<'_>)> {
    let mut lines = text.lines();
    let order = lines
        .next()
        .and_then(|l| l.strip_prefix("order|"))
        .and_then(|o| o.parse().ok())
        .ok_or_else(|| bad("missing order header"))?;
    Ok((order, lines))
}

pub fn parse_series(text: &str) -> hodge_core::Result<EpsExpansion> {
    let (order, lines) = header(text)?;
    let mut e = EpsExpansion::zero(order);
    for line in lines {
        let (n, p) = line.split_once('|').ok_or_else(|| bad("series line"))?;
        let n: u32 = n.parse().map_err(|_| bad("series index"))?;
        e.add_at(n, &DiffPoly::parse(p)?);
    }
    Ok(e)
}

pub fn parse_operator(text: &str) -> hodge_core::Result<EpsOperator> {
    let (order, lines) = header(text)?;
    let mut op = EpsOperator::zero(order);
    for line in lines {
        let mut parts = line.splitn(3, '|');
        let (Some(n), Some(k), Some(p)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad("operator line"));
        };
        let n: u32 = n.parse().map_err(|_| bad("operator index"))?;
        let k: u32 = k.parse().map_err(|_| bad("derivative order"))?;
        op.add_at(n, &DiffOperator::monomial(k, DiffPoly::parse(p)?));
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str) -> DiffPoly {
        DiffPoly::parse(s).unwrap()
    }

    #[test]
    fn store_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path(), false).unwrap();
        let p = poly("(1/24)*L + (-1/2)*s1*v");
        c.store_poly(Kind::Gf, "g=1", &p, BTreeMap::new()).unwrap();
        assert_eq!(c.load_poly(Kind::Gf, "g=1"), Some(p.clone()));
        assert_eq!(c.load_poly(Kind::Flow, "g=1"), None);
        let again = Cache::open(dir.path(), false).unwrap();
        assert_eq!(again.load_poly(Kind::Gf, "g=1"), Some(p));
        assert!(!dir.path().read_dir().unwrap().any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
    }

    #[test]
    fn tampered_payload_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::open(dir.path(), false).unwrap();
        c.store(Kind::FreeEnergy, "g=3", "(1)*v1", BTreeMap::new()).unwrap();
        let e = c.entry(Kind::FreeEnergy, "g=3").unwrap();
        fs::write(dir.path().join(&e.file), "(2)*v1").unwrap();
        assert_eq!(c.load(Kind::FreeEnergy, "g=3"), None);
    }

    #[test]
    fn corrupt_index_starts_empty() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("index.json"), "{not json").unwrap();
        let c = Cache::open(dir.path(), false).unwrap();
        assert_eq!(c.load(Kind::Gf, "x"), None);
        c.store(Kind::Gf, "x", "0", BTreeMap::new()).unwrap();
        assert_eq!(c.load(Kind::Gf, "x").as_deref(), Some("0"));
    }

    #[test]
    fn series_and_operator_text_round_trip() {
        let mut e = EpsExpansion::zero(4);
        e.add_at(0, &poly("(1)*v*v1"));
        e.add_at(4, &poly("(-1/2)*s1^2*v1^-1*v3"));
        assert_eq!(parse_series(&series_text(&e)).unwrap(), e);
        let mut op = EpsOperator::zero(4);
        op.add_at(0, &DiffOperator::d());
        op.add_at(2, &DiffOperator::monomial(3, poly("(1/12)*s1")));
        assert_eq!(parse_operator(&operator_text(&op)).unwrap(), op);
        assert!(parse_series("order|x\n").is_err());
    }

    #[test]
    fn keys_separate_kinds() {
        assert_ne!(Cache::id(Kind::Gf, "k"), Cache::id(Kind::Flow, "k"));
    }
}
