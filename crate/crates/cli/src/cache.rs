//! Per-class spectral data cache: JSON lines, a magic header first.
//!
//! ```text
//! {"magic":"pressure-lab-class-cache","version":1}
//! {"key":"<sha256>","max_len":10,"classes":N,"log_radius":[...],"sign":[...],"gap":[...],"log_gap":[...],"errors":[[i,"..."]]}
//! ```
//!
//! A file with a foreign header, another version or any unreadable line is
//! ignored as a whole and rewritten on the next save.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const MAGIC: &str = "pressure-lab-class-cache";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    magic: String,
    version: u32,
}

/// Spectral data of every class up to `max_len` for one representation.
/// Classes whose data could not be computed have `None` entries and a
/// message in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Record {
    pub key: String,
    pub max_len: usize,
    pub classes: usize,
    pub log_radius: Vec<Option<f64>>,
    pub sign: Vec<Option<i8>>,
    pub gap: Vec<Option<f64>>,
    pub log_gap: Vec<Option<f64>>,
    pub errors: Vec<(usize, String)>,
}

impl Record {
    fn consistent(&self) -> bool {
        let n = self.classes;
        self.log_radius.len() == n
            && self.sign.len() == n
            && self.gap.len() == n
            && self.log_gap.len() == n
            && self.errors.iter().all(|(i, _)| *i < n && self.log_radius[*i].is_none())
    }
}

#[derive(Debug)]
pub struct ClassCache {
    path: PathBuf,
    records: Vec<Record>,
    dirty: bool,
}

fn read_records(text: &str) -> Result<Vec<Record>, String> {
    let mut lines = text.lines();
    let header: Header = match lines.next() {
        Some(l) => serde_json::from_str(l).map_err(|e| format!("bad header: {e}"))?,
        None => return Ok(Vec::new()),
    };
    if header.magic != MAGIC {
        return Err(format!("unknown magic '{}'", header.magic));
    }
    if header.version != VERSION {
        return Err(format!("version {} (expected {VERSION})", header.version));
    }
    let mut out = Vec::new();
    for (i, l) in lines.enumerate() {
        if l.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(l).map_err(|e| format!("line {}: {e}", i + 2))?;
        if !r.consistent() {
            return Err(format!("line {}: inconsistent record", i + 2));
        }
        out.push(r);
    }
    Ok(out)
}

impl ClassCache {
    /// Opens `path`; a missing file gives an empty cache, an unreadable one
    /// a warning and an empty cache.
    pub fn open(path: &Path) -> Self {
        let records = match fs::read_to_string(path) {
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => {
                eprintln!("warning: cache {} unreadable ({e}); ignoring it", path.display());
                Vec::new()
            }
            Ok(text) => match read_records(&text) {
                Ok(r) => r,
                Err(msg) => {
                    eprintln!("warning: cache {} is corrupt or stale ({msg}); ignoring it", path.display());
                    Vec::new()
                }
            },
        };
        ClassCache { path: path.to_path_buf(), records, dirty: false }
    }

    pub fn get(&self, key: &str, max_len: usize, classes: usize) -> Option<&Record> {
        self.records.iter().find(|r| r.key == key && r.max_len == max_len && r.classes == classes)
    }

    pub fn insert(&mut self, record: Record) {
        self.records.retain(|r| !(r.key == record.key && r.max_len == record.max_len));
        self.records.push(record);
        self.dirty = true;
    }

    pub fn save(&mut self) -> Result<(), CliError> {
        if !self.dirty {
            return Ok(());
        }
        let tmp = self.path.with_extension("tmp");
        {
            let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
            let header = Header { magic: MAGIC.into(), version: VERSION };
            writeln!(f, "{}", serde_json::to_string(&header).expect("header serializes"))?;
            for r in &self.records {
                writeln!(f, "{}", serde_json::to_string(r).map_err(|e| CliError::Io(e.to_string()))?)?;
            }
            f.flush()?;
        }
        fs::rename(&tmp, &self.path)?;
        self.dirty = false;
        Ok(())
    }
}
