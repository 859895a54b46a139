//! Table cache documents.
//!
//! A table is stored as one JSON document:
//!
//! ```text
//! {"format":"tpc-table-v1","t":2,"p_limit":20,
//!  "entries":[{"n":1,"p":0,"count":"1"},...],
//!  "checksum":"<sha256 hex>"}
//! ```
//!
//! `entries` lists the nonzero cells `N_t(n,p)` with `n >= 1`, sorted by
//! `(n, p)`, with counts as decimal strings. The checksum is the lowercase
//! hex SHA-256 of the UTF-8 text
//!
//! ```text
//! tpc-table-v1\n{t}\n{p_limit}\n{n},{p},{count}\n{n},{p},{count}\n...
//! ```
//!
//! i.e. a header of three lines followed by one line per entry, in order.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{build_table, CountTable};
use crate::error::{Error, Result};
use crate::formulas::max_nodes_for_path_length;

pub const TABLE_FORMAT: &str = "tpc-table-v1";

#[derive(Serialize, Deserialize)]
struct TableDocument {
    format: String,
    t: usize,
    p_limit: usize,
    entries: Vec<EntryDocument>,
    checksum: String,
}

#[derive(Serialize, Deserialize)]
struct EntryDocument {
    n: usize,
    p: usize,
    count: String,
}

fn checksum(t: usize, p_limit: usize, entries: &[EntryDocument]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("{TABLE_FORMAT}\n{t}\n{p_limit}\n"));
    for e in entries {
        hasher.update(format!("{},{},{}\n", e.n, e.p, e.count));
    }
    hex::encode(hasher.finalize())
}

impl CountTable {
    pub fn to_document(&self) -> String {
        let entries: Vec<EntryDocument> = self
            .entries()
            .map(|(n, p, c)| EntryDocument {
                n,
                p,
                count: c.to_string(),
            })
            .collect();
        let doc = TableDocument {
            format: TABLE_FORMAT.to_string(),
            t: self.t,
            p_limit: self.p_limit,
            checksum: checksum(self.t, self.p_limit, &entries),
            entries,
        };
        serde_json::to_string(&doc).expect("table document serializes")
    }

    pub fn from_document(text: &str) -> Result<CountTable> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let format = value.get("format").and_then(|f| f.as_str()).unwrap_or("");
        if format != TABLE_FORMAT {
            return Err(Error::FormatVersion {
                found: format.to_string(),
                expected: TABLE_FORMAT.to_string(),
            });
        }
        let doc: TableDocument = serde_json::from_value(value)?;
        let computed = checksum(doc.t, doc.p_limit, &doc.entries);
        if computed != doc.checksum {
            return Err(Error::Checksum {
                stored: doc.checksum,
                computed,
            });
        }
        if doc.t < 2 {
            return Err(Error::CorruptTable(format!("arity {} below 2", doc.t)));
        }
        let n_max = max_nodes_for_path_length(doc.t, doc.p_limit);
        let mut rows = vec![vec![BigUint::zero(); doc.p_limit + 1]; n_max + 1];
        rows[0][0] = BigUint::from(1u32);
        let mut previous = None;
        for e in &doc.entries {
            if e.n == 0 || e.n > n_max || e.p > doc.p_limit {
                return Err(Error::CorruptTable(format!(
                    "cell ({}, {}) outside the table",
                    e.n, e.p
                )));
            }
            if previous.is_some_and(|prev| prev >= (e.n, e.p)) {
                return Err(Error::CorruptTable("entries not sorted by (n, p)".into()));
            }
            previous = Some((e.n, e.p));
            let count = BigUint::from_str(&e.count)
                .ok()
                .filter(|c| !c.is_zero() && e.count.bytes().all(|b| b.is_ascii_digit()))
                .ok_or_else(|| Error::CorruptTable(format!("bad count {:?}", e.count)))?;
            rows[e.n][e.p] = count;
        }
        Ok(CountTable::from_rows(doc.t, doc.p_limit, rows))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_document();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CountTable> {
        CountTable::from_document(&fs::read_to_string(path)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheOutcome {
    Built,
    Loaded,
    Extended,
}

/// Loads a cached table able to answer queries up to `p_limit`, extending or
/// creating the cache file as needed.
pub fn load_or_build(path: &Path, t: usize, p_limit: usize) -> Result<(CountTable, CacheOutcome)> {
    if !path.exists() {
        let table = build_table(t, p_limit)?;
        table.save(path)?;
        return Ok((table, CacheOutcome::Built));
    }
    let cached = CountTable::load(path)?;
    if cached.t != t {
        return Err(Error::ArityMismatch {
            table: cached.t,
            requested: t,
        });
    }
    if cached.p_limit >= p_limit {
        return Ok((cached, CacheOutcome::Loaded));
    }
    let table = cached.extend(p_limit)?;
    table.save(path)?;
    Ok((table, CacheOutcome::Extended))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let table = build_table(2, 20).unwrap();
        let back = CountTable::from_document(&table.to_document()).unwrap();
        assert_eq!(back, table);
        assert_eq!(back.marginals(), table.marginals());
    }

    #[test]
    fn old_format_is_rejected() {
        let text = build_table(2, 5)
            .unwrap()
            .to_document()
            .replace(TABLE_FORMAT, "tpc-table-v0");
        assert!(matches!(
            CountTable::from_document(&text),
            Err(Error::FormatVersion { .. })
        ));
    }

    #[test]
    fn tampering_is_detected() {
        let text = build_table(2, 8).unwrap().to_document();
        let tampered = text.replacen("\"count\":\"2\"", "\"count\":\"3\"", 1);
        assert_ne!(tampered, text);
        assert!(matches!(
            CountTable::from_document(&tampered),
            Err(Error::Checksum { .. })
        ));
    }

    #[test]
    fn checksum_covers_documented_text() {
        let table = build_table(2, 2).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&table.to_document()).unwrap();
        // T(0)=1 (n=1), T(1)=2 (n=2), T(2)=1 (n=3)
        let text = "tpc-table-v1\n2\n2\n1,0,1\n2,1,2\n3,2,1\n";
        let expected = hex::encode(Sha256::digest(text.as_bytes()));
        assert_eq!(doc["checksum"], expected.as_str());
    }

    #[test]
    fn cache_file_lifecycle() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t2.json");
        let (a, how) = load_or_build(&path, 2, 10).unwrap();
        assert_eq!(how, CacheOutcome::Built);
        let (b, how) = load_or_build(&path, 2, 8).unwrap();
        assert_eq!(how, CacheOutcome::Loaded);
        assert_eq!(a, b);
        let (c, how) = load_or_build(&path, 2, 16).unwrap();
        assert_eq!(how, CacheOutcome::Extended);
        assert_eq!(c, build_table(2, 16).unwrap());
        assert!(matches!(
            load_or_build(&path, 3, 5),
            Err(Error::ArityMismatch { .. })
        ));
    }
}
