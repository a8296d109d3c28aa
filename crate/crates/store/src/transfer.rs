//! Whole-store export and import as JSON lines of
//! `{"table": .., "key": .., "record": ..}`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use audiology_core::{Category, ExamKey, Record, Validate};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, StoreError};
use crate::store::Store;

#[derive(Debug, Serialize, Deserialize)]
struct Line {
    table: String,
    key: ExamKey,
    record: Value,
}

/// What to do with an imported row whose table and key already hold a
/// different record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionPolicy {
    #[default]
    Skip,
    Overwrite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub table: String,
    pub key: ExamKey,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportReport {
    pub lines: usize,
    pub inserted: usize,
    pub overwritten: usize,
    pub skipped: usize,
    /// Rows identical to what the store already held.
    pub unchanged: usize,
    pub collisions: Vec<Collision>,
}

/// Writes every row and returns the number of lines written.
pub fn export_jsonl(store: &Store, mut out: impl Write) -> Result<usize> {
    let rows = store.rows()?;
    for r in &rows {
        let line = Line { table: r.category().table_name().to_string(), key: r.key().clone(), record: r.to_json() };
        serde_json::to_writer(&mut out, &line).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(rows.len())
}

fn parse_line(n: usize, text: &str) -> Result<Record> {
    let bad = |message: String| StoreError::Transfer { line: n, message };
    let line: Line = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let category = Category::from_table_name(&line.table).ok_or_else(|| bad(format!("unknown table {}", line.table)))?;
    let record = Record::from_json(category, line.record).map_err(|e| bad(e.to_string()))?;
    if record.key() != &line.key {
        return Err(bad(format!("line key {} differs from record key {}", line.key, record.key())));
    }
    record.validate().map_err(|e| bad(e.to_string()))?;
    Ok(record)
}

/// Merges an export into `store` as one atomic batch. Any malformed line
/// aborts the import before anything is written.
pub fn import_jsonl(store: &Store, input: impl BufRead, policy: CollisionPolicy) -> Result<ImportReport> {
    let mut report = ImportReport::default();
    let mut pending: BTreeMap<(Category, ExamKey), Record> = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        let record = parse_line(i + 1, &line)?;
        let slot = (record.category(), record.key().clone());
        let existing = match pending.get(&slot) {
            Some(r) => Some(r.clone()),
            None => store.get(&slot.1, slot.0)?,
        };
        match existing {
            None => {
                report.inserted += 1;
                pending.insert(slot, record);
            }
            Some(old) if old == record => report.unchanged += 1,
            Some(_) => {
                report.collisions.push(Collision { table: slot.0.table_name().to_string(), key: slot.1.clone() });
                match policy {
                    CollisionPolicy::Skip => report.skipped += 1,
                    CollisionPolicy::Overwrite => {
                        report.overwritten += 1;
                        pending.insert(slot, record);
                    }
                }
            }
        }
    }
    store.upsert_many(pending.into_values().collect())?;
    Ok(report)
}
