use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use super::{normalize_space, Fact, FactsKb, Role};
use crate::concepts::ConceptSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableStats {
    pub tables: usize,
    pub rows: usize,
    pub skipped_rows: usize,
    pub duplicate_ids: usize,
}

/// Loads every `*.tsv` table in `dir`, in file-name order.
///
/// Columns whose header starts with `[SKIP]` are annotation columns and are
/// left out of the sentence; the remaining non-empty cells are joined with
/// single spaces. The fact id is the row's UID cell, or `TABLE#row` when a
/// table has no UID column.
pub fn load_facts(dir: impl AsRef<Path>) -> Result<(FactsKb, TableStats)> {
    let dir = dir.as_ref();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| e.eq_ignore_ascii_case("tsv"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Ingest(format!("no .tsv tables in {}", dir.display())));
    }

    let mut kb = FactsKb::default();
    let mut stats = TableStats::default();
    for path in &paths {
        load_table(path, &mut kb, &mut stats)?;
    }
    if stats.skipped_rows > 0 {
        warn!("{}: skipped {} rows without content", dir.display(), stats.skipped_rows);
    }
    if stats.duplicate_ids > 0 {
        warn!("{}: {} duplicate fact ids ignored", dir.display(), stats.duplicate_ids);
    }
    Ok((kb, stats))
}

fn load_table(path: &Path, kb: &mut FactsKb, stats: &mut TableStats) -> Result<()> {
    let table = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_owned();
    let role = Role::for_table(&table);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(true)
        .from_path(path)
        .map_err(|e| malformed(path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(path, e))?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim().to_owned())
        .collect();
    let skip: Vec<bool> = headers.iter().map(|h| is_skip_column(h)).collect();
    let uid_col = headers.iter().position(|h| {
        h.trim_start_matches("[SKIP]")
            .trim()
            .eq_ignore_ascii_case("UID")
    });

    stats.tables += 1;
    for (row_no, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(path, e))?;
        stats.rows += 1;
        let text = normalize_space(
            record
                .iter()
                .enumerate()
                .filter(|(i, _)| !skip.get(*i).copied().unwrap_or(false))
                .map(|(_, cell)| cell),
        );
        if text.is_empty() {
            stats.skipped_rows += 1;
            continue;
        }
        let id = uid_col
            .and_then(|c| record.get(c))
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .unwrap_or_else(|| format!("{table}#{}", row_no + 1));
        let added = kb.push(Fact {
            id,
            text,
            table: table.clone(),
            role,
            concepts: ConceptSet::new(),
        });
        if !added {
            stats.duplicate_ids += 1;
        }
    }
    Ok(())
}

fn is_skip_column(header: &str) -> bool {
    header.to_ascii_uppercase().starts_with("[SKIP]")
}

fn malformed(path: &Path, e: csv::Error) -> Error {
    Error::Malformed {
        path: path.to_owned(),
        reason: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    fn fixture() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "KINDOF.tsv",
            "[SKIP] COMMENTS\tHYPONYM\tIS A KIND OF\tHYPERNYM\t[SKIP] UID\n\
             note\ta ball\tis a kind of\tobject\tk1\n",
        );
        write(
            dir.path(),
            "SYNONYMY.tsv",
            "X\t[FILL]\tY\t[SKIP] UID\ncounter\tmeans\treduce\ts1\n",
        );
        write(
            dir.path(),
            "CAUSE.tsv",
            "[SKIP] UID\tCAUSE\t[FILL]\tEFFECT\n\
             c1\tgravity\tcauses\tobjects to fall\n\
             c2\tfriction\t\t  acts to   counter motion\n\
             c3\t\t\t\n",
        );
        write(dir.path(), "README.md", "ignored");
        dir
    }

    #[test]
    fn three_table_fixture() {
        let dir = fixture();
        let (kb, stats) = load_facts(dir.path()).unwrap();
        assert_eq!(kb.count(Role::Abstractive), 2);
        assert_eq!(kb.count(Role::Unification), 2);
        assert_eq!(stats.tables, 3);
        assert_eq!(stats.skipped_rows, 1);
        let ball = kb.by_id("k1").unwrap();
        assert_eq!(ball.text, "a ball is a kind of object");
        assert_eq!(ball.role, Role::Abstractive);
        assert_eq!(kb.by_id("c2").unwrap().text, "friction acts to counter motion");
        assert_eq!(kb.by_id("s1").unwrap().text, "counter means reduce");
    }

    #[test]
    fn empty_and_missing_directory() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_facts(dir.path()), Err(Error::Ingest(_))));
        assert!(matches!(load_facts(dir.path().join("nope")), Err(Error::Io { .. })));
    }

    #[test]
    fn reingestion_is_deterministic() {
        let dir = fixture();
        let (a, _) = load_facts(dir.path()).unwrap();
        let (b, _) = load_facts(dir.path()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rows_without_uid_get_positional_ids() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "PROPERTIES.tsv", "A\tB\nx\ty\nz\tw\n");
        let (kb, _) = load_facts(dir.path()).unwrap();
        assert_eq!(kb.get(1).id, "PROPERTIES#2");
    }
}
