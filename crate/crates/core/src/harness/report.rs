//! CSV tables with a versioned comment header, plus JSON summaries.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const CSV_SCHEMA: &str = "invmetric-csv/1";

/// Shortest round-trip formatting, so rows can be re-evaluated exactly.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Writes `# <schema> key=value ...` followed by the table.
    pub fn write<W: Write>(&self, mut out: W, meta: &[(&str, String)]) -> Result<()> {
        write!(out, "# {CSV_SCHEMA}")?;
        for (k, v) in meta {
            write!(out, " {k}={v}")?;
        }
        writeln!(out)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self, meta: &[(&str, String)]) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf, meta)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`; returns both paths.
pub fn write_outputs<T: Serialize>(
    dir: &Path,
    stem: &str,
    table: &CsvTable,
    meta: &[(&str, String)],
    summary: &T,
) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    table.write(std::io::BufWriter::new(std::fs::File::create(&csv_path)?), meta)?;
    let mut f = std::fs::File::create(&json_path)?;
    serde_json::to_writer_pretty(&mut f, summary)?;
    writeln!(f)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_line_and_quoting() {
        let mut t = CsvTable::new(["id", "z"]);
        t.push(vec!["0".into(), "0.5:0,0:0".into()]);
        let s = t.to_csv_string(&[("seed", "3".into())]).unwrap();
        assert_eq!(s, "# invmetric-csv/1 seed=3\nid,z\n0,\"0.5:0,0:0\"\n");
    }

    #[test]
    fn writes_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let t = CsvTable::new(["a"]);
        let (c, j) = write_outputs(dir.path(), "x", &t, &[], &serde_json::json!({"ok": true})).unwrap();
        assert!(std::fs::read_to_string(c).unwrap().starts_with("# invmetric-csv/1"));
        assert!(std::fs::read_to_string(j).unwrap().contains("\"ok\": true"));
    }
}
