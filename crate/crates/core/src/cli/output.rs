//! CSV tables and run manifests.
//!
//! Every data row starts with the configuration hash. Header lines start
//! with `#`. Nothing time-dependent goes into a CSV, so identical
//! configurations give byte-identical tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::io::fmt_num;

use super::config::Config;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub comments: Vec<String>,
    pub columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    hash: String,
}

/// A table cell.
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Table {
    pub fn new(name: &str, cfg: &Config, columns: &[&'static str]) -> Self {
        Self {
            name: name.into(),
            comments: Vec::new(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            hash: cfg.hash(),
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) -> &mut Self {
        self.comments.push(line.into());
        self
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width of table {}",
            self.name
        );
        let row = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(v) => fmt_num(v),
                Cell::Int(v) => v.to_string(),
                // commas would break the dialect
                Cell::Text(s) => s.replace(',', ";"),
            })
            .collect();
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# {}", self.name).unwrap();
        writeln!(s, "# config_hash: {}", self.hash).unwrap();
        for c in &self.comments {
            writeln!(s, "# {c}").unwrap();
        }
        writeln!(s, "config_hash,{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            writeln!(s, "{},{}", self.hash, row.join(",")).unwrap();
        }
        s
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// Provenance of one run, written next to its tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub subcommand: String,
    pub config: Config,
    pub elapsed_ms: u128,
    pub outputs: Vec<String>,
    pub status: String,
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# hjlab run manifest").unwrap();
        writeln!(s, "tool=hjlab {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "subcommand={}", self.subcommand).unwrap();
        writeln!(s, "config_hash={}", self.config.hash()).unwrap();
        writeln!(s, "seed={}", self.config.seed).unwrap();
        writeln!(s, "elapsed_ms={}", self.elapsed_ms).unwrap();
        writeln!(s, "status={}", self.status).unwrap();
        writeln!(s, "outputs={}", self.outputs.join(",")).unwrap();
        for n in &self.notes {
            writeln!(s, "note={n}").unwrap();
        }
        if let Ok(e) = self.config.exponents() {
            writeln!(s, "# derived").unwrap();
            writeln!(s, "gamma_prime={}", e.gamma_prime()).unwrap();
            writeln!(s, "q0={}", e.q0()).unwrap();
            writeln!(s, "alpha0={}", e.alpha0()).unwrap();
        }
        writeln!(s, "# resolved parameters").unwrap();
        s.push_str(&self.config.canonical());
        s
    }
}

/// Writes the tables and the manifest into `dir`, returning the paths.
pub fn write_outputs(dir: &Path, tables: &[Table], manifest: &Manifest) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(tables.len() + 1);
    for t in tables {
        let p = dir.join(t.file_name());
        fs::write(&p, t.render())?;
        paths.push(p);
    }
    let p = dir.join("manifest.txt");
    fs::write(&p, manifest.render())?;
    paths.push(p);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_carry_the_hash() {
        let cfg = Config::default();
        let mut t = Table::new("demo", &cfg, &["a", "b"]);
        t.comment("columns documented here");
        t.push(vec![1.5.into(), "x,y".into()]);
        let text = t.render();
        let last = text.lines().last().unwrap();
        assert!(last.starts_with(&cfg.hash()));
        assert!(last.ends_with(",1.5000000000000000e0,x;y"));
        assert!(text.lines().take(3).all(|l| l.starts_with('#')));
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn ragged_rows_panic() {
        let mut t = Table::new("demo", &Config::default(), &["a"]);
        t.push(vec![1.0.into(), 2.0.into()]);
    }
}
