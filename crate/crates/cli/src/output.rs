//! CSV formatting and the set of files a run produces.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

/// Lossless text form of a double: 17 significant digits.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

/// Comma-separated table with a header row and `\n` line endings.
#[derive(Debug, Clone)]
pub struct Csv {
    columns: usize,
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { columns: header.len(), text: format!("{}\n", header.join(",")) }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width differs from the header");
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.text.into_bytes()
    }
}

/// Files of one run, written together by a single writer at the end.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
    notes: Vec<String>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        assert!(!self.files.iter().any(|(n, _)| *n == name), "duplicate output file {name}");
        self.files.push((name, bytes));
    }

    pub fn csv(&mut self, name: impl Into<String>, csv: Csv) {
        self.add(name, csv.into_bytes());
    }

    pub fn text(&mut self, name: impl Into<String>, text: String) {
        self.add(name, text.into_bytes());
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn merge(&mut self, other: Artifacts) {
        for (n, b) in other.files {
            self.add(n, b);
        }
        self.notes.extend(other.notes);
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    /// Manifest text: one `file <sha256> <bytes> <name>` line per output,
    /// the notes, then the effective configuration.
    pub fn manifest(&self, config_text: &str) -> String {
        let mut m = String::from("# outputs: sha256, size in bytes, name\n");
        for (name, bytes) in &self.files {
            let digest = hex::encode(Sha256::digest(bytes));
            let _ = writeln!(m, "file {digest} {} {name}", bytes.len());
        }
        for n in &self.notes {
            let _ = writeln!(m, "note {n}");
        }
        m.push_str("# effective configuration\n");
        m.push_str(config_text);
        if !m.ends_with('\n') {
            m.push('\n');
        }
        m
    }

    /// Writes every file and `manifest.txt` into `dir`.
    pub fn write(&self, dir: &Path, config_text: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
            written.push(p);
        }
        let p = dir.join("manifest.txt");
        fs::write(&p, self.manifest(config_text)).with_context(|| format!("writing {}", p.display()))?;
        written.push(p);
        Ok(written)
    }
}
