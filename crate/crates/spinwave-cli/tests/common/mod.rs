//! Shared helpers for binary-level tests: spawning the CLI and parsing
//! the files it writes.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

#[allow(dead_code)] // not every test target drives failure paths
pub fn run(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinwave"))
        .arg("--out")
        .arg(out_dir)
        .args(args)
        .output()
        .expect("spawning the spinwave binary")
}

pub fn run_ok(out_dir: &Path, args: &[&str]) -> String {
    let out = run(out_dir, args);
    assert!(
        out.status.success(),
        "spinwave {args:?} failed\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
    String::from_utf8(out.stdout).expect("stdout is UTF-8")
}

/// A written sweep file: `# key=value` metadata, a header row, numeric
/// rows.
pub struct Csv {
    pub metadata: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Csv {
    pub fn load(path: &Path) -> Self {
        let text = std::fs::read_to_string(path)
            .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
        let mut metadata = BTreeMap::new();
        let mut header = Vec::new();
        let mut rows = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest.split_once('=').expect("metadata lines are key=value");
                metadata.insert(k.to_string(), v.to_string());
            } else if header.is_empty() {
                header = line.split(',').map(str::to_string).collect();
            } else {
                rows.push(
                    line.split(',')
                        .map(|cell| {
                            cell.parse::<f64>()
                                .unwrap_or_else(|e| panic!("cell {cell:?}: {e}"))
                        })
                        .collect(),
                );
            }
        }
        assert!(!header.is_empty(), "{} has no header row", path.display());
        Self {
            metadata,
            header,
            rows,
        }
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name:?} in {:?}", self.header));
        self.rows.iter().map(|row| row[i]).collect()
    }
}
