//! Run manifests and deterministic CSV emission.
//!
//! Every output starts with `# key = value` manifest lines recording the
//! complete parameter set, the tool version, and the output path, so a run
//! can be reproduced bit-identically from its own header.  Numbers are
//! printed with 12 significant digits in scientific notation with a `.`
//! separator, independent of locale.

use std::io::Write;
use std::path::{Path, PathBuf};

/// Ordered key/value manifest.
#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut m = RunManifest::default();
        m.push("tool", "arrival");
        m.push("tool.version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_f64(&mut self, key: &str, value: f64) {
        self.entries.push((key.to_string(), format_f64(value)));
    }

    pub fn extend(&mut self, entries: Vec<(String, String)>) {
        self.entries.extend(entries);
    }

    pub fn header_lines(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out
    }
}

/// 12 significant digits, scientific notation, locale-independent.
pub fn format_f64(x: f64) -> String {
    format!("{x:.11e}")
}

/// Resolve the output target: relative paths are joined onto
/// `$ARRIVAL_OUT_DIR` when that variable is set.
pub fn resolve_out_path(out: Option<&Path>) -> Option<PathBuf> {
    out.map(|p| {
        if p.is_relative() {
            match std::env::var_os("ARRIVAL_OUT_DIR") {
                Some(dir) => PathBuf::from(dir).join(p),
                None => p.to_path_buf(),
            }
        } else {
            p.to_path_buf()
        }
    })
}

/// Write `content` to the resolved path, or stdout when no path was given.
pub fn emit(out: Option<&Path>, content: &str) -> std::io::Result<()> {
    match resolve_out_path(out) {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, content)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())
        }
    }
}

/// A two-or-more-column CSV body with a header row.
pub struct CsvBody {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvBody {
    pub fn render(&self, manifest: &RunManifest) -> String {
        let mut out = manifest.header_lines();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_twelve_significant_digits() {
        assert_eq!(format_f64(50.125949), "5.01259490000e1");
        assert_eq!(format_f64(-1.0 / 3.0), "-3.33333333333e-1");
        assert_eq!(format_f64(0.0), "0.00000000000e0");
    }

    #[test]
    fn manifest_renders_in_insertion_order() {
        let mut m = RunManifest::new("test");
        m.push_f64("x0", -50.0);
        m.push("mode", "positive");
        let h = m.header_lines();
        let lines: Vec<&str> = h.lines().collect();
        assert_eq!(lines[0], "# tool = arrival");
        assert_eq!(lines[2], "# command = test");
        assert_eq!(lines[3], "# x0 = -5.00000000000e1");
        assert_eq!(lines[4], "# mode = positive");
    }
}
