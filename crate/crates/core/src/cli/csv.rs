//! Versioned CSV output with fixed numeric formatting and atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub const SCHEMA_LINE: &str = "# schema=1";

/// 17 significant digits in scientific notation; `NaN` for missing values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Makes free text safe for a single CSV cell.
pub fn sanitize(text: &str) -> String {
    text.chars()
        .map(|c| {
            if matches!(c, ',' | '\n' | '\r' | '"') {
                ';'
            } else {
                c
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &'static [&'static str]) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(SCHEMA_LINE);
        out.push('\n');
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Failed rows, identified by a `status` column other than `ok`.
    pub fn failures(&self) -> usize {
        match self.header.iter().position(|&h| h == "status") {
            Some(i) => self.rows.iter().filter(|r| r[i] != "ok").count(),
            None => 0,
        }
    }
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_opt(None), "");
        assert_eq!(sanitize("a,b\nc"), "a;b;c");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn render_and_atomic_write() {
        let mut t = CsvTable::new(&["x", "status"]);
        t.push(vec![fmt_f64(2.0), "ok".into()]);
        t.push(vec![fmt_f64(f64::NAN), "bracket lost".into()]);
        assert_eq!(t.failures(), 1);
        let dir = std::env::temp_dir().join(format!("pearson-csv-{}", std::process::id()));
        let path = dir.join("t.csv");
        write_atomic(&path, &t.render()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# schema=1\nx,status\n"));
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }
}
