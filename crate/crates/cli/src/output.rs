//! CSV and JSON writers with a reproducibility header.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Format;
use crate::config::config_hash;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A finished table: CSV header, rows, and trailing `# key: value` notes.
#[derive(Debug, Default)]
pub struct Table {
    pub header: String,
    pub rows: Vec<String>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(header: impl Into<String>) -> Self {
        Self { header: header.into(), ..Default::default() }
    }
}

/// Everything a command produces.
pub struct Report {
    pub table: Table,
    pub json: Value,
}

pub fn metadata(command: &str, effective: &Value) -> Value {
    json!({
        "tool": "cubic-cw",
        "version": VERSION,
        "command": command,
        "config_sha256": config_hash(effective),
        "config": effective,
    })
}

pub fn render(format: Format, command: &str, effective: &Value, report: &Report) -> String {
    let meta = metadata(command, effective);
    match format {
        Format::Csv => {
            let mut out = format!(
                "# cubic-cw {VERSION}\n# command: {command}\n# config-sha256: {}\n# config: {}\n{}\n",
                meta["config_sha256"].as_str().unwrap_or_default(),
                effective,
                report.table.header
            );
            for r in &report.table.rows {
                out.push_str(r);
                out.push('\n');
            }
            for n in &report.table.notes {
                out.push_str("# ");
                out.push_str(n);
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let doc = json!({ "metadata": meta, "result": report.json });
            let mut s = serde_json::to_string_pretty(&doc).expect("json output serializes");
            s.push('\n');
            s
        }
    }
}

/// Destination: explicit file, `<dir>/<command>.<ext>`, or stdout.
pub fn destination(out: Option<PathBuf>, out_dir: Option<PathBuf>, command: &str, format: Format) -> Option<PathBuf> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    out.or_else(|| out_dir.map(|d| d.join(format!("{command}.{ext}"))))
}

pub fn emit(text: &str, dest: Option<&PathBuf>) -> Result<(), CliError> {
    match dest {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_notes() {
        let mut t = Table::new("a,b");
        t.rows.push("1,2".into());
        t.notes.push("fit: slope=-0.5".into());
        let eff = json!({"K": 0.2});
        let text = render(Format::Csv, "be", &eff, &Report { table: t, json: Value::Null });
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# cubic-cw {VERSION}"));
        assert!(lines[2].starts_with("# config-sha256: "));
        assert_eq!(lines[4], "a,b");
        assert_eq!(lines[6], "# fit: slope=-0.5");
    }

    #[test]
    fn json_wraps_result() {
        let eff = json!({"n": 3});
        let text = render(Format::Json, "law", &eff, &Report { table: Table::new(""), json: json!([1, 2]) });
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["metadata"]["command"], "law");
        assert_eq!(v["result"], json!([1, 2]));
    }

    #[test]
    fn destinations() {
        assert_eq!(destination(None, None, "be", Format::Csv), None);
        assert_eq!(destination(None, Some("/tmp/x".into()), "be", Format::Json), Some(PathBuf::from("/tmp/x/be.json")));
        assert_eq!(
            destination(Some("o.csv".into()), Some("/tmp/x".into()), "be", Format::Csv),
            Some(PathBuf::from("o.csv"))
        );
    }
}
