//! Deterministic report writers. Floats are always rendered with 17
//! significant digits in lowercase e-notation so identical configurations
//! produce byte-identical files.

use crate::config::Format;
use serde::Serialize;
use std::io::Write;

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, lowercase scientific; `nan`/`inf` normalized.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{v:.16e}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "nan".into())
}

/// A report that renders to CSV rows or one JSON document.
pub struct Report {
    pub command: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub json_payload: serde_json::Value,
}

impl Report {
    pub fn new<T: Serialize>(
        command: &str,
        header: Vec<&'static str>,
        rows: Vec<Vec<String>>,
        payload: &T,
    ) -> Self {
        Report {
            command: command.to_owned(),
            header,
            rows,
            json_payload: serde_json::to_value(payload).unwrap_or(serde_json::Value::Null),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str("schema_version");
                for h in &self.header {
                    out.push(',');
                    out.push_str(h);
                }
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&SCHEMA_VERSION.to_string());
                    for cell in row {
                        out.push(',');
                        out.push_str(cell);
                    }
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let doc = serde_json::json!({
                    "schema_version": SCHEMA_VERSION,
                    "command": self.command,
                    "report": self.json_payload,
                });
                let mut text = serde_json::to_string_pretty(&doc).unwrap();
                text.push('\n');
                text
            }
        }
    }

    pub fn write(&self, path: Option<&str>, format: Format) -> std::io::Result<()> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(text.as_bytes())
            }
        }
    }
}
