//! Output assembly: every document is available as JSON (a single object
//! with a metadata block) or CSV (metadata as `#` comment lines above the
//! header row). Numeric fields are formatted identically across runs so
//! a fixed spec and seed reproduce byte-identical output.

use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

pub struct Metadata {
    pub command: &'static str,
    pub spec_hash: String,
    pub seed: u64,
    pub units: &'static str,
}

impl Metadata {
    pub fn comment_line(&self) -> String {
        format!(
            "# nbde {} spec_hash={} seed={} units={}",
            self.command, self.spec_hash, self.seed, self.units
        )
    }

    pub fn json(&self) -> Value {
        json!({
            "command": self.command,
            "spec_hash": self.spec_hash,
            "seed": self.seed,
            "units": self.units,
        })
    }
}

/// Fixed-width float rendering shared by every CSV field.
pub fn fmt(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.12e}")
    }
}

/// A CSV block: header row plus data rows, optionally introduced by a
/// section comment.
pub struct CsvBlock {
    pub section: Option<String>,
    pub header: String,
    pub rows: Vec<String>,
}

pub fn render_csv(meta: &Metadata, blocks: &[CsvBlock]) -> String {
    let mut out = String::new();
    out.push_str(&meta.comment_line());
    out.push('\n');
    for (i, block) in blocks.iter().enumerate() {
        if let Some(section) = &block.section {
            out.push_str(&format!("# {section}\n"));
        } else if i > 0 {
            out.push_str("#\n");
        }
        out.push_str(&block.header);
        out.push('\n');
        for row in &block.rows {
            out.push_str(row);
            out.push('\n');
        }
    }
    out
}

pub fn render_json(meta: &Metadata, mut body: serde_json::Map<String, Value>) -> String {
    body.insert("metadata".into(), meta.json());
    serde_json::to_string_pretty(&Value::Object(body)).expect("json renders")
}
