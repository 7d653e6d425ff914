use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

/// Version tag of `docs/model-ledger.md`; bump whenever a formula changes.
pub const MODEL_LEDGER_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableMetadata {
    pub tool_version: String,
    pub scenario_name: String,
    /// SHA-256 of the fully resolved scenario settings.
    pub scenario_sha256: String,
    pub model_ledger_version: String,
}

/// A rectangular table of results. Non-finite cells mean "no key" or a
/// degenerate point and are written as `nan`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub metadata: TableMetadata,
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else {
        "nan".to_string()
    }
}

impl ResultTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn metadata_line(&self) -> String {
        let m = &self.metadata;
        format!(
            "# metadata: tool=qlink {}; scenario={}; scenario_sha256={}; model_ledger={}",
            m.tool_version, m.scenario_name, m.scenario_sha256, m.model_ledger_version
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.metadata_line());
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        out.push_str(&self.units.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| cell(v)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// JSON mirror of the CSV; `nan` cells become `null`.
    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|&v| if v.is_finite() { json!(v) } else { Value::Null })
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "metadata": self.metadata,
            "columns": self.columns,
            "units": self.units,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("table serializes");
        text.push('\n');
        text
    }
}
