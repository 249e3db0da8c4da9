//! Report records, the anchor linter and atomic output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lproth::export::{sci, CsvTable};
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    pub fn holds(self, observed: f64, bound: f64) -> bool {
        match self {
            Relation::Le => observed <= bound,
            Relation::Lt => observed < bound,
            Relation::Ge => observed >= bound,
            Relation::Gt => observed > bound,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

/// One check: `observed relation bound`, plus supporting values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub name: String,
    /// Identifier of the claim being checked.
    pub anchor: String,
    pub observed: f64,
    pub relation: Relation,
    pub bound: f64,
    pub values: BTreeMap<String, f64>,
    pub pass: bool,
}

impl Record {
    /// Signed slack relative to the bound; negative when the check fails.
    pub fn margin(&self) -> f64 {
        let slack = match self.relation {
            Relation::Le | Relation::Lt => self.bound - self.observed,
            Relation::Ge | Relation::Gt => self.observed - self.bound,
        };
        if self.bound != 0.0 {
            slack / self.bound.abs()
        } else {
            slack
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Worst {
    pub name: String,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub worst_margin: Option<Worst>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub elapsed_s: f64,
    pub check_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub format: u32,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub summary: Summary,
    pub sidecars: Vec<String>,
    /// The only field that varies between identical runs.
    pub timing: Timing,
}

impl Report {
    pub fn new(config: ExperimentConfig, records: Vec<Record>, sidecars: Vec<String>, timing: Timing) -> Self {
        let passed = records.iter().filter(|r| r.pass).count();
        let worst_margin = records
            .iter()
            .min_by(|a, b| a.margin().total_cmp(&b.margin()))
            .map(|r| Worst {
                name: r.name.clone(),
                margin: r.margin(),
            });
        let summary = Summary {
            total: records.len(),
            passed,
            failed: records.len() - passed,
            worst_margin,
        };
        Self {
            format: FORMAT_VERSION,
            config,
            records,
            summary,
            sidecars,
            timing,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Columns name, anchor, observed, relation, bound, pass.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,anchor,observed,relation,bound,pass\n");
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.name,
                r.anchor,
                sci(r.observed),
                r.relation.symbol(),
                sci(r.bound),
                r.pass
            ));
        }
        s
    }
}

fn valid_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '.' | '-' | '_'))
}

/// Rejects reports with anchorless or malformed records.
pub fn lint(report: &Report) -> Result<(), String> {
    if report.format != FORMAT_VERSION {
        return Err(format!("unsupported format {}", report.format));
    }
    let mut names = std::collections::BTreeSet::new();
    for r in &report.records {
        if !valid_token(&r.anchor) {
            return Err(format!("record `{}` has no valid anchor", r.name));
        }
        if !valid_token(&r.name) {
            return Err(format!("record name `{}` is not a plain token", r.name));
        }
        if !names.insert(&r.name) {
            return Err(format!("record `{}` appears twice", r.name));
        }
        if r.pass != r.relation.holds(r.observed, r.bound) {
            return Err(format!("record `{}` pass flag disagrees with its bound", r.name));
        }
    }
    if report.summary.total != report.records.len() {
        return Err("summary count mismatch".into());
    }
    Ok(())
}

/// Writes `contents` next to `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Writes the report and its CSV sidecars; returns the files written.
pub fn emit(report: &Report, sidecars: &[(String, CsvTable)], out_dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, table) in sidecars {
        let path = out_dir.join(name);
        write_atomic(&path, &table.render())?;
        written.push(path);
    }
    let (name, body) = match report.config.format {
        crate::config::Format::Json => ("report.json", report.to_json()),
        crate::config::Format::Csv => ("report.csv", report.to_csv()),
    };
    let path = out_dir.join(name);
    write_atomic(&path, &body)?;
    written.push(path);
    Ok(written)
}

/// JSON Schema of the report document.
pub fn schema() -> serde_json::Value {
    serde_json::json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "lproth report",
        "type": "object",
        "required": ["format", "config", "records", "summary", "sidecars", "timing"],
        "properties": {
            "format": { "const": FORMAT_VERSION },
            "config": {
                "type": "object",
                "required": ["suite", "p", "d", "N", "epsilon", "seed", "budgets", "out_dir", "format"]
            },
            "records": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["name", "anchor", "observed", "relation", "bound", "values", "pass"],
                    "properties": {
                        "name": { "type": "string", "pattern": "^[a-z0-9._-]+$" },
                        "anchor": { "type": "string", "pattern": "^[a-z0-9._-]+$" },
                        "observed": { "type": ["number", "null"] },
                        "relation": { "enum": ["<=", "<", ">=", ">"] },
                        "bound": { "type": "number" },
                        "values": { "type": "object", "additionalProperties": { "type": ["number", "null"] } },
                        "pass": { "type": "boolean" }
                    }
                }
            },
            "summary": {
                "type": "object",
                "required": ["total", "passed", "failed", "worst_margin"]
            },
            "sidecars": { "type": "array", "items": { "type": "string" } },
            "timing": { "type": "object" }
        }
    })
}
