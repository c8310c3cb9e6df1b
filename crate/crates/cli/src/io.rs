//! Dataset files, metadata blocks and output helpers.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use geocal::simplex::{normalize_and_clip, InteriorConfig};
use geocal::{LabeledDataset, ProbVector};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL: &str = "geocal";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance attached to every output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl Metadata {
    pub fn new(command: &str, config: serde_json::Value, inputs: Vec<InputDigest>) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            config,
            inputs,
        }
    }

    /// `#`-prefixed header lines for CSV outputs.
    pub fn comment_lines(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {} {} {}", self.tool, self.version, self.command);
        let _ = writeln!(out, "# format_version: {FORMAT_VERSION}");
        let _ = writeln!(
            out,
            "# config: {}",
            serde_json::to_string(&self.config).unwrap_or_default()
        );
        for input in &self.inputs {
            let _ = writeln!(out, "# input: {} sha256={}", input.path, input.sha256);
        }
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn read_bytes(path: &Path) -> Result<(Vec<u8>, InputDigest), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    };
    Ok((bytes, digest))
}

/// Parses a dataset CSV: header `p0,…,p{c-1},label`, `#` comment lines.
///
/// Rows are validated with the clip rule but stored only renormalized, so
/// vertices stay vertices until a calibrator clips them.
pub fn parse_dataset(bytes: &[u8], interior: &InteriorConfig) -> Result<LabeledDataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| CliError::Input(format!("bad header: {e}")))?
        .clone();
    let c = header.len().saturating_sub(1);
    if c < 2 {
        return Err(CliError::Input(
            "header needs p0,p1,...,label with at least two probability columns".into(),
        ));
    }
    for (j, name) in header.iter().take(c).enumerate() {
        if name != format!("p{j}") {
            return Err(CliError::Input(format!(
                "header column {j} is '{name}', expected 'p{j}'"
            )));
        }
    }
    if &header[c] != "label" {
        return Err(CliError::Input(format!(
            "last header column is '{}', expected 'label'",
            &header[c]
        )));
    }

    let mut data = LabeledDataset::new(c)?;
    let mut raw = vec![0.0; c];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CliError::Input(format!("row {row}: {e}")))?;
        if record.len() != c + 1 {
            return Err(CliError::Input(format!(
                "row {row}: expected {} fields, found {}",
                c + 1,
                record.len()
            )));
        }
        for (j, slot) in raw.iter_mut().enumerate() {
            *slot = record[j]
                .parse()
                .map_err(|_| CliError::Input(format!("row {row}: '{}' is not a number", &record[j])))?;
        }
        let label: usize = record[c]
            .parse()
            .map_err(|_| CliError::Input(format!("row {row}: label '{}' is not a class index", &record[c])))?;
        if label >= c {
            return Err(CliError::Input(format!("row {row}: label {label} outside 0..{c}")));
        }
        normalize_and_clip(&raw, interior).map_err(|e| CliError::Input(format!("row {row}: {e}")))?;
        let sum: f64 = raw.iter().sum();
        let probs = ProbVector::new(raw.iter().map(|v| v.max(0.0) / sum).collect())
            .map_err(|e| CliError::Input(format!("row {row}: {e}")))?;
        data.push(probs, label)?;
    }
    if data.is_empty() {
        return Err(CliError::Input("dataset has no rows".into()));
    }
    Ok(data)
}

pub fn load_dataset(path: &Path, interior: &InteriorConfig) -> Result<(LabeledDataset, InputDigest), CliError> {
    let (bytes, digest) = read_bytes(path)?;
    let data = parse_dataset(&bytes, interior).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })?;
    Ok((data, digest))
}

pub fn dataset_csv(data: &LabeledDataset, meta: &Metadata) -> String {
    let mut out = meta.comment_lines();
    let header: Vec<String> = (0..data.classes()).map(|j| format!("p{j}")).collect();
    let _ = writeln!(out, "{},label", header.join(","));
    for s in data.rows() {
        for v in s.probs.as_slice() {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", s.label);
    }
    out
}

/// Simple CSV table: metadata comments, header, rows of preformatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self, meta: &Metadata) -> String {
        let mut out = meta.comment_lines();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes to `path`, or stdout when `path` is `None` or `-`.
pub fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
            }
            fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Internal(format!("stdout: {e}")))
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
