//! File formats: numeric CSV matrices, model files, and run manifests.

use std::fs;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fit::SampleMoments;
use crate::graph::{ColourClasses, Pdcg};

/// A numeric CSV table. A first row with any non-numeric field is a header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub values: DMatrix<f64>,
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        let parsed: Vec<std::result::Result<f64, _>> = rec.iter().map(|f| f.parse::<f64>()).collect();
        if k == 0 && parsed.iter().any(|x| x.is_err()) {
            header = Some(rec.iter().map(|s| s.to_string()).collect());
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (col, (v, raw)) in parsed.into_iter().zip(rec.iter()).enumerate() {
            match v {
                Ok(x) if x.is_finite() => row.push(x),
                _ => {
                    return Err(Error::Ingestion(format!(
                        "line {line}, field {}: {raw:?} is not a finite number",
                        col + 1
                    )))
                }
            }
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Ingestion(format!(
                    "line {line}: expected {} fields, found {}",
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Ingestion("no numeric rows".into()));
    }
    let (n, p) = (rows.len(), rows[0].len());
    if let Some(h) = &header {
        if h.len() != p {
            return Err(Error::Ingestion(format!("header has {} fields but rows have {p}", h.len())));
        }
    }
    let values = DMatrix::from_row_iterator(n, p, rows.into_iter().flatten());
    Ok(Table { header, values })
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    parse_csv(&text).map_err(|e| match e {
        Error::Ingestion(m) => Error::Ingestion(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Sample moments from a covariance CSV and its sample size.
pub fn moments_from_covariance(path: &Path, n: usize) -> Result<SampleMoments> {
    let t = read_csv(path)?;
    SampleMoments::new(t.values, n)
}

/// Sample moments from a data CSV (rows are observations).
pub fn moments_from_data(path: &Path, unbiased: bool) -> Result<SampleMoments> {
    let t = read_csv(path)?;
    SampleMoments::from_data(&t.values, unbiased)
}

pub fn write_matrix_csv(m: &DMatrix<f64>, header: Option<&[String]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(h) = header {
        w.write_record(h)?;
    }
    for row in m.row_iter() {
        w.write_record(row.iter().map(|x| format!("{x:e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads a model file in quadruplet form or as explicit colour classes.
pub fn read_model(path: &Path) -> Result<Pdcg> {
    let text = fs::read_to_string(path)?;
    parse_model(&text).map_err(|e| match e {
        Error::Json(j) => Error::Ingestion(format!("{}: {j}", path.display())),
        other => other,
    })
}

pub fn parse_model(text: &str) -> Result<Pdcg> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("vertex_classes").is_some() || value.get("edge_classes").is_some() {
        let cc: ColourClasses = serde_json::from_value(value)?;
        Pdcg::from_colour_classes(&cc)
    } else {
        Pdcg::from_json(text)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path)?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    Ok(sha256_hex(&buf))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance block embedded in every JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: Option<String>,
}

impl RunManifest {
    pub fn start(command: &str, config: serde_json::Value, seed: Option<u64>) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_at: now(),
            finished_at: None,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest { path: path.display().to_string(), sha256: sha256_file(path)? });
        Ok(())
    }

    pub fn finish(&mut self) {
        self.finished_at = Some(now());
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    pub result: &'a T,
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
