//! Loss-file ingestion: one loss per row, optional header, optional `label`
//! column.

use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossData {
    pub values: Vec<f64>,
    /// Present when the file has a label column.
    pub labels: Option<Vec<String>>,
}

pub fn read_losses_path(path: &Path) -> Result<LossData> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_losses(f)
}

/// Parses losses from CSV text. Without a header the first column is the
/// loss and a second column, if present, the label. With a header the loss
/// column is `value`, `loss` or `amount` (else the first column) and the
/// label column is `label`.
pub fn read_losses<R: Read>(r: R) -> Result<LossData> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(r);
    let mut value_col = 0usize;
    let mut label_col: Option<usize> = None;
    let mut out = LossData::default();
    let mut labels = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if first {
            first = false;
            let head = rec.get(0).unwrap_or("");
            if head.parse::<f64>().is_err() {
                let names: Vec<String> = rec.iter().map(|s| s.to_ascii_lowercase()).collect();
                value_col = names.iter().position(|n| n == "value" || n == "loss" || n == "amount").unwrap_or(0);
                label_col = names.iter().position(|n| n == "label");
                continue;
            }
            if rec.len() > 1 {
                label_col = Some(1);
            }
        }
        let raw = rec
            .get(value_col)
            .ok_or_else(|| Error::Parse { line, message: "missing loss column".into() })?;
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::Parse { line, message: format!("'{raw}' is not a number") })?;
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Parse { line, message: format!("loss must be positive and finite, got {raw}") });
        }
        out.values.push(v);
        if let Some(c) = label_col {
            labels.push(rec.get(c).unwrap_or("").to_string());
        }
    }
    if label_col.is_some() {
        out.labels = Some(labels);
    }
    Ok(out)
}
