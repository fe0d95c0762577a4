//! Delimited text matrices and label files.
//!
//! A matrix file has a header row of feature ids (its first cell names the
//! sample-id column and is otherwise ignored) and one row per sample: the
//! sample id followed by numeric cells. Tab and comma delimiters are
//! recognised from the header line.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub sample_ids: Vec<String>,
    pub feature_ids: Vec<String>,
    pub values: Array2<f64>,
}

impl Matrix {
    pub fn column_index(&self, id: &str) -> Option<usize> {
        self.feature_ids.iter().position(|f| f == id)
    }

    /// Removes one column and returns its values.
    pub fn take_column(&mut self, id: &str) -> Option<Array1<f64>> {
        let j = self.column_index(id)?;
        let column = self.values.column(j).to_owned();
        let keep: Vec<usize> = (0..self.feature_ids.len()).filter(|&k| k != j).collect();
        self.values = self.values.select(ndarray::Axis(1), &keep);
        self.feature_ids.remove(j);
        Some(column)
    }

    /// Columns reordered to `ids`. Fails listing the ids absent from the
    /// matrix and, when `exact`, the matrix ids not requested.
    pub fn align_columns(&self, ids: &[String], exact: bool) -> Result<Array2<f64>, CliError> {
        let index: HashMap<&str, usize> = self
            .feature_ids
            .iter()
            .enumerate()
            .map(|(j, f)| (f.as_str(), j))
            .collect();
        let missing: Vec<&str> = ids
            .iter()
            .filter(|id| !index.contains_key(id.as_str()))
            .map(String::as_str)
            .collect();
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let extra: Vec<&str> = if exact {
            self.feature_ids
                .iter()
                .filter(|f| !wanted.contains(f.as_str()))
                .map(String::as_str)
                .collect()
        } else {
            Vec::new()
        };
        if !missing.is_empty() || !extra.is_empty() {
            return Err(CliError::Data(format!(
                "feature id mismatch; missing: [{}]; extra: [{}]",
                missing.join(", "),
                extra.join(", ")
            )));
        }
        let cols: Vec<usize> = ids.iter().map(|id| index[id.as_str()]).collect();
        Ok(self.values.select(ndarray::Axis(1), &cols))
    }
}

fn detect_delimiter(text: &str) -> u8 {
    let first = text.lines().next().unwrap_or("");
    if first.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn records(path: &Path) -> Result<Vec<(u64, Vec<String>)>, CliError> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(&text))
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        out.push((line, rec.iter().map(|s| s.trim().to_string()).collect()));
    }
    Ok(out)
}

fn parse_cell(path: &Path, line: u64, column: usize, cell: &str) -> Result<f64, CliError> {
    let at = || format!("{}:{line}:{column}", path.display());
    let v: f64 = cell
        .parse()
        .map_err(|_| CliError::Data(format!("{}: cannot parse '{cell}' as a number", at())))?;
    if !v.is_finite() {
        return Err(CliError::Data(format!("{}: non-finite value '{cell}'", at())));
    }
    Ok(v)
}

pub fn read_matrix(path: &Path) -> Result<Matrix, CliError> {
    let rows = records(path)?;
    let Some(((_, header), body)) = rows.split_first() else {
        return Err(CliError::Data(format!("{}: empty file", path.display())));
    };
    if header.len() < 2 {
        return Err(CliError::Data(format!("{}:1: header has no feature ids", path.display())));
    }
    let feature_ids: Vec<String> = header[1..].to_vec();
    let mut seen = HashSet::new();
    for (j, id) in feature_ids.iter().enumerate() {
        if id.is_empty() {
            return Err(CliError::Data(format!("{}:1:{}: empty feature id", path.display(), j + 2)));
        }
        if !seen.insert(id.as_str()) {
            return Err(CliError::Data(format!("{}:1:{}: duplicated feature id '{id}'", path.display(), j + 2)));
        }
    }
    let p = feature_ids.len();
    let mut values = Array2::zeros((body.len(), p));
    let mut sample_ids = Vec::with_capacity(body.len());
    let mut seen_samples = HashSet::new();
    for (i, (line, row)) in body.iter().enumerate() {
        if row.len() != p + 1 {
            return Err(CliError::Data(format!(
                "{}:{line}: expected {} fields, found {}",
                path.display(),
                p + 1,
                row.len()
            )));
        }
        if !seen_samples.insert(row[0].clone()) {
            return Err(CliError::Data(format!("{}:{line}:1: duplicated sample id '{}'", path.display(), row[0])));
        }
        sample_ids.push(row[0].clone());
        for j in 0..p {
            values[[i, j]] = parse_cell(path, *line, j + 2, &row[j + 1])?;
        }
    }
    if sample_ids.is_empty() {
        return Err(CliError::Data(format!("{}: no samples", path.display())));
    }
    Ok(Matrix {
        sample_ids,
        feature_ids,
        values,
    })
}

/// Two-column file of sample id and response; a first line whose second
/// field is not numeric is taken as a header.
pub fn read_labels(path: &Path) -> Result<Vec<(String, f64)>, CliError> {
    let rows = records(path)?;
    let mut out = Vec::with_capacity(rows.len());
    for (k, (line, row)) in rows.iter().enumerate() {
        if row.len() != 2 {
            return Err(CliError::Data(format!(
                "{}:{line}: expected 2 fields, found {}",
                path.display(),
                row.len()
            )));
        }
        if k == 0 && row[1].parse::<f64>().is_err() {
            continue;
        }
        out.push((row[0].clone(), parse_cell(path, *line, 2, &row[1])?));
    }
    Ok(out)
}

/// Responses ordered like `sample_ids`.
pub fn align_labels(path: &Path, labels: &[(String, f64)], sample_ids: &[String]) -> Result<Array1<f64>, CliError> {
    let map: HashMap<&str, f64> = labels.iter().map(|(s, v)| (s.as_str(), *v)).collect();
    if map.len() != labels.len() {
        return Err(CliError::Data(format!("{}: duplicated sample id", path.display())));
    }
    let missing: Vec<&str> = sample_ids
        .iter()
        .filter(|s| !map.contains_key(s.as_str()))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no label for samples [{}]",
            path.display(),
            missing.join(", ")
        )));
    }
    Ok(sample_ids.iter().map(|s| map[s.as_str()]).collect())
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Tab-delimited matrix text with `corner` as the first header cell.
pub fn format_matrix(corner: &str, row_ids: &[String], column_ids: &[String], values: &Array2<f64>) -> String {
    let mut s = String::new();
    s.push_str(corner);
    for c in column_ids {
        s.push('\t');
        s.push_str(c);
    }
    s.push('\n');
    for (id, row) in row_ids.iter().zip(values.rows()) {
        s.push_str(id);
        for v in row {
            s.push('\t');
            s.push_str(&v.to_string());
        }
        s.push('\n');
    }
    s
}

pub fn format_labels(header: (&str, &str), ids: &[String], values: &[f64]) -> String {
    let mut s = format!("{}\t{}\n", header.0, header.1);
    for (id, v) in ids.iter().zip(values) {
        s.push_str(&format!("{id}\t{v}\n"));
    }
    s
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}
