//! CSV reader with a header row and a designated label column.

use std::path::Path;
use std::str::FromStr;

use ndarray::Array2;

use super::Dataset;
use crate::error::{DargError, Result};

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Plain integers are column indices; anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DargError::io(path, e))?;
    parse_csv(&text, label_column)
}

pub(crate) fn parse_csv(text: &str, label_column: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DargError::parse(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = match label_column {
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DargError::MissingColumn(name.clone()))?,
        LabelColumn::Index(i) if *i < headers.len() => *i,
        LabelColumn::Index(i) => return Err(DargError::MissingColumn(format!("#{i}"))),
        LabelColumn::Last if !headers.is_empty() => headers.len() - 1,
        LabelColumn::Last => return Err(DargError::MissingColumn("<last>".into())),
    };
    if headers.len() < 2 {
        return Err(DargError::parse(1, "need at least one feature column and a label column"));
    }
    let feature_cols: Vec<usize> = (0..headers.len()).filter(|&j| j != label_idx).collect();

    // None until the first data row decides numeric vs categorical.
    let mut numeric: Vec<Option<bool>> = vec![None; headers.len()];
    let mut categories: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    let mut values: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();

    for (row_no, record) in reader.records().enumerate() {
        let line = row_no + 2;
        let record = record.map_err(|e| DargError::parse(line, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(DargError::parse(
                line,
                format!("row has {} fields, header has {}", record.len(), headers.len()),
            ));
        }
        for &j in &feature_cols {
            let cell = &record[j];
            if cell.is_empty() || cell == "?" {
                return Err(DargError::parse(
                    line,
                    format!("missing value in column `{}`", headers[j]),
                ));
            }
            let parsed = cell.parse::<f64>().ok().filter(|v| v.is_finite());
            let is_numeric = *numeric[j].get_or_insert(parsed.is_some());
            let v = if is_numeric {
                parsed.ok_or_else(|| {
                    DargError::parse(
                        line,
                        format!("non-numeric value `{cell}` in numeric column `{}`", headers[j]),
                    )
                })?
            } else {
                let cats = &mut categories[j];
                match cats.iter().position(|c| c == cell) {
                    Some(p) => p as f64,
                    None => {
                        cats.push(cell.to_string());
                        (cats.len() - 1) as f64
                    }
                }
            };
            values.push(v);
        }
        let label = &record[label_idx];
        if label.is_empty() {
            return Err(DargError::parse(line, "missing label"));
        }
        raw_labels.push(label.to_string());
    }
    if raw_labels.is_empty() {
        return Err(DargError::parse(1, "no data rows"));
    }

    let class_names = sorted_classes(&raw_labels);
    let labels = raw_labels
        .iter()
        .map(|l| class_names.iter().position(|c| c == l).expect("collected above"))
        .collect();
    let features = Array2::from_shape_vec((raw_labels.len(), feature_cols.len()), values)
        .expect("rows have uniform arity");
    let feature_names = feature_cols.iter().map(|&j| headers[j].clone()).collect();
    Dataset::new(features, labels, class_names, feature_names)
}

/// Distinct labels, numerically ordered when every label is a number, else lexicographic.
fn sorted_classes(raw: &[String]) -> Vec<String> {
    let mut distinct: Vec<String> = Vec::new();
    for l in raw {
        if !distinct.contains(l) {
            distinct.push(l.clone());
        }
    }
    let all_numeric = distinct.iter().all(|l| l.parse::<f64>().is_ok());
    if all_numeric {
        distinct.sort_by(|a, b| {
            a.parse::<f64>()
                .unwrap()
                .total_cmp(&b.parse::<f64>().unwrap())
        });
    } else {
        distinct.sort();
    }
    distinct
}
