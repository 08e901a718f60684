//! KEEL `.dat` reader.
//!
//! Header directives (`@relation`, `@attribute`, `@inputs`, `@outputs`, `@data`)
//! are case-insensitive. Numeric attributes are parsed as reals; categorical
//! attributes (value sets in braces) map to integer codes in declaration order.

use std::path::Path;

use ndarray::Array2;

use super::Dataset;
use crate::error::{DargError, Result};

#[derive(Debug, Clone, PartialEq)]
enum AttrKind {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone)]
struct Attribute {
    name: String,
    kind: AttrKind,
}

pub fn load_keel(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DargError::io(path, e))?;
    parse_keel(&text)
}

pub fn parse_keel(text: &str) -> Result<Dataset> {
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut data_start = None;

    let mut lines = text.lines().enumerate();
    for (idx, raw) in lines.by_ref() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !line.starts_with('@') {
            return Err(DargError::parse(
                line_no,
                "expected a header directive before @data",
            ));
        }
        let (directive, rest) = split_directive(line);
        match directive.to_ascii_lowercase().as_str() {
            "@relation" => {}
            "@attribute" => attributes.push(parse_attribute(rest, line_no)?),
            "@inputs" | "@input" => inputs = Some(split_names(rest)),
            "@outputs" | "@output" => outputs = Some(split_names(rest)),
            "@data" => {
                data_start = Some(line_no);
                break;
            }
            other => {
                return Err(DargError::parse(
                    line_no,
                    format!("unknown directive `{other}`"),
                ))
            }
        }
    }
    let data_line = data_start.ok_or_else(|| DargError::parse(0, "missing @data section"))?;
    if attributes.len() < 2 {
        return Err(DargError::parse(
            data_line,
            "need at least one input attribute and a class attribute",
        ));
    }

    let position = |name: &str, line: usize| -> Result<usize> {
        attributes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| DargError::parse(line, format!("undeclared attribute `{name}`")))
    };
    let class_idx = match &outputs {
        Some(names) if names.len() == 1 => position(&names[0], data_line)?,
        Some(names) => {
            return Err(DargError::parse(
                data_line,
                format!("expected exactly one output attribute, found {}", names.len()),
            ))
        }
        None => attributes.len() - 1,
    };
    let input_idx: Vec<usize> = match &inputs {
        Some(names) => {
            let mut idx = names
                .iter()
                .map(|n| position(n, data_line))
                .collect::<Result<Vec<_>>>()?;
            idx.sort_unstable();
            idx
        }
        None => (0..attributes.len()).filter(|&i| i != class_idx).collect(),
    };
    if input_idx.contains(&class_idx) || input_idx.is_empty() {
        return Err(DargError::parse(
            data_line,
            "class attribute must be distinct from the inputs",
        ));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_classes: Vec<(String, usize)> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != attributes.len() {
            return Err(DargError::parse(
                line_no,
                format!(
                    "row has {} fields but the header declares {} attributes",
                    fields.len(),
                    attributes.len()
                ),
            ));
        }
        let mut row = Vec::with_capacity(input_idx.len());
        for &j in &input_idx {
            row.push(encode_value(&attributes[j], fields[j], line_no)?);
        }
        rows.push(row);
        raw_classes.push((fields[class_idx].to_string(), line_no));
    }
    if rows.is_empty() {
        return Err(DargError::parse(data_line, "no data rows"));
    }

    let class_attr = &attributes[class_idx];
    let class_names: Vec<String> = match &class_attr.kind {
        AttrKind::Nominal(values) => values.clone(),
        AttrKind::Numeric => numeric_class_values(&raw_classes)?,
    };
    let labels = raw_classes
        .iter()
        .map(|(v, line)| {
            let v = unquote(v);
            class_names.iter().position(|c| c == v).ok_or_else(|| {
                DargError::parse(*line, format!("unknown class value `{v}`"))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let d = input_idx.len();
    let n = rows.len();
    let features = Array2::from_shape_vec((n, d), rows.into_iter().flatten().collect())
        .expect("rows have uniform arity");
    let feature_names = input_idx
        .iter()
        .map(|&j| attributes[j].name.clone())
        .collect();
    let (labels, class_names) = drop_unused_classes(labels, class_names);
    Dataset::new(features, labels, class_names, feature_names)
}

/// Declared class values that never occur are removed; the rest keep their relative order.
pub(crate) fn drop_unused_classes(
    labels: Vec<usize>,
    class_names: Vec<String>,
) -> (Vec<usize>, Vec<String>) {
    let mut used = vec![false; class_names.len()];
    for &y in &labels {
        used[y] = true;
    }
    let mut remap = vec![usize::MAX; class_names.len()];
    let mut kept = Vec::new();
    for (c, name) in class_names.into_iter().enumerate() {
        if used[c] {
            remap[c] = kept.len();
            kept.push(name);
        }
    }
    (labels.into_iter().map(|y| remap[y]).collect(), kept)
}

fn split_directive(line: &str) -> (&str, &str) {
    let end = line
        .find(|c: char| c.is_whitespace() || c == '{')
        .unwrap_or(line.len());
    (&line[..end], line[end..].trim())
}

fn split_names(rest: &str) -> Vec<String> {
    rest.split(',')
        .map(|s| unquote(s.trim()).to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

fn parse_attribute(rest: &str, line_no: usize) -> Result<Attribute> {
    let rest = rest.trim();
    if rest.is_empty() {
        return Err(DargError::parse(line_no, "attribute without a name"));
    }
    let (name, spec) = if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let close = rest[1..]
            .find(q)
            .ok_or_else(|| DargError::parse(line_no, "unterminated quoted attribute name"))?;
        (&rest[1..=close], rest[close + 2..].trim())
    } else {
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '{')
            .unwrap_or(rest.len());
        (&rest[..end], rest[end..].trim())
    };
    if spec.starts_with('{') {
        let close = spec
            .rfind('}')
            .ok_or_else(|| DargError::parse(line_no, "unterminated value set"))?;
        let values: Vec<String> = spec[1..close]
            .split(',')
            .map(|v| unquote(v).to_string())
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(DargError::parse(line_no, "empty value set"));
        }
        return Ok(Attribute {
            name: name.to_string(),
            kind: AttrKind::Nominal(values),
        });
    }
    let type_word = spec
        .split(|c: char| c.is_whitespace() || c == '[')
        .next()
        .unwrap_or("")
        .to_ascii_lowercase();
    match type_word.as_str() {
        "real" | "integer" | "numeric" => Ok(Attribute {
            name: name.to_string(),
            kind: AttrKind::Numeric,
        }),
        "" => Err(DargError::parse(
            line_no,
            format!("attribute `{name}` has no type"),
        )),
        other => Err(DargError::parse(
            line_no,
            format!("unsupported attribute type `{other}`"),
        )),
    }
}

fn encode_value(attr: &Attribute, field: &str, line_no: usize) -> Result<f64> {
    let field = unquote(field);
    if field == "?" || field.eq_ignore_ascii_case("<null>") || field.is_empty() {
        return Err(DargError::parse(
            line_no,
            format!("missing value for attribute `{}`", attr.name),
        ));
    }
    match &attr.kind {
        AttrKind::Numeric => field
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                DargError::parse(
                    line_no,
                    format!("`{field}` is not a number (attribute `{}`)", attr.name),
                )
            }),
        AttrKind::Nominal(values) => values
            .iter()
            .position(|v| v == field)
            .map(|p| p as f64)
            .ok_or_else(|| {
                DargError::parse(
                    line_no,
                    format!("unknown value `{field}` for attribute `{}`", attr.name),
                )
            }),
    }
}

fn numeric_class_values(raw: &[(String, usize)]) -> Result<Vec<String>> {
    let mut values: Vec<(f64, String)> = Vec::new();
    for (v, line) in raw {
        let v = unquote(v);
        let x: f64 = v
            .parse()
            .map_err(|_| DargError::parse(*line, format!("unknown class value `{v}`")))?;
        if !values.iter().any(|(_, s)| s == v) {
            values.push((x, v.to_string()));
        }
    }
    values.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(values.into_iter().map(|(_, s)| s).collect())
}
