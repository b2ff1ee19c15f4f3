//! Dataset ingestion: KEEL `.dat` files and RFC-4180 CSV.

use std::fs;
use std::path::Path;

use crate::dataset::{ClassLabel, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum AttrType {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone)]
struct Attribute {
    name: String,
    ty: AttrType,
}

/// Loads a KEEL `.dat` file.
///
/// Header keywords (`@relation`, `@attribute`, `@inputs`, `@outputs`,
/// `@data`) are case-insensitive and `%` lines are comments. When
/// `@inputs`/`@outputs` are absent, the last declared attribute is the
/// output. Nominal input attributes are rejected; the output attribute must
/// take exactly two distinct values in the data section.
pub fn load_keel(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "keel".to_string());
    parse_keel(&text, &name)
}

/// Parses KEEL `.dat` content. Split out from [`load_keel`] so fixtures can
/// be parsed from strings in tests.
pub fn parse_keel(text: &str, name: &str) -> Result<Dataset> {
    let mut relation: Option<String> = None;
    let mut attributes: Vec<Attribute> = Vec::new();
    let mut inputs: Option<Vec<String>> = None;
    let mut outputs: Option<Vec<String>> = None;
    let mut data_rows: Vec<&str> = Vec::new();
    let mut in_data = false;

    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if in_data {
            data_rows.push(line);
            continue;
        }
        if let Some(rest) = strip_keyword(line, "@relation") {
            relation = Some(rest.trim().to_string());
        } else if let Some(rest) = strip_keyword(line, "@attribute") {
            attributes.push(parse_attribute(rest)?);
        } else if let Some(rest) = strip_keyword(line, "@inputs") {
            inputs = Some(split_names(rest));
        } else if let Some(rest) = strip_keyword(line, "@outputs") {
            outputs = Some(split_names(rest));
        } else if strip_keyword(line, "@data").is_some() {
            in_data = true;
        } else {
            return Err(Error::MalformedHeader(format!(
                "unrecognized header line: '{line}'"
            )));
        }
    }

    if !in_data {
        return Err(Error::MalformedHeader("missing @data section".into()));
    }
    if attributes.is_empty() {
        return Err(Error::MalformedHeader("no @attribute declarations".into()));
    }

    // Default KEEL convention: last attribute is the output.
    let output_names = outputs.unwrap_or_else(|| vec![attributes.last().unwrap().name.clone()]);
    if output_names.len() != 1 {
        return Err(Error::MalformedHeader(format!(
            "expected exactly one output attribute, found {}",
            output_names.len()
        )));
    }
    let output_name = &output_names[0];
    let output_col = attributes
        .iter()
        .position(|a| &a.name == output_name)
        .ok_or_else(|| {
            Error::MalformedHeader(format!("output attribute '{output_name}' not declared"))
        })?;

    let input_names = inputs.unwrap_or_else(|| {
        attributes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != output_col)
            .map(|(_, a)| a.name.clone())
            .collect()
    });
    if input_names.is_empty() {
        return Err(Error::MalformedHeader("no input attributes".into()));
    }

    let mut input_cols = Vec::with_capacity(input_names.len());
    for n in &input_names {
        let col = attributes
            .iter()
            .position(|a| &a.name == n)
            .ok_or_else(|| Error::MalformedHeader(format!("input attribute '{n}' not declared")))?;
        if let AttrType::Nominal(_) = attributes[col].ty {
            return Err(Error::CategoricalInput(n.clone()));
        }
        input_cols.push(col);
    }

    if data_rows.is_empty() {
        return Err(Error::EmptyData);
    }

    let n_features = input_cols.len();
    let mut features = Vec::with_capacity(data_rows.len() * n_features);
    let mut labels = Vec::with_capacity(data_rows.len());
    for (row_idx, row) in data_rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != attributes.len() {
            return Err(Error::RaggedRow {
                row: row_idx,
                got: fields.len(),
                expected: attributes.len(),
            });
        }
        for &col in &input_cols {
            features.push(parse_feature(fields[col], row_idx, &attributes[col].name)?);
        }
        labels.push(ClassLabel::new(fields[output_col]));
    }

    let dataset_name = relation
        .filter(|r| !r.is_empty())
        .unwrap_or_else(|| name.to_string());
    Dataset::new(dataset_name, features, n_features, labels)
}

fn strip_keyword<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    if line.len() >= keyword.len() && line[..keyword.len()].eq_ignore_ascii_case(keyword) {
        let rest = &line[keyword.len()..];
        if rest.is_empty() || rest.starts_with(char::is_whitespace) || rest.starts_with('{') {
            return Some(rest);
        }
    }
    None
}

fn parse_attribute(rest: &str) -> Result<Attribute> {
    let rest = rest.trim();
    if rest.is_empty() {
        return Err(Error::MalformedHeader("@attribute without a name".into()));
    }
    // Name runs until whitespace or the '{' of a nominal domain.
    let name_end = rest
        .find(|c: char| c.is_whitespace() || c == '{')
        .unwrap_or(rest.len());
    let name = rest[..name_end].to_string();
    let spec = rest[name_end..].trim();

    if name.is_empty() {
        return Err(Error::MalformedHeader("@attribute without a name".into()));
    }

    if spec.starts_with('{') {
        let inner = spec
            .strip_prefix('{')
            .and_then(|s| s.strip_suffix('}'))
            .ok_or_else(|| {
                Error::MalformedHeader(format!("unterminated nominal domain for '{name}'"))
            })?;
        let values = inner.split(',').map(|v| v.trim().to_string()).collect();
        return Ok(Attribute {
            name,
            ty: AttrType::Nominal(values),
        });
    }

    let ty_word = spec.split_whitespace().next().unwrap_or("").to_lowercase();
    match ty_word.as_str() {
        // Range bounds like "real [1.5, 75.0]" are metadata only.
        "real" | "integer" | "numeric" | "" => Ok(Attribute {
            name,
            ty: AttrType::Numeric,
        }),
        other => Err(Error::MalformedHeader(format!(
            "unknown attribute type '{other}' for '{name}'"
        ))),
    }
}

fn split_names(rest: &str) -> Vec<String> {
    rest.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_feature(value: &str, row: usize, column: &str) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| Error::NonNumericFeature {
        row,
        column: column.to_string(),
        value: value.to_string(),
    })?;
    if !parsed.is_finite() {
        return Err(Error::NonFiniteFeature {
            row,
            column: column.to_string(),
        });
    }
    Ok(parsed)
}

/// Identifies the label column of a CSV file by header name or 0-based
/// position. A string that matches no header but parses as an integer is
/// treated as a position.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

impl From<usize> for LabelColumn {
    fn from(i: usize) -> Self {
        LabelColumn::Index(i)
    }
}

impl LabelColumn {
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            LabelColumn::Index(i) if *i < headers.len() => Ok(*i),
            LabelColumn::Index(i) => Err(Error::MissingLabelColumn(i.to_string())),
            LabelColumn::Name(name) => {
                if let Some(pos) = headers.iter().position(|h| h == name) {
                    return Ok(pos);
                }
                if let Ok(idx) = name.parse::<usize>() {
                    if idx < headers.len() {
                        return Ok(idx);
                    }
                }
                Err(Error::MissingLabelColumn(name.clone()))
            }
        }
    }
}

/// Loads a CSV file with a header row. Every column except the label column
/// is a numeric feature; the same binary-label contract as [`load_keel`]
/// applies.
pub fn load_csv(path: impl AsRef<Path>, label_column: impl Into<LabelColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;

    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_col = label_column.into().resolve(&headers)?;
    let n_features = headers.len().saturating_sub(1);
    if n_features == 0 {
        return Err(Error::InvalidInput(
            "CSV has no feature columns besides the label".into(),
        ));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row: row_idx,
                got: record.len(),
                expected: headers.len(),
            });
        }
        for (col, value) in record.iter().enumerate() {
            if col == label_col {
                labels.push(ClassLabel::new(value));
            } else {
                features.push(parse_feature(value, row_idx, &headers[col])?);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::EmptyData);
    }

    Dataset::new(name, features, n_features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const TINY_KEEL: &str = "\
@relation tiny
@attribute f1 real [0.0, 1.0]
@attribute class {a, b}
@inputs f1
@outputs class
@data
0.1, a
0.9, b
";

    #[test]
    fn parses_minimal_keel() {
        let d = parse_keel(TINY_KEEL, "tiny").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.n_features(), 1);
        assert_eq!(d.classes().len(), 2);
        assert_eq!(d.name(), "tiny");
    }

    #[test]
    fn keel_keywords_are_case_insensitive_and_comments_skipped() {
        let text = "\
% a comment
@RELATION t
@Attribute x REAL
@ATTRIBUTE y {p, n}
@InPuTs x
@OUTPUTS y
@DATA
% another comment
1.0, p
2.0, n
";
        let d = parse_keel(text, "t").unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[2.0]);
    }

    #[test]
    fn keel_rejects_three_output_values() {
        let text = "\
@relation t
@attribute x real
@attribute y {a, b, c}
@data
1.0, a
2.0, b
3.0, c
";
        let err = parse_keel(text, "t").unwrap_err();
        assert!(matches!(err, Error::NonBinaryLabels { found: 3 }));
    }

    #[test]
    fn keel_rejects_categorical_input() {
        let text = "\
@relation t
@attribute x {low, high}
@attribute y {a, b}
@inputs x
@outputs y
@data
low, a
high, b
";
        let err = parse_keel(text, "t").unwrap_err();
        assert!(matches!(err, Error::CategoricalInput(name) if name == "x"));
    }

    #[test]
    fn keel_rejects_empty_data() {
        let text = "\
@relation t
@attribute x real
@attribute y {a, b}
@data
";
        let err = parse_keel(text, "t").unwrap_err();
        assert!(matches!(err, Error::EmptyData));
    }

    #[test]
    fn keel_defaults_to_last_attribute_as_output() {
        let text = "\
@relation t
@attribute x real
@attribute cls {a, b}
@data
0.5, a
0.7, b
";
        let d = parse_keel(text, "t").unwrap();
        assert_eq!(d.n_features(), 1);
        assert_eq!(d.label(0), &ClassLabel::new("a"));
    }

    fn write_temp(content: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_csv_by_name_and_index() {
        let csv = "f1,f2,target\n0.5,1.0,0\n0.25,2.0,1\n0.75,3.0,0\n1.0,4.0,1\n";
        let f = write_temp(csv, ".csv");
        let by_name = load_csv(f.path(), "target").unwrap();
        let by_index = load_csv(f.path(), 2usize).unwrap();
        assert_eq!(by_name.len(), 4);
        assert_eq!(by_name.n_features(), 2);
        assert_eq!(by_name.labels(), by_index.labels());
        assert_eq!(by_name.row(1), &[0.25, 2.0]);
    }

    #[test]
    fn csv_rejects_nan_cell() {
        let csv = "f1,target\nNaN,0\n1.0,1\n";
        let f = write_temp(csv, ".csv");
        let err = load_csv(f.path(), "target").unwrap_err();
        assert!(matches!(err, Error::NonFiniteFeature { .. }));
    }

    #[test]
    fn csv_rejects_missing_column() {
        let csv = "f1,target\n0.0,0\n1.0,1\n";
        let f = write_temp(csv, ".csv");
        let err = load_csv(f.path(), "label").unwrap_err();
        assert!(matches!(err, Error::MissingLabelColumn(_)));
    }

    #[test]
    fn csv_rejects_non_numeric_feature() {
        let csv = "f1,target\nabc,0\n1.0,1\n";
        let f = write_temp(csv, ".csv");
        let err = load_csv(f.path(), "target").unwrap_err();
        assert!(matches!(err, Error::NonNumericFeature { .. }));
    }
}
