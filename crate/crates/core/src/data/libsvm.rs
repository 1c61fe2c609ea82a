use std::fmt::Write;

use super::DataError;
use crate::learners::{Dataset, Labels, SparseRow, DEFAULT_BIAS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParseOptions {
    pub multilabel: bool,
    pub bias: f64,
    /// Lower bound on the feature dimension (the maximum index seen wins if larger).
    pub min_dim: usize,
    /// Lower bound on the label count of multilabel data.
    pub min_labels: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { multilabel: false, bias: DEFAULT_BIAS, min_dim: 0, min_labels: 1 }
    }
}

/// Parses LIBSVM-style sparse text with the default bias feature.
///
/// Binary lines start with a label (`+1` or `1` for class 1; `-1`, `0` or
/// `2` for class 2), multilabel lines with a comma-separated label list that
/// may be omitted. `#` starts a comment; blank lines are skipped.
pub fn parse_libsvm(text: &str, multilabel: bool) -> Result<Dataset, DataError> {
    parse_libsvm_with(text, &ParseOptions { multilabel, ..Default::default() })
}

pub fn parse_libsvm_with(text: &str, opts: &ParseOptions) -> Result<Dataset, DataError> {
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut classes = Vec::new();
    let mut sets = Vec::new();
    let mut dim = opts.min_dim;
    let mut max_label = opts.min_labels;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| DataError::Parse { line: line_no, message };
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace().peekable();
        let Some(&first) = tokens.peek() else { continue };

        if opts.multilabel {
            let mut set = Vec::new();
            if !first.contains(':') {
                tokens.next();
                for part in first.split(',') {
                    let k: usize = part.parse().map_err(|_| err(format!("invalid label `{part}`")))?;
                    if k == 0 {
                        return Err(err("labels are 1-based".into()));
                    }
                    if set.contains(&k) {
                        return Err(err(format!("label {k} repeated")));
                    }
                    max_label = max_label.max(k);
                    set.push(k);
                }
            }
            set.sort_unstable();
            sets.push(set);
        } else {
            tokens.next();
            let class = match first.parse::<f64>() {
                Ok(v) if v == 1.0 => 1,
                Ok(v) if v == -1.0 || v == 0.0 || v == 2.0 => 2,
                _ => return Err(err(format!("invalid binary label `{first}`"))),
            };
            classes.push(class);
        }

        let mut row = SparseRow::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("malformed pair `{tok}`")))?;
            let idx: u32 = idx.parse().map_err(|_| err(format!("invalid index `{idx}`")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            let val: f64 = val.parse().map_err(|_| err(format!("non-numeric value `{val}`")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value `{val}`")));
            }
            if let Some(&(prev, _)) = row.last() {
                if idx == prev {
                    return Err(err(format!("duplicate index {idx}")));
                }
                if idx < prev {
                    return Err(err(format!("index {idx} after {prev} is not ascending")));
                }
            }
            dim = dim.max(idx as usize);
            row.push((idx, val));
        }
        rows.push(row);
    }

    let labels = if opts.multilabel {
        Labels::Multilabel { sets, count: max_label }
    } else {
        Labels::Binary(classes)
    };
    Ok(Dataset::new(rows, labels, dim, opts.bias)?)
}

/// Writes `ds` back in the text format, bias feature omitted.
///
/// A multilabel example with no labels and no features has no textual form
/// and is rejected.
pub fn serialize_libsvm(ds: &Dataset) -> Result<String, DataError> {
    let mut out = String::new();
    for (i, row) in ds.rows().iter().enumerate() {
        let mut fields: Vec<String> = Vec::with_capacity(row.len() + 1);
        match ds.labels() {
            Labels::Binary(y) => fields.push(if y[i] == 1 { "+1".into() } else { "-1".into() }),
            Labels::Multilabel { sets, .. } => {
                if sets[i].is_empty() && row.is_empty() {
                    return Err(DataError::InvalidSpec(format!("example {i} has neither labels nor features")));
                }
                if !sets[i].is_empty() {
                    fields.push(sets[i].iter().map(usize::to_string).collect::<Vec<_>>().join(","));
                }
            }
        }
        fields.extend(row.iter().map(|(j, v)| format!("{j}:{v}")));
        writeln!(out, "{}", fields.join(" ")).expect("writing to a String");
    }
    Ok(out)
}
