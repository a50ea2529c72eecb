use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// How the leading label of each line is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelPolicy {
    /// Map `{0, 1}` or `{−1, +1}` to `{−1, +1}`; anything else is an error.
    #[default]
    Binary,
    /// Keep labels as real-valued regression targets.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LibsvmOptions {
    pub labels: LabelPolicy,
    /// Column count; defaults to the largest index seen.
    pub n_features: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LibsvmData {
    /// CSR design matrix.
    pub a: Matrix,
    pub labels: Vector,
}

pub fn read_libsvm(path: impl AsRef<Path>, opts: &LibsvmOptions) -> Result<LibsvmData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text, opts)
}

/// Parses `label idx:val idx:val ...` lines with 1-based, strictly
/// increasing indices. Blank lines and `#` comments are skipped.
pub fn parse_libsvm(text: &str, opts: &LibsvmOptions) -> Result<LibsvmData> {
    let mut labels = Vec::new();
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    let mut max_index = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("non-finite label {label_tok:?}")));
        }
        let mut prev = 0;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| err(format!("bad feature index {idx:?}")))?;
            if idx == 0 {
                return Err(err("feature indices are 1-based".into()));
            }
            if idx <= prev {
                return Err(err(format!("feature index {idx} does not increase after {prev}")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| err(format!("bad feature value {val:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value at index {idx}")));
            }
            prev = idx;
            indices.push(idx - 1);
            values.push(val);
        }
        max_index = max_index.max(prev);
        labels.push(label);
        indptr.push(indices.len());
    }

    if labels.is_empty() {
        return Err(Error::Parse { line: 0, message: "no data lines".into() });
    }
    let ncols = match opts.n_features {
        Some(d) if d < max_index => {
            return Err(Error::Parse {
                line: 0,
                message: format!("feature index {max_index} exceeds n_features = {d}"),
            })
        }
        Some(d) => d,
        None => max_index,
    };
    if ncols == 0 {
        return Err(Error::Parse { line: 0, message: "no features".into() });
    }
    if opts.labels == LabelPolicy::Binary {
        map_binary_labels(&mut labels)?;
    }
    let a = Matrix::csr(labels.len(), ncols, indptr, indices, values)?;
    Ok(LibsvmData { a, labels: Vector::new(labels)? })
}

fn map_binary_labels(labels: &mut [f64]) -> Result<()> {
    let distinct: BTreeSet<u64> = labels.iter().map(|v| v.to_bits()).collect();
    let distinct: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
    let within = |set: &[f64]| distinct.iter().all(|v| set.contains(v));
    if within(&[-1.0, 1.0]) {
        return Ok(());
    }
    if within(&[0.0, 1.0]) {
        labels.iter_mut().for_each(|v| *v = if *v == 0.0 { -1.0 } else { 1.0 });
        return Ok(());
    }
    let mut shown: Vec<f64> = distinct;
    shown.sort_by(f64::total_cmp);
    shown.dedup();
    let list: Vec<String> = shown.iter().take(10).map(|v| v.to_string()).collect();
    Err(Error::Config(format!(
        "labels must be {{0, 1}} or {{-1, +1}}; found {}{}",
        list.join(", "),
        if shown.len() > 10 { ", ..." } else { "" }
    )))
}

/// Writes one line per row. CSR input keeps its stored entries (explicit
/// zeros included); dense input writes its nonzeros.
pub fn write_libsvm(a: &Matrix, labels: &[f64]) -> Result<String> {
    crate::error::check_dim(a.nrows(), labels.len())?;
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        write!(out, "{label}").expect("write to String");
        for (j, v) in a.row(i).entries() {
            if a.is_dense() && v == 0.0 {
                continue;
            }
            write!(out, " {}:{v}", j + 1).expect("write to String");
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw() -> LibsvmOptions {
        LibsvmOptions { labels: LabelPolicy::Raw, n_features: None }
    }

    #[test]
    fn single_row() {
        let d = parse_libsvm("1 1:0.5 3:2.0\n", &LibsvmOptions::default()).unwrap();
        assert_eq!((d.a.nrows(), d.a.ncols()), (1, 3));
        assert_eq!([d.a.get(0, 0), d.a.get(0, 1), d.a.get(0, 2)], [0.5, 0.0, 2.0]);
        assert_eq!(d.labels.as_slice(), &[1.0]);
    }

    #[test]
    fn zero_one_labels() {
        let d = parse_libsvm("0 2:1\n1 1:1\n", &LibsvmOptions::default()).unwrap();
        assert_eq!(d.labels.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn plus_sign_labels() {
        let d = parse_libsvm("+1 1:1\n-1 2:1\n", &LibsvmOptions::default()).unwrap();
        assert_eq!(d.labels.as_slice(), &[1.0, -1.0]);
    }

    #[test]
    fn bad_label_set_lists_values() {
        let e = parse_libsvm("2 1:1\n3 1:1\n2 1:1\n", &LibsvmOptions::default()).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains('2') && msg.contains('3'), "{msg}");
    }

    #[test]
    fn raw_labels_kept() {
        let d = parse_libsvm("2.5 1:1\n-0.25 1:1\n", &raw()).unwrap();
        assert_eq!(d.labels.as_slice(), &[2.5, -0.25]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("1 1:1\n1 2:x\n", 2),
            ("1 1:1\n\n1 3:1 2:1\n", 3),
            ("1 0:1\n", 1),
            ("abc 1:1\n", 1),
            ("1 1:1\n1 2\n", 2),
            ("1 1:1 1:2\n", 1),
        ];
        for (text, line) in cases {
            match parse_libsvm(text, &raw()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let d = parse_libsvm("# header\n1 1:1 # trailing\n\n-1 2:3\n", &LibsvmOptions::default()).unwrap();
        assert_eq!(d.a.nrows(), 2);
        assert_eq!(d.a.get(1, 1), 3.0);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(parse_libsvm("", &raw()).is_err());
        assert!(parse_libsvm("# nothing\n", &raw()).is_err());
    }

    #[test]
    fn forced_width() {
        let opts = LibsvmOptions { n_features: Some(5), ..raw() };
        assert_eq!(parse_libsvm("1 2:1\n", &opts).unwrap().a.ncols(), 5);
        let opts = LibsvmOptions { n_features: Some(1), ..raw() };
        assert!(parse_libsvm("1 2:1\n", &opts).is_err());
    }

    #[test]
    fn round_trip() {
        let a = Matrix::csr(3, 4, vec![0, 2, 2, 4], vec![0, 3, 1, 3], vec![1.5, -2e-7, 0.1, 3.0]).unwrap();
        let text = write_libsvm(&a, &[1.0, -1.0, 0.5]).unwrap();
        let d = parse_libsvm(&text, &raw()).unwrap();
        assert_eq!(d.a.csr_parts(), a.csr_parts());
        assert_eq!(d.labels.as_slice(), &[1.0, -1.0, 0.5]);
    }
}
