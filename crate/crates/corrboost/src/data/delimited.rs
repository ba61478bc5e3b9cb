//! Delimited-text loader for numeric tables with one label column (the UCI
//! sets). The label column is 1-based. Integer labels map to classes by
//! sorted distinct value (so 0-based label files shift up by one); textual
//! class tokens map in first-appearance order. A frozen label map from a
//! train load can be supplied so test files reject unseen tokens.

use std::collections::BTreeSet;
use std::path::Path;

use crate::data::{Dataset, Matrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DelimitedOptions {
    pub delimiter: char,
    /// 1-based column index of the label.
    pub label_column: usize,
    pub has_header: bool,
    /// Frozen class-token list from a previous train load; token → class is
    /// position + 1. When present, unseen tokens are an error.
    pub label_map: Option<Vec<String>>,
}

impl Default for DelimitedOptions {
    fn default() -> Self {
        DelimitedOptions {
            delimiter: ',',
            label_column: 0,
            has_header: false,
            label_map: None,
        }
    }
}

pub fn load_delimited(path: &Path, options: &DelimitedOptions) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut feature_rows: Vec<Vec<f64>> = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut width: Option<usize> = None;

    let mut lines = text.lines().enumerate();
    if options.has_header {
        lines.next();
    }
    for (line_idx, line) in lines {
        let line_no = line_idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(options.delimiter).map(str::trim).collect();
        let w = *width.get_or_insert(cells.len());
        if cells.len() != w {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                detail: format!("ragged row: {} cells, expected {w}", cells.len()),
            });
        }
        if options.label_column == 0 || options.label_column > w {
            return Err(Error::InvalidConfig(format!(
                "label column {} outside 1..={w}",
                options.label_column
            )));
        }
        let mut features = Vec::with_capacity(w - 1);
        for (col, cell) in cells.iter().enumerate() {
            if col + 1 == options.label_column {
                tokens.push((*cell).to_string());
            } else {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    detail: format!("non-numeric feature cell {:?} in column {}", cell, col + 1),
                })?;
                features.push(v);
            }
        }
        feature_rows.push(features);
    }

    if feature_rows.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            detail: "no data rows".into(),
        });
    }

    let label_names = match &options.label_map {
        Some(names) => names.clone(),
        None => infer_label_names(&tokens),
    };
    let mut y = Vec::with_capacity(tokens.len());
    for (i, token) in tokens.iter().enumerate() {
        match label_names.iter().position(|n| n == token) {
            Some(pos) => y.push(pos as u32 + 1),
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1 + usize::from(options.has_header),
                    detail: format!("label token {token:?} not in the fixed label map"),
                })
            }
        }
    }

    let k = label_names.len();
    Dataset::new(Matrix::from_rows(&feature_rows)?, y, k, None, label_names)
}

fn infer_label_names(tokens: &[String]) -> Vec<String> {
    let as_ints: Option<BTreeSet<i64>> = tokens.iter().map(|t| t.parse().ok()).collect();
    match as_ints {
        Some(values) => values.into_iter().map(|v| v.to_string()).collect(),
        None => {
            let mut names: Vec<String> = Vec::new();
            for t in tokens {
                if !names.iter().any(|n| n == t) {
                    names.push(t.clone());
                }
            }
            names
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, contents).unwrap();
        path
    }

    #[test]
    fn toy_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "toy.csv", "1,2,A\n3,4,B\n");
        let ds = load_delimited(
            &path,
            &DelimitedOptions {
                label_column: 3,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (2, 2, 2));
        assert_eq!(ds.labels(), &[1, 2]);
        assert_eq!(ds.matrix().row(1), &[3.0, 4.0]);
    }

    #[test]
    fn integer_labels_map_by_sorted_value() {
        let dir = tempfile::tempdir().unwrap();
        // First appearance order is 2, 0, 1 but classes follow sorted values.
        let path = write(dir.path(), "ints.csv", "9,2\n8,0\n7,1\n");
        let ds = load_delimited(
            &path,
            &DelimitedOptions {
                label_column: 2,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(ds.labels(), &[3, 1, 2]);
        assert_eq!(ds.label_names(), &["0", "1", "2"]);
    }

    #[test]
    fn ragged_row_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "ragged.csv", "1,2,A\n3,B\n");
        let err = load_delimited(
            &path,
            &DelimitedOptions {
                label_column: 3,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn non_numeric_cell_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "bad.csv", "1,x,A\n");
        assert!(matches!(
            load_delimited(
                &path,
                &DelimitedOptions {
                    label_column: 3,
                    ..Default::default()
                }
            ),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn unseen_token_against_fixed_map_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "test.csv", "1,2,C\n");
        let err = load_delimited(
            &path,
            &DelimitedOptions {
                label_column: 3,
                label_map: Some(vec!["A".into(), "B".into()]),
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn header_skip_and_other_delimiter() {
        let dir = tempfile::tempdir().unwrap();
        let path = write(dir.path(), "head.tsv", "f1\tf2\tlabel\n1\t2\tA\n");
        let ds = load_delimited(
            &path,
            &DelimitedOptions {
                delimiter: '\t',
                label_column: 3,
                has_header: true,
                label_map: None,
            },
        )
        .unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (1, 2, 1));
    }
}

#[cfg(test)]
mod uci_format_tests {
    use super::*;

    #[test]
    fn pendigits_style_rows() {
        // 16 integer features then the digit, comma separated with the
        // leading spaces some mirrors carry.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pendigits.tra");
        std::fs::write(
            &path,
            " 47,100, 27, 81, 57, 37, 26,  0,  0, 23, 56, 53,100, 90, 40, 98, 8\n\
              0, 89, 27,100, 42, 75, 29, 45, 15, 15, 37,  0, 69,  2,100,  6, 2\n\
              0, 57, 31, 68, 72, 90,100,100, 76, 75, 50, 51, 28, 25, 16,  0, 1\n",
        )
        .unwrap();
        let ds = load_delimited(
            &path,
            &DelimitedOptions {
                delimiter: ',',
                label_column: 17,
                has_header: false,
                label_map: None,
            },
        )
        .unwrap();
        assert_eq!((ds.n(), ds.d()), (3, 16));
        assert_eq!(ds.label_names(), &["1", "2", "8"]);
        assert_eq!(ds.labels(), &[3, 2, 1]);
        assert_eq!(ds.matrix().get(0, 0), 47.0);
    }

    #[test]
    fn letter_style_rows() {
        // Letter token first, 16 integer features after.
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("letter-recognition.data");
        std::fs::write(
            &path,
            "T,2,8,3,5,1,8,13,0,6,6,10,8,0,8,0,8\n\
             I,5,12,3,7,2,10,5,5,4,13,3,9,2,8,4,10\n\
             T,4,11,6,8,6,10,6,2,6,10,3,7,3,7,3,9\n",
        )
        .unwrap();
        let ds = load_delimited(
            &path,
            &DelimitedOptions {
                delimiter: ',',
                label_column: 1,
                has_header: false,
                label_map: None,
            },
        )
        .unwrap();
        assert_eq!((ds.n(), ds.d(), ds.k()), (3, 16, 2));
        // Tokens are not integers, so first-appearance order applies.
        assert_eq!(ds.label_names(), &["T", "I"]);
        assert_eq!(ds.labels(), &[1, 2, 1]);
    }
}
