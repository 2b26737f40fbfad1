//! Matrix and label-vector files.
//!
//! * Dense CSV: one matrix row per line, comma-separated decimals.
//! * Matrix Market `array real general`: column-major values after the size line.
//! * Labels: one 1-based integer per line.
//!
//! Readers reject NaN and infinite values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{DenseMatrix, Error, Result};

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite value {tok:?}") });
    }
    Ok(v)
}

pub fn parse_csv_matrix(text: &str) -> Result<DenseMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|tok| parse_value(tok, idx + 1))
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    DenseMatrix::from_rows(&rows)
}

/// Values are written with `{:e}`-free shortest round-trip formatting.
pub fn format_csv_matrix(a: &DenseMatrix) -> String {
    let mut out = String::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{}", a[(i, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(Error::Parse { line: 1, msg: "missing %%MatrixMarket matrix header".into() });
    }
    if fields[2] != "array" || fields[3] != "real" || fields[4] != "general" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("only 'array real general' is supported, got '{} {} {}'", fields[2], fields[3], fields[4]),
        });
    }
    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_idx, size_line) = body.next().ok_or(Error::Parse { line: 2, msg: "missing size line".into() })?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse { line: size_idx + 1, msg: "bad size line".into() })?;
    if dims.len() != 2 {
        return Err(Error::Parse { line: size_idx + 1, msg: "size line needs 'rows cols'".into() });
    }
    let (rows, cols) = (dims[0], dims[1]);
    let mut values = Vec::with_capacity(rows * cols);
    for (idx, line) in body {
        for tok in line.split_whitespace() {
            values.push(parse_value(tok, idx + 1)?);
        }
    }
    if values.len() != rows * cols {
        return Err(Error::Parse {
            line: size_idx + 1,
            msg: format!("expected {} values, found {}", rows * cols, values.len()),
        });
    }
    DenseMatrix::from_fn(rows, cols, |i, j| values[j * rows + i])
}

pub fn format_matrix_market(a: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    writeln!(out, "{} {}", a.rows(), a.cols()).unwrap();
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            writeln!(out, "{}", a[(i, j)]).unwrap();
        }
    }
    out
}

/// Reads a matrix, choosing the format from the file contents.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path)?;
    if text.trim_start().starts_with("%%MatrixMarket") {
        parse_matrix_market(&text)
    } else {
        parse_csv_matrix(&text)
    }
}

/// Writes Matrix Market for `.mtx` paths, CSV otherwise.
pub fn write_matrix(path: impl AsRef<Path>, a: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let text = if path.extension().is_some_and(|e| e == "mtx") {
        format_matrix_market(a)
    } else {
        format_csv_matrix(a)
    };
    fs::write(path, text)?;
    Ok(())
}

/// Parses 1-based labels into 0-based indices.
pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| match l.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(Error::Parse { line: idx + 1, msg: format!("bad label {l:?} (labels are 1-based)") }),
        })
        .collect()
}

/// Formats 0-based labels as 1-based lines.
pub fn format_labels(labels: &[usize]) -> String {
    let mut out = String::new();
    for l in labels {
        writeln!(out, "{}", l + 1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let a = DenseMatrix::from_row_major(2, 3, &[1.5, -2.0, 0.1, 3.0, 1e-20, 7.0]).unwrap();
        let back = parse_csv_matrix(&format_csv_matrix(&a)).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(parse_csv_matrix("1,2\n3,NaN\n").is_err());
        assert!(parse_csv_matrix("1,inf\n").is_err());
        assert!(matches!(parse_csv_matrix("1,2\n3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn matrix_market_round_trip_and_layout() {
        let text = "%%MatrixMarket matrix array real general\n% comment\n2 2\n1\n3\n2\n4\n";
        let a = parse_matrix_market(text).unwrap();
        assert_eq!(a.to_row_major(), vec![1., 2., 3., 4.]);
        assert_eq!(parse_matrix_market(&format_matrix_market(&a)).unwrap(), a);
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n1 1\nnan\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 2\n").is_err());
        assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n1\n").is_err());
    }

    #[test]
    fn labels_are_one_based_on_disk() {
        assert_eq!(parse_labels("1\n2\n2\n").unwrap(), vec![0, 1, 1]);
        assert_eq!(format_labels(&[0, 2]), "1\n3\n");
        assert!(parse_labels("0\n").is_err());
    }
}
