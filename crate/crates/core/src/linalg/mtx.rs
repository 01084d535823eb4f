//! Matrix Market I/O.
//!
//! Writes the dense `array real general` layout (column-major values). Reads
//! that layout plus `coordinate real|integer general|symmetric`. Vectors are
//! single-column matrices.

use std::fmt::Write as _;
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))?
        .to_ascii_lowercase();
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad banner line: {header:?}")));
    }
    let (format, field, symmetry) = (tokens[2], tokens[3], tokens[4]);
    if field != "real" && field != "integer" && field != "double" {
        return Err(Error::Parse(format!("unsupported field {field:?}")));
    }
    let symmetric = match symmetry {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry {other:?}"))),
    };

    let mut body = lines
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('%'));
    let size_line = body
        .next()
        .ok_or_else(|| Error::Parse("missing size line".into()))?;
    let sizes = parse_numbers::<usize>(size_line)?;

    match format {
        "array" => {
            let [rows, cols] = sizes[..] else {
                return Err(Error::Parse(format!("array size line needs 2 ints: {size_line:?}")));
            };
            let mut values = Vec::with_capacity(rows * cols);
            for line in body {
                values.extend(parse_numbers::<f64>(line)?);
            }
            let mut m = DenseMatrix::zeros(rows, cols);
            if symmetric {
                if rows != cols {
                    return Err(Error::Parse("symmetric array must be square".into()));
                }
                let expected = rows * (rows + 1) / 2;
                if values.len() != expected {
                    return Err(Error::Parse(format!(
                        "expected {expected} values, found {}",
                        values.len()
                    )));
                }
                let mut it = values.into_iter();
                for j in 0..cols {
                    for i in j..rows {
                        let v = it.next().unwrap_or(0.0);
                        m.set(i, j, v);
                        m.set(j, i, v);
                    }
                }
            } else {
                if values.len() != rows * cols {
                    return Err(Error::Parse(format!(
                        "expected {} values, found {}",
                        rows * cols,
                        values.len()
                    )));
                }
                for (k, v) in values.into_iter().enumerate() {
                    m.set(k % rows, k / rows, v);
                }
            }
            finish(m)
        }
        "coordinate" => {
            let [rows, cols, nnz] = sizes[..] else {
                return Err(Error::Parse(format!("coordinate size line needs 3 ints: {size_line:?}")));
            };
            let mut m = DenseMatrix::zeros(rows, cols);
            let mut count = 0;
            for line in body {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("bad coordinate entry {line:?}")));
                }
                let i: usize = parse_one(parts[0])?;
                let j: usize = parse_one(parts[1])?;
                let v: f64 = parse_one(parts[2])?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(Error::Parse(format!("entry ({i}, {j}) out of range")));
                }
                m.set(i - 1, j - 1, v);
                if symmetric {
                    m.set(j - 1, i - 1, v);
                }
                count += 1;
            }
            if count != nnz {
                return Err(Error::Parse(format!("expected {nnz} entries, found {count}")));
            }
            finish(m)
        }
        other => Err(Error::Parse(format!("unsupported format {other:?}"))),
    }
}

fn finish(m: DenseMatrix) -> Result<DenseMatrix> {
    let (rows, cols) = m.shape();
    DenseMatrix::new(rows, cols, m.into_vec())
}

fn parse_one<T: std::str::FromStr>(token: &str) -> Result<T> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse {token:?}")))
}

fn parse_numbers<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace().map(parse_one).collect()
}

/// Formats `m` as `array real general`, one value per line in column-major order.
///
/// Values use the shortest representation that round-trips exactly.
pub fn format_matrix(m: &DenseMatrix, comment: Option<&str>) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "% {line}");
        }
    }
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{:?}", m.get(i, j));
        }
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix, comment: Option<&str>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_matrix(m, comment)).map_err(|e| Error::io(path, e))
}

/// Reads a single-column matrix as a vector.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(Error::Parse(format!(
            "expected a single-column matrix, found {} columns",
            m.cols()
        )));
    }
    Ok(m.into_vec())
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64], comment: Option<&str>) -> Result<()> {
    let m = DenseMatrix::new(v.len(), 1, v.to_vec())?;
    write_matrix(path, &m, comment)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn array_round_trip_is_exact() {
        let m = DenseMatrix::from_rows(&[&[1.0, -2.5e-17, 0.1], &[3.0, 4.0, 1.0 / 3.0]]).unwrap();
        let text = format_matrix(&m, Some("demo"));
        let back = parse_matrix(&text).unwrap();
        assert_eq!(back.shape(), (2, 3));
        assert_eq!(back.as_slice(), m.as_slice());
        assert_eq!(format_matrix(&back, Some("demo")), text);
    }

    #[test]
    fn array_is_column_major() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn coordinate_and_symmetric() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% c\n3 3 2\n1 1 5\n3 1 -1\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(m.get(0, 0), 5.0);
        assert_eq!(m.get(2, 0), -1.0);
        assert_eq!(m.get(0, 2), -1.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array complex general\n1 1\n1\n").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n").is_err());
        assert!(parse_matrix("%%MatrixMarket matrix array real general\n1 1\nnan\n").is_err());
    }

    #[test]
    fn vector_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.mtx");
        write_vector(&p, &[1.5, -2.0, 0.0], None).unwrap();
        assert_eq!(read_vector(&p).unwrap(), vec![1.5, -2.0, 0.0]);
    }
}
