//! MatrixMarket exchange format: sparse matrices in `coordinate real general`
//! form and vectors in `array real general` form, 1-indexed, values written
//! with 17 significant digits.

use std::io::{self, Write};

use meshgrad_core::BlockSparseMatrix;

use crate::ParseError;

/// Writes every stored scalar of `h`, including explicit zeros inside the
/// block pattern.
pub fn write_matrix_market<W: Write, const N: usize>(mut w: W, h: &BlockSparseMatrix<N>) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", h.dim(), h.dim(), h.nnz())?;
    for (r, c, v) in h.triplets() {
        writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn write_vector_market<W: Write>(mut w: W, v: &[f64]) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

/// A parsed MatrixMarket file as 0-based triplets. Array files become dense
/// column-major triplets.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixMarket {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl MatrixMarket {
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for &(r, c, v) in &self.entries {
            d[r * self.cols + c] += v;
        }
        d
    }
}

/// Reads `coordinate` (general or symmetric) and `array` real files.
pub fn parse_matrix_market(text: &str) -> Result<MatrixMarket, ParseError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| ParseError::new(1, "empty file"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(ParseError::new(1, "missing %%MatrixMarket matrix header"));
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(ParseError::new(1, format!("unsupported format {other}"))),
    };
    if fields[3] != "real" && fields[3] != "double" && fields[3] != "integer" {
        return Err(ParseError::new(1, format!("unsupported field {}", fields[3])));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(ParseError::new(1, format!("unsupported symmetry {other}"))),
    };

    let mut body = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let (size_line, size) = body.next().ok_or_else(|| ParseError::new(1, "missing size line"))?;
    let dims = numbers::<usize>(size, size_line)?;
    let expected_len = if coordinate { 3 } else { 2 };
    if dims.len() != expected_len {
        return Err(ParseError::new(size_line, format!("size line needs {expected_len} integers")));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let count = if coordinate { dims[2] } else { rows * cols };

    let mut entries = Vec::with_capacity(count);
    for k in 0..count {
        let (line, text) =
            body.next().ok_or_else(|| ParseError::new(size_line, format!("expected {count} entries, found {k}")))?;
        if coordinate {
            let t: Vec<&str> = text.split_whitespace().collect();
            if t.len() != 3 {
                return Err(ParseError::new(line, "entry needs row, column and value"));
            }
            let r: usize = t[0].parse().map_err(|_| ParseError::new(line, format!("bad row {:?}", t[0])))?;
            let c: usize = t[1].parse().map_err(|_| ParseError::new(line, format!("bad column {:?}", t[1])))?;
            let v: f64 = t[2].parse().map_err(|_| ParseError::new(line, format!("bad value {:?}", t[2])))?;
            if r == 0 || c == 0 || r > rows || c > cols {
                return Err(ParseError::new(line, format!("entry ({r}, {c}) outside {rows} x {cols}")));
            }
            entries.push((r - 1, c - 1, v));
            if symmetric && r != c {
                entries.push((c - 1, r - 1, v));
            }
        } else {
            let v = numbers::<f64>(text, line)?;
            if v.len() != 1 {
                return Err(ParseError::new(line, "array entry needs one value"));
            }
            entries.push((k % rows, k / rows, v[0]));
        }
    }
    if let Some((line, _)) = body.next() {
        return Err(ParseError::new(line, format!("more than {count} entries")));
    }
    Ok(MatrixMarket { rows, cols, entries })
}

fn numbers<T: std::str::FromStr>(text: &str, line: usize) -> Result<Vec<T>, ParseError> {
    text.split_whitespace().map(|t| t.parse().map_err(|_| ParseError::new(line, format!("bad number {t:?}")))).collect()
}
