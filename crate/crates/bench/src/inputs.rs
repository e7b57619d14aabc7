//! Matrix and vector inputs read from CSV or JSON files.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{BenchError, Result};

fn bad(path: &Path, msg: impl std::fmt::Display) -> BenchError {
    BenchError::Usage(format!("{}: {msg}", path.display()))
}

fn parse_csv(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(path, e))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|cell| cell.parse::<f64>().map_err(|e| bad(path, format!("{cell:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Rows of numbers; JSON accepts an array of arrays or a flat array (one row).
pub fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let rows = if is_json {
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(path, e))?;
        match value {
            serde_json::Value::Array(items) if items.iter().all(|v| v.is_number()) => {
                vec![serde_json::from_value(serde_json::Value::Array(items)).map_err(|e| bad(path, e))?]
            }
            other => serde_json::from_value(other).map_err(|e| bad(path, e))?,
        }
    } else {
        parse_csv(path, &text)?
    };
    if rows.is_empty() {
        return Err(bad(path, "no data"));
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = read_rows(path)?;
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(bad(path, "rows have different lengths"));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// A single row, or a single column written one value per line.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let rows = read_rows(path)?;
    if rows.len() == 1 {
        return Ok(rows.into_iter().next().unwrap_or_default());
    }
    if rows.iter().all(|r| r.len() == 1) {
        return Ok(rows.into_iter().map(|r| r[0]).collect());
    }
    Err(bad(path, "expected a single row or column"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(name: &str, text: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("qkmm-inputs-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn csv_with_comments() {
        let p = write("m.csv", "# A\n1, 0\n0, 1\n");
        assert_eq!(read_matrix(&p).unwrap(), DMatrix::identity(2, 2));
    }

    #[test]
    fn json_forms() {
        let p = write("m.json", "[[0.6, 0.8], [1, 0]]");
        assert_eq!(read_matrix(&p).unwrap()[(0, 1)], 0.8);
        let v = write("v.json", "[0.6, 0.8]");
        assert_eq!(read_vector(&v).unwrap(), vec![0.6, 0.8]);
        let col = write("c.csv", "0.6\n0.8\n");
        assert_eq!(read_vector(&col).unwrap(), vec![0.6, 0.8]);
    }

    #[test]
    fn ragged_rows_rejected() {
        let p = write("r.csv", "1,0\n1\n");
        assert!(read_matrix(&p).is_err());
    }
}
