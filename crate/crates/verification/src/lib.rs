//! Independent oracles shared by the acceptance run.

use nalgebra::DMatrix;

/// Textbook triple loop, no BLAS.
pub fn naive_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let mut c = DMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s = 0.0;
            for k in 0..a.ncols() {
                s += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = s;
        }
    }
    c
}

/// Records of a result CSV with every `*_s` column dropped; `#` lines skipped.
pub fn strip_timing(text: &str) -> csv::Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    let keep: Vec<usize> = (0..header.len()).filter(|&i| !header[i].ends_with("_s")).collect();
    let mut out = vec![keep.iter().map(|&i| header[i].to_string()).collect()];
    for record in reader.records() {
        let record = record?;
        out.push(keep.iter().map(|&i| record[i].to_string()).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_loop_small_case() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(naive_product(&a, &b), DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 4.0, 3.0]));
    }

    #[test]
    fn timing_columns_dropped() {
        let rows = strip_timing("# v1\na,build_s,b\n1,0.5,\"x,y\"\n").unwrap();
        assert_eq!(rows, vec![vec!["a", "b"], vec!["1", "x,y"]]);
    }
}
