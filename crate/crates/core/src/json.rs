//! Matrix and vector JSON: a matrix is an array of rows, each entry a
//! `[re, im]` pair of doubles. A vector is a flat array of such pairs.
//! A bare number is accepted as a real entry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

fn pair(z: &Complex64) -> Entry {
    Entry::Pair([z.re, z.im])
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<Entry>> = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let cols = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
        return Err(Error::Json(format!("ragged rows: {} and {} entries", cols, bad.len())));
    }
    if cols != n {
        return Err(Error::NonSquare { rows: n, cols });
    }
    let m = CMatrix::from_fn(n, n, |i, j| rows[i][j].into());
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Json("non-finite entry".into()));
    }
    Ok(m)
}

pub fn parse_vector(text: &str) -> Result<CVector> {
    let entries: Vec<Entry> = serde_json::from_str(text).map_err(|e| Error::Json(e.to_string()))?;
    if entries.is_empty() {
        return Err(Error::Empty);
    }
    Ok(CVector::from_iterator(entries.len(), entries.into_iter().map(Complex64::from)))
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    let rows: Vec<Vec<Entry>> = m.row_iter().map(|r| r.iter().map(pair).collect()).collect();
    serde_json::to_string(&rows).expect("finite doubles serialize")
}

pub fn vector_to_json(v: &CVector) -> String {
    let entries: Vec<Entry> = v.iter().map(pair).collect();
    serde_json::to_string(&entries).expect("finite doubles serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let m = parse_matrix("[[[0,0],[1,0]],[[1,0],[0,0]]]").unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(parse_matrix(&matrix_to_json(&m)).unwrap(), m);
        let y = parse_matrix("[[0, [0,-1]], [[0,1], 0]]").unwrap();
        assert_eq!(y[(1, 0)], Complex64::new(0.0, 1.0));
        let v = parse_vector("[[0.6,0],[0,0.8]]").unwrap();
        assert_eq!(parse_vector(&vector_to_json(&v)).unwrap(), v);
        let third = CMatrix::from_element(1, 1, Complex64::new(1.0 / 3.0, -0.1));
        assert_eq!(parse_matrix(&matrix_to_json(&third)).unwrap(), third);
    }

    #[test]
    fn rejects_malformed() {
        assert!(matches!(parse_matrix("[]"), Err(Error::Empty)));
        assert!(matches!(parse_matrix("[[1,2]]"), Err(Error::NonSquare { .. })));
        assert!(matches!(parse_matrix("[[1,2],[3]]"), Err(Error::Json(_))));
        assert!(matches!(parse_matrix("[[[1,2,3]]]"), Err(Error::Json(_))));
        assert!(matches!(parse_matrix("not json"), Err(Error::Json(_))));
        assert!(matches!(parse_vector("[]"), Err(Error::Empty)));
    }
}
