//! `{"dim": N, "data": [[[re, im], ...], ...], "name": "..."}` documents.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub data: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix, name: Option<&str>) -> Self {
        let n = m.dim();
        let data = (0..n)
            .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self {
            dim: n,
            data,
            name: name.map(str::to_owned),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.dim == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        if self.data.len() != self.dim || self.data.iter().any(|r| r.len() != self.dim) {
            return Err(Error::Parse(format!(
                "data must hold {0} rows of {0} [re, im] pairs",
                self.dim
            )));
        }
        let entries: Vec<Complex64> = self
            .data
            .iter()
            .flatten()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        ComplexMatrix::from_row_major(self.dim, &entries).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix files always serialize")
    }
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    MatrixFile::parse(&text)
        .and_then(|f| f.to_matrix())
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix, name: Option<&str>) -> std::io::Result<()> {
    std::fs::write(path, MatrixFile::from_matrix(m, name).to_json())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_layout() {
        let f =
            MatrixFile::parse(r#"{"dim": 2, "data": [[[0,0],[1,0]],[[0,-1],[0,0]]], "name": "x"}"#)
                .unwrap();
        let m = f.to_matrix().unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(m[(1, 0)], Complex64::new(0.0, -1.0));
        assert_eq!(f.name.as_deref(), Some("x"));
    }

    #[test]
    fn rejects_ragged_and_malformed() {
        assert!(MatrixFile::parse(r#"{"dim": 2, "data": [[[0,0],[1,0]]]}"#)
            .unwrap()
            .to_matrix()
            .is_err());
        assert!(
            MatrixFile::parse(r#"{"dim": 2, "data": [[[0,0]],[[0,0]]]}"#)
                .unwrap()
                .to_matrix()
                .is_err()
        );
        assert!(MatrixFile::parse(r#"{"dim": 1, "data": [[[NaN,0]]]}"#).is_err());
        assert!(MatrixFile::parse(r#"{"dim": 1, "data": [[[1e999,0]]]}"#).is_err());
        assert!(MatrixFile::parse("not json").is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_exact(
            n in 1usize..5,
            seed in proptest::collection::vec(-1e6f64..1e6, 50),
        ) {
            let entries: Vec<Complex64> = (0..n * n)
                .map(|i| Complex64::new(seed[2 * i % 50] / 3.0, seed[(2 * i + 1) % 50] * 1e-7))
                .collect();
            let m = ComplexMatrix::from_row_major(n, &entries).unwrap();
            let text = MatrixFile::from_matrix(&m, Some("p")).to_json();
            let back = MatrixFile::parse(&text).unwrap().to_matrix().unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
