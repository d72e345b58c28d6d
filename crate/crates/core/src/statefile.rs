//! JSON state files: `{"dims": [..], "matrix": {"re": [[..]], "im": [[..]]}}`.
//!
//! Matrices are row-major 2-D arrays of real and imaginary parts. Reading
//! validates the state invariants; writing followed by reading reproduces
//! the matrix bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix, DensityMatrix, SystemLayout, Tolerances};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub matrix: SplitMatrix,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let n = m.nrows();
        let part = |f: fn(&crate::linalg::C64) -> f64| {
            (0..n).map(|i| (0..n).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        StateFile {
            dims: rho.layout().dims().to_vec(),
            matrix: SplitMatrix {
                re: part(|z| z.re),
                im: part(|z| z.im),
            },
        }
    }

    /// Raw complex matrix after shape checks only.
    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.matrix.re.len();
        if self.matrix.im.len() != n {
            return Err(Error::Layout(format!(
                "re has {n} rows but im has {}",
                self.matrix.im.len()
            )));
        }
        for (name, part) in [("re", &self.matrix.re), ("im", &self.matrix.im)] {
            if let Some(row) = part.iter().find(|r| r.len() != n) {
                return Err(Error::Layout(format!(
                    "{name} has a row of length {} in a {n}-row matrix",
                    row.len()
                )));
            }
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, j| c(self.matrix.re[i][j], self.matrix.im[i][j])))
    }

    pub fn to_state(&self, tol: Tolerances) -> Result<DensityMatrix> {
        let layout = SystemLayout::new(self.dims.clone())?;
        DensityMatrix::with_tolerances(layout, self.to_matrix()?, tol)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Layout(format!("malformed state file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state files serialize")
    }
}

/// Parses and validates a state file.
pub fn read_state(text: &str, tol: Tolerances) -> Result<DensityMatrix> {
    StateFile::from_json(text)?.to_state(tol)
}

pub fn write_state(rho: &DensityMatrix) -> String {
    StateFile::from_state(rho).to_json()
}
