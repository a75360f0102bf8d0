//! JSON encodings for complex scalars, matrices and generator specs.
//!
//! Complex numbers are `{"re": .., "im": ..}` objects; a bare number is
//! accepted on input as a real value. Matrices are row-major nested arrays.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linop::{c, ComplexMatrix, C64};

/// Embedded in every report emitted by the crate.
pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonComplex {
    Parts { re: f64, #[serde(default)] im: f64 },
    Real(f64),
}

impl JsonComplex {
    pub fn value(self) -> C64 {
        match self {
            JsonComplex::Parts { re, im } => c(re, im),
            JsonComplex::Real(re) => c(re, 0.0),
        }
    }
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        JsonComplex::Parts { re: z.re, im: z.im }
    }
}

/// Row-major nested array form of a matrix.
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: C64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

pub fn matrix_from_rows(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    for r in rows {
        for z in r {
            let v = z.value();
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidInput("non-finite matrix entry".into()));
            }
        }
    }
    Ok(ComplexMatrix::from_fn(n, m, |i, j| rows[i][j].value()))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> Value {
    serde_json::to_value(matrix_to_rows(m)).expect("matrix serializes")
}

pub fn matrix_from_json(v: &Value) -> Result<ComplexMatrix> {
    let rows: JsonMatrix = serde_json::from_value(v.clone())?;
    matrix_from_rows(&rows)
}

/// On-disk generator format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub dim: usize,
    pub hamiltonian: JsonMatrix,
    #[serde(default)]
    pub transfer_ops: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// On-disk perturbation format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub base: GeneratorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<JsonMatrix>,
    #[serde(default)]
    pub k_ops: Vec<JsonMatrix>,
}
