//! Algebra file format.
//!
//! An algebra file is a JSON document:
//!
//! ```text
//! {
//!   "dim": 2,
//!   "cubic": [{"i": 1, "j": 1, "k": 1, "value": 2.0}, ...],
//!   "gram": [1.0, 0.0, 0.0, 1.0]
//! }
//! ```
//!
//! `cubic` lists trilinear values `T[i][j][k]` with 1-based `i <= j <= k`;
//! missing entries are zero. Instead of `cubic` a file may give `product`,
//! a list of `{k, i, j, value}` structure constants `P[k][i][j]` taken
//! verbatim (both orders must be listed for a commutative product).
//! Exactly one of the two is required. `gram` is the row-major Gram matrix
//! and defaults to the identity.
//!
//! [`AlgebraDocument::to_text`] writes a canonical form: fixed key order,
//! nonzero entries only, every real with 17 significant digits. Parsing
//! canonical text and writing it again reproduces it byte for byte.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::algebra::{
    algebra_from_cubic, canonical_triples, BilinearForm, CubicForm, MetrisedAlgebra, Vector,
};
use crate::error::AlgebraError;

/// Largest dimension accepted from a file.
pub const MAX_DIM: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("invalid algebra file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    dim: usize,
    #[serde(default)]
    cubic: Option<Vec<RawCubic>>,
    #[serde(default)]
    product: Option<Vec<RawProduct>>,
    #[serde(default)]
    gram: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCubic {
    i: usize,
    j: usize,
    k: usize,
    value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProduct {
    k: usize,
    i: usize,
    j: usize,
    value: f64,
}

/// How the multiplication was specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Definition {
    Cubic(CubicForm),
    /// Dense structure constants, index `(k * n + i) * n + j`.
    Product(Vec<f64>),
}

/// A parsed algebra file.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraDocument {
    pub dim: usize,
    pub definition: Definition,
    pub form: BilinearForm,
}

fn index_in_range(dim: usize, idx: &[usize]) -> Result<(), ParseError> {
    if let Some(bad) = idx.iter().find(|x| **x == 0 || **x > dim) {
        return Err(ParseError::Invalid(format!(
            "index {bad} out of range 1..={dim}"
        )));
    }
    Ok(())
}

impl AlgebraDocument {
    pub fn from_cubic(u: CubicForm, form: BilinearForm) -> Result<Self, ParseError> {
        if u.dim() != form.dim() {
            return Err(AlgebraError::DimensionMismatch {
                expected: u.dim(),
                got: form.dim(),
            }
            .into());
        }
        Ok(Self {
            dim: u.dim(),
            definition: Definition::Cubic(u),
            form,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let raw: RawFile =
            serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
        let n = raw.dim;
        if n == 0 || n > MAX_DIM {
            return Err(ParseError::Invalid(format!(
                "dim {n} outside 1..={MAX_DIM}"
            )));
        }

        let gram = match raw.gram {
            None => DMatrix::identity(n, n),
            Some(g) if g.len() == n * n => DMatrix::from_row_slice(n, n, &g),
            Some(g) => {
                return Err(ParseError::Invalid(format!(
                    "gram has {} entries, expected {}",
                    g.len(),
                    n * n
                )))
            }
        };
        let form = BilinearForm::new(gram)?;

        let definition = match (raw.cubic, raw.product) {
            (Some(_), Some(_)) => {
                return Err(ParseError::Invalid(
                    "both cubic and product given; exactly one is required".into(),
                ))
            }
            (None, None) => {
                return Err(ParseError::Invalid(
                    "neither cubic nor product given; exactly one is required".into(),
                ))
            }
            (Some(records), None) => {
                let mut seen = std::collections::BTreeSet::new();
                let mut entries = Vec::with_capacity(records.len());
                for r in records {
                    index_in_range(n, &[r.i, r.j, r.k])?;
                    if !(r.i <= r.j && r.j <= r.k) {
                        return Err(ParseError::Invalid(format!(
                            "cubic entry ({}, {}, {}) is not ordered i <= j <= k",
                            r.i, r.j, r.k
                        )));
                    }
                    if !seen.insert((r.i, r.j, r.k)) {
                        return Err(ParseError::Invalid(format!(
                            "duplicate cubic entry ({}, {}, {})",
                            r.i, r.j, r.k
                        )));
                    }
                    entries.push((r.i - 1, r.j - 1, r.k - 1, r.value));
                }
                Definition::Cubic(CubicForm::from_entries(n, entries)?)
            }
            (None, Some(records)) => {
                let mut product = vec![0.0; n * n * n];
                let mut seen = vec![false; n * n * n];
                for r in records {
                    index_in_range(n, &[r.k, r.i, r.j])?;
                    let pos = ((r.k - 1) * n + r.i - 1) * n + r.j - 1;
                    if std::mem::replace(&mut seen[pos], true) {
                        return Err(ParseError::Invalid(format!(
                            "duplicate product entry ({}, {}, {})",
                            r.k, r.i, r.j
                        )));
                    }
                    if !r.value.is_finite() {
                        return Err(AlgebraError::NonFinite.into());
                    }
                    product[pos] = r.value;
                }
                Definition::Product(product)
            }
        };
        Ok(Self {
            dim: n,
            definition,
            form,
        })
    }

    pub fn algebra(&self) -> Result<MetrisedAlgebra, AlgebraError> {
        match &self.definition {
            Definition::Cubic(u) => algebra_from_cubic(u, &self.form),
            Definition::Product(p) => {
                MetrisedAlgebra::from_structure_constants(p.clone(), self.form.clone())
            }
        }
    }

    pub fn to_text(&self) -> String {
        let n = self.dim;
        let mut out = String::new();
        let _ = writeln!(out, "{{");
        let _ = writeln!(out, "  \"dim\": {n},");
        let mut lines = Vec::new();
        let key = match &self.definition {
            Definition::Cubic(u) => {
                for ((i, j, k), v) in canonical_triples(n).zip(u.coeffs()) {
                    if *v != 0.0 {
                        lines.push(format!(
                            "    {{\"i\": {}, \"j\": {}, \"k\": {}, \"value\": {}}}",
                            i + 1,
                            j + 1,
                            k + 1,
                            fmt_real(*v)
                        ));
                    }
                }
                "cubic"
            }
            Definition::Product(p) => {
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let v = p[(k * n + i) * n + j];
                            if v != 0.0 {
                                lines.push(format!(
                                    "    {{\"k\": {}, \"i\": {}, \"j\": {}, \"value\": {}}}",
                                    k + 1,
                                    i + 1,
                                    j + 1,
                                    fmt_real(v)
                                ));
                            }
                        }
                    }
                }
                "product"
            }
        };
        if lines.is_empty() {
            let _ = writeln!(out, "  \"{key}\": [],");
        } else {
            let _ = writeln!(out, "  \"{key}\": [");
            let _ = writeln!(out, "{}", lines.join(",\n"));
            let _ = writeln!(out, "  ],");
        }
        let gram: Vec<String> = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| fmt_real(self.form.gram()[(r, c)]))
            .collect();
        let _ = writeln!(out, "  \"gram\": [{}]", gram.join(", "));
        let _ = writeln!(out, "}}");
        out
    }
}

/// A real with 17 significant digits in JSON-compatible exponent notation.
pub fn fmt_real(v: f64) -> String {
    // -0.0 prints as 0 so that canonical text does not depend on the sign of zero.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

/// Parses and builds the algebra in one step.
pub fn parse_algebra(text: &str) -> Result<MetrisedAlgebra, ParseError> {
    Ok(AlgebraDocument::parse(text)?.algebra()?)
}

/// Parses a comma-separated list of finite reals, e.g. `"0.5,0"`.
pub fn parse_vector(s: &str) -> Result<Vector, ParseError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ParseError::Syntax(format!(
            "empty component in vector {s:?}"
        )));
    }
    let values = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| ParseError::Syntax(format!("bad real {p:?}: {e}")))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(ParseError::Syntax(format!("non-finite component {p:?}")))
                    }
                })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(Vector::from_vec(values))
}
