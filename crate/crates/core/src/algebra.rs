//! Cubic forms, positive definite bilinear forms and the commutative
//! metrised algebras they induce.
//!
//! A cubic form is stored through its full linearization: the symmetric
//! trilinear values `T[i][j][k] = u(e_i, e_j, e_k)`, so that
//! `u(x) = T(x, x, x) / 6`. Given a form `<.,.>` with Gram matrix `G`, the
//! product `xy` is the unique vector with `<xy, z> = T(x, y, z)` for all `z`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{AlgebraError, Result};

/// Coordinates of an element in the fixed basis `e_1, ..., e_n`.
pub type Vector = DVector<f64>;

/// Absolute tolerance for the structural invariants of an algebra.
pub const TOL_STRUCT: f64 = 1e-9;

/// Entries below this magnitude count as zero when deciding whether an
/// algebra (or a cubic form) vanishes identically.
pub const ZERO_TOL: f64 = 1e-12;

const STRUCTURE_SAMPLES: usize = 16;
const STRUCTURE_SEED: u64 = 0x5eed_c0de;

pub(crate) fn check_dim(expected: usize, v: &Vector) -> Result<()> {
    if v.len() != expected {
        return Err(AlgebraError::DimensionMismatch {
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Number of canonical entries `i <= j <= k` for dimension `n`.
pub fn canonical_len(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

/// Iterates the canonical index triples `i <= j <= k` (0-based) in
/// lexicographic order.
pub fn canonical_triples(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |i| (i..n).flat_map(move |j| (j..n).map(move |k| (i, j, k))))
}

fn sort3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let mut t = [i, j, k];
    t.sort_unstable();
    (t[0], t[1], t[2])
}

/// A real cubic form `u` on `R^n`, held as its symmetric trilinearization.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicForm {
    dim: usize,
    /// Canonical entries `T[i][j][k]`, `i <= j <= k`, lexicographic.
    coeffs: Vec<f64>,
    /// Dense symmetric expansion, index `(i * n + j) * n + k`.
    dense: Vec<f64>,
}

impl CubicForm {
    /// Builds a form from its canonical entry list (`i <= j <= k`,
    /// lexicographic order).
    pub fn from_canonical(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(AlgebraError::EmptyDimension);
        }
        if coeffs.len() != canonical_len(dim) {
            return Err(AlgebraError::DimensionMismatch {
                expected: canonical_len(dim),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        let n = dim;
        let mut dense = vec![0.0; n * n * n];
        for ((i, j, k), &v) in canonical_triples(n).zip(coeffs.iter()) {
            for (a, b, c) in [
                (i, j, k),
                (i, k, j),
                (j, i, k),
                (j, k, i),
                (k, i, j),
                (k, j, i),
            ] {
                dense[(a * n + b) * n + c] = v;
            }
        }
        Ok(Self { dim, coeffs, dense })
    }

    /// Builds a form by evaluating `f` on every canonical triple.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let coeffs = canonical_triples(dim).map(|(i, j, k)| f(i, j, k)).collect();
        Self::from_canonical(dim, coeffs)
    }

    /// Builds a form from sparse entries; indices may come in any order and
    /// refer to the same symmetric slot. Later entries overwrite earlier ones.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (usize, usize, usize, f64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(AlgebraError::EmptyDimension);
        }
        let mut coeffs = vec![0.0; canonical_len(dim)];
        let index: Vec<(usize, usize, usize)> = canonical_triples(dim).collect();
        for (i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(AlgebraError::DimensionMismatch {
                    expected: dim,
                    got: i.max(j).max(k) + 1,
                });
            }
            let key = sort3(i, j, k);
            let pos = index.binary_search(&key).expect("canonical triple");
            coeffs[pos] = v;
        }
        Self::from_canonical(dim, coeffs)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_canonical(dim, vec![0.0; canonical_len(dim)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Canonical entries in lexicographic `i <= j <= k` order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `(i, j, k, T[i][j][k])` for every canonical triple.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        canonical_triples(self.dim)
            .zip(self.coeffs.iter())
            .map(|((i, j, k), &v)| (i, j, k, v))
    }

    /// `T[i][j][k]` for any index order.
    pub fn entry(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.dim;
        self.dense[(i * n + j) * n + k]
    }

    /// Contraction `sum T[i][j][k] x_i y_j z_k`.
    pub fn trilinear(&self, x: &Vector, y: &Vector, z: &Vector) -> Result<f64> {
        check_dim(self.dim, x)?;
        check_dim(self.dim, y)?;
        check_dim(self.dim, z)?;
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let row = &self.dense[(i * n + j) * n..(i * n + j + 1) * n];
                let s: f64 = row.iter().zip(z.iter()).map(|(t, zk)| t * zk).sum();
                acc += xy * s;
            }
        }
        Ok(acc)
    }

    /// `u(x) = T(x, x, x) / 6`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.trilinear(x, x, x)? / 6.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self::from_canonical(self.dim, self.coeffs.iter().map(|c| c * t).collect())
            .expect("scaling preserves shape")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= ZERO_TOL)
    }
}

/// The full linearization `u(x, y, z)` of a cubic form.
pub fn polarize(u: &CubicForm, x: &Vector, y: &Vector, z: &Vector) -> Result<f64> {
    u.trilinear(x, y, z)
}

/// A symmetric positive definite bilinear form `<x, y> = x^T G y`.
///
/// Carries the Cholesky factor `G = R^T R` used to pass to coordinates in
/// which the form is the standard dot product.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    gram: DMatrix<f64>,
    /// Upper triangular `R` with `G = R^T R`.
    upper: DMatrix<f64>,
    upper_inv: DMatrix<f64>,
}

impl BilinearForm {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        let n = gram.nrows();
        if n == 0 {
            return Err(AlgebraError::EmptyDimension);
        }
        if gram.ncols() != n {
            return Err(AlgebraError::DimensionMismatch {
                expected: n,
                got: gram.ncols(),
            });
        }
        if gram.iter().any(|g| !g.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        let scale = gram.amax().max(1.0);
        let asymmetry = (&gram - gram.transpose()).amax();
        if asymmetry > 1e-12 * scale {
            return Err(AlgebraError::NotSymmetric { asymmetry });
        }
        let min_eigenvalue = SymmetricEigen::new(gram.clone()).eigenvalues.min();
        if min_eigenvalue <= 1e-12 * scale {
            return Err(AlgebraError::NotPositiveDefinite { min_eigenvalue });
        }
        let chol = Cholesky::new(gram.clone())
            .ok_or(AlgebraError::NotPositiveDefinite { min_eigenvalue })?;
        let upper = chol.l().transpose();
        let upper_inv = upper
            .clone()
            .try_inverse()
            .ok_or(AlgebraError::SingularSolve)?;
        Ok(Self {
            gram,
            upper,
            upper_inv,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn is_identity(&self) -> bool {
        self.gram == DMatrix::identity(self.dim(), self.dim())
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        x.dot(&(&self.gram * y))
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Coordinates in a basis that is orthonormal for this form.
    pub fn to_orthonormal(&self, x: &Vector) -> Vector {
        &self.upper * x
    }

    pub fn from_orthonormal(&self, y: &Vector) -> Vector {
        &self.upper_inv * y
    }

    /// Matrix of a linear operator in orthonormal coordinates, given its
    /// matrix in the original basis.
    pub fn operator_to_orthonormal(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        &self.upper * m * &self.upper_inv
    }
}

/// A commutative algebra with an associative positive definite form.
///
/// The product is held as a dense structure tensor with
/// `(xy)_k = sum_ij P[k][i][j] x_i y_j`. Construction from raw structure
/// constants does not enforce commutativity or form-associativity; use
/// [`check_structure`] for that.
#[derive(Debug, Clone, PartialEq)]
pub struct MetrisedAlgebra {
    dim: usize,
    /// Index `(k * n + i) * n + j`.
    product: Vec<f64>,
    form: BilinearForm,
}

impl MetrisedAlgebra {
    /// Wraps raw structure constants `product[(k * n + i) * n + j]`.
    pub fn from_structure_constants(product: Vec<f64>, form: BilinearForm) -> Result<Self> {
        let n = form.dim();
        if product.len() != n * n * n {
            return Err(AlgebraError::DimensionMismatch {
                expected: n * n * n,
                got: product.len(),
            });
        }
        if product.iter().any(|p| !p.is_finite()) {
            return Err(AlgebraError::NonFinite);
        }
        Ok(Self {
            dim: n,
            product,
            form,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &BilinearForm {
        &self.form
    }

    /// `P[k][i][j]`, the `k`-th coordinate of `e_i e_j`.
    pub fn structure_constant(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.product[(k * n + i) * n + j]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.product
    }

    pub fn multiply(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        check_dim(self.dim, x)?;
        check_dim(self.dim, y)?;
        Ok(self.multiply_unchecked(x, y))
    }

    pub(crate) fn multiply_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                if x[i] == 0.0 {
                    continue;
                }
                let row = &self.product[(k * n + i) * n..(k * n + i + 1) * n];
                let s: f64 = row.iter().zip(y.iter()).map(|(p, yj)| p * yj).sum();
                acc += x[i] * s;
            }
            out[k] = acc;
        }
        out
    }

    pub fn square(&self, x: &Vector) -> Result<Vector> {
        self.multiply(x, x)
    }

    /// Matrix of `L_x : y -> xy`; column `j` is `x e_j`.
    pub fn left_mult_matrix(&self, x: &Vector) -> Result<DMatrix<f64>> {
        check_dim(self.dim, x)?;
        Ok(self.left_mult_unchecked(x))
    }

    pub(crate) fn left_mult_unchecked(&self, x: &Vector) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| {
            (0..n)
                .map(|i| x[i] * self.product[(k * n + i) * n + j])
                .sum()
        })
    }

    /// True when every structure constant vanishes (to [`ZERO_TOL`]).
    pub fn is_zero(&self) -> bool {
        self.product.iter().all(|p| p.abs() <= ZERO_TOL)
    }

    /// The same algebra written in coordinates orthonormal for the form.
    /// Its Gram matrix is the identity.
    pub fn to_orthonormal(&self) -> MetrisedAlgebra {
        let n = self.dim;
        let basis: Vec<Vector> = (0..n)
            .map(|i| {
                self.form
                    .from_orthonormal(&Vector::from_fn(n, |r, _| (r == i) as u8 as f64))
            })
            .collect();
        let mut product = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let p = self
                    .form
                    .to_orthonormal(&self.multiply_unchecked(&basis[i], &basis[j]));
                for k in 0..n {
                    product[(k * n + i) * n + j] = p[k];
                }
            }
        }
        MetrisedAlgebra {
            dim: n,
            product,
            form: BilinearForm::identity(n).expect("identity is positive definite"),
        }
    }
}

fn unit(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

/// The algebra `V(u)` of a cubic form: `<xy, z> = u(x, y, z)`.
pub fn algebra_from_cubic(u: &CubicForm, form: &BilinearForm) -> Result<MetrisedAlgebra> {
    let n = u.dim();
    if form.dim() != n {
        return Err(AlgebraError::DimensionMismatch {
            expected: n,
            got: form.dim(),
        });
    }
    let lu = form.gram().clone().lu();
    let mut product = vec![0.0; n * n * n];
    for i in 0..n {
        for j in i..n {
            let rhs = Vector::from_fn(n, |k, _| u.entry(i, j, k));
            let p = lu.solve(&rhs).ok_or(AlgebraError::SingularSolve)?;
            for k in 0..n {
                product[(k * n + i) * n + j] = p[k];
                product[(k * n + j) * n + i] = p[k];
            }
        }
    }
    MetrisedAlgebra::from_structure_constants(product, form.clone())
}

/// `u_A(x) = <xx, x> / 6`, i.e. `T[i][j][k] = <e_i e_j, e_k>`.
pub fn cubic_from_algebra(a: &MetrisedAlgebra) -> CubicForm {
    let n = a.dim();
    CubicForm::from_fn(n, |i, j, k| {
        let p = a.multiply_unchecked(&unit(n, i), &unit(n, j));
        a.form().inner(&p, &unit(n, k))
    })
    .expect("dimension is positive")
}

pub fn multiply(a: &MetrisedAlgebra, x: &Vector, y: &Vector) -> Result<Vector> {
    a.multiply(x, y)
}

pub fn left_mult_matrix(a: &MetrisedAlgebra, x: &Vector) -> Result<DMatrix<f64>> {
    a.left_mult_matrix(x)
}

/// Maximum violations of the structural invariants of a metrised algebra.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StructureReport {
    pub commutativity: f64,
    pub associativity: f64,
    pub self_adjointness: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks commutativity, `<xy, z> = <x, yz>` and `G`-self-adjointness of
/// `L_x` on all basis triples plus a fixed seeded sample of unit vectors.
pub fn check_structure(a: &MetrisedAlgebra) -> StructureReport {
    let n = a.dim();
    let form = a.form();
    let mut commutativity: f64 = 0.0;
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let d = a.structure_constant(k, i, j) - a.structure_constant(k, j, i);
                commutativity = commutativity.max(d.abs());
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(STRUCTURE_SEED);
    let random_unit = |rng: &mut ChaCha8Rng| -> Vector {
        loop {
            let v = Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let nv = form.norm(&v);
            if nv > 1e-3 {
                return v / nv;
            }
        }
    };

    let basis: Vec<Vector> = (0..n).map(|i| unit(n, i)).collect();
    let samples: Vec<Vector> = (0..STRUCTURE_SAMPLES)
        .map(|_| random_unit(&mut rng))
        .collect();

    let assoc = |x: &Vector, y: &Vector, z: &Vector| -> f64 {
        let lhs = form.inner(&a.multiply_unchecked(x, y), z);
        let rhs = form.inner(x, &a.multiply_unchecked(y, z));
        (lhs - rhs).abs()
    };
    let mut associativity: f64 = 0.0;
    for x in &basis {
        for y in &basis {
            for z in &basis {
                associativity = associativity.max(assoc(x, y, z));
            }
        }
    }
    for w in samples.chunks(3) {
        if let [x, y, z] = w {
            associativity = associativity.max(assoc(x, y, z));
        }
    }

    let mut self_adjointness: f64 = 0.0;
    for x in basis.iter().chain(samples.iter()) {
        let gm = form.gram() * a.left_mult_unchecked(x);
        self_adjointness = self_adjointness.max((&gm - gm.transpose()).amax());
    }

    let tol = TOL_STRUCT;
    StructureReport {
        commutativity,
        associativity,
        self_adjointness,
        tol,
        pass: commutativity <= tol && associativity <= tol && self_adjointness <= tol,
    }
}
