//! Derivatives of the cubic form `u(x) = <x^2, x> / 6` and of the degree-0
//! function `f(x) = <x^2, x> / |x|^3`, with central-difference checks.
//!
//! `grad_u` and `hess_u` are Riesz representatives with respect to the
//! algebra's form: `Du(x) = x^2 / 2` and `D^2u(x) = L_x`. Everything about
//! `f` is computed in coordinates orthonormal for the form, where gradients
//! and Hessians are ordinary vectors and symmetric matrices.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{check_dim, MetrisedAlgebra, Vector};
use crate::error::{AlgebraError, Result};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Relative error accepted between analytic and finite-difference derivatives.
pub const FD_TOL: f64 = 1e-6;

pub fn grad_u(a: &MetrisedAlgebra, x: &Vector) -> Result<Vector> {
    Ok(a.square(x)? * 0.5)
}

pub fn hess_u(a: &MetrisedAlgebra, x: &Vector) -> Result<DMatrix<f64>> {
    a.left_mult_matrix(x)
}

/// Value, gradient and Hessian of `f` at one point, in orthonormal
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RayleighEval {
    pub value: f64,
    pub gradient: Vector,
    pub hessian: DMatrix<f64>,
}

/// Evaluates `f` at `x` (given in the algebra's own coordinates). The
/// returned gradient and Hessian are expressed in the orthonormal frame of
/// [`crate::algebra::BilinearForm::to_orthonormal`].
pub fn eval_f(a: &MetrisedAlgebra, x: &Vector) -> Result<RayleighEval> {
    check_dim(a.dim(), x)?;
    let ortho = a.to_orthonormal();
    eval_f_orthonormal(&ortho, &a.form().to_orthonormal(x))
}

/// [`eval_f`] for an algebra whose form is already the dot product.
pub fn eval_f_orthonormal(a: &MetrisedAlgebra, y: &Vector) -> Result<RayleighEval> {
    check_dim(a.dim(), y)?;
    let r2 = y.norm_squared();
    if r2 == 0.0 {
        return Err(AlgebraError::ZeroVector);
    }
    let n = a.dim();
    let r = r2.sqrt();
    let sq = a.multiply_unchecked(y, y);
    let cube = sq.dot(y);
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;

    let value = cube / r3;
    let gradient = (&sq * r2 - y * cube) * (3.0 / r5);

    let l = a.left_mult_unchecked(y);
    let cross = &sq * y.transpose() + y * sq.transpose();
    let hessian =
        (l * (2.0 * r2 * r2) - DMatrix::identity(n, n) * (cube * r2) - cross * (3.0 * r2)
            + (y * y.transpose()) * (5.0 * cube))
            * (3.0 / r7);

    Ok(RayleighEval {
        value,
        gradient,
        hessian,
    })
}

/// `f` alone, orthonormal coordinates.
pub(crate) fn f_value_orthonormal(a: &MetrisedAlgebra, y: &Vector) -> f64 {
    let r2 = y.norm_squared();
    a.multiply_unchecked(y, y).dot(y) / (r2 * r2.sqrt())
}

/// Whether a stationary direction squares to zero or yields an idempotent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryKind {
    NilSquare,
    IdempotentGenerating,
}

/// A unit vector `x` with `x^2 = lambda x`, `lambda = <x^2, x>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub kind: StationaryKind,
    pub f_value: f64,
    /// `|x^2 - lambda x|`.
    pub residual: f64,
    /// Local maximum of `f` on the sphere (second-order test).
    pub local_max: bool,
}

impl StationaryPoint {
    pub fn vector(&self) -> Vector {
        Vector::from_column_slice(&self.x)
    }
}

/// Central-difference gradient of a scalar function.
pub fn central_gradient(f: impl Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    let mut p = x.clone();
    Vector::from_fn(x.len(), |i, _| {
        p[i] = x[i] + h;
        let fp = f(&p);
        p[i] = x[i] - h;
        let fm = f(&p);
        p[i] = x[i];
        (fp - fm) / (2.0 * h)
    })
}

/// Central-difference Jacobian of a vector field; column `j` is the
/// derivative along `e_j`.
pub fn central_jacobian(g: impl Fn(&Vector) -> Vector, x: &Vector, h: f64) -> DMatrix<f64> {
    let n = x.len();
    let mut out = DMatrix::zeros(n, n);
    let mut p = x.clone();
    for j in 0..n {
        p[j] = x[j] + h;
        let gp = g(&p);
        p[j] = x[j] - h;
        let gm = g(&p);
        p[j] = x[j];
        out.set_column(j, &((gp - gm) / (2.0 * h)));
    }
    out
}

/// `|a - b|_inf / max(1, |a|_inf, |b|_inf)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let scale = a.iter().chain(b).map(|v| v.abs()).fold(1.0, f64::max);
    diff / scale
}

/// Maximum relative errors of the analytic derivatives against central
/// differences.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FdReport {
    pub h: f64,
    pub tol: f64,
    pub grad_u: f64,
    pub hess_u: f64,
    pub grad_f: f64,
    pub hess_f: f64,
    pub pass: bool,
}

pub fn fd_check(a: &MetrisedAlgebra, x: &Vector, h: f64) -> Result<FdReport> {
    check_dim(a.dim(), x)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(AlgebraError::InvalidParams(format!(
            "step h = {h} not in (0, 1)"
        )));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(AlgebraError::ZeroVector);
    }
    let gram = a.form().gram();

    // u in the algebra's own coordinates; coordinate partials are G * Du.
    let u = |p: &Vector| a.multiply_unchecked(p, p).dot(&(gram * p)) / 6.0;
    let coord_grad = |p: &Vector| gram * (a.multiply_unchecked(p, p) * 0.5);
    let fd_grad_u = central_gradient(u, x, h);
    let err_grad_u = relative_error(coord_grad(x).as_slice(), fd_grad_u.as_slice());
    let fd_hess_u = central_jacobian(coord_grad, x, h);
    let err_hess_u = relative_error((gram * hess_u(a, x)?).as_slice(), fd_hess_u.as_slice());

    let ortho = a.to_orthonormal();
    let y = a.form().to_orthonormal(x);
    let ev = eval_f_orthonormal(&ortho, &y)?;
    let fd_grad_f = central_gradient(|p| f_value_orthonormal(&ortho, p), &y, h);
    let err_grad_f = relative_error(ev.gradient.as_slice(), fd_grad_f.as_slice());
    let fd_hess_f = central_jacobian(
        |p| {
            eval_f_orthonormal(&ortho, p)
                .map(|e| e.gradient)
                .unwrap_or_else(|_| p * 0.0)
        },
        &y,
        h,
    );
    let err_hess_f = relative_error(ev.hessian.as_slice(), fd_hess_f.as_slice());

    let tol = FD_TOL;
    Ok(FdReport {
        h,
        tol,
        grad_u: err_grad_u,
        hess_u: err_hess_u,
        grad_f: err_grad_f,
        hess_f: err_hess_f,
        pass: [err_grad_u, err_hess_u, err_grad_f, err_hess_f]
            .iter()
            .all(|e| *e <= tol),
    })
}
