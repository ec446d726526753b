//! Peirce eigenspaces of an idempotent and decomposability.
//!
//! An idempotent `c` is decomposable when `c = c1 + c2` with nonzero
//! idempotents `c1, c2`. If `V_c(1) = {x : cx = x}` is one-dimensional, `c`
//! is indecomposable. If it has dimension at least two and is closed under
//! the product, `c` is the unit of the subalgebra `V_c(1)`; an extremal
//! idempotent `c1` of that subalgebra differs from `c`, and `c - c1` is an
//! idempotent as well.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::algebra::{check_dim, check_structure, MetrisedAlgebra, Vector};
use crate::error::{AlgebraError, Result};
use crate::search::{idempotent_residual, maximize_on_sphere, polish_idempotent, SearchConfig};

/// Closure residual accepted by [`check_subalgebra`].
pub const TOL_SUB: f64 = 1e-8;
const ORTHONORMAL_TOL: f64 = 1e-8;

fn require_idempotent(a: &MetrisedAlgebra, c: &Vector, cfg: &SearchConfig) -> Result<()> {
    check_dim(a.dim(), c)?;
    if c.iter().all(|v| *v == 0.0) {
        return Err(AlgebraError::ZeroVector);
    }
    let residual = idempotent_residual(a, c);
    if residual > cfg.tol_idem {
        return Err(AlgebraError::NotIdempotent {
            residual,
            tol: cfg.tol_idem,
        });
    }
    Ok(())
}

/// One cluster of the spectrum of `L_c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeirceEigenspace {
    /// Mean of the clustered eigenvalues.
    pub value: f64,
    /// Basis orthonormal for the algebra's form, original coordinates.
    pub basis: Vec<Vec<f64>>,
}

impl PeirceEigenspace {
    pub fn multiplicity(&self) -> usize {
        self.basis.len()
    }
}

/// Eigenvalue clusters of `L_c`, in descending order of value.
pub fn peirce_spectrum(
    a: &MetrisedAlgebra,
    c: &Vector,
    cfg: &SearchConfig,
) -> Result<Vec<PeirceEigenspace>> {
    require_idempotent(a, c, cfg)?;
    let o = a.to_orthonormal();
    let yc = a.form().to_orthonormal(c);
    let l = o.left_mult_unchecked(&yc);
    let eig = SymmetricEigen::new((&l + l.transpose()) * 0.5);

    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let mut clusters: Vec<(Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    let mut last = f64::INFINITY;
    for i in order {
        let value = eig.eigenvalues[i];
        let vector = a
            .form()
            .from_orthonormal(&eig.eigenvectors.column(i).into_owned());
        let vector: Vec<f64> = vector.iter().copied().collect();
        match clusters.last_mut() {
            Some((values, basis)) if last - value <= cfg.tol_eig => {
                values.push(value);
                basis.push(vector);
            }
            _ => clusters.push((vec![value], vec![vector])),
        }
        last = value;
    }
    Ok(clusters
        .into_iter()
        .map(|(values, basis)| PeirceEigenspace {
            value: values.iter().sum::<f64>() / values.len() as f64,
            basis,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubalgebraCheck {
    pub closed: bool,
    /// Largest norm of the part of `b_i b_j` orthogonal to the span.
    pub residual: f64,
    pub tol: f64,
}

fn check_orthonormal(a: &MetrisedAlgebra, basis: &[Vector]) -> Result<()> {
    for b in basis {
        check_dim(a.dim(), b)?;
    }
    let m = basis.len();
    let gram = DMatrix::from_fn(m, m, |i, j| a.form().inner(&basis[i], &basis[j]));
    let dev = (gram - DMatrix::identity(m, m)).amax();
    if dev > ORTHONORMAL_TOL {
        return Err(AlgebraError::InvalidParams(format!(
            "basis is not orthonormal (deviation {dev:e})"
        )));
    }
    Ok(())
}

fn project(a: &MetrisedAlgebra, basis: &[Vector], x: &Vector) -> Vector {
    basis.iter().fold(Vector::zeros(a.dim()), |acc, b| {
        acc + b * a.form().inner(x, b)
    })
}

/// Tests whether the span of a form-orthonormal basis is closed under the
/// product.
pub fn check_subalgebra(a: &MetrisedAlgebra, basis: &[Vector]) -> Result<SubalgebraCheck> {
    check_orthonormal(a, basis)?;
    let mut residual: f64 = 0.0;
    for (i, bi) in basis.iter().enumerate() {
        for bj in &basis[i..] {
            let p = a.multiply_unchecked(bi, bj);
            let out = &p - project(a, basis, &p);
            residual = residual.max(a.form().norm(&out));
        }
    }
    Ok(SubalgebraCheck {
        closed: residual <= TOL_SUB,
        residual,
        tol: TOL_SUB,
    })
}

/// The product restricted to `span(basis)`, in basis coordinates. The
/// restricted form is the identity since the basis is orthonormal.
pub fn build_restricted_algebra(a: &MetrisedAlgebra, basis: &[Vector]) -> Result<MetrisedAlgebra> {
    let check = check_subalgebra(a, basis)?;
    if !check.closed {
        return Err(AlgebraError::NotSubalgebra {
            residual: check.residual,
        });
    }
    let m = basis.len();
    if m == 0 {
        return Err(AlgebraError::EmptyDimension);
    }
    let mut product = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            let p = a.multiply_unchecked(&basis[i], &basis[j]);
            for (k, bk) in basis.iter().enumerate() {
                product[(k * m + i) * m + j] = a.form().inner(&p, bk);
            }
        }
    }
    MetrisedAlgebra::from_structure_constants(product, crate::algebra::BilinearForm::identity(m)?)
}

fn coords(a: &MetrisedAlgebra, basis: &[Vector], x: &Vector) -> Vector {
    Vector::from_iterator(basis.len(), basis.iter().map(|b| a.form().inner(x, b)))
}

fn embed(a: &MetrisedAlgebra, basis: &[Vector], w: &Vector) -> Vector {
    basis
        .iter()
        .zip(w.iter())
        .fold(Vector::zeros(a.dim()), |acc, (b, wk)| acc + b * *wk)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Indecomposable,
    Decomposable,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Indecomposable => "indecomposable",
            Verdict::Decomposable => "decomposable",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// A verified splitting `c = c1 + c2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    /// `|c1 + c2 - c|`.
    pub sum_error: f64,
    pub residual_c1: f64,
    pub residual_c2: f64,
    /// `|c1 c2|`.
    pub cross_product: f64,
    /// `max_i |c c_i - c_i|`: both parts lie in `V_c(1)`.
    pub peirce_residual: f64,
    /// Smallest singular value of `[c1 c2]` in orthonormal coordinates.
    pub independence: f64,
    pub tol_idem: f64,
}

impl Decomposition {
    pub fn verified(&self) -> bool {
        let t = self.tol_idem;
        self.sum_error <= t
            && self.residual_c1 <= t
            && self.residual_c2 <= t
            && self.cross_product <= t
            && self.peirce_residual <= t
            && self.independence > t
    }
}

pub fn verify_decomposition(
    a: &MetrisedAlgebra,
    c: &Vector,
    c1: &Vector,
    c2: &Vector,
    tol_idem: f64,
) -> Decomposition {
    let form = a.form();
    let pair = DMatrix::from_columns(&[form.to_orthonormal(c1), form.to_orthonormal(c2)]);
    Decomposition {
        c1: c1.iter().copied().collect(),
        c2: c2.iter().copied().collect(),
        sum_error: form.norm(&(c1 + c2 - c)),
        residual_c1: idempotent_residual(a, c1),
        residual_c2: idempotent_residual(a, c2),
        cross_product: form.norm(&a.multiply_unchecked(c1, c2)),
        peirce_residual: form
            .norm(&(a.multiply_unchecked(c, c1) - c1))
            .max(form.norm(&(a.multiply_unchecked(c, c2) - c2))),
        independence: pair.svd(false, false).singular_values.min(),
        tol_idem,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeirceReport {
    pub c: Vec<f64>,
    pub eigenvalues: Vec<Cluster>,
    pub tol_eig: f64,
    pub v1_basis: Vec<Vec<f64>>,
    pub dim_v1: usize,
    pub subalgebra: SubalgebraCheck,
    pub v1_is_subalgebra: bool,
    pub verdict: Verdict,
    pub decomposition: Option<Decomposition>,
    pub diagnostic: Option<String>,
}

/// Peirce data of `c` without attempting a decomposition.
pub fn peirce_report(a: &MetrisedAlgebra, c: &Vector, cfg: &SearchConfig) -> Result<PeirceReport> {
    let spaces = peirce_spectrum(a, c, cfg)?;
    let v1: Vec<Vector> = spaces
        .iter()
        .find(|s| (s.value - 1.0).abs() <= cfg.tol_eig)
        .map(|s| {
            s.basis
                .iter()
                .map(|b| Vector::from_column_slice(b))
                .collect()
        })
        .unwrap_or_default();
    let subalgebra = check_subalgebra(a, &v1)?;
    let dim_v1 = v1.len();
    Ok(PeirceReport {
        c: c.iter().copied().collect(),
        eigenvalues: spaces
            .iter()
            .map(|s| Cluster {
                value: s.value,
                multiplicity: s.multiplicity(),
            })
            .collect(),
        tol_eig: cfg.tol_eig,
        v1_basis: v1.iter().map(|b| b.iter().copied().collect()).collect(),
        dim_v1,
        v1_is_subalgebra: subalgebra.closed,
        subalgebra,
        verdict: if dim_v1 == 1 {
            Verdict::Indecomposable
        } else {
            Verdict::Inconclusive
        },
        decomposition: None,
        diagnostic: None,
    })
}

/// Decides whether `c` is decomposable and, when it is, constructs the
/// splitting from an extremal idempotent of `V_c(1)`.
pub fn decide_decomposable(
    a: &MetrisedAlgebra,
    c: &Vector,
    cfg: &SearchConfig,
) -> Result<PeirceReport> {
    let mut report = peirce_report(a, c, cfg)?;
    if report.dim_v1 == 1 {
        report.verdict = Verdict::Indecomposable;
        return Ok(report);
    }
    if report.dim_v1 == 0 {
        report.verdict = Verdict::Inconclusive;
        report.diagnostic = Some("eigenvalue 1 not resolved within tol_eig".into());
        return Ok(report);
    }
    if !report.v1_is_subalgebra {
        report.verdict = Verdict::Inconclusive;
        report.diagnostic = Some(format!(
            "V_c(1) is not a subalgebra (closure residual {:e})",
            report.subalgebra.residual
        ));
        return Ok(report);
    }

    let basis: Vec<Vector> = report
        .v1_basis
        .iter()
        .map(|b| Vector::from_column_slice(b))
        .collect();
    let w = build_restricted_algebra(a, &basis)?;
    let unit = coords(a, &basis, c);
    let outcome = maximize_on_sphere(&w, cfg)?;

    let candidate = outcome
        .points
        .iter()
        .filter(|p| p.lambda > cfg.tol_stat)
        .map(|p| p.vector() / p.lambda)
        .find(|cw| (cw - &unit).norm() > cfg.dedup_radius);
    let Some(cw) = candidate else {
        report.verdict = Verdict::Inconclusive;
        report.diagnostic = Some(format!(
            "no idempotent of V_c(1) other than c found after {} restarts",
            cfg.restarts
        ));
        return Ok(report);
    };
    let c1 = polish_idempotent(a, &embed(a, &basis, &polish_idempotent(&w, &cw)));
    let c2 = c - &c1;
    let dec = verify_decomposition(a, c, &c1, &c2, cfg.tol_idem);
    if dec.verified() {
        report.verdict = Verdict::Decomposable;
    } else {
        report.verdict = Verdict::Inconclusive;
        report.diagnostic = Some("constructed pair failed verification".into());
    }
    report.decomposition = Some(dec);
    Ok(report)
}

/// Least-squares solution of `L_e = 1` and its residual `|L_e - 1|_max`.
pub fn find_unit(a: &MetrisedAlgebra) -> (Vector, f64) {
    let n = a.dim();
    let m = DMatrix::from_fn(n * n, n, |row, i| {
        let (k, j) = (row / n, row % n);
        a.structure_constant(k, i, j)
    });
    let rhs = Vector::from_fn(n * n, |row, _| ((row / n) == (row % n)) as u8 as f64);
    let e = m
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .unwrap_or_else(|_| Vector::zeros(n));
    let residual = (a.left_mult_unchecked(&e) - DMatrix::identity(n, n)).amax();
    (e, residual)
}

/// An idempotent other than the unit together with its complement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitSplit {
    pub unit: Vec<f64>,
    pub unit_residual: f64,
    pub c_prime: Vec<f64>,
    pub complement: Vec<f64>,
    pub residual_c_prime: f64,
    pub residual_complement: f64,
    pub extremal: bool,
    pub tol_idem: f64,
}

/// Splits the unit of a unital algebra as `e = c' + (e - c')` with `c'`
/// an extremal idempotent. `Ok(None)` when there is no unit or `dim < 2`.
pub fn corollary_unit_split(a: &MetrisedAlgebra, cfg: &SearchConfig) -> Result<Option<UnitSplit>> {
    if a.dim() < 2 {
        return Ok(None);
    }
    let (e, unit_residual) = find_unit(a);
    if unit_residual > cfg.tol_eig {
        return Ok(None);
    }
    let outcome = maximize_on_sphere(a, cfg)?;
    let Some(top) = outcome.global_max.map(|i| &outcome.points[i]) else {
        return Ok(None);
    };
    if top.lambda <= cfg.tol_stat {
        return Ok(None);
    }
    let c_prime = polish_idempotent(a, &(top.vector() / top.lambda));
    if a.form().norm(&(&c_prime - &e)) <= cfg.dedup_radius {
        return Ok(None);
    }
    let complement = &e - &c_prime;
    let record = crate::search::certify_extremal(a, &c_prime, cfg)?;
    Ok(Some(UnitSplit {
        unit: e.iter().copied().collect(),
        unit_residual,
        residual_c_prime: idempotent_residual(a, &c_prime),
        residual_complement: idempotent_residual(a, &complement),
        c_prime: c_prime.iter().copied().collect(),
        complement: complement.iter().copied().collect(),
        extremal: record.extremal,
        tol_idem: cfg.tol_idem,
    }))
}

/// `L_c` restricted to `W` must be the identity when `c` is the unit of `W`.
pub fn unit_defect(w: &MetrisedAlgebra, unit: &Vector) -> f64 {
    (w.left_mult_unchecked(unit) - DMatrix::identity(w.dim(), w.dim())).amax()
}

/// Structural validity of a restricted algebra.
pub fn restricted_is_valid(w: &MetrisedAlgebra) -> bool {
    check_structure(w).pass
}
