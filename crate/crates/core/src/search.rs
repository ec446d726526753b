//! Stationary points of `<x, x^2>` on the unit sphere and the idempotents
//! they generate.
//!
//! Each restart starts from a deterministic pseudo-random unit vector and
//! runs three local solvers: projected gradient ascent on `f`, the same on
//! `-f`, and a bare Newton iteration on the Lagrange system
//! `{x^2 = lambda x, |x| = 1}`. Ascent results are polished by the same
//! Newton iteration. The bare Newton run is what reaches saddle points.
//! All of it runs in coordinates orthonormal for the form; results are
//! mapped back before they leave this module.

use std::cmp::Ordering;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{check_dim, MetrisedAlgebra, Vector};
use crate::calculus::{eval_f_orthonormal, StationaryKind, StationaryPoint};
use crate::error::{AlgebraError, Result};

/// Gradient norm at which ascent hands over to the Newton polish.
const ASCENT_GRAD_TOL: f64 = 1e-9;
const ARMIJO: f64 = 1e-4;
const NEWTON_ITERS: usize = 60;
/// Second-order slack for classifying a stationary point as a local max.
const LOCAL_MAX_TOL: f64 = 1e-9;
/// Bucket width used when ordering by `f`-value, so that ties up to
/// rounding noise are broken lexicographically.
const F_ORDER_QUANTUM: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub tol_stat: f64,
    pub tol_idem: f64,
    pub tol_eig: f64,
    pub dedup_radius: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            seed: 0,
            max_iters: 500,
            tol_stat: 1e-10,
            tol_idem: 1e-8,
            tol_eig: 1e-6,
            dedup_radius: 1e-5,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(AlgebraError::InvalidParams(msg.to_string()));
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        let tols = [
            self.tol_stat,
            self.tol_idem,
            self.tol_eig,
            self.dedup_radius,
        ];
        if tols.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("tolerances must be positive");
        }
        if self.dedup_radius <= self.tol_idem {
            return bad("dedup_radius must exceed tol_idem");
        }
        Ok(())
    }
}

/// Deterministic pseudo-random unit vector for restart `index`.
pub fn restart_point(n: usize, seed: u64, index: u64) -> Vector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        // Box-Muller; a Gaussian vector has uniformly distributed direction.
        let v = Vector::from_fn(n, |_, _| {
            let u1: f64 = 1.0 - rng.random::<f64>();
            let u2: f64 = rng.random::<f64>();
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        });
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// Orthonormal basis (as columns) of the complement of a unit vector.
pub(crate) fn complement_basis(y: &Vector) -> DMatrix<f64> {
    let n = y.len();
    // Householder reflector sending e_1 to -sign(y_1) y; its other columns
    // span y-perp.
    let mut w = y.clone();
    let s = if y[0] >= 0.0 { 1.0 } else { -1.0 };
    w[0] += s;
    let ww = w.norm_squared();
    let h = DMatrix::identity(n, n) - (&w * w.transpose()) * (2.0 / ww);
    h.columns(1, n - 1).into_owned()
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn solve(j: DMatrix<f64>, rhs: &Vector) -> Option<Vector> {
    if let Some(x) = j.clone().lu().solve(rhs) {
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }
    j.svd(true, true)
        .solve(rhs, 1e-12)
        .ok()
        .filter(|x| x.iter().all(|v| v.is_finite()))
}

fn stationarity_residual(o: &MetrisedAlgebra, y: &Vector) -> (f64, f64) {
    let sq = o.multiply_unchecked(y, y);
    let lambda = sq.dot(y);
    ((sq - y * lambda).norm(), lambda)
}

/// Newton iteration on `y^2 = lambda y` restricted to the sphere.
fn newton_lagrange(o: &MetrisedAlgebra, start: &Vector) -> Option<Vector> {
    let n = o.dim();
    let mut y = start.normalize();
    let mut best = (stationarity_residual(o, &y).0, y.clone());
    for _ in 0..NEWTON_ITERS {
        let sq = o.multiply_unchecked(&y, &y);
        let lambda = sq.dot(&y);
        let mut rhs = Vector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&(-(sq - &y * lambda)));
        rhs[n] = -0.5 * (y.norm_squared() - 1.0);
        if rhs.amax() == 0.0 {
            break;
        }
        let mut j = DMatrix::zeros(n + 1, n + 1);
        let l = o.left_mult_unchecked(&y) * 2.0 - DMatrix::identity(n, n) * lambda;
        j.view_mut((0, 0), (n, n)).copy_from(&l);
        j.view_mut((0, n), (n, 1)).copy_from(&(-&y));
        j.view_mut((n, 0), (1, n)).copy_from(&y.transpose());
        let d = solve(j, &rhs)?;
        let mut step = d.rows(0, n).into_owned();
        let len = step.norm();
        if len > 0.5 {
            step *= 0.5 / len;
        }
        y = (&y + step).normalize();
        if !y.iter().all(|v| v.is_finite()) {
            return None;
        }
        let res = stationarity_residual(o, &y).0;
        if res < best.0 {
            best = (res, y.clone());
        }
        if len < 1e-15 {
            break;
        }
    }
    Some(best.1)
}

/// Projected gradient ascent of `sign * f` with backtracking, then Newton.
fn ascend(o: &MetrisedAlgebra, start: &Vector, sign: f64, max_iters: usize) -> Vector {
    let objective = |y: &Vector| sign * o.multiply_unchecked(y, y).dot(y);
    let mut y = start.normalize();
    let mut value = objective(&y);
    let mut step = 1.0;
    for _ in 0..max_iters {
        let sq = o.multiply_unchecked(&y, &y);
        let lambda = sq.dot(&y);
        let grad = (sq - &y * lambda) * (3.0 * sign);
        let g2 = grad.norm_squared();
        if g2.sqrt() <= ASCENT_GRAD_TOL {
            break;
        }
        let mut moved = false;
        while step > 1e-16 {
            let cand = (&y + &grad * step).normalize();
            let cv = objective(&cand);
            if cv >= value + ARMIJO * step * g2 {
                y = cand;
                value = cv;
                step = (step * 2.0).min(1e6);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    newton_lagrange(o, &y).unwrap_or(y)
}

fn is_local_max(o: &MetrisedAlgebra, y: &Vector, lambda: f64) -> bool {
    let n = o.dim();
    if n == 1 {
        return true;
    }
    let q = complement_basis(y);
    let h = sym(&(o.left_mult_unchecked(y) * 2.0 - DMatrix::identity(n, n) * lambda));
    let restricted = q.transpose() * h * &q;
    let top = SymmetricEigen::new(sym(&restricted)).eigenvalues.max();
    top <= LOCAL_MAX_TOL
}

fn f_order(a: (f64, &[f64]), b: (f64, &[f64])) -> Ordering {
    let qa = (a.0 / F_ORDER_QUANTUM).round() as i64;
    let qb = (b.0 / F_ORDER_QUANTUM).round() as i64;
    qb.cmp(&qa).then_with(|| {
        a.1.iter()
            .zip(b.1)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// Result of [`maximize_on_sphere`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    /// Deduplicated stationary points, descending `f` then lexicographic.
    pub points: Vec<StationaryPoint>,
    /// Index of the global-max candidate in `points`.
    pub global_max: Option<usize>,
    /// Local solves that ended above `tol_stat`.
    pub unconverged: usize,
    pub status: String,
}

/// Multi-start search for stationary points of `<x, x^2>` on `<x, x> = 1`.
pub fn maximize_on_sphere(a: &MetrisedAlgebra, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    if a.is_zero() {
        return Ok(SearchOutcome {
            points: Vec::new(),
            global_max: None,
            unconverged: 0,
            status: "u \u{2261} 0".to_string(),
        });
    }
    let o = a.to_orthonormal();
    let n = o.dim();

    let candidates: Vec<Vec<Option<Vector>>> = (0..cfg.restarts as u64)
        .into_par_iter()
        .map(|r| {
            let start = restart_point(n, cfg.seed, r);
            [
                Some(ascend(&o, &start, 1.0, cfg.max_iters)),
                Some(ascend(&o, &start, -1.0, cfg.max_iters)),
                newton_lagrange(&o, &start),
            ]
            .into_iter()
            .map(|y| y.filter(|y| stationarity_residual(&o, y).0 <= cfg.tol_stat))
            .collect()
        })
        .collect();

    let mut unconverged = 0;
    let mut found: Vec<Vector> = Vec::new();
    for y in candidates.into_iter().flatten() {
        match y {
            None => unconverged += 1,
            Some(y) => {
                if !found.iter().any(|f| (f - &y).norm() <= cfg.dedup_radius) {
                    found.push(y);
                }
            }
        }
    }

    let mut points: Vec<StationaryPoint> = found
        .iter()
        .map(|y| {
            let (residual, lambda) = stationarity_residual(&o, y);
            let kind = if lambda.abs() <= cfg.tol_stat {
                StationaryKind::NilSquare
            } else {
                StationaryKind::IdempotentGenerating
            };
            StationaryPoint {
                x: a.form().from_orthonormal(y).iter().copied().collect(),
                lambda,
                kind,
                f_value: lambda,
                residual,
                local_max: is_local_max(&o, y, lambda),
            }
        })
        .collect();
    points.sort_by(|p, q| f_order((p.f_value, &p.x), (q.f_value, &q.x)));

    let status = if points.is_empty() {
        "no stationary point converged".to_string()
    } else {
        "ok".to_string()
    };
    Ok(SearchOutcome {
        global_max: if points.is_empty() { None } else { Some(0) },
        points,
        unconverged,
        status,
    })
}

/// An idempotent `c` together with its extremality certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdempotentRecord {
    pub c: Vec<f64>,
    /// `|c^2 - c|` in the form's norm.
    pub residual: f64,
    pub tol_idem: f64,
    /// `f(c) = 1 / |c|`.
    pub f_at_c: f64,
    /// Eigenvalues of `L_c` on `c`-perp, descending.
    pub spectrum_on_perp: Vec<f64>,
    pub tol_eig: f64,
    /// `L_c <= 1/2` on `c`-perp.
    pub extremal: bool,
    pub eigenvalue_one_simple: bool,
    /// Largest eigenvalue of the Hessian of `f` at `c`, restricted to `c`-perp.
    pub hessian_max_on_perp: f64,
    /// The Hessian sign test agrees with `extremal`.
    pub hessian_agrees: bool,
}

impl IdempotentRecord {
    pub fn vector(&self) -> Vector {
        Vector::from_column_slice(&self.c)
    }
}

pub(crate) fn idempotent_residual(a: &MetrisedAlgebra, c: &Vector) -> f64 {
    a.form().norm(&(a.multiply_unchecked(c, c) - c))
}

/// Spectral extremality test for an idempotent.
pub fn certify_extremal(
    a: &MetrisedAlgebra,
    c: &Vector,
    cfg: &SearchConfig,
) -> Result<IdempotentRecord> {
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
    let n = a.dim();
    let o = a.to_orthonormal();
    let yc = a.form().to_orthonormal(c);
    let norm = yc.norm();
    let l = sym(&o.left_mult_unchecked(&yc));

    let full = SymmetricEigen::new(l.clone()).eigenvalues;
    let ones = full
        .iter()
        .filter(|e| (*e - 1.0).abs() <= cfg.tol_eig)
        .count();

    let (spectrum_on_perp, hessian_max_on_perp) = if n == 1 {
        (Vec::new(), f64::NEG_INFINITY)
    } else {
        let q = complement_basis(&(&yc / norm));
        let restricted = sym(&(q.transpose() * &l * &q));
        let mut spectrum: Vec<f64> = SymmetricEigen::new(restricted)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        spectrum.sort_by(|x, y| y.total_cmp(x));
        let h = eval_f_orthonormal(&o, &yc)?.hessian;
        let hq = sym(&(q.transpose() * h * &q));
        (spectrum, SymmetricEigen::new(hq).eigenvalues.max())
    };
    let extremal = spectrum_on_perp.iter().all(|e| *e <= 0.5 + cfg.tol_eig);
    // On c-perp the Hessian of f is 3 (2 L_c - 1) / |c|^3.
    let hessian_nonpositive = hessian_max_on_perp <= 6.0 * cfg.tol_eig / norm.powi(3);

    Ok(IdempotentRecord {
        c: c.iter().copied().collect(),
        residual,
        tol_idem: cfg.tol_idem,
        f_at_c: 1.0 / norm,
        spectrum_on_perp,
        tol_eig: cfg.tol_eig,
        extremal,
        eigenvalue_one_simple: ones == 1,
        hessian_max_on_perp,
        hessian_agrees: hessian_nonpositive == extremal,
    })
}

/// Newton polish of `c^2 = c`; returns the best iterate seen.
pub(crate) fn polish_idempotent(a: &MetrisedAlgebra, c: &Vector) -> Vector {
    let n = a.dim();
    let mut best = (idempotent_residual(a, c), c.clone());
    let mut x = c.clone();
    for _ in 0..20 {
        if best.0 == 0.0 {
            break;
        }
        let f = a.multiply_unchecked(&x, &x) - &x;
        let j = a.left_mult_unchecked(&x) * 2.0 - DMatrix::identity(n, n);
        let Some(d) = solve(j, &(-f)) else { break };
        x += d;
        let r = idempotent_residual(a, &x);
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            best = (r, x.clone());
        } else {
            break;
        }
    }
    best.1
}

/// What a stationary point turns into after scaling by `1 / lambda`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum StationaryVerdict {
    NilSquare,
    Idempotent(IdempotentRecord),
    /// Polishing did not reach `tol_idem`.
    Unpolished {
        c: Vec<f64>,
        residual: f64,
    },
}

pub fn stationary_to_idempotent(
    a: &MetrisedAlgebra,
    s: &StationaryPoint,
    cfg: &SearchConfig,
) -> Result<StationaryVerdict> {
    let x = s.vector();
    check_dim(a.dim(), &x)?;
    if s.lambda.abs() <= cfg.tol_stat {
        return Ok(StationaryVerdict::NilSquare);
    }
    let raw = &x / s.lambda;
    let c = if idempotent_residual(a, &raw) == 0.0 {
        raw
    } else {
        polish_idempotent(a, &raw)
    };
    let residual = idempotent_residual(a, &c);
    if residual > cfg.tol_idem {
        return Ok(StationaryVerdict::Unpolished {
            c: c.iter().copied().collect(),
            residual,
        });
    }
    Ok(StationaryVerdict::Idempotent(certify_extremal(a, &c, cfg)?))
}

/// Idempotents and nil-square directions reachable from the stationary set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdempotentSearch {
    /// Distinct idempotents, descending `f(c)` then lexicographic.
    pub idempotents: Vec<IdempotentRecord>,
    pub nil_squares: Vec<StationaryPoint>,
    pub unpolished: usize,
    pub stationary_points: usize,
    pub status: String,
}

pub fn find_idempotents(a: &MetrisedAlgebra, cfg: &SearchConfig) -> Result<IdempotentSearch> {
    let outcome = maximize_on_sphere(a, cfg)?;
    let mut idempotents: Vec<IdempotentRecord> = Vec::new();
    let mut nil_squares = Vec::new();
    let mut unpolished = 0;
    for p in &outcome.points {
        match stationary_to_idempotent(a, p, cfg)? {
            StationaryVerdict::NilSquare => nil_squares.push(p.clone()),
            StationaryVerdict::Unpolished { .. } => unpolished += 1,
            StationaryVerdict::Idempotent(rec) => {
                let c = rec.vector();
                let radius = cfg.dedup_radius * a.form().norm(&c).max(1.0);
                if !idempotents
                    .iter()
                    .any(|r| a.form().norm(&(r.vector() - &c)) <= radius)
                {
                    idempotents.push(rec);
                }
            }
        }
    }
    idempotents.sort_by(|p, q| f_order((p.f_at_c, &p.c), (q.f_at_c, &q.c)));
    Ok(IdempotentSearch {
        idempotents,
        nil_squares,
        unpolished,
        stationary_points: outcome.points.len(),
        status: outcome.status,
    })
}

/// The max/min pair of `f` on the sphere and whether it is anti-collinear.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub f_plus: f64,
    pub f_minus: f64,
    /// `|x_minus + x_plus|` in the form's norm.
    pub pair_distance: f64,
    pub dedup_radius: f64,
    pub anti_collinear: bool,
    /// `|f(x_minus) + f(x_plus)|`.
    pub odd_value_error: f64,
    pub odd_value_tol: f64,
    /// Local maxima of `f` with positive value.
    pub maximizers: usize,
    /// Dimension of their span.
    pub independent_maximizers: usize,
}

pub const ODD_VALUE_TOL: f64 = 1e-10;

pub fn demonstrate_oddness_gap(a: &MetrisedAlgebra, cfg: &SearchConfig) -> Result<GapReport> {
    if a.is_zero() {
        return Err(AlgebraError::ZeroAlgebra);
    }
    let outcome = maximize_on_sphere(a, cfg)?;
    let top = outcome
        .points
        .first()
        .ok_or(AlgebraError::InvalidParams(outcome.status.clone()))?;
    let x_plus = top.vector();
    let f_min = outcome
        .points
        .iter()
        .map(|p| p.f_value)
        .fold(f64::INFINITY, f64::min);
    // Among the minimizers (up to the ordering quantum) prefer the one
    // closest to -x_plus.
    let bottom = outcome
        .points
        .iter()
        .filter(|p| p.f_value <= f_min + F_ORDER_QUANTUM)
        .min_by(|p, q| {
            let dp = a.form().norm(&(p.vector() + &x_plus));
            let dq = a.form().norm(&(q.vector() + &x_plus));
            dp.total_cmp(&dq)
        })
        .expect("points is nonempty");
    let x_minus = bottom.vector();
    let pair_distance = a.form().norm(&(&x_minus + &x_plus));

    let maxima: Vec<Vector> = outcome
        .points
        .iter()
        .filter(|p| p.local_max && p.f_value > cfg.tol_stat)
        .map(|p| a.form().to_orthonormal(&p.vector()))
        .collect();
    let independent_maximizers = if maxima.is_empty() {
        0
    } else {
        let m = DMatrix::from_columns(&maxima);
        m.svd(false, false)
            .singular_values
            .iter()
            .filter(|s| **s > 1e-6)
            .count()
    };

    let odd_value_error = (top.f_value + bottom.f_value).abs();
    Ok(GapReport {
        x_plus: top.x.clone(),
        x_minus: bottom.x.clone(),
        f_plus: top.f_value,
        f_minus: bottom.f_value,
        pair_distance,
        dedup_radius: cfg.dedup_radius,
        anti_collinear: pair_distance <= cfg.dedup_radius,
        odd_value_error,
        odd_value_tol: ODD_VALUE_TOL,
        maximizers: maxima.len(),
        independent_maximizers,
    })
}
