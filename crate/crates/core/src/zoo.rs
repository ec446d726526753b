//! Reference algebras: the one-idempotent counterexample family, Hadamard
//! algebras and seeded random algebras, with exact idempotent oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{algebra_from_cubic, BilinearForm, CubicForm, MetrisedAlgebra, Vector};
use crate::error::{AlgebraError, Result};

/// Parameters of `u(x) = x_1 (x_1^2 + 3 a_2 x_2^2 + ... + 3 a_n x_n^2) / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleParams {
    n: usize,
    /// `a_2, ..., a_n`.
    a: Vec<f64>,
}

impl CounterexampleParams {
    /// Requires `n >= 2`, `n - 1` coefficients, pairwise distinct, each in
    /// `(0, 1/2)`.
    pub fn new(n: usize, a: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(AlgebraError::InvalidParams(format!(
                "n = {n} must be at least 2"
            )));
        }
        if a.len() != n - 1 {
            return Err(AlgebraError::InvalidParams(format!(
                "expected {} coefficients a_2..a_n, got {}",
                n - 1,
                a.len()
            )));
        }
        if let Some(bad) = a.iter().find(|ak| !(**ak > 0.0 && **ak < 0.5)) {
            return Err(AlgebraError::InvalidParams(format!(
                "coefficient {bad} outside (0, 1/2)"
            )));
        }
        for (i, ai) in a.iter().enumerate() {
            if a[i + 1..].contains(ai) {
                return Err(AlgebraError::InvalidParams(format!(
                    "coefficient {ai} repeated"
                )));
            }
        }
        Ok(Self { n, a })
    }

    /// `a_k = (2k - 1) / (4n)` for `k = 2..n`.
    pub fn with_defaults(n: usize) -> Result<Self> {
        let a = (2..=n)
            .map(|k| (2 * k - 1) as f64 / (4 * n) as f64)
            .collect();
        Self::new(n, a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }
}

pub fn counterexample_cubic(p: &CounterexampleParams) -> CubicForm {
    let entries = std::iter::once((0, 0, 0, 2.0)).chain(
        p.a.iter()
            .enumerate()
            .map(|(i, ak)| (0, i + 1, i + 1, 2.0 * ak)),
    );
    CubicForm::from_entries(p.n, entries).expect("valid params give a valid form")
}

pub fn make_counterexample(p: &CounterexampleParams) -> Result<MetrisedAlgebra> {
    algebra_from_cubic(&counterexample_cubic(p), &BilinearForm::identity(p.n)?)
}

/// All nonzero solutions of `x^2 = x` in the counterexample algebra.
///
/// Componentwise, `x^2 = x` reads `2 x_1^2 + 2 sum a_k x_k^2 = x_1` and
/// `x_k (4 a_k x_1 - 1) = 0` for `k >= 2`. If every `x_k` vanishes then
/// `x_1 in {0, 1/2}`. Two nonzero `x_j, x_k` would force
/// `x_1 = 1/(4 a_j) = 1/(4 a_k)`, excluded by distinctness. A single
/// nonzero `x_k` forces `x_1 = 1/(4 a_k)` and
/// `x_k^2 = (2 a_k - 1) / (16 a_k^3)`, which is admissible only if
/// nonnegative.
pub fn counterexample_oracle(p: &CounterexampleParams) -> Vec<Vector> {
    let n = p.n;
    let mut out = Vec::new();
    let mut xi_half = Vector::zeros(n);
    xi_half[0] = 0.5;
    out.push(xi_half);
    for (i, &ak) in p.a.iter().enumerate() {
        if p.a.iter().filter(|aj| **aj == ak).count() > 1 {
            continue;
        }
        let x1 = 1.0 / (4.0 * ak);
        let sq = (2.0 * ak - 1.0) / (16.0 * ak.powi(3));
        if sq < 0.0 {
            continue;
        }
        for s in [1.0, -1.0] {
            let mut x = Vector::zeros(n);
            x[0] = x1;
            x[i + 1] = s * sq.sqrt();
            if !out.contains(&x) {
                out.push(x);
            }
        }
    }
    out
}

pub fn make_hadamard(n: usize) -> Result<MetrisedAlgebra> {
    if n < 1 {
        return Err(AlgebraError::InvalidParams("n must be at least 1".into()));
    }
    let u = CubicForm::from_entries(n, (0..n).map(|i| (i, i, i, 1.0)))?;
    algebra_from_cubic(&u, &BilinearForm::identity(n)?)
}

/// Nonzero idempotents of the Hadamard algebra: the nonzero 0/1 vectors,
/// in increasing binary order of their support mask.
pub fn hadamard_oracle(n: usize) -> Vec<Vector> {
    (1u32..(1 << n))
        .map(|mask| Vector::from_fn(n, |i, _| ((mask >> i) & 1) as f64))
        .collect()
}

/// Canonical tensor entries drawn uniformly from `[-scale, scale]`.
pub fn random_cubic(n: usize, seed: u64, scale: f64) -> Result<CubicForm> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(AlgebraError::InvalidParams(format!(
            "scale {scale} must be >= 0"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CubicForm::from_fn(n, |_, _, _| {
        let t: f64 = rng.random_range(-1.0..=1.0);
        t * scale
    })
}

pub fn make_random_algebra(n: usize, seed: u64, scale: f64) -> Result<MetrisedAlgebra> {
    let u = random_cubic(n, seed, scale)?;
    algebra_from_cubic(&u, &BilinearForm::identity(n)?)
}
