//! Finite-dimensional commutative metrised algebras defined by cubic forms.
//!
//! Over a positive definite form `<.,.>`, a cubic form `u` determines a
//! commutative product by `<xy, z> = u(x, y, z)`, and every commutative
//! algebra with an associative form arises this way. This crate builds
//! those algebras, finds idempotents as scaled stationary points of
//! `<x, x^2>` on the unit sphere, certifies the extremal property
//! `L_c <= 1/2` on `c`-perp for local maxima, and decides decomposability of
//! idempotents through the Peirce eigenspace `V_c(1)`.

pub mod algebra;
pub mod calculus;
pub mod commands;
pub mod error;
pub mod io;
pub mod peirce;
pub mod search;
pub mod zoo;

pub use algebra::{
    algebra_from_cubic, check_structure, cubic_from_algebra, left_mult_matrix, multiply, polarize,
    BilinearForm, CubicForm, MetrisedAlgebra, StructureReport, Vector,
};
pub use calculus::{
    eval_f, fd_check, grad_u, hess_u, RayleighEval, StationaryKind, StationaryPoint,
};
pub use error::{AlgebraError, Result};
pub use io::{parse_algebra, parse_vector, AlgebraDocument, ParseError};
pub use peirce::{
    build_restricted_algebra, check_subalgebra, corollary_unit_split, decide_decomposable,
    peirce_spectrum, PeirceReport, Verdict,
};
pub use search::{
    certify_extremal, demonstrate_oddness_gap, find_idempotents, maximize_on_sphere,
    stationary_to_idempotent, IdempotentRecord, SearchConfig,
};
pub use zoo::{
    counterexample_oracle, make_counterexample, make_hadamard, make_random_algebra,
    CounterexampleParams,
};
