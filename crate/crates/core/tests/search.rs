use nalgebra::DMatrix;

use cubalg::zoo::{counterexample_oracle, hadamard_oracle, random_cubic};
use cubalg::{
    algebra_from_cubic, find_idempotents, make_counterexample, make_hadamard, make_random_algebra,
    maximize_on_sphere, BilinearForm, CounterexampleParams, CubicForm, MetrisedAlgebra,
    SearchConfig, Vector,
};

fn sorted(mut v: Vec<Vector>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = v.drain(..).map(|x| x.iter().copied().collect()).collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn same_set(found: Vec<Vector>, oracle: Vec<Vector>, tol: f64) -> bool {
    let (f, o) = (sorted(found), sorted(oracle));
    f.len() == o.len()
        && f.iter()
            .zip(&o)
            .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol))
}

#[test]
fn hadamard_search_finds_every_lattice_idempotent() {
    let cfg = SearchConfig::default();
    for n in 1..=4 {
        let a = make_hadamard(n).unwrap();
        let found = find_idempotents(&a, &cfg).unwrap();
        assert!(found.nil_squares.is_empty());
        let vs = found.idempotents.iter().map(|r| r.vector()).collect();
        assert!(same_set(vs, hadamard_oracle(n), 1e-7), "n={n}");
    }
}

#[test]
fn counterexample_search_matches_oracle_for_other_coefficients() {
    let cfg = SearchConfig {
        restarts: 80,
        ..SearchConfig::default()
    };
    for a in [vec![0.05], vec![0.45], vec![0.1, 0.2, 0.4]] {
        let p = CounterexampleParams::new(a.len() + 1, a).unwrap();
        let alg = make_counterexample(&p).unwrap();
        let found = find_idempotents(&alg, &cfg).unwrap();
        let vs = found.idempotents.iter().map(|r| r.vector()).collect();
        assert!(same_set(vs, counterexample_oracle(&p), 1e-7));
    }
}

#[test]
fn counterexample_coefficient_bounds() {
    assert!(CounterexampleParams::new(2, vec![0.0]).is_err());
    assert!(CounterexampleParams::new(2, vec![0.5]).is_err());
    assert!(CounterexampleParams::new(3, vec![0.2]).is_err());
    assert!(CounterexampleParams::new(2, vec![f64::NAN]).is_err());
}

#[test]
fn search_is_deterministic_and_thread_independent() {
    let a = make_random_algebra(5, 21, 1.0).unwrap();
    let cfg = SearchConfig {
        restarts: 64,
        seed: 5,
        ..SearchConfig::default()
    };
    let first = serde_json::to_string(&find_idempotents(&a, &cfg).unwrap()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let single =
        pool.install(|| serde_json::to_string(&find_idempotents(&a, &cfg).unwrap()).unwrap());
    assert_eq!(first, single);
}

#[test]
fn global_max_is_invariant_under_rescaling_the_form() {
    let cfg = SearchConfig {
        restarts: 64,
        ..SearchConfig::default()
    };
    let u = random_cubic(4, 3, 1.0).unwrap();
    let id = BilinearForm::identity(4).unwrap();
    let top = |w: &CubicForm| {
        let a = algebra_from_cubic(w, &id).unwrap();
        let out = maximize_on_sphere(&a, &cfg).unwrap();
        out.points[out.global_max.unwrap()].clone()
    };
    let base = top(&u);
    let scaled = top(&u.scaled(3.0));
    assert!((scaled.f_value - 3.0 * base.f_value).abs() <= 1e-9);
    assert!((scaled.vector() - base.vector()).amax() <= 1e-6);
}

#[test]
fn idempotents_scale_inversely_with_the_form() {
    let cfg = SearchConfig::default();
    let a = make_hadamard(2).unwrap();
    let u = cubalg::cubic_from_algebra(&a).scaled(2.0);
    let b = algebra_from_cubic(&u, &BilinearForm::identity(2).unwrap()).unwrap();
    let found = find_idempotents(&b, &cfg).unwrap();
    let halved = hadamard_oracle(2).into_iter().map(|v| v * 0.5).collect();
    let vs = found.idempotents.iter().map(|r| r.vector()).collect();
    assert!(same_set(vs, halved, 1e-7));
}

#[test]
fn random_algebras_have_no_nil_squares() {
    let cfg = SearchConfig {
        restarts: 64,
        ..SearchConfig::default()
    };
    for seed in 1..=10 {
        let a = make_random_algebra(3, seed, 1.0).unwrap();
        let found = find_idempotents(&a, &cfg).unwrap();
        assert!(found.nil_squares.is_empty(), "seed {seed}");
        assert!(!found.idempotents.is_empty(), "seed {seed}");
    }
}

#[test]
fn nil_square_is_reported() {
    // u = x1^2 x2 / 2 has x = e2 with x^2 = 0.
    let u = CubicForm::from_entries(2, [(0, 0, 1, 1.0)]).unwrap();
    let a = algebra_from_cubic(&u, &BilinearForm::identity(2).unwrap()).unwrap();
    let found = find_idempotents(&a, &SearchConfig::default()).unwrap();
    assert!(!found.nil_squares.is_empty());
    for x in &found.nil_squares {
        assert!(a.square(&x.vector()).unwrap().norm() <= 1e-8);
    }
}

#[test]
fn non_identity_gram_idempotents_are_idempotent() {
    let u = random_cubic(3, 8, 1.0).unwrap();
    let g = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, -0.1, 0.3, 1.0, 0.2, -0.1, 0.2, 0.7]);
    let form = BilinearForm::new(g).unwrap();
    let a: MetrisedAlgebra = algebra_from_cubic(&u, &form).unwrap();
    let found = find_idempotents(&a, &SearchConfig::default()).unwrap();
    assert!(!found.idempotents.is_empty());
    for r in &found.idempotents {
        let c = r.vector();
        assert!((a.square(&c).unwrap() - &c).amax() <= 1e-8);
    }
}
