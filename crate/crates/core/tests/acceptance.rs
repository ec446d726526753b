//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use cubalg::algebra::{canonical_triples, check_structure, cubic_from_algebra};
use cubalg::calculus::{central_gradient, central_jacobian, eval_f, relative_error};
use cubalg::commands::{
    cmd_check, cmd_decompose, cmd_gap_demo, cmd_generate, cmd_idempotents, Family,
};
use cubalg::peirce::{decide_decomposable, Verdict};
use cubalg::search::{restart_point, StationaryVerdict};
use cubalg::zoo::{counterexample_oracle, hadamard_oracle, random_cubic};
use cubalg::{
    algebra_from_cubic, corollary_unit_split, demonstrate_oddness_gap, find_idempotents, grad_u,
    hess_u, make_counterexample, make_hadamard, make_random_algebra, maximize_on_sphere,
    stationary_to_idempotent, BilinearForm, CounterexampleParams, CubicForm, SearchConfig, Vector,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, ok_detail: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            pass: true,
            detail: ok_detail,
        }
    } else {
        Outcome {
            pass: false,
            detail: failures.join("; "),
        }
    }
}

fn xi_half(n: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[0] = 0.5;
    v
}

/// A seeded SPD Gram matrix `(M M^T + I/2) / 1.5`.
fn spd_gram(n: usize, seed: u64) -> DMatrix<f64> {
    let cols: Vec<Vector> = (0..n).map(|i| restart_point(n, seed, i as u64)).collect();
    let m = DMatrix::from_columns(&cols);
    (&m * m.transpose() + DMatrix::identity(n, n) * 0.5) / (1.0 + 0.5)
}

// Criterion 1: the counterexample family has exactly one nonzero idempotent.
fn counterexample_reproduction() -> Outcome {
    let cfg = SearchConfig::default();
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    for n in 2..=5 {
        let p = CounterexampleParams::with_defaults(n).unwrap();
        let a = make_counterexample(&p).unwrap();
        let start = Instant::now();
        let found = find_idempotents(&a, &cfg).unwrap();
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        let oracle = counterexample_oracle(&p);
        if oracle != vec![xi_half(n)] {
            failures.push(format!(
                "n={n}: oracle returned {} idempotents",
                oracle.len()
            ));
        }
        if found.idempotents.len() != 1 {
            failures.push(format!(
                "n={n}: search found {} idempotents",
                found.idempotents.len()
            ));
            continue;
        }
        let dist = (found.idempotents[0].vector() - &oracle[0]).amax();
        if dist > 1e-7 {
            failures.push(format!("n={n}: idempotent off the oracle by {dist:e}"));
        }
        if elapsed > Duration::from_secs(10) {
            failures.push(format!("n={n}: took {elapsed:?}"));
        }
    }
    outcome(
        failures,
        format!("n = 2..5: single idempotent (1/2, 0, ...) within 1e-7; slowest {slowest:.2?}"),
    )
}

// Criterion 2: the maximizer/minimizer pair of f is anti-collinear.
fn oddness_gap() -> Outcome {
    let cfg = SearchConfig::default();
    let mut failures = Vec::new();
    let mut worst = (0.0f64, 0.0f64);
    for n in 2..=5 {
        let a = make_counterexample(&CounterexampleParams::with_defaults(n).unwrap()).unwrap();
        let g = demonstrate_oddness_gap(&a, &cfg).unwrap();
        worst = (worst.0.max(g.pair_distance), worst.1.max(g.odd_value_error));
        if g.pair_distance > 1e-6 {
            failures.push(format!("n={n}: |x- + x+| = {:e}", g.pair_distance));
        }
        if g.odd_value_error > 1e-10 {
            failures.push(format!("n={n}: |f(x-) + f(x+)| = {:e}", g.odd_value_error));
        }
    }
    outcome(
        failures,
        format!(
            "max |x- + x+| = {:.1e} <= 1e-6, max |f(x-) + f(x+)| = {:.1e} <= 1e-10",
            worst.0, worst.1
        ),
    )
}

// Criterion 3: global maxima give extremal idempotents with simple eigenvalue 1.
fn global_maxima_are_extremal() -> Outcome {
    let cfg = SearchConfig::default();
    let mut failures = Vec::new();
    let mut worst_top = f64::NEG_INFINITY;
    for seed in 1..=50u64 {
        let n = 3 + (seed % 4) as usize;
        let a = make_random_algebra(n, seed, 1.0).unwrap();
        if a.is_zero() {
            failures.push(format!("seed {seed}: zero algebra"));
            continue;
        }
        let out = maximize_on_sphere(&a, &cfg).unwrap();
        let Some(top) = out.global_max.map(|i| &out.points[i]) else {
            failures.push(format!("seed {seed}: no stationary point"));
            continue;
        };
        if top.lambda <= 0.0 {
            failures.push(format!("seed {seed}: lambda = {}", top.lambda));
            continue;
        }
        match stationary_to_idempotent(&a, top, &cfg).unwrap() {
            StationaryVerdict::Idempotent(rec) => {
                let max = rec
                    .spectrum_on_perp
                    .first()
                    .copied()
                    .unwrap_or(f64::NEG_INFINITY);
                worst_top = worst_top.max(max);
                if rec.residual > 1e-8 {
                    failures.push(format!("seed {seed}: residual {:e}", rec.residual));
                }
                if max > 0.5 + 1e-6 {
                    failures.push(format!("seed {seed}: max eigenvalue on c-perp {max}"));
                }
                if !rec.eigenvalue_one_simple {
                    failures.push(format!("seed {seed}: eigenvalue 1 not simple"));
                }
                if !rec.extremal || !rec.hessian_agrees {
                    failures.push(format!("seed {seed}: extremality certificate inconsistent"));
                }
            }
            other => failures.push(format!("seed {seed}: {other:?}")),
        }
    }
    outcome(
        failures,
        format!("50 random algebras, n = 3..6: all extremal; largest L_c on c-perp {worst_top:.4}"),
    )
}

fn ones(c: &Vector) -> usize {
    c.iter().filter(|x| **x == 1.0).count()
}

// Criterion 4: decomposability exactly when dim V_c(1) >= 2.
fn decomposable_iff_open_one_space() -> Outcome {
    let cfg = SearchConfig::default();
    let mut failures = Vec::new();
    let mut checked = 0;
    for n in 2..=4 {
        let a = make_hadamard(n).unwrap();
        for c in hadamard_oracle(n) {
            checked += 1;
            let r = decide_decomposable(&a, &c, &cfg).unwrap();
            let tag = format!("hadamard n={n} c={:?}", c.as_slice());
            if r.dim_v1 != ones(&c) {
                failures.push(format!("{tag}: dim V_c(1) = {}", r.dim_v1));
            }
            match (r.dim_v1 >= 2, r.verdict, &r.decomposition) {
                (true, Verdict::Decomposable, Some(d)) => {
                    let ok = d.sum_error <= 1e-8
                        && d.residual_c1 <= 1e-8
                        && d.residual_c2 <= 1e-8
                        && d.cross_product <= 1e-8
                        && d.verified();
                    if !ok {
                        failures.push(format!("{tag}: pair failed verification {d:?}"));
                    }
                }
                (false, Verdict::Indecomposable, None) => {}
                (_, v, _) => failures.push(format!("{tag}: verdict {v:?}")),
            }
        }
    }
    for n in 2..=5 {
        let p = CounterexampleParams::with_defaults(n).unwrap();
        let a = make_counterexample(&p).unwrap();
        let c = xi_half(n);
        let r = decide_decomposable(&a, &c, &cfg).unwrap();
        if r.dim_v1 != 1 || r.verdict != Verdict::Indecomposable {
            failures.push(format!(
                "counterexample n={n}: dim {} verdict {:?}",
                r.dim_v1, r.verdict
            ));
        }
        // Exhaustive: a splitting would need two nonzero idempotents from the
        // oracle's complete list summing to c.
        let all = counterexample_oracle(&p);
        for c1 in &all {
            for c2 in &all {
                if (c1 + c2 - &c).amax() <= 1e-8 {
                    failures.push(format!("counterexample n={n}: oracle splits c"));
                }
            }
        }
    }
    outcome(
        failures,
        format!(
            "{checked} Hadamard idempotents (n = 2..4) and 4 counterexamples classified correctly"
        ),
    )
}

// Criterion 5: the unit of a unital algebra splits.
fn unit_splits() -> Outcome {
    let cfg = SearchConfig::default();
    let mut failures = Vec::new();
    for n in 2..=4 {
        let a = make_hadamard(n).unwrap();
        let Some(s) = corollary_unit_split(&a, &cfg).unwrap() else {
            failures.push(format!("n={n}: no split"));
            continue;
        };
        let e = Vector::from_column_slice(&s.unit);
        let cp = Vector::from_column_slice(&s.c_prime);
        let comp = Vector::from_column_slice(&s.complement);
        if s.residual_c_prime > 1e-8 || s.residual_complement > 1e-8 {
            failures.push(format!(
                "n={n}: residuals {} {}",
                s.residual_c_prime, s.residual_complement
            ));
        }
        let distinct = [&e, &cp, &comp];
        for (i, x) in distinct.iter().enumerate() {
            if x.amax() <= 1e-8 {
                failures.push(format!("n={n}: zero idempotent"));
            }
            for y in &distinct[i + 1..] {
                if (*x - *y).amax() <= 1e-8 {
                    failures.push(format!("n={n}: idempotents coincide"));
                }
            }
        }
    }
    outcome(
        failures,
        "n = 2..4: unit = c' + (unit - c') with three distinct idempotents".into(),
    )
}

/// Independent route to `x^2` and `L_x` straight from the tensor entries:
/// `(xy)_k = sum_m Ginv[k][m] T[i][j][m] x_i y_j`.
fn tensor_square_and_mult(
    u: &CubicForm,
    gram: &DMatrix<f64>,
    x: &Vector,
) -> (Vector, DMatrix<f64>) {
    let n = u.dim();
    let ginv = gram.clone().try_inverse().unwrap();
    let lower = DMatrix::from_fn(n, n, |m, j| {
        (0..n).map(|i| u.entry(i, j, m) * x[i]).sum::<f64>()
    });
    let l = &ginv * lower;
    let sq = &l * x;
    (sq, l)
}

// Criterion 6: derivative identities and finite-difference agreement.
fn calculus_identities() -> Outcome {
    let h = 1e-5;
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 6];
    let mut literal_dev: f64 = 0.0;
    let cfg = SearchConfig {
        restarts: 50,
        ..SearchConfig::default()
    };
    for seed in 1..=100u64 {
        let n = 2 + (seed % 5) as usize;
        let u = random_cubic(n, seed, 1.0).unwrap();
        let gram = if seed % 2 == 0 {
            spd_gram(n, seed + 7000)
        } else {
            DMatrix::identity(n, n)
        };
        let form = BilinearForm::new(gram.clone()).unwrap();
        let a = algebra_from_cubic(&u, &form).unwrap();
        let x = restart_point(n, seed + 1000, 0) * (0.5 + (seed % 7) as f64 * 0.25);

        let (sq, l) = tensor_square_and_mult(&u, &gram, &x);
        let g = grad_u(&a, &x).unwrap();
        let hm = hess_u(&a, &x).unwrap();
        let e0 = relative_error(g.as_slice(), (sq * 0.5).as_slice());
        let e1 = relative_error(hm.as_slice(), l.as_slice());

        let uval = |p: &Vector| u.value(p).unwrap();
        let fd_g = central_gradient(uval, &x, h);
        let e2 = relative_error((&gram * &g).as_slice(), fd_g.as_slice()).max(relative_error(
            (&gram * &hm).as_slice(),
            central_jacobian(|p| &gram * grad_u(&a, p).unwrap(), &x, h).as_slice(),
        ));

        // f in orthonormal coordinates y = R x: f(y) = <x^2, x> / |x|^3.
        let fy = |y: &Vector| {
            let xx = form.from_orthonormal(y);
            6.0 * u.value(&xx).unwrap() / form.norm(&xx).powi(3)
        };
        let y = form.to_orthonormal(&x);
        let ev = eval_f(&a, &x).unwrap();
        let e3 = relative_error(
            ev.gradient.as_slice(),
            central_gradient(fy, &y, h).as_slice(),
        );
        let e4 = relative_error(
            ev.hessian.as_slice(),
            central_jacobian(
                |p| eval_f(&a, &form.from_orthonormal(p)).unwrap().gradient,
                &y,
                h,
            )
            .as_slice(),
        );

        for (w, e) in worst.iter_mut().zip([e0, e1, e2, e3, e4]) {
            *w = w.max(e);
        }
        if e0 > 1e-12 || e1 > 1e-12 {
            failures.push(format!("seed {seed}: closed forms differ ({e0:e}, {e1:e})"));
        }
        if e2 > 1e-6 || e3 > 1e-6 || e4 > 1e-6 {
            failures.push(format!(
                "seed {seed}: finite differences ({e2:e}, {e3:e}, {e4:e})"
            ));
        }

        // Hessian of f restricted to c-perp at an extremal idempotent.
        if seed <= 25 {
            let out = maximize_on_sphere(&a, &cfg).unwrap();
            let top = &out.points[out.global_max.unwrap()];
            let StationaryVerdict::Idempotent(rec) =
                stationary_to_idempotent(&a, top, &cfg).unwrap()
            else {
                failures.push(format!("seed {seed}: no idempotent"));
                continue;
            };
            let c = rec.vector();
            let yc = form.to_orthonormal(&c);
            let norm = yc.norm();
            let hc = eval_f(&a, &c).unwrap().hessian;
            let lc = form.operator_to_orthonormal(&a.left_mult_matrix(&c).unwrap());
            let proj = DMatrix::identity(n, n) - (&yc * yc.transpose()) / (norm * norm);
            let restricted = &proj * &hc * &proj;
            let base = &proj * (lc * 2.0 - DMatrix::identity(n, n)) * &proj * 3.0;
            let expected = &base / norm.powi(3);
            let dev = relative_error(restricted.as_slice(), expected.as_slice());
            worst[5] = worst[5].max(dev);
            if dev > 1e-8 {
                failures.push(format!("seed {seed}: restricted Hessian off by {dev:e}"));
            }
            literal_dev = literal_dev.max(relative_error(
                restricted.as_slice(),
                (&base / norm).as_slice(),
            ));
        }
    }
    println!(
        "       note: restricted Hessian vs 3(2L_c - 1)/|c| (without the |c|^-2 factor): max deviation {literal_dev:.2e}"
    );
    outcome(
        failures,
        format!(
            "100 pairs: |grad_u - x^2/2| {:.1e}, |hess_u - L_x| {:.1e}, u-FD {:.1e}, f-grad FD {:.1e}, f-hess FD {:.1e}; c-perp Hessian = 3(2L_c - 1)/|c|^3 to {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4], worst[5]
        ),
    )
}

// Criterion 7: structural invariants, round trip, non-identity Gram.
fn structural_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = [0.0f64; 4];
    let mut algebras: Vec<(String, CubicForm, BilinearForm)> = Vec::new();
    for seed in 1..=60u64 {
        let n = 1 + (seed % 8) as usize;
        let u = random_cubic(n, seed, 1.0).unwrap();
        let gram = if seed % 3 == 0 {
            spd_gram(n, seed + 500)
        } else {
            DMatrix::identity(n, n)
        };
        algebras.push((
            format!("random seed {seed}"),
            u,
            BilinearForm::new(gram).unwrap(),
        ));
    }
    for n in 2..=5 {
        let p = CounterexampleParams::with_defaults(n).unwrap();
        algebras.push((
            format!("counterexample n={n}"),
            cubalg::zoo::counterexample_cubic(&p),
            BilinearForm::identity(n).unwrap(),
        ));
        let h = make_hadamard(n).unwrap();
        algebras.push((
            format!("hadamard n={n}"),
            cubic_from_algebra(&h),
            BilinearForm::identity(n).unwrap(),
        ));
    }
    let mut non_identity = 0;
    for (tag, u, form) in &algebras {
        if !form.is_identity() {
            non_identity += 1;
        }
        let a = algebra_from_cubic(u, form).unwrap();
        let r = check_structure(&a);
        let back = cubic_from_algebra(&a);
        let rt = u
            .coeffs()
            .iter()
            .zip(back.coeffs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        for (w, e) in
            worst
                .iter_mut()
                .zip([r.commutativity, r.associativity, r.self_adjointness, rt])
        {
            *w = w.max(e);
        }
        if !(r.commutativity <= 1e-9 && r.associativity <= 1e-9 && r.self_adjointness <= 1e-9) {
            failures.push(format!("{tag}: {r:?}"));
        }
        if rt > 1e-10 {
            failures.push(format!("{tag}: round trip {rt:e}"));
        }
        // <xy, z> against the tensor contraction on a basis sweep.
        let n = u.dim();
        for (i, j, k) in canonical_triples(n) {
            let e = |t| Vector::from_fn(n, |r, _| (r == t) as u8 as f64);
            let lhs = a.form().inner(&a.multiply(&e(i), &e(j)).unwrap(), &e(k));
            if (lhs - u.entry(i, j, k)).abs() > 1e-9 {
                failures.push(format!("{tag}: <e_i e_j, e_k> != T[i][j][k]"));
                break;
            }
        }
    }
    if non_identity == 0 {
        failures.push("no non-identity Gram matrix exercised".into());
    }
    outcome(
        failures,
        format!(
            "{} algebras ({non_identity} with non-identity Gram): commutativity {:.1e}, associativity {:.1e}, self-adjointness {:.1e}, round trip {:.1e}",
            algebras.len(),
            worst[0],
            worst[1],
            worst[2],
            worst[3]
        ),
    )
}

// Criterion 8: identical inputs produce byte-identical reports.
fn determinism() -> Outcome {
    let mut failures = Vec::new();
    let cfg = SearchConfig {
        seed: 11,
        ..SearchConfig::default()
    };
    let files = [
        cmd_generate(&Family::Counterexample { n: 3, a: None }).unwrap(),
        cmd_generate(&Family::Hadamard { n: 3 }).unwrap(),
        cmd_generate(&Family::Random {
            n: 4,
            seed: 7,
            scale: 1.0,
        })
        .unwrap(),
    ];
    let mut compared = 0;
    for text in &files {
        let runs = |_: usize| {
            vec![
                cmd_check(text, &cfg).text,
                cmd_idempotents(text, &cfg).text,
                cmd_gap_demo(text, &cfg).text,
            ]
        };
        let (first, second) = (runs(0), runs(1));
        compared += first.len();
        if first != second {
            failures.push("in-process reports differ between runs".into());
        }
    }
    let had = &files[1];
    if cmd_decompose(had, &cfg, "1,1,1").text != cmd_decompose(had, &cfg, "1,1,1").text {
        failures.push("decompose reports differ".into());
    }

    // The binary, twice, on the same file.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("random.json");
    std::fs::write(&path, &files[2]).unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_cubalg"))
            .args(["idempotents", path.to_str().unwrap(), "--seed", "3"])
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    compared += 1;
    if a.stdout != b.stdout || a.status.code() != b.status.code() || a.stdout.is_empty() {
        failures.push("CLI reports differ between runs".into());
    }
    let gen = || {
        Command::new(env!("CARGO_BIN_EXE_cubalg"))
            .args(["generate", "random", "--n", "3", "--seed", "7"])
            .output()
            .unwrap()
            .stdout
    };
    if gen() != gen() {
        failures.push("generate output differs between runs".into());
    }
    outcome(failures, format!("{compared} report pairs byte-identical"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("1 counterexample reproduction", counterexample_reproduction),
        ("2 oddness gap", oddness_gap),
        ("3 extremality of global maxima", global_maxima_are_extremal),
        (
            "4 decomposability iff dim V_c(1) >= 2",
            decomposable_iff_open_one_space,
        ),
        ("5 unit splitting", unit_splits),
        ("6 calculus identities", calculus_identities),
        ("7 structural suite", structural_suite),
        ("8 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] criterion {name}: {} ({:.2?})",
            o.detail,
            start.elapsed()
        );
        if !o.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
