use largeparam::fixedpoint::{solve, volterra_residual, SolveOptions};
use largeparam::olver::{normalize_to_problem, remainder_plus, ComplexPolynomial, CoefficientSequence};
use largeparam::specfun::{example_minus_data, example_reference_minus, example_reference_plus, hyp0f1};
use largeparam::{relative_error, Complex64, LargeParameter, ProblemSpec, RaySegment, RightHandSide};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn lam(re: f64, im: f64) -> LargeParameter {
    LargeParameter::new(c(re, im)).unwrap()
}

fn unit() -> RightHandSide {
    RightHandSide::linear(|_| c(1.0, 0.0))
}

fn within(value: f64, printed: f64, rel: f64) -> bool {
    (value / printed - 1.0).abs() <= rel
}

#[test]
fn plus_solution_matches_hypergeometric_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for l in [lam(5.0, 0.0), lam(100.0, 0.0), lam(25.0, 5.0)] {
        let seg = RaySegment::from_angle(0.0, 1.0).unwrap();
        let p = ProblemSpec::plus(l, seg, c(1.0, 0.0), unit());
        let r = solve(&p, &SolveOptions::with_tol(1e-12, 200)).unwrap();
        assert!(r.converged);
        for _ in 0..20 {
            let z = c(rng.gen_range(0.0..1.0), 0.0);
            let exact = hyp0f1(l.two_lambda(), z).unwrap();
            assert!(relative_error(r.final_iterate().evaluate(z).unwrap(), exact) < 1e-10);
        }
    }
}

#[test]
fn first_table_iterative_cells() {
    let cells = [(5.0, 1, 0.00423127), (5.0, 3, 2.22e-6), (100.0, 1, 0.00001239), (100.0, 5, 2.00e-17)];
    for (l, n, printed) in cells {
        let l = lam(l, 0.0);
        let seg = RaySegment::from_angle(0.0, 1.0).unwrap();
        let p = ProblemSpec::plus(l, seg, c(1.0, 0.0), unit());
        let r = solve(&p, &SolveOptions { min_order: n + 3, ..SolveOptions::default() }).unwrap();
        let exact = example_reference_plus(l, c(1.0, 0.0)).unwrap();
        let err = r.remainder_at_end(n).norm() / exact.norm();
        assert!(within(err, printed, 0.05), "Λ = {:?}, n = {n}: {err}", l.value());
    }
}

#[test]
fn second_table_iterative_cells() {
    let l = lam(5.0, 0.0);
    let (ybar0, y1) = example_minus_data(l).unwrap();
    let p = ProblemSpec::minus(l, c(1.0, 0.0), c(0.5, 0.0), ybar0, y1, unit()).unwrap();
    let r = solve(&p, &SolveOptions { min_order: 8, ..SolveOptions::default() }).unwrap();
    let exact = example_reference_minus(l, c(0.5, 0.0)).unwrap();
    for (n, printed) in [(1, 0.00080406), (3, 3.56e-8), (5, 2.86e-13)] {
        let err = r.remainder_at_end(n).norm() / exact.norm();
        assert!(within(err, printed, 0.05), "n = {n}: {err}");
    }
}

#[test]
fn first_table_olver_cell() {
    let l = lam(5.0, 0.0);
    let seg = RaySegment::from_angle(0.0, 1.0).unwrap();
    let p = ProblemSpec::plus(l, seg, c(1.0, 0.0), unit());
    let seq = CoefficientSequence::polynomial(&ComplexPolynomial::one(), 6);
    let exact = example_reference_plus(l, c(1.0, 0.0)).unwrap();
    let err = remainder_plus(&seq, &p, 4, &SolveOptions::default()).unwrap().norm() / exact.norm();
    assert!(within(err, 0.00010294, 0.01), "{err}");
    // The remainder solve agrees with direct evaluation where cancellation is mild.
    let approx = normalize_to_problem(&seq, l, &p, 4).unwrap();
    let direct = relative_error(approx.eval(c(1.0, 0.0)).unwrap(), exact);
    assert!((direct / err - 1.0).abs() < 1e-6);
}

#[test]
fn nonlinear_theorem_checks() {
    for l in [10.0, 50.0] {
        let l = lam(l, 0.0);
        let seg = RaySegment::from_angle(0.0, 1.0).unwrap();
        let rhs = RightHandSide::nonlinear(|_, y: Complex64| y.cos(), 1.0);
        let p = ProblemSpec::plus(l, seg, c(0.0, 0.0), rhs);
        let r = solve(&p, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        let ratio = 2.0 / l.two_lambda_minus_one().norm() * 1.01;
        for w in r.increments.windows(2) {
            assert!(w[1] <= ratio * w[0] + f64::MIN_POSITIVE);
        }
        assert!(volterra_residual(&p, &r).unwrap() < 1e-9);
    }
}
