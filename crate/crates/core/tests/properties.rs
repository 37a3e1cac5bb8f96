mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use psd_sosc::cone::{self, dist_psd, normal_cone_contains, project_psd, tangent_cone_contains};
use psd_sosc::nlsdp::{NlsdpProblem, QuadraticMatrixMap, QuadraticScalar};
use psd_sosc::random::{gaussian_sym, gaussian_vector, random_psd, stream, uniform_sym, with_random_eigenbasis};
use psd_sosc::sosc::{
    self, check_sosc, margin_breakdown, sosc_margin, verify_growth, PointContext, SoscOptions, Verdict,
    DEFAULT_CERT_TOL, DEFAULT_TOL,
};
use psd_sosc::subderivative::{
    sample_difference_quotients, schur_feasibility, second_subderivative, SamplingOptions,
};
use psd_sosc::symmat::{
    conjugate, conjugate_inverse, eigen_decompose_auto, eigen_decompose_with, frobenius_inner, pseudoinverse,
    JacobiOrder,
};
use psd_sosc::SymMat;
use rand::Rng;

fn dense(a: &SymMat) -> DMatrix<f64> {
    a.to_dmatrix()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_round_trip(m in 1usize..=8, seed in any::<u64>()) {
        let y = uniform_sym(m, &mut stream(seed, 0));
        let d = eigen_decompose_auto(&y).unwrap();
        prop_assert!(d.reconstruction_error() <= 1e-8 * y.frobenius_norm().max(1.0));
        prop_assert!(d.orthogonality_error() <= 1e-10);
        prop_assert!(d.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        prop_assert_eq!(d.pi().len() + d.omega().len() + d.negative().len(), m);
    }

    #[test]
    fn conjugation_round_trip(m in 1usize..=8, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let d = eigen_decompose_auto(&uniform_sym(m, &mut rng)).unwrap();
        let a = gaussian_sym(m, &mut rng);
        let back = conjugate_inverse(&conjugate(&a, &d).unwrap(), &d).unwrap();
        prop_assert!((&back - &a).frobenius_norm() <= 1e-10 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn penrose_identities(m in 1usize..=6, k in 1usize..=6, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let g = DMatrix::from_fn(k.min(m), m, |_, _| rng.random_range(-1.0..1.0));
        let y = SymMat::from_dmatrix_symmetrized(&(g.transpose() * g)).unwrap();
        let dag = pseudoinverse(&eigen_decompose_auto(&y).unwrap()).unwrap();
        let (yd, dd) = (dense(&y), dense(&dag));
        prop_assert!((&yd * &dd * &yd - &yd).norm() <= 1e-8 * yd.norm().max(1.0));
        prop_assert!((&dd * &yd * &dd - &dd).norm() <= 1e-8 * dd.norm().max(1.0));
    }

    #[test]
    fn polarity_of_members(m in 2usize..=5, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let rank = rng.random_range(0..m);
        let y = random_psd(m, rank, 0.2, 2.0, &mut rng);
        let d = eigen_decompose_auto(&y).unwrap();
        for _ in 0..8 {
            let v = gaussian_sym(m, &mut rng);
            let ys = gaussian_sym(m, &mut rng).scale(0.1);
            if tangent_cone_contains(&d, &v, DEFAULT_TOL).unwrap() && normal_cone_contains(&d, &ys, DEFAULT_TOL).unwrap() {
                prop_assert!(frobenius_inner(&ys, &v).unwrap() <= 1e-8);
            }
        }
        let t = valid_triple(m, rank, &mut rng);
        let dt = eigen_decompose_auto(&t.y).unwrap();
        prop_assert!(tangent_cone_contains(&dt, &t.v, DEFAULT_TOL).unwrap());
        prop_assert!(normal_cone_contains(&dt, &t.ystar, DEFAULT_TOL).unwrap());
        prop_assert!(frobenius_inner(&t.ystar, &t.v).unwrap() <= 1e-8);
    }

    #[test]
    fn memberships_survive_eigenbasis_ties(seed in any::<u64>(), shuffle in any::<u64>()) {
        let mut rng = stream(seed, 0);
        // repeated positive and zero eigenvalues
        let y = with_random_eigenbasis(&[1.5, 1.5, 0.0, 0.0, 0.0], &mut rng);
        let a = eigen_decompose_with(&y, None, JacobiOrder::Cyclic).unwrap();
        let b = eigen_decompose_with(&y, None, JacobiOrder::Shuffled(shuffle)).unwrap();
        for _ in 0..8 {
            let t = valid_triple(5, 2, &mut rng);
            let v = gaussian_sym(5, &mut rng);
            let ys = t.ystar.clone();
            prop_assert_eq!(tangent_cone_contains(&a, &v, DEFAULT_TOL).unwrap(), tangent_cone_contains(&b, &v, DEFAULT_TOL).unwrap());
            prop_assert_eq!(normal_cone_contains(&a, &ys, DEFAULT_TOL).unwrap(), normal_cone_contains(&b, &ys, DEFAULT_TOL).unwrap());
        }
        let psd_dir = random_psd(5, 3, 0.5, 1.0, &mut rng);
        prop_assert!(tangent_cone_contains(&a, &psd_dir, DEFAULT_TOL).unwrap());
        prop_assert!(tangent_cone_contains(&b, &psd_dir, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn projection_is_nearest(m in 1usize..=5, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let a = gaussian_sym(m, &mut rng);
        let p = project_psd(&a).unwrap();
        prop_assert!(cone::is_psd(&p, 1e-12).unwrap());
        let gap = (&a - &p).frobenius_norm();
        prop_assert!((gap - dist_psd(&a).unwrap()).abs() <= 1e-10);
        for _ in 0..8 {
            let rank = rng.random_range(0..=m);
            let z = random_psd(m, rank, 0.0, 2.0, &mut rng);
            prop_assert!(gap <= (&a - &z).frobenius_norm() + 1e-9);
        }
    }

    #[test]
    fn memberships_are_cones(m in 2usize..=5, seed in any::<u64>(), c in 1e-3f64..1e3) {
        let mut rng = stream(seed, 0);
        let rank = rng.random_range(0..m);
        let y = random_psd(m, rank, 0.2, 2.0, &mut rng);
        let d = eigen_decompose_auto(&y).unwrap();
        let t = valid_triple(m, rank, &mut rng);
        let dt = eigen_decompose_auto(&t.y).unwrap();
        let v = gaussian_sym(m, &mut rng);
        prop_assert_eq!(
            tangent_cone_contains(&d, &v, 0.0).unwrap(),
            tangent_cone_contains(&d, &v.scale(c), 0.0).unwrap()
        );
        prop_assert!(normal_cone_contains(&dt, &t.ystar.scale(c), DEFAULT_TOL * c.max(1.0)).unwrap());
        prop_assert!(tangent_cone_contains(&dt, &t.v.scale(c), DEFAULT_TOL * c.max(1.0)).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subderivative_sign_and_homogeneity(m in 2usize..=5, seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut rng = stream(seed, 0);
        let rank = rng.random_range(1..m);
        let t = valid_triple(m, rank, &mut rng);
        let d = eigen_decompose_auto(&t.y).unwrap();
        let base = second_subderivative(&d, &t.ystar, &t.v, DEFAULT_TOL).unwrap().to_f64();
        prop_assert!(base >= -1e-12);
        prop_assert!((base - t.reference_value()).abs() <= 1e-9 * base.abs().max(1.0));
        let sv = second_subderivative(&d, &t.ystar, &t.v.scale(c), DEFAULT_TOL).unwrap().to_f64();
        let sy = second_subderivative(&d, &t.ystar.scale(c), &t.v, DEFAULT_TOL).unwrap().to_f64();
        prop_assert!((sv - c * c * base).abs() <= 1e-12 * (c * c * base).abs().max(1e-300) + 1e-15);
        prop_assert!((sy - c * base).abs() <= 1e-12 * (c * base).abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn oracle_brackets_closed_form(m in 2usize..=4, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let rank = rng.random_range(1..m);
        let t = valid_triple(m, rank, &mut rng);
        let d = eigen_decompose_auto(&t.y).unwrap();
        let closed = second_subderivative(&d, &t.ystar, &t.v, DEFAULT_TOL).unwrap().to_f64();
        let opts = SamplingOptions { n_samples: 16, seed, ..SamplingOptions::default() };
        let trace = sample_difference_quotients(&t.y, &t.ystar, &t.v, &opts).unwrap();
        // upper side: the extrapolated estimate never undercuts the closed form
        prop_assert!(trace.estimate >= closed - 1e-6);
        prop_assert!((trace.recovery_limit.unwrap() - closed).abs() <= 1e-6);
        // lower side: raw quotients stay above closed - C t, with the slope C fitted
        // on the coarse half; a gap that does not shrink linearly breaks this on the fine half
        let mut ts: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
        ts.sort_by(|a, b| a.total_cmp(b));
        ts.dedup();
        let cut = ts[ts.len() / 2];
        let fitted = trace
            .samples
            .iter()
            .filter(|s| s.t >= cut)
            .map(|s| (closed - s.quotient) / s.t)
            .fold(1.0_f64, f64::max)
            * 4.0;
        for s in trace.samples.iter().filter(|s| s.t < cut) {
            prop_assert!(s.quotient >= closed - fitted * s.t - 1e-9, "t = {}, q = {}, closed = {}", s.t, s.quotient, closed);
        }
    }

    #[test]
    fn schur_matches_direct_test(m in 2usize..=5, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let rank = rng.random_range(0..=m);
        let y = random_psd(m, rank, 0.2, 2.0, &mut rng);
        let d = eigen_decompose_auto(&y).unwrap();
        let vp = gaussian_sym(m, &mut rng);
        let t = 10f64.powf(rng.random_range(-3.0..0.0));
        if let Ok(s) = schur_feasibility(&d, &vp, t, 0.0) {
            let shifted = y.axpy(t, &vp).unwrap();
            let lowest = psd_sosc::symmat::min_eigenvalue(&shifted).unwrap();
            if lowest.abs() > 1e-9 {
                prop_assert_eq!(s, lowest >= 0.0);
            }
        }
    }

    #[test]
    fn quadratic_model_is_exact(n in 1usize..=6, m in 1usize..=6, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let p = random_problem(n, m, &mut rng);
        let x = gaussian_vector(n, &mut rng);
        let u = gaussian_vector(n, &mut rng);
        let xu: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + b).collect();
        let g = p.grad_f(&x).unwrap();
        let h = p.hess_f();
        let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| u[i] * h.get(i, j) * u[j]).sum();
        let taylor = p.eval_f(&x).unwrap() + g.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() + 0.5 * quad;
        prop_assert!((p.eval_f(&xu).unwrap() - taylor).abs() <= 1e-10 * taylor.abs().max(1.0));

        let fx = p.eval_constraint(&x).unwrap();
        let df = p.constraint_derivative(&x, &u).unwrap();
        let d2 = p.constraint_second_derivative(&u).unwrap();
        let predicted = fx.try_add(&df).unwrap().axpy(0.5, &d2).unwrap();
        let actual = p.eval_constraint(&xu).unwrap();
        prop_assert!((&actual - &predicted).frobenius_norm() <= 1e-10 * actual.frobenius_norm().max(1.0));

        let ys = gaussian_sym(m, &mut rng);
        let adj = p.constraint_adjoint(&x, &ys).unwrap();
        let lhs = frobenius_inner(&ys, &df).unwrap();
        let rhs: f64 = adj.iter().zip(&u).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn margin_scales_quadratically(seed in any::<u64>(), c in 0.05f64..20.0) {
        let mut rng = stream(seed, 0);
        let m = rng.random_range(2..=4);
        let t = valid_triple(m, rng.random_range(1..m), &mut rng);
        let n = rng.random_range(1..=4);
        let (p, u) = problem_through_triple(&t, n, &mut rng);
        let cand = sosc::MultiplierCandidate {
            alpha: rng.random_range(0.0..2.0),
            ystar: t.ystar.clone(),
            stationarity_residual: 0.0,
            normal_cone_slack: 0.0,
        };
        let x = vec![0.0; n];
        let base = sosc_margin(&p, &x, &u, &cand, 1e-7).unwrap();
        let cu: Vec<f64> = u.iter().map(|v| c * v).collect();
        let scaled = sosc_margin(&p, &x, &cu, &cand, 1e-7).unwrap();
        let ctx = PointContext::new(&p, &x, DEFAULT_TOL, None).unwrap();
        let b = margin_breakdown(&p, &ctx, &x, &u, &cand, 1e-7).unwrap();
        let scale = b.hessian_term.abs().max(b.curvature_term.abs()).max(1e-300);
        prop_assert!((scaled - c * c * base).abs() <= 1e-12 * c * c * scale);
    }
}

/// Problem whose origin is a KKT point with multiplier `(1, Y*)` from a random triple.
fn kkt_problem(seed: u64) -> (NlsdpProblem, Vec<f64>) {
    let mut rng = stream(seed, 0);
    let m = rng.random_range(2..=4);
    let rank = rng.random_range(1..m);
    let t = valid_triple(m, rank, &mut rng);
    let n = rng.random_range(1..=3);
    let a: Vec<SymMat> = (0..n).map(|_| gaussian_sym(m, &mut rng)).collect();
    let g: Vec<f64> = a.iter().map(|ai| -frobenius_inner(&t.ystar, ai).unwrap()).collect();
    let f = QuadraticScalar::new(0.0, g, gaussian_sym(n, &mut rng)).unwrap();
    let p = NlsdpProblem::new(f, QuadraticMatrixMap::affine(t.y.clone(), a).unwrap()).unwrap();
    (p, vec![0.0; n])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn certificates_are_sound(seed in any::<u64>()) {
        let (p, x) = kkt_problem(seed);
        let opts = SoscOptions { n_dirs: 32, starts: 8, seed, ..SoscOptions::default() };
        let r = check_sosc(&p, &x, &opts).unwrap();
        prop_assert_eq!(r.directions.len(), r.directions_checked);
        let ctx = PointContext::new(&p, &x, DEFAULT_TOL, None).unwrap();
        for c in &r.certificates {
            let y = &c.multiplier;
            prop_assert!(y.alpha >= 0.0);
            prop_assert!(y.is_nontrivial(DEFAULT_CERT_TOL));
            let grad = p.lagrangian_grad(y.alpha, &x, &y.ystar).unwrap();
            prop_assert!(grad.iter().map(|g| g * g).sum::<f64>().sqrt() <= DEFAULT_CERT_TOL);
            prop_assert!(cone::normal_cone_violation(&ctx.decomposition, &y.ystar).unwrap() <= DEFAULT_CERT_TOL);
            let g = p.constraint_derivative(&x, &c.direction).unwrap();
            prop_assert!(frobenius_inner(&y.ystar, &g).unwrap().abs() <= DEFAULT_CERT_TOL);
            let b = margin_breakdown(&p, &ctx, &x, &c.direction, y, DEFAULT_CERT_TOL).unwrap();
            prop_assert!((b.margin_via_subderivative().unwrap() - b.margin).abs() <= 1e-8);
            prop_assert!((b.margin - c.margin).abs() <= 1e-12 * b.margin.abs().max(1.0));
        }
        if r.verdict == Verdict::VerifiedSampled {
            prop_assert!(r.min_margin.unwrap() > opts.margin_tol);
        }
    }

    #[test]
    fn growth_threshold_semantics(seed in any::<u64>(), beta in 0.0f64..2.0) {
        let (p, x) = kkt_problem(seed);
        let g = verify_growth(&p, &x, 0.05, beta, 200, seed).unwrap();
        prop_assert_eq!(g.violations == 0, g.min_ratio >= beta);
        prop_assert!(g.feasible_violations <= g.feasible_samples);
    }
}

#[test]
fn verified_fixtures_show_growth() {
    for (name, epsilon, beta) in [("p1.json", 0.1, 0.25), ("disk.json", 0.1, 0.1)] {
        let (p, x) = psd_sosc::report::load_problem(&fixture_path(name)).unwrap();
        let r = check_sosc(&p, &x, &SoscOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::VerifiedSampled, "{name}");
        let g = verify_growth(&p, &x, epsilon, beta, 10_000, 3).unwrap();
        assert_eq!(g.violations, 0, "{name}: min ratio {}", g.min_ratio);
    }
}

#[test]
fn check_is_deterministic_across_thread_counts() {
    let (p, x) = kkt_problem(42);
    let opts = SoscOptions { n_dirs: 64, seed: 9, ..SoscOptions::default() };
    let a = check_sosc(&p, &x, &opts).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| check_sosc(&p, &x, &opts).unwrap());
    assert_eq!(a, b);
}
