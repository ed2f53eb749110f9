use cdmos::cli::parse_problem;
use cdmos::hierarchy::{lower_bound, upper_bound, HierarchyOptions, SemialgebraicSet};
use cdmos::measures::{dirac_moments, integrate, MomentSequence, ReferenceMeasure};
use cdmos::momentmat::localizing_matrix;
use cdmos::orthobasis::OrthoBasis;
use cdmos::polyring::{binomial, parse_polynomial, MonomialBasis, Polynomial, VarTable};
use cdmos::sdp::{solve_sdp, LmiBlockBuilder, SdpOptions, SdpProblem, SdpStatus};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, len)
}

fn poly_strategy(n: usize, deg: u32) -> impl Strategy<Value = Polynomial> {
    let basis = MonomialBasis::new(n, deg).unwrap();
    coeffs(basis.len()).prop_map(move |c| {
        // round, so that some coefficients vanish and printing stays short
        let c: Vec<f64> = c.iter().map(|v| (v * 4.0).round() / 4.0).collect();
        Polynomial::from_coeff_vector(&basis, &c).unwrap()
    })
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #[test]
    fn eval_is_a_ring_homomorphism(
        p in poly_strategy(2, 3),
        q in poly_strategy(2, 2),
        x in point(2),
    ) {
        let (pv, qv) = (p.eval(&x).unwrap(), q.eval(&x).unwrap());
        prop_assert!(((&p * &q).eval(&x).unwrap() - pv * qv).abs() < 1e-10);
        prop_assert!(((&p + &q).eval(&x).unwrap() - (pv + qv)).abs() < 1e-12);
        prop_assert!(((&p - &p).is_zero()));
    }

    #[test]
    fn basis_size_and_order(n in 1usize..4, t in 0u32..5) {
        let b = MonomialBasis::new(n, t).unwrap();
        prop_assert_eq!(b.len() as u64, binomial((n as u64) + t as u64, t as u64));
        for w in b.indices().windows(2) {
            prop_assert!(w[0] < w[1]);
            prop_assert!(w[0].degree() <= w[1].degree());
        }
        for (i, a) in b.indices().iter().enumerate() {
            prop_assert_eq!(b.position(a), Some(i));
        }
    }

    #[test]
    fn display_parse_round_trip(p in poly_strategy(3, 3)) {
        let again = parse_polynomial(&p.to_string(), &VarTable::canonical(3)).unwrap();
        prop_assert_eq!(again, p);
    }

    #[test]
    fn dirac_localizing_is_rank_one(g in poly_strategy(2, 2), x in point(2)) {
        let y = dirac_moments(&x, 6).unwrap();
        let m = localizing_matrix(&y, &g, 2).unwrap().matrix;
        let v = DVector::from_vec(MonomialBasis::new(2, 2).unwrap().eval_monomials(&x));
        let expect = &v * v.transpose() * g.eval(&x).unwrap();
        prop_assert!((m - expect).amax() < 1e-10);
    }

    #[test]
    fn kernel_dominates_constant(x in point(2), t in 0u32..5) {
        let mu = ReferenceMeasure::symmetric_box(2).unwrap();
        let b = OrthoBasis::build(&mu, t).unwrap();
        // T_0 = 1, so K_t(x, x) >= 1 and the Christoffel function is <= 1
        prop_assert!(b.cd_kernel(&x, &x).unwrap() >= 1.0 - 1e-12);
        prop_assert!(b.christoffel(&x).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn change_of_basis_identity(t in 1u32..4, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mu = ReferenceMeasure::uniform_box(vec![-1.0, 0.0], vec![2.0, 1.0]).unwrap();
        let basis = OrthoBasis::build(&mu, 2 * t).unwrap();
        let mb = MonomialBasis::new(2, 2 * t).unwrap();
        let f: Vec<f64> = (0..mb.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let yv: Vec<f64> = (0..mb.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fp = Polynomial::from_coeff_vector(&mb, &f).unwrap();
        let y = MomentSequence::new(mb, yv.clone()).unwrap();
        let sigma = basis.to_ortho_coords(&y).unwrap();
        let ft = basis.expand(&fp).unwrap();
        let lhs: f64 = ft.iter().zip(&sigma).map(|(a, b)| a * b).sum();
        let rhs: f64 = f.iter().zip(&yv).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-9, "{} vs {}", lhs, rhs);
        // and back
        let back = basis.from_ortho_coords(&sigma).unwrap();
        for (a, b) in back.values().iter().zip(&yv) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sdp_weak_duality_and_feasibility(seed in any::<u64>(), dim in 2usize..5, vars in 1usize..4) {
        // F(y) = I + sum y_k F_k is feasible at 0; c_k = <F_k, X0> with
        // X0 > 0 makes the dual feasible, so the problem is bounded.
        let mut rng = StdRng::seed_from_u64(seed);
        let mut b = LmiBlockBuilder::new(dim);
        for i in 0..dim {
            b.add(None, i, i, 1.0);
        }
        let mut fk = Vec::new();
        for k in 0..vars {
            let mut m = DMatrix::zeros(dim, dim);
            for i in 0..dim {
                for j in i..dim {
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                    b.add_sym(Some(k), i, j, v);
                }
            }
            fk.push(m);
        }
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        let x0 = &a * a.transpose() + DMatrix::identity(dim, dim) * 0.1;
        let c: Vec<f64> = fk.iter().map(|f| f.dot(&x0)).collect();
        let mut p = SdpProblem::new(c);
        p.add_block(b.finish().unwrap()).unwrap();
        let sol = solve_sdp(&p, &SdpOptions::default()).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal);
        let scale = 1.0 + sol.primal_objective.abs();
        prop_assert!(sol.dual_objective <= sol.primal_objective + 1e-7 * scale);
        prop_assert!((sol.dual_objective - sol.primal_objective).abs() <= 1e-6 * scale);
        let y = DVector::from_vec(sol.y.clone());
        let lam = cdmos::sdp::linalg::min_eigenvalue(&p.blocks()[0].eval(&y)).unwrap();
        prop_assert!(lam >= -1e-7);
        let xl = cdmos::sdp::linalg::min_eigenvalue(&sol.dual_blocks[0]).unwrap();
        prop_assert!(xl >= -1e-7);
    }

    #[test]
    fn univariate_sandwich(coeffs in prop::collection::vec(-1.0f64..1.0, 5)) {
        let basis = MonomialBasis::new(1, 4).unwrap();
        let f = Polynomial::from_coeff_vector(&basis, &coeffs).unwrap();
        let set = SemialgebraicSet::box_set(&[-1.0], &[1.0]).unwrap();
        let mu = ReferenceMeasure::symmetric_box(1).unwrap();
        let fstar = (0..=4000)
            .map(|i| f.eval(&[-1.0 + i as f64 / 2000.0]).unwrap())
            .fold(f64::INFINITY, f64::min);
        let opts = HierarchyOptions::default();
        let mut prev_rho = f64::NEG_INFINITY;
        let mut prev_u = f64::INFINITY;
        for t in 2..=3 {
            let r = lower_bound(&f, &set, t, None, &opts).unwrap();
            let u = upper_bound(&f, &mu, t).unwrap().u;
            prop_assert!(r.rho <= fstar + 1e-6, "rho {} > f* {}", r.rho, fstar);
            prop_assert!(u >= fstar - 1e-9);
            prop_assert!(r.rho >= prev_rho - 1e-7 && u <= prev_u + 1e-7);
            prop_assert!(r.certificate.residual(&f) <= 1e-6);
            // univariate: Putinar with a quadratic is exact from t = 2
            prop_assert!((r.rho - fstar).abs() <= 1e-5, "rho {} f* {}", r.rho, fstar);
            for m in r.exactness.minimizers() {
                prop_assert!((m.value - r.rho).abs() <= 1e-6);
                prop_assert!(m.point[0].abs() <= 1.0 + 1e-6);
            }
            prev_rho = r.rho;
            prev_u = u;
        }
    }

    #[test]
    fn upper_density_is_valid(f in poly_strategy(2, 2), t in 0u32..4, seed in any::<u64>()) {
        let mu = ReferenceMeasure::symmetric_box(2).unwrap();
        let r = upper_bound(&f, &mu, t).unwrap();
        let mass = integrate(&r.sos_density, &mu.moments(2 * t)).unwrap();
        prop_assert!((mass - 1.0).abs() <= 1e-8);
        let fs = integrate(&(&f * &r.sos_density), &mu.moments(2 * t + 2)).unwrap();
        prop_assert!((fs - r.u).abs() <= 1e-8);
        let mut rng = StdRng::seed_from_u64(seed);
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            prop_assert!(r.density_at(&x).unwrap() >= 0.0);
        }
    }

    #[test]
    fn problem_file_round_trip(
        f in poly_strategy(2, 3),
        g in poly_strategy(2, 2),
        a in 0u32..3,
        extra in 0u32..3,
        aliases in any::<bool>(),
    ) {
        let names = if aliases { "variables = u, v\n" } else { "variables = x1, x2\n" };
        let text = format!(
            "{names}objective = {f}\nconstraint = {g} >= 0\nt = {a}..{}\n",
            a + extra
        );
        // objective and constraint are printed over x1, x2: canonical names stay valid
        let pf = parse_problem(&text).unwrap();
        let again = parse_problem(&pf.to_string()).unwrap();
        prop_assert_eq!(again, pf);
    }
}
