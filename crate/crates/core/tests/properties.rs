use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use prequant_core::chern::{build_l, ch_line_power, solve_lk, TruncPoly};
use prequant_core::cym::{compute_lambda, lambda_by_quadrature, residual_cym, CymProblem, CymState};
use prequant_core::cym_forms::{omega_alpha_complex, AlphaParams, CymPoint, CymTangent};
use prequant_core::fields::{i_ddbar, integrate, random_field, reference_omega, wedge, ClosedKKSpec, TopForm};
use prequant_core::gma::{residual_integral, GmaProblem};
use prequant_core::higgs::{bracket_phiphidag, hitchin_residual, HiggsPoint, MatField, RankTwoConn};
use prequant_core::moment::{omega_eval, ConnPointU1, TangentU1};
use prequant_core::{ScalarField, TorusGrid};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-20i64..=20, 1i64..=9).prop_map(|(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b)))
}

fn poly(cap: usize) -> impl Strategy<Value = TruncPoly> {
    proptest::collection::vec(small_rational(), cap + 1).prop_map(move |c| TruncPoly::from_coeffs(cap, c))
}

fn factorial(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |a, k| a * BigInt::from(k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncpoly_ring_laws(a in poly(4), b in poly(4), c in poly(4)) {
        prop_assert_eq!(a.try_mul(&b).unwrap(), b.try_mul(&a).unwrap());
        let left = a.try_mul(&b).unwrap().try_mul(&c).unwrap();
        let right = a.try_mul(&b.try_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn build_l_matches_closed_form(n in 1usize..=4, raw in proptest::collection::vec(small_rational(), 4)) {
        let cap = n + 1;
        let lk = solve_lk(n).unwrap();
        // alpha_k = a_k x^k
        let alphas: Vec<TruncPoly> = (1..=n).map(|k| TruncPoly::monomial(cap, k, raw[k - 1].clone())).collect();
        let got = build_l(&lk, &alphas).unwrap();
        let big_n = lk.big_n_rational();
        let mut pow = BigRational::one();
        for _ in 0..=n {
            pow *= &big_n;
        }
        let pre = BigRational::from_integer(factorial(n + 1)) * pow;
        let mut top = BigRational::new(BigInt::one(), BigInt::from(n + 1));
        for k in 1..=n {
            top -= raw[k - 1].clone() / BigRational::from_integer(BigInt::from(n - k + 1));
        }
        for m in 0..=cap {
            let want = if m == cap { &pre * &top } else { BigRational::zero() };
            prop_assert_eq!(got.coeff(m), want);
        }
    }
}

#[test]
fn lk_system_rows_reproduce_monomials() {
    for n in 1..=4 {
        let lk = solve_lk(n).unwrap();
        let cap = n + 1;
        for k in 0..=cap {
            let mut acc = TruncPoly::zero(cap);
            for (j, c) in lk.row_for(k).iter().enumerate() {
                let term = ch_line_power(j as i64 + 1, cap).scale(&BigRational::from_integer(c.clone()));
                acc = acc.try_add(&term).unwrap();
            }
            assert_eq!(acc, TruncPoly::monomial(cap, cap - k, lk.big_n_rational()), "n={n} k={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wedge_bilinear_symmetric(seed in any::<u64>(), s in -2.0f64..2.0) {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut r = rng(seed);
        let a = i_ddbar(&random_field(g, &mut r, 1.0));
        let b = i_ddbar(&random_field(g, &mut r, 1.0));
        let c = reference_omega(g).axpy(1.0, &i_ddbar(&random_field(g, &mut r, 1.0)));
        let ab = wedge(&a, &b).unwrap();
        let ba = wedge(&b, &a).unwrap();
        prop_assert!(ab.axpy(-1.0, &ba).sup_norm() < 1e-13 * ab.sup_norm().max(1.0));
        let lhs = wedge(&a.axpy(s, &c), &b).unwrap();
        let rhs = ab.axpy(s, &wedge(&c, &b).unwrap());
        prop_assert!(lhs.axpy(-1.0, &rhs).sup_norm() < 1e-12 * lhs.sup_norm().max(1.0));
    }

    #[test]
    fn ddbar_is_hermitian_and_exact(seed in any::<u64>(), n in 1usize..=2) {
        let g = TorusGrid::new(n, 16).unwrap();
        let f = i_ddbar(&random_field(g, &mut rng(seed), 1.0));
        prop_assert!(f.hermitian_defect() < 1e-12);
        let top = if n == 1 { f.top_density().unwrap() } else { wedge(&f, &reference_omega(g)).unwrap() };
        prop_assert!(integrate(&top).abs() < 1e-12);
    }

    #[test]
    fn gma_residual_integral_is_cohomological(seed in any::<u64>()) {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut r = rng(seed);
        let specs = vec![
            ClosedKKSpec { k: 1, c: 0.2, eta: random_field(g, &mut r, 0.02) },
            ClosedKKSpec { k: 2, c: 0.3, eta: random_field(g, &mut r, 0.02) },
        ];
        let p = GmaProblem::new(g, specs).unwrap();
        let base = residual_integral(&p, &ScalarField::zeros(g)).unwrap();
        let moved = residual_integral(&p, &random_field(g, &mut r, 0.02)).unwrap();
        prop_assert!((base - moved).abs() < 1e-11);
    }

    #[test]
    fn moment_omega_antisymmetric(seed in any::<u64>(), n in 1usize..=2) {
        let g = TorusGrid::new(n, 8).unwrap();
        let mut r = rng(seed);
        let p = GmaProblem::constant(g, &vec![0.0; n - 1].into_iter().chain([1.0]).collect::<Vec<_>>()).unwrap();
        let at = ConnPointU1::random(g, &mut r, 0.02);
        let x = TangentU1::random(g, &mut r, 1.0);
        let y = TangentU1::random(g, &mut r, 1.0);
        let xy = omega_eval(&p, &at, &x, &y, 1.0).unwrap();
        let yx = omega_eval(&p, &at, &y, &x, 1.0).unwrap();
        prop_assert!((xy + yx).abs() < 1e-12 * xy.abs().max(1.0));
    }

    #[test]
    fn higgs_trace_identities(seed in any::<u64>(), k in 0i64..4, d in -2i64..3) {
        let g = TorusGrid::new(1, 16).unwrap();
        let mut r = rng(seed);
        let phi = HiggsPoint { grid: g, phi: MatField::random(g, &mut r, 1.0) };
        prop_assert!(bracket_phiphidag(&phi).trace_sup() < 1e-13);
        let a = RankTwoConn { grid: g, a: MatField::random(g, &mut r, 0.5), deg: d };
        let res = hitchin_residual(&a, &phi, k, 0).unwrap();
        prop_assert!(res.density.integral_trace().norm() < 1e-11);
    }

    #[test]
    fn cym_topological_integrals(seed in any::<u64>()) {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut r = rng(seed);
        let p = CymProblem::new(g, 0.1, TopForm::from_field(&ScalarField::constant(g, 1.0)), 1).unwrap();
        let p = CymProblem::new(g, 0.1, TopForm::from_field(&ScalarField::constant(g, p.required_eta_mass())), 1).unwrap();
        let s0 = CymState::zero(g);
        let s1 = CymState { phi: random_field(g, &mut r, 0.02), u: random_field(g, &mut r, 0.5) };
        prop_assert!((lambda_by_quadrature(&p, &s1).unwrap() - compute_lambda(&p)).abs() < 1e-11);
        let (a1, a2) = residual_cym(&p, &s0).unwrap();
        let (b1, b2) = residual_cym(&p, &s1).unwrap();
        prop_assert!(integrate(&a1).abs() < 1e-11 && integrate(&b1).abs() < 1e-11);
        prop_assert!((integrate(&a2) - integrate(&b2)).abs() < 1e-11);
    }

    #[test]
    fn omega_alpha_antisymmetric_bilinear(seed in any::<u64>(), s in -2.0f64..2.0) {
        let g = TorusGrid::new(2, 8).unwrap();
        let mut r = rng(seed);
        let at = CymPoint::<Complex64>::random(g, 1, 1, &mut r, 0.3);
        let x = CymTangent::random(g, &mut r, 1.0);
        let y = CymTangent::random(g, &mut r, 1.0);
        let z = CymTangent::random(g, &mut r, 1.0);
        let prm = AlphaParams { big_n: 2.0, alpha: 0.4, lambda: 1.3 };
        let xy = omega_alpha_complex(&at, &x, &y, prm).unwrap();
        let yx = omega_alpha_complex(&at, &y, &x, prm).unwrap();
        prop_assert!((xy + yx).norm() < 1e-12 * xy.norm().max(1.0));
        let xs = CymTangent { e: x.e.axpy(s, &z.e), l: x.l.axpy(s, &z.l) };
        let lhs = omega_alpha_complex(&at, &xs, &y, prm).unwrap();
        let rhs = xy + omega_alpha_complex(&at, &z, &y, prm).unwrap() * s;
        prop_assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }
}
