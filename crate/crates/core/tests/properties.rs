use lyapnorm::orbit::{derealify, realify};
use lyapnorm::poly::{lie_derivative, poisson_bracket, ExponentPair, PolydiskGeometry, Polynomial};
use lyapnorm::resonance::{classify_index, divisor, gamma_lower_bound, subspace_of, DivisorClass, SubspaceTag};
use lyapnorm::{normalize, GradedSeries, Mode, NormalizeOptions, Spectrum};
use num_complex::Complex64;
use proptest::prelude::*;

const N: usize = 2;

fn exponent(max_each: u16) -> impl Strategy<Value = ExponentPair> {
    proptest::collection::vec(0..=max_each, 2 * N).prop_map(|v| ExponentPair::new(&v[..N], &v[N..]).unwrap())
}

/// Small integer coefficients keep every product and bracket exact in f64.
fn polynomial(max_each: u16, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec((exponent(max_each), -3i32..=3, -3i32..=3), 0..=max_terms).prop_map(|terms| {
        let mut p = Polynomial::zero(N);
        for (e, re, im) in terms {
            p.add_term(e, Complex64::new(re as f64, im as f64));
        }
        p
    })
}

fn reference_spectrum(mode: Mode) -> Spectrum {
    Spectrum::new(vec![Complex64::new(0.0, 1.0), Complex64::new(0.0, 2f64.sqrt())], mode).unwrap()
}

fn close(a: &Polynomial, b: &Polynomial, tol: f64) -> bool {
    (a - b).max_abs_coeff() <= tol * a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalization_solves_every_homological_equation(f in polynomial(2, 6)) {
        let spec = reference_spectrum(Mode::LyapunovManifold);
        let mut h = GradedSeries::new(N, 6);
        h.add_polynomial(&Polynomial::diagonal_quadratic(&spec.lambda));
        h.add_polynomial(&f.homogeneous_part(3));
        let nf = normalize(&h, &spec, 3, NormalizeOptions::default()).unwrap();
        let geom = PolydiskGeometry::unit(N);
        for r in 1..=3 {
            prop_assert!(nf.state.homological_residual(r, &geom) <= 1e-12);
        }
        prop_assert!(nf.state.check_splitting().is_ok());
    }
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric(f in polynomial(2, 5), g in polynomial(2, 5)) {
        let fg = poisson_bracket(&f, &g).unwrap();
        let gf = poisson_bracket(&g, &f).unwrap();
        prop_assert!((&fg + &gf).is_zero());
    }

    #[test]
    fn bracket_satisfies_jacobi(f in polynomial(2, 3), g in polynomial(2, 3), h in polynomial(2, 3)) {
        let b = |a: &Polynomial, c: &Polynomial| poisson_bracket(a, c).unwrap();
        let sum = &(&b(&f, &b(&g, &h)) + &b(&g, &b(&h, &f))) + &b(&h, &b(&f, &g));
        prop_assert!(sum.max_abs_coeff() <= 1e-9);
    }

    #[test]
    fn bracket_is_a_derivation(f in polynomial(2, 3), g in polynomial(2, 3), h in polynomial(2, 3)) {
        let lhs = poisson_bracket(&f, &(&g * &h)).unwrap();
        let rhs = &(&poisson_bracket(&f, &g).unwrap() * &h) + &(&g * &poisson_bracket(&f, &h).unwrap());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn monomials_are_eigenvectors_of_the_linear_flow(e in exponent(4), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let spec = reference_spectrum(Mode::LyapunovManifold);
        let h0 = Polynomial::diagonal_quadratic(&spec.lambda);
        let c = Complex64::new(re, im);
        let m = Polynomial::monomial(e.clone(), c);
        let got = lie_derivative(&h0, &m).unwrap();
        let want = m.scale(divisor(&e, &spec));
        prop_assert!(close(&got, &want, 1e-13));
    }

    #[test]
    fn norm_is_subadditive_and_submultiplicative(f in polynomial(2, 5), g in polynomial(2, 5), r1 in 0.2f64..2.0, r2 in 0.2f64..2.0) {
        let geom = PolydiskGeometry::new(vec![r1, r2]).unwrap();
        let n = |p: &Polynomial| p.norm_at_scale(&geom, 1.0);
        let slack = 1e-12 * (1.0 + n(&f) * n(&g));
        prop_assert!(n(&(&f + &g)) <= n(&f) + n(&g) + slack);
        prop_assert!(n(&(&f * &g)) <= n(&f) * n(&g) + slack);
    }

    #[test]
    fn norm_shrinks_with_the_domain(f in polynomial(3, 6), d in 0.0f64..0.9) {
        let geom = PolydiskGeometry::unit(N);
        prop_assert!(f.norm_at_scale(&geom, 1.0 - d) <= f.norm_at_scale(&geom, 1.0));
    }

    #[test]
    fn z_and_w_partition_every_monomial(e in exponent(5), mode in prop_oneof![Just(Mode::LyapunovManifold), Just(Mode::ExtendedCenter)]) {
        let spec = reference_spectrum(mode);
        let tag = subspace_of(&e, &spec).unwrap();
        let class = classify_index(&e, mode);
        let in_z = (class != DivisorClass::Flat && e.is_symmetric()) || class == DivisorClass::Flat;
        prop_assert_eq!(tag == SubspaceTag::ZPart, in_z);
    }

    #[test]
    fn w_divisors_respect_gamma(e in exponent(6)) {
        let spec = reference_spectrum(Mode::LyapunovManifold);
        let gamma = gamma_lower_bound(&spec, 50).unwrap().gamma;
        if subspace_of(&e, &spec).unwrap() == SubspaceTag::WPart {
            let k: i64 = e.difference().iter().map(|v| v.abs()).sum();
            prop_assert!(divisor(&e, &spec).norm() >= k as f64 * gamma * (1.0 - 1e-12));
        }
    }

    #[test]
    fn polynomial_json_round_trips(f in polynomial(3, 6)) {
        let s = serde_json::to_string(&f).unwrap();
        let back: Polynomial = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn complex_variables_round_trip(f in polynomial(2, 5)) {
        let quad = lyapnorm::poly::parse_polynomial("0.5 x1^2 + 0.5 y1^2 + 0.75 x2^2 + 0.75 y2^2", Some(N)).unwrap();
        let h = &quad + &f.filter(|e, _| e.degree() >= 3);
        let xy = realify(&h).unwrap().to_polynomial();
        let back = derealify(&xy).unwrap();
        prop_assert!(close(&back, &h, 1e-12));
    }
}
