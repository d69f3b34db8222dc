use dalat::basis::{basis_poly, basis_table, convolve, CoefficientSeries};
use dalat::lattice::{apply_difference, discrete_integral, is_discrete_analytic, DiffKind};
use dalat::realization::{combine, invert, markov_params, CombineKind, Realization};
use dalat::samples;
use dalat::schur::{is_coisometry, random_coisometry};
use dalat::{Complex64, GaussRat, LatticePoint, Mat, PathSpec, Scalar, Window};
use proptest::prelude::*;

type Q = GaussRat;

fn point() -> impl Strategy<Value = LatticePoint> {
    (0i64..6, -5i64..6).prop_map(|(x, y)| LatticePoint::new(x, y))
}

fn gauss() -> impl Strategy<Value = Q> {
    (-20i64..20, 1i64..12, -20i64..20, 1i64..12).prop_map(|(a, b, c, d)| Q::from_parts(a, b, c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chu_vandermonde(z in point(), w in point(), n in 0usize..9) {
        let rhs = (0..=n).fold(Q::zero(), |acc, k| acc + basis_poly::<Q>(k, z) * basis_poly::<Q>(n - k, w));
        prop_assert_eq!(basis_poly::<Q>(n, z + w), rhs);
    }

    #[test]
    fn basis_lowers_under_dx(n in 1usize..10, x0 in 0i64..3, y0 in -4i64..2) {
        let window = Window::new(x0, x0 + 3, y0, y0 + 3).unwrap();
        let d = apply_difference(DiffKind::Dx, &basis_table::<Q>(n, window)).unwrap();
        prop_assert_eq!(d, basis_table::<Q>(n - 1, Window::new(x0, x0 + 2, y0, y0 + 3).unwrap()));
        prop_assert!(is_discrete_analytic(&basis_table::<Q>(n, window), 0.0).unwrap().analytic);
    }

    #[test]
    fn integral_is_path_independent_for_analytic(n in 0usize..6, z in point()) {
        let window = Window::new(0, 5, -5, 5).unwrap();
        let f = basis_table::<Q>(n, window);
        let a = discrete_integral(&f, &PathSpec::staircase(z)).unwrap();
        let b = discrete_integral(&f, &PathSpec::staircase_vertical_first(z)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn gauss_rat_text_round_trip(v in gauss()) {
        prop_assert_eq!(v.to_string().parse::<Q>().unwrap(), v);
    }

    #[test]
    fn lattice_point_text_round_trip(z in point()) {
        prop_assert_eq!(z.to_string().parse::<LatticePoint>().unwrap(), z);
    }

    #[test]
    fn float_realization_json_is_bit_exact(seed in 0u64..1000, n in 1usize..4) {
        let r = samples::stable_realization(&mut samples::rng(seed), n, 2, 1, 0.8);
        let text = r.to_json().to_string();
        let back = Realization::<Complex64>::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn series_json_round_trip(coeffs in prop::collection::vec(gauss(), 1..8)) {
        let c = CoefficientSeries::scalar(coeffs).unwrap();
        prop_assert_eq!(CoefficientSeries::<Q>::from_json(&c.to_json()).unwrap(), c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn product_markov_is_convolution(seed in 0u64..10_000, n1 in 1usize..3, n2 in 1usize..3) {
        let mut rng = samples::rng(seed);
        let r1 = samples::rational_realization(&mut rng, n1, 1, 2, 3, false);
        let r2 = samples::rational_realization(&mut rng, n2, 2, 1, 3, false);
        let prod = combine(CombineKind::Product, &r2, &r1).unwrap();
        let rhs = convolve(&markov_params(&r2, 6).to_series(), &markov_params(&r1, 6).to_series(), Some(6)).unwrap();
        prop_assert_eq!(markov_params(&prod, 6).to_series(), rhs);
    }

    #[test]
    fn inverse_cancels(seed in 0u64..10_000, n in 1usize..3) {
        let r = samples::rational_realization(&mut samples::rng(seed), n, 2, 2, 3, true);
        let prod = combine(CombineKind::Product, &invert(&r).unwrap(), &r).unwrap();
        let terms = markov_params(&prod, 5);
        prop_assert_eq!(&terms.terms()[0], &Mat::identity(2));
        prop_assert!(terms.terms()[1..].iter().all(Mat::is_zero));
    }

    #[test]
    fn random_colligations_are_coisometric(seed in 0u64..10_000, n in 0usize..6, m in 1usize..3, extra in 0usize..3) {
        let cg = random_coisometry(n, m, m + extra, seed).unwrap();
        prop_assert!(is_coisometry(&cg.block(), 1e-12).coisometric);
    }
}
