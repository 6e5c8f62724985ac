use nlft::grid::default_grid_size;
use nlft::io::{pair_from_json, pair_to_json, sequence_from_json, sequence_to_json};
use nlft::spectral::is_outer;
use nlft::{from_grid, nlft_forward, outer_complement, to_grid, BeurlingWeight, CoefficientSequence};
use num_complex::Complex64;
use proptest::prelude::*;

fn sequence(max_abs: f64, max_len: usize) -> impl Strategy<Value = CoefficientSequence> {
    (-8i64..8, prop::collection::vec((-max_abs..max_abs, -max_abs..max_abs), 1..max_len)).prop_map(|(lo, c)| {
        CoefficientSequence::new(lo, c.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap()
    })
}

fn weights() -> Vec<BeurlingWeight> {
    vec![
        BeurlingWeight::one(),
        BeurlingWeight::polynomial(0.5).unwrap(),
        BeurlingWeight::polynomial(1.0).unwrap(),
        BeurlingWeight::polynomial(2.0).unwrap(),
    ]
}

fn grid_for(s: &CoefficientSequence) -> usize {
    default_grid_size(s.width())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_reflect_is_involution(s in sequence(1.0, 12)) {
        prop_assert_eq!(s.star_reflect().star_reflect(), s.clone());
        let n = 64;
        let g = to_grid(&s, n).unwrap();
        let gs = to_grid(&s.star_reflect(), n).unwrap();
        for (x, y) in g.samples().iter().zip(gs.samples()) {
            prop_assert!((x.conj() - y).norm() < 1e-13);
        }
    }

    #[test]
    fn grid_round_trip(s in sequence(1.0, 12)) {
        let (lo, hi) = s.support().unwrap();
        let back = from_grid(&to_grid(&s, grid_for(&s)).unwrap(), lo, hi).unwrap();
        prop_assert!(back.max_abs_diff(&s) < 1e-13);
    }

    #[test]
    fn convolution_matches_grid_product(s in sequence(1.0, 10), t in sequence(1.0, 10)) {
        let p = s.convolve(&t);
        let (lo, hi) = p.support().unwrap();
        let n = default_grid_size((hi - lo) as usize);
        let gs = to_grid(&s, n).unwrap();
        let gt = to_grid(&t, n).unwrap();
        let q = from_grid(&gs.zip_with(&gt, |x, y| x * y), lo, hi).unwrap();
        prop_assert!(p.max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn weighted_norm_is_submultiplicative(s in sequence(1.0, 10), t in sequence(1.0, 10)) {
        let p = s.convolve(&t);
        for w in weights() {
            let lhs = p.weighted_l1_norm(&w);
            let rhs = s.weighted_l1_norm(&w) * t.weighted_l1_norm(&w);
            prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{w}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn fractional_derivative_commutes_with_windows(s in sequence(1.0, 12), order in 0.0f64..2.5, cut in 0usize..6) {
        let (lo, hi) = s.support().unwrap();
        let (wlo, whi) = (lo + cut as i64 / 2, (hi - cut as i64 / 2).max(lo + cut as i64 / 2));
        let js = s.fractional_derivative(order);
        let lhs = from_grid(&to_grid(&js, grid_for(&js)).unwrap(), wlo, whi).unwrap();
        let rhs = s.restrict(wlo, whi).fractional_derivative(order);
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12 * (1.0 + js.max_abs()));
    }

    #[test]
    fn forward_preserves_determinant(f in sequence(0.3, 17)) {
        let pair = nlft_forward(&f).unwrap();
        prop_assert!(pair.grid_residual <= 1e-12);
    }

    #[test]
    fn forward_is_multiplicative(f in sequence(0.3, 17), split in 0i64..17) {
        let (lo, hi) = f.support().unwrap();
        let n = lo + split.min(hi - lo);
        let left = nlft_forward(&f.restrict(lo, n)).unwrap();
        let right = nlft_forward(&f.restrict(n + 1, hi)).unwrap();
        let whole = nlft_forward(&f).unwrap();
        let grid = 4 * whole.default_grid();
        let (a, b) = left.product_on_grid(&right, grid).unwrap();
        let (wa, wb) = (to_grid(&whole.a, grid).unwrap(), to_grid(&whole.b, grid).unwrap());
        for j in 0..grid {
            prop_assert!((a[j] - wa.samples()[j]).norm() < 1e-12);
            prop_assert!((b[j] - wb.samples()[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn reflection_law(f in sequence(0.3, 17)) {
        let direct = nlft_forward(&f.reverse_index()).unwrap();
        let reflected = nlft_forward(&f).unwrap().reflected();
        prop_assert!(direct.a.max_abs_diff(&reflected.a) < 1e-12);
        prop_assert!(direct.b.max_abs_diff(&reflected.b) < 1e-12);
    }

    #[test]
    fn sinh_bound_holds(f in sequence(0.3, 17)) {
        let pair = nlft_forward(&f).unwrap();
        for w in weights() {
            prop_assert!(pair.b.weighted_l1_norm(&w) <= f.weighted_l1_norm(&w).sinh() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn outer_complement_recovers_forward_pair(f in sequence(0.3, 17)) {
        let pair = nlft_forward(&f).unwrap();
        prop_assume!(is_outer(&pair, 4 * pair.default_grid()).unwrap());
        let factor = outer_complement(&pair.b, pair.default_grid(), None, 1e-6).unwrap();
        prop_assert!(factor.pair.a.max_abs_diff(&pair.a) < 1e-10);
        let prod: f64 = f.coeffs().iter().map(|c| (1.0 + c.norm_sqr()).sqrt().recip()).product();
        prop_assert!((factor.pair.a_star_at_zero().re - prod).abs() < 1e-10);
    }

    #[test]
    fn file_round_trip_is_bit_exact(f in sequence(1e3, 12)) {
        let back = sequence_from_json(&sequence_to_json(&f).unwrap()).unwrap();
        prop_assert_eq!(back.support(), f.support());
        for (x, y) in back.coeffs().iter().zip(f.coeffs()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
        let pair = nlft_forward(&f.scale_real(1e-3)).unwrap();
        let q = pair_from_json(&pair_to_json(&pair).unwrap()).unwrap();
        prop_assert_eq!(q.a, pair.a);
        prop_assert_eq!(q.b, pair.b);
    }
}
