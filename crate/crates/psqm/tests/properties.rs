use proptest::prelude::*;

use psqm::coherent::{expect_direct, make_coherent, CoherentLabel};
use psqm::duality::{pair, pairing_grid, pairing_multiplier};
use psqm::hilbert::{hermite_basis, random_hermitian, random_operator, random_psd};
use psqm::numerics::{Grid, SampledLine};
use psqm::star::delta;
use psqm::transforms::expect_kernel_route;
use psqm::Complex64;

fn small() -> (Grid, Grid) {
    let line = SampledLine::midpoint(6.0, 32).unwrap();
    (Grid::position(line, 1).unwrap(), Grid::display(&line, 1).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coherent_states_are_normalised(q in -3.0..3.0f64, p in -3.0..3.0f64) {
        let grid = Grid::position(SampledLine::midpoint(8.0, 128).unwrap(), 1).unwrap();
        let theta = make_coherent(&grid, &CoherentLabel::new(vec![q], vec![p]).unwrap()).unwrap();
        prop_assert!((theta.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn expectation_is_linear(s1 in 0u64..1000, s2 in 0u64..1000, a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (pos, disp) = small();
        let x = random_operator(&pos, s1, 2).unwrap();
        let y = random_operator(&pos, s2, 2).unwrap();
        let (ca, cb) = (c(a, 0.5), c(-0.25, b));
        let lhs = expect_kernel_route(&x.scale(ca).add(&y.scale(cb)).unwrap(), &disp).unwrap();
        let rhs = expect_kernel_route(&x, &disp).unwrap()
            .linear_combination(ca, &expect_kernel_route(&y, &disp).unwrap(), cb)
            .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10 * (1.0 + rhs.field().max_abs()));
    }

    #[test]
    fn psd_operators_have_nonnegative_symbols(seed in 0u64..10_000, rank in 1usize..4) {
        let (pos, disp) = small();
        let e = expect_direct(&random_psd(&pos, seed, rank).unwrap(), &disp).unwrap();
        for v in e.field().data() {
            prop_assert!(v.re >= -1e-10);
            prop_assert!(v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn adjoint_conjugates_the_symbol(seed in 0u64..10_000) {
        let (pos, disp) = small();
        let a = random_operator(&pos, seed, 2).unwrap();
        let e = expect_kernel_route(&a, &disp).unwrap();
        let ea = expect_kernel_route(&a.adjoint(), &disp).unwrap();
        prop_assert!(e.conj().max_abs_diff(&ea) < 1e-10);
        let h = expect_kernel_route(&random_hermitian(&pos, seed, 2).unwrap(), &disp).unwrap();
        prop_assert!(h.field().data().iter().all(|v| v.im.abs() < 1e-10));
    }

    #[test]
    fn pairing_is_linear_in_the_symbol(s1 in 0u64..1000, s2 in 0u64..1000, a in -2.0..2.0f64) {
        let line = SampledLine::midpoint(6.0, 32).unwrap();
        let pos = Grid::position(line, 1).unwrap();
        let pg = pairing_grid(&pos).unwrap();
        let hs = hermite_basis(&pos, 2).unwrap();
        let s = pairing_multiplier(&hs[0], &hs[1], 4).unwrap();
        let g = expect_kernel_route(&random_operator(&pos, s1, 2).unwrap(), &pg).unwrap();
        let h = expect_kernel_route(&random_operator(&pos, s2, 2).unwrap(), &pg).unwrap();
        let ca = c(a, 1.0);
        let lhs = pair(&s, &g.linear_combination(ca, &h, c(1.0, 0.0)).unwrap()).unwrap();
        let rhs = ca * pair(&s, &g).unwrap() + pair(&s, &h).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }

    #[test]
    fn delta_is_a_signed_area(w in (-5.0..5.0f64, -5.0..5.0f64), w1 in (-5.0..5.0f64, -5.0..5.0f64),
                              w2 in (-5.0..5.0f64, -5.0..5.0f64), t in (-5.0..5.0f64, -5.0..5.0f64)) {
        let (w, w1, w2, t) = (c(w.0, w.1), c(w1.0, w1.1), c(w2.0, w2.1), c(t.0, t.1));
        let d = delta(w, w1, w2);
        prop_assert!((delta(w + t, w1 + t, w2 + t) - d).abs() < 1e-10 * (1.0 + d.abs()));
        prop_assert!((delta(w1, w, w2) + d).abs() < 1e-12 * (1.0 + d.abs()));
        prop_assert!((delta(w1, w2, w) - d).abs() < 1e-10 * (1.0 + d.abs()));
    }
}

#[test]
fn delta_reference_values() {
    assert_eq!(delta(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)), 1.0);
    assert_eq!(delta(c(1.5, -2.0), c(1.5, -2.0), c(0.3, 0.7)), 0.0);
}
