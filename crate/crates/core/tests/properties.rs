//! Property tests for the structural invariants of potentials, propagation,
//! kernels and eigenvalue counting.

use pearson_spectra::kernel::{cd_diagonal, cd_formula, cd_quadrature, kappa};
use pearson_spectra::potential::{
    canonical_bump, geometric_schedule, PearsonPotential, TruncationLevel,
};
use pearson_spectra::propagate::{
    neumann_extended, neumann_solution, strip_point, transfer_matrix, variation_coeffs,
};
use pearson_spectra::spectrum::{eigenvalue_count, eigenvalues_near, phase};
use pearson_spectra::tolerances::{DET_DRIFT_PER_LENGTH, ROUTE_AGREEMENT_REL};
use proptest::prelude::*;

/// Up to three bumps on a geometric grid with ratio 4..12, first center 5..20.
fn potential() -> impl Strategy<Value = PearsonPotential> {
    (
        prop::collection::vec(0.0..2.0_f64, 1..=3),
        5.0..20.0_f64,
        4.0..12.0_f64,
    )
        .prop_map(|(mut lambdas, first, ratio)| {
            // Nonincreasing, as construction requires.
            lambdas.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let n = lambdas.len();
            geometric_schedule(&lambdas, first, ratio, n).unwrap()
        })
}

fn end_of_support(v: &PearsonPotential) -> f64 {
    v.centers().last().map_or(0.0, |c| c + 1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bump_profile_is_nonnegative_and_supported(x in -1.0..2.0_f64) {
        let w = canonical_bump().evaluate(x);
        prop_assert!((0.0..=1.0).contains(&w));
        if x <= 0.0 || x >= 1.0 {
            prop_assert_eq!(w, 0.0);
        }
    }

    #[test]
    fn at_most_one_bump_is_active(v in potential(), t in 0.0..1.0_f64) {
        let x = t * (end_of_support(&v) + 5.0);
        let value = v.evaluate(x).unwrap();
        let active: Vec<usize> = v
            .centers()
            .iter()
            .enumerate()
            .filter(|(_, &c)| x > c && x < c + 1.0)
            .map(|(i, _)| i)
            .collect();
        prop_assert!(active.len() <= 1);
        match active.first() {
            Some(&i) => {
                let expected = v.amplitudes()[i] * canonical_bump().evaluate(x - v.centers()[i]);
                prop_assert!((value - expected).abs() <= 1e-15 * expected.abs().max(1.0));
                prop_assert_eq!(v.bump_containing(x), Some(i));
            }
            None => prop_assert_eq!(value, 0.0),
        }
    }

    #[test]
    fn transfer_determinant_stays_one(v in potential(), xi in 0.2..4.0_f64, t in -1.0..1.0_f64) {
        let length = end_of_support(&v) + 3.0;
        let real = transfer_matrix(&v, xi, 0.0, length).unwrap();
        prop_assert!(real.det_drift() <= DET_DRIFT_PER_LENGTH * length);
        let complex = transfer_matrix(&v, strip_point(xi, t, length), 0.0, length).unwrap();
        prop_assert!(complex.det_drift() <= DET_DRIFT_PER_LENGTH * length);
    }

    #[test]
    fn transfer_matrices_compose(v in potential(), xi in 0.2..4.0_f64, s in 0.0..1.0_f64) {
        let c = end_of_support(&v) + 2.0;
        let b = s * c;
        let whole = transfer_matrix(&v, xi, 0.0, c).unwrap().entries;
        let split = transfer_matrix(&v, xi, b, c).unwrap().entries * transfer_matrix(&v, xi, 0.0, b).unwrap().entries;
        prop_assert!(whole.max_abs_diff(&split) <= 1e-9 * whole.norm().max(1.0));
    }

    #[test]
    fn coefficients_constant_past_the_last_bump(v in potential(), xi in 0.2..4.0_f64, d1 in 0.0..50.0_f64, d2 in 0.0..50.0_f64) {
        let start = end_of_support(&v);
        let p = variation_coeffs(&v, xi, start + d1).unwrap();
        let q = variation_coeffs(&v, xi, start + d2).unwrap();
        let scale = p.a1.abs().max(p.a2.abs()).max(1.0);
        prop_assert!((p.a1 - q.a1).abs() <= 1e-9 * scale);
        prop_assert!((p.a2 - q.a2).abs() <= 1e-9 * scale);
        prop_assert!(p.kappa() > 0.0);
    }

    #[test]
    fn extended_state_starts_independent_of_energy(xi in 0.2..4.0_f64) {
        let e = neumann_extended(&PearsonPotential::zero(), xi, 0.0).unwrap();
        prop_assert_eq!((e.u, e.du, e.u_xi, e.du_xi), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn kernel_routes_agree_and_are_symmetric(v in potential(), xi in 0.5..2.0_f64, zeta in 0.5..2.0_f64, frac in 0.2..1.5_f64) {
        prop_assume!((xi - zeta).abs() > 1e-3);
        let length = frac * end_of_support(&v);
        let q = cd_quadrature(&v, xi, zeta, length).unwrap().value;
        let f = cd_formula(&v, xi, zeta, length).unwrap().value;
        let f_swapped = cd_formula(&v, zeta, xi, length).unwrap().value;
        let norm = (cd_diagonal(&v, xi, length).unwrap().value * cd_diagonal(&v, zeta, length).unwrap().value).sqrt();
        prop_assert!((q - f).abs() <= ROUTE_AGREEMENT_REL * norm);
        prop_assert!((f - f_swapped).abs() <= 1e-12 * norm);
        // Cauchy-Schwarz, with room for rounding.
        prop_assert!(q.abs() <= norm * (1.0 + 1e-10));
    }

    #[test]
    fn diagonal_kernel_is_positive(v in potential(), xi in 0.1..5.0_f64, length in 0.01..200.0_f64) {
        prop_assert!(cd_diagonal(&v, xi, length).unwrap().value > 0.0);
    }

    #[test]
    fn truncation_agrees_before_the_first_dropped_bump(v in potential(), ell in 0usize..3, xi in 0.2..4.0_f64, t in 0.0..1.0_f64) {
        prop_assume!(ell < v.len());
        let truncated = v.truncate(TruncationLevel(ell)).unwrap();
        let x = t * v.centers()[ell];
        let p = neumann_solution(&v, xi, x).unwrap();
        let q = neumann_solution(&truncated, xi, x).unwrap();
        prop_assert!((p.u - q.u).abs() <= 1e-12 && (p.du - q.du).abs() <= 1e-12);
        prop_assert!(kappa(&v, TruncationLevel(ell), xi, x.max(1.0)).unwrap().value > 0.0);
    }

    #[test]
    fn phase_and_count_are_monotone(v in potential(), xi in 0.05..3.0_f64, dxi in 0.001..1.0_f64) {
        let length = end_of_support(&v) + 10.0;
        prop_assert!(phase(&v, xi + dxi, length).unwrap() > phase(&v, xi, length).unwrap());
        prop_assert!(eigenvalue_count(&v, xi + dxi, length).unwrap() >= eigenvalue_count(&v, xi, length).unwrap());
    }

    #[test]
    fn located_eigenvalues_are_consistent_with_the_count(v in potential(), xi_star in 0.3..3.0_f64) {
        let length = end_of_support(&v) + 10.0;
        let w = eigenvalues_near(&v, length, xi_star, -2, 2).unwrap();
        prop_assert!(w.values.windows(2).all(|p| p[1].1 > p[0].1));
        if let (Some(below), Some(above)) = (w.get(-1), w.get(0)) {
            prop_assert!(below < xi_star && xi_star <= above);
        }
        for &(n, x) in &w.values {
            let j = (w.zero_index as i64 + n) as usize;
            let s = neumann_solution(&v, x, length).unwrap();
            prop_assert!(s.du.abs() <= 1e-8 * (x.sqrt() * s.u).hypot(s.du));
            // Just above the j-th eigenvalue the count is j + 1.
            prop_assert_eq!(eigenvalue_count(&v, x * (1.0 + 1e-9), length).unwrap(), j + 1);
        }
    }
}
