//! Spectral differentiation and norm oracles.

use proptest::prelude::*;

use pstokes::field::{Field, FieldVariant, ScalarField, VectorField};
use pstokes::grid::Grid;
use pstokes::norms::{self, NormKind};
use pstokes::spectral::{self, DiffKind};
use pstokes::{gen, Error};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn grid3(n: usize) -> Grid {
    Grid::new(3, n, TAU).unwrap()
}

#[test]
fn gradient_of_single_mode_is_exact() {
    let g = grid3(16);
    // s = sin(k·x) with k = (2, -1, 3): grad = k cos(k·x)
    let k = [2.0, -1.0, 3.0];
    let s = ScalarField::<f64>::from_fn(&g, |x| (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).sin());
    let grad = spectral::grad_scalar(&s);
    let scale = norms::max_norm(&grad);
    for (idx, x) in g.positions() {
        let c = (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos();
        for d in 0..3 {
            let expect = k[d] * c;
            let got = grad.comp(d)[idx];
            assert!(
                (got - expect).abs() <= 1e-12 * scale,
                "node {idx} axis {d}: {got} vs {expect}"
            );
        }
    }
}

#[test]
fn laplacian_of_constant_vanishes() {
    let g = grid3(8);
    let c = ScalarField::<f64>::from_fn(&g, |_| 4.2);
    let lap = spectral::laplacian(&c);
    assert!(norms::max_norm(&lap) < 1e-12);
}

#[test]
fn divergence_of_gradient_matches_laplacian() {
    let g = grid3(16);
    let s = gen::random_scalar::<f64>(&g, 21, 0, 2.0);
    let viagrad = spectral::divergence(&spectral::grad_scalar(&s));
    let lap = spectral::laplacian(&s);
    let scale = norms::max_norm(&lap).max(1e-300);
    let mut diff = viagrad.clone();
    diff.axpy(-1.0, &lap);
    assert!(norms::max_norm(&diff) <= 1e-12 * scale);
}

#[test]
fn gradient_and_laplacian_commute_on_band_limited_fields() {
    let g = grid3(16);
    let v = gen::random_vector::<f64>(&g, 22, 0, 2.0);
    let a = spectral::grad_vector(&spectral::laplacian(&v));
    let b = spectral::laplacian(&spectral::grad_vector(&v));
    let scale = norms::max_norm(&a).max(1e-300);
    let mut diff = a.clone();
    diff.axpy(-1.0, &b);
    assert!(norms::max_norm(&diff) <= 1e-11 * scale);
}

#[test]
fn hessian_trace_is_laplacian() {
    let g = grid3(16);
    let v = gen::random_vector::<f64>(&g, 23, 0, 2.0);
    let hess = spectral::hessian_vector(&v);
    let lap = spectral::laplacian(&v);
    let scale = norms::max_norm(&lap).max(1e-300);
    for h in 0..3 {
        for (idx, &l) in lap.comp(h).iter().enumerate() {
            let tr: f64 = (0..3).map(|j| hess.entry(j, h, j)[idx]).sum();
            assert!((tr - l).abs() <= 1e-11 * scale);
        }
    }
}

#[test]
fn parseval_ties_quadrature_to_coefficients() {
    let g = grid3(16);
    let s = gen::random_scalar::<f64>(&g, 24, 0, 2.0);
    let quad = norms::l2_norm(&s);
    let spec = norms::l2_norm_spectral(&s);
    assert!((quad - spec).abs() <= 1e-10 * quad);
}

#[test]
fn closed_form_l2_norm_of_sine() {
    // ||sin x_1||_{L^2([0,2pi]^2)} = pi sqrt(2)
    let g = Grid::new(2, 64, TAU).unwrap();
    let s = ScalarField::<f64>::from_fn(&g, |x| x[0].sin());
    let expect = std::f64::consts::PI * 2.0f64.sqrt();
    assert!((norms::l2_norm(&s) - expect).abs() < 1e-12 * expect);
}

#[test]
fn differentiate_dispatch_and_rank_errors() {
    let g = grid3(8);
    let s = FieldVariant::Scalar(gen::random_scalar::<f64>(&g, 25, 0, 2.0));
    assert_eq!(
        spectral::differentiate(&s, DiffKind::Grad).unwrap().rank(),
        1
    );
    assert!(matches!(
        spectral::differentiate(&s, DiffKind::Div),
        Err(Error::Rank(_))
    ));
    let v = FieldVariant::Vector(gen::random_vector::<f64>(&g, 26, 0, 2.0));
    assert_eq!(
        spectral::differentiate(&v, DiffKind::Third).unwrap().rank(),
        4
    );
    let t4 = spectral::differentiate(&v, DiffKind::Third).unwrap();
    assert!(matches!(
        spectral::differentiate(&t4, DiffKind::Grad),
        Err(Error::Rank(_))
    ));
}

#[test]
fn dealias_zeroes_top_third() {
    let g = grid3(16);
    // mode 7 is above the cutoff 16/3 = 5
    let hi = ScalarField::<f64>::from_fn(&g, |x| (7.0 * x[0]).sin());
    let lo = ScalarField::<f64>::from_fn(&g, |x| (3.0 * x[0]).sin());
    let mut sum = hi.clone();
    sum.axpy(1.0, &lo);
    let cleaned = spectral::dealias(&sum);
    let mut diff = cleaned.clone();
    diff.axpy(-1.0, &lo);
    assert!(norms::max_norm(&diff) <= 1e-12);
    assert!(spectral::is_band_limited(&cleaned, 1e-12));
}

#[test]
fn leray_projection_kills_gradients_and_keeps_solenoidal_fields() {
    let g = grid3(16);
    let s = gen::random_scalar::<f64>(&g, 27, 0, 2.0);
    let grad = spectral::grad_scalar(&s);
    let projected = spectral::leray_project(&grad);
    assert!(norms::max_norm(&projected) <= 1e-11 * norms::max_norm(&grad).max(1e-300));
    let sol = gen::random_solenoidal::<f64>(&g, 28, 0, 2.0);
    let again = spectral::leray_project(&sol);
    let mut diff = again.clone();
    diff.axpy(-1.0, &sol);
    assert!(norms::max_norm(&diff) <= 1e-11 * norms::max_norm(&sol).max(1e-300));
}

#[test]
fn dual_norm_estimator_oracles() {
    let g = grid3(16);
    // zero forcing
    let zero = VectorField::<f64>::zeros(&g);
    assert_eq!(norms::dual_norm_estimate(&zero, 2.0, 2, 1).unwrap(), 0.0);
    // single mode: ||f||_{-1,2} = ||f||_2 / |k|
    let f = gen::single_mode_forcing::<f64>(&g, &[2, 0, 0], 1.3);
    let est = norms::dual_norm_estimate(&f, 2.0, 4, 1).unwrap();
    let expect = norms::l2_norm(&f) / 2.0;
    assert!((est - expect).abs() <= 1e-10 * expect);
    // random forcing: Hilbert-space dual norm is attained by the analytic
    // candidate
    let f = gen::random_vector::<f64>(&g, 29, 0, 2.0);
    let est = norms::dual_norm_estimate(&f, 2.0, 6, 7).unwrap();
    let exact = norms::l2_norm(&spectral::grad_vector(&spectral::inverse_laplacian(&f)));
    assert!((est - exact).abs() <= 1e-6 * exact);
    // monotone in the number of probes under seed extension
    let f = gen::random_vector::<f64>(&g, 30, 0, 2.0);
    let mut prev = 0.0;
    for n in [1, 2, 4, 8] {
        let e = norms::dual_norm_estimate(&f, 1.5, n, 11).unwrap();
        assert!(e >= prev);
        prev = e;
    }
}

#[test]
fn f32_smoke_spectral_roundtrip() {
    let g = Grid::new(2, 16, TAU).unwrap();
    let s = gen::random_scalar::<f32>(&g, 31, 0, 2.0);
    let viagrad = spectral::divergence(&spectral::grad_scalar(&s));
    let lap = spectral::laplacian(&s);
    let scale = norms::max_norm(&lap).max(1e-10);
    let mut diff = viagrad.clone();
    diff.axpy(-1.0, &lap);
    assert!(norms::max_norm(&diff) <= 1e-4 * scale);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// On the unit-volume box the Lebesgue norms are nondecreasing in q.
    #[test]
    fn lq_norms_monotone_in_q_on_unit_box(seed in 0u64..400, q1 in 1.0f64..6.0, dq in 0.0f64..4.0) {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let f = gen::random_scalar::<f64>(&g, seed, 0, 1.5);
        let a = norms::norm(&f, NormKind::Lq(q1)).unwrap();
        let b = norms::norm(&f, NormKind::Lq(q1 + dq)).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-11));
        let inf = norms::norm(&f, NormKind::LInf).unwrap();
        prop_assert!(inf >= b * (1.0 - 1e-11));
    }

    /// Spectral derivative of a pure mode matches the analytic factor.
    #[test]
    fn single_mode_derivative_factor(m0 in -5i64..=5, m1 in -5i64..=5) {
        prop_assume!(m0 != 0 || m1 != 0);
        let g = Grid::new(2, 16, TAU).unwrap();
        let s = ScalarField::<f64>::from_fn(&g, |x| (m0 as f64 * x[0] + m1 as f64 * x[1]).cos());
        let grad = spectral::grad_scalar(&s);
        let scale = ((m0 * m0 + m1 * m1) as f64).sqrt();
        for (idx, x) in g.positions() {
            let sref = -(m0 as f64 * x[0] + m1 as f64 * x[1]).sin();
            prop_assert!((grad.comp(0)[idx] - m0 as f64 * sref).abs() <= 1e-12 * scale);
            prop_assert!((grad.comp(1)[idx] - m1 as f64 * sref).abs() <= 1e-12 * scale);
        }
    }
}
