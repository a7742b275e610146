//! Inverse-Laplacian, pressure-functional and operator-norm oracles.

use pstokes::field::{Field, ScalarField, VectorField};
use pstokes::grid::Grid;
use pstokes::potentials::{self, PressureVariant};
use pstokes::spectral;
use pstokes::stress::{RegParams, StressParams};
use pstokes::{cz, gen, norms, Error};

const TAU: f64 = 2.0 * std::f64::consts::PI;

fn grid3(n: usize) -> Grid {
    Grid::new(3, n, TAU).unwrap()
}

#[test]
fn inverse_laplacian_oracles() {
    let g = grid3(16);
    // single mode: -1/|k|^2
    let s = ScalarField::<f64>::from_fn(&g, |x| (2.0 * x[0] + x[1]).sin());
    let w = potentials::inverse_laplacian(&s);
    for (idx, x) in g.positions() {
        let expect = -(2.0 * x[0] + x[1]).sin() / 5.0;
        assert!((w.data()[idx] - expect).abs() < 1e-12);
    }
    // constants map to zero
    let c = ScalarField::<f64>::from_fn(&g, |_| 3.0);
    assert!(norms::max_norm(&potentials::inverse_laplacian(&c)) < 1e-12);
    // roundtrip on random data
    let f = gen::random_scalar::<f64>(&g, 41, 0, 2.0);
    let lap_w = spectral::laplacian(&potentials::inverse_laplacian(&f));
    let mut target = f.clone();
    let mean = f.mean();
    for v in target.data_mut() {
        *v -= mean;
    }
    let mut diff = lap_w.clone();
    diff.axpy(-1.0, &target);
    assert!(norms::max_norm(&diff) <= 1e-11 * norms::max_norm(&f));
}

#[test]
fn inverse_laplacian_is_self_adjoint() {
    let g = grid3(16);
    let f = gen::random_scalar::<f64>(&g, 42, 0, 2.0);
    let h = gen::random_scalar::<f64>(&g, 43, 0, 2.0);
    let a = norms::inner(&potentials::inverse_laplacian(&f), &h);
    let b = norms::inner(&f, &potentials::inverse_laplacian(&h));
    assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300));
}

#[test]
fn newtonian_gradient_matches_composition() {
    let g = grid3(16);
    let zero = ScalarField::<f64>::zeros(&g);
    assert_eq!(norms::max_norm(&potentials::newtonian_gradient(&zero)), 0.0);
    let f = gen::random_scalar::<f64>(&g, 44, 0, 2.0);
    let a = potentials::newtonian_gradient(&f);
    let b = spectral::grad_scalar(&potentials::inverse_laplacian(&f));
    let mut diff = a.clone();
    diff.axpy(-1.0, &b);
    assert!(norms::max_norm(&diff) <= 1e-13 * norms::max_norm(&a).max(1e-300));
}

#[test]
fn pressure_zero_for_p_two_and_zero_velocity() {
    let g = grid3(16);
    let reg = RegParams::new(0.0, 0.1, TAU / 8.0, 0.0, g.box_length()).unwrap();
    let u = gen::random_vector::<f64>(&g, 45, 0, 2.0);
    for variant in [PressureVariant::MollifiedCutoff, PressureVariant::CutoffFree] {
        let sp = StressParams { p: 2.0, mu: 0.7 };
        let pi = potentials::pressure_functional(&u, &sp, &reg, variant).unwrap();
        assert_eq!(norms::max_norm(&pi), 0.0, "variant {variant:?}");
    }
    let zero = VectorField::<f64>::zeros(&g);
    let sp = StressParams { p: 1.6, mu: 0.3 };
    for variant in [PressureVariant::MollifiedCutoff, PressureVariant::CutoffFree] {
        let pi = potentials::pressure_functional(&zero, &sp, &reg, variant).unwrap();
        assert_eq!(norms::max_norm(&pi), 0.0);
    }
    let sp0 = StressParams { p: 1.6, mu: 0.0 };
    let pi = potentials::pressure_functional(&zero, &sp0, &reg, PressureVariant::Singular).unwrap();
    assert_eq!(norms::max_norm(&pi), 0.0);
}

#[test]
fn pressure_variant_contract_errors() {
    let g = grid3(8);
    let reg = RegParams::new(0.0, 0.1, TAU / 8.0, 0.0, g.box_length()).unwrap();
    let u = gen::random_vector::<f64>(&g, 46, 0, 2.0);
    let singular = StressParams { p: 1.5, mu: 0.0 };
    let regular = StressParams { p: 1.5, mu: 0.4 };
    assert!(matches!(
        potentials::pressure_functional(&u, &singular, &reg, PressureVariant::MollifiedCutoff),
        Err(Error::Contract(_))
    ));
    assert!(matches!(
        potentials::pressure_functional(&u, &regular, &reg, PressureVariant::Singular),
        Err(Error::Contract(_))
    ));
    let reg_bad = RegParams {
        eta: 0.0,
        ..reg
    };
    assert!(matches!(
        potentials::pressure_functional(&u, &regular, &reg_bad, PressureVariant::MollifiedCutoff),
        Err(Error::Contract(_))
    ));
}

#[test]
fn pressure_functionals_have_zero_mean_and_satisfy_poisson_identity() {
    let g = grid3(16);
    let u = gen::random_vector::<f64>(&g, 47, 0, 2.0);
    let sp = StressParams { p: 1.7, mu: 0.5 };
    let reg = RegParams::new(0.0, 0.2, TAU / 8.0, 0.0, g.box_length()).unwrap();
    for variant in [PressureVariant::MollifiedCutoff, PressureVariant::CutoffFree] {
        let pi = potentials::pressure_functional(&u, &sp, &reg, variant).unwrap();
        assert!(pi.mean().abs() <= 1e-13 * norms::max_norm(&pi).max(1e-300));
    }
    // lap(Pi) = div(density) for the regular variants
    let d = potentials::pressure_density_with(&u, &sp, 0.2, None).unwrap();
    let pi = potentials::newtonian_divergence(&d);
    let div_d = spectral::divergence(&d);
    let mut gap = spectral::laplacian(&pi);
    gap.axpy(-1.0, &div_d);
    assert!(norms::l2_norm(&gap) <= 1e-8 * norms::l2_norm(&div_d).max(1e-300));
}

#[test]
fn fft_pressure_matches_direct_summation_on_small_grid() {
    let g = grid3(8);
    let u = gen::random_vector::<f64>(&g, 48, 0, 2.0);
    let sp = StressParams { p: 1.6, mu: 0.8 };
    let d = potentials::pressure_density_with(&u, &sp, 0.0, None).unwrap();
    let fft = potentials::newtonian_divergence(&d);
    let direct = potentials::newtonian_divergence_direct(&d);
    let mut gap = fft.clone();
    gap.axpy(-1.0, &direct);
    let rel = norms::l2_norm(&gap) / norms::l2_norm(&fft).max(1e-300);
    assert!(rel <= 1e-6, "relative gap {rel}");
}

#[test]
fn singular_variant_is_the_limit_of_the_regular_one() {
    let g = grid3(16);
    // solenoidal field with |grad u| bounded below and nonconstant, so the
    // pressure density is nontrivial
    let u = VectorField::<f64>::from_fn(&g, |x| {
        vec![
            x[1].sin(),
            x[0].cos(),
            x[0].sin() + x[1].cos() + 0.1 * (x[0] + x[1]).sin(),
        ]
    });
    let pi0 = potentials::singular_pressure(&u, 1.7);
    let gap_at = |mu: f64| {
        let sp = StressParams { p: 1.7, mu };
        let d = potentials::pressure_density_with(&u, &sp, 0.0, None).unwrap();
        let pim = potentials::newtonian_divergence(&d);
        let mut gap = pim.clone();
        gap.axpy(-1.0, &pi0);
        norms::l2_norm(&gap)
    };
    let g1 = gap_at(1e-2);
    let g2 = gap_at(1e-3);
    let g3 = gap_at(1e-4);
    assert!(g2 <= g1 / 5.0, "decade 1: {g1} -> {g2}");
    assert!(g3 <= g2 / 5.0, "decade 2: {g2} -> {g3}");
}

#[test]
fn cz_norm_oracles() {
    let g = grid3(16);
    // s = 2 is the exact multiplier maximum
    let h2 = cz::cz_norm(2.0, &g, cz::CzMethod::PowerIteration, 4, 1).unwrap();
    assert!(h2 <= 1.0 + 1e-6 && h2 >= 1.0 - 1e-12);
    // diagonal component on an axis mode has ratio exactly one
    let s = ScalarField::<f64>::from_fn(&g, |x| (3.0 * x[0]).sin());
    let ts = potentials::riesz_pair_apply(&s, 0, 0);
    let ratio = norms::l2_norm(&ts) / norms::l2_norm(&s);
    assert!((ratio - 1.0).abs() < 1e-12);
    // probe estimates are lower bounds of the power-iteration ones
    let probe = cz::cz_norm(3.0, &g, cz::CzMethod::RandomProbe, 6, 2).unwrap();
    let power = cz::cz_norm(3.0, &g, cz::CzMethod::PowerIteration, 12, 2).unwrap();
    assert!(probe <= power * (1.0 + 1e-9));
    assert!(power >= 1.0 - 1e-9);
    // envelope dominates the measured anchors
    let env3 = cz::cz_norm(3.0, &g, cz::CzMethod::AnalyticBound, 10, 2).unwrap();
    assert!(env3 >= power * (1.0 - 1e-9));
}

#[test]
fn cz_duality_of_conjugate_pair() {
    let g = grid3(32);
    let h43 = cz::cz_norm(4.0 / 3.0, &g, cz::CzMethod::PowerIteration, 14, 3).unwrap();
    let h4 = cz::cz_norm(4.0, &g, cz::CzMethod::PowerIteration, 14, 3).unwrap();
    assert!(
        (h43 - h4).abs() <= 0.10 * h4,
        "duality violated: H(4/3) = {h43}, H(4) = {h4}"
    );
}

#[test]
fn cz_table_roundtrip_and_admissibility_sweep() {
    let g = grid3(16);
    // the q1 exponent depends on p, so each sweep point estimates the
    // exponents it needs
    let table_for = |p: f64| {
        let exponents = cz::required_exponents(p, 3, 4.0);
        cz::CzTable::estimate(&g, &exponents, cz::CzMethod::PowerIteration, 10, 5).unwrap()
    };
    let t195 = table_for(1.95);
    let json = t195.to_json().unwrap();
    let back = cz::CzTable::from_json(&json).unwrap();
    assert_eq!(back.entries.len(), t195.entries.len());
    // p = 2 anchor
    let adm2 = cz::admissibility(2.0, 3, 4.0, &table_for(2.0)).unwrap();
    assert!(adm2.feasible);
    // sweep: the feasible region is an interval ending at p = 2
    let mut feasible_ps = Vec::new();
    for &p in &[1.6, 1.7, 1.8, 1.9, 1.95, 2.0] {
        let adm = cz::admissibility(p, 3, 4.0, &table_for(p)).unwrap();
        if adm.feasible {
            feasible_ps.push(p);
        }
    }
    assert!(feasible_ps.contains(&2.0));
    let p_star = feasible_ps[0];
    for &p in &[1.6, 1.7, 1.8, 1.9, 1.95, 2.0] {
        let adm = cz::admissibility(p, 3, 4.0, &table_for(p)).unwrap();
        assert_eq!(adm.feasible, p >= p_star, "feasibility not an interval");
    }
}
