use std::f64::consts::PI;

use illpose_core::decomp::{decompose, energies, integrate_decomposed, ForcingPlacement};
use illpose_core::experiments::{energy_trajectory, seeded_velocity, uniform_grid, Engine};
use illpose_core::linear::{integrate_linearized, integrate_mode, linearized_rhs, ModeSolution};
use illpose_core::{Field, LinState64, C64};

fn kappa(n: u32) -> f64 {
    (-(n as f64).powf(0.25)).exp()
}

/// `c(t) = ∫₀ᵗ sinh(B(t-s))/B · b² e^{2is} ds` by composite Simpson.
fn forced_by_quadrature(rate: f64, b: f64, t: f64) -> C64 {
    let steps = 2000;
    let h = t / steps as f64;
    let kernel = |s: f64| C64::from_polar(b * b, 2.0 * s) * ((rate * (t - s)).sinh() / rate);
    let mut acc = kernel(0.0) + kernel(t);
    for i in 1..steps {
        acc += kernel(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

#[test]
fn closed_form_amplitudes_match_independent_formulas() {
    for n in [2u32, 5, 17] {
        for b in [0.0, 0.3, 0.7] {
            let mode = ModeSolution::new(n, b).unwrap();
            let rate = ((1.0 - b * b) * (n as f64 - 1.0)).sqrt();
            for t in [0.0, 0.4, 1.3] {
                let s = mode.sample(t);
                let sigma = kappa(n) * (rate * t).sinh() / rate;
                assert!((s.sigma - C64::new(sigma, 0.0)).norm() < 1e-14 * sigma.max(1.0));
                let forced = forced_by_quadrature(rate, b, t);
                assert!((s.forced - forced).norm() < 1e-11 * forced.norm().max(1.0), "{} vs {forced}", s.forced);
            }
        }
    }
}

#[test]
fn rk4_mode_converges_at_fourth_order() {
    let exact = ModeSolution::new(6, 0.4).unwrap();
    let err = |dt: f64| {
        let last = *integrate_mode(6, 0.4, 1.5, dt).unwrap().last().unwrap();
        let e = exact.sample(1.5);
        (last.sigma - e.sigma).norm().max((last.forced - e.forced).norm())
    };
    let order = (err(0.02) / err(0.01)).log2();
    assert!((3.8..4.3).contains(&order), "order {order}");
}

#[test]
fn radial_mode_grows_at_root_n_under_the_full_operator() {
    // At b = 0 the seed z̄^n is an exact eigenvector of the linearized
    // right-hand side with eigenvalue n.
    for n in [2u32, 4, 7] {
        let rate = (n as f64).sqrt();
        let init = LinState64::new(Field::zero(), seeded_velocity(n), 0.0);
        let states = integrate_linearized(&init, 0.0, 1.0, 1e-3).unwrap();
        let last = states.last().unwrap();
        let expected = Field::monomial(0, n, C64::new(kappa(n) * (rate * last.t).sinh() / rate, 0.0));
        assert!(last.w.max_abs_diff(&expected) < 1e-10, "n = {n}");
    }
}

#[test]
fn linearized_rhs_is_linear_apart_from_forcing() {
    let b = 0.3;
    let t = 0.7;
    let w1 = Field::from_terms([((0, 3), C64::new(0.2, -0.1)), ((1, 0), C64::new(0.05, 0.3))]);
    let w2 = Field::from_terms([((0, 2), C64::new(-0.4, 0.2)), ((2, 1), C64::new(0.1, 0.0))]);
    let v1 = Field::monomial(0, 1, C64::new(0.3, 0.3));
    let v2 = Field::monomial(0, 4, C64::new(0.0, -0.2));
    let rhs = |w: &Field, v: &Field| linearized_rhs(&LinState64::new(w.clone(), v.clone(), t), b).unwrap();
    let zero = rhs(&Field::zero(), &Field::zero());
    let sum = rhs(&(&w1 + &w2), &(&v1 + &v2));
    let parts = &(&rhs(&w1, &v1) + &rhs(&w2, &v2)) - &zero;
    assert!(sum.max_abs_diff(&parts) < 1e-13);
    let forcing = Field::monomial(1, 0, C64::from_polar(b * b, 2.0 * t));
    assert!(zero.max_abs_diff(&forcing) < 1e-15);
}

#[test]
fn energies_of_closed_form_have_explicit_values() {
    let (n, b, mu) = (9u32, 0.2, 2.0);
    let mode = ModeSolution::new(n, b).unwrap();
    let rate = mode.rate;
    let norm_sq = PI / (n as f64 + 1.0);
    let weight = (n as f64 - 1.0).powf(2.0 * mu);
    for t in [0.0, 0.5, 1.0] {
        let s = mode.sample(t);
        let state = decompose(&mode.displacement(t), &mode.velocity(t), n).unwrap();
        let r = energies(&state, b, mu, mu + 1.0, mu).unwrap();
        let plus = (s.sigma_dot + s.sigma * rate).norm_sqr() * weight * norm_sq;
        let minus = (s.sigma_dot - s.sigma * rate).norm_sqr() * weight * norm_sq;
        assert!((r.e_plus - plus).abs() < 1e-12 * plus);
        assert!((r.e_minus - minus).abs() < 1e-12 * plus);
        assert!((r.e_plus - kappa(n).powi(2) * (2.0 * rate * t).exp() * weight * norm_sq).abs() < 1e-12 * plus);
    }
}

#[test]
fn rk4_engines_agree() {
    let times = uniform_grid(0.5, 6);
    let direct = energy_trajectory(5, 0.2, 1.0, &times, Engine::Rk4Weta, 1e-3).unwrap();
    let split = energy_trajectory(5, 0.2, 1.0, &times, Engine::Rk4Decomposed, 1e-3).unwrap();
    for (a, b) in direct.iter().zip(&split) {
        assert!((a.e_plus - b.e_plus).abs() < 1e-9 * a.e_plus.max(1.0));
        assert!((a.f_sigma - b.f_sigma).abs() < 1e-9 * a.f_sigma.max(1.0));
    }
}

#[test]
fn only_remainder_forcing_keeps_split_consistent() {
    let init = decompose(&Field::zero(), &seeded_velocity(4), 4).unwrap();
    assert!(integrate_decomposed(&init, 0.3, 0.1, 1e-2, ForcingPlacement::NEquation).is_ok());
    for placement in [ForcingPlacement::FgEquations, ForcingPlacement::Split] {
        assert!(integrate_decomposed(&init, 0.3, 0.1, 1e-2, placement).is_err());
    }
}
