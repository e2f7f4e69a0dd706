//! Seeded self-checks of the operator algebra on random polynomials.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decomp::{split_field, HarmonicGradient};
use crate::error::invalid;
use crate::field::{boundary_trace, compose_rotation, l2_inner, laplacian};
use crate::operators::{
    dirichlet_inverse, harmonic_projection, variation_residual, BaseOperator, ConjugatedOperator, VariationIdentity,
};
use crate::{Field, Result};

/// Random field with coefficients uniform in the unit square on `j + k ≤ degree`.
pub fn random_field<R: Rng>(rng: &mut R, degree: u32) -> Field {
    let mut terms = Vec::new();
    for j in 0..=degree {
        for k in 0..=degree - j {
            if rng.gen_bool(0.5) {
                terms.push(((j, k), Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
    }
    Field::from_terms(terms)
}

/// Random `Σ_{k<degree} a_k z̄^k`.
pub fn random_harmonic_gradient<R: Rng>(rng: &mut R, degree: u32) -> Field {
    Field::from_terms(
        (0..degree.max(1)).map(|k| ((0, k), Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn outcome(suite: &'static str, cases: usize, worst: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome { suite, cases, worst, tolerance, passed: worst < tolerance }
}

const CASES: usize = 20;

/// Runs every suite with the given seed on fields of total degree at most `degree`.
pub fn run_opcheck(seed: u64, degree: u32) -> Result<Vec<CheckOutcome>> {
    if !(1..=40).contains(&degree) {
        return invalid(format!("degree must be within 1..=40, got {degree}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    for (suite, id) in [
        ("variation_gradient", VariationIdentity::Gradient),
        ("variation_laplacian", VariationIdentity::Laplacian),
        ("variation_inverse", VariationIdentity::DirichletInverse),
    ] {
        let mut worst = 0.0f64;
        for _ in 0..CASES {
            let u = random_harmonic_gradient(&mut rng, degree);
            let mut f = random_field(&mut rng, degree);
            if id == VariationIdentity::Gradient {
                f = f.re_part();
            }
            let t = rng.gen_range(-3.0..3.0);
            worst = worst.max(variation_residual(id, &u, &f, t)?.max());
        }
        out.push(outcome(suite, CASES, worst, 1e-8));
    }

    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let v = random_harmonic_gradient(&mut rng, degree);
        let t = rng.gen_range(-3.0..3.0);
        let rotated = compose_rotation(&v, t);
        let stray = rotated.terms().filter(|&((j, _), _)| j > 0).fold(0.0f64, |m, (_, c)| m.max(c.norm()));
        let phase_err = v
            .terms()
            .map(|((_, k), c)| (rotated.coeff(0, k) - c * Complex::from_polar(1.0, -(k as f64) * t)).norm())
            .fold(0.0f64, f64::max);
        worst = worst.max(stray).max(phase_err);
    }
    out.push(outcome("rotated_harmonic_gradient", CASES, worst, 1e-13));

    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let g = random_field(&mut rng, degree);
        let u = dirichlet_inverse(&g);
        let h = harmonic_projection(&g);
        let t = rng.gen_range(-3.0..3.0);
        let k = ConjugatedOperator::new(BaseOperator::Laplacian, t);
        let kinv = ConjugatedOperator::new(BaseOperator::DirichletInverse, t);
        let hr = ConjugatedOperator::new(BaseOperator::HarmonicProjection, t);
        let round_trip = kinv.apply(&k.apply(&g)?)?;
        let complement = &g - &hr.apply(&g)?;
        let scale = g.max_abs_coeff().max(1.0);
        worst = worst
            .max(laplacian(&u).max_abs_diff(&g) / scale)
            .max(boundary_trace(&u).max_abs() / scale)
            .max(harmonic_projection(&h).max_abs_diff(&h) / scale)
            .max(round_trip.max_abs_diff(&complement) / scale);
    }
    out.push(outcome("elliptic", CASES, worst, 1e-11));

    let mut worst = 0.0f64;
    for _ in 0..CASES {
        let y = random_field(&mut rng, degree);
        let n = rng.gen_range(2..=degree.max(2));
        let d = split_field(&y, n)?;
        HarmonicGradient::from_field(&d.high)?;
        HarmonicGradient::from_field(&d.low)?;
        let scale = l2_inner(&y, &y).re.max(1.0);
        let sum = &(&d.high + &d.low) + &d.remainder;
        worst = worst
            .max(sum.max_abs_diff(&y))
            .max(l2_inner(&d.high, &d.low).norm() / scale)
            .max(l2_inner(&d.high, &d.remainder).norm() / scale)
            .max(l2_inner(&d.low, &d.remainder).norm() / scale);
    }
    out.push(outcome("orthogonality", CASES, worst, 1e-11));

    Ok(out)
}
