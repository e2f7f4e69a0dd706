//! Independent oracles: pointwise evaluation, finite differences and disk quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use illpose_core::{Field, C64};
use rand::Rng;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Tensor rule on the unit disk: Gauss-Legendre in the radius, uniform in the angle.
/// Exact for `z^j z̄^k` when `j + k < 2 radial - 1` and `|j - k| < angular`.
pub fn disk_rule(radial: usize, angular: usize) -> Vec<(C64, f64)> {
    let mut out = Vec::with_capacity(radial * angular);
    for (x, w) in gauss_legendre(radial) {
        let r = 0.5 * (x + 1.0);
        for m in 0..angular {
            let theta = 2.0 * PI * m as f64 / angular as f64;
            out.push((C64::from_polar(r, theta), 0.5 * w * r * 2.0 * PI / angular as f64));
        }
    }
    out
}

/// `∫_D f ḡ` by quadrature.
pub fn quadrature_inner(f: &Field, g: &Field, rule: &[(C64, f64)]) -> C64 {
    rule.iter().map(|&(z, w)| f.eval(z) * g.eval(z).conj() * w).sum()
}

pub type Pointwise<'a> = dyn Fn(C64) -> C64 + 'a;

const H: f64 = 1e-3;

/// Fourth-order central difference along `dir`.
pub fn directional(f: &Pointwise, z: C64, dir: C64) -> C64 {
    let at = |s: f64| f(z + dir * s);
    (at(-2.0 * H) - at(2.0 * H) + (at(H) - at(-H)) * 8.0) / (12.0 * H)
}

pub fn dx(f: &Pointwise, z: C64) -> C64 {
    directional(f, z, C64::new(1.0, 0.0))
}

pub fn dy(f: &Pointwise, z: C64) -> C64 {
    directional(f, z, C64::new(0.0, 1.0))
}

/// Fourth-order five-point-per-axis Laplacian.
pub fn laplacian_fd(f: &Pointwise, z: C64) -> C64 {
    let mut acc = f(z) * (-30.0 * 2.0);
    for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
        acc += (f(z + dir * H) + f(z - dir * H)) * 16.0;
        acc -= f(z + dir * (2.0 * H)) + f(z - dir * (2.0 * H));
    }
    acc / (12.0 * H * H)
}

/// Interior sample points away from the circle.
pub fn interior_points() -> Vec<C64> {
    let mut pts = vec![C64::new(0.0, 0.0)];
    for r in [0.25, 0.5, 0.8] {
        for m in 0..7 {
            pts.push(C64::from_polar(r, 0.3 + 2.0 * PI * m as f64 / 7.0));
        }
    }
    pts
}

pub fn circle_points(count: usize) -> Vec<C64> {
    (0..count).map(|m| C64::from_polar(1.0, 0.1 + 2.0 * PI * m as f64 / count as f64)).collect()
}

/// Random coefficients on `j + k ≤ degree`, every monomial present.
pub fn dense_field<R: Rng>(rng: &mut R, degree: u32) -> Field {
    let mut terms = Vec::new();
    for j in 0..=degree {
        for k in 0..=degree - j {
            terms.push(((j, k), C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
        }
    }
    Field::from_terms(terms)
}

/// Relative size used for finite-difference tolerances.
pub fn scale(f: &Field) -> f64 {
    f.terms().map(|(_, c)| c.norm()).sum::<f64>().max(1.0)
}
