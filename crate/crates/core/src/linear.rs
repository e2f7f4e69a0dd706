//! Linearized dynamics of a perturbation `w` of the rotating flow.
//!
//! The perturbation is a Lagrangian displacement; `u = w∘η⁻¹` is the same
//! field seen in the rotated (Eulerian) frame, with `η = e^{it} z`.

use num_complex::Complex;

use crate::error::invalid;
use crate::field::{compose_rotation, divergence, grad};
use crate::ode::{rk4_step, step_plan, OdeState};
use crate::operators::{advect, dirichlet_inverse, harmonic_projection};
use crate::{Error, MonomialField, Real, Result};

type F<T> = MonomialField<T>;

fn cis<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

/// Displacement, its velocity, and the time.
#[derive(Clone, Debug, PartialEq)]
pub struct LinState<T: Real> {
    pub w: F<T>,
    pub w_dot: F<T>,
    pub t: T,
}

impl<T: Real> LinState<T> {
    pub fn new(w: F<T>, w_dot: F<T>, t: T) -> Self {
        Self { w, w_dot, t }
    }

    pub fn at_rest(t: T) -> Self {
        Self::new(F::zero(), F::zero(), t)
    }
}

/// `(∇Δ⁻¹)_η s = R_t ∇ Δ⁻¹ R_{-t} s` for a real scalar `s`.
pub(crate) fn rotated_grad_inverse<T: Real>(s: &F<T>, t: T) -> Result<F<T>> {
    let pulled = compose_rotation(s, -t);
    Ok(compose_rotation(&grad(&dirichlet_inverse(&pulled))?, t))
}

fn partial<T: Real>(f: &F<T>, axis: usize) -> F<T> {
    if axis == 0 {
        f.d1()
    } else {
        f.d2()
    }
}

/// `Σ ∂_k ∂_l w^i · (∂_i (H^k H^l))∘η` for the reference field `h0`.
pub(crate) fn hessian_coupling<T: Real>(w: &F<T>, h0: &F<T>, t: T) -> Result<F<T>> {
    let wc = [w.re_part(), w.im_part()];
    let hc = [h0.re_part(), h0.im_part()];
    let mut acc = F::zero();
    for k in 0..2 {
        for l in 0..2 {
            let product = hc[k].mul(&hc[l])?;
            for (i, wi) in wc.iter().enumerate() {
                let weight = compose_rotation(&partial(&product, i), t);
                let second = partial(&partial(wi, k), l);
                acc = &acc + &second.mul(&weight)?;
            }
        }
    }
    Ok(acc)
}

/// `2 Σ ∂_k w^j · (Σ_i ∂_j H^i ∂_i H^k)∘η` for the reference field `h0`.
pub(crate) fn stretching_coupling<T: Real>(w: &F<T>, h0: &F<T>, t: T) -> Result<F<T>> {
    let wc = [w.re_part(), w.im_part()];
    let hc = [h0.re_part(), h0.im_part()];
    let mut acc = F::zero();
    for (j, wj) in wc.iter().enumerate() {
        for k in 0..2 {
            let mut weight = F::zero();
            for (i, hi) in hc.iter().enumerate() {
                weight = &weight + &partial(hi, j).mul(&partial(&hc[k], i))?;
            }
            let weight = compose_rotation(&weight, t);
            acc = &acc + &partial(wj, k).mul(&weight)?;
        }
    }
    Ok(acc.scale_real(T::lit(2.0)))
}

/// Reference magnetic field `i b z` in Lagrangian labels.
pub fn reference_field<T: Real>(b: T) -> F<T> {
    F::monomial(1, 0, Complex::new(T::zero(), b))
}

/// Pressure-gradient coupling shared with the decomposed system:
/// the divergence, velocity, Hessian and stretching terms.
pub(crate) fn pressure_coupling<T: Real>(w: &F<T>, w_dot: &F<T>, b: T, t: T) -> Result<[F<T>; 3]> {
    let two = T::lit(2.0);
    let phase = cis(t);
    let u = compose_rotation(w, -t);
    let div_part = compose_rotation(&divergence(&u), t);
    // tr(i e^{-it} Dẇ) = Re(i e^{-it} · 2 ∂_z ẇ)
    let vel_part = w_dot.d_z().scale(Complex::<T>::i() * phase.conj() * two).re_part();
    let transport = rotated_grad_inverse(&(&div_part + &vel_part).scale_real(two), t)?;
    let h0 = reference_field(b);
    let hessian = -rotated_grad_inverse(&hessian_coupling(w, &h0, t)?, t)?;
    let stretching = -rotated_grad_inverse(&stretching_coupling(w, &h0, t)?, t)?.scale(phase);
    Ok([transport, hessian, stretching])
}

/// The forcing `b² e^{it} η = b² e^{2it} z`.
pub fn forcing<T: Real>(b: T, t: T) -> F<T> {
    F::z().scale(cis(t + t) * (b * b))
}

/// The five contributions to `ẅ`, in order: pressure response to the
/// boundary deformation, transport, Hessian coupling, field stretching, forcing.
pub fn linearized_terms<T: Real>(state: &LinState<T>, b: T) -> Result<[F<T>; 5]> {
    let t = state.t;
    let u = compose_rotation(&state.w, -t);
    let minus_two = F::real_constant(T::lit(-2.0));
    let base = dirichlet_inverse(&minus_two);
    let commutator = &advect(&u, &grad(&base)?)? - &grad(&dirichlet_inverse(&advect(&u, &minus_two)?))?;
    let harmonic = grad(&harmonic_projection(&advect(&u, &base)?))?;
    let deformation = compose_rotation(&(&commutator - &harmonic), t).scale_real(T::one() - b * b);
    let [transport, hessian, stretching] = pressure_coupling(&state.w, &state.w_dot, b, t)?;
    Ok([deformation, transport, hessian, stretching, forcing(b, t)])
}

/// `ẅ` for the given state.
pub fn linearized_rhs<T: Real>(state: &LinState<T>, b: T) -> Result<F<T>> {
    let terms = linearized_terms(state, b)?;
    Ok(terms.iter().fold(F::zero(), |acc, f| &acc + f))
}

fn check_b<T: Real>(b: T) -> Result<()> {
    if b.abs() < T::one() {
        Ok(())
    } else {
        invalid(format!("|b| must be below 1, got {b}"))
    }
}

fn check_step<T: Real>(t_end: T, dt: T) -> Result<()> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return invalid(format!("dt must be positive, got {dt}"));
    }
    if !(t_end >= T::zero()) || !t_end.is_finite() {
        return invalid(format!("t_end must be non-negative, got {t_end}"));
    }
    Ok(())
}

fn nonfinite<T: Real>(t: T) -> Error {
    Error::NonFinite { t: t.as_f64() }
}

/// RK4 from `init.t` to `t_end`, returning every step including the start.
pub fn integrate_linearized<T: Real>(init: &LinState<T>, b: T, t_end: T, dt: T) -> Result<Vec<LinState<T>>> {
    check_b(b)?;
    check_step(t_end - init.t, dt)?;
    let (steps, h) = step_plan(t_end - init.t, dt);
    let mut rhs = |t: T, y: &Vec<F<T>>| -> Result<Vec<F<T>>> {
        let acc = linearized_rhs(&LinState::new(y[0].clone(), y[1].clone(), t), b)?;
        Ok(vec![y[1].clone(), acc])
    };
    let mut y = vec![init.w.clone(), init.w_dot.clone()];
    let mut out = vec![init.clone()];
    for i in 0..steps {
        let t = init.t + h * T::lit(i as f64);
        y = rk4_step(&y, t, h, &mut rhs)?;
        let t_next = if i + 1 == steps { t_end } else { t + h };
        if !y.is_finite() {
            return Err(nonfinite(t_next));
        }
        out.push(LinState::new(y[0].clone(), y[1].clone(), t_next));
    }
    Ok(out)
}

/// RK4 sampled only at the requested (ascending) times.
pub fn evolve_linearized<T: Real>(init: &LinState<T>, b: T, times: &[T], dt: T) -> Result<Vec<LinState<T>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut state = init.clone();
    for &t in times {
        if t < state.t {
            return invalid("sample times must be ascending and not before the initial time");
        }
        if t > state.t {
            state = integrate_linearized(&state, b, t, dt)?.pop().expect("nonempty");
        }
        out.push(state.clone());
    }
    Ok(out)
}

/// Closed-form mode of the linearized model seeded by `e^{-n^{1/4}} z̄^n`.
///
/// The displacement is `σ(t) z̄^n + c(t) z`, with `σ̈ = B² σ`,
/// `c̈ = B² c + b² e^{2it}` and `B = √((1-b²)(n-1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSolution<T> {
    pub n: u32,
    pub b: T,
    /// Growth rate `B`.
    pub rate: T,
    /// Coefficients of `e^{Bt}` and `e^{-Bt}` on `z̄^n`.
    pub c1: Complex<T>,
    pub c2: Complex<T>,
}

/// Amplitudes of the two components of a mode and their time derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeSample<T> {
    pub t: T,
    pub sigma: Complex<T>,
    pub sigma_dot: Complex<T>,
    pub forced: Complex<T>,
    pub forced_dot: Complex<T>,
}

impl<T: Real> ModeSample<T> {
    pub fn displacement(&self, n: u32) -> F<T> {
        &F::monomial(0, n, self.sigma) + &F::monomial(1, 0, self.forced)
    }

    pub fn velocity(&self, n: u32) -> F<T> {
        &F::monomial(0, n, self.sigma_dot) + &F::monomial(1, 0, self.forced_dot)
    }

    fn to_vec(self) -> Vec<Complex<T>> {
        vec![self.sigma, self.sigma_dot, self.forced, self.forced_dot]
    }

    fn from_vec(t: T, v: &[Complex<T>]) -> Self {
        Self { t, sigma: v[0], sigma_dot: v[1], forced: v[2], forced_dot: v[3] }
    }
}

fn check_mode<T: Real>(n: u32, b: T) -> Result<()> {
    if n < 2 {
        return invalid(format!("mode index n must be at least 2, got {n}"));
    }
    check_b(b)
}

/// Seed amplitude `e^{-n^{1/4}}`.
pub fn seed_amplitude<T: Real>(n: u32) -> T {
    (-T::lit(n as f64).powf(T::lit(0.25))).exp()
}

impl<T: Real> ModeSolution<T> {
    pub fn new(n: u32, b: T) -> Result<Self> {
        check_mode(n, b)?;
        let rate = ((T::one() - b * b) * T::lit(n as f64 - 1.0)).sqrt();
        let c1 = Complex::new(seed_amplitude::<T>(n) / (rate + rate), T::zero());
        Ok(Self { n, b, rate, c1, c2: -c1 })
    }

    fn forced_parts(&self, t: T) -> [Complex<T>; 3] {
        let b2 = self.b * self.b;
        let r = self.rate;
        let denom = r * r + T::lit(4.0);
        let (sh, ch) = ((r * t).sinh(), (r * t).cosh());
        let e2 = cis(t + t);
        let i = Complex::i();
        let k = b2 / denom;
        let two = T::lit(2.0);
        let c = (Complex::new(ch, T::zero()) - e2) * k + i * (two * b2 * sh / (r * denom));
        let c_dot = (Complex::new(r * sh, T::zero()) - i * e2 * two) * k + i * (two * b2 * ch / denom);
        let c_ddot = (Complex::new(r * r * ch, T::zero()) + e2 * T::lit(4.0)) * k + i * (two * b2 * r * sh / denom);
        [c, c_dot, c_ddot]
    }

    pub fn sample(&self, t: T) -> ModeSample<T> {
        let r = self.rate;
        let (ep, em) = ((r * t).exp(), (-r * t).exp());
        let sigma = self.c1 * ep + self.c2 * em;
        let sigma_dot = (self.c1 * ep - self.c2 * em) * r;
        let [forced, forced_dot, _] = self.forced_parts(t);
        ModeSample { t, sigma, sigma_dot, forced, forced_dot }
    }

    pub fn displacement(&self, t: T) -> F<T> {
        self.sample(t).displacement(self.n)
    }

    pub fn velocity(&self, t: T) -> F<T> {
        self.sample(t).velocity(self.n)
    }

    pub fn acceleration(&self, t: T) -> F<T> {
        let r = self.rate;
        let sigma = (self.c1 * (r * t).exp() + self.c2 * (-r * t).exp()) * (r * r);
        let [_, _, forced] = self.forced_parts(t);
        &F::monomial(0, self.n, sigma) + &F::monomial(1, 0, forced)
    }

    pub fn state(&self, t: T) -> LinState<T> {
        LinState::new(self.displacement(t), self.velocity(t), t)
    }
}

pub fn mode_closed_form<T: Real>(n: u32, b: T, t: T) -> Result<F<T>> {
    Ok(ModeSolution::new(n, b)?.displacement(t))
}

/// RK4 for the mode amplitudes from the seeded initial data.
pub fn integrate_mode<T: Real>(n: u32, b: T, t_end: T, dt: T) -> Result<Vec<ModeSample<T>>> {
    let zero = Complex::default();
    let seed = Complex::new(seed_amplitude::<T>(n), T::zero());
    let init = ModeSample { t: T::zero(), sigma: zero, sigma_dot: seed, forced: zero, forced_dot: zero };
    integrate_mode_from(n, b, init, t_end, dt)
}

/// RK4 for the mode amplitudes from arbitrary initial amplitudes.
pub fn integrate_mode_from<T: Real>(n: u32, b: T, init: ModeSample<T>, t_end: T, dt: T) -> Result<Vec<ModeSample<T>>> {
    check_mode(n, b)?;
    check_step(t_end - init.t, dt)?;
    let rate2 = (T::one() - b * b) * T::lit(n as f64 - 1.0);
    let b2 = b * b;
    let mut rhs = |t: T, y: &Vec<Complex<T>>| -> Result<Vec<Complex<T>>> {
        Ok(vec![y[1], y[0] * rate2, y[3], y[2] * rate2 + cis(t + t) * b2])
    };
    let (steps, h) = step_plan(t_end - init.t, dt);
    let mut y = init.to_vec();
    let mut out = vec![init];
    for i in 0..steps {
        let t = init.t + h * T::lit(i as f64);
        y = rk4_step(&y, t, h, &mut rhs)?;
        let t_next = if i + 1 == steps { t_end } else { t + h };
        if !y.is_finite() {
            return Err(nonfinite(t_next));
        }
        out.push(ModeSample::from_vec(t_next, &y));
    }
    Ok(out)
}

/// Largest coefficient of `ẅ - rhs(w, ẇ)` along the closed-form mode.
pub fn residual_weta<T: Real>(n: u32, b: T, samples: &[T]) -> Result<T> {
    let mode = ModeSolution::new(n, b)?;
    let mut worst = T::zero();
    for &t in samples {
        let rhs = linearized_rhs(&mode.state(t), b)?;
        worst = worst.max(mode.acceleration(t).max_abs_diff(&rhs));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::advect;

    type Fd = F<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn rest_state_feels_only_forcing() {
        for (b, t) in [(0.0, 0.3), (0.4, 1.2)] {
            let rhs = linearized_rhs(&LinState::at_rest(t), b).unwrap();
            let expected = Fd::z().scale(Complex::from_polar(b * b, 2.0 * t));
            assert!(rhs.max_abs_diff(&expected) < 1e-15);
        }
    }

    #[test]
    fn harmonic_gradients_feel_the_radial_derivative() {
        // On harmonic gradients only the boundary-deformation term survives,
        // and it acts as (1 - b²) x·∇.
        let w = Fd::from_terms([((0, 3), c(0.4, -0.1)), ((0, 5), c(0.0, 0.7)), ((0, 0), c(0.2, 0.2))]);
        let w_dot = Fd::from_terms([((0, 2), c(1.0, 0.5))]);
        for (b, t) in [(0.0, 0.0), (0.3, 0.7), (0.8, -1.4)] {
            let state = LinState::new(w.clone(), w_dot.clone(), t);
            let terms = linearized_terms(&state, b).unwrap();
            let radial = advect(&Fd::z(), &w).unwrap().scale_real(1.0 - b * b);
            assert!(terms[0].max_abs_diff(&radial) < 1e-13);
            for term in &terms[1..4] {
                assert!(term.max_abs_coeff() < 1e-13);
            }
        }
    }

    #[test]
    fn linear_displacement_terms() {
        // w = c z: deformation -(1-b²) c z, stretching 2 b² Re(c) e^{2it} z,
        // transport (2 Re(c e^{-it}) + 2 Re(i e^{-it} ċ)) e^{it} z.
        let (b, t) = (0.3, 0.8);
        let (cw, cv) = (c(0.5, -0.2), c(0.1, 0.9));
        let state = LinState::new(Fd::monomial(1, 0, cw), Fd::monomial(1, 0, cv), t);
        let terms = linearized_terms(&state, b).unwrap();
        let e = Complex::from_polar(1.0, t);
        let coeff = |i: usize| terms[i].coeff(1, 0);
        assert!((coeff(0) + cw * (1.0 - b * b)).norm() < 1e-14);
        let transport = e * 2.0 * ((cw * e.conj()).re + (Complex::<f64>::i() * e.conj() * cv).re);
        assert!((coeff(1) - transport).norm() < 1e-14);
        assert!(terms[2].is_zero());
        assert!((coeff(3) - e * e * (2.0 * b * b * cw.re)).norm() < 1e-14);
    }

    #[test]
    fn radial_eigenmode_grows_at_root_n() {
        // x·∇ z̄^n = n z̄^n, so at b = 0 the seeded mode grows like sinh(√n t).
        let n = 6u32;
        let k = seed_amplitude::<f64>(n);
        let rate = (n as f64).sqrt();
        for t in [0.0, 0.5, 1.3] {
            let w = Fd::monomial(0, n, c(k * (rate * t).sinh() / rate, 0.0));
            let w_dot = Fd::monomial(0, n, c(k * (rate * t).cosh(), 0.0));
            let accel = w.scale_real(rate * rate);
            let rhs = linearized_rhs(&LinState::new(w, w_dot, t), 0.0).unwrap();
            assert!(rhs.max_abs_diff(&accel) < 1e-12);
        }
    }

    #[test]
    fn closed_form_starts_from_seed() {
        let m = ModeSolution::new(4, 0.3).unwrap();
        assert!(m.displacement(0.0).is_zero());
        let v = m.velocity(0.0);
        assert!((v.coeff(0, 4).re - seed_amplitude::<f64>(4)).abs() < 1e-16);
        assert!(v.coeff(1, 0).norm() < 1e-15);
        assert!(mode_closed_form(2, 0.0, 1.0).unwrap().coeff(1, 0).norm() == 0.0);
    }

    #[test]
    fn closed_form_solves_its_mode_equations() {
        let m = ModeSolution::new(5, 0.3).unwrap();
        let r2 = m.rate * m.rate;
        for t in [0.0, 0.4, 1.1] {
            let s = m.sample(t);
            let a = m.acceleration(t);
            assert!((a.coeff(0, 5) - s.sigma * r2).norm() < 1e-13);
            let forcing = Complex::from_polar(0.09, 2.0 * t);
            assert!((a.coeff(1, 0) - s.forced * r2 - forcing).norm() < 1e-13);
        }
    }

    #[test]
    fn mode_integrator_reproduces_cosh() {
        let n = 5;
        let init = ModeSample {
            t: 0.0,
            sigma: c(1.0, 0.0),
            sigma_dot: c(0.0, 0.0),
            forced: c(0.0, 0.0),
            forced_dot: c(0.0, 0.0),
        };
        let out = integrate_mode_from(n, 0.0, init, 1.0, 1e-3).unwrap();
        let last = out.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert!((last.sigma.re - 2f64.cosh()).abs() < 1e-10);
    }

    #[test]
    fn mode_integrator_matches_closed_form() {
        let m = ModeSolution::new(8, 0.3).unwrap();
        let last = *integrate_mode(8, 0.3, 1.5, 1e-3).unwrap().last().unwrap();
        assert!(last.displacement(8).max_abs_diff(&m.displacement(1.5)) < 1e-9);
    }

    #[test]
    fn mode_integrator_with_zero_horizon() {
        let out = integrate_mode(2, 0.0, 0.0, 1e-3).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].displacement(2).is_zero());
    }

    #[test]
    fn parameter_validation() {
        assert!(ModeSolution::new(1, 0.0).is_err());
        assert!(ModeSolution::new(3, 1.0).is_err());
        assert!(integrate_mode(3, 0.0, 1.0, 0.0).is_err());
        assert!(integrate_linearized(&LinState::at_rest(0.0), 1.2, 1.0, 0.1).is_err());
    }

    #[test]
    fn direct_integration_of_radial_eigenmode() {
        let n = 4u32;
        let k = seed_amplitude::<f64>(n);
        let init = LinState::new(Fd::zero(), Fd::monomial(0, n, c(k, 0.0)), 0.0);
        let out = integrate_linearized(&init, 0.0, 1.0, 5e-3).unwrap();
        let last = out.last().unwrap();
        assert_eq!(last.t, 1.0);
        let exact = k * 2f64.sinh() / 2.0;
        assert!((last.w.coeff(0, n).re - exact).abs() < 1e-9);
        assert_eq!(last.w.num_terms(), 1);
    }

    #[test]
    fn sampled_evolution_matches_stepwise() {
        let init = LinState::new(Fd::zero(), Fd::monomial(0, 3, c(0.5, 0.0)), 0.0);
        let sampled = evolve_linearized(&init, 0.2, &[0.0, 0.25, 0.5], 0.05).unwrap();
        let stepped = integrate_linearized(&init, 0.2, 0.5, 0.05).unwrap();
        assert_eq!(sampled.len(), 3);
        assert!(sampled[2].w.max_abs_diff(&stepped.last().unwrap().w) < 1e-14);
    }
}
