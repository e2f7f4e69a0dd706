//! The rigidly rotating steady state: `v = iz`, `H = ibz` on the unit disk.

use num_complex::Complex;

use crate::error::invalid;
use crate::field::{compose_rotation, grad, normal_component_trace};
use crate::operators::{advect, dirichlet_inverse};
use crate::{field, MonomialField, Real, Result};

type F<T> = MonomialField<T>;

/// Steady solution in rescaled variables.
///
/// `b` is the physical field strength and `mu0` the permeability; the stored
/// magnetic field is the rescaled `H = i (b / √mu0) z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState<T: Real> {
    pub b: T,
    pub mu0: T,
    pub velocity: F<T>,
    pub magnetic: F<T>,
    pub pressure: F<T>,
}

pub fn steady_state<T: Real>(b: T, mu0: T) -> Result<SteadyState<T>> {
    if !(mu0 > T::zero()) || !mu0.is_finite() {
        return invalid(format!("mu0 must be positive, got {mu0}"));
    }
    if !b.is_finite() {
        return invalid("b must be finite");
    }
    let velocity = F::monomial(1, 0, Complex::new(T::zero(), T::one()));
    let magnetic = F::monomial(1, 0, Complex::new(T::zero(), b / mu0.sqrt()));
    // Δq = tr(DH)² - tr(Dv)² = 2 - 2 b²/mu0, with q = 0 on the circle.
    let source = F::real_constant(T::lit(2.0) * (T::one() - b * b / mu0));
    let pressure = dirichlet_inverse(&source);
    Ok(SteadyState { b, mu0, velocity, magnetic, pressure })
}

impl<T: Real> SteadyState<T> {
    pub fn pressure_gradient(&self) -> F<T> {
        grad(&self.pressure).expect("pressure is real")
    }

    /// `H·∇H`
    pub fn magnetic_advection(&self) -> Result<F<T>> {
        advect(&self.magnetic, &self.magnetic)
    }

    /// `v·∇v`
    pub fn velocity_advection(&self) -> Result<F<T>> {
        advect(&self.velocity, &self.velocity)
    }

    /// Outward normal derivative of the pressure on the circle (constant here).
    pub fn normal_pressure_derivative(&self) -> T {
        normal_component_trace(&self.pressure_gradient()).get(0).re
    }

    /// Residual of the steady momentum balance `v·∇v + ∇q - H·∇H`.
    pub fn momentum_residual(&self) -> Result<T> {
        let lhs = &(&self.velocity_advection()? + &self.pressure_gradient()) - &self.magnetic_advection()?;
        Ok(lhs.max_abs_coeff())
    }
}

/// `1 - b²/mu0`; the stability condition holds when this is negative.
pub fn taylor_sign<T: Real>(b: T, mu0: T) -> Result<T> {
    if !(mu0 > T::zero()) || !mu0.is_finite() {
        return invalid(format!("mu0 must be positive, got {mu0}"));
    }
    Ok(T::one() - b * b / mu0)
}

pub fn stability_condition_holds<T: Real>(b: T, mu0: T) -> Result<bool> {
    Ok(taylor_sign(b, mu0)? < T::zero())
}

/// Magnetic field carried by the rotation flow: `e^{it} H0(e^{-it} x)`.
pub fn frozen_flux<T: Real>(t: T, h0: &F<T>) -> F<T> {
    compose_rotation(h0, -t).scale(Complex::new(t.cos(), t.sin()))
}

/// Lagrangian momentum residual `η̈ + ∇q∘η - (H·∇H)∘η` along `η = e^{it} z`,
/// as a maximum coefficient magnitude. Uses `mu0 = 1`.
pub fn steady_residual<T: Real>(b: T, t: T) -> Result<T> {
    let state = steady_state(b, T::one())?;
    let phase = Complex::new(t.cos(), t.sin());
    let accel = F::z().scale(-phase);
    let h = frozen_flux(t, &state.magnetic);
    let pressure_term = compose_rotation(&state.pressure_gradient(), t);
    let lorentz = compose_rotation(&advect(&h, &h)?, t);
    Ok((&(&accel + &pressure_term) - &lorentz).max_abs_coeff())
}

/// Divergence and boundary normal component of a magnetic field, for checks.
pub fn flux_defects<T: Real>(h: &F<T>) -> (T, T) {
    (field::divergence(h).max_abs_coeff(), normal_component_trace(h).max_abs())
}
