//! Splitting a perturbation into high and low harmonic-gradient parts plus a
//! remainder, the energies built on that split, and the split dynamics.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::invalid;
use crate::field::{compose_rotation, divergence, grad, l2_inner, normal_component_trace};
use crate::linear::{forcing, pressure_coupling};
use crate::ode::{rk4_step, step_plan, OdeState};
use crate::operators::{dirichlet_inverse, harmonic_projection, neumann_harmonic};
use crate::{Error, MonomialField, Real, Result};

type F<T> = MonomialField<T>;

/// `Σ_m c_m · m z̄^{m-1}`, the gradient of the harmonic `Re Σ conj(c_m) z^m`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HarmonicGradient<T> {
    modes: BTreeMap<u32, Complex<T>>,
}

impl<T: Real> HarmonicGradient<T> {
    pub fn from_modes<I: IntoIterator<Item = (u32, Complex<T>)>>(modes: I) -> Self {
        let eps = T::prune_threshold();
        let mut map: BTreeMap<u32, Complex<T>> = BTreeMap::new();
        for (m, c) in modes {
            assert!(m >= 1, "harmonic gradient modes start at degree 1");
            let entry = map.entry(m).or_default();
            *entry = *entry + c;
        }
        map.retain(|_, c| !(c.norm() < eps));
        Self { modes: map }
    }

    /// Reads a field of the form `Σ a_k z̄^k`; any `z`-dependence is an error.
    pub fn from_field(v: &F<T>) -> Result<Self> {
        let stray = v.terms().filter(|&((j, _), _)| j > 0).fold(T::zero(), |m, (_, c)| m.max(c.norm()));
        if stray > T::real_tolerance() {
            return Err(Error::NotHarmonicGradient { residual: stray.as_f64() });
        }
        Ok(Self::from_modes(
            v.terms().filter(|&((j, _), _)| j == 0).map(|((_, k), c)| (k + 1, c / T::lit(k as f64 + 1.0))),
        ))
    }

    pub fn to_field(&self) -> F<T> {
        F::from_terms(self.modes().map(|(m, c)| ((0, m - 1), c * T::lit(m as f64))))
    }

    pub fn mode(&self, m: u32) -> Complex<T> {
        self.modes.get(&m).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = (u32, Complex<T>)> + '_ {
        self.modes.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_modes(self.modes().chain(other.modes()))
    }

    pub fn scale_real(&self, x: T) -> Self {
        Self::from_modes(self.modes().map(|(m, c)| (m, c * x)))
    }

    /// Modes below `n` and modes from `n` upward.
    pub fn split_at(&self, n: u32) -> (Self, Self) {
        let low = Self::from_modes(self.modes().filter(|&(m, _)| m < n));
        let high = Self::from_modes(self.modes().filter(|&(m, _)| m >= n));
        (low, high)
    }
}

/// `A^s` acting on `z̄^k` as multiplication by `|k - 1|^s`.
///
/// The `k = 1` mode is annihilated for `s > 0`; a negative power with that
/// mode present is an error.
pub fn a_power<T: Real>(s: T, hg: &HarmonicGradient<T>) -> Result<HarmonicGradient<T>> {
    let mut out = Vec::new();
    for (m, c) in hg.modes() {
        let eigen = T::lit((m as f64 - 2.0).abs());
        if eigen == T::zero() && s < T::zero() {
            return Err(Error::SingularPower { power: s.as_f64() });
        }
        out.push((m, c * eigen.powf(s)));
    }
    Ok(HarmonicGradient::from_modes(out))
}

/// `‖A^s hg‖_{L²}`.
pub fn sobolev_norm<T: Real>(s: T, hg: &HarmonicGradient<T>) -> Result<T> {
    let f = a_power(s, hg)?.to_field();
    Ok(l2_inner(&f, &f).re.max(T::zero()).sqrt())
}

/// `(Σ_{|α| ≤ order} ‖∂^α f‖²)^{1/2}` over ordered multi-indices; fractional
/// orders round up.
pub fn standard_sobolev_norm<T: Real>(f: &F<T>, order: T) -> T {
    let top = order.ceil().max(T::zero()).to_usize().unwrap_or(0);
    let mut level = vec![f.clone()];
    let mut total = T::zero();
    for depth in 0..=top {
        total = total + level.iter().map(|g| l2_inner(g, g).re).fold(T::zero(), |a, b| a + b);
        if depth < top {
            level = level.iter().flat_map(|g| [g.d1(), g.d2()]).filter(|g| !g.is_zero()).collect();
        }
    }
    total.max(T::zero()).sqrt()
}

/// One field split as `∇f + ∇g + N` relative to the threshold degree `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<T: Real> {
    /// Gradients of harmonics of degree at least `n`.
    pub high: F<T>,
    /// Gradients of harmonics of degree `1..n`.
    pub low: F<T>,
    /// Remainder, orthogonal to every harmonic gradient.
    pub remainder: F<T>,
}

/// Splits `y`: remove the gradient of the Dirichlet potential of `div y`,
/// match the normal component with a Neumann harmonic `h`, and split `∇h` by degree.
pub fn split_field<T: Real>(y: &F<T>, n: u32) -> Result<Decomposition<T>> {
    let potential = dirichlet_inverse(&divergence(y));
    let solenoidal = y - &grad(&potential)?;
    let h = neumann_harmonic(&normal_component_trace(&solenoidal))?;
    let degree = |(j, k): (u32, u32)| j.max(k);
    let high_h = F::from_terms(h.terms().filter(|&(key, _)| degree(key) >= n));
    let low_h = F::from_terms(h.terms().filter(|&(key, _)| degree(key) < n));
    let high = grad(&high_h)?;
    let low = grad(&low_h)?;
    let remainder = &(y - &high) - &low;
    Ok(Decomposition { high, low, remainder })
}

/// A perturbation and its velocity, each split into `∇f`, `∇g` and `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompState<T: Real> {
    pub n: u32,
    pub t: T,
    pub grad_f: HarmonicGradient<T>,
    pub grad_g: HarmonicGradient<T>,
    pub remainder: F<T>,
    pub grad_f_dot: HarmonicGradient<T>,
    pub grad_g_dot: HarmonicGradient<T>,
    pub remainder_dot: F<T>,
}

pub fn decompose<T: Real>(y: &F<T>, y_dot: &F<T>, n: u32) -> Result<DecompState<T>> {
    decompose_at(y, y_dot, n, T::zero())
}

pub fn decompose_at<T: Real>(y: &F<T>, y_dot: &F<T>, n: u32, t: T) -> Result<DecompState<T>> {
    if n < 1 {
        return invalid("split degree n must be at least 1");
    }
    let pos = split_field(y, n)?;
    let vel = split_field(y_dot, n)?;
    Ok(DecompState {
        n,
        t,
        grad_f: HarmonicGradient::from_field(&pos.high)?,
        grad_g: HarmonicGradient::from_field(&pos.low)?,
        remainder: pos.remainder,
        grad_f_dot: HarmonicGradient::from_field(&vel.high)?,
        grad_g_dot: HarmonicGradient::from_field(&vel.low)?,
        remainder_dot: vel.remainder,
    })
}

impl<T: Real> DecompState<T> {
    pub fn displacement(&self) -> F<T> {
        &(&self.grad_f.to_field() + &self.grad_g.to_field()) + &self.remainder
    }

    pub fn velocity(&self) -> F<T> {
        &(&self.grad_f_dot.to_field() + &self.grad_g_dot.to_field()) + &self.remainder_dot
    }

    fn to_parts(&self) -> Vec<F<T>> {
        vec![
            self.grad_f.to_field(),
            self.grad_g.to_field(),
            self.remainder.clone(),
            self.grad_f_dot.to_field(),
            self.grad_g_dot.to_field(),
            self.remainder_dot.clone(),
        ]
    }

    fn from_parts(n: u32, t: T, p: &[F<T>]) -> Result<Self> {
        Ok(Self {
            n,
            t,
            grad_f: HarmonicGradient::from_field(&p[0])?,
            grad_g: HarmonicGradient::from_field(&p[1])?,
            remainder: p[2].clone(),
            grad_f_dot: HarmonicGradient::from_field(&p[3])?,
            grad_g_dot: HarmonicGradient::from_field(&p[4])?,
            remainder_dot: p[5].clone(),
        })
    }
}

/// Which split equation receives the forcing `b² e^{it} η`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ForcingPlacement {
    /// All of it in the remainder equation; `η = z` is pure remainder.
    NEquation,
    /// Half in each harmonic-gradient equation.
    FgEquations,
    /// Half in the remainder equation and half in the high-mode equation.
    Split,
}

/// `Ã v = (1 - b²) (∇H)_η ⟨v, η⟩`.
fn boundary_response<T: Real>(v: &F<T>, b: T, t: T) -> Result<F<T>> {
    let eta_conj = F::zbar().scale(Complex::new(t.cos(), -t.sin()));
    let normal = v.mul(&eta_conj)?.re_part();
    let pulled = compose_rotation(&normal, -t);
    let response = compose_rotation(&grad(&harmonic_projection(&pulled))?, t);
    Ok(response.scale_real(T::one() - b * b))
}

fn decomposed_rhs<T: Real>(p: &[F<T>], n: u32, b: T, t: T, placement: ForcingPlacement) -> Result<Vec<F<T>>> {
    let [f, g, rem, f_dot, g_dot, rem_dot] = [&p[0], &p[1], &p[2], &p[3], &p[4], &p[5]];
    let damp = b * b - T::one();
    let harmonic = f + g;
    let response = &harmonic.scale_real(damp) + &boundary_response(&(&harmonic + rem), b, t)?;
    let projected = split_field(&response, n)?;
    let coupling = pressure_coupling(rem, rem_dot, b, t)?;
    let mut rem_acc = &rem.scale_real(damp) + &projected.remainder;
    for term in &coupling {
        rem_acc = &rem_acc + term;
    }
    let mut f_acc = projected.high;
    let mut g_acc = projected.low;
    let push = forcing(b, t);
    let half = push.scale_real(T::lit(0.5));
    match placement {
        ForcingPlacement::NEquation => rem_acc = &rem_acc + &push,
        ForcingPlacement::FgEquations => {
            f_acc = &f_acc + &half;
            g_acc = &g_acc + &half;
        }
        ForcingPlacement::Split => {
            rem_acc = &rem_acc + &half;
            f_acc = &f_acc + &half;
        }
    }
    Ok(vec![f_dot.clone(), g_dot.clone(), rem_dot.clone(), f_acc, g_acc, rem_acc])
}

/// RK4 on the split system, returning every step including the start.
///
/// Only [`ForcingPlacement::NEquation`] keeps the harmonic parts harmonic; the
/// other placements push `z` into them and fail with `NotHarmonicGradient`
/// once it exceeds the tolerance. Use [`integrate_decomposed_raw`] to study them.
pub fn integrate_decomposed<T: Real>(
    init: &DecompState<T>,
    b: T,
    t_end: T,
    dt: T,
    placement: ForcingPlacement,
) -> Result<Vec<DecompState<T>>> {
    integrate_decomposed_raw(init, b, t_end, dt, placement)?
        .into_iter()
        .map(|(t, parts)| DecompState::from_parts(init.n, t, &parts))
        .collect()
}

/// Like [`integrate_decomposed`] but returns the raw part fields
/// `[∇f, ∇g, N, ∇ḟ, ∇ġ, Ṅ]` without reinterpreting them.
pub fn integrate_decomposed_raw<T: Real>(
    init: &DecompState<T>,
    b: T,
    t_end: T,
    dt: T,
    placement: ForcingPlacement,
) -> Result<Vec<(T, Vec<F<T>>)>> {
    if !(b.abs() < T::one()) {
        return invalid(format!("|b| must be below 1, got {b}"));
    }
    if !(dt > T::zero()) || !(t_end >= init.t) {
        return invalid("need dt > 0 and t_end not before the initial time");
    }
    let n = init.n;
    let (steps, h) = step_plan(t_end - init.t, dt);
    let mut rhs = |t: T, y: &Vec<F<T>>| decomposed_rhs(y, n, b, t, placement);
    let mut y = init.to_parts();
    let mut out = vec![(init.t, y.clone())];
    for i in 0..steps {
        let t = init.t + h * T::lit(i as f64);
        y = rk4_step(&y, t, h, &mut rhs)?;
        let t_next = if i + 1 == steps { t_end } else { t + h };
        if !y.is_finite() {
            return Err(Error::NonFinite { t: t_next.as_f64() });
        }
        out.push((t_next, y.clone()));
    }
    Ok(out)
}

/// Energies of a split state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport<T> {
    pub n: u32,
    pub t: T,
    pub b: T,
    pub mu: T,
    pub sigma: T,
    pub nu: T,
    /// `‖A^μ (∇ḟ + √(1-b²) A^{1/2} ∇f)‖²`
    pub e_plus: T,
    /// `‖A^μ (∇ḟ - √(1-b²) A^{1/2} ∇f)‖²`
    pub e_minus: T,
    /// `(E⁺ + E⁻)/2 = ‖A^μ ∇ḟ‖² + (1-b²) ‖A^{μ+1/2} ∇f‖²`
    pub e_total: T,
    /// `E⁺` at order `μ + 1/4`.
    pub e_plus_quarter: T,
    /// `n ‖N‖²_σ + ‖Ṅ‖²_σ` in the standard Sobolev norm.
    pub f_sigma: T,
    /// `‖∇ġ‖²_ν + ‖A^{1/2} ∇g‖²_ν`
    pub g_nu: T,
    /// Whether the `z̄` mode, which `A` annihilates, carries energy.
    pub annihilated_mode: bool,
}

fn plus_minus<T: Real>(state: &DecompState<T>, b: T, mu: T) -> Result<(T, T)> {
    let c = (T::one() - b * b).sqrt();
    let vel = a_power(mu, &state.grad_f_dot)?;
    let pos = a_power(mu + T::lit(0.5), &state.grad_f)?.scale_real(c);
    let norm_sq = |hg: &HarmonicGradient<T>| {
        let f = hg.to_field();
        l2_inner(&f, &f).re
    };
    Ok((norm_sq(&vel.add(&pos)), norm_sq(&vel.add(&pos.scale_real(-T::one())))))
}

pub fn energies<T: Real>(state: &DecompState<T>, b: T, mu: T, sigma: T, nu: T) -> Result<EnergyReport<T>> {
    if !(b.abs() < T::one()) {
        return invalid(format!("|b| must be below 1, got {b}"));
    }
    let (e_plus, e_minus) = plus_minus(state, b, mu)?;
    let (e_plus_quarter, _) = plus_minus(state, b, mu + T::lit(0.25))?;
    let n = T::lit(state.n as f64);
    let rem = standard_sobolev_norm(&state.remainder, sigma);
    let rem_dot = standard_sobolev_norm(&state.remainder_dot, sigma);
    let g_vel = sobolev_norm(nu, &state.grad_g_dot)?;
    let g_pos = sobolev_norm(nu + T::lit(0.5), &state.grad_g)?;
    let annihilated_mode = [&state.grad_f, &state.grad_g, &state.grad_f_dot, &state.grad_g_dot]
        .iter()
        .any(|hg| hg.mode(2) != Complex::default());
    Ok(EnergyReport {
        n: state.n,
        t: state.t,
        b,
        mu,
        sigma,
        nu,
        e_plus,
        e_minus,
        e_total: (e_plus + e_minus) / T::lit(2.0),
        e_plus_quarter,
        f_sigma: n * rem * rem + rem_dot * rem_dot,
        g_nu: g_vel * g_vel + g_pos * g_pos,
        annihilated_mode,
    })
}

/// Outcome of the three energy inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvariantFlags {
    /// `E⁺_μ ≥ E⁻_μ`
    pub plus_dominates_minus: bool,
    /// `E⁺_μ ≥ √n F_{μ+1}`
    pub controls_remainder: bool,
    /// `E⁺_{μ+1/4} ≥ (2√(1-b²)/(2-b²)) n^{3/4} G_μ`
    pub controls_low_modes: bool,
}

impl InvariantFlags {
    pub fn all(&self) -> bool {
        self.plus_dominates_minus && self.controls_remainder && self.controls_low_modes
    }
}

/// Default relative slack for [`invariant_check`].
pub const INVARIANT_SLACK: f64 = 1e-9;

/// Checks the three inequalities; the report must carry `σ = μ + 1` and `ν = μ`.
pub fn invariant_check<T: Real>(report: &EnergyReport<T>, slack: T) -> Result<InvariantFlags> {
    if report.sigma != report.mu + T::one() || report.nu != report.mu {
        return invalid("invariant check needs sigma = mu + 1 and nu = mu");
    }
    let ge = |lhs: T, rhs: T| lhs >= rhs - slack * lhs.abs().max(rhs.abs());
    let n = T::lit(report.n as f64);
    let b2 = report.b * report.b;
    let two = T::lit(2.0);
    let low_factor = two * (T::one() - b2).sqrt() / (two - b2) * n.powf(T::lit(0.75));
    Ok(InvariantFlags {
        plus_dominates_minus: ge(report.e_plus, report.e_minus),
        controls_remainder: ge(report.e_plus, n.sqrt() * report.f_sigma),
        controls_low_modes: ge(report.e_plus_quarter, low_factor * report.g_nu),
    })
}
