//! Elliptic solves on the disk, advection, and rotation-conjugated operators.

use num_complex::Complex;

use crate::field::{boundary_trace, grad, laplacian, BoundaryTrace, MonomialField};
use crate::{Error, Real, Result};

type F<T> = MonomialField<T>;

fn harmonic_key(j: u32, k: u32) -> (u32, u32) {
    if j >= k {
        (j - k, 0)
    } else {
        (0, k - j)
    }
}

/// Solves `Δu = g` with `u = 0` on the unit circle.
///
/// `z^j z̄^k` maps to `(z^{j+1} z̄^{k+1} - h) / (4(j+1)(k+1))`, where `h` is the
/// harmonic monomial with the same boundary values as the numerator's first term.
pub fn dirichlet_inverse<T: Real>(g: &F<T>) -> F<T> {
    let terms = g.terms().flat_map(|((j, k), c)| {
        let c = c / T::lit(4.0 * (j as f64 + 1.0) * (k as f64 + 1.0));
        [((j + 1, k + 1), c), (harmonic_key(j, k), -c)]
    });
    F::from_terms(terms.collect::<Vec<_>>()).with_degree_cap(g.degree_cap())
}

/// Harmonic extension of the boundary values: `z^j z̄^k ↦ z^{j-k}` or `z̄^{k-j}`.
pub fn harmonic_projection<T: Real>(f: &F<T>) -> F<T> {
    let terms: Vec<_> = f.terms().map(|((j, k), c)| (harmonic_key(j, k), c)).collect();
    F::from_terms(terms).with_degree_cap(f.degree_cap())
}

/// Harmonic `h` with `∂_ν h = flux` on the circle and `h(0) = 0`.
pub fn neumann_harmonic<T: Real>(flux: &BoundaryTrace<T>) -> Result<F<T>> {
    let mean = flux.get(0).norm();
    if mean > T::lit(1e-10) {
        return Err(Error::NeumannIncompatible { mean: mean.as_f64() });
    }
    let terms: Vec<_> = flux
        .modes()
        .filter(|&(m, _)| m != 0)
        .map(|(m, c)| {
            let key = if m > 0 { (m as u32, 0) } else { (0, (-m) as u32) };
            (key, c / T::lit(m.unsigned_abs() as f64))
        })
        .collect();
    Ok(F::from_terms(terms))
}

/// Directional derivative `u·∇f = u ∂_z f + ū ∂_z̄ f` along a real vector field `u`.
pub fn advect<T: Real>(u: &F<T>, f: &F<T>) -> Result<F<T>> {
    Ok(&u.mul(&f.d_z())? + &u.conj().mul(&f.d_zbar())?)
}

/// Base operator that can be conjugated by a rotation of the disk.
#[derive(Clone, Debug)]
pub enum BaseOperator<T> {
    Gradient,
    Laplacian,
    DirichletInverse,
    HarmonicProjection,
    Advection(F<T>),
}

impl<T: Real> BaseOperator<T> {
    pub fn apply(&self, f: &F<T>) -> Result<F<T>> {
        match self {
            Self::Gradient => grad(f),
            Self::Laplacian => Ok(laplacian(f)),
            Self::DirichletInverse => Ok(dirichlet_inverse(f)),
            Self::HarmonicProjection => Ok(harmonic_projection(f)),
            Self::Advection(u) => advect(u, f),
        }
    }
}

/// `P_η = R_t ∘ P ∘ R_{-t}` for the rotation `η = e^{it} z`, where `R_t f = f∘η`.
#[derive(Clone, Debug)]
pub struct ConjugatedOperator<T> {
    pub base: BaseOperator<T>,
    pub angle: T,
}

impl<T: Real> ConjugatedOperator<T> {
    pub fn new(base: BaseOperator<T>, angle: T) -> Self {
        Self { base, angle }
    }

    pub fn apply(&self, f: &F<T>) -> Result<F<T>> {
        let pulled = rotate(f, -self.angle);
        Ok(rotate(&self.base.apply(&pulled)?, self.angle))
    }
}

fn rotate<T: Real>(f: &F<T>, angle: T) -> F<T> {
    crate::field::compose_rotation(f, angle)
}

/// `[u·∇, ∇] f`, computed by composing the two operators.
pub fn commutator_gradient<T: Real>(u: &F<T>, f: &F<T>) -> Result<F<T>> {
    Ok(&advect(u, &grad(f)?)? - &grad(&advect(u, f)?)?)
}

/// `-(Du)^T ∇f`, the expanded form of the gradient commutator.
pub fn commutator_gradient_expanded<T: Real>(u: &F<T>, f: &F<T>) -> Result<F<T>> {
    let g = grad(f)?;
    let s = &u.d_z().conj().mul(&g)? + &u.d_zbar().mul(&g.conj())?;
    Ok(-s)
}

/// `[u·∇, Δ] f`, computed by composing the two operators.
pub fn commutator_laplacian<T: Real>(u: &F<T>, f: &F<T>) -> Result<F<T>> {
    Ok(&advect(u, &laplacian(f))? - &laplacian(&advect(u, f)?))
}

/// `[u·∇, Δ] f` expanded in Wirtinger derivatives.
pub fn commutator_laplacian_expanded<T: Real>(u: &F<T>, f: &F<T>) -> Result<F<T>> {
    let ub = u.conj();
    let fz = f.d_z();
    let fzb = f.d_zbar();
    let fzzb = fz.d_zbar();
    let parts = [
        u.d_z().d_zbar().mul(&fz)?,
        u.d_z().mul(&fzzb)?,
        u.d_zbar().mul(&fz.d_z())?,
        ub.d_z().d_zbar().mul(&fzb)?,
        ub.d_zbar().mul(&fzzb)?,
        ub.d_z().mul(&fzb.d_zbar())?,
    ];
    let sum = parts.iter().fold(F::zero(), |acc, p| &acc + p);
    Ok(sum.scale_real(T::lit(-4.0)))
}

/// `[u·∇, Δ⁻¹] g - H(u·∇ Δ⁻¹ g)`, the first variation of the Dirichlet inverse.
pub fn inverse_variation<T: Real>(u: &F<T>, g: &F<T>) -> Result<F<T>> {
    let p = dirichlet_inverse(g);
    let transported = advect(u, &p)?;
    Ok(&(&transported - &dirichlet_inverse(&advect(u, g)?)) - &harmonic_projection(&transported))
}

/// `-Δ⁻¹ [u·∇, Δ] Δ⁻¹ g`, the same variation obtained by differentiating `K K⁻¹ = I`.
pub fn inverse_variation_implicit<T: Real>(u: &F<T>, g: &F<T>) -> Result<F<T>> {
    let p = dirichlet_inverse(g);
    Ok(-dirichlet_inverse(&commutator_laplacian_expanded(u, &p)?))
}

/// The three first-variation identities for operators transported by a
/// deformation `ζ(t, s) = (Id + s u) ∘ η` of the rotation `η = e^{it} z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationIdentity {
    /// `∂_s ∇_ζ = [u·∇, ∇]_η`
    Gradient = 1,
    /// `∂_s K(ζ) = [u·∇, Δ]_η`
    Laplacian = 2,
    /// `∂_s K(ζ)⁻¹ = ([u·∇, Δ⁻¹] - H(u·∇)Δ⁻¹)_η`
    DirichletInverse = 3,
}

impl TryFrom<u8> for VariationIdentity {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        match id {
            1 => Ok(Self::Gradient),
            2 => Ok(Self::Laplacian),
            3 => Ok(Self::DirichletInverse),
            _ => Err(Error::InvalidParameter(format!("identity id must be 1, 2 or 3, got {id}"))),
        }
    }
}

/// Residuals of one variation identity, both relative to the size of the terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationResidual<T> {
    /// Composed commutator against its expanded closed form.
    pub symbolic: T,
    /// Closed form against a Richardson-extrapolated central difference in `s`.
    pub finite_difference: T,
}

impl<T: Real> VariationResidual<T> {
    pub fn max(&self) -> T {
        self.symbolic.max(self.finite_difference)
    }
}

/// Step in the deformation parameter for the difference quotient.
pub const VARIATION_STEP: f64 = 1e-5;

/// Checks a variation identity at the rotation angle `t` along direction `u`.
///
/// `f` must be real for the gradient identity. The finite-difference side
/// evaluates the deformed operators pointwise on a polar grid through the
/// metric pulled back by `Id + s u`, without ever inverting the deformation.
pub fn variation_residual<T: Real>(id: VariationIdentity, u: &F<T>, f: &F<T>, t: T) -> Result<VariationResidual<T>> {
    // Everything is evaluated in the rotated frame: R_t X at a equals X at e^{it} a.
    let f = rotate(f, -t);
    let points = sample_points::<T>(t);
    let deform = Deformation::new(u);
    match id {
        VariationIdentity::Gradient => {
            let composed = commutator_gradient(u, &f)?;
            let expanded = commutator_gradient_expanded(u, &f)?;
            let symbolic = relative(composed.max_abs_diff(&expanded), expanded.max_abs_coeff());
            let probe = FieldProbe::new(&f);
            let fd = pointwise_residual(&points, &expanded, |x, s| deform.gradient_at(&probe, x, s));
            Ok(VariationResidual { symbolic, finite_difference: fd })
        }
        VariationIdentity::Laplacian => {
            let composed = commutator_laplacian(u, &f)?;
            let expanded = commutator_laplacian_expanded(u, &f)?;
            let symbolic = relative(composed.max_abs_diff(&expanded), expanded.max_abs_coeff());
            let probe = FieldProbe::new(&f);
            let fd = pointwise_residual(&points, &expanded, |x, s| deform.laplacian_at(&probe, x, s));
            Ok(VariationResidual { symbolic, finite_difference: fd })
        }
        VariationIdentity::DirichletInverse => {
            let closed = inverse_variation(u, &f)?;
            let implicit = inverse_variation_implicit(u, &f)?;
            let symbolic = relative(closed.max_abs_diff(&implicit), implicit.max_abs_coeff());
            // The variation X of K⁻¹ g is characterised by ΔX = -K'(Δ⁻¹ g) and X = 0 on
            // the circle; the first is checked against the differenced K, the second exactly.
            let probe = FieldProbe::new(&dirichlet_inverse(&f));
            let target = -laplacian(&closed);
            let fd = pointwise_residual(&points, &target, |x, s| deform.laplacian_at(&probe, x, s));
            let trace = relative(boundary_trace(&closed).max_abs(), closed.max_abs_coeff());
            Ok(VariationResidual { symbolic, finite_difference: fd.max(trace) })
        }
    }
}

fn relative<T: Real>(diff: T, scale: T) -> T {
    diff / scale.max(T::one())
}

fn sample_points<T: Real>(angle: T) -> Vec<Complex<T>> {
    let mut points = Vec::new();
    for r in [0.0, 0.3, 0.6, 0.85, 1.0] {
        for i in 0..12 {
            let theta = T::lit(i as f64 * std::f64::consts::TAU / 12.0 + 0.1) + angle;
            points.push(Complex::from_polar(T::lit(r), theta));
        }
    }
    points
}

/// Compares `expected` with the Richardson-extrapolated derivative of `op(x, s)`.
fn pointwise_residual<T, G>(points: &[Complex<T>], expected: &F<T>, op: G) -> T
where
    T: Real,
    G: Fn(Complex<T>, T) -> Complex<T>,
{
    let h = T::lit(VARIATION_STEP);
    let two = T::lit(2.0);
    let mut diff = T::zero();
    let mut scale = T::one();
    for &x in points {
        let d1 = (op(x, h) - op(x, -h)) / (two * h);
        let d2 = (op(x, two * h) - op(x, -two * h)) / (T::lit(4.0) * h);
        let richardson = (d1 * T::lit(4.0) - d2) / T::lit(3.0);
        let exact = expected.eval(x);
        diff = diff.max((richardson - exact).norm());
        scale = scale.max(exact.norm()).max(op(x, T::zero()).norm());
    }
    diff / scale
}

#[derive(Clone, Copy, Debug)]
struct Mat2<T>([[T; 2]; 2]);

impl<T: Real> Mat2<T> {
    fn identity() -> Self {
        Self([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    fn add_scaled(self, s: T, o: Self) -> Self {
        let a = self.0;
        let b = o.0;
        Self([[a[0][0] + s * b[0][0], a[0][1] + s * b[0][1]], [a[1][0] + s * b[1][0], a[1][1] + s * b[1][1]]])
    }

    fn mul(self, o: Self) -> Self {
        let a = self.0;
        let b = o.0;
        let mut out = [[T::zero(); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    fn inverse(self) -> Self {
        let [[a, b], [c, d]] = self.0;
        let det = a * d - b * c;
        Self([[d / det, -b / det], [-c / det, a / det]])
    }
}

/// First and second partials of a scalar, ready for pointwise evaluation.
struct FieldProbe<T> {
    first: [F<T>; 2],
    second: [[F<T>; 2]; 2],
}

impl<T: Real> FieldProbe<T> {
    fn new(f: &F<T>) -> Self {
        let d1 = f.d1();
        let d2 = f.d2();
        let second = [[d1.d1(), d1.d2()], [d2.d1(), d2.d2()]];
        Self { first: [d1, d2], second }
    }
}

/// The deformation `φ_s = Id + s u` with its first and second derivatives.
struct Deformation<T> {
    // du[p][q] = ∂_q u^p as a complex field whose real part is the value.
    du: [[F<T>; 2]; 2],
    // ddu[k][p][q] = ∂_k ∂_q u^p
    ddu: [[[F<T>; 2]; 2]; 2],
}

impl<T: Real> Deformation<T> {
    fn new(u: &F<T>) -> Self {
        let comps = [u.re_part(), u.im_part()];
        let du = [[comps[0].d1(), comps[0].d2()], [comps[1].d1(), comps[1].d2()]];
        let deriv = |k: usize, g: &F<T>| if k == 0 { g.d1() } else { g.d2() };
        let ddu = [0, 1].map(|k| [0, 1].map(|p| [0, 1].map(|q| deriv(k, &du[p][q]))));
        Self { du, ddu }
    }

    fn jac(&self, x: Complex<T>) -> Mat2<T> {
        Mat2([0, 1].map(|p| [0, 1].map(|q| self.du[p][q].eval(x).re)))
    }

    fn jac_derivative(&self, k: usize, x: Complex<T>) -> Mat2<T> {
        Mat2([0, 1].map(|p| [0, 1].map(|q| self.ddu[k][p][q].eval(x).re)))
    }

    /// `(∇(F∘φ_s⁻¹))∘φ_s` at `x`, as a complex number `v1 + i v2`.
    fn gradient_at(&self, probe: &FieldProbe<T>, x: Complex<T>, s: T) -> Complex<T> {
        let n = Mat2::identity().add_scaled(s, self.jac(x)).inverse().0;
        let g = [probe.first[0].eval(x).re, probe.first[1].eval(x).re];
        Complex::new(g[0] * n[0][0] + g[1] * n[1][0], g[0] * n[0][1] + g[1] * n[1][1])
    }

    /// `(Δ(F∘φ_s⁻¹))∘φ_s` at `x`.
    fn laplacian_at(&self, probe: &FieldProbe<T>, x: Complex<T>, s: T) -> Complex<T> {
        let nm = Mat2::identity().add_scaled(s, self.jac(x)).inverse();
        let n = nm.0;
        let first = [probe.first[0].eval(x), probe.first[1].eval(x)];
        let mut acc = Complex::default();
        for k in 0..2 {
            for l in 0..2 {
                let metric = n[k][0] * n[l][0] + n[k][1] * n[l][1];
                acc = acc + probe.second[k][l].eval(x) * metric;
            }
        }
        for k in 0..2 {
            // ∂_k N = -N (∂_k M) N with M = I + s Du.
            let dn = nm.mul(self.jac_derivative(k, x)).mul(nm).0;
            for l in 0..2 {
                for i in 0..2 {
                    acc = acc - first[l] * (s * dn[l][i] * n[k][i]);
                }
            }
        }
        acc
    }
}
