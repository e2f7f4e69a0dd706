//! Sparse polynomials `Σ c_jk z^j z̄^k` and the calculus on them.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex;
use serde::de::Deserializer;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::{Error, Real, Result};

/// Largest total degree a product may reach unless a field says otherwise.
pub const DEFAULT_DEGREE_CAP: u32 = 256;

/// Polynomial in `z, z̄` with complex coefficients, keyed by `(j, k)`.
///
/// Coefficients with magnitude below [`Real::prune_threshold`] are dropped
/// after every operation, so the stored map never carries dust.
#[derive(Clone, Debug)]
pub struct MonomialField<T> {
    coeffs: BTreeMap<(u32, u32), Complex<T>>,
    max_degree: u32,
    degree_cap: u32,
}

impl<T: Real> PartialEq for MonomialField<T> {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl<T: Real> Default for MonomialField<T> {
    fn default() -> Self {
        Self::zero()
    }
}

fn cr<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

fn cis<T: Real>(angle: T) -> Complex<T> {
    Complex::new(angle.cos(), angle.sin())
}

impl<T: Real> MonomialField<T> {
    pub fn zero() -> Self {
        Self { coeffs: BTreeMap::new(), max_degree: 0, degree_cap: DEFAULT_DEGREE_CAP }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn real_constant(x: T) -> Self {
        Self::constant(cr(x))
    }

    pub fn monomial(j: u32, k: u32, c: Complex<T>) -> Self {
        Self::from_terms([((j, k), c)])
    }

    /// The identity field `z`, i.e. `x`.
    pub fn z() -> Self {
        Self::monomial(1, 0, Complex::new(T::one(), T::zero()))
    }

    pub fn zbar() -> Self {
        Self::monomial(0, 1, Complex::new(T::one(), T::zero()))
    }

    /// Builds a field from terms; repeated keys are summed.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Complex<T>)>,
    {
        Self::collect(terms, DEFAULT_DEGREE_CAP)
    }

    fn collect<I>(terms: I, degree_cap: u32) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Complex<T>)>,
    {
        let mut coeffs: BTreeMap<(u32, u32), Complex<T>> = BTreeMap::new();
        for (key, c) in terms {
            let entry = coeffs.entry(key).or_default();
            *entry = *entry + c;
        }
        Self::from_map(coeffs, degree_cap)
    }

    fn from_map(mut coeffs: BTreeMap<(u32, u32), Complex<T>>, degree_cap: u32) -> Self {
        let eps = T::prune_threshold();
        // NaN must survive pruning so integrators can detect blow-up.
        coeffs.retain(|_, c| !(c.norm() < eps));
        let max_degree = coeffs.keys().map(|&(j, k)| j + k).max().unwrap_or(0);
        Self { coeffs, max_degree, degree_cap }
    }

    fn map_terms<F>(&self, mut f: F) -> Self
    where
        F: FnMut((u32, u32), Complex<T>) -> Option<((u32, u32), Complex<T>)>,
    {
        let terms: Vec<_> = self.terms().filter_map(|(key, c)| f(key, c)).collect();
        Self::collect(terms, self.degree_cap)
    }

    pub fn with_degree_cap(mut self, cap: u32) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// Largest `j + k` among stored terms, zero for the zero field.
    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn coeff(&self, j: u32, k: u32) -> Complex<T> {
        self.coeffs.get(&(j, k)).copied().unwrap_or_default()
    }

    /// Terms in ascending `(j, k)` order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex<T>)> + '_ {
        self.coeffs.iter().map(|(&key, &c)| (key, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.values().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.values().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self - other).max_abs_coeff()
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        self.map_terms(|key, v| Some((key, v * c)))
    }

    pub fn scale_real(&self, x: T) -> Self {
        self.scale(cr(x))
    }

    /// Pointwise complex conjugate: `c z^j z̄^k ↦ c̄ z^k z̄^j`.
    pub fn conj(&self) -> Self {
        self.map_terms(|(j, k), c| Some(((k, j), c.conj())))
    }

    /// Real part as a real scalar field (first component of a vector field).
    pub fn re_part(&self) -> Self {
        (self + &self.conj()).scale_real(T::lit(0.5))
    }

    /// Imaginary part as a real scalar field (second component).
    pub fn im_part(&self) -> Self {
        (self - &self.conj()).scale(Complex::new(T::zero(), T::lit(-0.5)))
    }

    /// Recombines two real component fields into `v1 + i v2`.
    pub fn from_components(v1: &Self, v2: &Self) -> Self {
        v1 + &v2.scale(Complex::i())
    }

    pub fn d_z(&self) -> Self {
        self.map_terms(|(j, k), c| (j > 0).then(|| ((j - 1, k), c * T::lit(j as f64))))
    }

    pub fn d_zbar(&self) -> Self {
        self.map_terms(|(j, k), c| (k > 0).then(|| ((j, k - 1), c * T::lit(k as f64))))
    }

    /// Partial derivative in `x1`.
    pub fn d1(&self) -> Self {
        &self.d_z() + &self.d_zbar()
    }

    /// Partial derivative in `x2`.
    pub fn d2(&self) -> Self {
        (&self.d_z() - &self.d_zbar()).scale(Complex::i())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let cap = self.degree_cap.max(other.degree_cap);
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero().with_degree_cap(cap));
        }
        let degree = self.max_degree + other.max_degree;
        if degree > cap {
            return Err(Error::DegreeCap { degree, cap });
        }
        let mut terms = Vec::with_capacity(self.num_terms() * other.num_terms());
        for ((j1, k1), a) in self.terms() {
            for ((j2, k2), b) in other.terms() {
                terms.push(((j1 + j2, k1 + k2), a * b));
            }
        }
        Ok(Self::collect(terms, cap))
    }

    /// Value at the point `z`.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        let zb = z.conj();
        self.terms().fold(Complex::default(), |acc, ((j, k), c)| acc + c * z.powu(j) * zb.powu(k))
    }

    /// Largest violation of `c_jk = conj(c_kj)`.
    pub fn real_defect(&self) -> T {
        self.terms().fold(T::zero(), |m, ((j, k), c)| m.max((c - self.coeff(k, j).conj()).norm()))
    }

    pub fn is_real(&self) -> bool {
        self.real_defect() <= T::real_tolerance()
    }

    pub(crate) fn require_real(&self) -> Result<()> {
        let defect = self.real_defect();
        if defect <= T::real_tolerance() {
            Ok(())
        } else {
            Err(Error::NotReal { defect: defect.as_f64() })
        }
    }
}

impl<'a, T: Real> Add<&'a MonomialField<T>> for &'a MonomialField<T> {
    type Output = MonomialField<T>;

    fn add(self, rhs: &'a MonomialField<T>) -> MonomialField<T> {
        let cap = self.degree_cap.max(rhs.degree_cap);
        MonomialField::collect(self.terms().chain(rhs.terms()), cap)
    }
}

impl<'a, T: Real> Sub<&'a MonomialField<T>> for &'a MonomialField<T> {
    type Output = MonomialField<T>;

    fn sub(self, rhs: &'a MonomialField<T>) -> MonomialField<T> {
        let cap = self.degree_cap.max(rhs.degree_cap);
        MonomialField::collect(self.terms().chain(rhs.terms().map(|(key, c)| (key, -c))), cap)
    }
}

impl<T: Real> Add for MonomialField<T> {
    type Output = MonomialField<T>;

    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Real> Sub for MonomialField<T> {
    type Output = MonomialField<T>;

    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Real> Neg for &MonomialField<T> {
    type Output = MonomialField<T>;

    fn neg(self) -> MonomialField<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Neg for MonomialField<T> {
    type Output = MonomialField<T>;

    fn neg(self) -> Self {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    j: u32,
    k: u32,
    re: f64,
    im: f64,
}

impl<T: Real> Serialize for MonomialField<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.num_terms()))?;
        for ((j, k), c) in self.terms() {
            seq.serialize_element(&TermRepr { j, k, re: c.re.as_f64(), im: c.im.as_f64() })?;
        }
        seq.end()
    }
}

impl<'de, T: Real> Deserialize<'de> for MonomialField<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<TermRepr>::deserialize(deserializer)?;
        Ok(Self::from_terms(terms.into_iter().map(|t| ((t.j, t.k), Complex::new(T::lit(t.re), T::lit(t.im))))))
    }
}

/// Gradient of a real scalar, `2 ∂_z̄ φ`.
pub fn grad<T: Real>(phi: &MonomialField<T>) -> Result<MonomialField<T>> {
    phi.require_real()?;
    Ok(phi.d_zbar().scale_real(T::lit(2.0)))
}

/// Divergence of a vector field, `Re(2 ∂_z V)`.
pub fn divergence<T: Real>(v: &MonomialField<T>) -> MonomialField<T> {
    v.d_z().scale_real(T::lit(2.0)).re_part()
}

/// Scalar curl `∂1 V2 - ∂2 V1`, `Im(2 ∂_z V)`.
pub fn curl<T: Real>(v: &MonomialField<T>) -> MonomialField<T> {
    v.d_z().scale_real(T::lit(2.0)).im_part()
}

/// `Δ = 4 ∂_z ∂_z̄`, applied to complex fields componentwise.
pub fn laplacian<T: Real>(f: &MonomialField<T>) -> MonomialField<T> {
    f.d_z().d_zbar().scale_real(T::lit(4.0))
}

/// Real 2×2 Jacobian `entries[i][j] = ∂_j V^i` of a vector field.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian<T: Real> {
    pub entries: [[MonomialField<T>; 2]; 2],
}

impl<T: Real> Jacobian<T> {
    pub fn trace(&self) -> MonomialField<T> {
        &self.entries[0][0] + &self.entries[1][1]
    }
}

pub fn jacobian<T: Real>(v: &MonomialField<T>) -> Jacobian<T> {
    let v1 = v.re_part();
    let v2 = v.im_part();
    Jacobian { entries: [[v1.d1(), v1.d2()], [v2.d1(), v2.d2()]] }
}

/// `tr((DV)²) = ∂_i V^j ∂_j V^i`.
pub fn trace_of_square<T: Real>(v: &MonomialField<T>) -> Result<MonomialField<T>> {
    let [[a, b], [c, d]] = jacobian(v).entries;
    let diag = &a.mul(&a)? + &d.mul(&d)?;
    Ok(&diag + &b.mul(&c)?.scale_real(T::lit(2.0)))
}

/// `∫_disk f conj(g) dA`, exact.
///
/// `z^j z̄^k conj(z^p z̄^q)` integrates to `2π / (j+k+p+q+2)` when `j-k = p-q`
/// and to zero otherwise.
pub fn l2_inner<T: Real>(f: &MonomialField<T>, g: &MonomialField<T>) -> Complex<T> {
    let mut by_freq: BTreeMap<i64, Vec<(u32, Complex<T>)>> = BTreeMap::new();
    for ((p, q), c) in g.terms() {
        by_freq.entry(p as i64 - q as i64).or_default().push((p + q, c.conj()));
    }
    let two_pi = T::lit(2.0) * T::PI();
    let mut acc = Complex::default();
    for ((j, k), a) in f.terms() {
        if let Some(partners) = by_freq.get(&(j as i64 - k as i64)) {
            for &(deg, b) in partners {
                acc = acc + a * b * (two_pi / T::lit((j + k + deg + 2) as f64));
            }
        }
    }
    acc
}

pub fn l2_norm<T: Real>(f: &MonomialField<T>) -> T {
    l2_inner(f, f).re.max(T::zero()).sqrt()
}

/// `f(e^{it} z)`: each monomial picks up the phase `e^{i(j-k)t}`.
pub fn compose_rotation<T: Real>(f: &MonomialField<T>, angle: T) -> MonomialField<T> {
    f.map_terms(|(j, k), c| Some(((j, k), c * cis(T::lit(j as f64 - k as f64) * angle))))
}

/// Fourier coefficients `{m ↦ c_m}` of a function on the unit circle.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryTrace<T> {
    modes: BTreeMap<i64, Complex<T>>,
}

impl<T: Real> BoundaryTrace<T> {
    pub fn from_modes<I: IntoIterator<Item = (i64, Complex<T>)>>(modes: I) -> Self {
        let mut map: BTreeMap<i64, Complex<T>> = BTreeMap::new();
        for (m, c) in modes {
            let entry = map.entry(m).or_default();
            *entry = *entry + c;
        }
        let eps = T::prune_threshold();
        map.retain(|_, c| !(c.norm() < eps));
        Self { modes: map }
    }

    pub fn get(&self, m: i64) -> Complex<T> {
        self.modes.get(&m).copied().unwrap_or_default()
    }

    pub fn modes(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.modes.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn max_abs(&self) -> T {
        self.modes.values().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, theta: T) -> Complex<T> {
        self.modes().fold(Complex::default(), |acc, (m, c)| acc + c * cis(T::lit(m as f64) * theta))
    }

    /// Trace of the rotated function, `θ ↦ g(θ + t)`.
    pub fn rotated(&self, angle: T) -> Self {
        Self::from_modes(self.modes().map(|(m, c)| (m, c * cis(T::lit(m as f64) * angle))))
    }
}

/// Restriction to `|z| = 1`: `z^j z̄^k ↦ e^{i(j-k)θ}`.
pub fn boundary_trace<T: Real>(f: &MonomialField<T>) -> BoundaryTrace<T> {
    BoundaryTrace::from_modes(f.terms().map(|((j, k), c)| (j as i64 - k as i64, c)))
}

/// Trace of the outward normal component `⟨V, ν⟩ = Re(V z̄)` on `|z| = 1`.
pub fn normal_component_trace<T: Real>(v: &MonomialField<T>) -> BoundaryTrace<T> {
    let half = T::lit(0.5);
    BoundaryTrace::from_modes(v.terms().flat_map(|((j, k), c)| {
        let m = j as i64 - k as i64 - 1;
        [(m, c * half), (-m, c.conj() * half)]
    }))
}
