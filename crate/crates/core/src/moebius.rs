//! Disk automorphisms in the canonical form
//! `φ_{λ,a}(z) = λ (a - z) / (1 - ā z)`, `|λ| = 1`, `|a| < 1`.
//!
//! Note the sign convention: `φ_{λ,0}(z) = -λ z`, so the identity map is
//! stored as `(λ, a) = (-1, 0)` and the rotation `z ↦ e^{iθ} z` as
//! `(-e^{iθ}, 0)`.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, real, unimodular, Complex, Real};
use crate::series::TruncatedSeries;

/// Below this modulus the zero of a composite is snapped to the origin.
const ROTATION_SNAP: f64 = 1e-14;
/// Bisection steps on the circle parameter.
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Automorphism<T> {
    lambda: Complex<T>,
    a: Complex<T>,
}

/// Linear-fractional matrix `[[p, q], [r, s]]` acting as `(p z + q)/(r z + s)`.
type Mobius<T> = [[Complex<T>; 2]; 2];

impl<T: Real> Automorphism<T> {
    /// Builds `φ_{λ,a}`; `λ` is renormalized onto the unit circle.
    pub fn new(lambda: Complex<T>, a: Complex<T>) -> Result<Self> {
        let modulus = lambda.norm();
        if !(modulus > T::zero()) || !modulus.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} cannot be normalized")));
        }
        if !(a.norm() < T::one()) {
            return Err(Error::Domain(format!("|a| must be < 1, got |{a}| = {}", a.norm())));
        }
        if (modulus - T::one()).abs() > lit(1e-9) {
            log::warn!("lambda = {lambda} is not unimodular (|lambda| = {modulus}); renormalizing");
        }
        Ok(Self {
            lambda: lambda / modulus,
            a,
        })
    }

    pub fn identity() -> Self {
        Self {
            lambda: real(-T::one()),
            a: Complex::new(T::zero(), T::zero()),
        }
    }

    /// `z ↦ e^{iθ} z`.
    pub fn rotation(theta: T) -> Self {
        Self::rotation_by(unimodular(theta))
    }

    /// `z ↦ τ z` for unimodular `τ`.
    pub fn rotation_by(tau: Complex<T>) -> Self {
        Self {
            lambda: -tau / tau.norm(),
            a: Complex::new(T::zero(), T::zero()),
        }
    }

    /// The involution `φ_a = φ_{1,a}`.
    pub fn involution(a: Complex<T>) -> Result<Self> {
        Self::new(real(T::one()), a)
    }

    pub fn lambda(&self) -> Complex<T> {
        self.lambda
    }

    /// The zero of the map, `φ^{-1}(0)`.
    pub fn a(&self) -> Complex<T> {
        self.a
    }

    pub fn is_rotation(&self, tol: T) -> bool {
        self.a.norm() <= tol
    }

    pub fn apply(&self, z: Complex<T>) -> Result<Complex<T>> {
        let den = real::<T>(T::one()) - self.a.conj() * z;
        if den.norm_sqr() == T::zero() {
            return Err(Error::Domain(format!("{z} is the pole of {self}")));
        }
        Ok(self.lambda * (self.a - z) / den)
    }

    /// `φ'(z) = λ (|a|² - 1) / (1 - ā z)²`.
    pub fn derivative_at(&self, z: Complex<T>) -> Result<Complex<T>> {
        let den = real::<T>(T::one()) - self.a.conj() * z;
        if den.norm_sqr() == T::zero() {
            return Err(Error::Domain(format!("{z} is the pole of {self}")));
        }
        Ok(self.lambda * (self.a.norm_sqr() - T::one()) / (den * den))
    }

    /// Taylor coefficients `λa, λ(|a|²-1), λ(|a|²-1)ā, λ(|a|²-1)ā², …`.
    pub fn taylor(&self, n: usize) -> TruncatedSeries<T> {
        let n = n.max(1);
        let mut coeffs = Vec::with_capacity(n);
        coeffs.push(self.lambda * self.a);
        let mut c = self.lambda * (self.a.norm_sqr() - T::one());
        for _ in 1..n {
            coeffs.push(c);
            c = c * self.a.conj();
        }
        if self.a.norm_sqr() == T::zero() {
            TruncatedSeries::polynomial(coeffs)
        } else {
            TruncatedSeries::new(coeffs)
        }
    }

    fn matrix(&self) -> Mobius<T> {
        let one = real(T::one());
        [
            [-self.lambda, self.lambda * self.a],
            [-self.a.conj(), one],
        ]
    }

    /// Canonical `(λ, a)` of `(p z + q)/(r z + s)`.
    fn from_matrix(m: Mobius<T>) -> Result<Self> {
        let [[p, q], [_r, s]] = m;
        if p.norm_sqr() == T::zero() || s.norm_sqr() == T::zero() {
            return Err(Error::Domain("composite is not a disk automorphism".into()));
        }
        let mut a = -q / p;
        if a.norm() < lit(ROTATION_SNAP) {
            a = Complex::new(T::zero(), T::zero());
        }
        Self::new(-p / s, a)
    }

    /// Canonical form of `outer ∘ inner_first`.
    pub fn compose(inner_first: &Self, outer: &Self) -> Result<Self> {
        let [[a, b], [c, d]] = outer.matrix();
        let [[p, q], [r, s]] = inner_first.matrix();
        Self::from_matrix([
            [a * p + b * r, a * q + b * s],
            [c * p + d * r, c * q + d * s],
        ])
    }

    /// `φ_{λ,a}^{-1} = φ_{λ̄, λa}`.
    pub fn invert(&self) -> Self {
        Self {
            lambda: self.lambda.conj(),
            a: self.lambda * self.a,
        }
    }

    /// `φ_{λ,a}(τ z) = φ_{τλ, τ̄a}(z)`.
    pub fn precompose_rotation(&self, tau: Complex<T>) -> Self {
        Self {
            lambda: tau * self.lambda,
            a: tau.conj() * self.a,
        }
    }

    /// `τ φ_{λ,a}(z) = φ_{τλ, a}(z)`.
    pub fn postcompose_rotation(&self, tau: Complex<T>) -> Self {
        Self {
            lambda: tau * self.lambda,
            a: self.a,
        }
    }
}

impl<T: Real> fmt::Display for Automorphism<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi[lambda={}, a={}]", self.lambda, self.a)
    }
}

/// Zero `c` of `ψ ∘ ψ` for `ψ = φ_{τλ, τ̄a}`:
/// `c = τ̄ a (λτ - 1)/(λτ - |a|²)`.
pub fn moved_center<T: Real>(lambda: Complex<T>, a: Complex<T>, tau: Complex<T>) -> Complex<T> {
    let lt = lambda * tau;
    tau.conj() * a * (lt - T::one()) / (lt - a.norm_sqr())
}

/// Finds unimodular `τ` with `|moved_center(λ, a, τ)| = b` by bisection on
/// `τ = e^{it}` between `λ̄` (where `|c| = 0`) and `-λ̄` (where
/// `|c| = 2|a|/(1+|a|²) > |a|`).
pub fn find_tau_for_target_radius<T: Real>(lambda: Complex<T>, a: Complex<T>, b: T) -> Result<Complex<T>> {
    let lambda = lambda / lambda.norm();
    let radius = a.norm();
    if !(b >= T::zero()) || !(b <= radius) {
        return Err(Error::Domain(format!("target radius {b} outside [0, |a|] = [0, {radius}]")));
    }
    let t0 = lambda.conj().arg();
    if b == T::zero() {
        return Ok(unimodular(t0));
    }
    let gap = |t: T| moved_center(lambda, a, unimodular(t)).norm() - b;
    let (mut lo, mut hi) = (t0, t0 + T::PI());
    if gap(hi) == T::zero() {
        return Ok(unimodular(hi));
    }
    for _ in 0..BISECTION_STEPS {
        let mid = (lo + hi) / lit(2.0);
        if gap(mid) <= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (glo, ghi) = (gap(lo).abs(), gap(hi).abs());
    Ok(unimodular(if glo <= ghi { lo } else { hi }))
}
