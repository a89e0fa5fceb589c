//! Truncated Taylor-coefficient arithmetic on the unit disk.
//!
//! A [`TruncatedSeries`] keeps `a_0..a_{N-1}`. Results never claim more
//! coefficients than their least precise input: a product or sum carries the
//! shortest truncation length among its non-polynomial operands. Series marked
//! exact are finitely supported polynomials whose omitted coefficients are
//! known to vanish, so they can be padded freely.
//!
//! Convolution is the direct `O(N²)` Cauchy product.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{complex_from_f64, from_usize, real, Complex, Real};
use crate::weights::recurrence_coefficients;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T> {
    coeffs: Vec<Complex<T>>,
    exact: bool,
}

impl<T: Real> TruncatedSeries<T> {
    /// Series known only through its first `coeffs.len()` coefficients.
    ///
    /// Panics if `coeffs` is empty.
    pub fn new(coeffs: Vec<Complex<T>>) -> Self {
        assert!(!coeffs.is_empty(), "a truncated series needs at least one coefficient");
        Self {
            coeffs,
            exact: false,
        }
    }

    /// Polynomial: every coefficient past `coeffs.len()` is zero.
    ///
    /// Panics if `coeffs` is empty.
    pub fn polynomial(coeffs: Vec<Complex<T>>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Self {
            coeffs,
            exact: true,
        }
    }

    pub fn from_real(coeffs: &[T]) -> Self {
        Self::new(coeffs.iter().map(|&c| real(c)).collect())
    }

    pub fn real_polynomial(coeffs: &[T]) -> Self {
        Self::polynomial(coeffs.iter().map(|&c| real(c)).collect())
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(real(T::one()))
    }

    /// Number of retained coefficients `N`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// `a_n`, or `None` when `n` lies past the truncation of a non-polynomial.
    pub fn coeff(&self, n: usize) -> Option<Complex<T>> {
        match self.coeffs.get(n) {
            Some(c) => Some(*c),
            None if self.exact => Some(Complex::new(T::zero(), T::zero())),
            None => None,
        }
    }

    /// Polynomial degree (index of the last non-zero coefficient).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.norm_sqr() != T::zero())
            .unwrap_or(0)
    }

    /// Same series with exactly `n` coefficients. Fails only when a
    /// non-polynomial would need padding.
    pub fn resized(&self, n: usize) -> Option<Self> {
        let n = n.max(1);
        if n <= self.len() {
            let dropped_zero = self.coeffs[n..].iter().all(|c| c.norm_sqr() == T::zero());
            return Some(Self {
                coeffs: self.coeffs[..n].to_vec(),
                exact: self.exact && dropped_zero,
            });
        }
        if !self.exact {
            return None;
        }
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n, Complex::new(T::zero(), T::zero()));
        Some(Self {
            coeffs,
            exact: true,
        })
    }

    /// Length of a binary result and whether it is still a polynomial.
    fn joint_len(&self, other: &Self, exact_len: usize) -> (usize, bool) {
        match (self.exact, other.exact) {
            (true, true) => (exact_len, true),
            (true, false) => (other.len(), false),
            (false, true) => (self.len(), false),
            (false, false) => (self.len().min(other.len()), false),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: Complex<T>) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| *a * c).collect(),
            exact: self.exact,
        }
    }

    /// `f(λz)`: coefficient `n` picks up `λⁿ`.
    pub fn rotate_argument(&self, lambda: Complex<T>) -> Self {
        let mut p = real(T::one());
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let out = *a * p;
                p = p * lambda;
                out
            })
            .collect();
        Self {
            coeffs,
            exact: self.exact,
        }
    }

    /// Term-wise derivative; drops one coefficient.
    pub fn derivative(&self) -> Result<Self> {
        if self.len() == 1 {
            if self.exact {
                return Ok(Self::polynomial(vec![Complex::new(T::zero(), T::zero())]));
            }
            return Err(Error::Precondition(
                "derivative of a one-coefficient truncation is unknown".into(),
            ));
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(n, a)| *a * from_usize::<T>(n))
                .collect(),
            exact: self.exact,
        })
    }

    /// `1/f` to `n` coefficients (fewer if `f` itself is shorter).
    pub fn reciprocal(&self, n: usize) -> Result<Self> {
        let f0 = self.coeffs[0];
        if f0.norm_sqr() == T::zero() {
            return Err(Error::Singular);
        }
        let len = if self.exact { n.max(1) } else { n.max(1).min(self.len()) };
        let inv0 = f0.inv();
        let mut g: Vec<Complex<T>> = Vec::with_capacity(len);
        g.push(inv0);
        for k in 1..len {
            let mut acc = Complex::new(T::zero(), T::zero());
            for i in 1..=k.min(self.len() - 1) {
                acc = acc + self.coeffs[i] * g[k - i];
            }
            g.push(-acc * inv0);
        }
        Ok(Self::new(g))
    }

    /// Horner evaluation of the retained polynomial; no tail correction.
    pub fn evaluate(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(T::zero(), T::zero()), |acc, a| acc * z + *a)
    }

    /// Largest coefficient-wise modulus difference over the common window.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let n = self.len().max(other.len());
        (0..n)
            .filter_map(|k| Some((self.coeff(k)? - other.coeff(k)?).norm()))
            .fold(T::zero(), T::max)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            re: self.coeffs.iter().map(|c| crate::scalar::to_f64(c.re)).collect(),
            im: self.coeffs.iter().map(|c| crate::scalar::to_f64(c.im)).collect(),
        }
    }

    /// Polynomial from the `{ "re": [...], "im": [...] }` interchange form.
    pub fn from_json(json: &SeriesJson) -> Result<Self> {
        if json.re.len() != json.im.len() {
            return Err(Error::Parse(format!(
                "series JSON has {} real and {} imaginary parts",
                json.re.len(),
                json.im.len()
            )));
        }
        if json.re.is_empty() {
            return Err(Error::Parse("series JSON has no coefficients".into()));
        }
        if json.re.iter().chain(&json.im).any(|x| !x.is_finite()) {
            return Err(Error::Parse("series JSON has non-finite coefficients".into()));
        }
        Ok(Self::polynomial(
            json.re
                .iter()
                .zip(&json.im)
                .map(|(&re, &im)| complex_from_f64(Complex::new(re, im)))
                .collect(),
        ))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }
}

/// Interchange form of a series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl<T: Real> Mul for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;

    /// Truncated Cauchy product.
    fn mul(self, rhs: Self) -> TruncatedSeries<T> {
        let (len, exact) = self.joint_len(rhs, self.len() + rhs.len() - 1);
        let mut out = vec![Complex::new(T::zero(), T::zero()); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.norm_sqr() == T::zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(len - i) {
                out[i + j] = out[i + j] + *a * *b;
            }
        }
        TruncatedSeries { coeffs: out, exact }
    }
}

impl<T: Real> Add for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;

    fn add(self, rhs: Self) -> TruncatedSeries<T> {
        let (len, exact) = self.joint_len(rhs, self.len().max(rhs.len()));
        let coeffs = (0..len)
            .map(|k| self.coeff(k).expect("within window") + rhs.coeff(k).expect("within window"))
            .collect();
        TruncatedSeries { coeffs, exact }
    }
}

impl<T: Real> Sub for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;

    fn sub(self, rhs: Self) -> TruncatedSeries<T> {
        self + &(-rhs)
    }
}

impl<T: Real> Neg for &TruncatedSeries<T> {
    type Output = TruncatedSeries<T>;

    fn neg(self) -> TruncatedSeries<T> {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| -*a).collect(),
            exact: self.exact,
        }
    }
}

/// Coefficients of `(1 - ā z)^{-s}`: `c_n = γ_s(n) āⁿ` with `γ_s` from the
/// same recurrence as the H_γ weights.
///
/// Intended for `|ā| < 1`; the coefficients are produced regardless.
pub fn binomial_power<T: Real>(abar: Complex<T>, exponent: T, n: usize) -> TruncatedSeries<T> {
    let n = n.max(1);
    let weights = recurrence_coefficients(exponent, n);
    let mut p = real(T::one());
    let coeffs = weights
        .iter()
        .map(|&g| {
            let c = p * g;
            p = p * abar;
            c
        })
        .collect();
    TruncatedSeries::new(coeffs)
}

/// `[φ⁰, φ¹, …, φ^{count-1}]`, each truncated at `n` coefficients (or at the
/// truncation of `phi`, if shorter).
pub fn powers_of<T: Real>(phi: &TruncatedSeries<T>, n: usize, count: usize) -> Vec<TruncatedSeries<T>> {
    let len = if phi.is_exact() { n.max(1) } else { n.max(1).min(phi.len()) };
    let base = phi.resized(len).expect("length fits the series");
    let mut out = Vec::with_capacity(count);
    let mut current = TruncatedSeries::one().resized(len).expect("polynomial");
    for _ in 0..count {
        let next = (&current * &base).resized(len).expect("truncation only");
        out.push(current);
        current = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::gamma_from_recurrence;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn basic_products() {
        let f = TruncatedSeries::real_polynomial(&[1.0, 1.0]);
        let g = TruncatedSeries::real_polynomial(&[1.0, -1.0]);
        let p = &f * &g;
        assert_eq!(p.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        assert!(p.is_exact());

        let t = TruncatedSeries::from_real(&[1.0, 2.0, 3.0]);
        let long = TruncatedSeries::from_real(&[1.0; 8]);
        let q = &t * &long;
        assert_eq!(q.len(), 3);
        assert!(!q.is_exact());
        assert_eq!(q.coeffs(), &[c(1.0, 0.0), c(3.0, 0.0), c(6.0, 0.0)]);

        // exact times truncated keeps the truncated length
        let r = &f * &long;
        assert_eq!(r.len(), 8);
        assert_eq!(r.coeff(8), None);
    }

    #[test]
    fn linear_ops() {
        let f = TruncatedSeries::new(vec![c(1.0, 2.0), c(-0.5, 0.25), c(3.0, 0.0)]);
        let zero = &f + &f.scale(c(-1.0, 0.0));
        assert!(zero.coeffs().iter().all(|z| z.norm() == 0.0));
        assert_eq!((&f - &f).coeffs(), zero.coeffs());
        let d = TruncatedSeries::from_real(&[1.0, 1.0, 1.0, 1.0]).derivative().unwrap();
        assert_eq!(d.coeffs(), &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert!(TruncatedSeries::from_real(&[1.0]).derivative().is_err());
        assert_eq!(
            TruncatedSeries::<f64>::one().derivative().unwrap().coeffs(),
            &[c(0.0, 0.0)]
        );
        let sum = &TruncatedSeries::real_polynomial(&[1.0]) + &TruncatedSeries::from_real(&[0.0, 1.0, 2.0]);
        assert_eq!(sum.len(), 3);
        assert_eq!(sum.coeff(0), Some(c(1.0, 0.0)));
    }

    #[test]
    fn reciprocal_examples() {
        let x = c(0.3, -0.4);
        let f = TruncatedSeries::polynomial(vec![c(1.0, 0.0), -x.conj()]);
        let g = f.reciprocal(20).unwrap();
        let mut p = c(1.0, 0.0);
        for k in 0..20 {
            assert!((g.coeffs()[k] - p).norm() < 1e-15);
            p *= x.conj();
        }
        let back = &f * &g;
        assert!((back.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(back.coeffs()[1..].iter().all(|z| z.norm() < 1e-15));

        let two = TruncatedSeries::from_real(&[2.0, 0.0, 0.0]);
        assert_eq!(two.reciprocal(3).unwrap().coeffs(), &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            TruncatedSeries::from_real(&[0.0, 1.0]).reciprocal(4),
            Err(Error::Singular)
        ));
        // a truncated input bounds the result length
        assert_eq!(two.reciprocal(10).unwrap().len(), 3);
    }

    #[test]
    fn binomial_examples() {
        let g = binomial_power(c(0.5, 0.0), 1.0, 6);
        for (k, v) in g.coeffs().iter().enumerate() {
            assert_eq!(*v, c(0.5f64.powi(k as i32), 0.0));
        }
        let g2 = binomial_power(c(0.5, 0.0), 2.0, 4);
        assert_eq!(g2.coeffs()[2], c(0.75, 0.0));
        let g0 = binomial_power(c(0.5, 0.2), 0.0, 5);
        assert_eq!(g0.coeffs()[0], c(1.0, 0.0));
        assert!(g0.coeffs()[1..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn binomial_bitwise_matches_weights() {
        for &s in &[0.25, 1.0, 2.0, 3.7] {
            let abar = c(0.3, -0.45);
            let ws = gamma_from_recurrence(s, 63).unwrap();
            let series = binomial_power(abar, s, 64);
            let mut p = c(1.0, 0.0);
            for n in 0..64 {
                assert_eq!(series.coeffs()[n], p * ws.values()[n]);
                p *= abar;
            }
        }
    }

    #[test]
    fn powers_examples() {
        let z = TruncatedSeries::real_polynomial(&[0.0, 1.0]);
        let pw = powers_of(&z, 6, 6);
        for (j, p) in pw.iter().enumerate() {
            assert_eq!(p.len(), 6);
            for k in 0..6 {
                let expect = if k == j { 1.0 } else { 0.0 };
                assert_eq!(p.coeffs()[k], c(expect, 0.0));
            }
        }
        let k = TruncatedSeries::constant(c(0.5, 0.5));
        for (j, p) in powers_of(&k, 4, 5).iter().enumerate() {
            assert!((p.coeffs()[0] - c(0.5, 0.5).powi(j as i32)).norm() < 1e-15);
            assert!(p.coeffs()[1..].iter().all(|z| z.norm() == 0.0));
        }
        // φ_{1,0.5}(z) = (0.5 - z)/(1 - 0.5 z)
        let mut coeffs = vec![c(0.5, 0.0)];
        for n in 1..8 {
            coeffs.push(c(-0.75 * 0.5f64.powi(n - 1), 0.0));
        }
        let phi = TruncatedSeries::new(coeffs);
        let pw = powers_of(&phi, 8, 3);
        assert_eq!(pw[2].coeffs()[0], c(0.25, 0.0));
    }

    #[test]
    fn evaluation() {
        let f = TruncatedSeries::from_real(&[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(f.evaluate(c(0.0, 0.0)), c(1.0, 0.0));
        let geo = TruncatedSeries::from_real(&[1.0; 32]);
        let v = geo.evaluate(c(0.5, 0.0));
        assert!((v - c(2.0, 0.0)).norm() <= 2.0f64.powi(-31) * 1.000001);
        let g = TruncatedSeries::new(vec![c(0.2, -0.7), c(3.0, 1.0)]);
        assert_eq!(g.evaluate(c(0.0, 0.0)), c(0.2, -0.7));
    }

    #[test]
    fn json_interchange() {
        let s = TruncatedSeries::<f64>::from_json_str(r#"{"re":[1.0,0.5],"im":[0.0,-0.5]}"#).unwrap();
        assert!(s.is_exact());
        assert_eq!(s.coeffs()[1], c(0.5, -0.5));
        assert_eq!(TruncatedSeries::from_json(&s.to_json()).unwrap(), s);
        assert!(TruncatedSeries::<f64>::from_json_str(r#"{"re":[1.0],"im":[]}"#).is_err());
        assert!(TruncatedSeries::<f64>::from_json_str(r#"{"re":[],"im":[]}"#).is_err());
    }

    #[test]
    fn resizing() {
        let p = TruncatedSeries::real_polynomial(&[1.0, 2.0]);
        let padded = p.resized(5).unwrap();
        assert!(padded.is_exact());
        assert_eq!(padded.len(), 5);
        let cut = padded.resized(1).unwrap();
        assert!(!cut.is_exact());
        assert!(TruncatedSeries::from_real(&[1.0, 2.0]).resized(3).is_none());
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn f32_arithmetic() {
        let f = TruncatedSeries::<f32>::real_polynomial(&[1.0, 1.0]);
        let g = f.reciprocal(8).unwrap();
        let back = &f * &g;
        assert!(back.coeffs()[1..].iter().all(|z| z.norm() < 1e-6));
    }

    fn unit_series(len: usize) -> impl Strategy<Value = TruncatedSeries<f64>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
            .prop_map(|v| TruncatedSeries::new(v.into_iter().map(|(a, b)| Complex::new(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(f in unit_series(24), g in unit_series(24), h in unit_series(24)) {
            let fg = &f * &g;
            prop_assert!(fg.max_abs_diff(&(&g * &f)) < 1e-14 * 24.0);
            let left = &fg * &h;
            let right = &f * &(&g * &h);
            // coefficients of a triple product reach ~N²; compare relative to that scale
            prop_assert!(left.max_abs_diff(&right) < 1e-14 * 24.0 * 24.0);
        }

        #[test]
        fn reciprocal_roundtrip(
            f0 in (0.1f64..1.0, 0.0f64..std::f64::consts::TAU),
            rest in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..6),
            n in 1usize..512,
        ) {
            // bounded-degree numerators keep the reciprocal's growth finite at N=512
            let mut coeffs = vec![Complex::from_polar(f0.0, f0.1)];
            let scale = f0.0 * 0.9 / (rest.len().max(1) as f64);
            coeffs.extend(rest.into_iter().map(|(a, b)| Complex::new(a, b) * scale / 2f64.sqrt()));
            let f = TruncatedSeries::polynomial(coeffs);
            let g = f.reciprocal(n).unwrap();
            let back = (&f * &g).resized(n).unwrap();
            let mut expect = vec![Complex::new(0.0, 0.0); n];
            expect[0] = Complex::new(1.0, 0.0);
            let err = back.max_abs_diff(&TruncatedSeries::new(expect));
            prop_assert!(err < 1e-12, "err={}", err);
        }

        #[test]
        fn evaluation_is_multiplicative(f in unit_series(40), g in unit_series(40), r in 0.0f64..0.5, t in 0.0f64..6.3) {
            let z = Complex::from_polar(r, t);
            let lhs = (&f * &g).evaluate(z);
            let rhs = f.evaluate(z) * g.evaluate(z);
            // dropped cross terms: Σ_{k≥40} (k+1) 2 rᵏ
            let tail: f64 = (40..200).map(|k| 2.0 * (k as f64 + 1.0) * r.powi(k)).sum();
            prop_assert!((lhs - rhs).norm() <= tail + 1e-13);
        }
    }
}
