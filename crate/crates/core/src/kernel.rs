//! Reproducing kernels `K_w(z) = Σ γ(n) (w̄ z)ⁿ`, their coordinates in the
//! orthonormal basis `e_n = √γ(n) zⁿ`, and the canonical unitary weight on
//! H_γ.

use crate::error::{Error, Result};
use crate::moebius::Automorphism;
use crate::scalar::{from_usize, lit, real, Complex, Real};
use crate::series::{binomial_power, TruncatedSeries};
use crate::weights::{SpaceClass, WeightSequence};

/// A truncated kernel sum together with a bound on what was dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue<T> {
    pub value: Complex<T>,
    /// Bound on `Σ_{n≥N} γ(n) |w z|ⁿ`; `None` when only the truncation is known.
    pub tail: Option<T>,
}

/// `K_w` restricted to the first `n` basis vectors.
#[derive(Debug, Clone, Copy)]
pub struct KernelSection<'a, T> {
    pub ws: &'a WeightSequence<T>,
    pub w: Complex<T>,
    pub n: usize,
}

impl<'a, T: Real> KernelSection<'a, T> {
    pub fn new(ws: &'a WeightSequence<T>, w: Complex<T>, n: usize) -> Self {
        Self { ws, w, n }
    }

    pub fn value(&self, z: Complex<T>) -> Result<KernelValue<T>> {
        kernel_value(self.ws, self.w, z, self.n)
    }

    pub fn vector(&self) -> Result<Vec<Complex<T>>> {
        kernel_vector(self.ws, self.w, self.n)
    }

    pub fn norm(&self) -> Result<T> {
        kernel_norm(self.ws, self.w, self.n)
    }

    pub fn derivative(&self, z: Complex<T>) -> Result<Complex<T>> {
        kernel_derivative_value(self.ws, self.w, z, self.n)
    }
}

pub fn kernel_value<T: Real>(
    ws: &WeightSequence<T>,
    w: Complex<T>,
    z: Complex<T>,
    n: usize,
) -> Result<KernelValue<T>> {
    let gammas = ws.prefix(n)?;
    let u = w.conj() * z;
    let value = gammas
        .iter()
        .rev()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &g| acc * u + g);
    Ok(KernelValue {
        value,
        tail: ws.tail_bound(n, u.norm()),
    })
}

/// Coordinates `k_w[n] = √γ(n) w̄ⁿ` of `K_w`.
pub fn kernel_vector<T: Real>(ws: &WeightSequence<T>, w: Complex<T>, n: usize) -> Result<Vec<Complex<T>>> {
    let gammas = ws.prefix(n)?;
    let wbar = w.conj();
    let mut p = real(T::one());
    Ok(gammas
        .iter()
        .map(|&g| {
            let v = p * g.sqrt();
            p = p * wbar;
            v
        })
        .collect())
}

/// `‖K_w‖ = √K_w(w)` at truncation `n`.
pub fn kernel_norm<T: Real>(ws: &WeightSequence<T>, w: Complex<T>, n: usize) -> Result<T> {
    let gammas = ws.prefix(n)?;
    let r2 = w.norm_sqr();
    let sum = gammas.iter().rev().fold(T::zero(), |acc, &g| acc * r2 + g);
    Ok(sum.sqrt())
}

/// `∂K_w/∂z (z) = Σ_{n≥1} n γ(n) w̄ⁿ z^{n-1}`, truncated at `n` kernel terms.
pub fn kernel_derivative_value<T: Real>(
    ws: &WeightSequence<T>,
    w: Complex<T>,
    z: Complex<T>,
    n: usize,
) -> Result<Complex<T>> {
    let gammas = ws.prefix(n)?;
    let wbar = w.conj();
    let u = wbar * z;
    let mut acc = Complex::new(T::zero(), T::zero());
    for k in (1..gammas.len()).rev() {
        acc = acc * u + gammas[k] * from_usize::<T>(k);
    }
    Ok(acc * wbar)
}

/// `|⟨f, K_w⟩ - f(w)|` with the inner product `Σ a_n conj(k_n) / γ(n)` of
/// the coefficient representation.
pub fn reproducing_check<T: Real>(
    ws: &WeightSequence<T>,
    f: &TruncatedSeries<T>,
    w: Complex<T>,
    n: usize,
) -> Result<T> {
    let degree = if f.is_exact() { f.degree() } else { f.len() - 1 };
    if n <= degree {
        return Err(Error::Precondition(format!(
            "truncation {n} must exceed the degree {degree} of f"
        )));
    }
    let gammas = ws.prefix(degree + 1)?;
    let wbar = w.conj();
    let mut kernel_coeff = real(T::one());
    let mut inner = Complex::new(T::zero(), T::zero());
    for (k, &g) in gammas.iter().enumerate() {
        let a = f.coeffs()[k];
        let coeff = kernel_coeff * g;
        inner = inner + a * coeff.conj() / g;
        kernel_coeff = kernel_coeff * wbar;
    }
    Ok((inner - f.evaluate(w)).norm())
}

/// `K_w ∘ φ` as a series: `Σ_{j<n} γ(j) w̄ʲ φʲ`, truncated at `n` coefficients.
///
/// Requires `|w|·sup|φ| < 1` for the sum to converge; `φ` is only trusted
/// to be a self-map of the disk.
pub fn kernel_along<T: Real>(
    ws: &WeightSequence<T>,
    w: Complex<T>,
    phi: &TruncatedSeries<T>,
    n: usize,
) -> Result<TruncatedSeries<T>> {
    let gammas = ws.prefix(n)?;
    let len = if phi.is_exact() { n } else { n.min(phi.len()) };
    let base = phi.resized(len).expect("length fits the series");
    let wbar = w.conj();
    let mut acc = vec![Complex::new(T::zero(), T::zero()); len];
    let mut power = TruncatedSeries::one().resized(len).expect("polynomial");
    let mut wp = real(T::one());
    for &g in gammas.iter() {
        let c = wp * g;
        for (slot, p) in acc.iter_mut().zip(power.coeffs()) {
            *slot = *slot + *p * c;
        }
        wp = wp * wbar;
        if wp.norm_sqr() == T::zero() {
            break;
        }
        power = (&power * &base).resized(len).expect("truncation only");
    }
    Ok(TruncatedSeries::new(acc))
}

/// `F = ν K_a / ‖K_a‖ = ν (1-|a|²)^{γ/2} (1 - ā z)^{-γ}` on H_γ, for the
/// automorphism with zero `a`.
pub fn canonical_weight<T: Real>(
    class: &SpaceClass<T>,
    aut: &Automorphism<T>,
    nu: Complex<T>,
    n: usize,
) -> Result<TruncatedSeries<T>> {
    let gamma = hgamma_parameter(class)?;
    let a = aut.a();
    let nu = nu / nu.norm();
    let scale = (T::one() - a.norm_sqr()).powf(gamma / lit(2.0));
    Ok(binomial_power(a.conj(), gamma, n).scale(nu * scale))
}

/// Closed-form value of [`canonical_weight`] at `z`. The principal branch is
/// exact here because `Re(1 - ā z) > 0` on the disk.
pub fn canonical_weight_at<T: Real>(gamma: T, a: Complex<T>, nu: Complex<T>, z: Complex<T>) -> Complex<T> {
    let nu = nu / nu.norm();
    let scale = (T::one() - a.norm_sqr()).powf(gamma / lit(2.0));
    let base = real::<T>(T::one()) - a.conj() * z;
    nu * scale * base.powf(-gamma)
}

fn hgamma_parameter<T: Real>(class: &SpaceClass<T>) -> Result<T> {
    match class {
        SpaceClass::HGamma(g) => Ok(*g),
        other => Err(Error::Domain(format!(
            "canonical weight needs an H_gamma space, but the space classifies as {other}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{classify_default, NamedSpace};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn all_named(n: usize) -> Vec<WeightSequence<f64>> {
        [
            NamedSpace::Hardy,
            NamedSpace::Bergman { alpha: 0.0 },
            NamedSpace::Bergman { alpha: 1.5 },
            NamedSpace::HGamma { gamma: 0.5 },
            NamedSpace::HGamma { gamma: 3.0 },
            NamedSpace::DirichletClassical,
            NamedSpace::BoundedLog,
        ]
        .iter()
        .map(|s| s.materialize(n).unwrap())
        .collect()
    }

    #[test]
    fn kernel_at_origin_is_one() {
        for ws in all_named(32) {
            for z in [c(0.3, 0.1), c(-0.9, 0.0)] {
                assert_eq!(kernel_value(&ws, c(0.0, 0.0), z, 32).unwrap().value, c(1.0, 0.0));
            }
        }
    }

    #[test]
    fn closed_form_kernels() {
        let (w, z) = (c(0.5, 0.0), c(0.5, 0.0));
        let hardy = WeightSequence::hardy(64);
        let k = kernel_value(&hardy, w, z, 64).unwrap();
        assert!((k.value - c(4.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!(k.tail.unwrap() < 1e-12);
        let berg = WeightSequence::hgamma(2.0, 64).unwrap();
        let k = kernel_value(&berg, w, z, 64).unwrap();
        assert!((k.value - c(16.0 / 9.0, 0.0)).norm() < 1e-12);

        let (w, z) = (c(0.4, 0.3), c(-0.2, 0.6));
        let u = w.conj() * z;
        let one = c(1.0, 0.0);
        let log_term = (one / (one - u)).ln();
        let bl = kernel_value(&WeightSequence::bounded_log(200), w, z, 200).unwrap();
        assert!((bl.value - (one + u * 2.0 - (one - u) * log_term)).norm() < 1e-14);
        let d = kernel_value(&WeightSequence::dirichlet_classical(200), w, z, 200).unwrap();
        assert!((d.value - log_term / u).norm() < 1e-14);

        let e = WeightSequence::explicit(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(kernel_value(&e, w, z, 3).unwrap().tail, None);
    }

    #[test]
    fn hgamma_convergence_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &g in &[0.5, 1.0, 2.0, 3.0, 4.0] {
            let ws = WeightSequence::hgamma(g, 64).unwrap();
            for _ in 0..20 {
                let w = Complex::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..6.3));
                let z = Complex::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..6.3));
                let exact = (c(1.0, 0.0) - w.conj() * z).powf(-g);
                let k = kernel_value(&ws, w, z, 64).unwrap().value;
                assert!((k - exact).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn vector_and_norm() {
        let ws = WeightSequence::hgamma(2.0, 16).unwrap();
        let v = kernel_vector(&ws, c(0.0, 0.0), 16).unwrap();
        assert_eq!(v[0], c(1.0, 0.0));
        assert!(v[1..].iter().all(|x| x.norm() == 0.0));
        assert_eq!(kernel_norm(&ws, c(0.0, 0.0), 16).unwrap(), 1.0);

        let hardy = WeightSequence::hardy(200);
        let n2 = kernel_norm(&hardy, c(0.5, 0.0), 200).unwrap().powi(2);
        assert!((n2 - 4.0 / 3.0).abs() < 1e-14);

        for ws in all_named(40) {
            let w = c(0.3, -0.5);
            let norm2 = kernel_norm(&ws, w, 40).unwrap().powi(2);
            let diag = kernel_value(&ws, w, w, 40).unwrap().value;
            assert!((norm2 - diag.re).abs() <= 4.0 * f64::EPSILON * norm2);
            assert!(diag.im.abs() < 1e-15);
            let v = kernel_vector(&ws, w, 40).unwrap();
            let vnorm2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            assert!((vnorm2 - norm2).abs() < 1e-14);
        }
    }

    #[test]
    fn section_delegates() {
        let ws = WeightSequence::hardy(32);
        let s = KernelSection::new(&ws, c(0.2, 0.1), 32);
        assert_eq!(s.norm().unwrap(), kernel_norm(&ws, c(0.2, 0.1), 32).unwrap());
        assert_eq!(s.vector().unwrap().len(), 32);
        assert_eq!(s.value(c(0.1, 0.0)).unwrap(), kernel_value(&ws, c(0.2, 0.1), c(0.1, 0.0), 32).unwrap());
        assert_eq!(s.derivative(c(0.1, 0.0)).unwrap(), kernel_derivative_value(&ws, c(0.2, 0.1), c(0.1, 0.0), 32).unwrap());
    }

    #[test]
    fn derivative_examples() {
        let lam = Complex::from_polar(1.0, 0.9);
        let a = c(0.3, 0.2);
        for ws in all_named(64) {
            let d0 = kernel_derivative_value(&ws, lam * a, c(0.0, 0.0), 64).unwrap();
            let g1 = ws.gamma1().unwrap();
            assert!((d0 - (lam * a).conj() * g1).norm() < 1e-15);
            assert_eq!(kernel_derivative_value(&ws, c(0.0, 0.0), c(0.4, 0.0), 64).unwrap(), c(0.0, 0.0));
        }
        let hardy = WeightSequence::hardy(128);
        let d = kernel_derivative_value(&hardy, c(0.5, 0.0), c(0.5, 0.0), 128).unwrap();
        assert!((d - c(0.5 / 0.5625, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let h = 1e-6;
        for ws in all_named(128) {
            for k in 0..12 {
                let w = Complex::from_polar(0.2 + 0.04 * k as f64, 0.5 * k as f64);
                let z = Complex::from_polar(0.5 - 0.03 * k as f64, -1.1 * k as f64);
                let kp = kernel_value(&ws, w, z + h, 128).unwrap().value;
                let km = kernel_value(&ws, w, z - h, 128).unwrap().value;
                let fd = (kp - km) / (2.0 * h);
                let d = kernel_derivative_value(&ws, w, z, 128).unwrap();
                assert!((fd - d).norm() / d.norm() < 1e-7, "{:?}", ws.origin());
            }
        }
    }

    #[test]
    fn diagonal_is_increasing() {
        for ws in all_named(64) {
            let mut prev = 0.0;
            for k in 0..100 {
                let r = k as f64 / 100.0;
                let v = kernel_value(&ws, c(r, 0.0), c(r, 0.0), 64).unwrap().value.re;
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn reproducing_property() {
        let ws = WeightSequence::bergman(0.0, 16).unwrap();
        let one = TruncatedSeries::real_polynomial(&[1.0]);
        assert_eq!(reproducing_check(&ws, &one, c(0.3, 0.3), 4).unwrap(), 0.0);
        let cube = TruncatedSeries::real_polynomial(&[0.0, 0.0, 0.0, 1.0]);
        assert!(reproducing_check(&ws, &cube, c(0.4, 0.0), 8).unwrap() < 1e-15);
        assert!(matches!(
            reproducing_check(&ws, &cube, c(0.4, 0.0), 3),
            Err(Error::Precondition(_))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for ws in all_named(16) {
            for _ in 0..20 {
                let f = TruncatedSeries::polynomial(
                    (0..11).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
                );
                let w = Complex::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..6.3));
                assert!(reproducing_check(&ws, &f, w, 11).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn canonical_weight_examples() {
        let hardy = WeightSequence::hardy(64);
        let class = classify_default(&hardy);
        let nu = Complex::from_polar(1.0, 0.4);
        let rot = canonical_weight(&class, &Automorphism::rotation(0.3), nu, 16).unwrap();
        assert!((rot.coeffs()[0] - nu).norm() < 1e-15);
        assert!(rot.coeffs()[1..].iter().all(|x| x.norm() == 0.0));

        let half = Automorphism::involution(c(0.5, 0.0)).unwrap();
        let f = canonical_weight(&class, &half, c(1.0, 0.0), 16).unwrap();
        assert!((f.coeffs()[0] - c(0.75f64.sqrt(), 0.0)).norm() < 1e-15);

        let dirichlet = classify_default(&WeightSequence::dirichlet_classical(64));
        assert!(matches!(
            canonical_weight(&dirichlet, &half, c(1.0, 0.0), 16),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn canonical_weight_modulus_matches_derivative() {
        for &g in &[0.5, 1.0, 2.0, 3.0] {
            let class = SpaceClass::HGamma(g);
            let phi = Automorphism::new(Complex::from_polar(1.0, 1.2), c(0.35, -0.45)).unwrap();
            let f = canonical_weight(&class, &phi, Complex::from_polar(1.0, -2.0), 256).unwrap();
            for i in 0..5 {
                for j in 0..4 {
                    let z = Complex::from_polar(0.1 + 0.1 * i as f64, 1.3 * j as f64);
                    let lhs = f.evaluate(z).norm_sqr();
                    let rhs = phi.derivative_at(z).unwrap().norm().powf(g);
                    assert!((lhs - rhs).abs() / rhs < 1e-10);
                    let closed = canonical_weight_at(g, phi.a(), Complex::from_polar(1.0, -2.0), z);
                    assert!((closed - f.evaluate(z)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn canonical_weight_solves_forced_equation() {
        // F(z) · conj(F(0)) · K_{φ(0)}(φ(z)) = 1 coefficientwise
        for &g in &[0.5, 1.0, 2.0, 3.0] {
            let ws = WeightSequence::hgamma(g, 128).unwrap();
            let phi = Automorphism::new(c(0.0, 1.0), c(0.3, 0.4)).unwrap();
            let f = canonical_weight(&SpaceClass::HGamma(g), &phi, c(1.0, 0.0), 128).unwrap();
            let p = phi.apply(c(0.0, 0.0)).unwrap();
            let k = kernel_along(&ws, p, &phi.taylor(128), 128).unwrap();
            let rebuilt = k.reciprocal(128).unwrap().scale(f.coeffs()[0].conj().inv());
            assert!(rebuilt.max_abs_diff(&f) < 1e-10, "gamma={g}");
        }
    }

    proptest! {
        #[test]
        fn kernel_is_hermitian(wr in 0.0f64..0.9, wt in 0.0f64..6.3, zr in 0.0f64..0.9, zt in 0.0f64..6.3) {
            let w = Complex::from_polar(wr, wt);
            let z = Complex::from_polar(zr, zt);
            for ws in all_named(64) {
                let kwz = kernel_value(&ws, w, z, 64).unwrap().value;
                let kzw = kernel_value(&ws, z, w, 64).unwrap().value;
                prop_assert!((kwz - kzw.conj()).norm() < 1e-13);
            }
        }
    }
}
