//! Weighted composition operators `W_{F,φ} f = F · (f ∘ φ)` as truncated
//! matrices, and the identities a co-isometric operator must satisfy.
//!
//! Basis convention: `e_n = √γ(n) zⁿ`, so `⟨e_n, e_n⟩ = γ(n)·‖zⁿ‖² = 1` and
//!
//! ```text
//! A[m][n] = ⟨W e_n, e_m⟩ = [zᵐ](F φⁿ) · √(γ(n)/γ(m)).
//! ```
//!
//! Truncated unitaries are never exactly unitary, so defects are measured on
//! the leading `k × k` block of an `N × N` matrix with `N ≫ k`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{canonical_weight_at, kernel_along, kernel_norm, kernel_value, kernel_vector};
use crate::moebius::Automorphism;
use crate::scalar::{from_usize, lit, real, unimodular, Complex, Real};
use crate::series::{binomial_power, TruncatedSeries};
use crate::weights::{SpaceClass, WeightSequence};

/// Default cap on the matrix dimension.
pub const DEFAULT_MAX_DIM: usize = 2048;
/// Default truncation, block size and defect tolerance.
pub const DEFAULT_N: usize = 256;
pub const DEFAULT_K: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-8;

/// The multiplier symbol `F`.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight<T> {
    Constant(Complex<T>),
    Series(TruncatedSeries<T>),
    /// `ν (1-|a|²)^{γ/2} (1 - ā z)^{-γ}`.
    Canonical { gamma: T, a: Complex<T>, nu: Complex<T> },
    /// The only weight a co-isometry can carry on a general space:
    /// `F(z) = 1 / (conj(F(0)) K_{φ(0)}(φ(z)))` with
    /// `F(0) = phase · K_{φ(0)}(φ(0))^{-1/2}`. Realized against the space at
    /// whatever truncation is requested.
    Forced { phase: Complex<T> },
}

/// The composition symbol `φ`.
#[derive(Debug, Clone, PartialEq)]
pub enum SelfMap<T> {
    Automorphism(Automorphism<T>),
    /// Taylor coefficients of a self-map; `sup |φ| ≤ 1` is assumed, not checked.
    Series(TruncatedSeries<T>),
}

impl<T: Real> SelfMap<T> {
    pub fn at(&self, z: Complex<T>) -> Result<Complex<T>> {
        match self {
            SelfMap::Automorphism(aut) => aut.apply(z),
            SelfMap::Series(s) => Ok(s.evaluate(z)),
        }
    }

    pub fn at_origin(&self) -> Complex<T> {
        match self {
            SelfMap::Automorphism(aut) => aut.lambda() * aut.a(),
            SelfMap::Series(s) => s.coeffs()[0],
        }
    }

    /// Taylor coefficients; a truncated series shorter than `n` stays short.
    pub fn taylor(&self, n: usize) -> TruncatedSeries<T> {
        match self {
            SelfMap::Automorphism(aut) => aut.taylor(n),
            SelfMap::Series(s) => s.resized(n).unwrap_or_else(|| s.clone()),
        }
    }

    pub fn as_automorphism(&self) -> Option<&Automorphism<T>> {
        match self {
            SelfMap::Automorphism(aut) => Some(aut),
            SelfMap::Series(_) => None,
        }
    }
}

impl<T: Real> Weight<T> {
    /// Taylor coefficients of `F` on the space `ws` for the map `map`.
    pub fn series(&self, ws: &WeightSequence<T>, map: &SelfMap<T>, n: usize) -> Result<TruncatedSeries<T>> {
        match self {
            Weight::Constant(c) => Ok(TruncatedSeries::constant(*c)),
            Weight::Series(s) => Ok(s.clone()),
            Weight::Canonical { gamma, a, nu } => {
                let scale = (T::one() - a.norm_sqr()).powf(*gamma / lit(2.0));
                Ok(binomial_power(a.conj(), *gamma, n).scale(*nu * scale))
            }
            Weight::Forced { phase } => forced_weight(ws, map, *phase, n),
        }
    }

    /// `F(z)`, using closed forms where the descriptor has one.
    pub fn at(&self, ws: &WeightSequence<T>, map: &SelfMap<T>, z: Complex<T>, n: usize) -> Result<Complex<T>> {
        match self {
            Weight::Constant(c) => Ok(*c),
            Weight::Series(s) => Ok(s.evaluate(z)),
            Weight::Canonical { gamma, a, nu } => Ok(canonical_weight_at(*gamma, *a, *nu, z)),
            Weight::Forced { phase } => {
                let p = map.at_origin();
                let kpp = kernel_value(ws, p, p, n)?.value.re;
                let f0 = *phase / phase.norm() / kpp.sqrt();
                let k = kernel_value(ws, p, map.at(z)?, n)?.value;
                Ok((f0.conj() * k).inv())
            }
        }
    }
}

/// Realizes [`Weight::Forced`] as a series with `n` coefficients.
pub fn forced_weight<T: Real>(
    ws: &WeightSequence<T>,
    map: &SelfMap<T>,
    phase: Complex<T>,
    n: usize,
) -> Result<TruncatedSeries<T>> {
    let p = map.at_origin();
    let kpp = kernel_value(ws, p, p, n)?.value.re;
    let f0 = phase / phase.norm() / kpp.sqrt();
    let along = kernel_along(ws, p, &map.taylor(n), n)?;
    Ok(along.reciprocal(n)?.scale(f0.conj().inv()))
}

/// The pair `(F, φ)` defining `W_{F,φ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WcoSymbols<T> {
    pub weight: Weight<T>,
    pub map: SelfMap<T>,
}

impl<T: Real> WcoSymbols<T> {
    pub fn new(weight: Weight<T>, map: SelfMap<T>) -> Result<Self> {
        if !(map.at_origin().norm() < T::one()) {
            return Err(Error::Domain(format!(
                "|phi(0)| = {} must be < 1",
                map.at_origin().norm()
            )));
        }
        let vanishing = match &weight {
            Weight::Constant(c) => c.norm_sqr() == T::zero(),
            Weight::Series(s) => s.coeffs().iter().all(|c| c.norm_sqr() == T::zero()),
            Weight::Canonical { nu, .. } => nu.norm_sqr() == T::zero(),
            Weight::Forced { phase } => phase.norm_sqr() == T::zero(),
        };
        if vanishing {
            return Err(Error::Domain("weight F must not vanish identically".into()));
        }
        Ok(Self { weight, map })
    }

    pub fn identity() -> Self {
        Self::rotation(T::zero(), real(T::one()))
    }

    /// `F ≡ c`, `φ(z) = e^{iθ} z`.
    pub fn rotation(theta: T, c: Complex<T>) -> Self {
        Self {
            weight: Weight::Constant(c),
            map: SelfMap::Automorphism(Automorphism::rotation(theta)),
        }
    }

    /// The unitary pair on H_γ: `φ = aut`, `F = ν K_a/‖K_a‖`.
    pub fn canonical(class: &SpaceClass<T>, aut: Automorphism<T>, nu: Complex<T>) -> Result<Self> {
        let SpaceClass::HGamma(gamma) = *class else {
            return Err(Error::Domain(format!(
                "canonical unitary weight needs an H_gamma space, but the space classifies as {class}"
            )));
        };
        Ok(Self {
            weight: Weight::Canonical {
                gamma,
                a: aut.a(),
                nu: nu / nu.norm(),
            },
            map: SelfMap::Automorphism(aut),
        })
    }

    pub fn weight_series(&self, ws: &WeightSequence<T>, n: usize) -> Result<TruncatedSeries<T>> {
        self.weight.series(ws, &self.map, n)
    }

    pub fn weight_at(&self, ws: &WeightSequence<T>, z: Complex<T>, n: usize) -> Result<Complex<T>> {
        self.weight.at(ws, &self.map, z, n)
    }
}

/// Limits applied while building matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub max_dim: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Dense `N × N` matrix of `W_{F,φ}` in the orthonormal monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    dim: usize,
    /// Row-major.
    entries: Vec<Complex<T>>,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex<T>] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    /// Leading `k × k` block as rows.
    pub fn block(&self, k: usize) -> Vec<Vec<Complex<T>>> {
        let k = k.min(self.dim);
        (0..k).map(|r| self.row(r)[..k].to_vec()).collect()
    }
}

/// Builds the truncated matrix with the default size cap.
pub fn build_matrix<T: Real>(ws: &WeightSequence<T>, symbols: &WcoSymbols<T>, n: usize) -> Result<OperatorMatrix<T>> {
    build_matrix_with(ws, symbols, n, &BuildOptions::default())
}

pub fn build_matrix_with<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    n: usize,
    opts: &BuildOptions,
) -> Result<OperatorMatrix<T>> {
    if n == 0 {
        return Err(Error::Precondition("matrix dimension must be positive".into()));
    }
    if n > opts.max_dim {
        return Err(Error::TooLarge { n, max: opts.max_dim });
    }
    let root_gamma: Vec<T> = ws.prefix(n)?.iter().map(|g| g.sqrt()).collect();
    let f = symbols.weight_series(ws, n)?;
    let f = f.resized(n).ok_or_else(|| {
        Error::Precondition(format!("weight F carries {} coefficients, {n} needed", f.len()))
    })?;
    let phi = symbols.map.taylor(n);
    let phi = phi.resized(n).ok_or_else(|| {
        Error::Precondition(format!("map phi carries {} coefficients, {n} needed", phi.len()))
    })?;

    let mut entries = vec![Complex::new(T::zero(), T::zero()); n * n];
    if let Some(aut) = symbols.map.as_automorphism().filter(|aut| aut.a().norm_sqr() == T::zero()) {
        // rotation: F φᶜ is F shifted by c and multiplied by tᶜ, t = φ'(0)
        let t = -aut.lambda();
        for c in 0..n {
            let turn = t.arg() * from_usize::<T>(c);
            for (m, coeff) in f.coeffs()[..n - c].iter().enumerate() {
                let (r, arg) = coeff.to_polar();
                entries[(m + c) * n + c] =
                    Complex::from_polar(r * (root_gamma[c] / root_gamma[m + c]), arg + turn);
            }
        }
        return Ok(OperatorMatrix { dim: n, entries });
    }
    // column c holds F φᶜ
    let mut column = f;
    for c in 0..n {
        for (m, coeff) in column.coeffs().iter().enumerate() {
            entries[m * n + c] = *coeff * (root_gamma[c] / root_gamma[m]);
        }
        if c + 1 < n {
            column = match symbols.map.as_automorphism() {
                Some(aut) => times_automorphism(&column, aut),
                None => (&column * &phi).resized(n).expect("truncation only"),
            };
        }
    }
    Ok(OperatorMatrix { dim: n, entries })
}

/// `g · φ_{λ,a}` through `(1 - āz) h = λ (a - z) g`, one pass over the
/// coefficients.
fn times_automorphism<T: Real>(g: &TruncatedSeries<T>, aut: &Automorphism<T>) -> TruncatedSeries<T> {
    let (lambda, abar) = (aut.lambda(), aut.a().conj());
    let a = aut.a();
    let mut out = Vec::with_capacity(g.len());
    let mut prev_g = Complex::new(T::zero(), T::zero());
    let mut prev_h = prev_g;
    for gm in g.coeffs() {
        let h = abar * prev_h + lambda * (a * *gm - prev_g);
        out.push(h);
        prev_g = *gm;
        prev_h = h;
    }
    TruncatedSeries::new(out)
}

fn block_gram_defect<T: Real>(a: &OperatorMatrix<T>, k: usize, rows_first: bool) -> T {
    let n = a.dim();
    let k = k.min(n);
    let mut sum = T::zero();
    for i in 0..k {
        for j in 0..k {
            let mut g = Complex::new(T::zero(), T::zero());
            if rows_first {
                // (A A*)_{ij} = Σ_c A[i][c] conj(A[j][c])
                let (ri, rj) = (a.row(i), a.row(j));
                for c in 0..n {
                    g = g + ri[c] * rj[c].conj();
                }
            } else {
                // (A* A)_{ij} = Σ_m conj(A[m][i]) A[m][j]
                for m in 0..n {
                    g = g + a.get(m, i).conj() * a.get(m, j);
                }
            }
            if i == j {
                g = g - T::one();
            }
            sum = sum + g.norm_sqr();
        }
    }
    sum.sqrt()
}

/// `‖(A*A - I)_{k×k}‖_F`.
pub fn isometry_defect<T: Real>(a: &OperatorMatrix<T>, k: usize) -> T {
    block_gram_defect(a, k, false)
}

/// `‖(AA* - I)_{k×k}‖_F`.
pub fn coisometry_defect<T: Real>(a: &OperatorMatrix<T>, k: usize) -> T {
    block_gram_defect(a, k, true)
}

/// Isometry and co-isometry block defects of one matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockDefects<T> {
    pub n: usize,
    pub k: usize,
    pub isometry: T,
    pub coisometry: T,
}

pub fn block_defects<T: Real>(a: &OperatorMatrix<T>, k: usize) -> BlockDefects<T> {
    BlockDefects {
        n: a.dim(),
        k: k.min(a.dim()),
        isometry: isometry_defect(a, k),
        coisometry: coisometry_defect(a, k),
    }
}

/// `‖(A* k_w)_{<k} - conj(F(w)) (k_{φ(w)})_{<k}‖ / ‖k_w‖` on a prebuilt matrix.
pub fn adjoint_kernel_defect_on<T: Real>(
    a: &OperatorMatrix<T>,
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    w: Complex<T>,
    k: usize,
) -> Result<T> {
    let n = a.dim();
    let k = k.min(n);
    let kw = kernel_vector(ws, w, n)?;
    let fw = symbols.weight_at(ws, w, n)?;
    let target = kernel_vector(ws, symbols.map.at(w)?, k)?;
    let mut err = T::zero();
    for (c, tc) in target.iter().enumerate() {
        let mut lhs = Complex::new(T::zero(), T::zero());
        for (m, km) in kw.iter().enumerate() {
            lhs = lhs + a.get(m, c).conj() * *km;
        }
        err = err + (lhs - fw.conj() * *tc).norm_sqr();
    }
    Ok(err.sqrt() / kernel_norm(ws, w, n)?)
}

/// Defect of `W* K_w = conj(F(w)) K_{φ(w)}`, which every bounded WCO obeys.
pub fn adjoint_kernel_defect<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    w: Complex<T>,
    n: usize,
    k: usize,
) -> Result<T> {
    let a = build_matrix(ws, symbols, n)?;
    adjoint_kernel_defect_on(&a, ws, symbols, w, k)
}

/// Max over `(z, w)` of
/// `|F(z) conj(F(w)) K_{φ(w)}(φ(z)) - K_w(z)| / |K_w(z)|`.
pub fn functional_identity_defect<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    pairs: &[(Complex<T>, Complex<T>)],
    n: usize,
) -> Result<T> {
    let mut worst = T::zero();
    for &(z, w) in pairs {
        let fz = symbols.weight_at(ws, z, n)?;
        let fw = symbols.weight_at(ws, w, n)?;
        let lhs = fz * fw.conj() * kernel_value(ws, symbols.map.at(w)?, symbols.map.at(z)?, n)?.value;
        let rhs = kernel_value(ws, w, z, n)?.value;
        worst = worst.max((lhs - rhs).norm() / rhs.norm());
    }
    Ok(worst)
}

/// Max over `z` of `| |F(z)|² K_{φ(z)}(φ(z)) - K_z(z) | / K_z(z)`.
pub fn modulus_identity_defect<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    points: &[Complex<T>],
    n: usize,
) -> Result<T> {
    let mut worst = T::zero();
    for &z in points {
        let fz = symbols.weight_at(ws, z, n)?;
        let pz = symbols.map.at(z)?;
        let lhs = fz.norm_sqr() * kernel_value(ws, pz, pz, n)?.value.re;
        let rhs = kernel_value(ws, z, z, n)?.value.re;
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    Ok(worst)
}

/// Points `r e^{iθ}` for `r ∈ {0.1, …, 0.5}` and five angles.
pub fn default_grid<T: Real>() -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(25);
    for i in 1..=5 {
        let r: T = lit(0.1 * f64::from(i));
        for j in 0..5 {
            let theta: T = lit(std::f64::consts::TAU * f64::from(j) / 5.0 + 0.25);
            out.push(unimodular(theta) * r);
        }
    }
    out
}

/// All ordered pairs of [`default_grid`] points.
pub fn default_pairs<T: Real>() -> Vec<(Complex<T>, Complex<T>)> {
    let grid = default_grid();
    grid.iter()
        .flat_map(|&z| grid.iter().map(move |&w| (z, w)))
        .collect()
}

/// `f ∘ ψ = Σ_j f_j ψʲ` for an automorphism `ψ`, truncated at `n`
/// coefficients. The error is bounded by the dropped `Σ_{j ≥ len f} |f_j|`
/// since `|ψ| ≤ 1` bounds every Taylor coefficient of `ψʲ`.
pub fn compose_with_automorphism<T: Real>(
    f: &TruncatedSeries<T>,
    psi: &Automorphism<T>,
    n: usize,
) -> TruncatedSeries<T> {
    let base = psi.taylor(n);
    let mut acc = vec![Complex::new(T::zero(), T::zero()); n];
    let mut power = TruncatedSeries::one().resized(n).expect("polynomial");
    let terms = if f.is_exact() { f.degree() + 1 } else { f.len() };
    for (j, fj) in f.coeffs().iter().take(terms).enumerate() {
        for (slot, p) in acc.iter_mut().zip(power.coeffs()) {
            *slot = *slot + *p * *fj;
        }
        if j + 1 < terms {
            power = (&power * &base).resized(n).expect("truncation only");
        }
    }
    TruncatedSeries::new(acc)
}

/// Output of [`lemma_square`].
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaSquare<T> {
    /// `G(z) = F(τz) · F(φ_{τ²λ, τ̄a}(z))`.
    pub g: TruncatedSeries<T>,
    /// The squared map `φ_{μ,c} = ψ ∘ ψ`, `ψ = φ_{τλ, τ̄a}`.
    pub map: Automorphism<T>,
    pub mu: Complex<T>,
    pub c: Complex<T>,
}

impl<T: Real> LemmaSquare<T> {
    pub fn symbols(&self) -> WcoSymbols<T> {
        WcoSymbols {
            weight: Weight::Series(self.g.clone()),
            map: SelfMap::Automorphism(self.map),
        }
    }
}

/// Squares `C_{R_τ} W_{F, φ_{λ,a}} = W_{F(τ·), φ_{τλ, τ̄a}}`.
pub fn lemma_square<T: Real>(
    f: &TruncatedSeries<T>,
    lambda: Complex<T>,
    a: Complex<T>,
    tau: Complex<T>,
    n: usize,
) -> Result<LemmaSquare<T>> {
    let tau = tau / tau.norm();
    let psi = Automorphism::new(lambda, a)?.precompose_rotation(tau);
    let outer = psi.postcompose_rotation(tau);
    let rotated = f.rotate_argument(tau);
    let along = compose_with_automorphism(f, &outer, n);
    let g = &rotated * &along;
    let square = Automorphism::compose(&psi, &psi)?;
    Ok(LemmaSquare {
        g,
        map: square,
        mu: square.lambda(),
        c: square.a(),
    })
}

/// `⟨e_n, e_n⟩ = γ(n) ‖zⁿ‖²`.
pub fn basis_norm_sq<T: Real>(ws: &WeightSequence<T>, n: usize) -> Result<T> {
    let norm = ws.monomial_norm(n)?;
    Ok(ws.gamma(n)? * norm * norm)
}
