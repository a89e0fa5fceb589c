//! Weight sequences `γ(n) = ‖zⁿ‖⁻²` and the classification of the spaces
//! they define.
//!
//! The H_γ family is generated by the multiplicative recurrence
//! `(n+1) γ(n+1) = (n + γ(1)) γ(n)`, equivalently
//! `γ(n) = Γ(n+γ(1)) / (Γ(γ(1)) n!)`. The Beta-function variant of that closed
//! form that circulates in the literature does not agree with the Gamma
//! ratio and is not used here.

use std::borrow::Cow;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

/// Default relative tolerance of the H_γ recurrence test.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Default number of recurrence steps checked by [`classify`].
pub const DEFAULT_N_CHECK: usize = 60;

/// Where a weight sequence came from. Named origins carry a generator rule,
/// so they can be evaluated past the materialized range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Origin<T> {
    Hardy,
    /// Weighted Bergman space `A²_α`, i.e. `γ(1) = α + 2`.
    Bergman { alpha: T },
    HGamma { gamma: T },
    DirichletClassical,
    /// `γ(0) = γ(1) = 1`, `γ(n) = 1/(n(n-1))`: kernel bounded on the diagonal.
    BoundedLog,
    Explicit,
}

impl<T: Real> Origin<T> {
    /// `γ(1)` for the recurrence-generated origins.
    fn recurrence_parameter(&self) -> Option<T> {
        match *self {
            Origin::Hardy => Some(T::one()),
            Origin::Bergman { alpha } => Some(alpha + lit(2.0)),
            Origin::HGamma { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Closed form weights, where one exists.
    fn closed_form(&self, n: usize) -> Option<T> {
        match self {
            Origin::Hardy => Some(T::one()),
            Origin::DirichletClassical => Some(T::one() / from_usize(n + 1)),
            Origin::BoundedLog => Some(if n < 2 {
                T::one()
            } else {
                T::one() / (from_usize::<T>(n) * from_usize(n - 1))
            }),
            _ => None,
        }
    }

    /// Weights that never increase with `n`, so `γ(n)` dominates the tail.
    fn non_increasing(&self) -> bool {
        matches!(
            self,
            Origin::Hardy | Origin::DirichletClassical | Origin::BoundedLog
        )
    }
}

/// A named space together with its parameters, before materialization.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedSpace<T> {
    Hardy,
    Bergman { alpha: T },
    HGamma { gamma: T },
    DirichletClassical,
    BoundedLog,
    Explicit(Vec<T>),
}

impl<T: Real> NamedSpace<T> {
    pub fn materialize(&self, n_max: usize) -> Result<WeightSequence<T>> {
        named_space(self, n_max)
    }
}

/// `γ(0..=n_max)` plus the rule that produced it.
///
/// Values are immutable once materialized; [`WeightSequence::extend_to`]
/// takes `&mut self`, so growing a shared sequence needs external locking.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence<T> {
    values: Vec<T>,
    origin: Origin<T>,
}

/// Shared coefficient recurrence `c_0 = 1`, `c_n = c_{n-1} (n-1+s)/n`.
///
/// Used both for `γ(n)` of H_γ and for the binomial series of
/// `(1-āz)^{-s}` so that the two agree bit for bit.
pub(crate) fn recurrence_coefficients<T: Real>(s: T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut c = T::one();
    for n in 0..len {
        if n > 0 {
            c = c * (from_usize::<T>(n - 1) + s) / from_usize(n);
        }
        out.push(c);
    }
    out
}

/// The H_γ weights `γ(0..=n_max)` for `γ(1) = gamma1`.
pub fn gamma_from_recurrence<T: Real>(gamma1: T, n_max: usize) -> Result<WeightSequence<T>> {
    if !(gamma1 > T::zero()) || !gamma1.is_finite() {
        return Err(Error::Domain(format!(
            "gamma(1) must be positive and finite, got {gamma1}"
        )));
    }
    Ok(WeightSequence {
        values: recurrence_coefficients(gamma1, n_max + 1),
        origin: Origin::HGamma { gamma: gamma1 },
    })
}

pub fn named_space<T: Real>(space: &NamedSpace<T>, n_max: usize) -> Result<WeightSequence<T>> {
    let origin = match space {
        NamedSpace::Hardy => Origin::Hardy,
        NamedSpace::Bergman { alpha } => {
            if !(*alpha > -T::one()) || !alpha.is_finite() {
                return Err(Error::Domain(format!(
                    "Bergman exponent must satisfy alpha > -1, got {alpha}"
                )));
            }
            Origin::Bergman { alpha: *alpha }
        }
        NamedSpace::HGamma { gamma } => return gamma_from_recurrence(*gamma, n_max),
        NamedSpace::DirichletClassical => Origin::DirichletClassical,
        NamedSpace::BoundedLog => Origin::BoundedLog,
        NamedSpace::Explicit(values) => return WeightSequence::explicit(values.clone()),
    };
    let mut ws = WeightSequence {
        values: vec![T::one()],
        origin,
    };
    ws.extend_to(n_max)?;
    Ok(ws)
}

impl<T: Real> WeightSequence<T> {
    pub fn hardy(n_max: usize) -> Self {
        named_space(&NamedSpace::Hardy, n_max).expect("hardy weights are always valid")
    }

    pub fn dirichlet_classical(n_max: usize) -> Self {
        named_space(&NamedSpace::DirichletClassical, n_max).expect("valid")
    }

    pub fn bounded_log(n_max: usize) -> Self {
        named_space(&NamedSpace::BoundedLog, n_max).expect("valid")
    }

    pub fn bergman(alpha: T, n_max: usize) -> Result<Self> {
        named_space(&NamedSpace::Bergman { alpha }, n_max)
    }

    pub fn hgamma(gamma: T, n_max: usize) -> Result<Self> {
        gamma_from_recurrence(gamma, n_max)
    }

    /// Validated copy of a user-supplied list.
    pub fn explicit(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidWeights("empty weight list".into()));
        }
        if values[0] != T::one() {
            return Err(Error::InvalidWeights(format!(
                "gamma(0) must be 1.0, got {}",
                values[0]
            )));
        }
        if let Some((n, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > T::zero()) || !v.is_finite())
        {
            return Err(Error::InvalidWeights(format!(
                "gamma({n}) = {v} is not a positive finite number"
            )));
        }
        Ok(Self {
            values,
            origin: Origin::Explicit,
        })
    }

    pub fn origin(&self) -> &Origin<T> {
        &self.origin
    }

    /// Largest materialized index.
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn has_generator(&self) -> bool {
        self.origin != Origin::Explicit
    }

    /// Materializes `γ(n)` up to `n_max` (no-op when already there).
    pub fn extend_to(&mut self, n_max: usize) -> Result<()> {
        let have = self.n_max();
        if n_max <= have {
            return Ok(());
        }
        if let Some(s) = self.origin.recurrence_parameter() {
            let mut c = *self.values.last().expect("non-empty");
            for n in have + 1..=n_max {
                c = c * (from_usize::<T>(n - 1) + s) / from_usize(n);
                self.values.push(c);
            }
            return Ok(());
        }
        if self.origin.closed_form(0).is_some() {
            self.values
                .extend((have + 1..=n_max).map(|n| self.origin.closed_form(n).expect("closed form")));
            return Ok(());
        }
        Err(Error::IndexOutOfRange {
            index: n_max,
            n_max: have,
        })
    }

    /// Copy materialized at least up to `n_max`.
    pub fn extended(&self, n_max: usize) -> Result<Self> {
        let mut ws = self.clone();
        ws.extend_to(n_max)?;
        Ok(ws)
    }

    /// `γ(n)`, falling back to the generator rule past the materialized range.
    pub fn gamma(&self, n: usize) -> Result<T> {
        if let Some(v) = self.values.get(n) {
            return Ok(*v);
        }
        if let Some(v) = self.origin.closed_form(n) {
            return Ok(v);
        }
        if let Some(s) = self.origin.recurrence_parameter() {
            let mut c = *self.values.last().expect("non-empty");
            for m in self.values.len()..=n {
                c = c * (from_usize::<T>(m - 1) + s) / from_usize(m);
            }
            return Ok(c);
        }
        Err(Error::IndexOutOfRange {
            index: n,
            n_max: self.n_max(),
        })
    }

    /// `γ(1)`.
    pub fn gamma1(&self) -> Result<T> {
        self.gamma(1)
    }

    /// `γ(0..len)`, borrowed when already materialized.
    pub fn prefix(&self, len: usize) -> Result<Cow<'_, [T]>> {
        if len <= self.values.len() {
            return Ok(Cow::Borrowed(&self.values[..len]));
        }
        Ok(Cow::Owned(self.extended(len.saturating_sub(1))?.values))
    }

    /// `‖zⁿ‖ = γ(n)^{-1/2}`.
    pub fn monomial_norm(&self, n: usize) -> Result<T> {
        Ok(self.gamma(n)?.sqrt().recip())
    }

    /// `β(n)` of the `H²(β)` convention; `γ(n) = 1/β(n)²`.
    pub fn beta(&self, n: usize) -> Result<T> {
        self.monomial_norm(n)
    }

    /// What is known about `Σ γ(n)` (finite iff the kernel is bounded on the
    /// diagonal).
    pub fn diagonal_sum(&self) -> DiagonalSum<T> {
        match self.origin {
            Origin::Hardy
            | Origin::Bergman { .. }
            | Origin::HGamma { .. }
            | Origin::DirichletClassical => DiagonalSum::Divergent,
            // 1 + 1 + Σ_{n≥2} (1/(n-1) - 1/n) telescopes to 3.
            Origin::BoundedLog => DiagonalSum::Bounded(lit(3.0)),
            Origin::Explicit => DiagonalSum::Unknown,
        }
    }

    /// Upper bound for `Σ_{m≥n} γ(m) rᵐ` when the origin supplies a
    /// dominating closed form; `None` means truncation-only.
    pub fn tail_bound(&self, n: usize, r: T) -> Option<T> {
        if !(r >= T::zero()) || r >= T::one() {
            return None;
        }
        let head = self.gamma(n).ok()? * r.powi(i32::try_from(n).ok()?);
        let q = if self.origin.non_increasing() {
            r
        } else {
            let s = self.origin.recurrence_parameter()?;
            let ratio = (from_usize::<T>(n) + s) / from_usize(n + 1);
            r * ratio.max(T::one())
        };
        if q >= T::one() {
            return None;
        }
        Some(head / (T::one() - q))
    }
}

/// Knowledge about `Σ γ(n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagonalSum<T> {
    Bounded(T),
    Divergent,
    Unknown,
}

/// Which branch of the co-isometry characterization a space falls in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpaceClass<T> {
    HGamma(T),
    BoundedDiagonal,
    UnboundedOther,
    Undetermined,
}

impl<T: Real> SpaceClass<T> {
    pub fn is_hgamma(&self) -> bool {
        matches!(self, SpaceClass::HGamma(_))
    }
}

impl<T: Real> fmt::Display for SpaceClass<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceClass::HGamma(g) => write!(f, "HGamma({g:?})"),
            SpaceClass::BoundedDiagonal => f.write_str("BoundedDiagonal"),
            SpaceClass::UnboundedOther => f.write_str("UnboundedOther"),
            SpaceClass::Undetermined => f.write_str("Undetermined"),
        }
    }
}

/// First index where the H_γ recurrence fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceViolation<T> {
    pub n: usize,
    /// `|(n+1)γ(n+1) - (n+γ(1))γ(n)| / ((n+1)γ(n+1))`.
    pub rel_gap: T,
}

/// Checks `(n+1)γ(n+1) = (n+γ(1))γ(n)` for `1 ≤ n ≤ n_check`.
///
/// Explicit lists shorter than `n_check + 2` are checked as far as they go.
/// Returns `Ok(None)` when every available step passes, and an error when
/// not even `n = 1` can be checked.
pub fn recurrence_violation<T: Real>(
    ws: &WeightSequence<T>,
    n_check: usize,
    rel_tol: T,
) -> Result<Option<RecurrenceViolation<T>>> {
    let last = if ws.has_generator() {
        n_check
    } else {
        n_check.min(ws.n_max().saturating_sub(1))
    };
    if last < 1 {
        return Err(Error::Precondition(
            "need gamma(0..=2) to test the recurrence".into(),
        ));
    }
    if last < n_check {
        log::warn!("explicit weights only allow checking the recurrence up to n = {last}");
    }
    let weights = ws.prefix(last + 2)?;
    let g1 = weights[1];
    for n in 1..=last {
        let lhs = from_usize::<T>(n + 1) * weights[n + 1];
        let rhs = (from_usize::<T>(n) + g1) * weights[n];
        let gap = (lhs - rhs).abs() / lhs;
        if !(gap <= rel_tol) {
            return Ok(Some(RecurrenceViolation { n, rel_gap: gap }));
        }
    }
    Ok(None)
}

/// Classifies a weight sequence.
///
/// The recurrence test wins; otherwise diagonal boundedness is reported only
/// when it is known in closed form. Explicit lists that fail the recurrence
/// are `Undetermined`: finitely many terms cannot decide `Σ γ(n) < ∞`.
pub fn classify<T: Real>(ws: &WeightSequence<T>, n_check: usize, rel_tol: T) -> SpaceClass<T> {
    match recurrence_violation(ws, n_check, rel_tol) {
        Ok(None) => {
            return SpaceClass::HGamma(ws.gamma1().expect("gamma(1) checked above"));
        }
        Ok(Some(_)) => {}
        Err(_) => {
            log::warn!("weight sequence too short to test the H_gamma recurrence");
        }
    }
    match ws.diagonal_sum() {
        DiagonalSum::Bounded(_) => SpaceClass::BoundedDiagonal,
        DiagonalSum::Divergent => SpaceClass::UnboundedOther,
        DiagonalSum::Unknown => {
            log::warn!(
                "diagonal boundedness of an explicit weight list is not decidable from finitely many terms"
            );
            SpaceClass::Undetermined
        }
    }
}

/// [`classify`] with the default check depth and tolerance.
pub fn classify_default<T: Real>(ws: &WeightSequence<T>) -> SpaceClass<T> {
    classify(ws, DEFAULT_N_CHECK, lit(DEFAULT_REL_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    /// `Γ(n+g)/(Γ(g) n!)` through log-Gamma; independent of the recurrence.
    fn log_gamma_oracle(g: f64, n: usize) -> f64 {
        (ln_gamma(n as f64 + g) - ln_gamma(g) - ln_gamma(n as f64 + 1.0)).exp()
    }

    #[test]
    fn recurrence_special_cases() {
        let hardy = gamma_from_recurrence(1.0, 20).unwrap();
        assert!(hardy.values().iter().all(|&v| v == 1.0));
        let bergman = gamma_from_recurrence(2.0, 20).unwrap();
        for (n, v) in bergman.values().iter().enumerate() {
            assert_eq!(*v, (n + 1) as f64);
        }
        let half = gamma_from_recurrence(0.5f64, 3).unwrap();
        assert!((half.gamma(2).unwrap() - 0.375).abs() < 1e-15);
        assert!((half.gamma(3).unwrap() - 0.3125).abs() < 1e-15);
        assert!((log_gamma_oracle(0.5, 2) - 0.375).abs() < 1e-13);
        assert!((log_gamma_oracle(0.5, 3) - 0.3125).abs() < 1e-13);
    }

    #[test]
    fn recurrence_matches_log_gamma() {
        for &g in &[0.25, 0.5, 1.0, 2.0, 3.7, 11.0] {
            let ws = gamma_from_recurrence(g, 60).unwrap();
            for n in 0..=60 {
                let oracle = log_gamma_oracle(g, n);
                let rel = (ws.gamma(n).unwrap() - oracle).abs() / oracle;
                assert!(rel < 1e-12, "g={g} n={n} rel={rel}");
            }
        }
    }

    #[test]
    fn rejects_non_positive_gamma() {
        assert!(matches!(gamma_from_recurrence(0.0, 5), Err(Error::Domain(_))));
        assert!(matches!(gamma_from_recurrence(-1.0, 5), Err(Error::Domain(_))));
        assert!(gamma_from_recurrence(f64::NAN, 5).is_err());
    }

    #[test]
    fn named_spaces() {
        let d = WeightSequence::<f64>::dirichlet_classical(5);
        assert_eq!(d.gamma(3).unwrap(), 0.25);
        let b = WeightSequence::<f64>::bounded_log(5);
        assert_eq!(b.values()[..2], [1.0, 1.0]);
        assert_eq!(b.gamma(2).unwrap(), 0.5);
        assert!((b.gamma(3).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        let berg = WeightSequence::bergman(0.0, 4).unwrap();
        assert_eq!(berg.gamma1().unwrap(), 2.0);
        assert_eq!(berg.monomial_norm(3).unwrap(), 0.5);
        assert!(WeightSequence::bergman(-1.0, 4).is_err());
        assert!(WeightSequence::<f64>::hardy(3).values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn explicit_validation() {
        assert!(WeightSequence::explicit(vec![1.0, 2.0, 3.0]).is_ok());
        assert!(matches!(
            WeightSequence::explicit(vec![2.0, 2.0]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(WeightSequence::explicit(vec![1.0, 0.0]).is_err());
        assert!(WeightSequence::explicit(vec![1.0, -2.0]).is_err());
        assert!(WeightSequence::<f64>::explicit(vec![]).is_err());
    }

    #[test]
    fn generator_past_range() {
        let h = gamma_from_recurrence(2.0, 3).unwrap();
        assert_eq!(h.gamma(10).unwrap(), 11.0);
        let e = WeightSequence::explicit(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            e.gamma(2),
            Err(Error::IndexOutOfRange { index: 2, n_max: 1 })
        ));
        assert!(e.monomial_norm(5).is_err());
        let mut d = WeightSequence::<f64>::dirichlet_classical(2);
        d.extend_to(9).unwrap();
        assert_eq!(d.n_max(), 9);
        assert_eq!(d.gamma(9).unwrap(), 0.1);
    }

    #[test]
    fn norms_and_beta() {
        let h = WeightSequence::<f64>::hardy(10);
        assert_eq!(h.monomial_norm(7).unwrap(), 1.0);
        for ws in [
            WeightSequence::<f64>::dirichlet_classical(4),
            WeightSequence::hgamma(0.3, 4).unwrap(),
        ] {
            assert_eq!(ws.monomial_norm(0).unwrap(), 1.0);
            for n in 0..=4 {
                let norm = ws.monomial_norm(n).unwrap();
                assert_eq!(norm, ws.beta(n).unwrap());
                assert!((ws.gamma(n).unwrap() * norm * norm - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn classification_examples() {
        let hardy = WeightSequence::<f64>::hardy(60);
        assert_eq!(classify(&hardy, 50, 1e-10), SpaceClass::HGamma(1.0));
        let bl = WeightSequence::<f64>::bounded_log(60);
        assert_eq!(classify_default(&bl), SpaceClass::BoundedDiagonal);
        let d = WeightSequence::<f64>::dirichlet_classical(60);
        assert_eq!(classify_default(&d), SpaceClass::UnboundedOther);
        let v = recurrence_violation(&d, 50, 1e-10).unwrap().unwrap();
        assert_eq!(v.n, 1);
        assert!((v.rel_gap - 0.125).abs() < 1e-15);
        for &g in &[0.25, 0.5, 1.0, 2.0, 3.7] {
            let ws = gamma_from_recurrence(g, 70).unwrap();
            assert_eq!(classify_default(&ws), SpaceClass::HGamma(g));
        }
    }

    #[test]
    fn explicit_lists_classify() {
        // H_2 weights given with 15 significant digits still pass
        let vals: Vec<f64> = (0..30).map(|n| (n + 1) as f64 * (1.0 + 1e-15)).collect();
        let mut vals = vals;
        vals[0] = 1.0;
        let ws = WeightSequence::explicit(vals).unwrap();
        assert!(classify(&ws, 50, 1e-10).is_hgamma());
        let odd = WeightSequence::explicit(vec![1.0, 1.0, 0.1, 0.01, 0.001]).unwrap();
        assert_eq!(classify_default(&odd), SpaceClass::Undetermined);
        let short = WeightSequence::explicit(vec![1.0, 1.0]).unwrap();
        assert_eq!(classify_default(&short), SpaceClass::Undetermined);
    }

    #[test]
    fn hgamma_excludes_bounded_diagonal() {
        for &g in &[0.1, 1.0, 5.0] {
            let ws = gamma_from_recurrence(g, 10).unwrap();
            assert_eq!(ws.diagonal_sum(), DiagonalSum::Divergent);
        }
        // telescoping oracle for the bounded example
        let bl = WeightSequence::<f64>::bounded_log(200_000);
        let partial: f64 = bl.values().iter().sum();
        assert!((partial - 3.0).abs() < 1e-5);
        assert_eq!(bl.diagonal_sum(), DiagonalSum::Bounded(3.0));
    }

    #[test]
    fn tail_bounds_dominate() {
        let r: f64 = 0.6;
        for ws in [
            WeightSequence::<f64>::hardy(400),
            WeightSequence::dirichlet_classical(400),
            WeightSequence::bounded_log(400),
            WeightSequence::hgamma(0.5, 400).unwrap(),
            WeightSequence::hgamma(3.0, 400).unwrap(),
        ] {
            for n in [2usize, 10, 40] {
                let actual: f64 = (n..=400).map(|m| ws.gamma(m).unwrap() * r.powi(m as i32)).sum();
                let Some(bound) = ws.tail_bound(n, r) else {
                    // the ratio bound only kicks in once (n+γ)/(n+1) · r < 1
                    assert!(n < 10, "{:?} n={n}", ws.origin());
                    continue;
                };
                assert!(actual <= bound * (1.0 + 1e-12), "{:?} n={n}", ws.origin());
            }
        }
        let e = WeightSequence::explicit(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(e.tail_bound(1, 0.5), None);
        assert_eq!(WeightSequence::<f64>::hardy(3).tail_bound(1, 1.0), None);
    }

    #[test]
    fn works_in_f32() {
        let ws = gamma_from_recurrence(2.0f32, 10).unwrap();
        assert_eq!(ws.gamma(4).unwrap(), 5.0f32);
        assert_eq!(classify(&ws, 8, 1e-5), SpaceClass::HGamma(2.0f32));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn recurrence_vs_log_gamma(g in 0.05f64..8.0, n in 0usize..=60) {
                let ws = gamma_from_recurrence(g, 60).unwrap();
                let oracle = log_gamma_oracle(g, n);
                prop_assert!((ws.gamma(n).unwrap() - oracle).abs() <= 1e-12 * oracle);
            }

            #[test]
            fn classify_stable_under_deeper_checks(g in 0.05f64..8.0, n1 in 2usize..40, extra in 0usize..200) {
                let ws = gamma_from_recurrence(g, 10).unwrap();
                prop_assert_eq!(classify(&ws, n1, 1e-10), SpaceClass::HGamma(g));
                prop_assert_eq!(classify(&ws, n1 + extra, 1e-10), SpaceClass::HGamma(g));
            }
        }
    }
}
