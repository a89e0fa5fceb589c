//! The co-isometry dichotomy as a decision procedure, reconciled with
//! numerical defect measurements.
//!
//! On an H_γ space a co-isometric WCO is unitary, with `φ` an automorphism
//! and `|F| = |φ'|^{γ/2}`. On every other space only rotations with a
//! unimodular constant weight survive. The boundedness of `W_{F,φ}` is a
//! standing hypothesis and is never verified here.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::moebius::Automorphism;
use crate::operator::{
    adjoint_kernel_defect_on, block_defects, build_matrix_with, default_grid, default_pairs,
    functional_identity_defect, modulus_identity_defect, BuildOptions, SelfMap, Weight, WcoSymbols,
    DEFAULT_K, DEFAULT_MAX_DIM, DEFAULT_N, DEFAULT_TOL,
};
use crate::report::{
    space_section, symbols_section, Agreement, Defects, Doubling, Rationale, Report, Tolerances,
    REPORT_VERSION,
};
use crate::scalar::{cplx, from_usize, lit, to_f64, Complex, Real};
use crate::series::TruncatedSeries;
use crate::weights::{classify, SpaceClass, WeightSequence, DEFAULT_N_CHECK, DEFAULT_REL_TOL};

/// Default tolerance for recognizing automorphisms, rotations and constant
/// unimodular weights.
pub const DEFAULT_MATCH_TOL: f64 = 1e-9;
/// A numerical failure needs the co-isometry defect above this multiple of
/// the tolerance at both truncations.
pub const FAIL_FACTOR: f64 = 10.0;
/// Number of weight-series coefficients inspected when testing whether `F`
/// is constant.
const CONSTANCY_TERMS: usize = 64;
/// Terms kept in the sums of [`eq38_identity_defect`].
pub const EQ38_TERMS: usize = 400;

/// Defects below this floor count as shrinking under doubling: once the
/// truncation error is at rounding level, the doubled matrix cannot do better.
pub fn noise_floor<T: Real>() -> T {
    T::epsilon() * lit(512.0)
}

/// What the theory predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Theoretical {
    UnitaryExpected,
    NotCoisometricExpected,
    Indeterminate,
}

/// What the truncated matrices show.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Numerical {
    PassUnitary,
    FailCoisometry,
    Inconclusive,
}

impl fmt::Display for Theoretical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Numerical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `true` iff the prediction and the measurement match; `n/a` for an
/// indeterminate prediction.
pub fn agreement(theoretical: Theoretical, numerical: Numerical) -> Agreement {
    match theoretical {
        Theoretical::Indeterminate => Agreement::NotApplicable,
        Theoretical::UnitaryExpected => Agreement::from_bool(numerical == Numerical::PassUnitary),
        Theoretical::NotCoisometricExpected => {
            Agreement::from_bool(numerical == Numerical::FailCoisometry)
        }
    }
}

/// Shape of `φ` as far as the verdict is concerned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapShape<T> {
    Automorphism(Automorphism<T>),
    NotAutomorphism,
    /// Too few coefficients to tell.
    Unrecognized,
}

/// Recovers `(λ, a)` from `φ(0) = λa` and `φ'(0) = λ(|a|² - 1)`, then compares
/// the candidate's Taylor coefficients against the given series.
///
/// Exact polynomials are compared against enough terms of the candidate to
/// see its geometric tail; a truncated series needs at least three
/// coefficients.
pub fn recognize_automorphism<T: Real>(phi: &TruncatedSeries<T>, match_tol: T) -> MapShape<T> {
    if !phi.is_exact() && phi.len() < 3 {
        return MapShape::Unrecognized;
    }
    let zero = Complex::new(T::zero(), T::zero());
    let c0 = phi.coeff(0).unwrap_or(zero);
    let c1 = phi.coeff(1).unwrap_or(zero);
    let slope = c1.norm();
    if slope == T::zero() {
        return MapShape::NotAutomorphism;
    }
    let lambda = -c1 / slope;
    let a = c0 / lambda;
    let Ok(candidate) = Automorphism::new(lambda, a) else {
        return MapShape::NotAutomorphism;
    };
    let len = if phi.is_exact() {
        phi.len().max(CONSTANCY_TERMS)
    } else {
        phi.len()
    };
    let expected = candidate.taylor(len);
    let matches = (0..len).all(|j| {
        let got = phi.coeff(j).unwrap_or(zero);
        (got - expected.coeffs()[j]).norm() <= match_tol
    });
    if matches {
        MapShape::Automorphism(candidate)
    } else {
        MapShape::NotAutomorphism
    }
}

pub fn map_shape<T: Real>(map: &SelfMap<T>, match_tol: T) -> MapShape<T> {
    match map {
        SelfMap::Automorphism(aut) => MapShape::Automorphism(*aut),
        SelfMap::Series(s) => recognize_automorphism(s, match_tol),
    }
}

/// `F` is constant with `||F| - 1| < match_tol`.
pub fn is_unimodular_constant<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    match_tol: T,
) -> Result<bool> {
    let f = symbols.weight_series(ws, CONSTANCY_TERMS)?;
    let constant = f.coeffs().iter().skip(1).all(|c| c.norm() < match_tol);
    let f0 = f.coeffs()[0];
    Ok(constant && (f0.norm() - T::one()).abs() < match_tol)
}

/// Options shared by the theoretical and numerical verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions<T> {
    pub n: usize,
    pub k: usize,
    pub tol: T,
    pub match_tol: T,
    /// Point at which the adjoint-kernel identity is probed.
    pub adjoint_w: Complex<T>,
    pub classify_n_check: usize,
    pub classify_rel_tol: T,
    pub max_dim: usize,
}

impl<T: Real> Default for VerdictOptions<T> {
    fn default() -> Self {
        Self {
            n: DEFAULT_N,
            k: DEFAULT_K,
            tol: lit(DEFAULT_TOL),
            match_tol: lit(DEFAULT_MATCH_TOL),
            adjoint_w: cplx(lit(0.3), T::zero()),
            classify_n_check: DEFAULT_N_CHECK,
            classify_rel_tol: lit(DEFAULT_REL_TOL),
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Largest `||F(z)| - |φ'(z)|^{γ/2}|` over the default grid.
pub fn modulus_match_gap<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    aut: &Automorphism<T>,
    gamma: T,
    n: usize,
) -> Result<T> {
    let mut worst = T::zero();
    for z in default_grid::<T>() {
        let f = symbols.weight_at(ws, z, n)?.norm();
        let target = aut.derivative_at(z)?.norm().powf(gamma / lit(2.0));
        worst = worst.max((f - target).abs());
    }
    Ok(worst)
}

/// The prediction for `W_{F,φ}` on a space of the given class.
pub fn theoretical_verdict<T: Real>(
    class: &SpaceClass<T>,
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    opts: &VerdictOptions<T>,
) -> Result<Theoretical> {
    let shape = map_shape(&symbols.map, opts.match_tol);
    let aut = match (class, shape) {
        (SpaceClass::Undetermined, _) | (_, MapShape::Unrecognized) => {
            return Ok(Theoretical::Indeterminate)
        }
        (_, MapShape::NotAutomorphism) => return Ok(Theoretical::NotCoisometricExpected),
        (_, MapShape::Automorphism(aut)) => aut,
    };
    let unitary = match *class {
        SpaceClass::HGamma(gamma) => {
            modulus_match_gap(ws, symbols, &aut, gamma, opts.n)? < opts.match_tol
        }
        SpaceClass::BoundedDiagonal | SpaceClass::UnboundedOther => {
            aut.a().norm() < opts.match_tol && is_unimodular_constant(ws, symbols, opts.match_tol)?
        }
        SpaceClass::Undetermined => unreachable!("handled above"),
    };
    Ok(if unitary {
        Theoretical::UnitaryExpected
    } else {
        Theoretical::NotCoisometricExpected
    })
}

/// Block defects at `N` and `2N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingDefects<T> {
    pub n: usize,
    pub k: usize,
    pub isometry: T,
    pub coisometry: T,
    pub isometry_doubled: T,
    pub coisometry_doubled: T,
}

impl<T: Real> DoublingDefects<T> {
    pub fn measure(ws: &WeightSequence<T>, symbols: &WcoSymbols<T>, n: usize, k: usize, max_dim: usize) -> Result<Self> {
        let opts = BuildOptions { max_dim };
        let small = block_defects(&build_matrix_with(ws, symbols, n, &opts)?, k);
        let large = block_defects(&build_matrix_with(ws, symbols, 2 * n, &opts)?, k);
        Ok(Self {
            n,
            k,
            isometry: small.isometry,
            coisometry: small.coisometry,
            isometry_doubled: large.isometry,
            coisometry_doubled: large.coisometry,
        })
    }

    pub fn classify(&self, tol: T) -> Numerical {
        let floor = noise_floor::<T>();
        let shrinks = |d: T, d2: T| d2 <= d.max(floor);
        let pass = self.isometry < tol
            && self.coisometry < tol
            && shrinks(self.isometry, self.isometry_doubled)
            && shrinks(self.coisometry, self.coisometry_doubled);
        let fail_level = tol * lit(FAIL_FACTOR);
        if pass {
            Numerical::PassUnitary
        } else if self.coisometry > fail_level && self.coisometry_doubled > fail_level {
            Numerical::FailCoisometry
        } else {
            Numerical::Inconclusive
        }
    }
}

/// What the truncated matrices at `N` and `2N` show.
pub fn numerical_verdict<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    n: usize,
    k: usize,
    tol: T,
) -> Result<Numerical> {
    Ok(DoublingDefects::measure(ws, symbols, n, k, DEFAULT_MAX_DIM)?.classify(tol))
}

/// Max over `x` of the relative gap between
/// `Σ_{n≥1} γ(n)(n+γ(1)) x^{2n}` and `Σ_{n≥1} (n+1)γ(n+1) x^{2n}`.
///
/// The `n = 0` terms agree for every sequence and are left out. At `x = 0`
/// the gap is the limit, i.e. the relative gap of the `n = 1` coefficients.
/// Explicit lists are summed only as far as they reach.
pub fn eq38_identity_defect<T: Real>(ws: &WeightSequence<T>, x_grid: &[T]) -> Result<T> {
    let cap: T = lit(0.8);
    if let Some(x) = x_grid.iter().find(|x| !(**x >= T::zero() && **x <= cap)) {
        return Err(Error::Domain(format!("x = {x} must lie in [0, 0.8]")));
    }
    let len = if ws.has_generator() {
        EQ38_TERMS + 1
    } else {
        ws.n_max().min(EQ38_TERMS + 1)
    };
    if len < 3 {
        return Err(Error::Precondition("need gamma(0..=2)".into()));
    }
    let g = ws.prefix(len)?;
    let g1 = g[1];
    let lhs_coeff = |n: usize| g[n] * (from_usize::<T>(n) + g1);
    let rhs_coeff = |n: usize| from_usize::<T>(n + 1) * g[n + 1];
    let mut worst = T::zero();
    for &x in x_grid {
        let gap = if x == T::zero() {
            (lhs_coeff(1) - rhs_coeff(1)).abs() / rhs_coeff(1)
        } else {
            let x2 = x * x;
            let (mut lhs, mut rhs, mut p) = (T::zero(), T::zero(), x2);
            for n in 1..len - 1 {
                lhs = lhs + lhs_coeff(n) * p;
                rhs = rhs + rhs_coeff(n) * p;
                p = p * x2;
            }
            (lhs - rhs).abs() / rhs
        };
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// Theoretical and numerical outcome together with the reasons behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub theoretical: Theoretical,
    pub numerical: Numerical,
    pub agreement: Agreement,
    pub rationale: Rationale,
}

/// Free-text labels attached to a report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportLabels {
    pub space: Option<String>,
    pub phi: Option<String>,
    pub f: Option<String>,
}

fn describe_map<T: Real>(shape: &MapShape<T>, map: &SelfMap<T>, match_tol: T) -> String {
    let given = matches!(map, SelfMap::Automorphism(_));
    match shape {
        MapShape::Automorphism(aut) if aut.a().norm() < match_tol => {
            if given { "rotation" } else { "series recognized as rotation" }.to_string()
        }
        MapShape::Automorphism(aut) => format!(
            "{} {aut}",
            if given { "automorphism" } else { "series recognized as automorphism" }
        ),
        MapShape::NotAutomorphism => "series, not an automorphism".into(),
        MapShape::Unrecognized => "series too short to recognize".into(),
    }
}

fn describe_weight<T: Real>(weight: &Weight<T>) -> String {
    match weight {
        Weight::Constant(c) => format!("constant {c}"),
        Weight::Series(s) => format!("series with {} coefficients", s.len()),
        Weight::Canonical { gamma, .. } => format!("canonical unitary weight, gamma = {gamma}"),
        Weight::Forced { .. } => "forced weight 1/(conj(F(0)) K_phi(0)(phi(z)))".into(),
    }
}

fn optional<T: Real>(r: Result<T>, errors: &mut Vec<String>, what: &str) -> Option<f64> {
    match r {
        Ok(v) => Some(to_f64(v)),
        Err(e) => {
            errors.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Runs both verdicts and every identity defect. Failures of individual
/// measurements are recorded in the report and make the numerical verdict
/// `Inconclusive`; this function never fails.
pub fn dichotomy_report<T: Real>(
    ws: &WeightSequence<T>,
    symbols: &WcoSymbols<T>,
    opts: &VerdictOptions<T>,
    labels: &ReportLabels,
) -> (Report, Verdict) {
    let mut errors = Vec::new();
    let class = classify(ws, opts.classify_n_check, opts.classify_rel_tol);

    let theoretical = theoretical_verdict(&class, ws, symbols, opts).unwrap_or_else(|e| {
        errors.push(format!("theoretical verdict: {e}"));
        Theoretical::Indeterminate
    });

    let build = BuildOptions { max_dim: opts.max_dim };
    let matrix = build_matrix_with(ws, symbols, opts.n, &build);
    let (isometry, coisometry, adjoint) = match &matrix {
        Ok(a) => {
            let d = block_defects(a, opts.k);
            let adj = adjoint_kernel_defect_on(a, ws, symbols, opts.adjoint_w, opts.k);
            (
                Some(to_f64(d.isometry)),
                Some(to_f64(d.coisometry)),
                optional(adj, &mut errors, "adjoint kernel defect"),
            )
        }
        Err(e) => {
            errors.push(format!("matrix at N = {}: {e}", opts.n));
            (None, None, None)
        }
    };
    let functional = optional(
        functional_identity_defect(ws, symbols, &default_pairs(), opts.n),
        &mut errors,
        "functional identity defect",
    );
    let modulus = optional(
        modulus_identity_defect(ws, symbols, &default_grid(), opts.n),
        &mut errors,
        "modulus identity defect",
    );

    let doubled_n = 2 * opts.n;
    let doubled = build_matrix_with(ws, symbols, doubled_n, &build).map(|a| block_defects(&a, opts.k));
    let (numerical, doubling) = match (&matrix, doubled) {
        (Ok(_), Ok(large)) => {
            let dd = DoublingDefects {
                n: opts.n,
                k: opts.k,
                isometry: lit::<T>(isometry.expect("matrix built")),
                coisometry: lit::<T>(coisometry.expect("matrix built")),
                isometry_doubled: large.isometry,
                coisometry_doubled: large.coisometry,
            };
            (
                dd.classify(opts.tol),
                Doubling {
                    n: doubled_n,
                    isometry: Some(to_f64(large.isometry)),
                    coisometry: Some(to_f64(large.coisometry)),
                },
            )
        }
        (_, doubled) => {
            if let Err(e) = doubled {
                errors.push(format!("matrix at N = {doubled_n}: {e}"));
            }
            (
                Numerical::Inconclusive,
                Doubling {
                    n: doubled_n,
                    isometry: None,
                    coisometry: None,
                },
            )
        }
    };

    let agreement = agreement(theoretical, numerical);
    let shape = map_shape(&symbols.map, opts.match_tol);
    let rationale = Rationale {
        space_class: class.to_string(),
        map_shape: describe_map(&shape, &symbols.map, opts.match_tol),
        weight_shape: describe_weight(&symbols.weight),
    };
    let grid_points = default_grid::<T>().len();
    let report = Report {
        version: REPORT_VERSION,
        space: space_section(ws, &class, labels.space.clone()),
        symbols: symbols_section(symbols, labels.phi.clone(), labels.f.clone()),
        n: opts.n,
        k: opts.k,
        defects: Defects {
            isometry,
            coisometry,
            adjoint_kernel: adjoint,
            functional_identity: functional,
            modulus_identity: modulus,
        },
        doubling,
        theoretical: theoretical.to_string(),
        numerical: numerical.to_string(),
        agreement,
        tolerances: Tolerances {
            defect: to_f64(opts.tol),
            fail_factor: FAIL_FACTOR,
            noise_floor: to_f64(noise_floor::<T>()),
            match_tol: to_f64(opts.match_tol),
            classify_rel_tol: to_f64(opts.classify_rel_tol),
            classify_n_check: opts.classify_n_check,
            adjoint_w: [to_f64(opts.adjoint_w.re), to_f64(opts.adjoint_w.im)],
            grid_points,
            grid_pairs: grid_points * grid_points,
        },
        rationale: rationale.clone(),
        assumptions: vec![
            "boundedness of W_{F,phi} on the space is assumed, not verified".into(),
            format!(
                "defects are Frobenius norms of the leading {k}x{k} block of the N = {n} truncation",
                k = opts.k,
                n = opts.n
            ),
        ],
        errors,
    };
    let verdict = Verdict {
        theoretical,
        numerical,
        agreement,
        rationale,
    };
    (report, verdict)
}
