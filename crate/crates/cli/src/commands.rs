use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use wcolab::literal::{parse_complex, parse_map, parse_space, parse_weight, resolve_symbols, SpaceLiteral};
use wcolab::moebius::{find_tau_for_target_radius, Automorphism};
use wcolab::operator::{build_matrix_with, coisometry_defect, BuildOptions, DEFAULT_MAX_DIM};
use wcolab::report::{Agreement, Report};
use wcolab::verdict::{dichotomy_report, ReportLabels, VerdictOptions};
use wcolab::weights::{
    classify, recurrence_violation, DiagonalSum, SpaceClass, WeightSequence, DEFAULT_N_CHECK,
};
use wcolab::WcoSymbols64;

use crate::{Command, SymbolArgs};

macro_rules! out {
    ($($arg:tt)*) => {
        std::io::Write::write_fmt(&mut std::io::stdout().lock(), format_args!($($arg)*))?
    };
}

macro_rules! outln {
    ($($arg:tt)*) => {
        std::io::Write::write_fmt(
            &mut std::io::stdout().lock(),
            format_args!("{}\n", format_args!($($arg)*)),
        )?
    };
}

pub const MAX_N_VAR: &str = "WCOLAB_MAX_N";
pub const SWEEP_LADDER: [usize; 4] = [64, 128, 256, 512];

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::SpaceInfo { space, n, tol, json } => space_info(&space, n, tol, json),
        Command::KernelEval { space, w, z, degree, json } => kernel_eval(&space, &w, &z, degree, json),
        Command::WcoBuild { space, symbols, n, json } => wco_build(&space, &symbols, n, json),
        Command::WcoCheck { space, symbols, n, k, tol, json, csv_sweep } => {
            wco_check(&space, &symbols, n, k, tol, json, csv_sweep.as_deref())
        }
        Command::LemmaMove { lambda, a, b, json } => lemma_move(&lambda, &a, b, json),
        Command::DemoDichotomy { n, json } => demo(n, json),
    }
}

fn max_n() -> Result<usize> {
    match std::env::var(MAX_N_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("{MAX_N_VAR}='{v}' is not a positive integer")),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

fn load_space(text: &str, n_max: usize) -> Result<(SpaceLiteral, WeightSequence<f64>)> {
    let lit = parse_space(text).with_context(|| format!("space '{text}'"))?;
    let ws = lit.materialize(n_max)?;
    Ok((lit, ws))
}

fn default_class(ws: &WeightSequence<f64>) -> SpaceClass<f64> {
    classify(ws, DEFAULT_N_CHECK, wcolab::weights::DEFAULT_REL_TOL)
}

fn load_symbols(class: &SpaceClass<f64>, args: &SymbolArgs) -> Result<WcoSymbols64> {
    let map = parse_map(&args.phi).with_context(|| format!("--phi '{}'", args.phi))?;
    let weight = parse_weight(&args.f).with_context(|| format!("--f '{}'", args.f))?;
    Ok(resolve_symbols(class, &weight, &map)?)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn fmt_complex(z: Complex64) -> String {
    format!("{:+.12e}{:+.12e}i", z.re, z.im)
}

#[derive(Serialize)]
struct Violation {
    n: usize,
    rel_gap: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum DiagonalJson {
    Bounded(f64),
    Label(&'static str),
}

#[derive(Serialize)]
struct SpaceInfo {
    space: String,
    comment: Option<String>,
    class: String,
    gamma1: f64,
    diagonal_sum: DiagonalJson,
    recurrence_checked_to: usize,
    recurrence_violation: Option<Violation>,
    gamma: Vec<f64>,
    beta: Vec<f64>,
}

fn space_info(text: &str, n: usize, tol: f64, json: bool) -> Result<ExitCode> {
    ensure!(tol > 0.0 && tol.is_finite(), "--tol must be a positive number");
    let (lit, ws) = load_space(text, n.max(DEFAULT_N_CHECK + 2))?;
    let class = classify(&ws, DEFAULT_N_CHECK, tol);
    let violation = recurrence_violation(&ws, DEFAULT_N_CHECK, tol).ok().flatten();
    let shown = if ws.has_generator() { n } else { n.min(ws.n_max() + 1) };
    let gamma: Vec<f64> = (0..shown).map(|j| ws.gamma(j)).collect::<Result<_, _>>()?;
    let beta: Vec<f64> = gamma.iter().map(|g| g.sqrt().recip()).collect();
    let info = SpaceInfo {
        space: lit.text.clone(),
        comment: lit.comment.clone(),
        class: class.to_string(),
        gamma1: ws.gamma1()?,
        diagonal_sum: match ws.diagonal_sum() {
            DiagonalSum::Bounded(s) => DiagonalJson::Bounded(s),
            DiagonalSum::Divergent => DiagonalJson::Label("divergent"),
            DiagonalSum::Unknown => DiagonalJson::Label("unknown"),
        },
        recurrence_checked_to: if ws.has_generator() {
            DEFAULT_N_CHECK
        } else {
            DEFAULT_N_CHECK.min(ws.n_max().saturating_sub(1))
        },
        recurrence_violation: violation.map(|v| Violation { n: v.n, rel_gap: v.rel_gap }),
        gamma,
        beta,
    };
    if json {
        print_json(&info)?;
        return Ok(ExitCode::SUCCESS);
    }
    let mut out = String::new();
    writeln!(out, "space       {}", info.space)?;
    if let Some(c) = &info.comment {
        writeln!(out, "comment     {c}")?;
    }
    writeln!(out, "class       {}", info.class)?;
    writeln!(out, "gamma(1)    {}", info.gamma1)?;
    match info.diagonal_sum {
        DiagonalJson::Bounded(s) => writeln!(out, "sum gamma   {s:.1}")?,
        DiagonalJson::Label(l) => writeln!(out, "sum gamma   {l}")?,
    }
    match &info.recurrence_violation {
        None => writeln!(out, "recurrence  holds for 1 <= n <= {}", info.recurrence_checked_to)?,
        Some(v) => writeln!(out, "recurrence  first violation at n = {} (relative gap {:.6e})", v.n, v.rel_gap)?,
    }
    writeln!(out, "{:>5}  {:>22}  {:>22}", "n", "gamma(n)", "beta(n)")?;
    for (j, (g, b)) in info.gamma.iter().zip(&info.beta).enumerate() {
        writeln!(out, "{j:>5}  {g:>22.15e}  {b:>22.15e}")?;
    }
    out!("{out}");
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct KernelEval {
    space: String,
    w: [f64; 2],
    z: [f64; 2],
    degree: usize,
    value: [f64; 2],
    /// Bound on the dropped terms, or "truncation-only".
    tail: serde_json::Value,
}

fn kernel_eval(text: &str, w: &str, z: &str, degree: usize, json: bool) -> Result<ExitCode> {
    let w = parse_complex(w).context("--w")?;
    let z = parse_complex(z).context("--z")?;
    ensure!(w.norm() < 1.0 && z.norm() < 1.0, "--w and --z must lie in the open unit disk");
    ensure!(degree > 0, "--degree must be positive");
    let (lit, ws) = load_space(text, degree)?;
    let kv = wcolab::kernel::kernel_value(&ws, w, z, degree)?;
    let tail = kv.tail.map_or_else(|| "truncation-only".into(), serde_json::Value::from);
    let result = KernelEval {
        space: lit.text,
        w: pair(w),
        z: pair(z),
        degree,
        value: pair(kv.value),
        tail,
    };
    if json {
        print_json(&result)?;
    } else {
        outln!("K_w(z)  {}", fmt_complex(kv.value));
        match kv.tail {
            Some(t) => outln!("tail    <= {t:.3e}"),
            None => outln!("tail    truncation-only"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct MatrixJson {
    #[serde(rename = "N")]
    n: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn wco_build(text: &str, args: &SymbolArgs, n: usize, json: bool) -> Result<ExitCode> {
    ensure!(n > 0, "--N must be positive");
    let cap = max_n()?;
    let (_, ws) = load_space(text, n)?;
    let symbols = load_symbols(&default_class(&ws), args)?;
    let a = build_matrix_with(&ws, &symbols, n, &BuildOptions { max_dim: cap })?;
    if json {
        let rows = (0..n).map(|r| a.row(r));
        print_json(&MatrixJson {
            n,
            re: rows.clone().map(|r| r.iter().map(|z| z.re).collect()).collect(),
            im: rows.map(|r| r.iter().map(|z| z.im).collect()).collect(),
        })?;
    } else {
        for r in 0..n {
            let cells: Vec<String> = a.row(r).iter().map(|z| format!("{:+.4e}{:+.4e}i", z.re, z.im)).collect();
            outln!("{}", cells.join("  "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep_csv(ws: &WeightSequence<f64>, symbols: &WcoSymbols64, k: usize, cap: usize) -> Result<String> {
    let ladder: Vec<usize> = SWEEP_LADDER.iter().copied().filter(|&n| n <= cap).collect();
    if ladder.is_empty() {
        bail!("{MAX_N_VAR} = {cap} is below every sweep size {SWEEP_LADDER:?}");
    }
    let mut out = String::from("N,defect\n");
    for n in ladder {
        let a = build_matrix_with(ws, symbols, n, &BuildOptions { max_dim: cap })?;
        writeln!(out, "{n},{:e}", coisometry_defect(&a, k.min(n)))?;
    }
    Ok(out)
}

fn summary(report: &Report) -> String {
    let show = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3e}"));
    let d = &report.defects;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "space        {} ({})",
        report.space.spec.as_deref().unwrap_or("-"),
        report.space.class
    );
    let _ = writeln!(out, "phi          {}", report.rationale.map_shape);
    let _ = writeln!(out, "F            {}", report.rationale.weight_shape);
    let _ = writeln!(out, "N, k         {}, {}", report.n, report.k);
    let _ = writeln!(
        out,
        "isometry     {}  (N = {}: {})",
        show(d.isometry),
        report.doubling.n,
        show(report.doubling.isometry)
    );
    let _ = writeln!(
        out,
        "coisometry   {}  (N = {}: {})",
        show(d.coisometry),
        report.doubling.n,
        show(report.doubling.coisometry)
    );
    let _ = writeln!(out, "adjoint      {}", show(d.adjoint_kernel));
    let _ = writeln!(out, "functional   {}", show(d.functional_identity));
    let _ = writeln!(out, "modulus      {}", show(d.modulus_identity));
    let _ = writeln!(out, "theoretical  {}", report.theoretical);
    let _ = writeln!(out, "numerical    {}", report.numerical);
    let agreement = match report.agreement.as_bool() {
        Some(b) => b.to_string(),
        None => "n/a".into(),
    };
    let _ = writeln!(out, "agreement    {agreement}");
    out
}

fn check_one(
    text: &str,
    args: &SymbolArgs,
    n: usize,
    k: usize,
    tol: f64,
    cap: usize,
) -> Result<(Report, WeightSequence<f64>, WcoSymbols64)> {
    let (lit, ws) = load_space(text, 2 * n)?;
    let symbols = load_symbols(&default_class(&ws), args)?;
    let opts = VerdictOptions {
        n,
        k,
        tol,
        max_dim: cap,
        ..VerdictOptions::default()
    };
    let labels = ReportLabels {
        space: Some(lit.text),
        phi: Some(args.phi.clone()),
        f: Some(args.f.clone()),
    };
    let (report, _) = dichotomy_report(&ws, &symbols, &opts, &labels);
    Ok((report, ws, symbols))
}

fn wco_check(
    text: &str,
    args: &SymbolArgs,
    n: usize,
    k: usize,
    tol: f64,
    json: bool,
    csv: Option<&Path>,
) -> Result<ExitCode> {
    ensure!(n > 0, "--N must be positive");
    ensure!(k > 0 && k <= n, "--k must satisfy 1 <= k <= N");
    ensure!(tol > 0.0 && tol.is_finite(), "--tol must be a positive number");
    let cap = max_n()?;
    ensure!(n <= cap, "--N = {n} exceeds {MAX_N_VAR} = {cap}");
    let (report, ws, symbols) = check_one(text, args, n, k, tol, cap)?;
    if let Some(path) = csv {
        let rows = sweep_csv(&ws, &symbols, k, cap)?;
        fs::write(path, rows).with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        outln!("{}", report.to_json());
    } else {
        out!("{}", summary(&report));
    }
    if !report.errors.is_empty() {
        eprintln!("error: {}", report.errors.join("; "));
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct LemmaMove {
    lambda: [f64; 2],
    a: [f64; 2],
    b: f64,
    tau: [f64; 2],
    mu: [f64; 2],
    c: [f64; 2],
    residual: f64,
}

fn lemma_move(lambda: &str, a: &str, b: f64, json: bool) -> Result<ExitCode> {
    let lambda = parse_complex(lambda).context("--lambda")?;
    let a = parse_complex(a).context("--a")?;
    let aut = Automorphism::new(lambda, a)?;
    let tau = find_tau_for_target_radius(aut.lambda(), aut.a(), b)?;
    let psi = aut.precompose_rotation(tau);
    let square = Automorphism::compose(&psi, &psi)?;
    let out = LemmaMove {
        lambda: pair(aut.lambda()),
        a: pair(aut.a()),
        b,
        tau: pair(tau),
        mu: pair(square.lambda()),
        c: pair(square.a()),
        residual: (square.a().norm() - b).abs(),
    };
    if json {
        print_json(&out)?;
    } else {
        outln!("tau       {}", fmt_complex(tau));
        outln!("mu        {}", fmt_complex(square.lambda()));
        outln!("c         {}", fmt_complex(square.a()));
        outln!("||c|-b|   {:.3e}", out.residual);
    }
    Ok(ExitCode::SUCCESS)
}

/// Built-in scenarios: unitary pairs on H_γ spaces, forced and plain weights
/// that must fail, and rotations that must pass everywhere.
pub const DEMO_SCENARIOS: [(&str, &str, &str); 9] = [
    ("hardy", "aut:lambda=1+0i,a=0.5+0i", "auto-unitary"),
    ("hgamma:gamma=2", "aut:lambda=0+1i,a=0+0.3i", "auto-unitary"),
    ("bergman:alpha=1", "aut:lambda=1+0i,a=0.3-0.2i", "auto-unitary"),
    ("hgamma:gamma=0.5", "aut:lambda=-1+0i,a=-0.4+0i", "auto-unitary"),
    ("hardy", "aut:lambda=1+0i,a=0.5+0i", "const:1"),
    ("dirichlet", "aut:lambda=1+0i,a=0.5+0i", "forced"),
    ("bounded-log", "aut:lambda=1+0i,a=0.5+0i", "forced"),
    ("dirichlet", "rot:theta=1", "const:0+1i"),
    ("bounded-log", "rot:theta=2", "const:-1"),
];

fn demo(n: usize, json: bool) -> Result<ExitCode> {
    ensure!(n > 0, "--N must be positive");
    let cap = max_n()?;
    let mut reports = Vec::new();
    for (space, phi, f) in DEMO_SCENARIOS {
        let args = SymbolArgs { phi: phi.into(), f: f.into() };
        let (report, _, _) = check_one(space, &args, n, wcolab::operator::DEFAULT_K, wcolab::operator::DEFAULT_TOL, cap)
            .with_context(|| format!("scenario {space} / {phi} / {f}"))?;
        reports.push(report);
    }
    if json {
        print_json(&reports)?;
    } else {
        outln!("{:<18} {:<28} {:<13} {:<23} {:<15} agreement", "space", "phi", "F", "theoretical", "numerical");
        for ((space, phi, f), r) in DEMO_SCENARIOS.iter().zip(&reports) {
            let agreement = r.agreement.as_bool().map_or("n/a".to_string(), |b| b.to_string());
            outln!(
                "{space:<18} {phi:<28} {f:<13} {:<23} {:<15} {agreement}",
                r.theoretical, r.numerical
            );
        }
    }
    let failed = reports
        .iter()
        .any(|r| r.agreement == Agreement::Disagree || !r.errors.is_empty());
    if failed {
        eprintln!("error: at least one scenario disagrees with the prediction");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}
