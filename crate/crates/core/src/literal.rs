//! Text literals for spaces, complex numbers, self-maps and weights.
//!
//! ```text
//! space   hardy | bergman:alpha=<f> | hgamma:gamma=<f> | dirichlet | bounded-log | seq:<path>.json
//! complex <re>+<im>i | <re>-<im>i | <re> | <im>i
//! map     aut:lambda=<c>,a=<c> | rot:theta=<radians> | series:<path>
//! weight  auto-unitary | const:<c> | series:<path> | forced
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::moebius::Automorphism;
use crate::operator::{SelfMap, Weight, WcoSymbols};
use crate::scalar::Complex;
use crate::series::TruncatedSeries;
use crate::verdict::{map_shape, MapShape, DEFAULT_MATCH_TOL};
use crate::weights::{NamedSpace, SpaceClass, WeightSequence};

/// Contents of a `seq:` file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeqFile {
    pub gamma: Vec<f64>,
    #[serde(default)]
    pub comment: Option<String>,
}

/// A parsed space literal; `seq:` files are read eagerly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceLiteral {
    pub text: String,
    pub space: NamedSpace<f64>,
    pub comment: Option<String>,
}

impl SpaceLiteral {
    pub fn materialize(&self, n_max: usize) -> Result<WeightSequence<f64>> {
        self.space.materialize(n_max)
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: '{s}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{what}: '{s}' is not finite")));
    }
    Ok(v)
}

/// `key=value` with the expected key.
fn keyed<'a>(s: &'a str, key: &str) -> Result<&'a str> {
    s.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected '{key}=<value>', found '{s}'")))
}

pub fn parse_space(text: &str) -> Result<SpaceLiteral> {
    let (head, rest) = match text.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (text, None),
    };
    let mut comment = None;
    let space = match (head, rest) {
        ("hardy", None) => NamedSpace::Hardy,
        ("dirichlet", None) => NamedSpace::DirichletClassical,
        ("bounded-log", None) => NamedSpace::BoundedLog,
        ("bergman", Some(r)) => NamedSpace::Bergman {
            alpha: parse_f64(keyed(r, "alpha")?, "alpha")?,
        },
        ("hgamma", Some(r)) => NamedSpace::HGamma {
            gamma: parse_f64(keyed(r, "gamma")?, "gamma")?,
        },
        ("seq", Some(path)) => {
            let file = read_seq(Path::new(path))?;
            comment = file.comment;
            WeightSequence::explicit(file.gamma.clone())?;
            NamedSpace::Explicit(file.gamma)
        }
        _ => {
            return Err(Error::UnknownSpace(format!(
                "'{text}' (expected hardy, bergman:alpha=<f>, hgamma:gamma=<f>, dirichlet, bounded-log or seq:<path>.json)"
            )))
        }
    };
    Ok(SpaceLiteral {
        text: text.to_string(),
        space,
        comment,
    })
}

pub fn read_seq(path: &Path) -> Result<SeqFile> {
    let raw = fs::read_to_string(path)?;
    let file: SeqFile = serde_json::from_str(&raw)?;
    Ok(file)
}

/// Parses `<re>+<im>i`, `<re>-<im>i`, a bare real, or a bare imaginary part.
pub fn parse_complex(text: &str) -> Result<Complex<f64>> {
    let s = text.trim();
    if s.is_empty() || s.contains(char::is_whitespace) {
        return Err(Error::Parse(format!("complex literal '{text}' must be '<re>+<im>i' without spaces")));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(parse_f64(s, "complex literal")?, 0.0));
    };
    // split at the last sign that is not a leading sign or part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_f64(t, "imaginary part"),
        }
    };
    match split {
        Some(j) => Ok(Complex::new(
            parse_f64(&body[..j], "real part")?,
            imag(&body[j..])?,
        )),
        None => Ok(Complex::new(0.0, imag(body)?)),
    }
}

/// A parsed map literal.
#[derive(Debug, Clone, PartialEq)]
pub enum MapLiteral {
    Automorphism(Automorphism<f64>),
    Series { path: PathBuf, series: TruncatedSeries<f64> },
}

impl MapLiteral {
    pub fn to_map(&self) -> SelfMap<f64> {
        match self {
            MapLiteral::Automorphism(aut) => SelfMap::Automorphism(*aut),
            MapLiteral::Series { series, .. } => SelfMap::Series(series.clone()),
        }
    }
}

pub fn read_series(path: &Path) -> Result<TruncatedSeries<f64>> {
    TruncatedSeries::from_json_str(&fs::read_to_string(path)?)
}

pub fn parse_map(text: &str) -> Result<MapLiteral> {
    if let Some(rest) = text.strip_prefix("aut:") {
        let (l, a) = rest
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("expected 'aut:lambda=<c>,a=<c>', found '{text}'")))?;
        let lambda = parse_complex(keyed(l, "lambda")?)?;
        let a = parse_complex(keyed(a, "a")?)?;
        return Ok(MapLiteral::Automorphism(Automorphism::new(lambda, a)?));
    }
    if let Some(rest) = text.strip_prefix("rot:") {
        let theta = parse_f64(keyed(rest, "theta")?, "theta")?;
        return Ok(MapLiteral::Automorphism(Automorphism::rotation(theta)));
    }
    if let Some(path) = text.strip_prefix("series:") {
        let path = PathBuf::from(path);
        let series = read_series(&path)?;
        return Ok(MapLiteral::Series { path, series });
    }
    Err(Error::Parse(format!(
        "unknown map literal '{text}' (expected aut:lambda=<c>,a=<c>, rot:theta=<f> or series:<path>)"
    )))
}

/// A parsed weight literal, resolved against the space and map later.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightLiteral {
    /// The canonical unitary weight with `ν = 1`; needs an H_γ space.
    AutoUnitary,
    Constant(Complex<f64>),
    Series { path: PathBuf, series: TruncatedSeries<f64> },
    /// The weight a co-isometry would have to carry, with `F(0) > 0`.
    Forced,
}

pub fn parse_weight(text: &str) -> Result<WeightLiteral> {
    match text {
        "auto-unitary" => return Ok(WeightLiteral::AutoUnitary),
        "forced" => return Ok(WeightLiteral::Forced),
        _ => {}
    }
    if let Some(c) = text.strip_prefix("const:") {
        return Ok(WeightLiteral::Constant(parse_complex(c)?));
    }
    if let Some(path) = text.strip_prefix("series:") {
        let path = PathBuf::from(path);
        let series = read_series(&path)?;
        return Ok(WeightLiteral::Series { path, series });
    }
    Err(Error::Parse(format!(
        "unknown weight literal '{text}' (expected auto-unitary, const:<c>, series:<path> or forced)"
    )))
}

/// Combines a weight and a map literal into validated symbols.
pub fn resolve_symbols(
    class: &SpaceClass<f64>,
    weight: &WeightLiteral,
    map: &MapLiteral,
) -> Result<WcoSymbols<f64>> {
    let map = map.to_map();
    match weight {
        WeightLiteral::AutoUnitary => {
            if !class.is_hgamma() {
                return Err(Error::Domain(format!(
                    "auto-unitary needs an H_gamma space, but the space classifies as {class}"
                )));
            }
            let MapShape::Automorphism(aut) = map_shape(&map, DEFAULT_MATCH_TOL) else {
                return Err(Error::Domain(
                    "auto-unitary needs phi to be a disk automorphism".into(),
                ));
            };
            WcoSymbols::canonical(class, aut, Complex::new(1.0, 0.0))
        }
        WeightLiteral::Constant(c) => WcoSymbols::new(Weight::Constant(*c), map),
        WeightLiteral::Series { series, .. } => WcoSymbols::new(Weight::Series(series.clone()), map),
        WeightLiteral::Forced => WcoSymbols::new(
            Weight::Forced {
                phase: Complex::new(1.0, 0.0),
            },
            map,
        ),
    }
}
