//! Versioned JSON report of a dichotomy check.

use serde::{Serialize, Serializer};

use crate::operator::{SelfMap, Weight, WcoSymbols};
use crate::scalar::{to_f64, Real};
use crate::weights::{Origin, SpaceClass, WeightSequence};

pub const REPORT_VERSION: u32 = 1;

/// `true`/`false`, or `"n/a"` when the theory makes no prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Agree,
    Disagree,
    NotApplicable,
}

impl Agreement {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Agreement::Agree
        } else {
            Agreement::Disagree
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Agreement::Agree => Some(true),
            Agreement::Disagree => Some(false),
            Agreement::NotApplicable => None,
        }
    }
}

impl Serialize for Agreement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.as_bool() {
            Some(b) => s.serialize_bool(b),
            None => s.serialize_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceSection {
    pub spec: Option<String>,
    pub origin: Origin<f64>,
    pub class: String,
    pub gamma1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSection {
    Automorphism { lambda: [f64; 2], a: [f64; 2] },
    Series { re: Vec<f64>, im: Vec<f64>, exact: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSection {
    Constant { value: [f64; 2] },
    Series { re: Vec<f64>, im: Vec<f64>, exact: bool },
    Canonical { gamma: f64, a: [f64; 2], nu: [f64; 2] },
    Forced { phase: [f64; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolsSection {
    pub phi: MapSection,
    pub f: WeightSection,
    pub phi_literal: Option<String>,
    pub f_literal: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Defects {
    pub isometry: Option<f64>,
    pub coisometry: Option<f64>,
    pub adjoint_kernel: Option<f64>,
    pub functional_identity: Option<f64>,
    pub modulus_identity: Option<f64>,
}

/// Defects of the doubled truncation used by the numerical verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Doubling {
    #[serde(rename = "N")]
    pub n: usize,
    pub isometry: Option<f64>,
    pub coisometry: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub defect: f64,
    pub fail_factor: f64,
    pub noise_floor: f64,
    pub match_tol: f64,
    pub classify_rel_tol: f64,
    pub classify_n_check: usize,
    pub adjoint_w: [f64; 2],
    pub grid_points: usize,
    pub grid_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rationale {
    pub space_class: String,
    pub map_shape: String,
    pub weight_shape: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub space: SpaceSection,
    pub symbols: SymbolsSection,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: usize,
    pub defects: Defects,
    pub doubling: Doubling,
    pub theoretical: String,
    pub numerical: String,
    pub agreement: Agreement,
    pub tolerances: Tolerances,
    pub rationale: Rationale,
    pub assumptions: Vec<String>,
    pub errors: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn pair<T: Real>(z: num_complex::Complex<T>) -> [f64; 2] {
    [to_f64(z.re), to_f64(z.im)]
}

pub fn origin_f64<T: Real>(origin: &Origin<T>) -> Origin<f64> {
    match *origin {
        Origin::Hardy => Origin::Hardy,
        Origin::Bergman { alpha } => Origin::Bergman { alpha: to_f64(alpha) },
        Origin::HGamma { gamma } => Origin::HGamma { gamma: to_f64(gamma) },
        Origin::DirichletClassical => Origin::DirichletClassical,
        Origin::BoundedLog => Origin::BoundedLog,
        Origin::Explicit => Origin::Explicit,
    }
}

pub fn space_section<T: Real>(ws: &WeightSequence<T>, class: &SpaceClass<T>, spec: Option<String>) -> SpaceSection {
    SpaceSection {
        spec,
        origin: origin_f64(ws.origin()),
        class: class.to_string(),
        gamma1: ws.gamma1().ok().map(to_f64),
    }
}

pub fn symbols_section<T: Real>(
    symbols: &WcoSymbols<T>,
    phi_literal: Option<String>,
    f_literal: Option<String>,
) -> SymbolsSection {
    let phi = match &symbols.map {
        SelfMap::Automorphism(aut) => MapSection::Automorphism {
            lambda: pair(aut.lambda()),
            a: pair(aut.a()),
        },
        SelfMap::Series(s) => {
            let json = s.to_json();
            MapSection::Series {
                re: json.re,
                im: json.im,
                exact: s.is_exact(),
            }
        }
    };
    let f = match &symbols.weight {
        Weight::Constant(c) => WeightSection::Constant { value: pair(*c) },
        Weight::Series(s) => {
            let json = s.to_json();
            WeightSection::Series {
                re: json.re,
                im: json.im,
                exact: s.is_exact(),
            }
        }
        Weight::Canonical { gamma, a, nu } => WeightSection::Canonical {
            gamma: to_f64(*gamma),
            a: pair(*a),
            nu: pair(*nu),
        },
        Weight::Forced { phase } => WeightSection::Forced { phase: pair(*phase) },
    };
    SymbolsSection {
        phi,
        f,
        phi_literal,
        f_literal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agreement_serializes_as_bool_or_na() {
        assert_eq!(serde_json::to_string(&Agreement::Agree).unwrap(), "true");
        assert_eq!(serde_json::to_string(&Agreement::Disagree).unwrap(), "false");
        assert_eq!(serde_json::to_string(&Agreement::NotApplicable).unwrap(), "\"n/a\"");
    }

    #[test]
    fn origin_serializes_with_name() {
        let json = serde_json::to_value(Origin::HGamma { gamma: 2.0 }).unwrap();
        assert_eq!(json["name"], "h_gamma");
        assert_eq!(json["gamma"], 2.0);
    }
}
