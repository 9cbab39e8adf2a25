//! JSON series files.
//!
//! ```json
//! {
//!   "symbols": [{"name": "L2", "value": 0.6931471805599453}],
//!   "terms": [{"exponent": {"L2": "1"}, "coeff": {"re": 1.0, "im": 0.0}}],
//!   "abscissa": 0.0,
//!   "tail": {"lambdaNext": {"L2": "2"}, "coeffBound": 1.0, "minGap": 0.69}
//! }
//! ```
//!
//! Exponent coordinates are exact rational strings (`"19/6"`, `"-2"`).
//! A missing `abscissa` means the series is a finite sum.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use bohr_core::series::{format_rational, parse_rational, Rational};
use bohr_core::{Complex, ExponentVector, SeriesSpec, SymbolTable, TailMajorant, Term};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
struct RationalString(Rational);

impl Serialize for RationalString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = RationalString;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string such as \"19/6\" or \"-2\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RationalString, E> {
                parse_rational(v)
                    .map(RationalString)
                    .ok_or_else(|| E::custom(format!("invalid rational \"{v}\"")))
            }
        }
        d.deserialize_str(V)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SymbolEntry {
    name: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComplexEntry {
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermEntry {
    exponent: BTreeMap<String, RationalString>,
    coeff: ComplexEntry,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct TailEntry {
    lambda_next: BTreeMap<String, RationalString>,
    coeff_bound: f64,
    min_gap: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesFile {
    symbols: Vec<SymbolEntry>,
    terms: Vec<TermEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abscissa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailEntry>,
}

fn exponent(coords: BTreeMap<String, RationalString>) -> ExponentVector {
    ExponentVector::from_coords(coords.into_iter().map(|(k, v)| (k, v.0)))
}

fn coords(e: &ExponentVector) -> BTreeMap<String, RationalString> {
    e.coords()
        .iter()
        .map(|(k, v)| (k.clone(), RationalString(v.clone())))
        .collect()
}

/// Parses series JSON. `origin` names the source in error messages.
pub fn parse_series(text: &str, origin: &str) -> Result<SeriesSpec, CliError> {
    let file: SeriesFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
        origin: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let invalid = |e| CliError::Validation {
        origin: origin.to_string(),
        source: e,
    };
    let mut symbols = SymbolTable::new();
    for s in file.symbols {
        symbols.declare(s.name, s.value).map_err(invalid)?;
    }
    let terms = file
        .terms
        .into_iter()
        .map(|t| Term {
            exponent: exponent(t.exponent),
            coeff: Complex::new(t.coeff.re, t.coeff.im),
        })
        .collect();
    let tail = file
        .tail
        .map(|t| TailMajorant::new(exponent(t.lambda_next), t.coeff_bound, t.min_gap))
        .transpose()
        .map_err(invalid)?;
    SeriesSpec::new(symbols, terms, file.abscissa.unwrap_or(f64::NEG_INFINITY), tail).map_err(invalid)
}

pub fn read_series(path: &Path) -> Result<(SeriesSpec, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let text = String::from_utf8_lossy(&bytes);
    Ok((parse_series(&text, &path.display().to_string())?, bytes))
}

/// Pretty JSON for a series, ending in a newline. Symbol values and
/// coefficients use shortest round-trip float formatting.
pub fn emit_series(spec: &SeriesSpec) -> String {
    let file = SeriesFile {
        symbols: spec
            .symbols()
            .iter()
            .map(|s| SymbolEntry {
                name: s.name.clone(),
                value: s.value,
            })
            .collect(),
        terms: spec
            .terms()
            .iter()
            .map(|t| TermEntry {
                exponent: coords(&t.exponent),
                coeff: ComplexEntry {
                    re: t.coeff.re,
                    im: t.coeff.im,
                },
            })
            .collect(),
        abscissa: Some(spec.abscissa()).filter(|a| a.is_finite()),
        tail: spec.tail().map(|t| TailEntry {
            lambda_next: coords(&t.lambda_next),
            coeff_bound: t.coeff_bound,
            min_gap: t.min_gap,
        }),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("series files always serialize");
    out.push('\n');
    out
}
