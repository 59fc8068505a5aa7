//! Input document parsing and validation.
//!
//! A job is a JSON document:
//!
//! ```json
//! {
//!   "name": "fix1",
//!   "ring": { "p": 3, "precision": 16, "flavor": "p-adic" },
//!   "generators": [
//!     { "label": "a", "matrix": [[0, -1], [1, -1]] },
//!     { "label": "b", "matrix": [[-1, 1], [0, 1]] }
//!   ],
//!   "max_diameter": 16,
//!   "enumeration_cap": 1048576
//! }
//! ```
//!
//! Matrix entries are integers, or — for the power-series flavor —
//! integer coefficient lists with the constant term first. All fields
//! except `ring.p` and `generators` have defaults (precision 16,
//! max_diameter 16, cap 2^20).

use crate::error::{Error, Result};
use crate::lattice::{load_representation, EntrySpec, GeneratorSpec, Representation, StableLattice};
use crate::ring::{make_ring, Flavor, RingContext};
use serde::Deserialize;

pub const DEFAULT_PRECISION: u32 = 16;
pub const DEFAULT_MAX_DIAMETER: u32 = 16;
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Deserialize)]
struct RawRing {
    p: Option<u64>,
    precision: Option<u32>,
    flavor: Option<String>,
}

#[derive(Deserialize)]
struct RawGenerator {
    label: Option<String>,
    matrix: Option<Vec<Vec<serde_json::Value>>>,
    #[serde(default)]
    shift: u32,
}

#[derive(Deserialize)]
struct RawSpec {
    name: Option<String>,
    ring: Option<RawRing>,
    generators: Option<Vec<RawGenerator>>,
    max_diameter: Option<u32>,
    enumeration_cap: Option<u64>,
}

/// A validated job: ring data, generators, guards.
#[derive(Clone, Debug)]
pub struct JobSpec {
    pub name: String,
    pub p: u64,
    pub precision: u32,
    pub flavor: Flavor,
    pub generators: Vec<GeneratorSpec>,
    pub max_diameter: u32,
    pub enumeration_cap: u64,
}

fn entry_from_json(v: &serde_json::Value, ctx_label: &str) -> Result<EntrySpec> {
    if let Some(x) = v.as_i64() {
        return Ok(EntrySpec::Int(x));
    }
    if let Some(arr) = v.as_array() {
        let digits: Option<Vec<i64>> = arr.iter().map(|d| d.as_i64()).collect();
        if let Some(d) = digits {
            return Ok(EntrySpec::Digits(d));
        }
    }
    Err(Error::Spec(format!(
        "generator {ctx_label}: entries must be integers or integer lists"
    )))
}

/// Parse and validate the JSON job document.
pub fn parse_spec(text: &str) -> Result<JobSpec> {
    let raw: RawSpec = serde_json::from_str(text)
        .map_err(|e| Error::Spec(format!("invalid JSON: {e}")))?;
    let ring = raw.ring.ok_or_else(|| Error::Spec("missing field: ring".to_string()))?;
    let p = ring.p.ok_or_else(|| Error::Spec("missing field: ring.p".to_string()))?;
    let precision = ring.precision.unwrap_or(DEFAULT_PRECISION);
    let flavor = match ring.flavor.as_deref() {
        None | Some("p-adic") => Flavor::PAdic,
        Some("power-series") => Flavor::PowerSeries,
        Some(other) => {
            return Err(Error::Spec(format!(
                "ring.flavor must be \"p-adic\" or \"power-series\", got {other:?}"
            )))
        }
    };
    // validates primality and precision range
    make_ring(p, precision, flavor)?;

    let raw_gens =
        raw.generators.ok_or_else(|| Error::Spec("missing field: generators".to_string()))?;
    if raw_gens.is_empty() {
        return Err(Error::Spec("generators must be non-empty".to_string()));
    }
    let mut generators = Vec::with_capacity(raw_gens.len());
    for (k, g) in raw_gens.iter().enumerate() {
        let label = g.label.clone().unwrap_or_else(|| format!("g{k}"));
        let matrix = g
            .matrix
            .as_ref()
            .ok_or_else(|| Error::Spec(format!("generator {label}: missing field matrix")))?;
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::Spec(format!("generator {label}: matrix must be square")));
        }
        if flavor == Flavor::PAdic {
            for row in matrix {
                for e in row {
                    if !e.is_i64() {
                        return Err(Error::Spec(format!(
                            "generator {label}: p-adic entries must be integers"
                        )));
                    }
                }
            }
        }
        let rows: Result<Vec<Vec<EntrySpec>>> = matrix
            .iter()
            .map(|r| r.iter().map(|e| entry_from_json(e, &label)).collect())
            .collect();
        generators.push(GeneratorSpec { label, rows: rows?, shift: g.shift });
    }

    let max_diameter = raw.max_diameter.unwrap_or(DEFAULT_MAX_DIAMETER);
    if max_diameter == 0 {
        return Err(Error::Spec("max_diameter must be positive".to_string()));
    }
    let enumeration_cap = raw.enumeration_cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
    if enumeration_cap == 0 {
        return Err(Error::Spec("enumeration_cap must be positive".to_string()));
    }

    Ok(JobSpec {
        name: raw.name.unwrap_or_else(|| "job".to_string()),
        p,
        precision,
        flavor,
        generators,
        max_diameter,
        enumeration_cap,
    })
}

pub fn parse_spec_file(path: &std::path::Path) -> Result<JobSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text)
}

impl JobSpec {
    pub fn ring(&self) -> Result<RingContext> {
        make_ring(self.p, self.precision, self.flavor)
    }

    /// Same job at a different working precision.
    pub fn with_precision(&self, precision: u32) -> JobSpec {
        let mut s = self.clone();
        s.precision = precision;
        s
    }

    /// Stabilize and return the representation with its base lattice.
    pub fn load(&self) -> Result<(Representation, StableLattice)> {
        let ctx = self.ring()?;
        load_representation(ctx, &self.generators, self.max_diameter, self.enumeration_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIX1: &str = r#"{
        "name": "fix1",
        "ring": {"p": 3, "precision": 16, "flavor": "p-adic"},
        "generators": [
            {"label": "a", "matrix": [[0, -1], [1, -1]]},
            {"label": "b", "matrix": [[-1, 1], [0, 1]]}
        ]
    }"#;

    #[test]
    fn parses_fixture() {
        let spec = parse_spec(FIX1).unwrap();
        assert_eq!(spec.p, 3);
        assert_eq!(spec.precision, 16);
        assert_eq!(spec.generators.len(), 2);
        assert_eq!(spec.max_diameter, DEFAULT_MAX_DIAMETER);
        let (rep, base) = spec.load().unwrap();
        assert_eq!(rep.dim(), 2);
        assert_eq!(base.shift(), 0);
    }

    #[test]
    fn missing_p_is_named() {
        let err = parse_spec(r#"{"ring": {}, "generators": []}"#).unwrap_err();
        assert!(err.to_string().contains("ring.p"), "{err}");
    }

    #[test]
    fn non_prime_p_rejected() {
        let err = parse_spec(
            r#"{"ring": {"p": 4}, "generators": [{"matrix": [[1]]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonPrime(4)));
    }

    #[test]
    fn zero_determinant_generator_rejected() {
        let spec = parse_spec(
            r#"{"ring": {"p": 3}, "generators": [{"label": "a", "matrix": [[1, 1], [1, 1]]}]}"#,
        )
        .unwrap();
        let err = spec.load().unwrap_err();
        assert!(matches!(err, Error::NonInvertibleGenerator(_)), "{err}");
    }

    #[test]
    fn power_series_entries() {
        let spec = parse_spec(
            r#"{"ring": {"p": 3, "flavor": "power-series"},
                "generators": [{"label": "g", "matrix": [[1, 1], [[0,0,0,1], 1]]}]}"#,
        )
        .unwrap();
        let (rep, base) = spec.load().unwrap();
        assert_eq!(rep.dim(), 2);
        let _ = base;
        // integer-list entries are rejected for the p-adic flavor
        let err = parse_spec(
            r#"{"ring": {"p": 3}, "generators": [{"matrix": [[1, [0,1]], [0, 1]]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Spec(_)));
    }
}
