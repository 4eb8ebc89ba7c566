//! On-disk JSON schemas: group specifications and Fricke coordinates.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use sl2trace_core::field::{parse_in_field, FieldElem, FieldKind};
use sl2trace_core::fricke::{FrickeCoords, Tail};
use sl2trace_core::mat::ExactMat2;
use sl2trace_core::matgroup::GroupSpec;

/// {"field":{"kind":"rational"} | {"kind":"quadratic","d":n},
///  "generators":[[["p/q","p/q"],["p/q","p/q"]],...], "N": n?}
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub field: FieldDesc,
    pub generators: Vec<[[String; 2]; 2]>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldDesc {
    Rational,
    Quadratic { d: u64 },
}

impl From<&FieldDesc> for FieldKind {
    fn from(d: &FieldDesc) -> FieldKind {
        match d {
            FieldDesc::Rational => FieldKind::Rational,
            FieldDesc::Quadratic { d } => FieldKind::Quadratic { d: *d },
        }
    }
}

impl SpecFile {
    pub fn load(path: &std::path::Path) -> Result<SpecFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading spec file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing spec file {}", path.display()))
    }

    pub fn to_group_spec(&self) -> Result<GroupSpec> {
        let kind: FieldKind = (&self.field).into();
        let mut generators = Vec::with_capacity(self.generators.len());
        for (i, rows) in self.generators.iter().enumerate() {
            let parse = |s: &String| -> Result<FieldElem> {
                parse_in_field(s, &kind).map_err(|e| anyhow!("generator {i}: {e}"))
            };
            let m = ExactMat2::new(
                parse(&rows[0][0])?,
                parse(&rows[0][1])?,
                parse(&rows[1][0])?,
                parse(&rows[1][1])?,
            )
            .map_err(|e| anyhow!("generator {i}: {e}"))?;
            generators.push(m);
        }
        let n = self.n.map(num_bigint::BigInt::from);
        GroupSpec::new(kind, generators, n).map_err(|e| anyhow!("invalid spec: {e}"))
    }
}

/// {"g": n, "triples": [[a,c,d],...], "tail": {"a":..,"d":..,"nu":..}?}
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordsFile {
    pub g: usize,
    pub triples: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailFile>,
}

/// A tail given by (a, d, ν); b and c are recovered from a + d = b + c and
/// det = 1, taking b as the larger root of z² − (a+d)z + (ad − 1).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailFile {
    pub a: f64,
    pub d: f64,
    pub nu: f64,
}

impl CoordsFile {
    pub fn load(path: &std::path::Path) -> Result<CoordsFile> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading coordinates file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing coordinates file {}", path.display()))
    }

    pub fn to_fricke(&self) -> Result<FrickeCoords> {
        let tail = match &self.tail {
            None => None,
            Some(t) => {
                let s = t.a + t.d;
                let disc = s * s - 4.0 * (t.a * t.d - 1.0);
                if disc < 0.0 {
                    bail!("tail (a, d) = ({}, {}) admits no real (b, c)", t.a, t.d);
                }
                let b = (s + disc.sqrt()) / 2.0;
                let c = s - b;
                Some(Tail { a: t.a, b, c, d: t.d, nu: t.nu, residual: f64::NAN })
            }
        };
        FrickeCoords::new(self.g, self.triples.clone(), tail)
            .map_err(|e| anyhow!("invalid coordinates: {e}"))
    }
}
