//! JSON operator specs and probe lists. Complex numbers are `[re, im]` pairs.
//!
//! ```json
//! {"type": "weighted_shift",
//!  "weights": {"prefix": [2.0], "tail": {"kind": "constant", "value": 1.0}}}
//! ```
//!
//! `{"type": "gallery", "name": ..., "params": {...}}` is accepted on input
//! and expands to the concrete model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::models::{
    gallery, DiagonalRule, GalleryParams, ModelError, OperatorModel, SupportedVector, Tail, WeightRule,
};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("spec syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("invalid spec at {field}: {message}")]
    Invalid { field: String, message: String },
}

impl SpecError {
    fn from_json(e: serde_json::Error) -> Self {
        SpecError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
    }

    fn from_path(base: &str, e: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let inner = e.path().to_string();
        let field = match inner.as_str() {
            "." => base.to_string(),
            p if p.starts_with('[') => format!("{base}{p}"),
            p => format!("{base}.{p}"),
        };
        SpecError::Invalid { field, message: e.into_inner().to_string() }
    }

    fn at(field: &str, e: ModelError) -> Self {
        SpecError::Invalid { field: field.to_string(), message: e.to_string() }
    }
}

type Pair = [f64; 2];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailSpec {
    Constant { value: f64 },
    Periodic { values: Vec<f64> },
    Blocks { hi: f64, lo: f64, growth: f64, initial_len: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    #[serde(default)]
    pub prefix: Vec<f64>,
    pub tail: TailSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    Dense {
        entries: Vec<Vec<Pair>>,
    },
    WeightedShift {
        weights: WeightsSpec,
    },
    Diagonal {
        #[serde(default)]
        prefix: Vec<Pair>,
        tail: Pair,
    },
    DirectSum {
        components: Vec<OperatorSpec>,
    },
    Gallery {
        name: String,
        #[serde(default)]
        params: GalleryParams,
    },
}

fn c(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    m.to_rows().into_iter().map(|r| r.into_iter().map(pair).collect()).collect()
}

/// `serialize_with` helper writing a matrix as rows of `[re, im]` pairs.
pub fn serialize_matrix<S: serde::Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
    matrix_to_pairs(m).serialize(s)
}

impl OperatorSpec {
    pub fn from_model(t: &OperatorModel) -> Self {
        match t {
            OperatorModel::Dense(m) => OperatorSpec::Dense { entries: matrix_to_pairs(m) },
            OperatorModel::WeightedShift(w) => OperatorSpec::WeightedShift {
                weights: WeightsSpec {
                    prefix: w.prefix().to_vec(),
                    tail: match w.tail() {
                        Tail::Constant(v) => TailSpec::Constant { value: *v },
                        Tail::Periodic(vs) => TailSpec::Periodic { values: vs.clone() },
                        Tail::Blocks { hi, lo, growth, initial_len } => {
                            TailSpec::Blocks { hi: *hi, lo: *lo, growth: *growth, initial_len: *initial_len }
                        }
                    },
                },
            },
            OperatorModel::Diagonal(d) => {
                OperatorSpec::Diagonal { prefix: d.prefix.iter().copied().map(pair).collect(), tail: pair(d.tail) }
            }
            OperatorModel::DirectSum(parts) => {
                OperatorSpec::DirectSum { components: parts.iter().map(Self::from_model).collect() }
            }
        }
    }

    pub fn to_model(&self) -> Result<OperatorModel, SpecError> {
        self.to_model_at("$")
    }

    fn to_model_at(&self, path: &str) -> Result<OperatorModel, SpecError> {
        match self {
            OperatorSpec::Dense { entries } => {
                let rows: Vec<Vec<Complex64>> = entries.iter().map(|r| r.iter().copied().map(c).collect()).collect();
                let field = format!("{path}.entries");
                let m = ComplexMatrix::from_rows(&rows).map_err(|e| SpecError::at(&field, e.into()))?;
                OperatorModel::dense(m).map_err(|e| SpecError::at(&field, e))
            }
            OperatorSpec::WeightedShift { weights } => {
                let tail = match &weights.tail {
                    TailSpec::Constant { value } => Tail::Constant(*value),
                    TailSpec::Periodic { values } => Tail::Periodic(values.clone()),
                    TailSpec::Blocks { hi, lo, growth, initial_len } => {
                        Tail::Blocks { hi: *hi, lo: *lo, growth: *growth, initial_len: *initial_len }
                    }
                };
                let rule = WeightRule::new(weights.prefix.clone(), tail).map_err(|e| SpecError::at(path, e))?;
                Ok(OperatorModel::WeightedShift(rule))
            }
            OperatorSpec::Diagonal { prefix, tail } => {
                let rule = DiagonalRule::new(prefix.iter().copied().map(c).collect(), c(*tail))
                    .map_err(|e| SpecError::at(path, e))?;
                Ok(OperatorModel::Diagonal(rule))
            }
            OperatorSpec::DirectSum { components } => {
                let parts = components
                    .iter()
                    .enumerate()
                    .map(|(i, s)| s.to_model_at(&format!("{path}.components[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                OperatorModel::direct_sum(parts).map_err(|e| SpecError::at(&format!("{path}.components"), e))
            }
            OperatorSpec::Gallery { name, params } => {
                gallery(name, params).map_err(|e| SpecError::at(&format!("{path}.params"), e))
            }
        }
    }
}

fn typed<T: serde::de::DeserializeOwned>(value: Value, path: &str) -> Result<T, SpecError> {
    serde_path_to_error::deserialize(value).map_err(|e| SpecError::from_path(path, e))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSum {
    components: Vec<Value>,
}

// Dispatches on "type" by hand so nested errors keep their field path.
fn spec_from_value(mut value: Value, path: &str) -> Result<OperatorSpec, SpecError> {
    let invalid = |field: String, message: String| SpecError::Invalid { field, message };
    let obj = value.as_object_mut().ok_or_else(|| invalid(path.into(), "expected an object".into()))?;
    let kind = match obj.remove("type") {
        Some(Value::String(k)) => k,
        _ => return Err(invalid(format!("{path}.type"), "missing or non-string \"type\"".into())),
    };
    // re-tag so the derived enum can take the remaining fields
    match kind.as_str() {
        "direct_sum" => {
            let raw: RawSum = typed(value, path)?;
            let components = raw
                .components
                .into_iter()
                .enumerate()
                .map(|(i, v)| spec_from_value(v, &format!("{path}.components[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(OperatorSpec::DirectSum { components })
        }
        "dense" | "weighted_shift" | "diagonal" | "gallery" => {
            let mut tagged = serde_json::Map::new();
            tagged.insert(kind.clone(), value);
            typed::<ExternallyTagged>(Value::Object(tagged), path).map(|t| t.0)
        }
        other => Err(invalid(
            format!("{path}.type"),
            format!(
                "unknown operator type '{other}' (expected dense, weighted_shift, diagonal, direct_sum or gallery)"
            ),
        )),
    }
}

// Same variants as `OperatorSpec`, externally tagged so serde tracks paths.
#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Variant {
    Dense {
        entries: Vec<Vec<Pair>>,
    },
    WeightedShift {
        weights: WeightsSpec,
    },
    Diagonal {
        #[serde(default)]
        prefix: Vec<Pair>,
        tail: Pair,
    },
    Gallery {
        name: String,
        #[serde(default)]
        params: GalleryParams,
    },
}

#[derive(Deserialize)]
#[serde(from = "Variant")]
struct ExternallyTagged(OperatorSpec);

impl From<Variant> for ExternallyTagged {
    fn from(v: Variant) -> Self {
        ExternallyTagged(match v {
            Variant::Dense { entries } => OperatorSpec::Dense { entries },
            Variant::WeightedShift { weights } => OperatorSpec::WeightedShift { weights },
            Variant::Diagonal { prefix, tail } => OperatorSpec::Diagonal { prefix, tail },
            Variant::Gallery { name, params } => OperatorSpec::Gallery { name, params },
        })
    }
}

/// Syntax errors carry line and column; structural errors carry the field path.
pub fn parse_operator(text: &str) -> Result<OperatorModel, SpecError> {
    let value: Value = serde_json::from_str(text).map_err(SpecError::from_json)?;
    spec_from_value(value, "$")?.to_model()
}

pub fn print_operator(t: &OperatorModel) -> String {
    serde_json::to_string_pretty(&OperatorSpec::from_model(t)).expect("spec serialization")
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    pub support: Vec<usize>,
    pub amplitudes: Vec<Pair>,
}

impl ProbeSpec {
    pub fn from_vector(x: &SupportedVector) -> Self {
        let (support, amplitudes) = x.iter().map(|(i, a)| (i, pair(a))).unzip();
        ProbeSpec { support, amplitudes }
    }
}

pub fn parse_probes(text: &str) -> Result<Vec<SupportedVector>, SpecError> {
    let value: Value = serde_json::from_str(text).map_err(SpecError::from_json)?;
    let specs: Vec<ProbeSpec> = typed(value, "$")?;
    specs
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            if p.support.len() != p.amplitudes.len() {
                return Err(SpecError::Invalid {
                    field: format!("$[{k}]"),
                    message: format!("{} indices but {} amplitudes", p.support.len(), p.amplitudes.len()),
                });
            }
            let x = SupportedVector::from_pairs(p.support.iter().copied().zip(p.amplitudes.iter().copied().map(c)));
            if x.is_zero() {
                return Err(SpecError::Invalid { field: format!("$[{k}]"), message: "probe vector is zero".into() });
            }
            Ok(x)
        })
        .collect()
}
