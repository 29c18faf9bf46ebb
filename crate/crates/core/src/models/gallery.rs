use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::{DiagonalRule, ModelError, OperatorModel, Tail, WeightRule};
use crate::linalg::ComplexMatrix;

pub type GalleryParams = BTreeMap<String, f64>;

/// A named example operator with its parameters and known asymptotics.
#[derive(Clone, Debug, Serialize)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub defaults: Vec<(&'static str, f64)>,
    pub description: &'static str,
    pub expected: &'static str,
}

pub fn gallery_entries() -> Vec<GalleryEntry> {
    let sqrt2 = std::f64::consts::SQRT_2;
    vec![
        GalleryEntry {
            name: "beta_shift",
            defaults: vec![("beta", 2.0)],
            description: "weighted shift with weights (beta, 1, 1, ...)",
            expected: "power bounded with ||T^n|| = beta; ||T^n e1||^2 = beta^2 for n >= 1, so every Banach limit gives diag(beta^2, 1, 1, ...)",
        },
        GalleryEntry {
            name: "unilateral_shift",
            defaults: vec![("weight", 1.0)],
            description: "weighted shift with constant weights",
            expected: "isometry for weight 1; quasinormal for every weight",
        },
        GalleryEntry {
            name: "periodic_shift",
            defaults: vec![("a", 2.0), ("b", 0.5)],
            description: "weighted shift with weights alternating a, b",
            expected: "power bounded iff ab <= 1; orbit envelopes collapse to period means",
        },
        GalleryEntry {
            name: "block_shift",
            defaults: vec![("hi", sqrt2), ("lo", 1.0 / sqrt2), ("growth", 2.0), ("init", 1.0)],
            description: "weighted shift with hi/lo marker weights opening blocks of geometrically growing length",
            expected: "||T^n e1||^2 alternates between 1 and hi^2 on growing runs; positive envelope gap when growth > 1",
        },
        GalleryEntry {
            name: "diagonal",
            defaults: vec![("head", 0.5), ("tail", 1.0)],
            description: "diagonal operator diag(head, tail, tail, ...)",
            expected: "normal; limit diag(0, 1, 1, ...) when |head| < 1 = |tail|",
        },
        GalleryEntry {
            name: "jordan",
            defaults: vec![("beta", 1.0)],
            description: "nilpotent 2x2 block [[0, beta], [0, 0]]",
            expected: "T^2 = O, so every asymptotic limit is O",
        },
        GalleryEntry {
            name: "jordan_plus_identity",
            defaults: vec![("beta", 5.0)],
            description: "[[0, beta], [0, 0]] (+) [1]",
            expected: "T^n = O (+) I for n >= 2; Q = diag(0, 0, 1), ||T|| = beta, ||Q|| = 1",
        },
        GalleryEntry {
            name: "rotation",
            defaults: vec![("theta", 0.7)],
            description: "2x2 real rotation by theta",
            expected: "unitary; every limit is I",
        },
        GalleryEntry {
            name: "similar_rotation",
            defaults: vec![("theta", 0.7), ("scale", 2.0)],
            description: "D R D^-1 with R a rotation and D = diag(1, scale)",
            expected: "similar to a unitary; Q strictly positive and Q^(1/2) T Q^(-1/2) unitary",
        },
        GalleryEntry {
            name: "identity",
            defaults: vec![("dim", 2.0)],
            description: "identity matrix",
            expected: "every limit is I",
        },
        GalleryEntry {
            name: "scaled_identity",
            defaults: vec![("dim", 2.0), ("scale", 1.1)],
            description: "scale * I",
            expected: "power unbounded for scale > 1, C0 for scale < 1",
        },
        GalleryEntry {
            name: "unipotent_jordan",
            defaults: vec![("beta", 1.0)],
            description: "[[1, beta], [0, 1]]",
            expected: "||T^n|| grows linearly; not power bounded",
        },
        GalleryEntry {
            name: "skew_involution",
            defaults: vec![("beta", 3.0)],
            description: "[[1, beta], [0, -1]], an involution",
            expected: "T^2 = I; power bounded and bounded below, similar to a unitary",
        },
        GalleryEntry {
            name: "mixed_triangular",
            defaults: vec![("beta", 1.0), ("mu", 0.5)],
            description: "[[1, beta], [0, mu]] with |mu| < 1",
            expected: "power bounded, neither C0 nor C1; Q is a rank-one projection-like form",
        },
    ]
}

fn param(params: &GalleryParams, entry: &GalleryEntry, key: &str) -> f64 {
    params.get(key).copied().unwrap_or_else(|| entry.defaults.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).unwrap())
}

fn positive(name: &str, v: f64) -> Result<f64, ModelError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ModelError::InvalidParameter { field: name.into(), reason: format!("must be finite and > 0, got {v}") })
    }
}

fn finite(name: &str, v: f64) -> Result<f64, ModelError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ModelError::InvalidParameter { field: name.into(), reason: format!("must be finite, got {v}") })
    }
}

fn count(name: &str, v: f64, max: usize) -> Result<usize, ModelError> {
    if v.fract() == 0.0 && v >= 1.0 && v <= max as f64 {
        Ok(v as usize)
    } else {
        Err(ModelError::InvalidParameter {
            field: name.into(),
            reason: format!("must be an integer in [1, {max}], got {v}"),
        })
    }
}

fn dense(rows: &[&[f64]]) -> Result<OperatorModel, ModelError> {
    OperatorModel::dense(ComplexMatrix::from_real_rows(rows)?)
}

fn rotation(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, -s], [s, c]]
}

/// Builds a named example. Missing parameters take their defaults; unknown
/// parameter names are rejected.
pub fn gallery(name: &str, params: &GalleryParams) -> Result<OperatorModel, ModelError> {
    let entries = gallery_entries();
    let entry = entries.iter().find(|e| e.name == name).ok_or_else(|| ModelError::UnknownGalleryEntry(name.into()))?;
    for key in params.keys() {
        if !entry.defaults.iter().any(|(k, _)| k == key) {
            return Err(ModelError::InvalidParameter {
                field: key.clone(),
                reason: format!("not a parameter of gallery entry '{name}'"),
            });
        }
    }
    let p = |k: &str| param(params, entry, k);
    match name {
        "beta_shift" => {
            Ok(OperatorModel::WeightedShift(WeightRule::new(vec![positive("beta", p("beta"))?], Tail::Constant(1.0))?))
        }
        "unilateral_shift" => Ok(OperatorModel::WeightedShift(WeightRule::constant(positive("weight", p("weight"))?)?)),
        "periodic_shift" => Ok(OperatorModel::WeightedShift(WeightRule::new(
            vec![],
            Tail::Periodic(vec![positive("a", p("a"))?, positive("b", p("b"))?]),
        )?)),
        "block_shift" => Ok(OperatorModel::WeightedShift(WeightRule::new(
            vec![],
            Tail::Blocks {
                hi: positive("hi", p("hi"))?,
                lo: positive("lo", p("lo"))?,
                growth: p("growth"),
                initial_len: count("init", p("init"), 1 << 20)?,
            },
        )?)),
        "diagonal" => Ok(OperatorModel::Diagonal(DiagonalRule::new(
            vec![Complex64::new(finite("head", p("head"))?, 0.0)],
            Complex64::new(finite("tail", p("tail"))?, 0.0),
        )?)),
        "jordan" => dense(&[&[0.0, finite("beta", p("beta"))?], &[0.0, 0.0]]),
        "jordan_plus_identity" => OperatorModel::direct_sum(vec![
            dense(&[&[0.0, finite("beta", p("beta"))?], &[0.0, 0.0]])?,
            dense(&[&[1.0]])?,
        ]),
        "rotation" => {
            let r = rotation(finite("theta", p("theta"))?);
            dense(&[&r[0], &r[1]])
        }
        "similar_rotation" => {
            let r = rotation(finite("theta", p("theta"))?);
            let d = positive("scale", p("scale"))?;
            dense(&[&[r[0][0], r[0][1] / d], &[r[1][0] * d, r[1][1]]])
        }
        "identity" => OperatorModel::dense(ComplexMatrix::identity(count("dim", p("dim"), super::MAX_DENSE_DIM)?)),
        "scaled_identity" => {
            let n = count("dim", p("dim"), super::MAX_DENSE_DIM)?;
            OperatorModel::dense(ComplexMatrix::identity(n).scale(finite("scale", p("scale"))?))
        }
        "unipotent_jordan" => dense(&[&[1.0, finite("beta", p("beta"))?], &[0.0, 1.0]]),
        "skew_involution" => dense(&[&[1.0, finite("beta", p("beta"))?], &[0.0, -1.0]]),
        "mixed_triangular" => dense(&[&[1.0, finite("beta", p("beta"))?], &[0.0, finite("mu", p("mu"))?]]),
        _ => unreachable!("entry list and constructor out of sync"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kv: &[(&str, f64)]) -> GalleryParams {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn named_examples() {
        let t = gallery("beta_shift", &params(&[("beta", 2.0)])).unwrap();
        assert_eq!(t, OperatorModel::WeightedShift(WeightRule::new(vec![2.0], Tail::Constant(1.0)).unwrap()));
        let t = gallery("jordan_plus_identity", &params(&[("beta", 5.0)])).unwrap();
        let want = OperatorModel::DirectSum(vec![
            OperatorModel::Dense(ComplexMatrix::from_real_rows(&[&[0.0, 5.0], &[0.0, 0.0]]).unwrap()),
            OperatorModel::Dense(ComplexMatrix::identity(1)),
        ]);
        assert_eq!(t, want);
        let t = gallery("block_shift", &GalleryParams::new()).unwrap();
        match t {
            OperatorModel::WeightedShift(w) => {
                assert!(matches!(w.tail(), Tail::Blocks { growth, initial_len: 1, .. } if *growth == 2.0))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn every_entry_builds_with_defaults() {
        for e in gallery_entries() {
            gallery(e.name, &GalleryParams::new()).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        }
    }

    #[test]
    fn rejects_unknowns() {
        assert!(matches!(gallery("nope", &GalleryParams::new()), Err(ModelError::UnknownGalleryEntry(_))));
        assert!(matches!(gallery("beta_shift", &params(&[("gamma", 1.0)])), Err(ModelError::InvalidParameter { .. })));
        assert!(gallery("beta_shift", &params(&[("beta", -1.0)])).is_err());
        assert!(gallery("identity", &params(&[("dim", 2.5)])).is_err());
    }
}
