//! Exact operator representations with exact orbit evaluation on finitely
//! supported vectors.

mod gallery;
mod spectral;
mod vector;
mod weights;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError};

pub use gallery::{gallery, gallery_entries, GalleryEntry, GalleryParams};
pub use spectral::{
    is_normaloid, is_quasinormal, power_extremes, power_lower_bound, power_norm_estimate, power_norm_profile,
    spectral_radius, NormaloidCheck, QuasinormalCheck, SpectralRadiusEstimate,
};
pub use vector::SupportedVector;
pub use weights::{Tail, WeightRule};

/// Largest dense dimension accepted anywhere in the crate.
pub const MAX_DENSE_DIM: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid weight {value} at {field}: weights must be finite and > 0")]
    InvalidWeight { field: String, value: f64 },
    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: String, reason: String },
    #[error("vector index {index} outside operator dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },
    #[error("direct sum component {index} is infinite-dimensional but not last")]
    InfiniteComponentNotLast { index: usize },
    #[error("dense operator is {rows}x{cols}, expected square with dimension <= {max}", max = MAX_DENSE_DIM)]
    BadDenseShape { rows: usize, cols: usize },
    #[error("{operation} is not supported for {variant}")]
    UnsupportedVariant { operation: &'static str, variant: &'static str },
    #[error("unknown gallery entry '{0}'")]
    UnknownGalleryEntry(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Diagonal operator `diag(d_1, …, d_p, c, c, …)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalRule {
    pub prefix: Vec<Complex64>,
    pub tail: Complex64,
}

impl DiagonalRule {
    pub fn new(prefix: Vec<Complex64>, tail: Complex64) -> Result<Self, ModelError> {
        for (i, d) in prefix.iter().chain(std::iter::once(&tail)).enumerate() {
            if !(d.re.is_finite() && d.im.is_finite()) {
                let field = if i < prefix.len() { format!("prefix[{i}]") } else { "tail".to_string() };
                return Err(ModelError::InvalidParameter { field, reason: "entry is not finite".into() });
            }
        }
        Ok(DiagonalRule { prefix, tail })
    }

    /// Entry `d_{i+1}` for 0-based index `i`.
    pub fn entry(&self, i: usize) -> Complex64 {
        self.prefix.get(i).copied().unwrap_or(self.tail)
    }

    pub fn distinct_moduli(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.prefix.iter().chain(std::iter::once(&self.tail)).map(|d| d.norm()).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// A bounded operator on a (finite or separable) Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorModel {
    Dense(ComplexMatrix),
    /// `T e_k = w_k e_{k+1}` on ℓ².
    WeightedShift(WeightRule),
    Diagonal(DiagonalRule),
    /// Flat indexing: component `i` occupies the next `dim_i` coordinates.
    /// Only the last component may be infinite-dimensional.
    DirectSum(Vec<OperatorModel>),
}

impl OperatorModel {
    pub fn dense(m: ComplexMatrix) -> Result<Self, ModelError> {
        if !m.is_square() || m.rows() > MAX_DENSE_DIM {
            return Err(ModelError::BadDenseShape { rows: m.rows(), cols: m.cols() });
        }
        Ok(OperatorModel::Dense(m))
    }

    pub fn direct_sum(parts: Vec<OperatorModel>) -> Result<Self, ModelError> {
        if parts.is_empty() {
            return Err(ModelError::InvalidParameter {
                field: "components".into(),
                reason: "direct sum needs at least one component".into(),
            });
        }
        for (i, p) in parts.iter().enumerate() {
            if p.dimension().is_none() && i + 1 != parts.len() {
                return Err(ModelError::InfiniteComponentNotLast { index: i });
            }
        }
        Ok(OperatorModel::DirectSum(parts))
    }

    /// `None` for infinite-dimensional models.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            OperatorModel::Dense(m) => Some(m.rows()),
            OperatorModel::WeightedShift(_) | OperatorModel::Diagonal(_) => None,
            OperatorModel::DirectSum(parts) => parts.iter().map(|p| p.dimension()).sum(),
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            OperatorModel::Dense(_) => "dense",
            OperatorModel::WeightedShift(_) => "weighted_shift",
            OperatorModel::Diagonal(_) => "diagonal",
            OperatorModel::DirectSum(_) => "direct_sum",
        }
    }

    /// Dense matrix of a finite-dimensional model (direct sums are assembled
    /// block-diagonally).
    pub fn to_dense(&self) -> Option<ComplexMatrix> {
        match self {
            OperatorModel::Dense(m) => Some(m.clone()),
            OperatorModel::DirectSum(parts) => {
                let blocks: Option<Vec<ComplexMatrix>> = parts.iter().map(|p| p.to_dense()).collect();
                let blocks = blocks?;
                let n: usize = blocks.iter().map(|b| b.rows()).sum();
                let mut out = ComplexMatrix::zeros(n, n);
                let mut off = 0;
                for b in &blocks {
                    for i in 0..b.rows() {
                        for j in 0..b.cols() {
                            out[(off + i, off + j)] = b[(i, j)];
                        }
                    }
                    off += b.rows();
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Lossy `size × size` compression `P T P` onto the first coordinates.
    /// Truncated shifts are nilpotent, so this is for export only.
    pub fn compress(&self, size: usize) -> Result<ComplexMatrix, ModelError> {
        let mut out = ComplexMatrix::zeros(size, size);
        for j in 0..size {
            let col = apply(self, &SupportedVector::basis(j))?;
            for (i, a) in col.iter() {
                if i < size {
                    out[(i, j)] = a;
                }
            }
        }
        Ok(out)
    }

    fn check_support(&self, x: &SupportedVector) -> Result<(), ModelError> {
        if let (Some(dim), Some(max)) = (self.dimension(), x.max_index()) {
            if max >= dim {
                return Err(ModelError::DimensionMismatch { index: max, dim });
            }
        }
        Ok(())
    }
}

fn split(parts: &[OperatorModel], x: &SupportedVector) -> Vec<(usize, SupportedVector)> {
    let mut out = Vec::with_capacity(parts.len());
    let mut off = 0;
    for p in parts {
        match p.dimension() {
            Some(d) => {
                out.push((off, x.slice(off, Some(off + d))));
                off += d;
            }
            None => out.push((off, x.slice(off, None))),
        }
    }
    out
}

fn dense_apply(m: &ComplexMatrix, x: &SupportedVector) -> SupportedVector {
    let n = m.rows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, a) in x.iter() {
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * a;
        }
    }
    SupportedVector::from_dense(&out)
}

/// `T x`.
pub fn apply(t: &OperatorModel, x: &SupportedVector) -> Result<SupportedVector, ModelError> {
    t.check_support(x)?;
    Ok(match t {
        OperatorModel::Dense(m) => dense_apply(m, x),
        OperatorModel::WeightedShift(w) => {
            SupportedVector::from_pairs(x.iter().map(|(i, a)| (i + 1, a * w.weight(i + 1))))
        }
        OperatorModel::Diagonal(d) => SupportedVector::from_pairs(x.iter().map(|(i, a)| (i, a * d.entry(i)))),
        OperatorModel::DirectSum(parts) => {
            let mut out = SupportedVector::zero();
            for (p, (off, xi)) in parts.iter().zip(split(parts, x)) {
                out = out.add(&apply(p, &xi)?.offset(off));
            }
            out
        }
    })
}

/// `T* x`.
pub fn adjoint_apply(t: &OperatorModel, x: &SupportedVector) -> Result<SupportedVector, ModelError> {
    t.check_support(x)?;
    Ok(match t {
        OperatorModel::Dense(m) => dense_apply(&m.adjoint(), x),
        OperatorModel::WeightedShift(w) => {
            SupportedVector::from_pairs(x.iter().filter(|&(i, _)| i > 0).map(|(i, a)| (i - 1, a * w.weight(i))))
        }
        OperatorModel::Diagonal(d) => SupportedVector::from_pairs(x.iter().map(|(i, a)| (i, a * d.entry(i).conj()))),
        OperatorModel::DirectSum(parts) => {
            let mut out = SupportedVector::zero();
            for (p, (off, xi)) in parts.iter().zip(split(parts, x)) {
                out = out.add(&adjoint_apply(p, &xi)?.offset(off));
            }
            out
        }
    })
}

/// `‖Tⁿx‖²` for `n = 0..=n_max`.
pub fn orbit_norms(t: &OperatorModel, x: &SupportedVector, n_max: usize) -> Result<Vec<f64>, ModelError> {
    t.check_support(x)?;
    let mut out = vec![0.0; n_max + 1];
    match t {
        OperatorModel::Dense(m) => {
            let mut y = x.to_dense(m.rows()).expect("support checked");
            out[0] = y.iter().map(|z| z.norm_sqr()).sum();
            for slot in out.iter_mut().skip(1) {
                y = m.mul_vec(&y);
                *slot = y.iter().map(|z| z.norm_sqr()).sum();
            }
        }
        OperatorModel::WeightedShift(w) => {
            let Some(top) = x.max_index() else { return Ok(out) };
            let weights = w.weights(1, top + n_max + 1);
            let log_space = w.needs_log_space();
            for (i, a) in x.iter() {
                // orbit of e_{i+1}: T^n e_{i+1} = w_{i+1} ⋯ w_{i+n} e_{i+n+1}
                let seg = &weights[i..i + n_max];
                if log_space {
                    let mut log = a.norm_sqr().ln();
                    out[0] += a.norm_sqr();
                    for (n, wk) in seg.iter().enumerate() {
                        log += 2.0 * wk.ln();
                        out[n + 1] += log.exp();
                    }
                } else {
                    let mut p = a.norm_sqr();
                    out[0] += p;
                    for (n, wk) in seg.iter().enumerate() {
                        p *= wk * wk;
                        out[n + 1] += p;
                    }
                }
            }
        }
        OperatorModel::Diagonal(d) => {
            for (i, a) in x.iter() {
                let r = d.entry(i).norm_sqr();
                let mut p = a.norm_sqr();
                out[0] += p;
                for slot in out.iter_mut().skip(1) {
                    p *= r;
                    *slot += p;
                }
            }
        }
        OperatorModel::DirectSum(parts) => {
            for (p, (_, xi)) in parts.iter().zip(split(parts, x)) {
                if xi.is_zero() {
                    continue;
                }
                for (o, v) in out.iter_mut().zip(orbit_norms(p, &xi, n_max)?) {
                    *o += v;
                }
            }
        }
    }
    Ok(out)
}

/// Matrix entries of `Tⁿ` needed for a Gram orbit: `⟨Tⁿx, Tⁿy⟩` for
/// `n = 0..=n_max`. Used for polarization on dense operators.
pub fn orbit_inner_products(
    t: &OperatorModel,
    x: &SupportedVector,
    y: &SupportedVector,
    n_max: usize,
) -> Result<Vec<Complex64>, ModelError> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut a = x.clone();
    let mut b = y.clone();
    out.push(a.inner(&b));
    for _ in 0..n_max {
        a = apply(t, &a)?;
        b = apply(t, &b)?;
        out.push(a.inner(&b));
    }
    Ok(out)
}
