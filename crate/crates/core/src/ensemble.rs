//! Seeded random dense matrices used by tests, examples and default probe sets.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{operator_norm, polar_decompose, ComplexMatrix};
use crate::models::{OperatorModel, SupportedVector};

/// Basis vectors used as probes on infinite-dimensional models.
pub const STRUCTURED_BASIS_PROBES: usize = 16;
/// Seeded random probes added on infinite-dimensional models.
pub const STRUCTURED_RANDOM_PROBES: usize = 8;

fn normal_c<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| normal_c(rng)).collect()
}

pub fn gaussian_rect<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| normal_c(rng)).collect();
    ComplexMatrix::from_row_major(rows, cols, data).expect("finite gaussian entries")
}

/// Complex Ginibre matrix.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    gaussian_rect(rng, dim, dim)
}

/// Haar-like unitary from the polar factor of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    loop {
        if let Ok((u, _)) = polar_decompose(&gaussian_matrix(rng, dim)) {
            return u;
        }
    }
}

/// Ginibre matrix rescaled to the given operator norm.
pub fn scaled_gaussian<R: Rng + ?Sized>(rng: &mut R, dim: usize, norm: f64) -> ComplexMatrix {
    let g = gaussian_matrix(rng, dim);
    let n = operator_norm(&g).expect("svd of gaussian");
    g.scale(norm / n)
}

/// `U (V ⊕ C) U*` with `V` a `k`-dimensional unitary and `‖C‖ = inner_norm < 1`.
/// A contraction of norm one whose asymptotic limit is the projection onto
/// the first `k` columns of `U`.
pub fn unitary_plus_contraction<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize, inner_norm: f64) -> ComplexMatrix {
    assert!(k <= dim);
    let mut block = ComplexMatrix::zeros(dim, dim);
    let v = random_unitary(rng, k.max(1));
    for i in 0..k {
        for j in 0..k {
            block[(i, j)] = v[(i, j)];
        }
    }
    if dim > k {
        let c = scaled_gaussian(rng, dim - k, inner_norm);
        for i in 0..dim - k {
            for j in 0..dim - k {
                block[(k + i, k + j)] = c[(i, j)];
            }
        }
    }
    let u = random_unitary(rng, dim);
    u.matmul(&block).matmul(&u.adjoint())
}

/// `D V D⁻¹` with `V` unitary and `D` positive diagonal with `max/min = cond`.
pub fn similar_to_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize, cond: f64) -> ComplexMatrix {
    let v = random_unitary(rng, dim);
    let spread = Uniform::new_inclusive(0.0, 1.0);
    let mut d: Vec<f64> = (0..dim).map(|_| cond.powf(spread.sample(rng))).collect();
    // pin the extremes so the condition number is exactly `cond`
    d[0] = 1.0;
    if dim > 1 {
        d[dim - 1] = cond;
    }
    let mut t = v;
    for i in 0..dim {
        for j in 0..dim {
            t[(i, j)] *= d[i] / d[j];
        }
    }
    t
}

/// Normal matrix `U diag(λ) U*` with eigenvalues in the closed unit disk; a
/// random subset sits on the unit circle.
pub fn random_normal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let u = random_unitary(rng, dim);
    let angle = Uniform::new(0.0, std::f64::consts::TAU);
    let radius = Uniform::new(0.0, 0.9);
    let lambda: Vec<Complex64> = (0..dim)
        .map(|_| {
            let r = if rng.gen_bool(0.5) { 1.0 } else { radius.sample(rng) };
            Complex64::from_polar(r, angle.sample(rng))
        })
        .collect();
    u.matmul(&ComplexMatrix::from_diag(&lambda)).matmul(&u.adjoint())
}

/// Default probe set: the basis of a finite-dimensional model, or the first
/// 16 basis vectors plus 8 seeded random vectors supported on them.
pub fn default_probes(t: &OperatorModel, seed: u64) -> Vec<SupportedVector> {
    match t.dimension() {
        Some(d) => (0..d).map(SupportedVector::basis).collect(),
        None => {
            let mut out: Vec<SupportedVector> = (0..STRUCTURED_BASIS_PROBES).map(SupportedVector::basis).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..STRUCTURED_RANDOM_PROBES {
                let v = SupportedVector::from_dense(&gaussian_vector(&mut rng, STRUCTURED_BASIS_PROBES));
                let n = v.norm();
                out.push(v.scale(Complex64::new(1.0 / n, 0.0)));
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_unitary(&mut rng, 9);
        assert!(u.adjoint().matmul(&u).sub(&ComplexMatrix::identity(9)).max_abs() < 1e-12);
    }

    #[test]
    fn contraction_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = scaled_gaussian(&mut rng, 6, 0.95);
        assert!((operator_norm(&t).unwrap() - 0.95).abs() < 1e-12);
        let t = unitary_plus_contraction(&mut rng, 8, 3, 0.9);
        assert!((operator_norm(&t).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn conjugated_unitary_condition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = similar_to_unitary(&mut rng, 5, 10.0);
        // power bounded by the condition number
        let p = t.pow(50);
        assert!(operator_norm(&p).unwrap() <= 10.0 + 1e-9);
    }
}
