use num_complex::Complex64;

use super::{ComplexMatrix, HermitianMatrix, LinalgError, PsdMatrix, SINGULAR_REL_TOL};

const MAX_SWEEPS: usize = 80;
const ORTHO_TOL: f64 = 1e-15;
// accepted when sweeps run out but the columns are orthogonal to this level
const ORTHO_FALLBACK: f64 = 1e-12;

/// Singular values in descending order, with right singular vectors when requested.
#[derive(Clone, Debug)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// Columns are left singular vectors (only for nonzero singular values
    /// they are meaningful).
    pub left: Option<ComplexMatrix>,
    pub right: Option<ComplexMatrix>,
}

/// One-sided Jacobi (Hestenes) on the columns of `m`.
pub fn svd(m: &ComplexMatrix, want_vectors: bool) -> Result<Svd, LinalgError> {
    let rows = m.rows();
    let n = m.cols();
    // work at unit scale so column norms neither underflow nor overflow
    let scale = match m.max_abs() {
        s if s > 0.0 && s.is_finite() => s,
        _ => 1.0,
    };
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| m.column(j).into_iter().map(|z| z / scale).collect()).collect();
    let mut v: Option<Vec<Vec<Complex64>>> = want_vectors.then(|| {
        (0..n)
            .map(|j| {
                let mut e = vec![Complex64::new(0.0, 0.0); n];
                e[j] = Complex64::new(1.0, 0.0);
                e
            })
            .collect()
    });

    let tol = ORTHO_TOL.max(f64::EPSILON * rows as f64);
    let mut converged = false;
    let mut worst = 0.0;
    for _ in 0..MAX_SWEEPS {
        worst = 0.0f64;
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = cols[i].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g == 0.0 || alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let ratio = g / alpha.sqrt() / beta.sqrt();
                worst = worst.max(ratio);
                if ratio <= tol {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut cols, i, j, phase, c, s, rows);
                if let Some(v) = v.as_mut() {
                    rotate(v, i, j, phase, c, s, n);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged && worst > ORTHO_FALLBACK {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS, off_norm: worst, target: tol });
    }

    let norms: Vec<f64> = cols.iter().map(|c| super::vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let singular_values = order.iter().map(|&k| norms[k] * scale).collect();

    let (left, right) = match v {
        Some(v) => {
            let mut u = ComplexMatrix::zeros(rows, n);
            let mut vm = ComplexMatrix::zeros(n, n);
            for (dst, &src) in order.iter().enumerate() {
                let s = norms[src];
                for r in 0..rows {
                    u[(r, dst)] = if s > 0.0 { cols[src][r] / s } else { Complex64::new(0.0, 0.0) };
                }
                for r in 0..n {
                    vm[(r, dst)] = v[src][r];
                }
            }
            (Some(u), Some(vm))
        }
        None => (None, None),
    };
    Ok(Svd { singular_values, left, right })
}

fn rotate(cols: &mut [Vec<Complex64>], i: usize, j: usize, phase: Complex64, c: f64, s: f64, len: usize) {
    let (lo, hi) = cols.split_at_mut(j);
    let ci = &mut lo[i];
    let cj = &mut hi[0];
    for k in 0..len {
        let a = ci[k];
        let b = cj[k] * phase;
        ci[k] = a * c - b * s;
        cj[k] = a * s + b * c;
    }
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let s = svd(m, false)?;
    Ok(s.singular_values[0])
}

/// Smallest singular value of a square matrix.
pub fn min_singular_value(m: &ComplexMatrix) -> Result<f64, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    if m.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let s = svd(m, false)?;
    Ok(*s.singular_values.last().unwrap())
}

/// Inverse together with the 2-norm condition number it was judged by.
#[derive(Clone, Debug)]
pub struct Inverse {
    pub matrix: ComplexMatrix,
    pub condition: f64,
}

pub fn invert(m: &ComplexMatrix, cond_limit: f64) -> Result<Inverse, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let s = svd(m, false)?;
    let smax = s.singular_values[0];
    let smin = *s.singular_values.last().unwrap();
    if smax == 0.0 || smin <= SINGULAR_REL_TOL * smax {
        return Err(LinalgError::Singular { sigma_min: smin, sigma_max: smax });
    }
    let condition = smax / smin;
    if condition > cond_limit {
        return Err(LinalgError::IllConditioned { condition, limit: cond_limit });
    }
    Ok(Inverse { matrix: lu_inverse(m), condition })
}

// LU with partial pivoting; callers have already ruled out singularity.
fn lu_inverse(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut a = m.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[(x, col)].norm().total_cmp(&a[(y, col)].norm())).unwrap();
        if pivot != col {
            for k in 0..n {
                let t = a[(col, k)];
                a[(col, k)] = a[(pivot, k)];
                a[(pivot, k)] = t;
                let t = inv[(col, k)];
                inv[(col, k)] = inv[(pivot, k)];
                inv[(pivot, k)] = t;
            }
        }
        let d = a[(col, col)];
        for k in 0..n {
            a[(col, k)] /= d;
            inv[(col, k)] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[(r, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..n {
                let ak = a[(col, k)];
                let ik = inv[(col, k)];
                a[(r, k)] -= f * ak;
                inv[(r, k)] -= f * ik;
            }
        }
    }
    inv
}

/// `W = U |W|` with `U` unitary and `|W| = (W*W)^{1/2}`. For singular `W`
/// the unitary is not unique; left singular vectors of singular values below
/// `SINGULAR_REL_TOL·‖W‖` are replaced by an orthonormal completion.
pub fn polar_decompose(w: &ComplexMatrix) -> Result<(ComplexMatrix, PsdMatrix), LinalgError> {
    if !w.is_square() {
        return Err(LinalgError::NotSquare { rows: w.rows(), cols: w.cols() });
    }
    let n = w.rows();
    let s = svd(w, true)?;
    let cutoff = SINGULAR_REL_TOL * s.singular_values[0];
    let rank = s.singular_values.iter().filter(|&&x| x > cutoff).count();
    let mut u = s.left.unwrap();
    complete_columns(&mut u, rank);
    let v = s.right.unwrap();
    let unitary = u.matmul(&v.adjoint());
    let mut vs = v.clone();
    for j in 0..n {
        for i in 0..n {
            vs[(i, j)] *= s.singular_values[j];
        }
    }
    let modulus = HermitianMatrix::new(vs.matmul(&v.adjoint()))?;
    Ok((unitary, PsdMatrix::new(modulus)?))
}

/// Overwrites columns `rank..` of the square `u` so that all columns are
/// orthonormal, assuming the first `rank` already are. Each new column is
/// the standard basis vector with the largest component outside the current
/// span, orthogonalized twice.
fn complete_columns(u: &mut ComplexMatrix, rank: usize) {
    let n = u.rows();
    let project_out = |u: &ComplexMatrix, filled: usize, x: &mut Vec<Complex64>| {
        for _ in 0..2 {
            for k in 0..filled {
                let c: Complex64 = (0..n).map(|r| u[(r, k)].conj() * x[r]).sum();
                for (r, xr) in x.iter_mut().enumerate() {
                    *xr -= c * u[(r, k)];
                }
            }
        }
    };
    for filled in rank..n {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for e in 0..n {
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            x[e] = Complex64::new(1.0, 0.0);
            project_out(u, filled, &mut x);
            let norm = super::vec_norm(&x);
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, x));
            }
        }
        // the complement has dimension n - filled, so some candidate keeps at
        // least 1/√n of its length
        let (norm, x) = best.expect("n > 0");
        for (r, xr) in x.iter().enumerate() {
            u[(r, filled)] = xr / norm;
        }
    }
}
