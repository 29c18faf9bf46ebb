use num_complex::Complex64;

use super::{ComplexMatrix, LinalgError, PSD_REL_TOL};

const MAX_SWEEPS: usize = 100;
const OFF_REL_TOL: f64 = 1e-13;

/// Self-adjoint matrix, stored already symmetrized as `(M + M*)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, LinalgError> {
        if !m.is_square() {
            return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let sym = m.add(&m.adjoint()).scale(0.5);
        Ok(HermitianMatrix { inner: sym })
    }

    pub fn identity(dim: usize) -> Self {
        HermitianMatrix { inner: ComplexMatrix::identity(dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix { inner: ComplexMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        HermitianMatrix { inner: ComplexMatrix::from_real_diag(diag) }
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    /// `⟨H x, x⟩`, real up to roundoff.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        super::inner(&self.inner.mul_vec(x), x).re
    }

    /// Spectral norm, `max |λ|`.
    pub fn spectral_norm(&self) -> Result<f64, LinalgError> {
        let e = hermitian_eig(self)?;
        Ok(e.eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
    }
}

/// Hermitian matrix whose eigenvalues are all `≥ -psd_tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdMatrix {
    base: HermitianMatrix,
    min_eigenvalue: f64,
}

impl PsdMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self, LinalgError> {
        let e = hermitian_eig(&h)?;
        let min = e.min_eigenvalue();
        let tol = psd_tol(&e.eigenvalues);
        if min < -tol {
            return Err(LinalgError::NotPsd { min_eigenvalue: min, tolerance: tol });
        }
        Ok(PsdMatrix { base: h, min_eigenvalue: min.max(0.0) })
    }

    pub fn from_matrix(m: ComplexMatrix) -> Result<Self, LinalgError> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn identity(dim: usize) -> Self {
        PsdMatrix { base: HermitianMatrix::identity(dim), min_eigenvalue: 1.0 }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.base.matrix()
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }
}

/// Ascending eigenvalues with orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V f(Λ) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = f(lam);
            if fl == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * fl;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub(crate) fn psd_tol(eigenvalues: &[f64]) -> f64 {
    PSD_REL_TOL * eigenvalues.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Cyclic complex Jacobi sweeps.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = h.dim();
    let mut a: Vec<Complex64> = h.matrix().as_slice().to_vec();
    let mut v = ComplexMatrix::identity(n);
    let norm = h.matrix().frobenius_norm();
    let target = OFF_REL_TOL * norm;

    let off = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off_norm = off(&a);
        if off_norm <= target || norm == 0.0 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps, off_norm, target });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                // phase makes the pivot real, then a real symmetric rotation
                let phase = apq / g;
                let zeta = (aqq - app) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-iθ}, c e^{-iθ}]] on coordinates (p, q)
                let pc = phase.conj();
                let g_pp = Complex64::new(c, 0.0);
                let g_pq = Complex64::new(s, 0.0);
                let g_qp = pc * (-s);
                let g_qq = pc * c;
                // A <- A G (columns)
                for i in 0..n {
                    let aip = a[i * n + p];
                    let aiq = a[i * n + q];
                    a[i * n + p] = aip * g_pp + aiq * g_qp;
                    a[i * n + q] = aip * g_pq + aiq * g_qq;
                }
                // A <- G* A (rows)
                for j in 0..n {
                    let apj = a[p * n + j];
                    let aqj = a[q * n + j];
                    a[p * n + j] = g_pp.conj() * apj + g_qp.conj() * aqj;
                    a[q * n + j] = g_pq.conj() * apj + g_qq.conj() * aqj;
                }
                a[p * n + q] = Complex64::new(0.0, 0.0);
                a[q * n + p] = Complex64::new(0.0, 0.0);
                a[p * n + p] = Complex64::new(app - t * g, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * g, 0.0);
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * g_pp + viq * g_qp;
                    v[(i, q)] = vip * g_pq + viq * g_qq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, k)] = v[(i, src)];
        }
    }
    Ok(EigenDecomposition { eigenvalues, eigenvectors: vectors, sweeps })
}

/// Nonnegative square root; eigenvalues inside `[-psd_tol, 0]` are clamped.
pub fn psd_sqrt(a: &PsdMatrix) -> Result<PsdMatrix, LinalgError> {
    let e = hermitian_eig(a.hermitian())?;
    let tol = psd_tol(&e.eigenvalues);
    if e.min_eigenvalue() < -tol {
        return Err(LinalgError::NotPsd { min_eigenvalue: e.min_eigenvalue(), tolerance: tol });
    }
    let root = e.reconstruct_with(|l| if l <= 0.0 { 0.0 } else { l.sqrt() });
    Ok(PsdMatrix { base: HermitianMatrix::new(root)?, min_eigenvalue: e.min_eigenvalue().max(0.0).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_input_sorted() {
        let h = HermitianMatrix::from_real_diag(&[3.0, 1.0]);
        let e = hermitian_eig(&h).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
        assert!((e.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swap_matrix_spectrum() {
        let h = HermitianMatrix::new(ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap();
        let e = hermitian_eig(&h).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dim in [1, 2, 5, 16, 33] {
            let g = ensemble::gaussian_matrix(&mut rng, dim);
            let h = HermitianMatrix::new(g).unwrap();
            let e = hermitian_eig(&h).unwrap();
            let norm = h.matrix().frobenius_norm();
            let recon = e.reconstruct_with(|l| l).sub(h.matrix()).frobenius_norm();
            assert!(recon <= 1e-10 * norm, "dim {dim}: {recon}");
            let v = &e.eigenvectors;
            let ortho = v.adjoint().matmul(v).sub(&ComplexMatrix::identity(dim)).max_abs();
            assert!(ortho < 1e-12);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn sqrt_of_diagonal() {
        let a = PsdMatrix::new(HermitianMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
        let r = psd_sqrt(&a).unwrap();
        let want = ComplexMatrix::from_real_diag(&[2.0, 3.0]);
        assert!(r.matrix().sub(&want).max_abs() < 1e-14);
        let i = psd_sqrt(&PsdMatrix::identity(3)).unwrap();
        assert!(i.matrix().sub(&ComplexMatrix::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn sqrt_preserves_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = ensemble::gaussian_rect(&mut rng, 3, 7);
        let a = PsdMatrix::from_matrix(b.adjoint().matmul(&b)).unwrap();
        let r = psd_sqrt(&a).unwrap();
        let e = hermitian_eig(r.hermitian()).unwrap();
        let top = e.max_eigenvalue();
        let rank = e.eigenvalues.iter().filter(|&&l| l > 1e-6 * top).count();
        assert_eq!(rank, 3);
        let sq = r.matrix().matmul(r.matrix()).sub(a.matrix()).frobenius_norm();
        assert!(sq <= 1e-9 * a.matrix().frobenius_norm());
    }

    #[test]
    fn rejects_indefinite() {
        let h = HermitianMatrix::from_real_diag(&[1.0, -0.5]);
        assert!(matches!(PsdMatrix::new(h), Err(LinalgError::NotPsd { .. })));
        // tiny negative roundoff is clamped
        let p = PsdMatrix::new(HermitianMatrix::from_real_diag(&[1.0, -1e-14])).unwrap();
        assert_eq!(p.min_eigenvalue(), 0.0);
    }
}
