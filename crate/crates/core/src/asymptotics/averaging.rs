use crate::linalg::ComplexMatrix;

/// Repeated squares `P_k = T^(2^k)` of a square matrix, for averaging
/// `Y ↦ (1/N) Σ_{k<N} T*ᵏ Y Tᵏ` at `N = 2^K` in `K` steps.
#[derive(Clone, Debug)]
pub(crate) struct Doubling {
    powers: Vec<ComplexMatrix>,
}

impl Doubling {
    pub fn new(t: &ComplexMatrix) -> Self {
        Doubling { powers: vec![t.clone()] }
    }

    /// `T^(2^k)`, extending the table as needed.
    pub fn power(&mut self, k: usize) -> &ComplexMatrix {
        while self.powers.len() <= k {
            let last = self.powers.last().unwrap();
            let next = last.matmul(last);
            self.powers.push(next);
        }
        &self.powers[k]
    }

    pub fn finite_through(&mut self, k: usize) -> bool {
        self.power(k).is_finite()
    }

    /// `(1/N) Σ_{k<N} T*ᵏ Y Tᵏ` with `N = 2^levels`, built from
    /// `S_{2m}(Y) = (S_m(Y) + P* S_m(Y) P) / 2`, `P = T^m`.
    pub fn average(&mut self, y: &ComplexMatrix, levels: usize) -> ComplexMatrix {
        let mut s = y.clone();
        for k in 0..levels {
            let p = self.power(k);
            let moved = p.congruence(&s);
            s = s.add(&moved).scale(0.5);
            s = hermitian_part(&s);
        }
        s
    }

    /// `T*ᴺ S_N(S_N(S_N(Y))) Tᴺ`: three nested averages followed by a shift
    /// past the first `N` powers. Oscillating terms shrink like `N⁻³` and
    /// decaying terms are dropped by the shift, while the invariant part of
    /// `Y` is preserved.
    pub fn smoothed(&mut self, y: &ComplexMatrix, levels: usize) -> ComplexMatrix {
        let mut s = y.clone();
        for _ in 0..3 {
            s = self.average(&s, levels);
        }
        let p = self.power(levels);
        hermitian_part(&p.congruence(&s))
    }
}

pub(crate) fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    m.add(&m.adjoint()).scale(0.5)
}
