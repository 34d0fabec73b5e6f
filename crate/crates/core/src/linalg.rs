//! Small complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative diagonal loading used when a Hermitian system is numerically singular.
pub const DIAGONAL_LOADING: f64 = 1e-8;

/// Cholesky factor of a Hermitian PSD matrix, diagonally loaded if needed.
#[derive(Debug, Clone)]
pub struct HermitianFactor {
    chol: Cholesky<Complex64, Dyn>,
    /// Diagonal loading that had to be added, if any.
    pub loading: Option<f64>,
}

impl HermitianFactor {
    /// Factors `a`; when the factorization fails the diagonal is loaded with
    /// `1e-8 * tr(A) / n`, growing tenfold until it succeeds.
    pub fn new(a: &CMat) -> Self {
        if let Some(chol) = a.clone().cholesky() {
            return Self { chol, loading: None };
        }
        let n = a.nrows().max(1);
        let trace: f64 = (0..a.nrows()).map(|i| a[(i, i)].re.abs()).sum();
        let mut delta = DIAGONAL_LOADING * (trace / n as f64).max(f64::MIN_POSITIVE);
        loop {
            let mut loaded = a.clone();
            for i in 0..a.nrows() {
                loaded[(i, i)] += delta;
            }
            if let Some(chol) = loaded.cholesky() {
                return Self {
                    chol,
                    loading: Some(delta),
                };
            }
            delta *= 10.0;
        }
    }

    pub fn solve(&self, b: &CVec) -> CVec {
        self.chol.solve(b)
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> CMat {
        self.chol.inverse()
    }
}

/// Outcome of a Hermitian positive-definite solve.
#[derive(Debug, Clone)]
pub struct HermitianSolve {
    pub x: CVec,
    /// Diagonal loading that had to be added, if any.
    pub loading: Option<f64>,
}

/// Solves `A x = b` for Hermitian PSD `A` (see [`HermitianFactor`]).
pub fn solve_hermitian(a: &CMat, b: &CVec) -> HermitianSolve {
    let f = HermitianFactor::new(a);
    HermitianSolve {
        x: f.solve(b),
        loading: f.loading,
    }
}

/// Inverse of a Hermitian PSD matrix with the loading policy of [`HermitianFactor`].
pub fn inverse_hermitian(a: &CMat) -> (CMat, Option<f64>) {
    let f = HermitianFactor::new(a);
    (f.inverse(), f.loading)
}

/// Replaces `m` by `(m + m^H) / 2`.
pub fn hermitize(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `x^H y`.
pub fn dot_h(x: &CVec, y: &CVec) -> Complex64 {
    x.dotc(y)
}

/// Squared Euclidean norm.
pub fn norm_sqr(x: &CVec) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Real Hermitian form `x^H A x`.
pub fn quad_form(a: &CMat, x: &CVec) -> f64 {
    x.dotc(&(a * x)).re
}

/// Adds `x x^H` scaled by `w` into `acc`.
pub fn add_outer(acc: &mut CMat, x: &CVec, w: f64) {
    acc.gerc(Complex64::new(w, 0.0), x, x, ONE);
}

/// Identity matrix of size `n`.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Complex vector from real parts.
pub fn from_real(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Keeps the real part of every entry.
pub fn real_part_mat(m: &CMat) -> CMat {
    m.map(|z| Complex64::new(z.re, 0.0))
}

/// Keeps the real part of every entry.
pub fn real_part_vec(v: &CVec) -> CVec {
    v.map(|z| Complex64::new(z.re, 0.0))
}
