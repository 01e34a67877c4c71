//! Complex matrix helpers shared by the bundle, potential and holonomy code.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// An `n × n` complex matrix: connection components, Higgs fields, potentials,
/// gauges. Only the connection and Higgs components are constrained to su(n).
pub type Endo = DMatrix<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn zeros(n: usize) -> Endo {
    Endo::zeros(n, n)
}

pub fn identity(n: usize) -> Endo {
    Endo::identity(n, n)
}

pub fn diag(entries: &[Complex64]) -> Endo {
    let n = entries.len();
    let mut m = zeros(n);
    for (k, z) in entries.iter().enumerate() {
        m[(k, k)] = *z;
    }
    m
}

/// `diag(i, -i)`, the generator used by every reducible SU(2) builtin.
pub fn sigma3i() -> Endo {
    diag(&[I, -I])
}

pub fn commutator(a: &Endo, b: &Endo) -> Endo {
    a * b - b * a
}

pub fn scale(a: &Endo, s: f64) -> Endo {
    a.map(|z| z * s)
}

pub fn cscale(a: &Endo, s: Complex64) -> Endo {
    a.map(|z| z * s)
}

pub fn frob(a: &Endo) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator 2-norm (largest singular value).
pub fn op_norm(a: &Endo) -> f64 {
    if a.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Operator norm of `ad(a) = [a, ·]` acting on matrices with the Frobenius norm.
pub fn ad_norm(a: &Endo) -> f64 {
    let n = a.nrows();
    let id = identity(n);
    // vec(a X - X a) = (I ⊗ a - aᵀ ⊗ I) vec(X)
    let k = id.kronecker(a) - a.transpose().kronecker(&id);
    op_norm(&k)
}

/// Anti-hermitian and trace-free.
pub fn su_defect(a: &Endo) -> f64 {
    let ah = frob(&(a + a.adjoint()));
    let tr = a.trace().norm();
    ah.max(tr)
}

pub fn det_abs(a: &Endo) -> f64 {
    a.clone().determinant().norm()
}

pub fn inverse(a: &Endo) -> Option<Endo> {
    a.clone().try_inverse()
}

pub fn mat_exp(a: &Endo) -> Endo {
    a.clone().exp()
}

/// Eigenvalues via complex Schur form, sorted by (re, im) for stable comparison.
pub fn eigenvalues(a: &Endo) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::new(a.clone());
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    ev.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    ev
}

/// Coefficients that can be carried by differential forms: real, complex and
/// matrix-valued.
pub trait Coef: Clone {
    fn scaled(&self, s: f64) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self {
        self.plus(&other.scaled(-1.0))
    }
    fn magnitude_sq(&self) -> f64;
}

impl Coef for f64 {
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn magnitude_sq(&self) -> f64 {
        self * self
    }
}

impl Coef for Complex64 {
    fn scaled(&self, s: f64) -> Self {
        self * s
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn magnitude_sq(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Coef for Endo {
    fn scaled(&self, s: f64) -> Self {
        scale(self, s)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn magnitude_sq(&self) -> f64 {
        let f = frob(self);
        f * f
    }
}

impl Coef for [f64; 3] {
    fn scaled(&self, s: f64) -> Self {
        self.map(|x| x * s)
    }
    fn plus(&self, other: &Self) -> Self {
        [self[0] + other[0], self[1] + other[1], self[2] + other[2]]
    }
    fn magnitude_sq(&self) -> f64 {
        self.iter().map(|x| x * x).sum()
    }
}

impl Coef for [f64; 4] {
    fn scaled(&self, s: f64) -> Self {
        self.map(|x| x * s)
    }
    fn plus(&self, other: &Self) -> Self {
        [0, 1, 2, 3].map(|k| self[k] + other[k])
    }
    fn magnitude_sq(&self) -> f64 {
        self.iter().map(|x| x * x).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_of_diagonals_vanishes() {
        let a = diag(&[c(1.0, 2.0), c(-3.0, 0.5)]);
        let b = sigma3i();
        assert_eq!(frob(&commutator(&a, &b)), 0.0);
    }

    #[test]
    fn ad_norm_of_sigma3i_is_two() {
        // eigenvalues of ad(diag(i,-i)) are 0, 0, ±2i
        assert!((ad_norm(&sigma3i()) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn su_defect_detects_hermitian_part() {
        assert!(su_defect(&sigma3i()) < 1e-15);
        assert!(su_defect(&identity(2)) > 1.0);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let ev = eigenvalues(&diag(&[c(2.0, 0.0), c(-1.0, 1.0)]));
        assert!((ev[0] - c(-1.0, 1.0)).norm() < 1e-12);
        assert!((ev[1] - c(2.0, 0.0)).norm() < 1e-12);
    }
}
