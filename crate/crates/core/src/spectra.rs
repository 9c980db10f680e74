//! Biorthogonal diagonalization of non-Hermitian matrices.
//!
//! A diagonalizable `H` is factored as `H = R·diag(E)·L†` where the columns
//! of `R` are unit-norm right eigenvectors and the columns of `L` are the
//! left eigenvectors scaled so that `L†R = I`. Eigenvalues come from a
//! complex Schur form; eigenvectors are recovered by back-substitution on
//! the triangular factor.

use std::cmp::Ordering;

use nalgebra::linalg::Schur;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c, condition_number, CMat, ComplexMatrix};

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BiorthogonalSystem {
    eigenvalues: Vec<Complex64>,
    right: CMat,
    left: CMat,
    eigvec_cond: f64,
    tolerance: f64,
}

impl BiorthogonalSystem {
    /// Eigenvalues sorted by real part, then imaginary part.
    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    /// Right eigenvectors as columns, each of unit Euclidean norm.
    pub fn right_vectors(&self) -> &CMat {
        &self.right
    }

    /// Left eigenvectors as columns, normalized so that `L†R = I`.
    pub fn left_vectors(&self) -> &CMat {
        &self.left
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectral condition number of the right eigenvector matrix.
    pub fn eigvec_cond(&self) -> f64 {
        self.eigvec_cond
    }

    /// `R·diag(E)·L†`.
    pub fn reconstruct(&self) -> CMat {
        let e = CMat::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        &self.right * e * self.left.adjoint()
    }

    /// Largest columnwise relative residual `‖H r_n − E_n r_n‖ / ‖H‖`.
    pub fn right_residual(&self, h: &CMat) -> f64 {
        let scale = h.norm().max(f64::MIN_POSITIVE);
        (0..self.dim())
            .map(|n| {
                let r = self.right.column(n);
                (h * r - r * self.eigenvalues[n]).norm() / scale
            })
            .fold(0.0, f64::max)
    }

    /// Largest rowwise relative residual `‖l_n† H − E_n l_n†‖ / (‖H‖‖l_n‖)`.
    pub fn left_residual(&self, h: &CMat) -> f64 {
        let scale = h.norm().max(f64::MIN_POSITIVE);
        (0..self.dim())
            .map(|n| {
                let l = self.left.column(n).adjoint();
                (&l * h - &l * self.eigenvalues[n]).norm() / (scale * l.norm())
            })
            .fold(0.0, f64::max)
    }

    /// `‖L†R − I‖_F`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let n = self.dim();
        (self.left.adjoint() * &self.right - CMat::identity(n, n)).norm()
    }
}

/// Diagonalizes `h`, returning eigenvalues and biorthonormal eigenvectors.
///
/// Fails with [`Error::Defective`] when the eigenvector matrix has a
/// condition number above `1/tol`, which happens at and near exceptional
/// points.
pub fn diagonalize(h: &ComplexMatrix, tol: f64) -> Result<BiorthogonalSystem> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let n = h.dim();
    let (q, t) = schur(h.as_matrix())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen_order(&t[(a, a)], &t[(b, b)]));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&k| t[(k, k)]).collect();

    let mut right = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let y = triangular_eigenvector(&t, k);
        let mut v = &q * y;
        let norm = v.norm();
        v /= c(norm, 0.0);
        right.set_column(col, &v);
    }

    let cond = condition_number(&right);
    if !cond.is_finite() || cond > 1.0 / tol {
        return Err(Error::Defective { cond, eigenvalues });
    }
    let Some(r_inv) = right.clone().try_inverse() else {
        return Err(Error::Defective {
            cond: f64::INFINITY,
            eigenvalues,
        });
    };
    let left = r_inv.adjoint();

    Ok(BiorthogonalSystem {
        eigenvalues,
        right,
        left,
        eigvec_cond: cond,
        tolerance: tol,
    })
}

/// Eigenvalues only, in the same order [`diagonalize`] uses. Works for
/// defective matrices.
pub fn eigenvalues(h: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let (_, t) = schur(h.as_matrix())?;
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|k| t[(k, k)]).collect();
    ev.sort_by(eigen_order);
    Ok(ev)
}

/// Returns `(real, max_imag)` where `real` holds iff
/// `max |Im E_n| ≤ tol·max(1, max |E_n|)`.
pub fn spectrum_is_real(sys: &BiorthogonalSystem, tol: f64) -> (bool, f64) {
    reality(sys.eigenvalues(), tol)
}

pub fn reality(eigenvalues: &[Complex64], tol: f64) -> (bool, f64) {
    let max_imag = eigenvalues.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    let max_abs = eigenvalues.iter().map(|e| e.norm()).fold(0.0, f64::max);
    (max_imag <= tol * max_abs.max(1.0), max_imag)
}

/// Exceptional-point diagnostics: `(min_gap, eigvec_cond)`.
///
/// For a 1×1 system there is no pair to compare and `min_gap` is
/// `f64::MAX`.
pub fn ep_proximity(sys: &BiorthogonalSystem) -> (f64, f64) {
    (min_gap(sys.eigenvalues()), sys.eigvec_cond())
}

pub fn min_gap(eigenvalues: &[Complex64]) -> f64 {
    let mut gap = f64::MAX;
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in &eigenvalues[i + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

fn eigen_order(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn schur(m: &CMat) -> Result<(CMat, CMat)> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Unsupported("Schur iteration did not converge".into()))?;
    let (q, mut t) = schur.unpack();
    // The strictly lower triangle holds converged rounding residue.
    for j in 0..t.ncols() {
        for i in j + 1..t.nrows() {
            t[(i, j)] = Complex64::ZERO;
        }
    }
    Ok((q, t))
}

/// Eigenvector of the upper-triangular `t` for eigenvalue `t[k][k]`, with
/// near-zero pivots clamped as in LAPACK's `trevc`.
fn triangular_eigenvector(t: &CMat, k: usize) -> DVector<Complex64> {
    let n = t.nrows();
    let lambda = t[(k, k)];
    let smin = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
    let mut y = DVector::<Complex64>::zeros(n);
    y[k] = Complex64::ONE;
    for i in (0..k).rev() {
        let mut s = Complex64::ZERO;
        for j in i + 1..=k {
            s += t[(i, j)] * y[j];
        }
        let mut denom = t[(i, i)] - lambda;
        if denom.norm() < smin {
            denom = c(smin, 0.0);
        }
        y[i] = -s / denom;
        let big = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if big > 1e150 {
            y /= c(big, 0.0);
        }
    }
    y
}
