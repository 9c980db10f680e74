#![allow(dead_code)]

use crypto_metric::matrix::CMat;
use crypto_metric::ComplexMatrix;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cm(m: CMat) -> ComplexMatrix {
    ComplexMatrix::from_matrix(m).unwrap()
}

pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).unwrap()
}

pub fn random_complex(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| {
        c(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    })
}

pub fn random_real(rng: &mut impl Rng, n: usize, scale: f64) -> CMat {
    CMat::from_fn(n, n, |_, _| c(rng.random_range(-scale..scale), 0.0))
}

/// Well separated real eigenvalues, ascending.
pub fn random_spectrum(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut e = Vec::with_capacity(n);
    let mut x = rng.random_range(-3.0..-1.0);
    for _ in 0..n {
        e.push(x);
        x += rng.random_range(0.5..1.5);
    }
    e
}

/// `H = S D S⁻¹` with a known metric `Θ = (S S†)⁻¹`.
pub struct Seeded {
    pub h: ComplexMatrix,
    pub theta: ComplexMatrix,
    pub spectrum: Vec<f64>,
    pub s: CMat,
}

pub fn seeded(rng: &mut impl Rng, n: usize, real_only: bool) -> Seeded {
    let spectrum = random_spectrum(rng, n);
    let noise = if real_only {
        random_real(rng, n, 0.4)
    } else {
        random_complex(rng, n, 0.3)
    };
    let s = CMat::identity(n, n) + noise;
    let s_inv = s.clone().try_inverse().unwrap();
    let d = CMat::from_diagonal(&DVector::from_iterator(
        n,
        spectrum.iter().map(|&x| c(x, 0.0)),
    ));
    let h = &s * d * &s_inv;
    let theta = s_inv.adjoint() * &s_inv;
    let theta = (&theta + theta.adjoint()).scale(0.5);
    Seeded {
        h: cm(h),
        theta: cm(theta),
        spectrum,
        s,
    }
}

/// Solves `H†T = TH`, `T = T†`, `r_n†T r_n = κ_n` as one real least-squares
/// problem over the entries of `T`.
pub fn constrained_metric(h: &CMat, r: &[DVector<Complex64>], kappa: &[f64]) -> CMat {
    let n = h.nrows();
    let unknowns = 2 * n * n;
    let rows = 4 * n * n + 2 * n;
    let constraints = |t: &CMat| -> Vec<f64> {
        let qh = h.adjoint() * t - t * h;
        let herm = t - t.adjoint();
        let mut out = Vec::with_capacity(rows);
        for z in qh.iter().chain(herm.iter()) {
            out.push(z.re);
            out.push(z.im);
        }
        for v in r {
            let z = (v.adjoint() * t * v)[(0, 0)];
            out.push(z.re);
            out.push(z.im);
        }
        out
    };
    let mut a = DMatrix::<f64>::zeros(rows, unknowns);
    for k in 0..unknowns {
        let mut basis = CMat::zeros(n, n);
        let idx = k / 2;
        basis[(idx % n, idx / n)] = if k % 2 == 0 { c(1.0, 0.0) } else { c(0.0, 1.0) };
        for (i, x) in constraints(&basis).into_iter().enumerate() {
            a[(i, k)] = x;
        }
    }
    let mut b = DVector::<f64>::zeros(rows);
    for (m, &k) in kappa.iter().enumerate() {
        b[4 * n * n + 2 * m] = k;
    }
    let x = a.svd(true, true).solve(&b, 1e-13).unwrap();
    let t = CMat::from_fn(n, n, |i, j| {
        let idx = 2 * (j * n + i);
        c(x[idx], x[idx + 1])
    });
    (&t + t.adjoint()).scale(0.5)
}

/// Unit right eigenvectors of the two-level KG Hamiltonian, ordered by
/// eigenvalue `−e^τ`, `e^τ`.
pub fn kg_right_vectors(tau: f64) -> Vec<DVector<Complex64>> {
    [-tau.exp(), tau.exp()]
        .iter()
        .map(|&e| {
            let v = DVector::from_vec(vec![c(e, 0.0), c(1.0, 0.0)]);
            let norm = v.norm();
            v / c(norm, 0.0)
        })
        .collect()
}

pub fn rel(a: &CMat, b: &CMat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
