//! Order-by-order perturbative metrics for `H + λW_λ`.
//!
//! With `W_λ = Σ_j λ^j W^(j)` and `T_λ = Σ_k λ^k T^(k)`, `T^(0) = Θ`, the
//! crypto-Hermiticity constraint `(H† + λW_λ†)T_λ = T_λ(H + λW_λ)` splits
//! into the hierarchy
//!
//! ```text
//! H†T^(k) − T^(k)H = Σ_{j<k} [ T^(j) W^(k−1−j) − (W^(k−1−j))† T^(j) ]
//! ```
//!
//! In the biorthogonal basis of `H` (writing `T = L Y L†`) each order
//! decouples into `(E_m − E_n) Y_mn = (R† RHS R)_mn`. The diagonal of the
//! right-hand side must vanish (solvability); it equals `2i κ_n Im(dE_n/dλ)`
//! at first order, so a nonzero diagonal means the perturbation pushes
//! energies off the real axis. The diagonal of `Y` is the metric ambiguity
//! and is fixed to zero for `k ≥ 1`, which keeps the unperturbed weights.
//!
//! The Dyson correction `Δ_λ` of `Ω_λ = Ω(1 + λΔ_λ)` is recovered in the
//! gauge where `ΘΔ^(k)` is Hermitian; only `Δ_0` and `Δ^(1)` are built.

use crate::error::{Error, Result};
use crate::matrix::{hermitian_part, relative, CMat, ComplexMatrix};
use crate::metric::{check_real_nondegenerate, quasi_hermiticity_residual, MetricOperator};
use crate::spectra::{self, BiorthogonalSystem};

/// `1 + λΔ` with a condition number above this is treated as singular.
pub const RESOLVENT_COND_LIMIT: f64 = 1e12;

/// Gauge tag carried by every [`MetricSeries`].
pub const DIAGONAL_GAUGE: &str = "zero biorthogonal diagonal for k >= 1";

#[derive(Debug, Clone)]
pub struct PerturbationProblem {
    h: ComplexMatrix,
    theta: MetricOperator,
    w_coeffs: Vec<ComplexMatrix>,
    system: BiorthogonalSystem,
    tol: f64,
}

impl PerturbationProblem {
    /// `w_coeffs` holds `[W_0, W^(1), ...]`; missing higher coefficients
    /// are zero.
    pub fn new(
        h: &ComplexMatrix,
        theta: MetricOperator,
        w_coeffs: Vec<ComplexMatrix>,
        tol: f64,
    ) -> Result<Self> {
        let n = h.dim();
        theta.theta().ensure_dim(n)?;
        for w in &w_coeffs {
            w.ensure_dim(n)?;
        }
        let system = spectra::diagonalize(h, tol)?;
        check_real_nondegenerate(&system)?;
        let residual = quasi_hermiticity_residual(h, theta.theta())?;
        if residual > tol {
            return Err(Error::NotQuasiHermitian { residual });
        }
        Ok(Self {
            h: h.clone(),
            theta,
            w_coeffs,
            system,
            tol,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn metric(&self) -> &MetricOperator {
        &self.theta
    }

    pub fn system(&self) -> &BiorthogonalSystem {
        &self.system
    }

    pub fn w_coeffs(&self) -> &[ComplexMatrix] {
        &self.w_coeffs
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// `W^(j)`, zero past the supplied coefficients.
    pub fn w(&self, j: usize) -> CMat {
        self.w_coeffs
            .get(j)
            .map(|w| w.as_matrix().clone())
            .unwrap_or_else(|| CMat::zeros(self.dim(), self.dim()))
    }

    /// `W_λ = Σ_j λ^j W^(j)`.
    pub fn w_at(&self, lambda: f64) -> CMat {
        let n = self.dim();
        self.w_coeffs
            .iter()
            .rev()
            .fold(CMat::zeros(n, n), |acc, w| {
                acc.scale(lambda) + w.as_matrix()
            })
    }

    /// `H + λW_λ`.
    pub fn perturbed_hamiltonian(&self, lambda: f64) -> Result<ComplexMatrix> {
        ComplexMatrix::from_matrix(self.h.as_matrix() + self.w_at(lambda).scale(lambda))
    }

    /// Unperturbed weights `κ_n = R_n† Θ R_n`.
    pub fn weights(&self) -> Vec<f64> {
        let r = self.system.right_vectors();
        let theta = self.theta.theta().as_matrix();
        (0..self.dim())
            .map(|n| {
                let rn = r.column(n);
                (rn.adjoint() * theta * rn)[(0, 0)].re
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    coeffs: Vec<ComplexMatrix>,
    gauge: &'static str,
    residuals: Vec<f64>,
}

impl MetricSeries {
    /// The zeroth-order series `[Θ]`.
    pub fn leading(theta: &MetricOperator) -> Self {
        Self {
            coeffs: vec![theta.theta().clone()],
            gauge: DIAGONAL_GAUGE,
            residuals: vec![0.0],
        }
    }

    /// `[T^(0), ..., T^(K)]`.
    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    pub fn gauge(&self) -> &'static str {
        self.gauge
    }

    /// Solvability residual per order; zero for order 0.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn push(&mut self, t: ComplexMatrix, residual: f64) {
        self.coeffs.push(t);
        self.residuals.push(residual);
    }

    /// Truncated sum `Σ_{k≤K} λ^k T^(k)`.
    pub fn evaluate(&self, lambda: f64) -> CMat {
        let n = self.coeffs[0].dim();
        self.coeffs.iter().rev().fold(CMat::zeros(n, n), |acc, t| {
            acc.scale(lambda) + t.as_matrix()
        })
    }

    /// Largest `|R_n† T^(k) R_n|` over `k ≥ 1`.
    pub fn gauge_defect(&self, system: &BiorthogonalSystem) -> f64 {
        let r = system.right_vectors();
        self.coeffs[1..]
            .iter()
            .flat_map(|t| {
                (0..system.dim()).map(move |n| {
                    let rn = r.column(n);
                    (rn.adjoint() * t.as_matrix() * rn)[(0, 0)].norm()
                })
            })
            .fold(0.0, f64::max)
    }
}

/// Solves the order-`k` relation for `T^(k)`, given `T^(0..k−1)` in `lower`.
///
/// Returns the symmetrized solution and a residual that adds the relative
/// solvability defect to the relative anti-Hermitian part discarded by
/// symmetrization.
pub fn solve_order(
    problem: &PerturbationProblem,
    k: usize,
    lower: &MetricSeries,
) -> Result<(ComplexMatrix, f64)> {
    if k == 0 {
        return Err(Error::Unsupported(
            "order 0 is the unperturbed metric".into(),
        ));
    }
    if lower.coeffs.len() < k {
        return Err(Error::Unsupported(format!(
            "order {k} needs {k} lower coefficients, got {}",
            lower.coeffs.len()
        )));
    }
    let n = problem.dim();
    let mut rhs = CMat::zeros(n, n);
    let mut scale = 0.0;
    for (j, t) in lower.coeffs[..k].iter().enumerate() {
        let w = problem.w(k - 1 - j);
        let t = t.as_matrix();
        rhs += t * &w - w.adjoint() * t;
        scale += t.norm() * w.norm();
    }
    let system = &problem.system;
    let r = system.right_vectors();
    let l = system.left_vectors();
    let z = r.adjoint() * &rhs * r;
    scale *= r.norm_squared();

    let kernel = z.diagonal().norm();
    let kernel_rel = if kernel == 0.0 { 0.0 } else { kernel / scale };
    if kernel_rel > problem.tol {
        return Err(Error::SolvabilityViolated {
            order: k,
            residual: kernel_rel,
        });
    }

    let e = system.eigenvalues();
    let y = CMat::from_fn(n, n, |m, p| {
        if m == p {
            num_complex::Complex64::ZERO
        } else {
            z[(m, p)] / (e[m].re - e[p].re)
        }
    });
    let x = l * y * l.adjoint();
    let asym = relative(&(&x - x.adjoint()), &x) / 2.0;
    Ok((
        ComplexMatrix::from_matrix(hermitian_part(&x))?,
        kernel_rel + asym,
    ))
}

/// `T^(0..K)` by repeated [`solve_order`].
pub fn metric_series(problem: &PerturbationProblem, order: usize) -> Result<MetricSeries> {
    let mut series = MetricSeries::leading(&problem.theta);
    for k in 1..=order {
        let (t, residual) = solve_order(problem, k, &series)?;
        series.push(t, residual);
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DysonSeries {
    coeffs: Vec<ComplexMatrix>,
}

impl DysonSeries {
    /// `[Δ_0, Δ^(1)]`, as far as the metric series allowed.
    pub fn coeffs(&self) -> &[ComplexMatrix] {
        &self.coeffs
    }

    /// `Δ^(k)`; orders beyond one are not reconstructed.
    pub fn delta(&self, k: usize) -> Result<&ComplexMatrix> {
        if k >= 2 {
            return Err(Error::Unsupported(format!(
                "Dyson correction of order {k} is not reconstructed"
            )));
        }
        self.coeffs.get(k).ok_or_else(|| {
            Error::Unsupported(format!("metric series too short for Delta order {k}"))
        })
    }

    /// `Δ_0 + λΔ^(1)` (truncated).
    pub fn evaluate(&self, lambda: f64) -> CMat {
        let n = self.coeffs.first().map_or(0, |d| d.dim());
        self.coeffs.iter().rev().fold(CMat::zeros(n, n), |acc, d| {
            acc.scale(lambda) + d.as_matrix()
        })
    }
}

/// `Δ_0 = ½Θ⁻¹T^(1)` and `Δ^(1) = ½Θ⁻¹(T^(2) − Δ_0†ΘΔ_0)`.
pub fn dyson_from_metric(series: &MetricSeries, theta: &MetricOperator) -> Result<DysonSeries> {
    let th = theta.theta().as_matrix();
    let chol = th.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let mut coeffs = Vec::new();
    if let Some(t1) = series.coeffs.get(1) {
        let d0 = chol.solve(t1.as_matrix()).scale(0.5);
        if let Some(t2) = series.coeffs.get(2) {
            let inner = t2.as_matrix() - d0.adjoint() * th * &d0;
            let d1 = chol.solve(&inner).scale(0.5);
            coeffs.push(ComplexMatrix::from_matrix(d0)?);
            coeffs.push(ComplexMatrix::from_matrix(d1)?);
        } else {
            coeffs.push(ComplexMatrix::from_matrix(d0)?);
        }
    }
    Ok(DysonSeries { coeffs })
}

/// Solves `W̃_0†Θ = ΘW̃_0` with `W̃_0 = W_0 + Δ_0H − HΔ_0` for `Δ_0` directly
/// in the biorthogonal basis, in the gauge where `ΘΔ_0` is Hermitian with
/// zero biorthogonal diagonal.
pub fn leading_delta(
    w0: &ComplexMatrix,
    h: &ComplexMatrix,
    theta: &MetricOperator,
    tol: f64,
) -> Result<ComplexMatrix> {
    let n = h.dim();
    w0.ensure_dim(n)?;
    let system = spectra::diagonalize(h, tol)?;
    check_real_nondegenerate(&system)?;
    let residual = quasi_hermiticity_residual(h, theta.theta())?;
    if residual > tol {
        return Err(Error::NotQuasiHermitian { residual });
    }
    let r = system.right_vectors();
    let l = system.left_vectors();
    let th = theta.theta().as_matrix();
    let kappa: Vec<f64> = (0..n)
        .map(|m| {
            let rm = r.column(m);
            (rm.adjoint() * th * rm)[(0, 0)].re
        })
        .collect();

    // c = K·(L†W_0R); W̃_0 is Θ-quasi-Hermitian iff K·(L†W̃_0R) is Hermitian.
    let omega = l.adjoint() * w0.as_matrix() * r;
    let cw = CMat::from_fn(n, n, |m, p| omega[(m, p)] * kappa[m]);
    let scale = th.norm() * w0.frobenius_norm() * r.norm_squared();
    let kernel = 2.0 * (0..n).map(|m| cw[(m, m)].im.powi(2)).sum::<f64>().sqrt();
    let kernel_rel = if kernel == 0.0 { 0.0 } else { kernel / scale };
    if kernel_rel > tol {
        return Err(Error::SolvabilityViolated {
            order: 1,
            residual: kernel_rel,
        });
    }

    let e = system.eigenvalues();
    let d = CMat::from_fn(n, n, |m, p| {
        if m == p {
            num_complex::Complex64::ZERO
        } else {
            (cw[(p, m)].conj() - cw[(m, p)]) / (2.0 * (e[p].re - e[m].re) * kappa[m])
        }
    });
    ComplexMatrix::from_matrix(r * d * l.adjoint())
}

fn resolvent(delta: &ComplexMatrix, lambda: f64) -> Result<(CMat, CMat)> {
    let n = delta.dim();
    let a = CMat::identity(n, n) + delta.as_matrix().scale(lambda);
    let cond = crate::matrix::condition_number(&a);
    if !(cond <= RESOLVENT_COND_LIMIT) {
        return Err(Error::SingularResolvent { cond });
    }
    let inv = a
        .clone()
        .try_inverse()
        .ok_or(Error::SingularResolvent { cond })?;
    Ok((a, inv))
}

/// `V = (1+λΔ)W(1+λΔ)⁻¹ + (ΔH − HΔ)(1+λΔ)⁻¹`.
pub fn v_from_w(
    w: &ComplexMatrix,
    delta: &ComplexMatrix,
    h: &ComplexMatrix,
    lambda: f64,
) -> Result<ComplexMatrix> {
    let n = h.dim();
    w.ensure_dim(n)?;
    delta.ensure_dim(n)?;
    let (a, a_inv) = resolvent(delta, lambda)?;
    let (d, hm) = (delta.as_matrix(), h.as_matrix());
    ComplexMatrix::from_matrix((&a * w.as_matrix() + d * hm - hm * d) * a_inv)
}

/// Inverse of [`v_from_w`]: `W = (1+λΔ)⁻¹[V(1+λΔ) + HΔ − ΔH]`.
pub fn w_from_v(
    v: &ComplexMatrix,
    delta: &ComplexMatrix,
    h: &ComplexMatrix,
    lambda: f64,
) -> Result<ComplexMatrix> {
    let n = h.dim();
    v.ensure_dim(n)?;
    delta.ensure_dim(n)?;
    let (a, a_inv) = resolvent(delta, lambda)?;
    let (d, hm) = (delta.as_matrix(), h.as_matrix());
    ComplexMatrix::from_matrix(a_inv * (v.as_matrix() * &a + hm * d - d * hm))
}

/// `‖(H + λV)(1+λΔ) − (1+λΔ)(H + λW)‖_F`, relative to `‖H‖_F`.
pub fn intertwining_residual(
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    delta: &ComplexMatrix,
    h: &ComplexMatrix,
    lambda: f64,
) -> f64 {
    let n = h.dim();
    let a = CMat::identity(n, n) + delta.as_matrix().scale(lambda);
    let hm = h.as_matrix();
    let lhs = (hm + v.as_matrix().scale(lambda)) * &a;
    let rhs = &a * (hm + w.as_matrix().scale(lambda));
    relative(&(lhs - rhs), hm)
}

/// `‖(V − W) − (Δ_0H − HΔ_0)‖_F`.
pub fn commutator_gap(
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    delta0: &ComplexMatrix,
    h: &ComplexMatrix,
) -> Result<f64> {
    let n = h.dim();
    for m in [v, w, delta0] {
        m.ensure_dim(n)?;
    }
    let (d, hm) = (delta0.as_matrix(), h.as_matrix());
    Ok((v.as_matrix() - w.as_matrix() - (d * hm - hm * d)).norm())
}

/// Builds `V_λ` from `W_λ` and tests `V†Θ = ΘV`.
///
/// Returns `(admissible, residual)` with
/// `residual = ‖V†Θ − ΘV‖_F / (‖V‖_F‖Θ‖_F)`.
pub fn hidden_hermiticity_test(
    w: &ComplexMatrix,
    delta: &ComplexMatrix,
    h: &ComplexMatrix,
    theta: &MetricOperator,
    lambda: f64,
    tol: f64,
) -> Result<(bool, f64)> {
    theta.theta().ensure_dim(h.dim())?;
    let v = v_from_w(w, delta, h, lambda)?;
    let th = theta.theta().as_matrix();
    let defect = v.adjoint().as_matrix() * th - th * v.as_matrix();
    let residual = if defect.norm() == 0.0 {
        0.0
    } else {
        defect.norm() / (v.frobenius_norm() * th.norm())
    };
    Ok((residual <= tol, residual))
}
