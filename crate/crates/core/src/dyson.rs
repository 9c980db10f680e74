//! Dyson maps `Ω` with `Ω†Ω = Θ`, and the transfer of operators between the
//! non-Hermitian working representation and the Hermitian one.
//!
//! The map is always the Hermitian positive square root `Θ^{1/2}`. Any
//! `U·Θ^{1/2}` with unitary `U` factors the same metric; the square root is
//! the representative with `U = I`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matrix::{c, hermitian_part, CMat, ComplexMatrix};
use crate::metric::{quasi_hermiticity_residual, MetricOperator};

/// Metric condition numbers above this are flagged on the map.
pub const ILL_CONDITIONED_METRIC: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct DysonMap {
    omega: ComplexMatrix,
    omega_inv: ComplexMatrix,
    source_metric: MetricOperator,
    metric_cond: f64,
}

impl DysonMap {
    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    pub fn omega_inv(&self) -> &ComplexMatrix {
        &self.omega_inv
    }

    pub fn source_metric(&self) -> &MetricOperator {
        &self.source_metric
    }

    /// Condition number of the factored metric.
    pub fn metric_cond(&self) -> f64 {
        self.metric_cond
    }

    /// Set when the metric is close to singular, as happens near
    /// exceptional points.
    pub fn ill_conditioned(&self) -> bool {
        self.metric_cond > ILL_CONDITIONED_METRIC
    }
}

/// `Ω = Θ^{1/2}` via the eigendecomposition of `Θ`.
pub fn dyson_map(theta: &MetricOperator) -> Result<DysonMap> {
    let eig = hermitian_part(theta.theta()).symmetric_eigen();
    let mu = &eig.eigenvalues;
    if mu.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let u = &eig.eigenvectors;
    let root = DVector::from_iterator(mu.len(), mu.iter().map(|&m| c(m.sqrt(), 0.0)));
    let inv_root = DVector::from_iterator(mu.len(), mu.iter().map(|&m| c(1.0 / m.sqrt(), 0.0)));
    let omega = hermitian_part(&(u * CMat::from_diagonal(&root) * u.adjoint()));
    let omega_inv = hermitian_part(&(u * CMat::from_diagonal(&inv_root) * u.adjoint()));
    Ok(DysonMap {
        omega: ComplexMatrix::from_matrix(omega)?,
        omega_inv: ComplexMatrix::from_matrix(omega_inv)?,
        source_metric: theta.clone(),
        metric_cond: mu.max() / mu.min(),
    })
}

/// The Hermitian isospectral partner `𝔥 = Ω H Ω⁻¹`.
///
/// Fails when the metric behind `map` is not quasi-Hermitian for `h`
/// within `tol`, since `𝔥` would then not be Hermitian.
pub fn hermitize(h: &ComplexMatrix, map: &DysonMap, tol: f64) -> Result<ComplexMatrix> {
    let residual = quasi_hermiticity_residual(h, map.source_metric.theta())?;
    if residual > tol {
        return Err(Error::NotQuasiHermitian { residual });
    }
    ComplexMatrix::from_matrix(map.omega.as_matrix() * h.as_matrix() * map.omega_inv.as_matrix())
}

/// Pulls an operator of the Hermitian representation back to the working
/// space: `V = Ω⁻¹ v Ω`.
pub fn pullback_observable(v: &ComplexMatrix, map: &DysonMap) -> Result<ComplexMatrix> {
    v.ensure_dim(map.omega.dim())?;
    ComplexMatrix::from_matrix(map.omega_inv.as_matrix() * v.as_matrix() * map.omega.as_matrix())
}
