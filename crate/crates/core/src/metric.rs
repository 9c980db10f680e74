//! Metric operators `Θ` with `H†Θ = ΘH`, their ambiguity, and its removal.
//!
//! For a Hamiltonian with real non-degenerate spectrum every Hermitian
//! solution of the quasi-Hermiticity relation has the form
//! `Θ(κ) = Σ κ_n L_n L_n†` with real weights `κ_n`, where `L_n` are the left
//! eigenvectors of `H`. Positive weights give positive-definite metrics.
//! The weights are recovered from a metric as `κ_n = R_n† Θ R_n`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{c, hermitian_eigenvalues, hermitian_part, CMat, ComplexMatrix};
use crate::spectra::{self, BiorthogonalSystem};

/// A Hermitian positive-definite inner-product metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOperator {
    theta: ComplexMatrix,
    source_tol: f64,
    smallest_eigenvalue: f64,
}

impl MetricOperator {
    /// Validates Hermiticity and positive definiteness of `theta`.
    pub fn from_hermitian(theta: ComplexMatrix, tol: f64) -> Result<Self> {
        let defect = theta.hermitian_defect();
        if defect > tol {
            return Err(Error::NotHermitian(defect));
        }
        let theta = ComplexMatrix::from_matrix(hermitian_part(&theta))?;
        let smallest = hermitian_eigenvalues(&theta)[0];
        if !(smallest > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            theta,
            source_tol: tol,
            smallest_eigenvalue: smallest,
        })
    }

    /// Validates `theta` as a metric for `h`: Hermitian, positive definite
    /// and quasi-Hermitian for `h` within `tol`.
    pub fn new(theta: ComplexMatrix, h: &ComplexMatrix, tol: f64) -> Result<Self> {
        let metric = Self::from_hermitian(theta, tol)?;
        let residual = quasi_hermiticity_residual(h, &metric.theta)?;
        if residual > tol {
            return Err(Error::NotQuasiHermitian { residual });
        }
        Ok(metric)
    }

    pub fn theta(&self) -> &ComplexMatrix {
        &self.theta
    }

    pub fn source_tol(&self) -> f64 {
        self.source_tol
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        self.smallest_eigenvalue
    }

    pub fn dim(&self) -> usize {
        self.theta.dim()
    }
}

/// All metrics of a Hamiltonian with real, non-degenerate spectrum.
#[derive(Debug, Clone)]
pub struct MetricFamily {
    h: ComplexMatrix,
    system: BiorthogonalSystem,
}

impl MetricFamily {
    pub fn new(h: &ComplexMatrix, tol: f64) -> Result<Self> {
        let system = spectra::diagonalize(h, tol)?;
        Self::from_system(h.clone(), system)
    }

    pub fn from_system(h: ComplexMatrix, system: BiorthogonalSystem) -> Result<Self> {
        h.ensure_dim(system.dim())?;
        check_real_nondegenerate(&system)?;
        Ok(Self { h, system })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn system(&self) -> &BiorthogonalSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// The projector-like term `L_n L_n†`.
    pub fn component(&self, n: usize) -> CMat {
        let l = self.system.left_vectors().column(n);
        l * l.adjoint()
    }

    /// Weights `κ_n = R_n† Θ R_n` of a metric in this family.
    pub fn weights_of(&self, theta: &CMat) -> Vec<f64> {
        let r = self.system.right_vectors();
        (0..self.dim())
            .map(|n| {
                let rn = r.column(n);
                (rn.adjoint() * theta * rn)[(0, 0)].re
            })
            .collect()
    }
}

/// Fails unless the spectrum is real and its smallest gap exceeds
/// `tol·max(1, max |E|)`.
pub(crate) fn check_real_nondegenerate(system: &BiorthogonalSystem) -> Result<()> {
    let tol = system.tolerance();
    let (real, max_imag) = spectra::spectrum_is_real(system, tol);
    if !real {
        return Err(Error::ComplexSpectrum { max_imag });
    }
    let scale = system
        .eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(1.0, f64::max);
    let (gap, _) = spectra::ep_proximity(system);
    if gap <= tol * scale {
        return Err(Error::DegenerateSpectrum { min_gap: gap });
    }
    Ok(())
}

/// `Θ(κ) = Σ κ_n L_n L_n†`.
pub fn assemble_metric(family: &MetricFamily, kappa: &[f64]) -> Result<MetricOperator> {
    if kappa.len() != family.dim() {
        return Err(Error::WeightCount {
            expected: family.dim(),
            found: kappa.len(),
        });
    }
    if let Some((index, &value)) = kappa.iter().enumerate().find(|(_, &k)| !(k > 0.0)) {
        return Err(Error::NonPositiveWeight { index, value });
    }
    let l = family.system.left_vectors();
    let mut scaled = l.clone();
    for (n, &k) in kappa.iter().enumerate() {
        scaled.column_mut(n).scale_mut(k);
    }
    let theta = ComplexMatrix::from_matrix(hermitian_part(&(scaled * l.adjoint())))?;
    MetricOperator::new(theta, &family.h, family.system.tolerance().max(1e-12))
}

/// `‖H†Θ − ΘH‖_F / (‖H‖_F ‖Θ‖_F)`.
pub fn quasi_hermiticity_residual(h: &ComplexMatrix, theta: &ComplexMatrix) -> Result<f64> {
    theta.ensure_dim(h.dim())?;
    let lhs = h.adjoint().as_matrix() * theta.as_matrix() - theta.as_matrix() * h.as_matrix();
    let scale = h.frobenius_norm() * theta.frobenius_norm();
    Ok(if lhs.norm() == 0.0 {
        0.0
    } else {
        lhs.norm() / scale
    })
}

/// Finds the unique weight vector (normalized to `κ_1 = 1`) for which every
/// observable `Λ_j` satisfies `Λ_j†Θ(κ) = Θ(κ)Λ_j`.
///
/// The constraints are linear and homogeneous in `κ`; their real and
/// imaginary parts are stacked and the null space is read off an SVD with
/// rank threshold `tol·σ_max`.
pub fn fix_ambiguity(
    family: &MetricFamily,
    observables: &[ComplexMatrix],
    tol: f64,
) -> Result<Vec<f64>> {
    let n = family.dim();
    for obs in observables {
        obs.ensure_dim(n)?;
    }
    let components: Vec<CMat> = (0..n).map(|k| family.component(k)).collect();
    let rows = 2 * n * n * observables.len().max(1);
    let mut a = DMatrix::<f64>::zeros(rows, n);
    for (j, obs) in observables.iter().enumerate() {
        let obs_adj = obs.adjoint();
        for (k, p) in components.iter().enumerate() {
            let constraint = obs_adj.as_matrix() * p - p * obs.as_matrix();
            for (idx, z) in constraint.iter().enumerate() {
                let row = 2 * (j * n * n + idx);
                a[(row, k)] = z.re;
                a[(row + 1, k)] = z.im;
            }
        }
    }

    // Constraints that vanish up to rounding (e.g. Λ = H) must not set the
    // rank scale, so σ_max is floored by the natural size of the entries.
    let reference = observables
        .iter()
        .map(|o| o.frobenius_norm())
        .fold(0.0, f64::max)
        * components.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let threshold = tol * sigma.max().max(reference);
    let null: Vec<usize> = (0..sigma.len())
        .filter(|&i| sigma[i] <= threshold)
        .collect();
    match null.len() {
        0 => return Err(Error::Inconsistent),
        1 => {}
        nullity => return Err(Error::Underdetermined { nullity }),
    }

    let mut v: Vec<f64> = v_t.row(null[0]).iter().copied().collect();
    let pivot = v
        .iter()
        .copied()
        .max_by(|x, y| x.abs().total_cmp(&y.abs()))
        .unwrap_or(0.0);
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    let largest = pivot.abs();
    if v.iter().any(|&x| x <= tol * largest) {
        return Err(Error::NoPositiveSolution);
    }
    let first = v[0];
    Ok(v.into_iter().map(|x| x / first).collect())
}

/// The two-level Klein-Gordon toy Hamiltonian `[[0, e^{2τ}], [1, 0]]`.
pub fn kg_hamiltonian(tau: f64) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, (2.0 * tau).exp()], &[1.0, 0.0]])
        .expect("finite tau gives finite entries")
}

/// The general metric `[[e^{−τ}, β], [β, e^{τ}]]` of [`kg_hamiltonian`].
pub fn kg_metric(tau: f64, beta: f64) -> Result<MetricOperator> {
    if !(beta.abs() < 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    let theta = ComplexMatrix::from_real_rows(&[&[(-tau).exp(), beta], &[beta, tau.exp()]])?;
    MetricOperator::new(theta, &kg_hamiltonian(tau), 1e-12)
}

/// `β = (c e^{τ} − b e^{−τ}) / (d − a)` for the real observable
/// `[[a, b], [c, d]]`.
pub fn kg_beta(a: f64, b: f64, c_: f64, d: f64, tau: f64) -> Result<f64> {
    if d == a {
        return Err(Error::DegenerateObservable);
    }
    Ok((c_ * tau.exp() - b * (-tau).exp()) / (d - a))
}

/// The real observable `[[a, b], [c, d]]`.
pub fn kg_observable(a: f64, b: f64, c_: f64, d: f64) -> ComplexMatrix {
    ComplexMatrix::from_matrix(CMat::from_row_slice(
        2,
        2,
        &[c(a, 0.0), c(b, 0.0), c(c_, 0.0), c(d, 0.0)],
    ))
    .expect("finite entries")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn hermitian_all_ones_gives_identity() {
        let h = ComplexMatrix::from_matrix(CMat::from_row_slice(
            3,
            3,
            &[
                c(1.0, 0.0),
                c(0.2, 0.1),
                c(0.0, 0.0),
                c(0.2, -0.1),
                c(2.0, 0.0),
                c(0.3, 0.0),
                c(0.0, 0.0),
                c(0.3, 0.0),
                c(3.5, 0.0),
            ],
        ))
        .unwrap();
        let family = MetricFamily::new(&h, 1e-10).unwrap();
        let theta = assemble_metric(&family, &[1.0, 1.0, 1.0]).unwrap();
        assert!(close(theta.theta(), &CMat::identity(3, 3), 1e-13));
    }

    #[test]
    fn kg_tau_zero_expansion() {
        let family = MetricFamily::new(&kg_hamiltonian(0.0), 1e-10).unwrap();
        let (k1, k2) = (0.7, 1.9);
        let theta = assemble_metric(&family, &[k1, k2]).unwrap();
        // eigenvalue -1 comes first: L_1 = (1,-1)/√2, L_2 = (1,1)/√2
        let half_sum = (k1 + k2) / 2.0;
        let half_diff = (k2 - k1) / 2.0;
        let expected = CMat::from_row_slice(
            2,
            2,
            &[
                c(half_sum, 0.0),
                c(half_diff, 0.0),
                c(half_diff, 0.0),
                c(half_sum, 0.0),
            ],
        );
        assert!(close(theta.theta(), &expected, 1e-14));
        // β after scaling to unit diagonal
        let beta = half_diff / half_sum;
        let kg = kg_metric(0.0, beta).unwrap();
        assert!(close(
            &theta.theta().scale(1.0 / half_sum),
            kg.theta(),
            1e-14
        ));
    }

    #[test]
    fn kg_tau_nonzero_matches_closed_form_up_to_scale() {
        let (tau, beta) = (0.3, 0.4);
        let family = MetricFamily::new(&kg_hamiltonian(tau), 1e-10).unwrap();
        // κ₊/κ₋ = (1+β)/(1−β), solved by hand from R_± ∝ (±e^τ, 1)
        let kappa = [1.0, (1.0 + beta) / (1.0 - beta)];
        let theta = assemble_metric(&family, &kappa).unwrap();
        let target = kg_metric(tau, beta).unwrap();
        let s = theta.theta()[(0, 0)].re / target.theta()[(0, 0)].re;
        assert!(close(&theta.theta().scale(1.0 / s), target.theta(), 1e-13));
    }

    #[test]
    fn non_positive_weight_is_rejected() {
        let family = MetricFamily::new(&kg_hamiltonian(0.1), 1e-10).unwrap();
        assert!(matches!(
            assemble_metric(&family, &[1.0, 0.0]),
            Err(Error::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            assemble_metric(&family, &[1.0]),
            Err(Error::WeightCount {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn degenerate_and_complex_spectra_are_not_families() {
        assert!(matches!(
            MetricFamily::new(&ComplexMatrix::identity(2), 1e-10),
            Err(Error::DegenerateSpectrum { .. })
        ));
        let rot = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        assert!(matches!(
            MetricFamily::new(&rot, 1e-10),
            Err(Error::ComplexSpectrum { .. })
        ));
    }

    #[test]
    fn residual_examples() {
        let h = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, -1.0]]).unwrap();
        assert_eq!(
            quasi_hermiticity_residual(&h, &ComplexMatrix::identity(2)).unwrap(),
            0.0
        );
        for tau in [-1.5, 0.0, 0.8] {
            for beta in [-0.9, 0.0, 0.5] {
                let theta = kg_metric(tau, beta).unwrap();
                let r = quasi_hermiticity_residual(&kg_hamiltonian(tau), theta.theta()).unwrap();
                assert!(r <= 1e-12, "tau={tau} beta={beta} r={r}");
            }
        }
        // H†−H = [[0, 1−e²],[e²−1, 0]], so ‖·‖ = √2 (e²−1)
        let e2 = 2f64.exp();
        let expected = 2f64.sqrt() * (e2 - 1.0) / ((1.0 + e2 * e2).sqrt() * 2f64.sqrt());
        let r =
            quasi_hermiticity_residual(&kg_hamiltonian(1.0), &ComplexMatrix::identity(2)).unwrap();
        assert!((r - expected).abs() < 1e-14);
        assert!(matches!(
            quasi_hermiticity_residual(&h, &ComplexMatrix::identity(3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn hamiltonian_alone_is_underdetermined() {
        let h = kg_hamiltonian(0.4);
        let family = MetricFamily::new(&h, 1e-10).unwrap();
        assert!(matches!(
            fix_ambiguity(&family, &[h], 1e-10),
            Err(Error::Underdetermined { nullity: 2 })
        ));
        assert!(matches!(
            fix_ambiguity(&family, &[], 1e-10),
            Err(Error::Underdetermined { nullity: 2 })
        ));
    }

    #[test]
    fn observables_fix_beta() {
        let family = MetricFamily::new(&kg_hamiltonian(0.0), 1e-10).unwrap();
        let kappa = fix_ambiguity(&family, &[kg_observable(0.0, 0.0, 0.0, 2.0)], 1e-10).unwrap();
        assert!((kappa[0] - 1.0).abs() < 1e-12 && (kappa[1] - 1.0).abs() < 1e-12);

        let kappa = fix_ambiguity(&family, &[kg_observable(0.0, 0.0, 1.0, 2.0)], 1e-10).unwrap();
        // β = 0.5 ⇒ κ₊/κ₋ = 1.5/0.5
        assert!((kappa[1] - 3.0).abs() < 1e-12, "{kappa:?}");
    }

    #[test]
    fn incompatible_observable_has_no_positive_solution() {
        // β(0,0,3,1,0) = 3 is outside (-1, 1)
        let family = MetricFamily::new(&kg_hamiltonian(0.0), 1e-10).unwrap();
        assert!(matches!(
            fix_ambiguity(&family, &[kg_observable(0.0, 0.0, 3.0, 1.0)], 1e-10),
            Err(Error::NoPositiveSolution)
        ));
    }

    #[test]
    fn conflicting_observables_are_inconsistent() {
        let family = MetricFamily::new(&kg_hamiltonian(0.0), 1e-10).unwrap();
        let obs = [
            kg_observable(0.0, 0.0, 1.0, 2.0),
            kg_observable(0.0, 0.0, -1.0, 2.0),
        ];
        assert!(matches!(
            fix_ambiguity(&family, &obs, 1e-10),
            Err(Error::Inconsistent)
        ));
    }

    #[test]
    fn kg_metric_bounds() {
        let m = kg_metric(0.0, 0.0).unwrap();
        assert_eq!(m.theta().as_matrix(), &CMat::identity(2, 2));
        let m = kg_metric(1.0, 0.3).unwrap();
        assert_eq!(m.theta()[(0, 0)].re, (-1f64).exp());
        assert_eq!(m.theta()[(0, 1)].re, 0.3);
        assert_eq!(m.theta()[(1, 1)].re, 1f64.exp());
        assert!(matches!(kg_metric(0.0, 1.0), Err(Error::BetaOutOfRange(_))));
        assert!(matches!(
            kg_metric(0.0, -1.2),
            Err(Error::BetaOutOfRange(_))
        ));
    }

    #[test]
    fn kg_hamiltonian_entries() {
        assert_eq!(
            kg_hamiltonian(0.0).as_matrix(),
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
                .unwrap()
                .as_matrix()
        );
        assert_eq!(kg_hamiltonian(0.5)[(0, 1)].re, 1f64.exp());
    }

    #[test]
    fn kg_beta_examples() {
        assert_eq!(kg_beta(0.0, 0.0, 0.0, 1.0, 0.7).unwrap(), 0.0);
        assert_eq!(kg_beta(0.0, 0.0, 1.0, 2.0, 0.0).unwrap(), 0.5);
        assert_eq!(kg_beta(0.0, 1.0, 1.0, 2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            kg_beta(1.0, 0.0, 0.0, 1.0, 0.0),
            Err(Error::DegenerateObservable)
        ));
    }

    #[test]
    fn smallest_eigenvalue_vanishes_at_beta_boundary() {
        // at τ = 0 the eigenvalues are 1 ± β
        for beta in [0.9, 0.99, 0.999] {
            let m = kg_metric(0.0, beta).unwrap();
            assert!((m.smallest_eigenvalue() - (1.0 - beta)).abs() < 1e-12);
        }
    }
}
