//! Spectral-reality scans over parametrized Hamiltonian families,
//! exceptional-point boundary search, and truncated-series validation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{hermitian_part, CMat, ComplexMatrix};
use crate::metric::{assemble_metric, kg_hamiltonian, MetricFamily};
use crate::perturbation::{metric_series, PerturbationProblem};
use crate::spectra::{self, min_gap, reality};

/// `H + λW`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFamily {
    h: ComplexMatrix,
    w: ComplexMatrix,
}

impl LinearFamily {
    pub fn new(h: ComplexMatrix, w: ComplexMatrix) -> Result<Self> {
        w.ensure_dim(h.dim())?;
        Ok(Self { h, w })
    }

    pub fn base(&self) -> &ComplexMatrix {
        &self.h
    }

    pub fn perturbation(&self) -> &ComplexMatrix {
        &self.w
    }

    pub fn at(&self, lambda: f64) -> Result<ComplexMatrix> {
        ComplexMatrix::from_matrix(self.h.as_matrix() + self.w.as_matrix().scale(lambda))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `kg_hamiltonian(τ) + λW` over a τ grid.
    Kg {
        taus: Vec<f64>,
        perturbation: ComplexMatrix,
    },
    Linear(LinearFamily),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    family: Family,
    lambdas: Vec<f64>,
}

impl FamilySpec {
    /// Klein-Gordon family with the default coupling `W = σ_x`.
    pub fn kg(taus: Vec<f64>, lambdas: Vec<f64>) -> Result<Self> {
        let sigma_x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
        Self::kg_with_perturbation(taus, lambdas, sigma_x)
    }

    pub fn kg_with_perturbation(
        taus: Vec<f64>,
        lambdas: Vec<f64>,
        perturbation: ComplexMatrix,
    ) -> Result<Self> {
        validate_grid("tau", &taus)?;
        validate_grid("lambda", &lambdas)?;
        perturbation.ensure_dim(2)?;
        Ok(Self {
            family: Family::Kg { taus, perturbation },
            lambdas,
        })
    }

    pub fn linear(family: LinearFamily, lambdas: Vec<f64>) -> Result<Self> {
        validate_grid("lambda", &lambdas)?;
        Ok(Self {
            family: Family::Linear(family),
            lambdas,
        })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Grid points in scan order: τ outermost, λ innermost.
    pub fn points(&self) -> Vec<(f64, Option<f64>)> {
        match &self.family {
            Family::Kg { taus, .. } => taus
                .iter()
                .flat_map(|&t| self.lambdas.iter().map(move |&l| (l, Some(t))))
                .collect(),
            Family::Linear(_) => self.lambdas.iter().map(|&l| (l, None)).collect(),
        }
    }

    pub fn hamiltonian(&self, lambda: f64, tau: Option<f64>) -> Result<ComplexMatrix> {
        match (&self.family, tau) {
            (Family::Kg { perturbation, .. }, Some(t)) => {
                LinearFamily::new(kg_hamiltonian(t), perturbation.clone())?.at(lambda)
            }
            (Family::Kg { .. }, None) => Err(Error::InvalidGrid("KG family needs tau".into())),
            (Family::Linear(f), _) => f.at(lambda),
        }
    }
}

fn validate_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "{name} grid has non-finite values"
        )));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(format!(
            "{name} grid is not strictly increasing"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub lambda: f64,
    pub tau: Option<f64>,
    pub spectrum_real: bool,
    pub max_imag: f64,
    pub min_gap: f64,
    pub eigvec_cond: f64,
    pub metric_exists: bool,
    /// `NaN` when no metric witness was built.
    pub theta_min_eig: f64,
    /// Why the point was not fully analysed (e.g. defective matrix).
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
}

/// Scans every grid point using the global rayon pool.
pub fn reality_scan(spec: &FamilySpec, tol: f64) -> ScanReport {
    let points = spec.points();
    ScanReport {
        points: points
            .par_iter()
            .map(|&(lambda, tau)| scan_point(spec, lambda, tau, tol))
            .collect(),
    }
}

/// Like [`reality_scan`] with at most `threads` workers (0 = automatic).
pub fn reality_scan_with_threads(spec: &FamilySpec, tol: f64, threads: usize) -> ScanReport {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| reality_scan(spec, tol)),
        Err(_) => reality_scan(spec, tol),
    }
}

fn scan_point(spec: &FamilySpec, lambda: f64, tau: Option<f64>, tol: f64) -> ScanPoint {
    let mut point = ScanPoint {
        lambda,
        tau,
        spectrum_real: false,
        max_imag: f64::NAN,
        min_gap: f64::NAN,
        eigvec_cond: f64::INFINITY,
        metric_exists: false,
        theta_min_eig: f64::NAN,
        failure: None,
    };
    let h = match spec.hamiltonian(lambda, tau) {
        Ok(h) => h,
        Err(e) => {
            point.failure = Some(e.to_string());
            return point;
        }
    };
    let system = match spectra::diagonalize(&h, tol) {
        Ok(s) => s,
        Err(Error::Defective { cond, eigenvalues }) => {
            let (real, max_imag) = reality(&eigenvalues, tol);
            point.spectrum_real = real;
            point.max_imag = max_imag;
            point.min_gap = min_gap(&eigenvalues);
            point.eigvec_cond = cond;
            point.failure = Some("defective".into());
            return point;
        }
        Err(e) => {
            point.failure = Some(e.to_string());
            return point;
        }
    };
    let (real, max_imag) = spectra::spectrum_is_real(&system, tol);
    let (gap, cond) = spectra::ep_proximity(&system);
    point.spectrum_real = real;
    point.max_imag = max_imag;
    point.min_gap = gap;
    point.eigvec_cond = cond;

    let witness = MetricFamily::from_system(h, system)
        .and_then(|family| assemble_metric(&family, &vec![1.0; family.dim()]));
    match witness {
        Ok(theta) => {
            point.metric_exists = true;
            point.theta_min_eig = theta.smallest_eigenvalue();
        }
        Err(e) => {
            if real {
                point.failure = Some(e.to_string());
            }
        }
    }
    point
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }
}

/// Real and diagonalizable; exceptional points count as outside.
fn real_at(family: &LinearFamily, lambda: f64, spectral_tol: f64) -> bool {
    family
        .at(lambda)
        .and_then(|h| spectra::diagonalize(&h, spectral_tol))
        .map(|sys| spectra::spectrum_is_real(&sys, spectral_tol).0)
        .unwrap_or(false)
}

/// Bisects for the reality boundary of `H + s·t·W` with `t` in `bracket`
/// and `s` the direction sign, down to a bracket width of `tol`. Returns
/// `t*`; the spectrum is real at the lower end of the final bracket and not
/// real at the upper end.
pub fn lambda_max(
    family: &LinearFamily,
    direction: Direction,
    bracket: (f64, f64),
    tol: f64,
    spectral_tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    let s = direction.sign();
    let invalid = Error::InvalidBracket { lo, hi };
    if !(lo < hi) || !(tol > 0.0) {
        return Err(invalid);
    }
    if !real_at(family, s * lo, spectral_tol) || real_at(family, s * hi, spectral_tol) {
        return Err(invalid);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if real_at(family, s * mid, spectral_tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The exact metric of `H + λW_λ`, with weights chosen so that its
/// components `R_n† T R_n` in the unperturbed basis equal those of `Θ`.
pub fn gauge_matched_metric(problem: &PerturbationProblem, lambda: f64) -> Result<ComplexMatrix> {
    let tol = problem.tolerance();
    let h = problem.perturbed_hamiltonian(lambda)?;
    let family = MetricFamily::new(&h, tol)?;
    let n = problem.dim();
    let r0 = problem.system().right_vectors();
    let l = family.system().left_vectors();
    let overlap = r0.adjoint() * l;
    let m = nalgebra::DMatrix::<f64>::from_fn(n, n, |a, p| overlap[(a, p)].norm_sqr());
    let target = nalgebra::DVector::from_vec(problem.weights());
    let kappa = m
        .lu()
        .solve(&target)
        .ok_or(Error::DegenerateSpectrum { min_gap: 0.0 })?;
    if let Some((index, &value)) = kappa.iter().enumerate().find(|(_, &k)| !(k > 0.0)) {
        return Err(Error::NonPositiveWeight { index, value });
    }
    let theta = assemble_metric(&family, kappa.as_slice())?;
    ComplexMatrix::from_matrix(hermitian_part(theta.theta()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesError {
    pub lambda: f64,
    pub error: f64,
}

/// `‖Σ_{k≤K} λ^k T^(k) − T_exact(λ)‖_F` over `lambdas`.
pub fn series_vs_exact(
    problem: &PerturbationProblem,
    order: usize,
    lambdas: &[f64],
) -> Result<Vec<SeriesError>> {
    let series = metric_series(problem, order)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let exact: CMat = gauge_matched_metric(problem, lambda)?.into();
            let error = (series.evaluate(lambda) - exact).norm();
            Ok(SeriesError { lambda, error })
        })
        .collect()
}

/// Least-squares slope of `log error` against `log |λ|`, skipping rows
/// with zero `λ` or error.
pub fn loglog_slope(rows: &[SeriesError]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.lambda != 0.0 && r.error > 0.0)
        .map(|r| (r.lambda.abs().ln(), r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::kg_metric;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    fn sqrt_family() -> LinearFamily {
        LinearFamily::new(
            real(&[&[0.0, 1.0], &[1.0, 0.0]]),
            real(&[&[0.0, -1.0], &[0.0, 0.0]]),
        )
        .unwrap()
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn kg_scan_is_real_everywhere() {
        let spec = FamilySpec::kg(linspace(-2.0, 2.0, 21), vec![0.0]).unwrap();
        let report = reality_scan(&spec, 1e-10);
        assert_eq!(report.points.len(), 21);
        for p in &report.points {
            assert!(p.spectrum_real && p.metric_exists, "{p:?}");
            assert!(p.theta_min_eig > 0.0);
        }
    }

    #[test]
    fn reality_flips_at_one() {
        let spec = FamilySpec::linear(sqrt_family(), linspace(0.0, 2.0, 41)).unwrap();
        let report = reality_scan(&spec, 1e-10);
        for p in &report.points {
            if p.lambda < 1.0 - 1e-12 {
                assert!(p.spectrum_real && p.metric_exists, "{p:?}");
            } else if p.lambda > 1.0 + 1e-12 {
                assert!(!p.spectrum_real && !p.metric_exists, "{p:?}");
                assert!((p.max_imag - (p.lambda - 1.0).sqrt()).abs() < 1e-12);
            } else {
                assert_eq!(p.min_gap, 0.0);
                assert_eq!(p.failure.as_deref(), Some("defective"));
                assert!(!p.metric_exists);
            }
            assert!(!p.metric_exists || p.spectrum_real);
        }
    }

    #[test]
    fn scan_is_deterministic_across_thread_counts() {
        let spec = FamilySpec::linear(sqrt_family(), linspace(0.0, 2.0, 17)).unwrap();
        let a = reality_scan_with_threads(&spec, 1e-10, 1);
        let b = reality_scan_with_threads(&spec, 1e-10, 4);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn grids_are_validated() {
        assert!(matches!(
            FamilySpec::linear(sqrt_family(), vec![]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            FamilySpec::linear(sqrt_family(), vec![0.0, 0.0]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            FamilySpec::kg(vec![f64::NAN], vec![0.0]),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn boundary_of_sqrt_family() {
        let t = lambda_max(&sqrt_family(), Direction::Forward, (0.0, 2.0), 1e-8, 1e-10).unwrap();
        assert!((t - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn boundary_of_anti_hermitian_coupling() {
        let fam = LinearFamily::new(
            real(&[&[-1.0, 0.0], &[0.0, 1.0]]),
            real(&[&[0.0, 1.0], &[-1.0, 0.0]]),
        )
        .unwrap();
        let t = lambda_max(&fam, Direction::Forward, (0.0, 3.0), 1e-9, 1e-10).unwrap();
        assert!((t - 1.0).abs() <= 1e-8);
        // symmetric in λ
        let t = lambda_max(&fam, Direction::Backward, (0.0, 3.0), 1e-9, 1e-10).unwrap();
        assert!((t - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn hermitian_family_has_no_boundary() {
        let fam = LinearFamily::new(
            real(&[&[1.0, 0.2], &[0.2, -1.0]]),
            real(&[&[0.0, 1.0], &[1.0, 0.5]]),
        )
        .unwrap();
        assert!(matches!(
            lambda_max(&fam, Direction::Forward, (0.0, 10.0), 1e-8, 1e-10),
            Err(Error::InvalidBracket { .. })
        ));
    }

    #[test]
    fn series_error_vanishes_at_zero_and_has_slope() {
        let tau = 0.2;
        let problem = PerturbationProblem::new(
            &kg_hamiltonian(tau),
            kg_metric(tau, 0.0).unwrap(),
            vec![real(&[&[0.0, 1.0], &[1.0, 0.0]])],
            1e-10,
        )
        .unwrap();
        let rows = series_vs_exact(&problem, 1, &[0.0, 1e-3, 1e-2, 1e-1]).unwrap();
        assert!(rows[0].error < 1e-14);
        let slope = loglog_slope(&rows[1..]).unwrap();
        assert!((slope - 2.0).abs() < 0.3, "slope {slope}");
    }
}
