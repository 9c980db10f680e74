//! Parameter scan of spectral reality and metric existence, then bisection
//! for the exceptional point where reality is lost.

use crypto_metric::stability::{lambda_max, reality_scan, Direction, FamilySpec, LinearFamily};
use crypto_metric::ComplexMatrix;

fn main() -> crypto_metric::Result<()> {
    // [[0, 1 − λ], [1, 0]]: eigenvalues ±√(1 − λ)
    let family = LinearFamily::new(
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?,
        ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[0.0, 0.0]])?,
    )?;
    let lambdas: Vec<f64> = (0..=8).map(|i| 0.25 * i as f64).collect();
    let report = reality_scan(&FamilySpec::linear(family.clone(), lambdas)?, 1e-10);
    println!("lambda  real   metric  max|Im|   min gap   theta_min");
    for p in &report.points {
        println!(
            "{:<7} {:<6} {:<7} {:<9.2e} {:<9.2e} {:.3e}{}",
            p.lambda,
            p.spectrum_real,
            p.metric_exists,
            p.max_imag,
            p.min_gap,
            p.theta_min_eig,
            p.failure
                .as_deref()
                .map(|f| format!("  ({f})"))
                .unwrap_or_default()
        );
    }
    let edge = lambda_max(&family, Direction::Forward, (0.0, 2.0), 1e-12, 1e-10)?;
    println!("reality lost at lambda = {edge:.12}");

    let kg = FamilySpec::kg(vec![-1.0, 0.0, 1.0], vec![0.0, 0.5])?;
    let real = reality_scan(&kg, 1e-10)
        .points
        .iter()
        .filter(|p| p.spectrum_real)
        .count();
    println!("KG family: {real} of 6 grid points real");
    Ok(())
}
