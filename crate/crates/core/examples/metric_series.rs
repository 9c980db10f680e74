//! Order-by-order metric corrections for H + λW and their convergence
//! against the exact metric.

use crypto_metric::metric::{kg_hamiltonian, kg_metric};
use crypto_metric::perturbation::{dyson_from_metric, metric_series, PerturbationProblem};
use crypto_metric::stability::{loglog_slope, series_vs_exact};
use crypto_metric::ComplexMatrix;

fn main() -> crypto_metric::Result<()> {
    let tau = 0.2;
    let w = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])?;
    let problem =
        PerturbationProblem::new(&kg_hamiltonian(tau), kg_metric(tau, 0.0)?, vec![w], 1e-10)?;

    let series = metric_series(&problem, 3)?;
    println!("gauge: {}", series.gauge());
    for (k, (t, r)) in series.coeffs().iter().zip(series.residuals()).enumerate() {
        println!("T^({k}) = {}   residual {r:.1e}", t.as_matrix());
    }

    let dyson = dyson_from_metric(&series, problem.metric())?;
    println!("Delta_0 = {}", dyson.delta(0)?.as_matrix());

    let lambdas = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    for order in 1..=3 {
        let rows = series_vs_exact(&problem, order, &lambdas)?;
        let errors: Vec<String> = rows.iter().map(|r| format!("{:.2e}", r.error)).collect();
        println!(
            "K = {order}: errors {}  slope {:.2}",
            errors.join(" "),
            loglog_slope(&rows).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
