//! The metric of a quasi-Hermitian Hamiltonian is only fixed up to one
//! positive weight per eigenstate; an extra observable removes the freedom.

use crypto_metric::metric::{
    assemble_metric, fix_ambiguity, kg_beta, kg_hamiltonian, kg_metric, kg_observable,
    quasi_hermiticity_residual, MetricFamily,
};

fn main() -> crypto_metric::Result<()> {
    let tau = 0.4;
    let h = kg_hamiltonian(tau);
    let family = MetricFamily::new(&h, 1e-12)?;

    println!("a few members of the family for tau = {tau}:");
    for kappa in [[1.0, 1.0], [1.0, 3.0], [2.0, 0.5]] {
        let theta = assemble_metric(&family, &kappa)?;
        let t = theta.theta();
        println!(
            "  kappa = {kappa:?}  Theta = [[{:.4}, {:.4}], [{:.4}, {:.4}]]  residual {:.1e}",
            t[(0, 0)].re,
            t[(0, 1)].re,
            t[(1, 0)].re,
            t[(1, 1)].re,
            quasi_hermiticity_residual(&h, t)?
        );
    }

    let (a, b, c, d) = (0.0, 0.3, 0.6, 1.0);
    let obs = kg_observable(a, b, c, d);
    let kappa = fix_ambiguity(&family, &[obs], 1e-10)?;
    let beta = kg_beta(a, b, c, d, tau)?;
    let fixed = assemble_metric(&family, &kappa)?;
    let closed = kg_metric(tau, beta)?;
    let scale = closed.theta()[(0, 0)].re / fixed.theta()[(0, 0)].re;
    let diff = (fixed.theta().as_matrix().scale(scale) - closed.theta().as_matrix()).norm();
    println!("observable [[{a}, {b}], [{c}, {d}]] fixes kappa = {kappa:?}, beta = {beta:.6}");
    println!("  match with the closed form up to scale: {diff:.1e}");

    match fix_ambiguity(&family, std::slice::from_ref(&h), 1e-10) {
        Err(e) => println!("H itself as the observable: {e}"),
        Ok(k) => println!("H itself as the observable gave {k:?}"),
    }
    Ok(())
}
