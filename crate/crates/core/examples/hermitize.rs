//! Dyson map Ω = Θ^{1/2} and the isospectral Hermitian partner ΩHΩ⁻¹.

use crypto_metric::dyson::{dyson_map, hermitize, pullback_observable};
use crypto_metric::metric::{kg_hamiltonian, kg_metric};
use crypto_metric::spectra;

fn main() -> crypto_metric::Result<()> {
    let (tau, beta) = (0.8, 0.25);
    let h = kg_hamiltonian(tau);
    let theta = kg_metric(tau, beta)?;
    let map = dyson_map(&theta)?;
    let small_h = hermitize(&h, &map, 1e-10)?;

    println!("H          = {}", h.as_matrix());
    println!("h = ΩHΩ⁻¹  = {}", small_h.as_matrix());
    println!("relative ‖h − h†‖ = {:.1e}", small_h.hermitian_defect());
    println!("metric condition number {:.3}", map.metric_cond());
    println!("spectrum of H: {:?}", spectra::eigenvalues(&h)?);
    println!("spectrum of h: {:?}", spectra::eigenvalues(&small_h)?);

    let back = pullback_observable(&small_h, &map)?;
    println!(
        "pulling h back recovers H to {:.1e}",
        (back.as_matrix() - h.as_matrix()).norm() / h.frobenius_norm()
    );
    Ok(())
}
