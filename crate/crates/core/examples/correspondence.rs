//! Moving a perturbation between the W and V pictures with the Dyson
//! correction Δ, and testing whether H + λV stays quasi-Hermitian for Θ.

use crypto_metric::metric::{kg_hamiltonian, kg_metric};
use crypto_metric::perturbation::{
    commutator_gap, hidden_hermiticity_test, intertwining_residual, leading_delta, v_from_w,
    w_from_v,
};
use crypto_metric::ComplexMatrix;

fn main() -> crypto_metric::Result<()> {
    let tau = 0.3;
    let h = kg_hamiltonian(tau);
    let theta = kg_metric(tau, 0.1)?;
    let w = ComplexMatrix::from_real_rows(&[&[0.2, 1.0], &[0.5, -0.1]])?;

    let delta = leading_delta(&w, &h, &theta, 1e-10)?;
    println!("Delta_0 = {}", delta.as_matrix());

    for lambda in [0.2, 0.1, 0.05, 0.025] {
        let v = v_from_w(&w, &delta, &h, lambda)?;
        let back = w_from_v(&v, &delta, &h, lambda)?;
        let (ok, res) = hidden_hermiticity_test(&w, &delta, &h, &theta, lambda, 1e-6)?;
        println!(
            "lambda {lambda:<6} round trip {:.1e}  intertwining {:.1e}  commutator gap {:.3e}  admissible {ok} ({res:.1e})",
            (back.as_matrix() - w.as_matrix()).norm(),
            intertwining_residual(&v, &w, &delta, &h, lambda),
            commutator_gap(&v, &w, &delta, &h)?,
        );
    }
    Ok(())
}
