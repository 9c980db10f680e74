//! Left/right eigenvectors of a non-Hermitian matrix and how close it sits
//! to an exceptional point.

use crypto_metric::spectra::{diagonalize, ep_proximity, spectrum_is_real};
use crypto_metric::ComplexMatrix;

fn main() -> crypto_metric::Result<()> {
    for eps in [0.5, 1e-2, 1e-4] {
        // [[0, ε²], [1, 0]] has eigenvalues ±ε and merges into a Jordan block at ε = 0
        let h = ComplexMatrix::from_real_rows(&[&[0.0, eps * eps], &[1.0, 0.0]])?;
        let sys = diagonalize(&h, 1e-12)?;
        let (real, max_imag) = spectrum_is_real(&sys, 1e-12);
        let (gap, cond) = ep_proximity(&sys);
        println!(
            "eps = {eps:<7} E = {:?}  real: {real} (max |Im| {max_imag:.1e})  gap {gap:.2e}  cond {cond:.2e}",
            sys.eigenvalues().iter().map(|z| z.re).collect::<Vec<_>>()
        );
        println!(
            "            residuals: right {:.1e}, left {:.1e}, L†R - 1 {:.1e}",
            sys.right_residual(&h),
            sys.left_residual(&h),
            sys.biorthogonality_defect()
        );
    }

    let jordan = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])?;
    match diagonalize(&jordan, 1e-10) {
        Err(e) => println!("Jordan block: {e}"),
        Ok(_) => println!("Jordan block unexpectedly diagonalized"),
    }
    Ok(())
}
