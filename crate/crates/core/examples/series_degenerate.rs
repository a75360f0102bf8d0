//! Degenerate perturbation theory: the perturbation selects which
//! combination of the unperturbed stationary states survives.

use lindblad_structure::corpus;
use lindblad_structure::linop::{c, matrix_unit, scale, spectral_norm, Tolerance};
use lindblad_structure::perturbation::{expand_degenerate, merging_alpha0};
use lindblad_structure::spectral::{decompose, stationary_states};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let pg = corpus::load("merging-enclosures")?.perturbed().cloned().expect("perturbed fixture");

    let series = expand_degenerate(&pg, 6, &tol)?;
    println!("alpha_0 = {:?} (look-ahead {})", series.alphas[0], series.lookahead);

    let q1 = matrix_unit(4, 0, 0) + matrix_unit(4, 1, 1);
    let q2 = matrix_unit(4, 2, 2) + matrix_unit(4, 3, 3);
    let rho1 = scale(q1.as_ref(), c(0.5, 0.0));
    let rho2 = scale(q2.as_ref(), c(0.5, 0.0));
    let a0 = merging_alpha0(pg.k_ops(), &q1, &q2, &rho1, &rho2);
    println!("closed-form alpha_0 = {a0:.12}");

    // Compare against the kernel of the full generator.
    let lambda = 0.05;
    let g = pg.at(lambda)?;
    let ss = stationary_states(&decompose(&g, &tol)?, &tol)?;
    let err = spectral_norm((series.partial_sum(lambda) - ss.basis_states[0].matrix()).as_ref());
    println!("series vs direct kernel at {lambda}: {err:.1e}");
    Ok(())
}
