//! Long-time form of a state from the structure report.

use lindblad_structure::corpus;
use lindblad_structure::dynamics::{asymptotic_state, evolve};
use lindblad_structure::generator::DensityMatrix;
use lindblad_structure::linop::{c, spectral_norm, zeros, Tolerance};
use lindblad_structure::structure::analyze;

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let g = corpus::load("undamped-oscillation")?.generator().clone();
    let report = analyze(&g, &tol)?;
    // Coherent superposition of the two enclosures keeps an oscillating part.
    let mut m = zeros(4, 4);
    for (i, j) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
        m[(i, j)] = c(0.5, 0.0);
    }
    let rho0 = DensityMatrix::new(m, &tol)?;

    let form = asymptotic_state(&g, &rho0, &report, &tol)?;
    println!("weights {:?}", form.weights());
    println!("check at t={}: error {:.2e}", form.t_check, form.check_error);

    for t in [20.0, 40.0] {
        let exact = evolve(&g, &rho0, t)?;
        let err = spectral_norm((form.state_at(t) - exact.matrix()).as_ref());
        println!("t={t}: |rho(t) - asymptotic| = {err:.2e}");
    }
    println!("{}", serde_json::to_string_pretty(&form.to_json()).unwrap());
    Ok(())
}
