//! Intertwiners between basins and the resulting dephasing classes.
//!
//! The same pair of enclosures with three different couplings: dephasing
//! phases, an undamped oscillating phase relation and a stationary one.

use lindblad_structure::corpus;
use lindblad_structure::linop::Tolerance;
use lindblad_structure::structure::analyze;

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    for name in ["dephasing-enclosures", "undamped-oscillation", "stationary-phase"] {
        let g = corpus::load(name)?.generator().clone();
        let report = analyze(&g, &tol)?;
        println!("== {name}");
        for it in &report.intertwiners {
            println!(
                "  intertwiner {} -> {}: r = {}, eigenvalue {:.3}, defect {:.1e}",
                it.i, it.j, it.energy_shift, it.eigenvalue, it.defect
            );
        }
        for (k, class) in report.dephasing_classes.iter().enumerate() {
            println!(
                "  class {k}: members {:?}, multiplicity {}, inner dim {}, energies {:?}",
                class.members, class.multiplicity, class.inner_dim, class.energies
            );
        }
    }
    Ok(())
}
