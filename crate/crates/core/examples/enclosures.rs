//! Commutant of the generator data and its minimal conserved projectors.

use lindblad_structure::corpus;
use lindblad_structure::linop::Tolerance;
use lindblad_structure::structure::{commutant, enclosure_defect, minimal_conserved_projectors};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    for name in ["dissipation", "dephasing-enclosures", "stationary-phase"] {
        let g = corpus::load(name)?.generator().clone();
        let cb = commutant(&g, &tol);
        let projectors = minimal_conserved_projectors(&cb, &tol)?;
        println!("== {name}: commutant dimension {}", cb.len());
        for p in &projectors {
            let diag: Vec<f64> = (0..g.dim()).map(|i| p[(i, i)].re).collect();
            println!("  enclosure diag {diag:?}, defect {:.1e}", enclosure_defect(&g, p)?);
        }
    }
    Ok(())
}
