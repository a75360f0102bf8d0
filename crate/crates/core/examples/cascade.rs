//! Decay cascade: levels of basins with flow only towards lower levels.

use lindblad_structure::corpus;
use lindblad_structure::linop::{complement, matrix_unit, Tolerance};
use lindblad_structure::structure::{cascade, is_collecting, remaining_occupation};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let g = corpus::load("cascade")?.generator().clone();
    let d = g.dim();

    let c = cascade(&g, &tol)?;
    for (n, level) in c.levels.iter().enumerate() {
        let basins: Vec<Vec<f64>> = level
            .iter()
            .map(|p| (0..d).map(|i| p[(i, i)].re).collect())
            .collect();
        println!("level {n}: {basins:?}");
    }

    let cert = is_collecting(&g, &c.p0, &tol)?;
    println!("P0 collecting: {} (lazy defect {:.1e})", cert.pass, cert.lazy_defect);

    // Population rates: column j is D applied to |j><j|.
    for j in 0..d {
        let out = g.apply_schrodinger(&matrix_unit(d, j, j))?;
        let col: Vec<f64> = (0..d).map(|i| out[(i, i)].re).collect();
        println!("D(e{0}{0}) diagonal = {col:?}", j + 1);
    }

    let decaying = complement(c.p0.as_ref());
    for t in [1.0, 10.0, 30.0] {
        println!("decaying occupation at t={t}: {:.2e}", remaining_occupation(&g, &decaying, t)?);
    }
    Ok(())
}
