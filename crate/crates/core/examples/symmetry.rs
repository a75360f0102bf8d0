//! Dynamical symmetries and detection of maximally symmetric generators.

use lindblad_structure::corpus;
use lindblad_structure::generator::LindbladGenerator;
use lindblad_structure::linop::{from_real_rows, Tolerance};
use lindblad_structure::structure::{detect_max_symmetry, verify_symmetry};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();

    for name in ["maximal-symmetric", "maximal-symmetric-weyl", "dissipation"] {
        let g = corpus::load(name)?.generator().clone();
        let ms = detect_max_symmetry(&g, &tol)?;
        println!("{name:24} max symmetric: {:5} rate {:.6} defect {:.1e}", ms.is_max, ms.rate, ms.defect);
    }

    let a = corpus::load("maximal-symmetric")?.generator().superoperator();
    let b = corpus::load("maximal-symmetric-weyl")?.generator().superoperator();
    println!("matrix-unit vs Weyl superoperator distance {:.1e}", a.distance(&b)?);

    // Swapping the two enclosures is a symmetry of the dephasing example.
    let g: LindbladGenerator = corpus::load("stationary-phase")?.generator().clone();
    let swap = from_real_rows(&[
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
    ]);
    for antiunitary in [false, true] {
        let cert = verify_symmetry(&g, &swap, antiunitary, &tol)?;
        println!(
            "swap (antiunitary={antiunitary}): dynamical {} ({:.1e}), stationarity {}",
            cert.dynamical, cert.dynamical_defect, cert.stationarity
        );
    }
    Ok(())
}
