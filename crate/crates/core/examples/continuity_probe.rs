//! Detect structural transitions when a perturbation is switched on.

use lindblad_structure::corpus;
use lindblad_structure::linop::{c, matrix_unit, scale, zeros, Tolerance};
use lindblad_structure::perturbation::{structure_continuity_probe, PerturbedGenerator};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let e = |d: usize, i: usize, j: usize| matrix_unit(d, i - 1, j - 1);
    let neg = |m: lindblad_structure::linop::ComplexMatrix| scale(m.as_ref(), c(-1.0, 0.0));

    let two_basins = corpus::load("two-basins")?.generator().clone();
    let undamped = corpus::load("undamped-oscillation")?.generator().clone();
    let cascade = corpus::load("cascade")?.generator().clone();

    let cases = vec![
        ("two basins joined", PerturbedGenerator::new(two_basins, None, None, vec![e(3, 1, 2), neg(e(3, 1, 2))])?),
        (
            "oscillation damped",
            PerturbedGenerator::new(
                undamped,
                None,
                None,
                vec![zeros(4, 4), zeros(4, 4), e(4, 1, 2) + e(4, 3, 4), e(4, 2, 1) - e(4, 4, 3)],
            )?,
        ),
        ("cascade basins merged", PerturbedGenerator::new(cascade, None, None, vec![e(4, 3, 1), neg(e(4, 3, 1))])?),
    ];

    for (label, pg) in &cases {
        let report = structure_continuity_probe(pg, &[0.1], &tol);
        println!("== {label}");
        for t in &report.transitions {
            println!("  {t:?}");
        }
        if !report.violations.is_empty() {
            println!("  violations: {:?}", report.violations);
        }
    }
    Ok(())
}
