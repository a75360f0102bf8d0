//! Build a generator by hand and check that it is a valid Lindblad generator.

use lindblad_structure::generator::LindbladGenerator;
use lindblad_structure::linop::{diag_real, matrix_unit, Tolerance};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();

    // Qubit with a level splitting and decay from the upper level.
    let h = diag_real(&[0.0, 1.0]);
    let g = LindbladGenerator::new(h, vec![matrix_unit(2, 0, 1)])?
        .with_labels(vec!["decay".into()])?;

    let report = g.validate(&tol);
    println!("dim                  {}", report.dim);
    println!("hermiticity defect   {:.2e}", report.hermiticity_defect);
    println!("trace defect         {:.2e}", report.trace_preservation_defect);
    println!("min Choi eigenvalue  {:.2e} (dt = {})", report.min_choi_eigenvalue, report.choi_step);
    println!("passed               {}", report.passed());

    println!("\n{}", g.to_json_string());
    Ok(())
}
