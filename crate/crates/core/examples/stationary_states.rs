//! Extremal stationary states, phase relations and the dual invariant observables.

use lindblad_structure::corpus;
use lindblad_structure::linop::{trace_product, Tolerance};
use lindblad_structure::spectral::{decompose, invariant_observable_closure, stationary_states};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let g = corpus::load("two-basins-phase")?.generator().clone();
    let ss = stationary_states(&decompose(&g, &tol)?, &tol)?;

    println!("kernel dimension {}", ss.kernel_dim());
    for (k, s) in ss.basis_states.iter().enumerate() {
        println!("state {k}:\n{:?}", s.matrix());
    }
    for (blk, r) in ss.phase_relation_blocks.iter().zip(&ss.phase_relations) {
        println!("phase relation in block {blk:?}:\n{r:?}");
    }

    // A_i are dual to the kernel basis.
    let kernel = ss.kernel_elements();
    for (i, a) in ss.invariant_observables.iter().enumerate() {
        let row: Vec<String> = kernel
            .iter()
            .map(|k| format!("{:+.3}", trace_product(a.as_ref(), k.as_ref()).re))
            .collect();
        println!("Tr[A_{i} k_j] = [{}]", row.join(", "));
    }

    let closure = invariant_observable_closure(&ss, &tol);
    println!("observables form an algebra: {} (product defect {:.2e})", closure.is_algebra, closure.product_defect);
    Ok(())
}
