//! Time evolution with block monitors and the rank lower bound.

use lindblad_structure::corpus;
use lindblad_structure::dynamics::{check_rank_bound, evolve, trajectory};
use lindblad_structure::generator::DensityMatrix;
use lindblad_structure::linop::{c, zeros, Tolerance};

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let g = corpus::load("undamped-oscillation")?.generator().clone();

    // Equal superposition of |1> and |3>.
    let mut m = zeros(4, 4);
    for (i, j) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
        m[(i, j)] = c(0.5, 0.0);
    }
    let rho0 = DensityMatrix::new(m, &tol)?;

    let rho = evolve(&g, &rho0, 10.0)?;
    println!("r13(10) = {:.6}", rho.matrix()[(0, 2)]);
    println!("r24(10) = {:.6}", rho.matrix()[(1, 3)]);

    let traj = trajectory(&g, &rho0, 10.0, 4)?;
    print!("{}", traj.to_csv_string()?);

    let bound = check_rank_bound(&g, &traj)?;
    println!(
        "rank bound: pass={} worst margin {:.2e} (rate {})",
        bound.pass, bound.worst_margin, bound.rate
    );
    Ok(())
}
