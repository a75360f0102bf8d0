//! Perturbation series around a unique stationary state.

use lindblad_structure::corpus;
use lindblad_structure::linop::{c, identity, matrix_unit, scale, spectral_norm, Tolerance};
use lindblad_structure::perturbation::expand_unique;

fn main() -> lindblad_structure::Result<()> {
    let tol = Tolerance::default();
    let fixture = corpus::load("series-unique")?;
    let pg = fixture.perturbed().expect("perturbed fixture");

    let mut series = expand_unique(pg, 20, &tol)?;
    for n in 0..6 {
        let s = &series.sigmas[n];
        println!("sigma_{n}: [[{:.4}, {:.4}], [{:.4}, {:.4}]]", s[(0, 0)].re, s[(0, 1)].re, s[(1, 0)].re, s[(1, 1)].re);
    }

    let sx = matrix_unit(2, 0, 1) + matrix_unit(2, 1, 0);
    let lambda = 0.5;
    let closed = scale(identity(2).as_ref(), c(0.5, 0.0))
        + scale(sx.as_ref(), c(lambda / (1.0 + lambda * lambda / 2.0) / 2.0, 0.0));
    let err = spectral_norm((series.partial_sum(lambda) - closed).as_ref());
    println!("partial sum at {lambda} vs closed form: {err:.1e}");

    series.evaluate(pg, &[0.5, 1.5])?;
    println!("radius estimate {:?}", series.radius_estimate());
    for (l, r) in &series.residual_at {
        println!("  residual at {l}: {r:.1e}");
    }
    for w in &series.warnings {
        println!("  warning: {w}");
    }
    Ok(())
}
