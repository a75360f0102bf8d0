use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::linop::{self, complement, identity, projector_rank, ComplexMatrix, Tolerance};
use crate::spectral::{stationary_states_of, StationarySet};

use super::commutant::{commutant, minimal_conserved_projectors_seeded, sort_projectors};

/// Levels of the decay cascade in full coordinates, lowest level first.
#[derive(Debug, Clone)]
pub struct Cascade {
    pub levels: Vec<Vec<ComplexMatrix>>,
    /// Lowest level: projector onto all stationary supports.
    pub p0: ComplexMatrix,
    /// Dimension of `{P₀HP₀, P₀h_αP₀}'` on the range of `P₀`.
    pub restricted_commutant_dim: usize,
}

/// Projector onto the joint support of all stationary states.
pub(crate) fn stationary_support(ss: &StationarySet) -> Result<ComplexMatrix> {
    let d = ss.dim();
    let mut total = linop::zeros(d, d);
    for s in &ss.supports {
        total += s;
    }
    Ok(linop::round_projector(total.as_ref()))
}

pub fn cascade(g: &LindbladGenerator, tol: &Tolerance) -> Result<Cascade> {
    let ss = stationary_states_of(&g.superoperator(), tol, 0.0)?;
    cascade_from(g, &ss, tol, super::commutant::DEFAULT_SEED)
}

pub(crate) fn cascade_from(
    g: &LindbladGenerator,
    ss: &StationarySet,
    tol: &Tolerance,
    seed: u64,
) -> Result<Cascade> {
    let d = g.dim();
    let mut levels = Vec::new();
    let scale = g.superoperator().norm();
    let mut current = g.clone();
    // isometry from the current subspace into the full space
    let mut w = identity(d);
    let mut first = Some(ss.clone());
    let mut p0_full = None;
    let mut restricted_commutant_dim = 0;
    loop {
        if levels.len() > d {
            return Err(Error::Numerical("cascade exceeded the dimension in levels".into()));
        }
        let local_ss = match first.take() {
            Some(s) => s,
            None => stationary_states_of(&current.superoperator(), tol, scale)?,
        };
        let p0 = stationary_support(&local_ss)?;
        let low = current.restrict(&p0, tol)?;
        let cb = commutant(&low.generator, tol);
        if p0_full.is_none() {
            restricted_commutant_dim = cb.len();
        }
        let wl = &w * &low.isometry;
        let mut basins: Vec<ComplexMatrix> = minimal_conserved_projectors_seeded(&cb, tol, seed)?
            .iter()
            .map(|q| linop::hermitian_part((&wl * q * wl.adjoint()).as_ref()))
            .collect();
        sort_projectors(&mut basins);
        if p0_full.is_none() {
            p0_full = Some(linop::hermitian_part((&w * &p0 * w.adjoint()).as_ref()));
        }
        levels.push(basins);

        let rest = complement(p0.as_ref());
        if projector_rank(rest.as_ref()) == 0 {
            break;
        }
        let up = current.restrict(&rest, tol)?;
        w = &w * &up.isometry;
        current = up.generator;
    }
    Ok(Cascade {
        levels,
        p0: p0_full.expect("at least one level"),
        restricted_commutant_dim,
    })
}
