use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::linop::{
    self, c, conj, dagger, kron, polar_isometry, projector_rank, range_isometry,
    spectral_norm, transpose, unvectorize, ComplexMatrix, Tolerance,
};
use crate::spectral::stationary_states_of;

use super::subspace::Status;

/// Partial isometry `U` from basin `j` onto basin `i` with
/// `H·U = U·(H + r)` on the lowest level.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    pub i: usize,
    pub j: usize,
    pub u: ComplexMatrix,
    pub energy_shift: f64,
    /// Block eigenvalue `-i·r` it was reconstructed from.
    pub eigenvalue: linop::C64,
    pub defect: f64,
    pub status: Status,
}

impl Intertwiner {
    pub fn is_stationary(&self) -> bool {
        self.energy_shift == 0.0
    }
}

/// Intertwiners between equal-rank collecting basins.
pub fn find_intertwiners(
    g: &LindbladGenerator,
    basins: &[ComplexMatrix],
    tol: &Tolerance,
) -> Result<Vec<Intertwiner>> {
    let d = g.dim();
    let s = g.superoperator();
    let dm = s.matrix();
    let scale = linop::spectral_norm(dm).max(1.0);
    let axis = tol.eig_group_tol * scale;
    let thr = tol.match_tol * scale;

    let mut p0 = linop::zeros(d, d);
    for b in basins {
        p0 += b;
    }
    let hp = &p0 * g.hamiltonian() * &p0;
    let ops: Vec<ComplexMatrix> = g.transfer_ops().iter().map(|h| &p0 * h * &p0).collect();
    let isos: Vec<ComplexMatrix> = basins.iter().map(|b| range_isometry(b.as_ref())).collect();

    let mut out = Vec::new();
    for i in 0..basins.len() {
        for j in (i + 1)..basins.len() {
            let (wi, wj) = (&isos[i], &isos[j]);
            let r = wi.ncols();
            if r == 0 || r != wj.ncols() {
                continue;
            }
            let left = kron(transpose(wj.as_ref()).as_ref(), dagger(wi.as_ref()).as_ref());
            let right = kron(conj(wj.as_ref()).as_ref(), wi.as_ref());
            let block = left * dm * right;
            let (vals, vecs) = linop::general_eigen(block.as_ref())?;
            let mut cands: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].re.abs() <= axis).collect();
            cands.sort_by(|&a, &b| {
                vals[a]
                    .im
                    .abs()
                    .partial_cmp(&vals[b].im.abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(vals[b].im.partial_cmp(&vals[a].im).unwrap_or(std::cmp::Ordering::Equal))
            });
            for k in cands {
                let x = unvectorize(vecs.col(k), r).expect("length r²");
                let polar = polar_isometry(x.as_ref(), 1e-6)?;
                if projector_rank((&polar * polar.adjoint()).as_ref()) != r {
                    continue;
                }
                let u = wi * polar * wj.adjoint();
                let lam = vals[k];
                let mut shift = -lam.im;
                if shift.abs() <= axis {
                    shift = 0.0;
                }
                let defect = intertwiner_defect(&u, &basins[i], &basins[j], &hp, &ops, shift);
                let status = Status::from_defect(defect, thr);
                if status != Status::Fail {
                    out.push(Intertwiner {
                        i,
                        j,
                        u,
                        energy_shift: shift,
                        eigenvalue: lam,
                        defect,
                        status,
                    });
                    break;
                }
            }
        }
    }
    Ok(out)
}

fn intertwiner_defect(
    u: &ComplexMatrix,
    pi: &ComplexMatrix,
    pj: &ComplexMatrix,
    hp: &ComplexMatrix,
    ops: &[ComplexMatrix],
    shift: f64,
) -> f64 {
    let ud = u.adjoint();
    let mut worst = spectral_norm((&ud * u - pj).as_ref()).max(spectral_norm((u * &ud - pi).as_ref()));
    for h in ops {
        let hd = h.adjoint();
        worst = worst
            .max(spectral_norm((h * u - u * h).as_ref()))
            .max(spectral_norm((&hd * u - u * &hd).as_ref()));
    }
    let e = hp * u - u * hp - linop::scale(u.as_ref(), c(shift, 0.0));
    worst.max(spectral_norm(e.as_ref()))
}

/// Basins linked by intertwiners, with the tensor factorization
/// `Q H ≅ ℂⁿ ⊗ H₀₀`.
#[derive(Debug, Clone)]
pub struct DephasingClass {
    /// Basin indices, anchor first.
    pub members: Vec<usize>,
    pub projector: ComplexMatrix,
    pub multiplicity: usize,
    pub inner_dim: usize,
    /// Energy of each member relative to the anchor.
    pub energies: Vec<f64>,
    /// `diag(energies)`.
    pub hamiltonian: ComplexMatrix,
    /// Isometries `W_m` (`d×inner_dim`) aligned through the intertwiners.
    pub isometries: Vec<ComplexMatrix>,
    /// Unique stationary state of the anchor basin, in inner coordinates.
    pub inner_state: ComplexMatrix,
    pub inner_min_eigenvalue: f64,
}

impl DephasingClass {
    /// Inner state embedded on member `m`'s basin.
    pub fn member_state(&self, m: usize) -> ComplexMatrix {
        let w = &self.isometries[m];
        w * &self.inner_state * w.adjoint()
    }
}

#[derive(Debug, Clone, Copy)]
struct Link {
    to: usize,
    via: usize,
    forward: bool,
}

/// Groups basins into dephasing classes by breadth-first search from the
/// lowest-indexed basin of each connected component.
pub fn dephasing_classes(
    g: &LindbladGenerator,
    basins: &[ComplexMatrix],
    intertwiners: &[Intertwiner],
    tol: &Tolerance,
) -> Result<Vec<DephasingClass>> {
    let n = basins.len();
    let mut adj: Vec<Vec<Link>> = vec![Vec::new(); n];
    for (k, it) in intertwiners.iter().enumerate() {
        adj[it.j].push(Link { to: it.i, via: k, forward: true });
        adj[it.i].push(Link { to: it.j, via: k, forward: false });
    }
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for anchor in 0..n {
        if seen[anchor] {
            continue;
        }
        let wa = range_isometry(basins[anchor].as_ref());
        let r = wa.ncols();
        let mut iso: Vec<Option<ComplexMatrix>> = vec![None; n];
        let mut energy = vec![0.0; n];
        let mut order = vec![anchor];
        iso[anchor] = Some(wa.clone());
        seen[anchor] = true;
        let mut queue = VecDeque::from([anchor]);
        while let Some(k) = queue.pop_front() {
            for l in &adj[k] {
                if seen[l.to] {
                    continue;
                }
                let it = &intertwiners[l.via];
                let wk = iso[k].as_ref().expect("visited");
                // forward: U maps basin k (= j) onto basin l.to (= i)
                let (w, e) = if l.forward {
                    (&it.u * wk, energy[k] + it.energy_shift)
                } else {
                    (it.u.adjoint() * wk, energy[k] - it.energy_shift)
                };
                seen[l.to] = true;
                iso[l.to] = Some(w);
                energy[l.to] = e;
                order.push(l.to);
                queue.push_back(l.to);
            }
        }
        let scale = g.superoperator().norm().max(1.0);
        for it in intertwiners {
            let (Some(wi), Some(wj)) = (&iso[it.i], &iso[it.j]) else {
                continue;
            };
            let overlap = linop::trace((wi.adjoint() * &it.u * wj).as_ref()).norm() / r as f64;
            let de = (energy[it.i] - energy[it.j] - it.energy_shift).abs();
            if (1.0 - overlap).abs() > 1e-6 || de > 1e2 * tol.match_tol * scale {
                return Err(Error::Certification(format!(
                    "intertwiners between basins {} and {} are inconsistent with their composition",
                    it.i, it.j
                )));
            }
        }
        let restricted = g.restrict_to_isometry(&wa)?;
        let inner = stationary_states_of(&restricted.generator.superoperator(), tol, g.superoperator().norm())?;
        if inner.basis_states.len() != 1 {
            return Err(Error::Certification(format!(
                "basin {anchor} hosts {} stationary states instead of one",
                inner.basis_states.len()
            )));
        }
        let inner_state = inner.basis_states[0].matrix().clone();
        let inner_min_eigenvalue = linop::min_eigenvalue_hermitian(inner_state.as_ref())?;
        let mut projector = linop::zeros(g.dim(), g.dim());
        for &m in &order {
            projector += &basins[m];
        }
        let energies: Vec<f64> = order.iter().map(|&m| energy[m]).collect();
        classes.push(DephasingClass {
            multiplicity: order.len(),
            inner_dim: r,
            hamiltonian: linop::diag_real(&energies),
            energies,
            isometries: order.iter().map(|&m| iso[m].clone().expect("visited")).collect(),
            members: order,
            projector,
            inner_state,
            inner_min_eigenvalue,
        });
    }
    debug_assert!(classes.iter().map(|c| c.multiplicity).sum::<usize>() == n);
    Ok(classes)
}
