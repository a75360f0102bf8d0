use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::linop::{
    self, c, dagger, hs_dot, identity, kron, null_space, range_isometry, unvectorize,
    ComplexMatrix, Tolerance, I,
};
use crate::spectral::entry_order;

/// Seed for the generic commutant element.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Hilbert–Schmidt orthonormal basis of `{H, h_α, h_α†}'`.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    dim: usize,
    pub basis: Vec<ComplexMatrix>,
}

impl CommutantBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    /// HS projection of `x` onto the algebra.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = linop::zeros(self.dim, self.dim);
        for b in &self.basis {
            out += linop::scale(b.as_ref(), hs_dot(b.as_ref(), x.as_ref()));
        }
        out
    }
}

/// Commutant of `{H, h_α, h_α†}` as the null space of the stacked
/// commutator map.
pub fn commutant(g: &LindbladGenerator, tol: &Tolerance) -> CommutantBasis {
    let mut ops: Vec<ComplexMatrix> = vec![g.hamiltonian().clone()];
    for h in g.transfer_ops() {
        ops.push(h.clone());
        ops.push(dagger(h.as_ref()));
    }
    commutant_of(g.dim(), &ops, tol)
}

pub(crate) fn commutant_of(d: usize, ops: &[ComplexMatrix], tol: &Tolerance) -> CommutantBasis {
    let n = d * d;
    let id = identity(d);
    let blocks: Vec<ComplexMatrix> = ops
        .iter()
        .filter_map(|a| {
            let m = kron(id.as_ref(), a.as_ref()) - kron(a.transpose(), id.as_ref());
            let nrm = m.norm_l2();
            (nrm > 1e-14).then(|| linop::scale(m.as_ref(), c(1.0 / nrm, 0.0)))
        })
        .collect();
    let basis = if blocks.is_empty() {
        (0..d)
            .flat_map(|j| (0..d).map(move |i| (i, j)))
            .map(|(i, j)| linop::matrix_unit(d, i, j))
            .collect()
    } else {
        let mut stacked = linop::zeros(n * blocks.len(), n);
        for (b, m) in blocks.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    stacked[(b * n + i, j)] = m[(i, j)];
                }
            }
        }
        null_space(stacked.as_ref(), tol)
            .iter()
            .map(|v| unvectorize(v.as_ref(), d).expect("length d²"))
            .collect()
    };
    CommutantBasis { dim: d, basis }
}

/// Eigen-groups of a Hermitian matrix as projectors, lowest eigenvalue first.
fn spectral_groups(x: &ComplexMatrix, rel_gap: f64) -> Result<Vec<ComplexMatrix>> {
    let r = x.nrows();
    let (vals, vecs) = linop::hermitian_eigen(x.as_ref())?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..r {
        match groups.last_mut() {
            Some(g) if vals[k] - vals[*g.last().unwrap()] <= rel_gap * scale => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    Ok(groups
        .into_iter()
        .map(|g| {
            let mut p = linop::zeros(r, r);
            for k in g {
                let col = vecs.col(k);
                for i in 0..r {
                    for j in 0..r {
                        p[(i, j)] += col[i] * col[j].conj();
                    }
                }
            }
            p
        })
        .collect())
}

fn is_scalar_on(w: &ComplexMatrix, cb: &CommutantBasis, thr: f64) -> bool {
    let r = w.ncols();
    let wd = dagger(w.as_ref());
    cb.basis.iter().all(|b| {
        let m = &wd * b * w;
        let s = linop::trace(m.as_ref()) / r as f64;
        (m - linop::scale(identity(r).as_ref(), s)).norm_l2() <= thr
    })
}

/// Orders projectors by rank, then by rounded entries (larger first).
pub fn sort_projectors(ps: &mut [ComplexMatrix]) {
    ps.sort_by(|a, b| {
        linop::projector_rank(a.as_ref())
            .cmp(&linop::projector_rank(b.as_ref()))
            .then(entry_order(a, b))
    });
}

/// Mutually orthogonal minimal projectors of the commutant, summing to 𝟙.
pub fn minimal_conserved_projectors(cb: &CommutantBasis, tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    minimal_conserved_projectors_seeded(cb, tol, DEFAULT_SEED)
}

pub fn minimal_conserved_projectors_seeded(
    cb: &CommutantBasis,
    tol: &Tolerance,
    seed: u64,
) -> Result<Vec<ComplexMatrix>> {
    let d = cb.dim;
    let rel_gap = 1e-6;
    let scalar_thr = (1e2 * tol.match_tol).max(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // deterministic first cut: the algebra's closest element to a diagonal ramp
    let ramp = linop::diag_real(&(1..=d).map(|k| k as f64).collect::<Vec<_>>());
    let x0 = linop::hermitian_part(cb.project(&ramp).as_ref());
    let mut work = if x0.norm_l2() > 1e-12 {
        spectral_groups(&x0, rel_gap)?
    } else {
        vec![identity(d)]
    };
    let mut done: Vec<ComplexMatrix> = Vec::new();
    let mut guard = 0;
    while let Some(p) = work.pop() {
        guard += 1;
        if guard > 4 * d * d + 16 {
            return Err(Error::Numerical("projector refinement did not terminate".into()));
        }
        let w = range_isometry(p.as_ref());
        if w.ncols() == 0 {
            continue;
        }
        if w.ncols() == 1 || is_scalar_on(&w, cb, scalar_thr) {
            done.push(&w * w.adjoint());
            continue;
        }
        let wd = dagger(w.as_ref());
        let compressed: Vec<ComplexMatrix> = cb.basis.iter().map(|b| &wd * b * &w).collect();
        let mut pieces = None;
        for _attempt in 0..4 {
            let mut gm = linop::zeros(w.ncols(), w.ncols());
            for b in &compressed {
                let coef: f64 = rng.random_range(-1.0..1.0);
                gm += linop::scale((b + b.adjoint()).as_ref(), c(coef, 0.0));
            }
            let groups = spectral_groups(&gm, rel_gap)?;
            if groups.len() > 1 {
                pieces = Some(groups);
                break;
            }
        }
        if pieces.is_none() {
            for b in &compressed {
                for herm in [b + b.adjoint(), linop::scale((b - b.adjoint()).as_ref(), -I)] {
                    if herm.norm_l2() < 1e-12 {
                        continue;
                    }
                    let groups = spectral_groups(&herm, rel_gap)?;
                    if groups.len() > 1 {
                        pieces = Some(groups);
                        break;
                    }
                }
                if pieces.is_some() {
                    break;
                }
            }
        }
        let Some(groups) = pieces else {
            return Err(Error::Certification(
                "commutant projector could not be split although the compressed algebra is not scalar".into(),
            ));
        };
        for q in groups {
            work.push(&w * q * &wd);
        }
    }
    let mut out: Vec<ComplexMatrix> = done
        .into_iter()
        .map(|p| linop::hermitian_part(p.as_ref()))
        .collect();
    sort_projectors(&mut out);
    Ok(out)
}
