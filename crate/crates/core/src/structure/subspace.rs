use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::linop::{self, c, check_projector, complement, spectral_norm, ComplexMatrix, Tolerance, C64};

/// Outcome of a numerical certification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Defect between the threshold and a hundred times the threshold.
    Marginal,
    Fail,
}

impl Status {
    pub fn from_defect(defect: f64, threshold: f64) -> Self {
        if defect <= threshold {
            Status::Pass
        } else if defect <= 100.0 * threshold {
            Status::Marginal
        } else {
            Status::Fail
        }
    }

    pub fn worst(self, other: Status) -> Status {
        match (self, other) {
            (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
            (Status::Marginal, _) | (_, Status::Marginal) => Status::Marginal,
            _ => Status::Pass,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub defect: f64,
    pub threshold: f64,
    pub status: Status,
}

impl Certificate {
    pub fn new(label: impl Into<String>, defect: f64, threshold: f64) -> Self {
        Self {
            label: label.into(),
            defect,
            threshold,
            status: Status::from_defect(defect, threshold),
        }
    }

    pub fn pass(&self) -> bool {
        self.status == Status::Pass
    }
}

/// `max_α ‖h_α P − P h_α P‖`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LazyCertificate {
    pub defect: f64,
    pub pass: bool,
    pub status: Status,
}

pub fn is_lazy(g: &LindbladGenerator, p: &ComplexMatrix, tol: &Tolerance) -> Result<LazyCertificate> {
    check_dims(g, p)?;
    check_projector(p.as_ref(), tol)?;
    let defect = lazy_defect(g, p);
    Ok(LazyCertificate {
        defect,
        pass: defect <= tol.match_tol,
        status: Status::from_defect(defect, tol.match_tol),
    })
}

pub(crate) fn lazy_defect(g: &LindbladGenerator, p: &ComplexMatrix) -> f64 {
    let q = complement(p.as_ref());
    g.transfer_ops()
        .iter()
        .map(|h| spectral_norm((&q * h * p).as_ref()))
        .fold(0.0, f64::max)
}

/// `‖P(iH − ½Σh_α†h_α)P⊥‖`.
pub(crate) fn outflow_defect(g: &LindbladGenerator, p: &ComplexMatrix) -> f64 {
    let q = complement(p.as_ref());
    let k = g.dissipation_sum();
    let m = linop::scale(g.hamiltonian().as_ref(), c(0.0, 1.0)) - linop::scale(k.as_ref(), c(0.5, 0.0));
    spectral_norm((p * m * q).as_ref())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollectingCertificate {
    pub lazy_defect: f64,
    pub outflow_defect: f64,
    /// `max_t ‖T^t(PρP) − P·T^t(PρP)·P‖` on a random state, when checked.
    pub confinement_defect: Option<f64>,
    pub pass: bool,
    pub status: Status,
}

pub fn is_collecting(g: &LindbladGenerator, p: &ComplexMatrix, tol: &Tolerance) -> Result<CollectingCertificate> {
    check_dims(g, p)?;
    check_projector(p.as_ref(), tol)?;
    let lazy = lazy_defect(g, p);
    let out = outflow_defect(g, p);
    let mut status = Status::from_defect(lazy, tol.match_tol).worst(Status::from_defect(out, tol.match_tol));
    let pass = lazy <= tol.match_tol && out <= tol.match_tol;
    let confinement_defect = if pass {
        let cd = confinement(g, p, 0x5EED)?;
        status = status.worst(Status::from_defect(cd, tol.match_tol));
        Some(cd)
    } else {
        None
    };
    Ok(CollectingCertificate {
        lazy_defect: lazy,
        outflow_defect: out,
        confinement_defect,
        pass: pass && status == Status::Pass,
        status,
    })
}

pub(crate) fn random_state(d: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = ComplexMatrix::from_fn(d, d, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = linop::trace(rho.as_ref()).re;
    linop::scale(rho.as_ref(), c(1.0 / tr, 0.0))
}

fn confinement(g: &LindbladGenerator, p: &ComplexMatrix, seed: u64) -> Result<f64> {
    let d = g.dim();
    let rho = random_state(d, seed);
    let prho = p * rho * p;
    let tr = linop::trace(prho.as_ref()).re;
    if tr <= 0.0 {
        return Ok(0.0);
    }
    let prho = linop::scale(prho.as_ref(), c(1.0 / tr, 0.0));
    let s = g.superoperator();
    let mut worst = 0.0f64;
    for t in [0.1, 1.0] {
        let evolved = s.expm(t)?.apply(prho.as_ref())?;
        let inside = p * &evolved * p;
        worst = worst.max(spectral_norm((&evolved - &inside).as_ref()));
    }
    Ok(worst)
}

/// `‖D†(P)‖`: zero exactly for conserved projectors.
pub fn enclosure_defect(g: &LindbladGenerator, p: &ComplexMatrix) -> Result<f64> {
    check_dims(g, p)?;
    Ok(spectral_norm(g.apply_heisenberg(p)?.as_ref()))
}

/// Occupation `Tr[P·ρ(t)]` starting from the maximally mixed state on `P`.
pub fn remaining_occupation(g: &LindbladGenerator, p: &ComplexMatrix, t: f64) -> Result<f64> {
    check_dims(g, p)?;
    let r = linop::trace(p.as_ref()).re;
    if r <= 0.5 {
        return Ok(0.0);
    }
    let rho = linop::scale(p.as_ref(), C64::new(1.0 / r, 0.0));
    let evolved = g.superoperator().expm(t)?.apply(rho.as_ref())?;
    Ok(linop::trace((p * evolved).as_ref()).re)
}

fn check_dims(g: &LindbladGenerator, p: &ComplexMatrix) -> Result<()> {
    if p.nrows() != g.dim() || p.ncols() != g.dim() {
        return Err(Error::Dimension(format!(
            "projector is {}x{}, generator acts on dimension {}",
            p.nrows(),
            p.ncols(),
            g.dim()
        )));
    }
    Ok(())
}
