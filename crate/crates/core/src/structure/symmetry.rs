use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::linop::{
    self, c, conj, dagger, identity, matrix_unit, unitarity_defect, vec_unchecked, ComplexMatrix,
    Tolerance,
};
use crate::spectral::{decompose, stationary_states, SpectralDecomposition};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymmetryCertificate {
    pub antiunitary: bool,
    /// `max ‖D(ΘX) − Θ D(X)‖` over matrix units.
    pub dynamical_defect: f64,
    pub dynamical: bool,
    /// `max ‖D(Θκ)‖` over the stationary kernel basis.
    pub stationarity_defect: f64,
    pub stationarity: bool,
}

/// Checks whether `Θ(X) = V·X·V†` (or `V·X̄·V†`) commutes with the generator.
pub fn verify_symmetry(
    g: &LindbladGenerator,
    v: &ComplexMatrix,
    antiunitary: bool,
    tol: &Tolerance,
) -> Result<SymmetryCertificate> {
    let d = g.dim();
    if v.nrows() != d || v.ncols() != d {
        return Err(Error::Dimension("symmetry candidate has wrong dimension".into()));
    }
    let defect = unitarity_defect(v.as_ref());
    if defect > tol.match_tol {
        return Err(Error::NotUnitary { defect });
    }
    let vd = dagger(v.as_ref());
    let theta = |x: &ComplexMatrix| -> ComplexMatrix {
        if antiunitary {
            v * conj(x.as_ref()) * &vd
        } else {
            v * x * &vd
        }
    };
    let mut dynamical_defect = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let e = matrix_unit(d, i, j);
            let lhs = g.apply_schrodinger(&theta(&e))?;
            let rhs = theta(&g.apply_schrodinger(&e)?);
            dynamical_defect = dynamical_defect.max(linop::spectral_norm((lhs - rhs).as_ref()));
        }
    }
    let sd = decompose(g, tol)?;
    let ss = stationary_states(&sd, tol)?;
    let mut stationarity_defect = 0.0f64;
    for k in ss.kernel_elements() {
        let moved = g.apply_schrodinger(&theta(&k))?;
        stationarity_defect = stationarity_defect.max(linop::spectral_norm(moved.as_ref()));
    }
    let scale = sd.norm().max(1.0);
    let thr = tol.match_tol * scale;
    Ok(SymmetryCertificate {
        antiunitary,
        dynamical: dynamical_defect <= thr,
        dynamical_defect,
        stationarity: stationarity_defect <= thr,
        stationarity_defect,
    })
}

#[derive(Debug, Clone)]
pub struct MaxSymmetry {
    pub is_max: bool,
    /// Rate `λ` in `D(ρ) = λ(ω·Tr ρ − ρ)`.
    pub rate: f64,
    pub omega: ComplexMatrix,
    /// `‖D − λ(ω·Tr − id)‖` as a superoperator.
    pub defect: f64,
}

/// Tests whether the generator is `λ(ω·Tr[·] − id)` for some state `ω`.
pub fn detect_max_symmetry(g: &LindbladGenerator, tol: &Tolerance) -> Result<MaxSymmetry> {
    let d = g.dim();
    if d == 1 {
        return Ok(MaxSymmetry {
            is_max: true,
            rate: 0.0,
            omega: identity(1),
            defect: 0.0,
        });
    }
    let sd = decompose(g, tol)?;
    max_symmetry_of(&sd, tol)
}

pub(crate) fn max_symmetry_of(sd: &SpectralDecomposition, tol: &Tolerance) -> Result<MaxSymmetry> {
    let d = sd.dim();
    let n = d * d;
    let m = sd.superoperator().matrix();
    let Some(rate) = sd.gap() else {
        return Ok(MaxSymmetry {
            is_max: false,
            rate: 0.0,
            omega: linop::zeros(d, d),
            defect: linop::spectral_norm(m),
        });
    };
    // least-squares ω for fixed λ: columns of D + λ·id should all be
    // proportional to vec(ω)·conj(vec 𝟙)
    let shifted = m + linop::scale(identity(n).as_ref(), c(rate, 0.0));
    let one = vec_unchecked(identity(d).as_ref());
    let w = &shifted * &one;
    let omega_vec = w * faer::Scale(c(1.0 / (rate * d as f64), 0.0));
    let omega = linop::unvectorize(omega_vec.as_ref(), d)?;
    let fitted = linop::scale((&omega_vec * one.adjoint()).as_ref(), c(rate, 0.0))
        - linop::scale(identity(n).as_ref(), c(rate, 0.0));
    let defect = linop::spectral_norm((m - fitted).as_ref());
    Ok(MaxSymmetry {
        is_max: defect <= tol.match_tol * sd.norm().max(1.0),
        rate,
        omega,
        defect,
    })
}
