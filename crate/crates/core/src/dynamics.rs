//! Time evolution of states, sampled trajectories with monitors, the
//! eigenvalue lower bound and the asymptotic block form.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generator::{DensityMatrix, LindbladGenerator};
use crate::json::{matrix_to_json, SCHEMA_VERSION};
use crate::linop::{self, c, dagger, vec_unchecked, ComplexMatrix, Superoperator, Tolerance};
use crate::spectral::decompose;
use crate::structure::StructureReport;

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(Error::InvalidInput(format!("time {t} is not finite")));
    }
    if t < 0.0 {
        return Err(Error::InvalidInput(format!("negative time {t}: the semigroup runs forward only")));
    }
    Ok(())
}

fn propagate(s: &Superoperator, rho: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let out = s.expm(t)?.apply(rho.as_ref())?;
    Ok(linop::hermitian_part(out.as_ref()))
}

/// `ρ(t) = e^{tD}(ρ₀)`.
pub fn evolve(g: &LindbladGenerator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    if rho0.dim() != g.dim() {
        return Err(Error::Dimension("state and generator dimensions differ".into()));
    }
    Ok(DensityMatrix::new_unchecked(propagate(&g.superoperator(), rho0.matrix(), t)?))
}

#[derive(Debug, Clone)]
pub struct Monitor {
    pub min_eigenvalue: f64,
    /// Eigenvalues above `rank_tol` times the largest.
    pub rank: usize,
    pub trace: f64,
    /// `‖P_a ρ P_b‖` for block pairs `a < b`, in lexicographic order.
    pub block_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub monitors: Vec<Monitor>,
    /// Number of projectors the block norms refer to.
    pub blocks: usize,
}

pub fn trajectory(g: &LindbladGenerator, rho0: &DensityMatrix, t_max: f64, steps: usize) -> Result<Trajectory> {
    trajectory_with_blocks(g, rho0, t_max, steps, &[])
}

/// Uniform-grid trajectory; block norms are reported for every pair of
/// the given projectors.
pub fn trajectory_with_blocks(
    g: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_max: f64,
    steps: usize,
    blocks: &[ComplexMatrix],
) -> Result<Trajectory> {
    check_time(t_max)?;
    if t_max <= 0.0 || steps == 0 {
        return Err(Error::InvalidInput("need t_max > 0 and at least one step".into()));
    }
    if rho0.dim() != g.dim() {
        return Err(Error::Dimension("state and generator dimensions differ".into()));
    }
    if blocks.iter().any(|p| p.nrows() != g.dim() || p.ncols() != g.dim()) {
        return Err(Error::Dimension("block projector dimension differs from generator".into()));
    }
    let s = g.superoperator();
    let tol = Tolerance::default();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut monitors = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = t_max * k as f64 / steps as f64;
        let m = if k == 0 {
            rho0.matrix().clone()
        } else {
            propagate(&s, rho0.matrix(), t)?
        };
        let (vals, _) = linop::hermitian_eigen(m.as_ref())?;
        let top = vals.last().copied().unwrap_or(0.0).abs();
        let mut block_norms = Vec::new();
        for a in 0..blocks.len() {
            for b in (a + 1)..blocks.len() {
                block_norms.push(linop::spectral_norm((&blocks[a] * &m * &blocks[b]).as_ref()));
            }
        }
        monitors.push(Monitor {
            min_eigenvalue: vals.first().copied().unwrap_or(0.0),
            rank: vals.iter().filter(|&&v| v > tol.rank_tol * top).count(),
            trace: linop::trace(m.as_ref()).re,
            block_norms,
        });
        times.push(t);
        states.push(DensityMatrix::new_unchecked(m));
    }
    Ok(Trajectory {
        times,
        states,
        monitors,
        blocks: blocks.len(),
    })
}

impl Trajectory {
    fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.dim())
    }

    fn monitor_headers(&self) -> Vec<String> {
        let mut h = vec!["min_eigenvalue".to_string(), "rank".to_string(), "trace".to_string()];
        for a in 0..self.blocks {
            for b in (a + 1)..self.blocks {
                h.push(format!("block_{a}_{b}"));
            }
        }
        h
    }

    /// CSV with `t`, real and imaginary parts of every entry (row-major),
    /// then the monitor columns.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let d = self.dim();
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for i in 0..d {
            for j in 0..d {
                header.push(format!("re_{i}_{j}"));
                header.push(format!("im_{i}_{j}"));
            }
        }
        header.extend(self.monitor_headers());
        wr.write_record(&header).map_err(csv_err)?;
        for ((t, s), m) in self.times.iter().zip(&self.states).zip(&self.monitors) {
            let mut row = vec![format!("{t:.12e}")];
            let x = s.matrix();
            for i in 0..d {
                for j in 0..d {
                    row.push(format!("{:.15e}", x[(i, j)].re));
                    row.push(format!("{:.15e}", x[(i, j)].im));
                }
            }
            row.push(format!("{:.15e}", m.min_eigenvalue));
            row.push(m.rank.to_string());
            row.push(format!("{:.15e}", m.trace));
            row.extend(m.block_norms.iter().map(|b| format!("{b:.15e}")));
            wr.write_record(&row).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "dim": self.dim(),
            "times": self.times,
            "states": self.states.iter().map(|s| matrix_to_json(s.matrix())).collect::<Vec<_>>(),
            "monitors": self.monitors.iter().map(|m| json!({
                "min_eigenvalue": m.min_eigenvalue,
                "rank": m.rank,
                "trace": m.trace,
                "block_norms": m.block_norms,
            })).collect::<Vec<_>>(),
        })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MonitorReport {
    /// `Σ_α ‖h_α‖²`.
    pub rate: f64,
    /// Smallest `r_j(t) − e^{−ct} r_j(0)` along overlap-paired branches.
    pub worst_margin: f64,
    /// Same bound on the sorted eigenvalues.
    pub sorted_margin: f64,
    pub violations: usize,
    pub pass: bool,
}

/// Checks `r_j(t) ≥ e^{−ct}·r_j(0)` on every eigenvalue branch of the
/// trajectory, with `c = Σ_α ‖h_α‖²`.
pub fn check_rank_bound(g: &LindbladGenerator, traj: &Trajectory) -> Result<MonitorReport> {
    let rate: f64 = g
        .transfer_ops()
        .iter()
        .map(|h| linop::spectral_norm(h.as_ref()).powi(2))
        .sum();
    let d = traj.dim();
    if d != g.dim() {
        return Err(Error::Dimension("trajectory and generator dimensions differ".into()));
    }
    let slack = 1e-8;
    let mut worst = f64::INFINITY;
    let mut sorted_worst = f64::INFINITY;
    let mut violations = 0;
    // column k of `branch_vecs` is the latest eigenvector of branch k
    let mut branch_vecs: Option<ComplexMatrix> = None;
    let mut branch0 = Vec::new();
    let mut sorted0 = Vec::new();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let (vals, vecs) = linop::hermitian_eigen(s.matrix().as_ref())?;
        let decay = (-rate * t).exp();
        let current = match &branch_vecs {
            None => {
                branch0 = vals.clone();
                sorted0 = vals.clone();
                branch_vecs = Some(vecs.clone());
                vals.clone()
            }
            Some(bv) => {
                let ov = dagger(bv.as_ref()) * &vecs;
                let mut used = vec![false; d];
                let mut pick = vec![0; d];
                for k in 0..d {
                    let j = (0..d)
                        .filter(|&j| !used[j])
                        .max_by(|&a, &b| {
                            ov[(k, a)]
                                .norm()
                                .partial_cmp(&ov[(k, b)].norm())
                                .unwrap_or(std::cmp::Ordering::Equal)
                        })
                        .expect("d > 0");
                    used[j] = true;
                    pick[k] = j;
                }
                branch_vecs = Some(ComplexMatrix::from_fn(d, d, |i, k| vecs[(i, pick[k])]));
                pick.iter().map(|&j| vals[j]).collect()
            }
        };
        for k in 0..d {
            let margin = current[k] - decay * branch0[k];
            worst = worst.min(margin);
            if margin < -slack {
                violations += 1;
            }
            sorted_worst = sorted_worst.min(vals[k] - decay * sorted0[k]);
        }
    }
    Ok(MonitorReport {
        rate,
        worst_margin: worst,
        sorted_margin: sorted_worst,
        violations,
        pass: violations == 0,
    })
}

/// One dephasing class in the long-time limit:
/// `λ_k Σ_{mm'} (e^{−iH₀t} R e^{iH₀t})_{mm'} W_m ρ_k W_{m'}†`.
#[derive(Debug, Clone)]
pub struct AsymptoticComponent {
    pub weight: f64,
    pub r: ComplexMatrix,
    pub hamiltonian: ComplexMatrix,
    pub inner_state: ComplexMatrix,
    pub isometries: Vec<ComplexMatrix>,
}

#[derive(Debug, Clone)]
pub struct AsymptoticForm {
    pub components: Vec<AsymptoticComponent>,
    pub t_check: f64,
    /// `‖ρ(t_check) − form(t_check)‖`.
    pub check_error: f64,
}

impl AsymptoticForm {
    pub fn state_at(&self, t: f64) -> ComplexMatrix {
        let d = self.components.first().map_or(0, |c| c.isometries[0].nrows());
        let mut out = linop::zeros(d, d);
        for comp in &self.components {
            let n = comp.r.nrows();
            let e: Vec<f64> = (0..n).map(|m| comp.hamiltonian[(m, m)].re).collect();
            for a in 0..n {
                for b in 0..n {
                    let phase = c(0.0, -(e[a] - e[b]) * t).exp();
                    let coef = comp.r[(a, b)] * phase * comp.weight;
                    if coef.norm() == 0.0 {
                        continue;
                    }
                    let blk = &comp.isometries[a] * &comp.inner_state * comp.isometries[b].adjoint();
                    out += linop::scale(blk.as_ref(), coef);
                }
            }
        }
        out
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "t_check": self.t_check,
            "check_error": self.check_error,
            "components": self.components.iter().map(|c| json!({
                "weight": c.weight,
                "r": matrix_to_json(&c.r),
                "hamiltonian": matrix_to_json(&c.hamiltonian),
                "inner_state": matrix_to_json(&c.inner_state),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Long-time form of `ρ(t)` from the spectral projection of `ρ₀` onto the
/// stationary and undamped eigenspaces.
pub fn asymptotic_state(
    g: &LindbladGenerator,
    rho0: &DensityMatrix,
    structure: &StructureReport,
    tol: &Tolerance,
) -> Result<AsymptoticForm> {
    let d = g.dim();
    if structure.dim != d || rho0.dim() != d {
        return Err(Error::Dimension("structure report does not match the generator".into()));
    }
    let sd = decompose(g, tol)?;
    if sd.zero_multiplicity() != structure.stationary.kernel_dim() {
        return Err(Error::InvalidInput("structure report does not match the generator".into()));
    }
    let mut limit = structure.stationary.project(rho0.matrix());
    let v0 = vec_unchecked(rho0.matrix().as_ref());
    for (_, pi) in sd.oscillating_projectors()? {
        let x = linop::unvectorize((&pi * &v0).as_ref(), d)?;
        limit += x;
    }
    let mut components = Vec::new();
    for cl in &structure.dephasing_classes {
        let n = cl.multiplicity;
        let mut m = linop::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let blk = cl.isometries[a].adjoint() * &limit * &cl.isometries[b];
                m[(a, b)] = linop::trace(blk.as_ref());
            }
        }
        let weight = linop::trace(m.as_ref()).re;
        let r = if weight.abs() > 1e-14 {
            linop::scale(m.as_ref(), c(1.0 / weight, 0.0))
        } else {
            linop::zeros(n, n)
        };
        components.push(AsymptoticComponent {
            weight,
            r,
            hamiltonian: cl.hamiltonian.clone(),
            inner_state: cl.inner_state.clone(),
            isometries: cl.isometries.clone(),
        });
    }
    let mut form = AsymptoticForm {
        components,
        t_check: 0.0,
        check_error: 0.0,
    };
    let t_check = structure.gap.map_or(0.0, |gap| 50.0 / gap);
    let evolved = propagate(&g.superoperator(), rho0.matrix(), t_check)?;
    form.t_check = t_check;
    form.check_error = linop::spectral_norm((evolved - form.state_at(t_check)).as_ref());
    Ok(form)
}
