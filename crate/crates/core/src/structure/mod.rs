//! Hilbert-space structure of a generator: enclosures, the decay cascade,
//! collecting basins, intertwiners and dephasing classes.

pub mod cascade;
pub mod commutant;
pub mod intertwiner;
pub mod subspace;
pub mod symmetry;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::json::{complex_to_json, matrix_to_json, SCHEMA_VERSION};
use crate::linop::{self, identity, projector_rank, ComplexMatrix, Tolerance};
use crate::spectral::{decompose, stationary_states, SpectralDecomposition, StationarySet};

pub use cascade::{cascade, Cascade};
pub use commutant::{
    commutant, minimal_conserved_projectors, minimal_conserved_projectors_seeded, CommutantBasis,
    DEFAULT_SEED,
};
pub use intertwiner::{dephasing_classes, find_intertwiners, DephasingClass, Intertwiner};
pub use subspace::{
    enclosure_defect, is_collecting, is_lazy, remaining_occupation, Certificate,
    CollectingCertificate, LazyCertificate, Status,
};
pub use symmetry::{detect_max_symmetry, verify_symmetry, MaxSymmetry, SymmetryCertificate};

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub dim: usize,
    pub p0: ComplexMatrix,
    /// Basin projectors per level, lowest level first.
    pub levels: Vec<Vec<ComplexMatrix>>,
    pub collecting_basins: Vec<ComplexMatrix>,
    pub dephasing_classes: Vec<DephasingClass>,
    pub intertwiners: Vec<Intertwiner>,
    pub commutant_dim: usize,
    pub restricted_commutant_dim: usize,
    pub enclosure_projectors: Vec<ComplexMatrix>,
    pub stationary: StationarySet,
    /// Smallest nonzero `|Re λ|`.
    pub gap: Option<f64>,
    pub certificates: Vec<Certificate>,
    pub warnings: Vec<String>,
    /// Basins that straddle an enclosure boundary.
    pub conflicts: Vec<String>,
    pub seed: u64,
}

pub fn analyze(g: &LindbladGenerator, tol: &Tolerance) -> Result<StructureReport> {
    analyze_with_seed(g, tol, DEFAULT_SEED)
}

pub fn analyze_with_seed(g: &LindbladGenerator, tol: &Tolerance, seed: u64) -> Result<StructureReport> {
    let sd = decompose(g, tol)?;
    analyze_spectrum(g, &sd, tol, seed)
}

pub(crate) fn analyze_spectrum(
    g: &LindbladGenerator,
    sd: &SpectralDecomposition,
    tol: &Tolerance,
    seed: u64,
) -> Result<StructureReport> {
    let d = g.dim();
    let ss = stationary_states(sd, tol)?;
    let cas = cascade::cascade_from(g, &ss, tol, seed)?;
    let gap = sd.gap();
    let scale = sd.norm().max(1.0);
    let mut certificates = Vec::new();

    let p0_cert = is_collecting(g, &cas.p0, tol)?;
    certificates.push(Certificate::new(
        "lowest level collecting",
        collecting_defect(&p0_cert),
        tol.match_tol,
    ));
    let collecting_basins = cas.levels[0].clone();
    for (k, b) in collecting_basins.iter().enumerate() {
        let cert = is_collecting(g, b, tol)?;
        certificates.push(Certificate::new(
            format!("basin {k} collecting"),
            collecting_defect(&cert),
            tol.match_tol,
        ));
    }
    if let Some(gap) = gap {
        let t = 100.0 / gap;
        for (lvl, basins) in cas.levels.iter().enumerate().skip(1) {
            for (k, b) in basins.iter().enumerate() {
                let occ = remaining_occupation(g, b, t)?;
                certificates.push(Certificate::new(format!("level {lvl} basin {k} decays"), occ, 1e-6));
            }
        }
    } else if cas.levels.len() > 1 {
        return Err(Error::Certification("decaying levels exist but the spectrum has no gap".into()));
    }

    let mut total = linop::zeros(d, d);
    for b in cas.levels.iter().flatten() {
        total += b;
    }
    certificates.push(Certificate::new(
        "basins resolve the identity",
        linop::spectral_norm((total - identity(d)).as_ref()),
        tol.match_tol,
    ));

    let intertwiners = find_intertwiners(g, &collecting_basins, tol)?;
    for it in &intertwiners {
        certificates.push(Certificate::new(
            format!("intertwiner {}-{}", it.i, it.j),
            it.defect,
            tol.match_tol * scale,
        ));
    }
    let classes = dephasing_classes(g, &collecting_basins, &intertwiners, tol)?;
    let mut warnings = Vec::new();
    for (k, cl) in classes.iter().enumerate() {
        let m = cl.inner_min_eigenvalue;
        if m < 1e-12 {
            certificates.push(Certificate::new(format!("class {k} inner state full rank"), 1e-8 - m, 0.0));
        } else if m < 1e-8 {
            warnings.push(format!("class {k} inner state is nearly singular (min eigenvalue {m:.3e})"));
        }
    }

    let cb = commutant(g, tol);
    let enclosure_projectors = minimal_conserved_projectors_seeded(&cb, tol, seed)?;
    let mut conflicts = Vec::new();
    for (k, b) in collecting_basins.iter().enumerate() {
        for (m, q) in enclosure_projectors.iter().enumerate() {
            let defect = linop::spectral_norm((b * q - q * b).as_ref());
            if defect > tol.match_tol.max(1e-7) {
                conflicts.push(format!(
                    "basin {k} is not aligned with enclosure {m} (commutator norm {defect:.3e})"
                ));
            }
        }
    }

    for c in &certificates {
        match c.status {
            Status::Pass => {}
            Status::Marginal => warnings.push(format!(
                "{}: defect {:.3e} exceeds {:.1e} marginally",
                c.label, c.defect, c.threshold
            )),
            Status::Fail => {
                return Err(Error::Certification(format!(
                    "{}: defect {:.3e} exceeds {:.1e}",
                    c.label, c.defect, c.threshold
                )))
            }
        }
    }

    Ok(StructureReport {
        dim: d,
        p0: cas.p0,
        levels: cas.levels,
        collecting_basins,
        dephasing_classes: classes,
        intertwiners,
        commutant_dim: cb.len(),
        restricted_commutant_dim: cas.restricted_commutant_dim,
        enclosure_projectors,
        stationary: ss,
        gap,
        certificates,
        warnings,
        conflicts,
        seed,
    })
}

fn collecting_defect(c: &CollectingCertificate) -> f64 {
    c.lazy_defect
        .max(c.outflow_defect)
        .max(c.confinement_defect.unwrap_or(0.0))
}

impl StructureReport {
    /// Ranks of the basins, level by level.
    pub fn basin_ranks(&self) -> Vec<Vec<usize>> {
        self.levels
            .iter()
            .map(|l| l.iter().map(|p| projector_rank(p.as_ref())).collect())
            .collect()
    }

    pub fn basin_count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    /// Projector onto the decaying part, `𝟙 − P₀`.
    pub fn decaying_projector(&self) -> ComplexMatrix {
        linop::complement(self.p0.as_ref())
    }

    pub fn passed(&self) -> bool {
        self.certificates.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "dim": self.dim,
            "seed": self.seed,
            "p0": matrix_to_json(&self.p0),
            "levels": self.levels.iter().map(|l| l.iter().map(matrix_to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "basin_ranks": self.basin_ranks(),
            "commutant_dim": self.commutant_dim,
            "restricted_commutant_dim": self.restricted_commutant_dim,
            "enclosure_projectors": self.enclosure_projectors.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "intertwiners": self.intertwiners.iter().map(|it| json!({
                "i": it.i,
                "j": it.j,
                "energy_shift": it.energy_shift,
                "eigenvalue": complex_to_json(it.eigenvalue),
                "defect": it.defect,
                "u": matrix_to_json(&it.u),
            })).collect::<Vec<_>>(),
            "dephasing_classes": self.dephasing_classes.iter().map(|cl| json!({
                "members": cl.members,
                "multiplicity": cl.multiplicity,
                "inner_dim": cl.inner_dim,
                "energies": cl.energies,
                "hamiltonian": matrix_to_json(&cl.hamiltonian),
                "inner_state": matrix_to_json(&cl.inner_state),
                "projector": matrix_to_json(&cl.projector),
            })).collect::<Vec<_>>(),
            "stationary_states": self.stationary.basis_states.iter().map(|s| matrix_to_json(s.matrix())).collect::<Vec<_>>(),
            "phase_relations": self.stationary.phase_relations.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "invariant_observables": self.stationary.invariant_observables.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "gap": self.gap,
            "certificates": self.certificates,
            "warnings": self.warnings,
            "conflicts": self.conflicts,
        })
    }

    /// Narrative summary: decay, dissipation and dephasing.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ranks = self.basin_ranks();
        s.push_str(&format!("dimension {}\n", self.dim));
        for (k, r) in ranks.iter().enumerate() {
            let kind = if k == 0 { "collecting" } else { "decaying" };
            s.push_str(&format!("level {k} ({kind}): basin ranks {r:?}\n"));
        }
        let decay = self.dim - projector_rank(self.p0.as_ref());
        s.push_str(&format!("Decay: {decay}-dimensional subspace empties\n"));
        for (k, cl) in self.dephasing_classes.iter().enumerate() {
            s.push_str(&format!(
                "Dissipation: class {k} relaxes to a rank-{} inner state on {} basin(s)\n",
                cl.inner_dim, cl.multiplicity
            ));
        }
        let stationary = self.intertwiners.iter().filter(|i| i.is_stationary()).count();
        let oscillating = self.intertwiners.len() - stationary;
        s.push_str(&format!(
            "Dephasing: {} class(es), {stationary} stationary and {oscillating} oscillating phase relation(s)\n",
            self.dephasing_classes.len()
        ));
        s.push_str(&format!("commutant dimension {}\n", self.commutant_dim));
        for w in &self.warnings {
            s.push_str(&format!("warning: {w}\n"));
        }
        for c in &self.conflicts {
            s.push_str(&format!("conflict: {c}\n"));
        }
        s
    }
}
