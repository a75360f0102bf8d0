//! GKS–Lindblad generators: construction, Schrödinger and Heisenberg action,
//! superoperator assembly, validity checks and restriction to subspaces.

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{matrix_from_rows, matrix_to_rows, GeneratorSpec};
use crate::linop::{
    self, check_projector, dagger, identity, kron, range_isometry, ComplexMatrix, Superoperator,
    Tolerance, C64, I,
};

/// `D(ρ) = −i[H,ρ] + Σ_α (h_α ρ h_α† − ½{h_α†h_α, ρ})`.
///
/// The list of transfer operators is taken as given: no gauge
/// normalization is applied, and structure tests quantify over exactly
/// these operators.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    transfer_ops: Vec<ComplexMatrix>,
    labels: Option<Vec<String>>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: ComplexMatrix, transfer_ops: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = hamiltonian.nrows();
        if dim == 0 {
            return Err(Error::Dimension("generator dimension must be positive".into()));
        }
        if hamiltonian.ncols() != dim {
            return Err(Error::Dimension(format!(
                "hamiltonian is {}x{}",
                hamiltonian.nrows(),
                hamiltonian.ncols()
            )));
        }
        for (k, h) in transfer_ops.iter().enumerate() {
            if h.nrows() != dim || h.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "transfer operator {k} is {}x{}, expected {dim}x{dim}",
                    h.nrows(),
                    h.ncols()
                )));
            }
        }
        Ok(Self {
            dim,
            hamiltonian,
            transfer_ops,
            labels: None,
        })
    }

    /// Purely dissipative generator (`H = 0`).
    pub fn dissipative(dim: usize, transfer_ops: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(linop::zeros(dim, dim), transfer_ops)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.transfer_ops.len() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} transfer operators",
                labels.len(),
                self.transfer_ops.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn transfer_ops(&self) -> &[ComplexMatrix] {
        &self.transfer_ops
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `Σ_α h_α†h_α`.
    pub fn dissipation_sum(&self) -> ComplexMatrix {
        let mut k = linop::zeros(self.dim, self.dim);
        for h in &self.transfer_ops {
            k += h.adjoint() * h;
        }
        k
    }

    /// `Σ_α ‖h_α‖²` with the spectral norm.
    pub fn rate_bound(&self) -> f64 {
        self.transfer_ops
            .iter()
            .map(|h| linop::spectral_norm(h.as_ref()).powi(2))
            .sum()
    }

    fn check_operand(&self, x: MatRef<'_, C64>) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "operand is {}x{}, generator acts on {}x{}",
                x.nrows(),
                x.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(())
    }

    /// Schrödinger-picture action on an arbitrary matrix.
    pub fn apply_schrodinger(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_operand(x.as_ref())?;
        let h = &self.hamiltonian;
        let mut out = linop::scale(linop::commutator(h.as_ref(), x.as_ref()).as_ref(), -I);
        let k = self.dissipation_sum();
        for a in &self.transfer_ops {
            out += a * x * a.adjoint();
        }
        out -= linop::scale(linop::anticommutator(k.as_ref(), x.as_ref()).as_ref(), C64::new(0.5, 0.0));
        Ok(out)
    }

    /// Heisenberg-picture action `i[H,f] + Σ_α (h_α† f h_α − ½{h_α†h_α, f})`.
    pub fn apply_heisenberg(&self, f: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_operand(f.as_ref())?;
        let h = &self.hamiltonian;
        let mut out = linop::scale(linop::commutator(h.as_ref(), f.as_ref()).as_ref(), I);
        let k = self.dissipation_sum();
        for a in &self.transfer_ops {
            out += a.adjoint() * f * a;
        }
        out -= linop::scale(linop::anticommutator(k.as_ref(), f.as_ref()).as_ref(), C64::new(0.5, 0.0));
        Ok(out)
    }

    /// The generator as a `d²×d²` matrix on column-stacked vectors.
    pub fn superoperator(&self) -> Superoperator {
        let d = self.dim;
        let id = identity(d);
        let h = &self.hamiltonian;
        let k = self.dissipation_sum();
        let mut m: ComplexMatrix = kron(id.as_ref(), h.as_ref()) - kron(h.transpose(), id.as_ref());
        m = linop::scale(m.as_ref(), -I);
        for a in &self.transfer_ops {
            m += kron(linop::conj(a.as_ref()).as_ref(), a.as_ref());
        }
        let half = C64::new(0.5, 0.0);
        m -= linop::scale(kron(id.as_ref(), k.as_ref()).as_ref(), half);
        m -= linop::scale(kron(k.transpose(), id.as_ref()).as_ref(), half);
        // cancellations in Σ h†h leave ulp-level residue
        let scale = h.norm_l2() + self.transfer_ops.iter().map(|a| a.norm_l2().powi(2)).sum::<f64>();
        let chop = 8.0 * f64::EPSILON * scale;
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                let re = if z.re.abs() <= chop { 0.0 } else { z.re };
                let im = if z.im.abs() <= chop { 0.0 } else { z.im };
                m[(i, j)] = C64::new(re, im);
            }
        }
        Superoperator::new(d, m).expect("dimensions agree by construction")
    }

    /// The Heisenberg-picture superoperator (Hilbert–Schmidt adjoint).
    pub fn adjoint_superoperator(&self) -> Superoperator {
        self.superoperator().adjoint()
    }

    pub fn validate(&self, tol: &Tolerance) -> ValidationReport {
        self.validate_with_step(tol, 1e-3)
    }

    /// Validity report with a configurable propagation step for the
    /// complete-positivity check.
    pub fn validate_with_step(&self, tol: &Tolerance, dt: f64) -> ValidationReport {
        let d = self.dim;
        let hermiticity_defect = linop::hermiticity_defect(self.hamiltonian.as_ref());
        let dual_one = self
            .apply_heisenberg(&identity(d))
            .expect("identity has the generator's dimension");
        let trace_preservation_defect = linop::spectral_norm(dual_one.as_ref());
        let scale = 1.0 + self.norm_scale();
        let min_choi_eigenvalue = self.min_choi_eigenvalue(dt).unwrap_or(f64::NEG_INFINITY);
        let mut warnings = Vec::new();
        let op_count = self.transfer_ops.len();
        if d > 1 && op_count > d * d - 1 {
            warnings.push(format!(
                "{op_count} transfer operators exceed the {} needed for dimension {d}",
                d * d - 1
            ));
        }
        ValidationReport {
            dim: d,
            transfer_op_count: op_count,
            hermiticity_defect,
            hermitian: hermiticity_defect <= tol.match_tol,
            trace_preservation_defect,
            trace_preserving: trace_preservation_defect <= tol.match_tol * scale,
            choi_step: dt,
            min_choi_eigenvalue,
            completely_positive: min_choi_eigenvalue >= -1e-8,
            warnings,
        }
    }

    fn norm_scale(&self) -> f64 {
        linop::spectral_norm(self.hamiltonian.as_ref()) + self.rate_bound()
    }

    fn min_choi_eigenvalue(&self, dt: f64) -> Result<f64> {
        let d = self.dim;
        let prop = self.superoperator().expm(dt)?;
        // Choi matrix Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|); column i·d+j of the propagator is vec Φ(e_ij)
        let pm = prop.matrix();
        let choi = Mat::from_fn(d * d, d * d, |r, s| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (s / d, s % d);
            pm[(b * d + a, j * d + i)]
        });
        linop::min_eigenvalue_hermitian(choi.as_ref())
    }

    /// Compression `{PHP, Ph_αP}` re-expressed on an orthonormal basis of
    /// the range of `p`.
    pub fn restrict(&self, p: &ComplexMatrix, tol: &Tolerance) -> Result<Restriction> {
        self.check_operand(p.as_ref())?;
        check_projector(p.as_ref(), tol)?;
        let w = range_isometry(p.as_ref());
        self.restrict_to_isometry(&w)
    }

    /// Compression onto the range of an isometry `w` (`d×r`, `w†w = 𝟙`).
    pub fn restrict_to_isometry(&self, w: &ComplexMatrix) -> Result<Restriction> {
        if w.nrows() != self.dim {
            return Err(Error::Dimension("isometry row count differs from generator dimension".into()));
        }
        if w.ncols() == 0 {
            return Err(Error::InvalidInput("cannot restrict to the zero subspace".into()));
        }
        let wd = dagger(w.as_ref());
        let h = &wd * &self.hamiltonian * w;
        let ops = self.transfer_ops.iter().map(|a| &wd * a * w).collect();
        let mut generator = LindbladGenerator::new(linop::hermitian_part(h.as_ref()), ops)?;
        generator.labels = self.labels.clone();
        Ok(Restriction {
            generator,
            isometry: w.clone(),
        })
    }

    pub fn to_spec(&self) -> GeneratorSpec {
        GeneratorSpec {
            dim: self.dim,
            hamiltonian: matrix_to_rows(&self.hamiltonian),
            transfer_ops: self.transfer_ops.iter().map(matrix_to_rows).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self> {
        let h = matrix_from_rows(&spec.hamiltonian)?;
        if h.nrows() != spec.dim {
            return Err(Error::Dimension(format!(
                "declared dim {} but hamiltonian has {} rows",
                spec.dim,
                h.nrows()
            )));
        }
        let ops = spec
            .transfer_ops
            .iter()
            .map(matrix_from_rows)
            .collect::<Result<Vec<_>>>()?;
        let g = Self::new(h, ops)?;
        match &spec.labels {
            Some(l) => g.with_labels(l.clone()),
            None => Ok(g),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: GeneratorSpec = serde_json::from_str(s)?;
        Self::from_spec(&spec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("spec serializes")
    }
}

/// Generator compressed to a subspace together with the isometry `W`
/// (full space ← subspace) that embeds it.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub generator: LindbladGenerator,
    pub isometry: ComplexMatrix,
}

impl Restriction {
    /// `W·x·W†`.
    pub fn embed(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.isometry * x * self.isometry.adjoint()
    }

    /// `W†·x·W`.
    pub fn compress(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.isometry.adjoint() * x * &self.isometry
    }

    /// Projector `W·W†` onto the subspace in full coordinates.
    pub fn projector(&self) -> ComplexMatrix {
        &self.isometry * self.isometry.adjoint()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub transfer_op_count: usize,
    pub hermiticity_defect: f64,
    pub hermitian: bool,
    pub trace_preservation_defect: f64,
    pub trace_preserving: bool,
    pub choi_step: f64,
    pub min_choi_eigenvalue: f64,
    pub completely_positive: bool,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.hermitian && self.trace_preserving && self.completely_positive
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        Self::check(&matrix, tol.match_tol)?;
        Ok(Self { matrix })
    }

    /// Checks the state invariants at a custom threshold.
    pub fn check(m: &ComplexMatrix, eps: f64) -> Result<()> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Dimension("density matrix must be square and non-empty".into()));
        }
        let herm = linop::hermiticity_defect(m.as_ref());
        if herm > eps {
            return Err(Error::InvalidInput(format!("density matrix not Hermitian (defect {herm:.3e})")));
        }
        let tr = linop::trace(m.as_ref());
        if (tr - C64::new(1.0, 0.0)).norm() > eps {
            return Err(Error::InvalidInput(format!("density matrix trace {:.6} ≠ 1", tr.re)));
        }
        let min = linop::min_eigenvalue_hermitian(m.as_ref())?;
        if min < -eps {
            return Err(Error::InvalidInput(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    /// Normalizes a positive semidefinite matrix to unit trace.
    pub fn from_positive(m: &ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let tr = linop::trace(m.as_ref()).re;
        if tr <= 0.0 {
            return Err(Error::InvalidInput("matrix has non-positive trace".into()));
        }
        Self::new(linop::scale(linop::hermitian_part(m.as_ref()).as_ref(), C64::new(1.0 / tr, 0.0)), tol)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: linop::scale(identity(d).as_ref(), C64::new(1.0 / d as f64, 0.0)),
        }
    }

    /// `|i⟩⟨i|`.
    pub fn basis_state(d: usize, i: usize) -> Self {
        Self {
            matrix: linop::matrix_unit(d, i, i),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linop::min_eigenvalue_hermitian(self.matrix.as_ref()).unwrap_or(f64::NAN)
    }
}

/// Zero-padded copy of a list of operators.
pub(crate) fn pad_ops(ops: &[ComplexMatrix], len: usize, d: usize) -> Vec<ComplexMatrix> {
    let mut out = ops.to_vec();
    while out.len() < len {
        out.push(linop::zeros(d, d));
    }
    out
}
