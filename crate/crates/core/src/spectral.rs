//! Eigen-analysis of the generator: eigenvalues and eigenmatrices, path
//! classes, stationary states, phase relations and invariant observables.

use faer::{Col, Mat};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generator::{DensityMatrix, LindbladGenerator};
use crate::json::{complex_to_json, SCHEMA_VERSION};
use crate::linop::{
    self, c, canonical_basis, dagger, from_columns, hs_dot, identity, null_space, orthonormalize,
    raw_null_space, trace, trace_product, unvectorize, vec_unchecked, ComplexMatrix,
    Superoperator, Tolerance, C64, ONE, ZERO,
};
use crate::structure::StructureReport;

/// Geometry of the path `t ↦ e^{λt}` traced by an eigenmatrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathClass {
    /// `λ = 0`.
    Stationary,
    /// Purely imaginary: undamped rotation.
    Circular,
    /// Negative real: straight decay.
    Straight,
    /// Complex with negative real part: spiral into zero.
    Spiral,
}

/// Group of numerically coincident eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenCluster {
    pub value: C64,
    pub members: Vec<usize>,
    pub geometric: usize,
    pub jordan_defect: usize,
    pub class: PathClass,
}

impl EigenCluster {
    pub fn algebraic(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    dim: usize,
    pub eigenvalues: Vec<C64>,
    /// Right eigenmatrices, Frobenius-normalized.
    pub eigenmatrices: Vec<ComplexMatrix>,
    /// Eigenmatrices of `D†` paired with `conj(λ)`.
    pub left_eigenmatrices: Vec<ComplexMatrix>,
    /// Algebraic minus geometric multiplicity of each eigenvalue's cluster.
    pub jordan_defects: Vec<usize>,
    pub clusters: Vec<EigenCluster>,
    superop: Superoperator,
    norm: f64,
    tol: Tolerance,
}

fn sort_key(a: &C64, b: &C64) -> std::cmp::Ordering {
    b.re
        .partial_cmp(&a.re)
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.im.abs().partial_cmp(&b.im.abs()).unwrap_or(std::cmp::Ordering::Equal))
        .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
}

fn classify(z: C64, axis_tol: f64) -> PathClass {
    let on_axis = z.re.abs() <= axis_tol;
    let real = z.im.abs() <= axis_tol;
    match (on_axis, real) {
        (true, true) => PathClass::Stationary,
        (true, false) => PathClass::Circular,
        (false, true) => PathClass::Straight,
        (false, false) => PathClass::Spiral,
    }
}

fn col_to_matrix(v: &Col<C64>, d: usize) -> ComplexMatrix {
    let mut m = unvectorize(v.as_ref(), d).expect("length d²");
    let n = m.norm_l2();
    if n > 0.0 {
        m = linop::scale(m.as_ref(), c(1.0 / n, 0.0));
    }
    let mut flat = vec_unchecked(m.as_ref());
    linop::normalize_phase(&mut flat);
    unvectorize(flat.as_ref(), d).expect("length d²")
}

/// Number of singular values of `m` at or below `abs_tol`.
fn nullity(m: &ComplexMatrix, abs_tol: f64) -> Result<usize> {
    let s = m
        .singular_values()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    Ok(s.iter().filter(|&&x| x <= abs_tol).count() + m.ncols().saturating_sub(s.len()))
}

/// Full eigen-analysis of the generator's superoperator.
pub fn decompose(g: &LindbladGenerator, tol: &Tolerance) -> Result<SpectralDecomposition> {
    decompose_superoperator(&g.superoperator(), tol)
}

pub fn decompose_superoperator(s: &Superoperator, tol: &Tolerance) -> Result<SpectralDecomposition> {
    tol.validate()?;
    let d = s.dim();
    let n = d * d;
    let m = s.matrix().to_owned();
    let norm = linop::spectral_norm(m.as_ref());
    let scale = norm.max(1.0);
    let axis_tol = tol.eig_group_tol * scale;

    let (vals, vecs) = linop::general_eigen(m.as_ref())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sort_key(&vals[a], &vals[b]));
    let eigenvalues: Vec<C64> = order.iter().map(|&k| vals[k]).collect();
    let right_cols: Vec<Col<C64>> = order.iter().map(|&k| vecs.col(k).to_owned()).collect();
    let eigenmatrices: Vec<ComplexMatrix> = right_cols.iter().map(|v| col_to_matrix(v, d)).collect();

    for z in &eigenvalues {
        if z.re > tol.match_tol * scale {
            return Err(Error::Certification(format!(
                "eigenvalue {z} has positive real part"
            )));
        }
    }

    // left eigenvectors, matched to conj(λ)
    let adj = dagger(m.as_ref());
    let (lvals, lvecs) = linop::general_eigen(adj.as_ref())?;
    let mut used = vec![false; n];
    let mut left_eigenmatrices = Vec::with_capacity(n);
    for z in &eigenvalues {
        let target = z.conj();
        let k = (0..n)
            .filter(|&k| !used[k])
            .min_by(|&a, &b| {
                (lvals[a] - target)
                    .norm()
                    .partial_cmp(&(lvals[b] - target).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("equal sizes");
        used[k] = true;
        left_eigenmatrices.push(col_to_matrix(&lvecs.col(k).to_owned(), d));
    }

    // conjugate pairing of the spectrum
    let pair_tol = 1e-5 * scale;
    for z in &eigenvalues {
        let ok = eigenvalues.iter().any(|w| (w - z.conj()).norm() <= pair_tol);
        if !ok {
            return Err(Error::Certification(format!(
                "eigenvalue {z} has no conjugate partner"
            )));
        }
    }

    // clustering: close values, or nearly parallel eigenvectors at moderate distance
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let loose = tol.eig_group_tol.sqrt() * scale;
    for a in 0..n {
        for b in (a + 1)..n {
            let dist = (eigenvalues[a] - eigenvalues[b]).norm();
            let join = if dist <= axis_tol {
                true
            } else if dist <= loose {
                let ov: C64 = (0..n).map(|p| right_cols[a][p].conj() * right_cols[b][p]).sum();
                let na = right_cols[a].norm_l2();
                let nb = right_cols[b].norm_l2();
                ov.norm() >= (1.0 - 1e-6) * na * nb
            } else {
                false
            };
            if join {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb.max(ra)] = rb.min(ra);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group = std::collections::HashMap::new();
    for k in 0..n {
        let r = find(&mut parent, k);
        let gi = *root_to_group.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[gi].push(k);
    }

    let mut clusters = Vec::with_capacity(groups.len());
    let mut jordan_defects = vec![0usize; n];
    for members in groups {
        let mean: C64 = members.iter().map(|&k| eigenvalues[k]).sum::<C64>() / members.len() as f64;
        let value = if mean.norm() <= axis_tol { ZERO } else { mean };
        let (geometric, defect) = if members.len() == 1 {
            (1, 0)
        } else {
            let a = &m - linop::scale(identity(n).as_ref(), value);
            let a_norm = linop::spectral_norm(a.as_ref()).max(1.0);
            let t1 = axis_tol.max(tol.rank_tol * a_norm);
            let geo = nullity(&a, t1)?;
            let mut pw = a.clone();
            for _ in 1..members.len() {
                pw = &pw * &a;
            }
            let tm = t1 * a_norm.powi(members.len() as i32 - 1);
            let alg = nullity(&pw, tm)?.min(members.len()).max(geo);
            (geo, alg - geo)
        };
        for &k in &members {
            jordan_defects[k] = defect;
        }
        clusters.push(EigenCluster {
            value,
            class: classify(value, axis_tol),
            members,
            geometric,
            jordan_defect: defect,
        });
    }
    if let Some(zero) = clusters.iter().find(|c| c.class == PathClass::Stationary) {
        if zero.jordan_defect != 0 {
            return Err(Error::Certification(format!(
                "eigenvalue 0 has a Jordan defect of {}",
                zero.jordan_defect
            )));
        }
    }

    Ok(SpectralDecomposition {
        dim: d,
        eigenvalues,
        eigenmatrices,
        left_eigenmatrices,
        jordan_defects,
        clusters,
        superop: s.clone(),
        norm,
        tol: *tol,
    })
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "dim": self.dim,
            "eigenvalues": self.eigenvalues.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>(),
            "clusters": self.clusters.iter().map(|c| json!({
                "value": complex_to_json(c.value),
                "algebraic": c.algebraic(),
                "geometric": c.geometric,
                "jordan_defect": c.jordan_defect,
                "class": c.class,
            })).collect::<Vec<_>>(),
            "gap": self.gap(),
            "zero_multiplicity": self.zero_multiplicity(),
        })
    }

    /// One row per eigenvalue: `index,re,im,class,jordan_defect`.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "re", "im", "class", "jordan_defect"])
            .map_err(|e| Error::Numerical(e.to_string()))?;
        let classes = self.path_classes();
        for (k, z) in self.eigenvalues.iter().enumerate() {
            let class = serde_json::to_value(classes[k]).expect("unit enum");
            w.write_record([
                k.to_string(),
                format!("{:.15e}", z.re),
                format!("{:.15e}", z.im),
                class.as_str().unwrap_or_default().to_string(),
                self.jordan_defects[k].to_string(),
            ])
            .map_err(|e| Error::Numerical(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("dimension {}, {} eigenvalues\n", self.dim, self.eigenvalues.len());
        for c in &self.clusters {
            s.push_str(&format!(
                "{:>+.9} {:+.9}i  x{} ({:?}, jordan defect {})\n",
                c.value.re, c.value.im, c.algebraic(), c.class, c.jordan_defect
            ));
        }
        s
    }

    pub fn superoperator(&self) -> &Superoperator {
        &self.superop
    }

    /// Spectral norm of the superoperator.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// Threshold for imaginary-axis and real-axis membership.
    pub fn axis_tol(&self) -> f64 {
        self.tol.eig_group_tol * self.norm.max(1.0)
    }

    /// Smallest nonzero `|Re λ|`, if any eigenvalue is off the imaginary axis.
    pub fn gap(&self) -> Option<f64> {
        let t = self.axis_tol();
        self.eigenvalues
            .iter()
            .filter(|z| z.re.abs() > t)
            .map(|z| z.re.abs())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    }

    pub fn zero_multiplicity(&self) -> usize {
        self.clusters
            .iter()
            .filter(|c| c.class == PathClass::Stationary)
            .map(|c| c.algebraic())
            .sum()
    }

    /// Clusters on the imaginary axis away from zero.
    pub fn oscillating_clusters(&self) -> Vec<&EigenCluster> {
        self.clusters
            .iter()
            .filter(|c| c.class == PathClass::Circular)
            .collect()
    }

    pub fn oscillating_count(&self) -> usize {
        self.oscillating_clusters().iter().map(|c| c.algebraic()).sum()
    }

    /// Path class of every eigenvalue, in eigenvalue order.
    pub fn path_classes(&self) -> Vec<PathClass> {
        let t = self.axis_tol();
        self.eigenvalues.iter().map(|&z| classify(z, t)).collect()
    }

    /// Spectral projectors (as `d²×d²` matrices) onto the generalized
    /// eigenspaces of the nonzero imaginary-axis eigenvalues.
    pub fn oscillating_projectors(&self) -> Result<Vec<(C64, ComplexMatrix)>> {
        let n = self.dim * self.dim;
        let m = self.superop.matrix();
        let mut out = Vec::new();
        for cl in self.oscillating_clusters() {
            let lam = cl.value;
            let a = m - linop::scale(identity(n).as_ref(), lam);
            let ad = dagger(a.as_ref());
            let scaled_tol = Tolerance {
                rank_tol: (self.axis_tol() / linop::spectral_norm(a.as_ref()).max(1e-300)).max(self.tol.rank_tol),
                ..self.tol
            };
            let r = raw_null_space(a.as_ref(), scaled_tol.rank_tol);
            let l = raw_null_space(ad.as_ref(), scaled_tol.rank_tol);
            if r.len() != l.len() || r.is_empty() {
                return Err(Error::Numerical(format!(
                    "imaginary eigenvalue {lam}: {} right vs {} left eigenvectors",
                    r.len(),
                    l.len()
                )));
            }
            let rm = from_columns(&r, n);
            let lm = from_columns(&l, n);
            let g = lm.adjoint() * &rm;
            let ginv = linop::solve(g.as_ref(), identity(r.len()).as_ref());
            out.push((lam, &rm * ginv * lm.adjoint()));
        }
        Ok(out)
    }
}

/// Path class per eigenvalue.
pub fn classify_paths(sd: &SpectralDecomposition) -> Vec<PathClass> {
    sd.path_classes()
}

/// Stationary states, stationary phase relations and their dual invariant
/// observables.
#[derive(Debug, Clone)]
pub struct StationarySet {
    dim: usize,
    /// Extremal states of the minimal collecting regions, canonically ordered.
    pub basis_states: Vec<DensityMatrix>,
    /// Support projector of each basis state.
    pub supports: Vec<ComplexMatrix>,
    /// Stationary off-diagonal eigenmatrices between supports.
    pub phase_relations: Vec<ComplexMatrix>,
    /// `(a, b)` such that the phase relation lives in `S_a·X·S_b`.
    pub phase_relation_blocks: Vec<(usize, usize)>,
    /// Dual basis: `Tr[A_i κ_j] = δ_ij` against states then phase relations.
    pub invariant_observables: Vec<ComplexMatrix>,
    /// Orthonormal basis of the kernel of `D†` before dualization.
    pub observable_span: Vec<ComplexMatrix>,
}

impl StationarySet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// States followed by phase relations.
    pub fn kernel_elements(&self) -> Vec<ComplexMatrix> {
        self.basis_states
            .iter()
            .map(|s| s.matrix().clone())
            .chain(self.phase_relations.iter().cloned())
            .collect()
    }

    pub fn kernel_dim(&self) -> usize {
        self.basis_states.len() + self.phase_relations.len()
    }

    /// Projection onto the kernel of `D` along the range: `Σ_j κ_j Tr[A_j x]`.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = linop::zeros(self.dim, self.dim);
        for (k, a) in self.kernel_elements().iter().zip(&self.invariant_observables) {
            out += linop::scale(k.as_ref(), trace_product(a.as_ref(), x.as_ref()));
        }
        out
    }

    /// Long-time limit of the Heisenberg evolution restricted to the
    /// stationary part: `Σ_j Tr[f κ_j] A_j`.
    pub fn heisenberg_limit(&self, f: &ComplexMatrix) -> ComplexMatrix {
        let mut out = linop::zeros(self.dim, self.dim);
        for (k, a) in self.kernel_elements().iter().zip(&self.invariant_observables) {
            out += linop::scale(a.as_ref(), trace_product(f.as_ref(), k.as_ref()));
        }
        out
    }

    /// `Tr[A_i κ_j]`.
    pub fn pairing_matrix(&self) -> ComplexMatrix {
        let ks = self.kernel_elements();
        Mat::from_fn(self.invariant_observables.len(), ks.len(), |i, j| {
            trace_product(self.invariant_observables[i].as_ref(), ks[j].as_ref())
        })
    }
}

fn real_orthonormalize(mats: &[ComplexMatrix], abs_tol: f64) -> Vec<ComplexMatrix> {
    let mut out: Vec<ComplexMatrix> = Vec::new();
    for m in mats {
        let mut r = m.clone();
        for _ in 0..2 {
            for q in &out {
                let coef = hs_dot(q.as_ref(), r.as_ref()).re;
                r -= linop::scale(q.as_ref(), c(coef, 0.0));
            }
        }
        let n = r.norm_l2();
        if n > abs_tol {
            out.push(linop::scale(r.as_ref(), c(1.0 / n, 0.0)));
        }
    }
    out
}

struct KernelSolver<'a> {
    d: usize,
    dn: ComplexMatrix,
    tol: &'a Tolerance,
}

impl<'a> KernelSolver<'a> {
    /// `scale` floors the normalization so that a restriction whose
    /// superoperator is pure roundoff is not mistaken for full rank.
    fn new(s: &Superoperator, tol: &'a Tolerance, scale: f64) -> Self {
        let own = linop::spectral_norm(s.matrix());
        let nrm = own.max(scale);
        let dn = if own <= tol.rank_tol * nrm {
            linop::zeros(s.matrix().nrows(), s.matrix().ncols())
        } else if nrm > 0.0 {
            linop::scale(s.matrix(), c(1.0 / nrm, 0.0))
        } else {
            s.matrix().to_owned()
        };
        Self { d: s.dim(), dn, tol }
    }

    /// Real-orthonormal Hermitian basis of `{X : D(X) = 0, X = R·X·R}`,
    /// optionally restricted to traceless `X`.
    fn hermitian_kernel(&self, region: &ComplexMatrix, traceless: bool) -> Vec<ComplexMatrix> {
        let d = self.d;
        let n = d * d;
        let proj = linop::kron(region.transpose(), region.as_ref());
        let outside = identity(n) - proj;
        let extra = usize::from(traceless);
        let mut stacked = linop::zeros(2 * n + extra, n);
        for i in 0..n {
            for j in 0..n {
                stacked[(i, j)] = self.dn[(i, j)];
                stacked[(n + i, j)] = outside[(i, j)];
            }
        }
        if traceless {
            for i in 0..d {
                stacked[(2 * n, i * d + i)] = ONE;
            }
        }
        let ns = null_space(stacked.as_ref(), self.tol);
        let mut cands = Vec::with_capacity(2 * ns.len());
        for v in &ns {
            let k = unvectorize(v.as_ref(), d).expect("length d²");
            let kd = dagger(k.as_ref());
            cands.push(linop::scale((&k + &kd).as_ref(), c(0.5, 0.0)));
            cands.push(linop::scale((&k - &kd).as_ref(), c(0.0, -0.5)));
        }
        real_orthonormalize(&cands, 1e-6)
    }
}

fn ramp(d: usize) -> ComplexMatrix {
    linop::diag_real(&(1..=d).map(|k| k as f64).collect::<Vec<_>>())
}

fn first_diagonal(m: &ComplexMatrix) -> usize {
    (0..m.nrows()).find(|&i| m[(i, i)].norm() > 1e-9).unwrap_or(m.nrows())
}

/// Lexicographic comparison of rounded entries, larger values first.
pub(crate) fn entry_order(a: &ComplexMatrix, b: &ComplexMatrix) -> std::cmp::Ordering {
    let round = |x: f64| (x * 1e6).round() as i64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            let o = round(y.re).cmp(&round(x.re)).then(round(y.im).cmp(&round(x.im)));
            if o != std::cmp::Ordering::Equal {
                return o;
            }
        }
    }
    std::cmp::Ordering::Equal
}

fn split_regions(
    ks: &KernelSolver<'_>,
    region: ComplexMatrix,
    depth: usize,
    out: &mut Vec<(ComplexMatrix, ComplexMatrix)>,
) -> Result<()> {
    let d = ks.d;
    if linop::projector_rank(region.as_ref()) == 0 {
        return Ok(());
    }
    if depth > d + 1 {
        return Err(Error::Numerical("stationary-state splitting did not terminate".into()));
    }
    let herm = ks.hermitian_kernel(&region, false);
    match herm.len() {
        0 => Err(Error::Certification(
            "a region inside the stationary support hosts no stationary state".into(),
        )),
        1 => {
            let mut x = herm[0].clone();
            if trace(x.as_ref()).re < 0.0 {
                x = linop::scale(x.as_ref(), c(-1.0, 0.0));
            }
            let tr = trace(x.as_ref()).re;
            let (vals, _) = linop::hermitian_eigen(x.as_ref())?;
            let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if tr <= 0.0 || vals[0] < -1e-7 * max {
                return Err(Error::Certification(
                    "unique kernel element of a region is not positive".into(),
                ));
            }
            let rho = linop::scale(x.as_ref(), c(1.0 / tr, 0.0));
            let support = linop::support_projector(rho.as_ref(), 1e-11)?;
            let rest = linop::round_projector((&region - &support).as_ref());
            out.push((support, rho));
            split_regions(ks, rest, depth + 1, out)
        }
        _ => {
            let traceless = ks.hermitian_kernel(&region, true);
            if traceless.is_empty() {
                return Err(Error::Numerical("no traceless stationary element to split".into()));
            }
            let r = ramp(d);
            let mut x = linop::zeros(d, d);
            for b in &traceless {
                x += linop::scale(b.as_ref(), c(hs_dot(b.as_ref(), r.as_ref()).re, 0.0));
            }
            if x.norm_l2() < 1e-6 * r.norm_l2() {
                x = traceless[0].clone();
            }
            let (vals, vecs) = linop::hermitian_eigen(x.as_ref())?;
            let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let mut plus = linop::zeros(d, d);
            let mut minus = linop::zeros(d, d);
            let mut sp = linop::zeros(d, d);
            let mut sm = linop::zeros(d, d);
            for (k, &v) in vals.iter().enumerate() {
                let col = vecs.col(k);
                let outer = Mat::from_fn(d, d, |i, j| col[i] * col[j].conj());
                if v > 1e-8 * max {
                    plus += linop::scale(outer.as_ref(), c(v, 0.0));
                    sp += &outer;
                } else if v < -1e-8 * max {
                    minus += linop::scale(outer.as_ref(), c(-v, 0.0));
                    sm += &outer;
                }
            }
            let dn = &ks.dn;
            for (part, name) in [(&plus, "positive"), (&minus, "negative")] {
                let res = (dn * vec_unchecked(part.as_ref())).norm_l2();
                if res > 1e3 * ks.tol.match_tol.max(ks.tol.rank_tol) * part.norm_l2() {
                    return Err(Error::Certification(format!(
                        "{name} part of a stationary element is not stationary (residual {res:.3e})"
                    )));
                }
            }
            let rest = linop::round_projector((&region - &sp - &sm).as_ref());
            split_regions(ks, sp, depth + 1, out)?;
            split_regions(ks, sm, depth + 1, out)?;
            split_regions(ks, rest, depth + 1, out)
        }
    }
}

/// Splits the kernel of the generator into extremal states, phase relations
/// and the dual invariant observables.
pub fn stationary_states(sd: &SpectralDecomposition, tol: &Tolerance) -> Result<StationarySet> {
    stationary_states_of(&sd.superop, tol, 0.0)
}

pub(crate) fn stationary_states_of(s: &Superoperator, tol: &Tolerance, scale: f64) -> Result<StationarySet> {
    let d = s.dim();
    let ks = KernelSolver::new(s, tol, scale);
    let kernel: Vec<ComplexMatrix> = null_space(ks.dn.as_ref(), tol)
        .iter()
        .map(|v| unvectorize(v.as_ref(), d).expect("length d²"))
        .collect();
    if kernel.is_empty() {
        return Err(Error::Certification("the generator has no stationary state".into()));
    }
    // singular vectors rather than Σ k·k†, whose eigenvalues square the populations
    let mut total = linop::zeros(d, d);
    for k in &kernel {
        let svd = k.svd().map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
        let sv = svd.S().column_vector();
        for i in 0..sv.nrows() {
            if sv[i].re > 1e-11 {
                let (u, v) = (svd.U().col(i), svd.V().col(i));
                total += &(u * u.adjoint()) + &(v * v.adjoint());
            }
        }
    }
    let p0 = linop::support_projector(total.as_ref(), 1e-12)?;

    let mut regions = Vec::new();
    split_regions(&ks, p0, 0, &mut regions)?;
    regions.sort_by(|(sa, ra), (sb, rb)| {
        linop::projector_rank(sa.as_ref())
            .cmp(&linop::projector_rank(sb.as_ref()))
            .then(first_diagonal(ra).cmp(&first_diagonal(rb)))
            .then(entry_order(ra, rb))
    });

    let mut phase_relations = Vec::new();
    let mut phase_relation_blocks = Vec::new();
    let n = d * d;
    for a in 0..regions.len() {
        for b in (a + 1)..regions.len() {
            let (sa, sb) = (&regions[a].0, &regions[b].0);
            let blocks: Vec<Col<C64>> = kernel
                .iter()
                .map(|k| vec_unchecked((sa * k * sb).as_ref()))
                .filter(|v| v.norm_l2() > 1e-7)
                .collect();
            if blocks.is_empty() {
                continue;
            }
            let ortho = orthonormalize(&blocks, 1e-7);
            for v in canonical_basis(&ortho, n) {
                let m = unvectorize(v.as_ref(), d).expect("length d²");
                phase_relations.push(dagger(m.as_ref()));
                phase_relation_blocks.push((b, a));
                phase_relations.push(m);
                phase_relation_blocks.push((a, b));
            }
        }
    }
    // order: by block pair, each block's relations consecutively
    let mut idx: Vec<usize> = (0..phase_relations.len()).collect();
    idx.sort_by_key(|&k| (phase_relation_blocks[k], k));
    let phase_relations: Vec<ComplexMatrix> = idx.iter().map(|&k| phase_relations[k].clone()).collect();
    let phase_relation_blocks: Vec<(usize, usize)> = idx.iter().map(|&k| phase_relation_blocks[k]).collect();

    let count = regions.len() + phase_relations.len();
    if count != kernel.len() {
        return Err(Error::Certification(format!(
            "kernel has dimension {} but {} states and {} phase relations were found",
            kernel.len(),
            regions.len(),
            phase_relations.len()
        )));
    }

    let adj = dagger(ks.dn.as_ref());
    let observable_span: Vec<ComplexMatrix> = null_space(adj.as_ref(), tol)
        .iter()
        .map(|v| unvectorize(v.as_ref(), d).expect("length d²"))
        .collect();
    if observable_span.len() != count {
        return Err(Error::Certification(format!(
            "kernel of D has dimension {count} but kernel of D† has dimension {}",
            observable_span.len()
        )));
    }
    let kernel_elems: Vec<ComplexMatrix> = regions
        .iter()
        .map(|(_, r)| r.clone())
        .chain(phase_relations.iter().cloned())
        .collect();
    let gram = Mat::from_fn(count, count, |l, j| {
        trace_product(observable_span[l].as_ref(), kernel_elems[j].as_ref())
    });
    // A_i = Σ_l C_il B_l with C·G = 𝟙
    let ginv = linop::solve(gram.as_ref(), identity(count).as_ref());
    let mut invariant_observables = Vec::with_capacity(count);
    for i in 0..count {
        let mut a = linop::zeros(d, d);
        for l in 0..count {
            a += linop::scale(observable_span[l].as_ref(), ginv[(i, l)]);
        }
        if i < regions.len() {
            a = linop::hermitian_part(a.as_ref());
        }
        invariant_observables.push(a);
    }

    let set = StationarySet {
        dim: d,
        basis_states: regions
            .iter()
            .map(|(_, r)| DensityMatrix::new_unchecked(linop::hermitian_part(r.as_ref())))
            .collect(),
        supports: regions.iter().map(|(s, _)| s.clone()).collect(),
        phase_relations,
        phase_relation_blocks,
        invariant_observables,
        observable_span,
    };
    let pairing = set.pairing_matrix();
    let defect = (pairing - identity(count)).norm_l2();
    if defect > 1e-6 {
        return Err(Error::Certification(format!(
            "invariant observables are not dual to the kernel basis (defect {defect:.3e})"
        )));
    }
    Ok(set)
}

/// Whether the span of the invariant observables is a *-algebra.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraReport {
    pub is_algebra: bool,
    pub product_defect: f64,
    pub adjoint_defect: f64,
}

pub fn invariant_observable_closure(ss: &StationarySet, tol: &Tolerance) -> AlgebraReport {
    let d = ss.dim;
    let n = d * d;
    let vecs: Vec<Col<C64>> = ss
        .invariant_observables
        .iter()
        .map(|a| vec_unchecked(a.as_ref()))
        .collect();
    let basis = orthonormalize(&vecs, 1e-10);
    let residual = |m: &ComplexMatrix| -> f64 {
        let mut v = vec_unchecked(m.as_ref());
        for q in &basis {
            let coef: C64 = (0..n).map(|p| q[p].conj() * v[p]).sum();
            for p in 0..n {
                v[p] -= q[p] * coef;
            }
        }
        v.norm_l2()
    };
    let mut product_defect = 0.0f64;
    let mut adjoint_defect = 0.0f64;
    let obs = &ss.invariant_observables;
    for a in obs {
        let na = a.norm_l2().max(1e-300);
        adjoint_defect = adjoint_defect.max(residual(&dagger(a.as_ref())) / na);
        for b in obs {
            let nb = b.norm_l2().max(1e-300);
            product_defect = product_defect.max(residual(&(a * b)) / (na * nb));
        }
    }
    let thr = tol.match_tol.max(1e3 * tol.rank_tol);
    AlgebraReport {
        is_algebra: product_defect <= thr && adjoint_defect <= thr,
        product_defect,
        adjoint_defect,
    }
}

/// Long-time Heisenberg limit of a collecting-basin projector.
#[derive(Debug, Clone)]
pub struct ObservableExtension {
    pub observable: ComplexMatrix,
    /// Time used for the finite-time cross-check.
    pub t_check: f64,
    /// `‖T^{t†}(P) − A‖` at `t_check`.
    pub check_error: f64,
}

pub fn invariant_observable_extension(
    g: &LindbladGenerator,
    p0k: &ComplexMatrix,
    structure: &StructureReport,
    tol: &Tolerance,
) -> Result<ObservableExtension> {
    if p0k.nrows() != g.dim() || p0k.ncols() != g.dim() {
        return Err(Error::Dimension("projector dimension differs from generator".into()));
    }
    let certified = structure
        .collecting_basins
        .iter()
        .any(|b| (b - p0k).norm_l2() <= tol.match_tol.max(1e-7));
    if !certified {
        return Err(Error::InvalidInput(
            "projector is not a certified collecting basin".into(),
        ));
    }
    let observable = structure.stationary.heisenberg_limit(p0k);
    let (t_check, check_error) = match structure.gap {
        Some(gap) => {
            let t = 100.0 / gap;
            let prop = g.adjoint_superoperator().expm(t)?;
            let evolved = prop.apply(p0k.as_ref())?;
            (t, linop::spectral_norm((&evolved - &observable).as_ref()))
        }
        None => (0.0, linop::spectral_norm((p0k - &observable).as_ref())),
    };
    Ok(ObservableExtension {
        observable,
        t_check,
        check_error,
    })
}
