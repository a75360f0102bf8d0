//! Dense complex linear algebra: Hilbert–Schmidt geometry, column-stacking
//! vectorization, superoperator matrices, the matrix exponential and
//! tolerance-aware null spaces.
//!
//! Vectorization stacks columns, so the map `X ↦ A·X·B` is represented by
//! the matrix `Bᵀ ⊗ A`. Every superoperator in the crate uses this
//! convention.

use faer::linalg::solvers::Solve;
use faer::{Col, ColRef, Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix, the carrier for states, observables and operators.
pub type ComplexMatrix = Mat<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Numerical thresholds shared by all analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular-value cutoff for rank and null-space decisions.
    pub rank_tol: f64,
    /// Matrix equality threshold (spectral norm).
    pub match_tol: f64,
    /// Eigenvalue clustering and axis-membership threshold.
    pub eig_group_tol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            match_tol: 1e-8,
            eig_group_tol: 1e-7,
        }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_tol", self.rank_tol),
            ("match_tol", self.match_tol),
            ("eig_group_tol", self.eig_group_tol),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    Mat::zeros(rows, cols)
}

pub fn identity(d: usize) -> ComplexMatrix {
    Mat::identity(d, d)
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Builds a matrix from real row-major rows.
pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = if n == 0 { 0 } else { rows[0].len() };
    Mat::from_fn(n, m, |i, j| c(rows[i][j], 0.0))
}

pub fn from_complex_rows(rows: &[Vec<C64>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn diag_real(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    Mat::from_fn(d, d, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn dagger(m: MatRef<'_, C64>) -> ComplexMatrix {
    m.adjoint().to_owned()
}

/// Entry-wise complex conjugate.
pub fn conj(m: MatRef<'_, C64>) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].conj())
}

pub fn transpose(m: MatRef<'_, C64>) -> ComplexMatrix {
    m.transpose().to_owned()
}

pub fn scale(m: MatRef<'_, C64>, s: C64) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)
}

pub fn commutator(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> ComplexMatrix {
    a * b + b * a
}

pub fn trace(m: MatRef<'_, C64>) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

pub fn frobenius_norm(m: MatRef<'_, C64>) -> f64 {
    m.norm_l2()
}

/// Largest singular value.
pub fn spectral_norm(m: MatRef<'_, C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.norm_l2() == 0.0 {
        return 0.0;
    }
    match m.singular_values() {
        Ok(s) => s.first().copied().unwrap_or(0.0),
        Err(_) => m.norm_l2(),
    }
}

/// `‖m − m†‖` in spectral norm.
pub fn hermiticity_defect(m: MatRef<'_, C64>) -> f64 {
    spectral_norm((m - m.adjoint()).as_ref())
}

pub fn hermitian_part(m: MatRef<'_, C64>) -> ComplexMatrix {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

/// Hilbert–Schmidt inner product `Tr[a†·b]`.
pub fn hs_inner(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<C64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::Dimension(format!(
            "hs_inner: {}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("hs_inner requires square matrices".into()));
    }
    Ok(hs_dot(a, b))
}

/// `Tr[a†·b]` for equally shaped matrices (unchecked).
pub(crate) fn hs_dot(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> C64 {
    let mut s = ZERO;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)].conj() * b[(i, j)];
        }
    }
    s
}

/// `Tr[a·b]` without forming the product.
pub fn trace_product(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> C64 {
    let mut s = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

/// Column-stacking vectorization of a square matrix.
pub fn vectorize(x: MatRef<'_, C64>) -> Result<Col<C64>> {
    if x.nrows() != x.ncols() {
        return Err(Error::Dimension(format!(
            "vectorize expects a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(vec_unchecked(x))
}

pub(crate) fn vec_unchecked(x: MatRef<'_, C64>) -> Col<C64> {
    let n = x.nrows();
    Col::from_fn(n * x.ncols(), |k| x[(k % n, k / n)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: ColRef<'_, C64>, d: usize) -> Result<ComplexMatrix> {
    if v.nrows() != d * d {
        return Err(Error::Dimension(format!(
            "unvectorize: length {} is not {d}²",
            v.nrows()
        )));
    }
    Ok(Mat::from_fn(d, d, |i, j| v[j * d + i]))
}

/// Unvectorizes a vector whose length must be a perfect square.
pub fn unvectorize_square(v: ColRef<'_, C64>) -> Result<ComplexMatrix> {
    let d = (v.nrows() as f64).sqrt().round() as usize;
    if d * d != v.nrows() {
        return Err(Error::Dimension(format!(
            "length {} is not a perfect square",
            v.nrows()
        )));
    }
    unvectorize(v, d)
}

pub fn kron(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ar * br, ac * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Linear map on `d×d` matrices, stored as a `d²×d²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::Dimension(format!(
                "superoperator on d={dim} needs a {0}x{0} matrix, got {1}x{2}",
                dim * dim,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    /// The map `X ↦ a·X·b`.
    pub fn sandwich(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<Self> {
        let d = a.nrows();
        if a.ncols() != d || b.nrows() != d || b.ncols() != d {
            return Err(Error::Dimension("sandwich_superop: operands must be square of equal size".into()));
        }
        Ok(Self {
            dim: d,
            matrix: kron(b.transpose(), a),
        })
    }

    /// The map `X ↦ a·X`.
    pub fn left(a: MatRef<'_, C64>) -> Self {
        let d = a.nrows();
        Self {
            dim: d,
            matrix: kron(identity(d).as_ref(), a),
        }
    }

    /// The map `X ↦ X·b`.
    pub fn right(b: MatRef<'_, C64>) -> Self {
        let d = b.nrows();
        Self {
            dim: d,
            matrix: kron(b.transpose(), identity(d).as_ref()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn apply(&self, x: MatRef<'_, C64>) -> Result<ComplexMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "superoperator on d={} applied to {}x{}",
                self.dim,
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: MatRef<'_, C64>) -> ComplexMatrix {
        let v = &self.matrix * vec_unchecked(x);
        unvectorize(v.as_ref(), self.dim).expect("dimension checked")
    }

    /// Adjoint with respect to the Hilbert–Schmidt inner product.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            matrix: dagger(self.matrix.as_ref()),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            matrix: scale(self.matrix.as_ref(), s),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn norm(&self) -> f64 {
        spectral_norm(self.matrix.as_ref())
    }

    /// Frobenius distance between the two matrices.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok((&self.matrix - &other.matrix).norm_l2())
    }

    /// `exp(t·S)`.
    pub fn expm(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite time {t}")));
        }
        Ok(Self {
            dim: self.dim,
            matrix: expm(self.matrix.as_ref(), t),
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "superoperators on d={} and d={}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

/// `X ↦ a·X·b` as a [`Superoperator`].
pub fn sandwich_superop(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<Superoperator> {
    Superoperator::sandwich(a, b)
}

fn norm_one(m: MatRef<'_, C64>) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(t·m)` by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(m: MatRef<'_, C64>, t: f64) -> ComplexMatrix {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = m.nrows();
    if n == 0 {
        return zeros(0, 0);
    }
    let a = scale(m, c(t, 0.0));
    let norm = norm_one(a.as_ref());
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = scale(a.as_ref(), c(0.5f64.powi(s), 0.0));
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> ComplexMatrix {
        Mat::from_fn(n, n, |i, j| {
            a6[(i, j)] * c6 + a4[(i, j)] * c4 + a2[(i, j)] * c2 + id[(i, j)] * c0
        })
    };
    let u_inner = &a6 * lin(B[13], B[11], B[9], 0.0) + lin(B[7], B[5], B[3], B[1]);
    let u = &a * u_inner;
    let v = &a6 * lin(B[12], B[10], B[8], 0.0) + lin(B[6], B[4], B[2], B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(p);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Orthonormal basis of `{v : ‖m·v‖ ≤ rank_tol·‖m‖·‖v‖}`.
///
/// The returned basis depends only on the subspace, not on the SVD's
/// internal choices: it is built greedily from the projections of the
/// standard basis vectors, and each vector's first significant component is
/// made real positive.
pub fn null_space(m: MatRef<'_, C64>, tol: &Tolerance) -> Vec<Col<C64>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let basis = raw_null_space(m, tol.rank_tol);
    canonical_basis(&basis, n)
}

/// Null-space basis as returned by the SVD, without canonicalization.
pub(crate) fn raw_null_space(m: MatRef<'_, C64>, rank_tol: f64) -> Vec<Col<C64>> {
    let n = m.ncols();
    if m.nrows() == 0 || m.norm_l2() == 0.0 {
        return (0..n).map(|i| unit_col(n, i)).collect();
    }
    // Reduce tall matrices to their triangular factor first.
    let reduced: ComplexMatrix = if m.nrows() > n {
        let qr = m.qr();
        qr.thin_R().to_owned()
    } else {
        m.to_owned()
    };
    let svd = match reduced.svd() {
        Ok(s) => s,
        Err(_) => return Vec::new(),
    };
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i].re).fold(0.0, f64::max);
    let rank = (0..s.nrows()).filter(|&i| s[i].re > rank_tol * smax).count();
    let v = svd.V();
    (rank..n).map(|k| v.col(k).to_owned()).collect()
}

fn unit_col(n: usize, i: usize) -> Col<C64> {
    Col::from_fn(n, |k| if k == i { ONE } else { ZERO })
}

fn col_norm(v: ColRef<'_, C64>) -> f64 {
    v.norm_l2()
}

/// Canonical orthonormal basis for the span of `vectors` (assumed
/// orthonormal), determined only by the subspace.
pub fn canonical_basis(vectors: &[Col<C64>], n: usize) -> Vec<Col<C64>> {
    let k = vectors.len();
    if k == 0 {
        return Vec::new();
    }
    let mut chosen: Vec<Col<C64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(f64, Col<C64>)> = None;
        for i in 0..n {
            // Projection of e_i onto span(vectors) minus span(chosen).
            let mut r = Col::<C64>::zeros(n);
            for v in vectors {
                let coef = v[i].conj();
                for p in 0..n {
                    r[p] += v[p] * coef;
                }
            }
            for q in &chosen {
                let coef = q[i].conj();
                for p in 0..n {
                    r[p] -= q[p] * coef;
                }
            }
            // One reorthogonalization pass.
            for q in &chosen {
                let coef: C64 = (0..n).map(|p| q[p].conj() * r[p]).sum();
                for p in 0..n {
                    r[p] -= q[p] * coef;
                }
            }
            let nr = col_norm(r.as_ref());
            match &best {
                Some((bn, _)) if nr <= *bn + 1e-10 => {}
                _ => best = Some((nr, r)),
            }
        }
        let (nr, mut r) = best.expect("n > 0");
        if nr < 1e-12 {
            break;
        }
        for p in 0..n {
            r[p] /= nr;
        }
        normalize_phase(&mut r);
        chosen.push(r);
    }
    chosen
}

/// Rotates the phase so that the first significant component is real positive.
pub fn normalize_phase(v: &mut Col<C64>) {
    let n = col_norm(v.as_ref());
    if n == 0.0 {
        return;
    }
    if let Some(k) = (0..v.nrows()).find(|&k| v[k].norm() > 1e-8 * n) {
        let ph = v[k] / v[k].norm();
        let inv = ph.conj();
        for p in 0..v.nrows() {
            v[p] *= inv;
        }
    }
}

/// Modified Gram–Schmidt; drops vectors whose residual is below
/// `tol·max(1, ‖v‖)`.
pub fn orthonormalize(vectors: &[Col<C64>], tol: f64) -> Vec<Col<C64>> {
    let mut out: Vec<Col<C64>> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        let n0 = col_norm(r.as_ref());
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let coef: C64 = (0..r.nrows()).map(|p| q[p].conj() * r[p]).sum();
                for p in 0..r.nrows() {
                    r[p] -= q[p] * coef;
                }
            }
        }
        let nr = col_norm(r.as_ref());
        if nr > tol * n0.max(1.0) {
            for p in 0..r.nrows() {
                r[p] /= nr;
            }
            out.push(r);
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix (Hermitian part is used),
/// eigenvalues ascending.
pub fn hermitian_eigen(m: MatRef<'_, C64>) -> Result<(Vec<f64>, ComplexMatrix)> {
    let h = hermitian_part(m);
    let n = h.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let eig = h
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| s[a].re.partial_cmp(&s[b].re).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&k| s[k].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, idx[j])]);
    Ok((vals, vecs))
}

pub fn min_eigenvalue_hermitian(m: MatRef<'_, C64>) -> Result<f64> {
    Ok(hermitian_eigen(m)?.0.first().copied().unwrap_or(0.0))
}

/// `‖p² − p‖ + ‖p − p†‖`.
pub fn projector_defect(p: MatRef<'_, C64>) -> f64 {
    if p.nrows() != p.ncols() {
        return f64::INFINITY;
    }
    spectral_norm((p * p - p).as_ref()) + hermiticity_defect(p)
}

pub fn check_projector(p: MatRef<'_, C64>, tol: &Tolerance) -> Result<()> {
    let defect = projector_defect(p);
    if defect > tol.match_tol {
        return Err(Error::NotProjector { defect });
    }
    Ok(())
}

pub fn unitarity_defect(v: MatRef<'_, C64>) -> f64 {
    if v.nrows() != v.ncols() {
        return f64::INFINITY;
    }
    spectral_norm((v.adjoint() * v - identity(v.nrows())).as_ref())
}

/// Projector onto the span of the given columns.
pub fn projector_onto(cols: &[Col<C64>], n: usize, tol: f64) -> ComplexMatrix {
    let q = orthonormalize(cols, tol);
    let mut p = zeros(n, n);
    for v in &q {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    p
}

/// Projector onto the eigenvectors of a Hermitian matrix whose eigenvalues
/// exceed `rel_tol` times the largest absolute eigenvalue.
pub fn support_projector(m: MatRef<'_, C64>, rel_tol: f64) -> Result<ComplexMatrix> {
    let n = m.nrows();
    let (vals, vecs) = hermitian_eigen(m)?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut p = zeros(n, n);
    if scale == 0.0 {
        return Ok(p);
    }
    for (k, &v) in vals.iter().enumerate() {
        if v > rel_tol * scale {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += vecs[(i, k)] * vecs[(j, k)].conj();
                }
            }
        }
    }
    Ok(p)
}

/// Projector onto the eigenvectors of a Hermitian matrix with eigenvalue
/// above `1/2`; rounds near-projectors such as differences of projectors.
pub fn round_projector(m: MatRef<'_, C64>) -> ComplexMatrix {
    let w = range_isometry(m);
    &w * w.adjoint()
}

/// Rank of a projector (rounded trace).
pub fn projector_rank(p: MatRef<'_, C64>) -> usize {
    trace(p).re.round().max(0.0) as usize
}

/// Canonical isometry `W` (`d×r`) with `W·W† = p` and `W†·W = 𝟙`.
pub fn range_isometry(p: MatRef<'_, C64>) -> ComplexMatrix {
    let n = p.nrows();
    let Ok((vals, vecs)) = hermitian_eigen(p) else {
        return zeros(n, 0);
    };
    let cols: Vec<Col<C64>> = (0..n)
        .filter(|&k| vals[k] > 0.5)
        .map(|k| vecs.col(k).to_owned())
        .collect();
    let basis = canonical_basis(&cols, n);
    Mat::from_fn(n, basis.len(), |i, j| basis[j][i])
}

/// Unitary (or partial-isometry) factor of the polar decomposition,
/// restricted to singular values above `rel_tol·σ_max`.
pub fn polar_isometry(x: MatRef<'_, C64>, rel_tol: f64) -> Result<ComplexMatrix> {
    let svd = x
        .svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i].re).fold(0.0, f64::max);
    let u = svd.U();
    let v = svd.V();
    let mut w = zeros(x.nrows(), x.ncols());
    for k in 0..s.nrows() {
        if s[k].re > rel_tol * smax {
            for i in 0..x.nrows() {
                for j in 0..x.ncols() {
                    w[(i, j)] += u[(i, k)] * v[(j, k)].conj();
                }
            }
        }
    }
    Ok(w)
}

/// Complex eigen-decomposition of a general square matrix.
pub fn general_eigen(m: MatRef<'_, C64>) -> Result<(Vec<C64>, ComplexMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let eig = m
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigensolver failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let vals: Vec<C64> = (0..n).map(|i| s[i]).collect();
    if vals.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite values".into()));
    }
    Ok((vals, eig.U().to_owned()))
}

/// Solves `a·x = b` by LU with partial pivoting.
pub fn solve(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> ComplexMatrix {
    a.partial_piv_lu().solve(b.to_owned())
}

/// Moore–Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pseudo_inverse(m: MatRef<'_, C64>, rel_tol: f64) -> Result<ComplexMatrix> {
    let svd = m
        .svd()
        .map_err(|e| Error::Numerical(format!("svd: {e:?}")))?;
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i].re).fold(0.0, f64::max);
    let u = svd.U();
    let v = svd.V();
    let mut p = zeros(m.ncols(), m.nrows());
    for k in 0..s.nrows() {
        if s[k].re > rel_tol * smax {
            let inv = 1.0 / s[k].re;
            for i in 0..m.ncols() {
                for j in 0..m.nrows() {
                    p[(i, j)] += v[(i, k)] * u[(j, k)].conj() * inv;
                }
            }
        }
    }
    Ok(p)
}

/// Matrix from a list of column vectors.
pub fn from_columns(cols: &[Col<C64>], n: usize) -> ComplexMatrix {
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Orthogonal complement of a projector.
pub fn complement(p: MatRef<'_, C64>) -> ComplexMatrix {
    identity(p.nrows()) - p
}
