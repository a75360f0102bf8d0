//! Stationary-state perturbation series for `D_λ = D₀ + λE + λ²F`.

use faer::{Col, Mat};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generator::{pad_ops, LindbladGenerator};
use crate::json::{complex_to_json, matrix_from_rows, matrix_to_json, matrix_to_rows, PerturbationSpec, SCHEMA_VERSION};
use crate::linop::{
    self, c, conj, identity, kron, unvectorize, vec_unchecked, ComplexMatrix, Superoperator, Tolerance, C64, I,
};
use crate::spectral::{decompose, stationary_states, StationarySet};
use crate::structure::{self, is_lazy};

/// `H_λ = H₀ + λV + λ²W`, `h_{α,λ} = h_α + λk_α`.
#[derive(Debug, Clone)]
pub struct PerturbedGenerator {
    base: LindbladGenerator,
    v: ComplexMatrix,
    w: ComplexMatrix,
    /// Base operators, zero-padded to the length of `k_ops`.
    h_ops: Vec<ComplexMatrix>,
    k_ops: Vec<ComplexMatrix>,
}

impl PerturbedGenerator {
    pub fn new(
        base: LindbladGenerator,
        v: Option<ComplexMatrix>,
        w: Option<ComplexMatrix>,
        k_ops: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let d = base.dim();
        let v = v.unwrap_or_else(|| linop::zeros(d, d));
        let w = w.unwrap_or_else(|| linop::zeros(d, d));
        for (name, m) in [("v", &v), ("w", &w)] {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!("{name} must be {d}x{d}")));
            }
            let defect = linop::hermiticity_defect(m.as_ref());
            if defect > 1e-8 * linop::spectral_norm(m.as_ref()).max(1.0) {
                return Err(Error::InvalidInput(format!("{name} is not Hermitian (defect {defect:.3e})")));
            }
        }
        for (k, m) in k_ops.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::Dimension(format!("k_ops[{k}] must be {d}x{d}")));
            }
        }
        let len = k_ops.len().max(base.transfer_ops().len());
        let h_ops = pad_ops(base.transfer_ops(), len, d);
        let k_ops = pad_ops(&k_ops, len, d);
        Ok(Self { base, v, w, h_ops, k_ops })
    }

    /// Zero perturbation of `base`.
    pub fn unperturbed(base: LindbladGenerator) -> Self {
        Self::new(base, None, None, Vec::new()).expect("zero perturbation is valid")
    }

    pub fn from_spec(spec: &PerturbationSpec) -> Result<Self> {
        let base = LindbladGenerator::from_spec(&spec.base)?;
        let v = spec.v.as_ref().map(matrix_from_rows).transpose()?;
        let w = spec.w.as_ref().map(matrix_from_rows).transpose()?;
        let k = spec.k_ops.iter().map(matrix_from_rows).collect::<Result<Vec<_>>>()?;
        Self::new(base, v, w, k)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: PerturbationSpec = serde_json::from_str(s)?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> PerturbationSpec {
        PerturbationSpec {
            base: self.base.to_spec(),
            v: Some(matrix_to_rows(&self.v)),
            w: Some(matrix_to_rows(&self.w)),
            k_ops: self.k_ops.iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &LindbladGenerator {
        &self.base
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn w(&self) -> &ComplexMatrix {
        &self.w
    }

    /// Base transfer operators after zero-padding.
    pub fn h_ops(&self) -> &[ComplexMatrix] {
        &self.h_ops
    }

    pub fn k_ops(&self) -> &[ComplexMatrix] {
        &self.k_ops
    }

    /// The generator at coupling `λ`, built directly from `H_λ` and `h_{α,λ}`.
    pub fn at(&self, lambda: f64) -> Result<LindbladGenerator> {
        if !lambda.is_finite() {
            return Err(Error::InvalidInput(format!("coupling {lambda} is not finite")));
        }
        let l = c(lambda, 0.0);
        let h = self.base.hamiltonian() + linop::scale(self.v.as_ref(), l) + linop::scale(self.w.as_ref(), l * l);
        let ops = self
            .h_ops
            .iter()
            .zip(&self.k_ops)
            .map(|(h, k)| h + linop::scale(k.as_ref(), l))
            .collect();
        LindbladGenerator::new(h, ops)
    }

    /// `D₀ + λE + λ²F` assembled from the expansion superoperators.
    pub fn superoperator_at(&self, lambda: f64) -> Superoperator {
        let d0 = self.base.superoperator();
        let e = build_e(self);
        let f = build_f(self);
        let m = d0.matrix() + linop::scale(e.matrix(), c(lambda, 0.0)) + linop::scale(f.matrix(), c(lambda * lambda, 0.0));
        Superoperator::new(self.dim(), m).expect("square of the same size")
    }
}

/// `X ↦ a·X·b† − ½(b†a·X + X·b†a)`.
fn cross(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let d = a.nrows();
    let id = identity(d);
    let ba = b.adjoint() * a;
    let half = c(0.5, 0.0);
    kron(conj(b.as_ref()).as_ref(), a.as_ref())
        - linop::scale(kron(id.as_ref(), ba.as_ref()).as_ref(), half)
        - linop::scale(kron(ba.transpose(), id.as_ref()).as_ref(), half)
}

fn hamiltonian_part(h: &ComplexMatrix) -> ComplexMatrix {
    let id = identity(h.nrows());
    linop::scale((kron(id.as_ref(), h.as_ref()) - kron(h.transpose(), id.as_ref())).as_ref(), -I)
}

/// First-order part `E` of `D_λ`.
pub fn build_e(pg: &PerturbedGenerator) -> Superoperator {
    let mut m = hamiltonian_part(&pg.v);
    for (h, k) in pg.h_ops.iter().zip(&pg.k_ops) {
        m += cross(h, k);
        m += cross(k, h);
    }
    Superoperator::new(pg.dim(), m).expect("dimensions agree")
}

/// Second-order part `F` of `D_λ`.
pub fn build_f(pg: &PerturbedGenerator) -> Superoperator {
    let mut m = hamiltonian_part(&pg.w);
    for k in &pg.k_ops {
        m += cross(k, k);
    }
    Superoperator::new(pg.dim(), m).expect("dimensions agree")
}

/// Inverse of `D₀` on its range, normalized by `Tr[A_i σ] = 0`.
#[derive(Debug, Clone)]
pub struct ConstrainedInverse {
    dim: usize,
    /// `D₀⁻¹∘(1 − Π)` on vectorized matrices.
    inverse: ComplexMatrix,
    observables: Vec<ComplexMatrix>,
    match_tol: f64,
}

pub fn constrained_inverse(d0: &Superoperator, ss: &StationarySet, tol: &Tolerance) -> Result<ConstrainedInverse> {
    let d = d0.dim();
    let n = d * d;
    let kernel = ss.kernel_elements();
    let obs = ss.invariant_observables.clone();
    let k = kernel.len();
    let pairing = ss.pairing_matrix();
    let pairing_defect = linop::spectral_norm((pairing - identity(k)).as_ref());
    if pairing_defect > 1e-6 {
        return Err(Error::Numerical(format!(
            "invariant observables are not dual to the kernel (defect {pairing_defect:.3e})"
        )));
    }
    // bordered system [D₀ K; Aᵀ 0] is nonsingular when the pairing is
    let mut b = linop::zeros(n + k, n + k);
    b.as_mut().submatrix_mut(0, 0, n, n).copy_from(d0.matrix());
    for (j, kj) in kernel.iter().enumerate() {
        let v = vec_unchecked(kj.as_ref());
        for r in 0..n {
            b[(r, n + j)] = v[r];
        }
    }
    let arows = observable_rows(&obs, d);
    for i in 0..k {
        for r in 0..n {
            b[(n + i, r)] = arows[(i, r)];
        }
    }
    let binv = linop::solve(b.as_ref(), identity(n + k).as_ref());
    if !binv.as_ref().is_all_finite() {
        return Err(Error::Numerical("bordered generator is singular".into()));
    }
    // σ = top-left block applied to (1 − Π)τ
    let mut proj = identity(n);
    for (j, kj) in kernel.iter().enumerate() {
        let v = vec_unchecked(kj.as_ref());
        for r in 0..n {
            for s in 0..n {
                proj[(r, s)] -= v[r] * arows[(j, s)];
            }
        }
    }
    let inverse = binv.as_ref().submatrix(0, 0, n, n) * proj;
    Ok(ConstrainedInverse {
        dim: d,
        inverse,
        observables: obs,
        match_tol: tol.match_tol,
    })
}

/// Rows `r_i` with `r_i·vec(X) = Tr[A_i X]`.
fn observable_rows(obs: &[ComplexMatrix], d: usize) -> ComplexMatrix {
    Mat::from_fn(obs.len(), d * d, |i, r| obs[i][(r / d, r % d)])
}

impl ConstrainedInverse {
    /// `Tr[A_i τ]` for every invariant observable.
    pub fn solvability(&self, tau: &ComplexMatrix) -> Vec<C64> {
        self.observables
            .iter()
            .map(|a| linop::trace_product(a.as_ref(), tau.as_ref()))
            .collect()
    }

    pub fn apply(&self, tau: &ComplexMatrix) -> Result<ComplexMatrix> {
        if tau.nrows() != self.dim || tau.ncols() != self.dim {
            return Err(Error::Dimension(format!("expected a {0}x{0} matrix", self.dim)));
        }
        let traces = self.solvability(tau);
        let max_violation = traces.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if max_violation > self.match_tol * linop::frobenius_norm(tau.as_ref()).max(1.0) {
            return Err(Error::NotInRange { traces, max_violation });
        }
        Ok(self.apply_projected(tau))
    }

    /// `D₀⁻¹((1 − Π)τ)` without the range check.
    pub fn apply_projected(&self, tau: &ComplexMatrix) -> ComplexMatrix {
        let v = &self.inverse * vec_unchecked(tau.as_ref());
        unvectorize(v.as_ref(), self.dim).expect("length d²")
    }
}

pub const DEFAULT_ORDER: usize = 10;
pub const RESIDUAL_LAMBDAS: [f64; 3] = [1e-3, 1e-2, 1e-1];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioTest {
    pub lambda: f64,
    /// Geometric growth per order of `|λ|ⁿ‖σ_n‖` over the last nonzero terms.
    pub ratio: f64,
    pub diverging: bool,
}

#[derive(Debug, Clone)]
pub struct PerturbationSeries {
    /// `σ₀ = ρ, σ₁, …, σ_N`.
    pub sigmas: Vec<ComplexMatrix>,
    /// Kernel coefficients `α^{(n)}` per order, against states then phase relations.
    pub alphas: Vec<Vec<C64>>,
    pub order: usize,
    /// Orders beyond `N` consulted to fix the coefficients.
    pub lookahead: usize,
    /// `(λ, ‖D_λ(Σ λⁿσ_n)‖)`.
    pub residual_at: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl PerturbationSeries {
    pub fn partial_sum(&self, lambda: f64) -> ComplexMatrix {
        self.partial_sum_to(lambda, self.order)
    }

    pub fn partial_sum_to(&self, lambda: f64, order: usize) -> ComplexMatrix {
        let d = self.sigmas[0].nrows();
        let mut out = linop::zeros(d, d);
        let mut p = 1.0;
        for s in self.sigmas.iter().take(order + 1) {
            out += linop::scale(s.as_ref(), c(p, 0.0));
            p *= lambda;
        }
        out
    }

    pub fn residual(&self, pg: &PerturbedGenerator, lambda: f64) -> Result<f64> {
        let g = pg.at(lambda)?;
        let r = g.apply_schrodinger(&self.partial_sum(lambda))?;
        Ok(linop::frobenius_norm(r.as_ref()))
    }

    fn term_norms(&self) -> Vec<(usize, f64)> {
        let norms: Vec<f64> = self.sigmas.iter().map(|s| linop::frobenius_norm(s.as_ref())).collect();
        let top = norms.iter().cloned().fold(0.0, f64::max);
        norms
            .into_iter()
            .enumerate()
            .skip(1)
            .filter(|(_, n)| *n > 1e-13 * top.max(1.0))
            .collect()
    }

    /// Radius of convergence from the last two nonzero coefficients.
    pub fn radius_estimate(&self) -> Option<f64> {
        let t = self.term_norms();
        if t.len() < 2 {
            return None;
        }
        let (n1, a1) = t[t.len() - 2];
        let (n2, a2) = t[t.len() - 1];
        Some((a1 / a2).powf(1.0 / (n2 - n1) as f64))
    }

    pub fn ratio_test(&self, lambda: f64) -> RatioTest {
        let ratio = match self.radius_estimate() {
            Some(r) => lambda.abs() / r,
            None => 0.0,
        };
        RatioTest {
            lambda,
            ratio,
            diverging: ratio > 1.0,
        }
    }

    /// Adds residual entries for `lambdas` and warns where the ratio test fails.
    pub fn evaluate(&mut self, pg: &PerturbedGenerator, lambdas: &[f64]) -> Result<()> {
        for &l in lambdas {
            let r = self.residual(pg, l)?;
            self.residual_at.push((l, r));
            let rt = self.ratio_test(l);
            if rt.diverging {
                self.warnings.push(format!(
                    "series likely diverges at lambda = {l} (growth ratio {:.3})",
                    rt.ratio
                ));
            }
        }
        Ok(())
    }

    /// Log-log slope of the residual over entries above the rounding floor.
    pub fn fitted_exponent(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .residual_at
            .iter()
            .filter(|(l, r)| *l > 0.0 && *r > 1e-13)
            .map(|(l, r)| (l.ln(), r.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "order": self.order,
            "lookahead": self.lookahead,
            "sigmas": self.sigmas.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "alphas": self.alphas.iter().map(|a| a.iter().map(|z| complex_to_json(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "residuals": self.residual_at.iter().map(|(l, r)| json!({"lambda": l, "residual": r})).collect::<Vec<_>>(),
            "radius_estimate": self.radius_estimate(),
            "warnings": self.warnings,
        })
    }
}

struct Base {
    ss: StationarySet,
    cinv: ConstrainedInverse,
    e: Superoperator,
    f: Superoperator,
}

fn prepare(pg: &PerturbedGenerator, tol: &Tolerance) -> Result<Base> {
    let sd = decompose(&pg.base, tol)?;
    let ss = stationary_states(&sd, tol)?;
    let cinv = constrained_inverse(sd.superoperator(), &ss, tol)?;
    Ok(Base {
        ss,
        cinv,
        e: build_e(pg),
        f: build_f(pg),
    })
}

/// Series around a unique stationary state: `σ_n = G_n(ρ)`.
pub fn expand_unique(pg: &PerturbedGenerator, order: usize, tol: &Tolerance) -> Result<PerturbationSeries> {
    let b = prepare(pg, tol)?;
    let k = b.ss.kernel_dim();
    if k != 1 {
        return Err(Error::DegenerateBase(k));
    }
    let d = pg.dim();
    let mut sigmas = vec![b.ss.basis_states[0].matrix().clone()];
    for n in 1..=order {
        let mut rhs = b.e.apply_unchecked(sigmas[n - 1].as_ref());
        if n >= 2 {
            rhs += b.f.apply_unchecked(sigmas[n - 2].as_ref());
        }
        let s = b.cinv.apply(&rhs).map_err(|e| match e {
            Error::NotInRange { max_violation, .. } => Error::Numerical(format!(
                "order {n} right-hand side left the range of the base generator ({max_violation:.3e})"
            )),
            other => other,
        })?;
        sigmas.push(linop::hermitian_part(linop::scale(s.as_ref(), c(-1.0, 0.0)).as_ref()));
    }
    let _ = d;
    let mut alphas = vec![vec![c(1.0, 0.0)]];
    alphas.extend((1..=order).map(|_| vec![c(0.0, 0.0)]));
    let mut series = PerturbationSeries {
        sigmas,
        alphas,
        order,
        lookahead: 0,
        residual_at: Vec::new(),
        warnings: Vec::new(),
    };
    series.evaluate(pg, &RESIDUAL_LAMBDAS)?;
    Ok(series)
}

/// `σ_n = c + B·x` on vectorized matrices, `x` the stacked kernel coefficients.
#[derive(Clone)]
struct Affine {
    c: Col<C64>,
    b: ComplexMatrix,
}

impl Affine {
    fn mapped(&self, m: &ComplexMatrix, cols: usize) -> Affine {
        let mut b = linop::zeros(m.nrows(), cols);
        if self.b.ncols() > 0 {
            b.as_mut().submatrix_mut(0, 0, m.nrows(), self.b.ncols()).copy_from(m * &self.b);
        }
        Affine { c: m * &self.c, b }
    }

    fn add(&mut self, other: &Affine) {
        self.c += &other.c;
        self.b += &other.b;
    }
}

/// Series around a degenerate kernel, with the kernel coefficients fixed by
/// the solvability conditions of later orders.
pub fn expand_degenerate(pg: &PerturbedGenerator, order: usize, tol: &Tolerance) -> Result<PerturbationSeries> {
    let b = prepare(pg, tol)?;
    let d = pg.dim();
    let n = d * d;
    let kernel = b.ss.kernel_elements();
    let k = kernel.len();
    let kvecs: Vec<Col<C64>> = kernel.iter().map(|x| vec_unchecked(x.as_ref())).collect();
    let arows = observable_rows(&b.ss.invariant_observables, d);
    let traces: Vec<C64> = kernel.iter().map(|x| linop::trace(x.as_ref())).collect();
    let e = b.e.matrix().to_owned();
    let f = b.f.matrix().to_owned();
    let neg_inv = linop::scale(b.cinv.inverse.as_ref(), c(-1.0, 0.0));
    let max_lookahead = order.max(2 * d);

    // σ_n and the solvability rows of rhs_n, built lazily
    let mut sig: Vec<Affine> = Vec::new();
    let mut solv: Vec<Affine> = Vec::new(); // solv[n-1] = A·rhs_n
    let push_order = |sig: &mut Vec<Affine>, solv: &mut Vec<Affine>| {
        let m = sig.len();
        let cols = k * (m + 1);
        let mut s = if m == 0 {
            Affine { c: Col::zeros(n), b: linop::zeros(n, cols) }
        } else {
            let mut rhs = sig[m - 1].mapped(&e, cols);
            if m >= 2 {
                rhs.add(&sig[m - 2].mapped(&f, cols));
            }
            solv.push(rhs.mapped(&arows, cols));
            rhs.mapped(&neg_inv, cols)
        };
        for j in 0..k {
            for r in 0..n {
                s.b[(r, k * m + j)] += kvecs[j][r];
            }
        }
        sig.push(s);
    };

    for t in (order + 1)..=(order + max_lookahead) {
        while sig.len() <= t {
            push_order(&mut sig, &mut solv);
        }
        let cols = k * (t + 1);
        // trace rows then solvability rows
        let mut rows: Vec<(Vec<C64>, C64)> = Vec::new();
        for m in 0..=t {
            let mut r = vec![c(0.0, 0.0); cols];
            r[k * m..k * m + k].copy_from_slice(&traces);
            rows.push((r, if m == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }));
        }
        for a in solv.iter().take(t) {
            for i in 0..k {
                let r: Vec<C64> = (0..cols).map(|q| if q < a.b.ncols() { a.b[(i, q)] } else { c(0.0, 0.0) }).collect();
                rows.push((r, -a.c[i]));
            }
        }
        let (mat, rhs) = normalized_system(&rows, cols);
        let x = linop::pseudo_inverse(mat.as_ref(), tol.rank_tol)? * &rhs;
        let inconsistency = (&mat * &x - &rhs).norm_l2();
        let null = linop::raw_null_space(mat.as_ref(), tol.rank_tol);
        let fixed = k * (order + 1);
        let free: Vec<Col<C64>> = null
            .iter()
            .map(|v| Col::from_fn(fixed, |q| v[q]))
            .filter(|v| v.norm_l2() > 1e-7)
            .collect();
        if !free.is_empty() {
            if t == order + max_lookahead {
                let unresolved = linop::orthonormalize(&free, 1e-7).len();
                return Err(Error::DegenerateBeyondOrder { order: t, unresolved });
            }
            continue;
        }
        if inconsistency > 1e-6 {
            return Err(Error::Certification(format!(
                "solvability conditions are inconsistent (residual {inconsistency:.3e})"
            )));
        }
        let mut sigmas = Vec::with_capacity(order + 1);
        let mut warnings = Vec::new();
        for (m, s) in sig.iter().take(order + 1).enumerate() {
            let xs = Col::from_fn(s.b.ncols(), |q| x[q]);
            let v = &s.c + &s.b * xs;
            let mat = unvectorize(v.as_ref(), d).expect("length d²");
            let herm = linop::hermiticity_defect(mat.as_ref());
            if herm > 1e-8 * linop::frobenius_norm(mat.as_ref()).max(1.0) {
                warnings.push(format!("sigma_{m} deviates from Hermitian by {herm:.3e}"));
            }
            sigmas.push(mat);
        }
        let alphas = (0..=order).map(|m| (0..k).map(|j| x[k * m + j]).collect()).collect();
        let mut series = PerturbationSeries {
            sigmas,
            alphas,
            order,
            lookahead: t - order,
            residual_at: Vec::new(),
            warnings,
        };
        series.evaluate(pg, &RESIDUAL_LAMBDAS)?;
        return Ok(series);
    }
    Err(Error::DegenerateBeyondOrder { order, unresolved: k })
}

/// Rows scaled to unit norm; zero rows are dropped but still checked.
fn normalized_system(rows: &[(Vec<C64>, C64)], cols: usize) -> (ComplexMatrix, Col<C64>) {
    let top = rows
        .iter()
        .map(|(r, _)| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut kept = Vec::new();
    for (r, b) in rows {
        let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-13 * top {
            kept.push((r.iter().map(|z| z / norm).collect::<Vec<_>>(), b / norm));
        } else {
            // keep the inconsistency visible
            kept.push((vec![c(0.0, 0.0); cols], *b));
        }
    }
    let mat = Mat::from_fn(kept.len(), cols, |i, j| kept[i].0[j]);
    let rhs = Col::from_fn(kept.len(), |i| kept[i].1);
    (mat, rhs)
}

/// Population weight on the first enclosure when two enclosures merge
/// through a transfer operator `k`.
pub fn merging_alpha0(
    k_ops: &[ComplexMatrix],
    q1: &ComplexMatrix,
    q2: &ComplexMatrix,
    rho1: &ComplexMatrix,
    rho2: &ComplexMatrix,
) -> f64 {
    let flow = |q: &ComplexMatrix, rho: &ComplexMatrix| -> f64 {
        k_ops
            .iter()
            .map(|k| linop::trace((q * k * rho * k.adjoint() * q).as_ref()).re)
            .sum()
    };
    let into1 = flow(q1, rho2);
    into1 / (flow(q2, rho1) + into1)
}

/// Weight on the first enclosure for two enclosures coupled by a
/// Hamiltonian perturbation. The second-order factor must be non-negative.
pub fn hamiltonian_dephasing_alpha0(
    pg: &PerturbedGenerator,
    q1: &ComplexMatrix,
    rho1: &ComplexMatrix,
    rho2: &ComplexMatrix,
    tol: &Tolerance,
) -> Result<f64> {
    let b = prepare(pg, tol)?;
    let second = |x: &ComplexMatrix| -> Result<f64> {
        let inner = b.cinv.apply(&b.e.apply_unchecked(x.as_ref()))?;
        Ok(linop::trace_product(q1.as_ref(), b.e.apply_unchecked(inner.as_ref()).as_ref()).re)
    };
    let factor = second(&(rho1 - rho2))?;
    let scale = b.e.norm().powi(2).max(1.0);
    if factor < -tol.match_tol * scale {
        return Err(Error::Certification(format!("second-order factor is negative ({factor:.3e})")));
    }
    if factor.abs() <= tol.match_tol * scale {
        return Err(Error::DegenerateBeyondOrder { order: 2, unresolved: 1 });
    }
    Ok(-second(rho2)? / factor)
}

/// Weight on the first basin when two `N`-step cascades are joined at
/// their top level: `N` applications of `G = −D₀⁻¹∘F` and one of `F`.
pub fn cascade_merge_alpha0(
    pg: &PerturbedGenerator,
    q1: &ComplexMatrix,
    rho1: &ComplexMatrix,
    rho2: &ComplexMatrix,
    steps: usize,
    tol: &Tolerance,
) -> Result<f64> {
    let b = prepare(pg, tol)?;
    let lifted = |x: &ComplexMatrix| -> Result<f64> {
        let mut y = x.clone();
        for _ in 0..steps {
            y = linop::scale(b.cinv.apply(&b.f.apply_unchecked(y.as_ref()))?.as_ref(), c(-1.0, 0.0));
        }
        Ok(linop::trace_product(q1.as_ref(), b.f.apply_unchecked(y.as_ref()).as_ref()).re)
    };
    let denom = lifted(&(rho1 - rho2))?;
    if denom.abs() <= tol.match_tol {
        return Err(Error::DegenerateBeyondOrder { order: 2 * (steps + 1), unresolved: 1 });
    }
    Ok(-lifted(rho2)? / denom)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub lambda: f64,
    pub stationary_count: usize,
    pub kernel_dim: usize,
    pub oscillating_count: usize,
    pub basin_ranks: Vec<Vec<usize>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transition {
    StationaryCountDrop { lambda: f64, from: usize, to: usize },
    PhaseRelationLoss { lambda: f64, from: usize, to: usize },
    OscillationLoss { lambda: f64, from: usize, to: usize },
    /// Collecting basin `basin` at `λ` covers several unperturbed basins,
    /// given as `(level, index)`.
    BasinMerge { lambda: f64, basin: usize, parts: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityReport {
    /// The unperturbed point first.
    pub points: Vec<ProbePoint>,
    pub transitions: Vec<Transition>,
    /// Structures present at some `λ ≠ 0` but absent in the limit.
    pub violations: Vec<String>,
}

impl ContinuityReport {
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("plain data");
        v["schema_version"] = json!(SCHEMA_VERSION);
        v
    }
}

struct ProbeData {
    point: ProbePoint,
    report: Option<structure::StructureReport>,
}

fn probe_at(pg: &PerturbedGenerator, lambda: f64, tol: &Tolerance) -> ProbeData {
    let run = || -> Result<(ProbePoint, structure::StructureReport)> {
        let g = pg.at(lambda)?;
        let sd = decompose(&g, tol)?;
        let rep = structure::analyze_spectrum(&g, &sd, tol, structure::DEFAULT_SEED)?;
        let point = ProbePoint {
            lambda,
            stationary_count: rep.stationary.basis_states.len(),
            kernel_dim: rep.stationary.kernel_dim(),
            oscillating_count: sd.oscillating_count(),
            basin_ranks: rep.basin_ranks(),
            error: None,
        };
        Ok((point, rep))
    };
    match run() {
        Ok((point, rep)) => ProbeData { point, report: Some(rep) },
        Err(e) => ProbeData {
            point: ProbePoint {
                lambda,
                stationary_count: 0,
                kernel_dim: 0,
                oscillating_count: 0,
                basin_ranks: Vec::new(),
                error: Some(e.to_string()),
            },
            report: None,
        },
    }
}

/// Structure analysis along the coupling, compared with `λ = 0`.
pub fn structure_continuity_probe(pg: &PerturbedGenerator, lambdas: &[f64], tol: &Tolerance) -> ContinuityReport {
    let zero = probe_at(pg, 0.0, tol);
    let g0 = pg.base.clone();
    let mut points = vec![zero.point.clone()];
    let mut transitions = Vec::new();
    let mut violations = Vec::new();
    let probes: Vec<ProbeData> = lambdas
        .iter()
        .filter(|&&l| l != 0.0)
        .map(|&l| probe_at(pg, l, tol))
        .collect();
    for p in probes {
        let (pt, z) = (&p.point, &zero.point);
        let l = pt.lambda;
        if let (Some(rep), Some(rep0)) = (&p.report, &zero.report) {
            let phases = |q: &ProbePoint| q.kernel_dim - q.stationary_count;
            if pt.stationary_count < z.stationary_count {
                transitions.push(Transition::StationaryCountDrop { lambda: l, from: z.stationary_count, to: pt.stationary_count });
            }
            if phases(pt) < phases(z) {
                transitions.push(Transition::PhaseRelationLoss { lambda: l, from: phases(z), to: phases(pt) });
            }
            if pt.oscillating_count < z.oscillating_count {
                transitions.push(Transition::OscillationLoss { lambda: l, from: z.oscillating_count, to: pt.oscillating_count });
            }
            for (bi, basin) in rep.collecting_basins.iter().enumerate() {
                let mut parts = Vec::new();
                for (lvl, level) in rep0.levels.iter().enumerate() {
                    for (k, q) in level.iter().enumerate() {
                        if linop::trace((basin * q).as_ref()).re > 0.5 {
                            parts.push((lvl, k));
                        }
                    }
                }
                if parts.len() > 1 {
                    transitions.push(Transition::BasinMerge { lambda: l, basin: bi, parts });
                }
                match is_lazy(&g0, basin, tol) {
                    Ok(cert) if cert.pass => {}
                    _ => violations.push(format!("collecting basin {bi} at lambda = {l} is not lazy in the limit")),
                }
            }
            if pt.kernel_dim > z.kernel_dim {
                violations.push(format!("kernel grows from {} to {} at lambda = {l}", z.kernel_dim, pt.kernel_dim));
            }
            if pt.oscillating_count > z.oscillating_count {
                violations.push(format!(
                    "oscillating count grows from {} to {} at lambda = {l}",
                    z.oscillating_count, pt.oscillating_count
                ));
            }
        }
        points.push(p.point);
    }
    ContinuityReport { points, transitions, violations }
}
