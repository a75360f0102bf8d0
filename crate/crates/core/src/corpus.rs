//! Worked examples shipped as JSON fixtures, each with its expected results.

use faer::Col;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generator::LindbladGenerator;
use crate::json::{matrix_from_rows, GeneratorSpec, JsonComplex, JsonMatrix, PerturbationSpec, SCHEMA_VERSION};
use crate::linop::{self, matrix_unit, orthonormalize, vec_unchecked, ComplexMatrix, Tolerance, C64};
use crate::perturbation::{expand_degenerate, expand_unique, PerturbationSeries, PerturbedGenerator};
use crate::spectral::{decompose, invariant_observable_closure, stationary_states};
use crate::structure::{analyze_with_seed, detect_max_symmetry, DEFAULT_SEED};

const FIXTURES: &[(&str, &str)] = &[
    ("dissipation", include_str!("../data/fixtures/dissipation.json")),
    ("two-basins", include_str!("../data/fixtures/two-basins.json")),
    ("two-basins-phase", include_str!("../data/fixtures/two-basins-phase.json")),
    ("inner-dissipation", include_str!("../data/fixtures/inner-dissipation.json")),
    ("dephasing-enclosures", include_str!("../data/fixtures/dephasing-enclosures.json")),
    ("undamped-oscillation", include_str!("../data/fixtures/undamped-oscillation.json")),
    ("stationary-phase", include_str!("../data/fixtures/stationary-phase.json")),
    ("cascade", include_str!("../data/fixtures/cascade.json")),
    ("maximal-symmetric", include_str!("../data/fixtures/maximal-symmetric.json")),
    ("maximal-symmetric-weyl", include_str!("../data/fixtures/maximal-symmetric-weyl.json")),
    ("series-unique", include_str!("../data/fixtures/series-unique.json")),
    ("merging-enclosures", include_str!("../data/fixtures/merging-enclosures.json")),
    ("hamiltonian-dephasing", include_str!("../data/fixtures/hamiltonian-dephasing.json")),
    ("cascade-merge", include_str!("../data/fixtures/cascade-merge.json")),
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerant<T> {
    pub values: T,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scalar {
    pub value: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassShape {
    pub multiplicity: usize,
    pub inner_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Equivalence {
    pub name: String,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexedMatrix {
    pub n: usize,
    pub value: JsonMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesExpectation {
    /// `unique` or `degenerate`.
    pub kind: String,
    pub order: usize,
    #[serde(default)]
    pub sigmas: Vec<IndexedMatrix>,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialSum {
    pub lambda: f64,
    pub value: JsonMatrix,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteForce {
    pub lambda: f64,
    pub tol: f64,
}

/// Expected results; absent fields are not checked.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub spectrum: Option<Tolerant<Vec<JsonComplex>>>,
    pub stationary_states: Option<Tolerant<Vec<JsonMatrix>>>,
    /// Span of the invariant observables, unnormalized.
    pub observable_span: Option<Tolerant<Vec<JsonMatrix>>>,
    /// Invariant observables dual to the stationary states.
    pub normalized_observables: Option<Tolerant<Vec<JsonMatrix>>>,
    pub algebra_closed: Option<bool>,
    pub commutant_dim: Option<usize>,
    pub adjoint_zero_multiplicity: Option<usize>,
    pub basin_ranks: Option<Vec<Vec<usize>>>,
    /// Diagonal of each basin projector, level by level.
    pub basin_diagonals: Option<Vec<Vec<Vec<f64>>>>,
    pub intertwiner_shifts: Option<Vec<f64>>,
    pub dephasing_classes: Option<Vec<ClassShape>>,
    pub oscillating_eigenvalues: Option<Tolerant<Vec<JsonComplex>>>,
    /// `R` with `d/dt r_ii = Σ_j R_ij r_jj` on diagonal states.
    pub diagonal_rates: Option<Tolerant<Vec<Vec<f64>>>>,
    pub max_symmetry_rate: Option<Scalar>,
    pub equivalent_to: Option<Equivalence>,
    pub series: Option<SeriesExpectation>,
    pub partial_sum: Option<PartialSum>,
    pub radius: Option<Scalar>,
    /// Weight of the first stationary state in the limiting state.
    pub alpha0: Option<Scalar>,
    /// Series against the kernel of `D_λ` computed directly.
    pub brute_force: Option<BruteForce>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FixtureFile {
    name: String,
    title: String,
    #[serde(default)]
    notes: Vec<String>,
    #[serde(default)]
    generator: Option<GeneratorSpec>,
    #[serde(default)]
    perturbation: Option<PerturbationSpec>,
    expected: Expected,
}

#[derive(Debug, Clone)]
pub enum System {
    Generator(LindbladGenerator),
    Perturbed(PerturbedGenerator),
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub title: String,
    pub notes: Vec<String>,
    pub system: System,
    pub expected: Expected,
    raw: &'static str,
}

impl Fixture {
    /// The generator, or the unperturbed one for perturbation fixtures.
    pub fn generator(&self) -> &LindbladGenerator {
        match &self.system {
            System::Generator(g) => g,
            System::Perturbed(p) => p.base(),
        }
    }

    pub fn perturbed(&self) -> Option<&PerturbedGenerator> {
        match &self.system {
            System::Perturbed(p) => Some(p),
            System::Generator(_) => None,
        }
    }

    /// The fixture file as shipped.
    pub fn source(&self) -> &'static str {
        self.raw
    }
}

pub fn names() -> Vec<&'static str> {
    FIXTURES.iter().map(|(n, _)| *n).collect()
}

pub fn load(name: &str) -> Result<Fixture> {
    let (_, raw) = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::UnknownFixture(name.to_string()))?;
    let file: FixtureFile = serde_json::from_str(raw)?;
    let system = match (&file.generator, &file.perturbation) {
        (Some(g), None) => System::Generator(LindbladGenerator::from_spec(g)?),
        (None, Some(p)) => System::Perturbed(PerturbedGenerator::from_spec(p)?),
        _ => {
            return Err(Error::InvalidInput(format!(
                "fixture {name} must carry exactly one of generator or perturbation"
            )))
        }
    };
    Ok(Fixture {
        name: file.name,
        title: file.title,
        notes: file.notes,
        system,
        expected: file.expected,
        raw,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub field: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixtureResult {
    pub name: String,
    pub checks: Vec<Check>,
    /// Analysis failure that prevented the checks from running.
    pub error: Option<String>,
}

impl FixtureResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusReport {
    pub results: Vec<FixtureResult>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "passed": self.passed(),
            "results": self.results,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.results {
            let mark = if r.passed() { "ok  " } else { "FAIL" };
            s.push_str(&format!("{mark} {} ({} checks)\n", r.name, r.checks.len()));
            if let Some(e) = &r.error {
                s.push_str(&format!("     error: {e}\n"));
            }
            for c in r.checks.iter().filter(|c| !c.pass) {
                s.push_str(&format!("     {}: {}\n", c.field, c.detail));
            }
        }
        let failed = self.results.iter().filter(|r| !r.passed()).count();
        s.push_str(&format!("{} fixtures, {failed} failed\n", self.results.len()));
        s
    }
}

pub fn run_all(tol: &Tolerance) -> CorpusReport {
    run_named(&names(), tol)
}

pub fn run_named(names: &[&str], tol: &Tolerance) -> CorpusReport {
    let results = names
        .iter()
        .map(|n| match load(n) {
            Ok(f) => run_fixture(&f, tol),
            Err(e) => FixtureResult {
                name: n.to_string(),
                checks: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    CorpusReport { results }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, field: &str, pass: bool, detail: impl Into<String>) {
        self.0.push(Check {
            field: field.to_string(),
            pass,
            detail: detail.into(),
        });
    }

    fn within(&mut self, field: &str, err: f64, tol: f64) {
        self.push(field, err <= tol, format!("deviation {err:.3e} (tolerance {tol:.1e})"));
    }

    fn equal<T: PartialEq + std::fmt::Debug>(&mut self, field: &str, got: T, want: T) {
        let pass = got == want;
        self.push(field, pass, format!("got {got:?}, expected {want:?}"));
    }
}

pub fn run_fixture(f: &Fixture, tol: &Tolerance) -> FixtureResult {
    let mut checks = Checks(Vec::new());
    let error = run_checks(f, tol, &mut checks).err().map(|e| e.to_string());
    FixtureResult {
        name: f.name.clone(),
        checks: checks.0,
        error,
    }
}

fn matrices(ms: &[JsonMatrix]) -> Result<Vec<ComplexMatrix>> {
    ms.iter().map(matrix_from_rows).collect()
}

/// Worst distance from an expected item to its nearest unused computed item.
fn multiset_distance<T, F: Fn(&T, &T) -> f64>(want: &[T], got: &[T], dist: F) -> f64 {
    if want.len() != got.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; got.len()];
    let mut worst = 0.0f64;
    for w in want {
        let best = (0..got.len())
            .filter(|&k| !used[k])
            .map(|k| (k, dist(w, &got[k])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        match best {
            Some((k, d)) => {
                used[k] = true;
                worst = worst.max(d);
            }
            None => return f64::INFINITY,
        }
    }
    worst
}

/// Sine of the largest principal angle between two spans of matrices.
pub fn subspace_distance(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    let va: Vec<Col<C64>> = a.iter().map(|m| vec_unchecked(m.as_ref())).collect();
    let vb: Vec<Col<C64>> = b.iter().map(|m| vec_unchecked(m.as_ref())).collect();
    let qa = orthonormalize(&va, 1e-10);
    let qb = orthonormalize(&vb, 1e-10);
    if qa.len() != qb.len() {
        return 1.0;
    }
    let mut worst = 0.0f64;
    for v in &qb {
        let mut r = v.clone();
        for q in &qa {
            let coef = q.adjoint() * &r;
            r -= q * faer::Scale(coef);
        }
        worst = worst.max(r.norm_l2());
    }
    worst
}

fn run_checks(f: &Fixture, tol: &Tolerance, out: &mut Checks) -> Result<()> {
    let ex = &f.expected;
    let g = f.generator();
    let report = g.validate(tol);
    out.push("valid generator", report.passed(), format!("{report:?}"));

    let needs_structure = ex.spectrum.is_some()
        || ex.stationary_states.is_some()
        || ex.observable_span.is_some()
        || ex.normalized_observables.is_some()
        || ex.algebra_closed.is_some()
        || ex.commutant_dim.is_some()
        || ex.adjoint_zero_multiplicity.is_some()
        || ex.basin_ranks.is_some()
        || ex.basin_diagonals.is_some()
        || ex.intertwiner_shifts.is_some()
        || ex.dephasing_classes.is_some()
        || ex.oscillating_eigenvalues.is_some();
    if needs_structure {
        let sd = decompose(g, tol)?;
        if let Some(s) = &ex.spectrum {
            let want: Vec<C64> = s.values.iter().map(|z| z.value()).collect();
            let err = multiset_distance(&want, &sd.eigenvalues, |a, b| (a - b).norm());
            out.within("spectrum", err, s.tol);
        }
        if let Some(s) = &ex.oscillating_eigenvalues {
            let want: Vec<C64> = s.values.iter().map(|z| z.value()).collect();
            let got: Vec<C64> = sd.oscillating_clusters().iter().map(|c| c.value).collect();
            let err = multiset_distance(&want, &got, |a, b| (a - b).norm());
            out.within("oscillating eigenvalues", err, s.tol);
        }
        if let Some(m) = ex.adjoint_zero_multiplicity {
            out.equal("adjoint zero multiplicity", sd.zero_multiplicity(), m);
        }
        let ss = stationary_states(&sd, tol)?;
        if let Some(s) = &ex.stationary_states {
            let want = matrices(&s.values)?;
            let got: Vec<ComplexMatrix> = ss.basis_states.iter().map(|b| b.matrix().clone()).collect();
            let err = multiset_distance(&want, &got, |a, b| linop::spectral_norm((a - b).as_ref()));
            out.within("stationary states", err, s.tol);
        }
        if let Some(s) = &ex.observable_span {
            let want = matrices(&s.values)?;
            out.within("invariant observable span", subspace_distance(&want, &ss.observable_span), s.tol);
        }
        if let Some(s) = &ex.normalized_observables {
            let want = matrices(&s.values)?;
            let err = multiset_distance(&want, &ss.invariant_observables, |a, b| {
                linop::spectral_norm((a - b).as_ref())
            });
            out.within("normalized invariant observables", err, s.tol);
        }
        if let Some(closed) = ex.algebra_closed {
            out.equal("observables form an algebra", invariant_observable_closure(&ss, tol).is_algebra, closed);
        }
        let rep = analyze_with_seed(g, tol, DEFAULT_SEED)?;
        if let Some(n) = ex.commutant_dim {
            out.equal("commutant dimension", rep.commutant_dim, n);
        }
        if let Some(r) = &ex.basin_ranks {
            out.equal("basin ranks", rep.basin_ranks(), r.clone());
        }
        if let Some(diags) = &ex.basin_diagonals {
            let got: Vec<Vec<Vec<f64>>> = rep
                .levels
                .iter()
                .map(|l| l.iter().map(|p| (0..p.nrows()).map(|i| p[(i, i)].re).collect()).collect())
                .collect();
            let same_shape = got.len() == diags.len()
                && got.iter().zip(diags).all(|(a, b)| a.len() == b.len());
            let err = if same_shape {
                got.iter()
                    .flatten()
                    .zip(diags.iter().flatten())
                    .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
                    .fold(0.0, f64::max)
            } else {
                f64::INFINITY
            };
            out.within("basin diagonals", err, 1e-8);
        }
        if let Some(shifts) = &ex.intertwiner_shifts {
            let mut got: Vec<f64> = rep.intertwiners.iter().map(|i| i.energy_shift.abs()).collect();
            got.sort_by(f64::total_cmp);
            let mut want: Vec<f64> = shifts.iter().map(|s| s.abs()).collect();
            want.sort_by(f64::total_cmp);
            let err = multiset_distance(&want, &got, |a, b| (a - b).abs());
            out.push(
                "intertwiner energy shifts",
                err <= 1e-8,
                format!("got {got:?}, expected {want:?}"),
            );
        }
        if let Some(classes) = &ex.dephasing_classes {
            let mut got: Vec<(usize, usize)> =
                rep.dephasing_classes.iter().map(|c| (c.multiplicity, c.inner_dim)).collect();
            let mut want: Vec<(usize, usize)> = classes.iter().map(|c| (c.multiplicity, c.inner_dim)).collect();
            got.sort();
            want.sort();
            out.equal("dephasing classes", got, want);
        }
    }

    if let Some(r) = &ex.diagonal_rates {
        let d = g.dim();
        let mut err = 0.0f64;
        for j in 0..d {
            let img = g.apply_schrodinger(&matrix_unit(d, j, j))?;
            for i in 0..d {
                err = err.max((img[(i, i)] - C64::new(r.values[i][j], 0.0)).norm());
            }
        }
        out.within("diagonal rates", err, r.tol);
    }
    if let Some(s) = &ex.max_symmetry_rate {
        let ms = detect_max_symmetry(g, tol)?;
        out.push("maximal symmetry", ms.is_max, format!("defect {:.3e}", ms.defect));
        out.within("maximal symmetry rate", (ms.rate - s.value).abs(), s.tol);
    }
    if let Some(eq) = &ex.equivalent_to {
        let other = load(&eq.name)?;
        let dist = g.superoperator().distance(&other.generator().superoperator())?;
        out.within(&format!("equal to {}", eq.name), dist, eq.tol);
    }

    if let Some(pg) = f.perturbed() {
        run_series_checks(pg, ex, tol, out)?;
    }
    Ok(())
}

fn run_series_checks(pg: &PerturbedGenerator, ex: &Expected, tol: &Tolerance, out: &mut Checks) -> Result<()> {
    let Some(spec) = &ex.series else {
        return Ok(());
    };
    let series: PerturbationSeries = match spec.kind.as_str() {
        "unique" => expand_unique(pg, spec.order, tol)?,
        "degenerate" => expand_degenerate(pg, spec.order, tol)?,
        other => return Err(Error::InvalidInput(format!("unknown series kind `{other}`"))),
    };
    let stol = spec.tol.unwrap_or(1e-10);
    for s in &spec.sigmas {
        let want = matrix_from_rows(&s.value)?;
        let err = match series.sigmas.get(s.n) {
            Some(got) => linop::spectral_norm((got - &want).as_ref()),
            None => f64::INFINITY,
        };
        out.within(&format!("sigma_{}", s.n), err, stol);
    }
    if let Some(p) = &ex.partial_sum {
        let want = matrix_from_rows(&p.value)?;
        let err = linop::spectral_norm((series.partial_sum(p.lambda) - want).as_ref());
        out.within(&format!("partial sum at {}", p.lambda), err, p.tol);
    }
    if let Some(r) = &ex.radius {
        let err = series.radius_estimate().map_or(f64::INFINITY, |x| (x - r.value).abs());
        out.within("convergence radius", err, r.tol);
    }
    if let Some(a) = &ex.alpha0 {
        let got = series.alphas[0][0];
        out.within("alpha0", (got - C64::new(a.value, 0.0)).norm(), a.tol);
    }
    if let Some(b) = &ex.brute_force {
        let g = pg.at(b.lambda)?;
        let ss = stationary_states(&decompose(&g, tol)?, tol)?;
        if ss.kernel_dim() != 1 {
            out.push("brute force", false, format!("kernel of D_lambda has dimension {}", ss.kernel_dim()));
        } else {
            let exact = ss.basis_states[0].matrix();
            let err = linop::spectral_norm((series.partial_sum(b.lambda) - exact).as_ref());
            out.within(&format!("series vs kernel at {}", b.lambda), err, b.tol);
        }
    }
    Ok(())
}
