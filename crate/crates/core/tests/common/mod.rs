//! Reference computations written directly against faer, without going
//! through the library's own superoperator or subspace code.
#![allow(dead_code)]

use faer::Mat;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use lindblad_structure::linop::{ComplexMatrix, C64};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `|i⟩⟨j|` with one-based indices.
pub fn e(d: usize, i: usize, j: usize) -> ComplexMatrix {
    Mat::from_fn(d, d, |r, c| if r == i - 1 && c == j - 1 { ONE } else { ZERO })
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    let d = values.len();
    Mat::from_fn(d, d, |r, c| if r == c { re(values[r]) } else { ZERO })
}

pub fn eye(d: usize) -> ComplexMatrix {
    Mat::from_fn(d, d, |r, c| if r == c { ONE } else { ZERO })
}

pub fn dag(a: &ComplexMatrix) -> ComplexMatrix {
    Mat::from_fn(a.ncols(), a.nrows(), |r, c| a[(c, r)].conj())
}

pub fn smul(a: &ComplexMatrix, s: C64) -> ComplexMatrix {
    Mat::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)] * s)
}

pub fn tr(a: &ComplexMatrix) -> C64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * p, a.ncols() * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

pub fn transpose(a: &ComplexMatrix) -> ComplexMatrix {
    Mat::from_fn(a.ncols(), a.nrows(), |r, c| a[(c, r)])
}

pub fn conj(a: &ComplexMatrix) -> ComplexMatrix {
    Mat::from_fn(a.nrows(), a.ncols(), |r, c| a[(r, c)].conj())
}

/// Column-stacked superoperator of `X ↦ −i[H,X] + Σ hXh† − ½{h†h, X}`.
pub fn superop(h: &ComplexMatrix, ops: &[ComplexMatrix]) -> ComplexMatrix {
    let d = h.nrows();
    let id = eye(d);
    let mi = C64::new(0.0, -1.0);
    let mut l = smul(&(kron(&id, h) - kron(&transpose(h), &id)), mi);
    for a in ops {
        let ada = dag(a) * a;
        l += kron(&conj(a), a);
        l -= smul(&kron(&id, &ada), re(0.5));
        l -= smul(&kron(&transpose(&ada), &id), re(0.5));
    }
    l
}

/// Direct evaluation of the generator on a matrix.
pub fn apply(h: &ComplexMatrix, ops: &[ComplexMatrix], x: &ComplexMatrix) -> ComplexMatrix {
    let mi = C64::new(0.0, -1.0);
    let mut out = smul(&(h * x - x * h), mi);
    for a in ops {
        let ada = dag(a) * a;
        out += a * x * dag(a);
        out -= smul(&(&ada * x + x * &ada), re(0.5));
    }
    out
}

pub fn vecm(x: &ComplexMatrix) -> Vec<C64> {
    let d = x.nrows();
    (0..d * x.ncols()).map(|k| x[(k % d, k / d)]).collect()
}

pub fn unvec(v: &[C64], d: usize) -> ComplexMatrix {
    Mat::from_fn(d, d, |r, c| v[r + c * d])
}

pub fn norm2(a: &ComplexMatrix) -> f64 {
    if a.norm_l2() == 0.0 {
        return 0.0;
    }
    a.singular_values().unwrap()[0]
}

pub fn dist(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    norm2(&(a - b))
}

/// Right singular vectors whose singular values fall below `rel * smax`.
pub fn kernel(m: &ComplexMatrix, rel: f64) -> Vec<Vec<C64>> {
    let n = m.ncols();
    let svd = m.svd().unwrap();
    let s = svd.S().column_vector();
    let smax = (0..s.nrows()).map(|i| s[i].re).fold(0.0, f64::max);
    let rank = (0..s.nrows()).filter(|&i| s[i].re > rel * smax).count();
    (rank..n).map(|k| (0..n).map(|i| svd.V()[(i, k)]).collect()).collect()
}

/// Gram-Schmidt on vectorized matrices.
fn orthonormal(mats: &[ComplexMatrix]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for m in mats {
        let mut v = vecm(m);
        for _ in 0..2 {
            for q in &out {
                let c: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-10 {
            out.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    out
}

fn span_projector(mats: &[ComplexMatrix]) -> (usize, ComplexMatrix) {
    let q = orthonormal(mats);
    let n = mats.first().map(|m| m.nrows() * m.ncols()).unwrap_or(0);
    let mut p = Mat::zeros(n, n);
    for v in &q {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    (q.len(), p)
}

/// Sine of the largest principal angle between two spans; 1 when the
/// dimensions differ.
pub fn subspace_angle(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    let (ra, pa) = span_projector(a);
    let (rb, pb) = span_projector(b);
    if ra != rb {
        return 1.0;
    }
    norm2(&(pa - pb)).min(1.0)
}

pub fn min_eig(m: &ComplexMatrix) -> f64 {
    let h = Mat::from_fn(m.nrows(), m.ncols(), |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
    h.self_adjoint_eigenvalues(faer::Side::Lower)
        .unwrap()
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Unique kernel element of a superoperator, trace-normalized.
pub fn unique_stationary(l: &ComplexMatrix, d: usize) -> Option<ComplexMatrix> {
    let k = kernel(l, 1e-10);
    if k.len() != 1 {
        return None;
    }
    let m = unvec(&k[0], d);
    let t = tr(&m);
    Some(smul(&m, ONE / t))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> ComplexMatrix {
    Mat::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale
    })
}

pub fn hermitian(m: &ComplexMatrix) -> ComplexMatrix {
    smul(&(m + dag(m)), re(0.5))
}

pub fn block_sum(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (p, q) = (a.nrows(), b.nrows());
    Mat::from_fn(p + q, p + q, |r, c| {
        if r < p && c < p {
            a[(r, c)]
        } else if r >= p && c >= p {
            b[(r - p, c - p)]
        } else {
            ZERO
        }
    })
}

/// Random generator drawn from one of five families: generic, two
/// independent enclosures, two identical enclosures, a cascade and a
/// block that drains into a closed upper block.
pub fn random_generator(rng: &mut ChaCha8Rng, d: usize, family: usize) -> (ComplexMatrix, Vec<ComplexMatrix>) {
    let s = 1.0 / (d as f64).sqrt();
    let nops = rng.random_range(1..=3);
    match family {
        0 => {
            let h = hermitian(&random_matrix(rng, d, 1.0));
            (h, (0..nops).map(|_| random_matrix(rng, d, s)).collect())
        }
        1 | 2 => {
            let m = d / 2;
            // identical copies need an even split
            let twin = family == 2 && d == 2 * m;
            let ha = hermitian(&random_matrix(rng, m, 1.0));
            let hb = if twin { ha.clone() } else { hermitian(&random_matrix(rng, d - m, 1.0)) };
            let ops = (0..nops)
                .map(|_| {
                    let a = random_matrix(rng, m, s);
                    let b = if twin { a.clone() } else { random_matrix(rng, d - m, s) };
                    block_sum(&a, &b)
                })
                .collect();
            (block_sum(&ha, &hb), ops)
        }
        4 => {
            let m = rng.random_range(1..d);
            let ha = hermitian(&random_matrix(rng, m, 1.0));
            let hb = hermitian(&random_matrix(rng, d - m, 1.0));
            let inner = block_sum(&random_matrix(rng, m, s), &random_matrix(rng, d - m, s));
            let b = random_matrix(rng, d, s);
            let jump = Mat::from_fn(d, d, |r, c| if r < m && c >= m { b[(r, c)] } else { ZERO });
            (block_sum(&ha, &hb), vec![inner, jump])
        }
        _ => {
            let m = rng.random_range(1..d);
            let h = diag(&(0..d).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
            let mut ops: Vec<ComplexMatrix> = (0..nops)
                .map(|_| {
                    let mut a = random_matrix(rng, d, s);
                    for r in 0..d {
                        for c in 0..d {
                            if r >= m && r >= c {
                                a[(r, c)] = ZERO;
                            }
                        }
                    }
                    a
                })
                .collect();
            if m == 1 {
                ops.push(Mat::zeros(d, d));
            }
            (h, ops)
        }
    }
}

pub fn random_pure_state(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    let x = Mat::from_fn(d, 1, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let p = &x * dag(&x);
    smul(&p, ONE / tr(&p))
}

