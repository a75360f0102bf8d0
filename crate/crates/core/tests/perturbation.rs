mod common;

use common::*;
use faer::Mat;
use lindblad_structure::generator::LindbladGenerator;
use lindblad_structure::linop::{ComplexMatrix, Tolerance};
use lindblad_structure::perturbation::{
    build_e, build_f, expand_degenerate, expand_unique, merging_alpha0, PerturbationSeries,
    PerturbedGenerator,
};
use lindblad_structure::spectral::{decompose, stationary_states};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random base (unique or two enclosures) with a generic perturbation.
fn random_system(rng: &mut ChaCha8Rng) -> PerturbedGenerator {
    let d = rng.random_range(2..=4);
    let family = if rng.random_bool(0.5) { 1 } else { 0 };
    let (h, ops) = random_generator(rng, d, family);
    let n = ops.len();
    let base = LindbladGenerator::new(h, ops).unwrap();
    let v = hermitian(&random_matrix(rng, d, 0.3));
    let k = (0..n).map(|_| random_matrix(rng, d, 0.3)).collect();
    PerturbedGenerator::new(base, Some(v), None, k).unwrap()
}

fn expand(pg: &PerturbedGenerator, order: usize) -> PerturbationSeries {
    let tol = Tolerance::default();
    let sd = decompose(pg.base(), &tol).unwrap();
    if sd.zero_multiplicity() == 1 {
        expand_unique(pg, order, &tol).unwrap()
    } else {
        expand_degenerate(pg, order, &tol).unwrap()
    }
}

#[test]
fn series_agrees_with_dense_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5E_41E5);
    let mut checked = 0;
    let mut degenerate = 0;
    while checked < 20 {
        let pg = random_system(&mut rng);
        let d = pg.dim();
        let lambda = 0.05;
        let Some(direct) = unique_stationary(&pg.superoperator_at(lambda).matrix().to_owned(), d) else {
            continue;
        };
        let s = expand(&pg, 8);
        if s.alphas[0].len() > 1 {
            degenerate += 1;
        }
        let err = dist(&s.partial_sum(lambda), &direct);
        assert!(err <= 1e-6, "system {checked} (d={d}): error {err:e}");
        checked += 1;
    }
    assert!(degenerate >= 5, "only {degenerate} degenerate bases drawn");
}

#[test]
fn coefficients_are_hermitian_and_traceless() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let pg = random_system(&mut rng);
        let s = expand(&pg, 6);
        assert!((tr(&s.sigmas[0]).re - 1.0).abs() <= 1e-10);
        for (n, sig) in s.sigmas.iter().enumerate() {
            assert!(dist(sig, &dag(sig)) <= 1e-10, "σ_{n} not Hermitian");
            if n > 0 {
                assert!(tr(sig).norm() <= 1e-10, "σ_{n} not traceless");
            }
        }
    }
}

#[test]
fn residual_exponent_beats_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let lambdas: Vec<f64> = (0..5).map(|i| 10f64.powf(-3.0 + 0.5 * i as f64)).collect();
    let mut fitted = 0;
    for _ in 0..8 {
        let pg = random_system(&mut rng);
        for order in [1, 2, 3] {
            let mut s = expand(&pg, order);
            s.evaluate(&pg, &lambdas).unwrap();
            if let Some(p) = s.fitted_exponent() {
                assert!(p >= order as f64 + 0.5, "order {order}: exponent {p}");
                fitted += 1;
            }
        }
    }
    assert!(fitted >= 16, "only {fitted} fits");
}

#[test]
fn e_and_f_are_derivatives_of_the_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let pg = random_system(&mut rng);
        let d0 = pg.superoperator_at(0.0).matrix().to_owned();
        let dp = pg.superoperator_at(1.0).matrix().to_owned();
        let dm = pg.superoperator_at(-1.0).matrix().to_owned();
        // D_λ is exactly quadratic in λ
        let e = smul(&(&dp - &dm), re(0.5));
        let f = smul(&(&dp + &dm - smul(&d0, re(2.0))), re(0.5));
        assert!(dist(&build_e(&pg).matrix().to_owned(), &e) <= 1e-12);
        assert!(dist(&build_f(&pg).matrix().to_owned(), &f) <= 1e-12);
        assert!(dist(&d0, &pg.base().superoperator().matrix().to_owned()) <= 1e-14);
    }
}

#[test]
fn merging_weight_is_a_probability() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let q1 = diag(&[1.0, 1.0, 0.0, 0.0]);
    let q2 = diag(&[0.0, 0.0, 1.0, 1.0]);
    for _ in 0..50 {
        let a = random_pure_state(&mut rng, 2);
        let b = random_pure_state(&mut rng, 2);
        let rho1 = block_sum(&a, &Mat::zeros(2, 2));
        let rho2 = block_sum(&Mat::zeros(2, 2), &b);
        let k: Vec<ComplexMatrix> = (0..2).map(|_| random_matrix(&mut rng, 4, 1.0)).collect();
        let into1: f64 = k.iter().map(|k| tr(&(&q1 * k * &rho2 * dag(k) * &q1)).re).sum();
        if into1 > 1e-8 {
            let alpha = merging_alpha0(&k, &q1, &q2, &rho1, &rho2);
            assert!(alpha > 0.0 && alpha <= 1.0, "{alpha}");
        }
    }
}

#[test]
fn degenerate_limit_matches_small_lambda_kernel() {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD3);
    let mut seen = 0;
    while seen < 6 {
        let pg = random_system(&mut rng);
        let sd = decompose(pg.base(), &tol).unwrap();
        if sd.zero_multiplicity() == 1 {
            continue;
        }
        let ss = stationary_states(&sd, &tol).unwrap();
        let s = expand_degenerate(&pg, 2, &tol).unwrap();
        let d = pg.dim();
        let Some(direct) = unique_stationary(&pg.superoperator_at(1e-4).matrix().to_owned(), d) else {
            continue;
        };
        assert!(dist(&s.sigmas[0], &direct) <= 1e-3);
        assert!(dist(&pg.base().apply_schrodinger(&s.sigmas[0]).unwrap(), &Mat::zeros(d, d)) <= 1e-10);
        assert_eq!(s.alphas[0].len(), ss.kernel_dim());
        seen += 1;
    }
}
