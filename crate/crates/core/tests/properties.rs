mod common;

use common::*;
use faer::Mat;
use lindblad_structure::dynamics::{evolve, trajectory};
use lindblad_structure::generator::{DensityMatrix, LindbladGenerator};
use lindblad_structure::linop::{self, ComplexMatrix, Superoperator, Tolerance, C64};
use lindblad_structure::spectral::{decompose, stationary_states};
use lindblad_structure::structure::{analyze, analyze_with_seed, is_collecting};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn build(seed: u64, d: usize, family: usize) -> LindbladGenerator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (h, ops) = random_generator(&mut rng, d, family);
    LindbladGenerator::new(h, ops).unwrap()
}

fn state(seed: u64, d: usize) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    DensityMatrix::new(random_pure_state(&mut rng, d), &Tolerance::default()).unwrap()
}

fn spec_norm(m: &ComplexMatrix) -> f64 {
    linop::spectral_norm(m.as_ref())
}

fn any_dim() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![2usize, 3, 4, 6])
}

fn small_dim() -> impl Strategy<Value = usize> {
    2usize..=4
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn vec_round_trip(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(&mut rng, d, 1.0);
        let v = linop::vectorize(x.as_ref()).unwrap();
        let back = linop::unvectorize(v.as_ref(), d).unwrap();
        prop_assert_eq!(back, x.clone());
        for j in 0..d {
            for i in 0..d {
                prop_assert_eq!(v[j * d + i], x[(i, j)]);
            }
        }
    }

    #[test]
    fn sandwich_matches_product(seed in any::<u64>(), d in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, d, 1.0);
        let b = random_matrix(&mut rng, d, 1.0);
        let x = random_matrix(&mut rng, d, 1.0);
        let s = Superoperator::sandwich(a.as_ref(), b.as_ref()).unwrap();
        let got = s.apply(x.as_ref()).unwrap();
        prop_assert!(dist(&got, &(&a * &x * &b)) <= 1e-12 * (d as f64));
    }

    #[test]
    fn exponential_semigroup(seed in any::<u64>(), d in small_dim(), family in 0usize..5,
                             t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let s = build(seed, d, family).superoperator();
        let whole = s.expm(t1 + t2).unwrap();
        let split = s.expm(t1).unwrap().compose(&s.expm(t2).unwrap()).unwrap();
        prop_assert!(whole.distance(&split).unwrap() <= 1e-9);
    }

    #[test]
    fn null_space_orthonormal(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let tol = Tolerance::default();
        let s = build(seed, d, family).superoperator();
        let m = s.matrix().to_owned();
        let ns = linop::null_space(m.as_ref(), &tol);
        prop_assert!(!ns.is_empty());
        let scale = spec_norm(&m).max(1.0);
        for (i, u) in ns.iter().enumerate() {
            prop_assert!((&m * u).norm_l2() <= 1e-8 * scale);
            for (j, w) in ns.iter().enumerate() {
                let ip = (u.adjoint() * w).norm();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn trace_and_hermiticity_preserved(seed in any::<u64>(), d in any_dim(), family in 0usize..5) {
        let g = build(seed, d, family);
        prop_assert!(spec_norm(&g.apply_heisenberg(&eye(d)).unwrap()) <= 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let x = hermitian(&random_matrix(&mut rng, d, 1.0));
        let y = g.apply_schrodinger(&x).unwrap();
        prop_assert!(tr(&y).norm() <= 1e-12);
        prop_assert!(dist(&y, &dag(&y)) <= 1e-12);
    }

    #[test]
    fn schrodinger_heisenberg_duality(seed in any::<u64>(), d in any_dim(), family in 0usize..5) {
        let g = build(seed, d, family);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        let f = random_matrix(&mut rng, d, 1.0);
        let x = random_matrix(&mut rng, d, 1.0);
        let lhs = tr(&(dag(&f) * g.apply_schrodinger(&x).unwrap()));
        let rhs = tr(&(dag(&g.apply_heisenberg(&f).unwrap()) * &x));
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (d * d) as f64);
    }

    #[test]
    fn superoperator_matches_oracle(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (h, ops) = random_generator(&mut rng, d, family);
        let g = LindbladGenerator::new(h.clone(), ops.clone()).unwrap();
        let want = superop(&h, &ops);
        prop_assert!(dist(&g.superoperator().matrix().to_owned(), &want) <= 1e-12);
        let adj = g.adjoint_superoperator().matrix().to_owned();
        prop_assert!(dist(&adj, &dag(&want)) <= 1e-12);
    }

    #[test]
    fn evolution_semigroup_and_positivity(seed in any::<u64>(), d in small_dim(), family in 0usize..5,
                                          s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let g = build(seed, d, family);
        let rho = state(seed, d);
        let once = evolve(&g, &rho, s + t).unwrap();
        let mid = evolve(&g, &rho, s).unwrap();
        let twice = evolve(&g, &mid, t).unwrap();
        prop_assert!(dist(once.matrix(), twice.matrix()) <= 1e-9);
        let traj = trajectory(&g, &rho, 4.0, 8).unwrap();
        for st in &traj.states {
            prop_assert!(min_eig(st.matrix()) >= -1e-8);
            prop_assert!((tr(st.matrix()).re - 1.0).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn spectrum_is_stable_and_self_dual(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let tol = Tolerance::default();
        let g = build(seed, d, family);
        let sd = decompose(&g, &tol).unwrap();
        for z in &sd.eigenvalues {
            prop_assert!(z.re <= tol.match_tol);
        }
        for cl in &sd.clusters {
            if cl.value.norm() <= tol.eig_group_tol {
                prop_assert_eq!(cl.jordan_defect, 0);
            }
        }
        let adj = g.adjoint_superoperator().matrix().to_owned();
        let (mut dual, _) = linop::general_eigen(adj.as_ref()).unwrap();
        for z in &sd.eigenvalues {
            let target = z.conj();
            let (k, gap) = dual
                .iter()
                .enumerate()
                .map(|(k, w)| (k, (w - target).norm()))
                .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            prop_assert!(gap <= tol.eig_group_tol * sd.norm().max(1.0), "unmatched {z}: {gap:e}");
            dual.swap_remove(k);
        }
    }

    #[test]
    fn stationary_set_pairs_with_observables(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let tol = Tolerance::default();
        let g = build(seed, d, family);
        let sd = decompose(&g, &tol).unwrap();
        let ss = stationary_states(&sd, &tol).unwrap();
        prop_assert!(!ss.basis_states.is_empty());
        let dm = g.superoperator().matrix().to_owned();
        let kd = kernel(&dm, 1e-9).len();
        let ka = kernel(&dag(&dm), 1e-9).len();
        prop_assert_eq!(kd, ka);
        prop_assert_eq!(ss.kernel_dim(), kd);
        prop_assert_eq!(ss.invariant_observables.len(), kd);
        prop_assert!(dist(&ss.pairing_matrix(), &eye(kd)) <= 1e-8);
        for s in &ss.basis_states {
            prop_assert!(spec_norm(&g.apply_schrodinger(s.matrix()).unwrap()) <= 1e-9);
            prop_assert!(min_eig(s.matrix()) >= -1e-8);
        }
    }

    #[test]
    fn enclosures_split_evolution(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let tol = Tolerance::default();
        let g = build(seed, d, family);
        let rep = analyze(&g, &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
        let x = random_matrix(&mut rng, d, 1.0);
        let t = rng.random_range(0.2..3.0);
        let prop = g.superoperator().expm(t).unwrap();
        let whole = prop.apply(x.as_ref()).unwrap();
        for q in &rep.enclosure_projectors {
            prop_assert!(spec_norm(&g.apply_heisenberg(q).unwrap()) <= 1e-10);
        }
        for qm in &rep.enclosure_projectors {
            for ql in &rep.enclosure_projectors {
                let block = prop.apply((qm * &x * ql).as_ref()).unwrap();
                prop_assert!(spec_norm(&(block - qm * &whole * ql)) <= 1e-8);
            }
        }
    }

    #[test]
    fn basins_are_seed_independent_and_full_rank(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let tol = Tolerance::default();
        let g = build(seed, d, family);
        let ranks = |s: u64| {
            let rep = analyze_with_seed(&g, &tol, s).unwrap();
            let mut r: Vec<usize> = rep.collecting_basins.iter().map(|b| linop::projector_rank(b.as_ref())).collect();
            r.sort_unstable();
            r
        };
        let base = ranks(1);
        prop_assert_eq!(&base, &ranks(2));
        prop_assert_eq!(&base, &ranks(0xDEAD_BEEF));

        let rep = analyze(&g, &tol).unwrap();
        for (s, p) in rep.stationary.basis_states.iter().zip(&rep.stationary.supports) {
            let w = linop::range_isometry(p.as_ref());
            let inner = dag(&w) * s.matrix() * &w;
            let m = min_eig(&inner);
            prop_assert!(m > 1e-12);
            if m < 1e-8 {
                prop_assert!(rep.warnings.iter().any(|w| w.contains("nearly singular")));
            }
            let cert = is_collecting(&g, p, &tol).unwrap();
            let enclosure = spec_norm(&g.apply_heisenberg(p).unwrap()) <= tol.match_tol;
            prop_assert!(cert.pass || enclosure);
        }
        prop_assert_eq!(rep.restricted_commutant_dim, rep.stationary.invariant_observables.len());
    }

    #[test]
    fn collecting_basins_confine(seed in any::<u64>(), d in small_dim(), family in 0usize..5) {
        let tol = Tolerance::default();
        let g = build(seed, d, family);
        let rep = analyze(&g, &tol).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
        let rho = random_pure_state(&mut rng, d);
        let f = hermitian(&random_matrix(&mut rng, d, 1.0));
        let mut basins = rep.collecting_basins.clone();
        basins.push(rep.p0.clone());
        for p in &basins {
            let q = linop::complement(p.as_ref());
            for t in [0.5, 5.0] {
                let fwd = g.superoperator().expm(t).unwrap();
                let out = fwd.apply((p * &rho * p).as_ref()).unwrap();
                prop_assert!(spec_norm(&(&q * &out * &q)) <= 1e-8);
                let back = g.adjoint_superoperator().expm(t).unwrap();
                let full = back.apply(f.as_ref()).unwrap();
                let cut = back.apply((p * &f * p).as_ref()).unwrap();
                prop_assert!(spec_norm(&(p * (full - cut) * p)) <= 1e-8);
            }
        }
    }

    #[test]
    fn decaying_part_empties(seed in any::<u64>(), d in small_dim(), family in 3usize..5) {
        let tol = Tolerance::default();
        let g = build(seed, d, family);
        let rep = analyze(&g, &tol).unwrap();
        let q = rep.decaying_projector();
        prop_assume!(linop::projector_rank(q.as_ref()) > 0);
        let gap = rep.gap.unwrap();
        let rho = state(seed, d);
        let t = 100.0 / gap;
        let out = evolve(&g, &rho, t).unwrap();
        prop_assert!(spec_norm(&(&q * out.matrix() * &q)) <= 1e-6);
    }
}

#[test]
fn zero_map_kernel_is_everything() {
    let tol = Tolerance::default();
    let z = Mat::<C64>::zeros(9, 9);
    assert_eq!(linop::null_space(z.as_ref(), &tol).len(), 9);
}
