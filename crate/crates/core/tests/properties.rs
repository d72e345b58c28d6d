use proptest::prelude::*;

use qmarginal::criteria::{
    generalized_hat, hat_state, ppt_test, symmetric_extension_verdict, tilde_state, ExtensionProblem,
};
use qmarginal::families::{
    bell_paper_condition, bell_state, werner_hat_map, werner_paper_kext_threshold, werner_state,
    werner_tilde_map, wootters_concurrence, BellDiagonalParams, WernerParams,
};
use qmarginal::linalg::{
    binomial, c, hermitian_eigh, hermitian_eigs, identity, max_abs_diff, min_eigenvalue, partial_trace,
    partial_transpose_matrix, permutation_operator, symmetric_projector, tensor_product, trace,
    twirl_channel, DensityMatrix, Permutation, SystemLayout,
};
use qmarginal::oracle::{
    project_marginal_affine, project_permutation_invariant, project_psd,
};
use qmarginal::random::{ginibre, random_density, random_separable, random_symmetric_supported, seeded};
use qmarginal::statefile::{read_state, write_state};
use qmarginal::linalg::Tolerances;

fn werner(d: usize, psi: f64) -> DensityMatrix {
    werner_state(&WernerParams::new(d, psi).unwrap())
}

fn layout(dims: &[usize]) -> SystemLayout {
    SystemLayout::new(dims.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_inverts_tensor_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = seeded(seed);
        let a = random_density(layout(&[da]), &mut rng);
        let b = random_density(layout(&[db]), &mut rng);
        let ab = tensor_product(&a, &b);
        prop_assert!(max_abs_diff(partial_trace(&ab, &[0]).unwrap().matrix(), a.matrix()) <= 1e-12);
        prop_assert!(max_abs_diff(partial_trace(&ab, &[1]).unwrap().matrix(), b.matrix()) <= 1e-12);
    }

    #[test]
    fn partial_transpose_is_a_trace_preserving_involution(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, sys in 0usize..2) {
        let rho = random_density(layout(&[da, db]), &mut seeded(seed));
        let dims = [da, db];
        let once = partial_transpose_matrix(rho.matrix(), &dims, sys).unwrap();
        let twice = partial_transpose_matrix(&once, &dims, sys).unwrap();
        prop_assert!(max_abs_diff(&twice, rho.matrix()) == 0.0);
        prop_assert!((trace(&once) - c(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn separable_mixtures_are_ppt(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, terms in 1usize..8) {
        let rho = random_separable(da, db, terms, &mut seeded(seed)).unwrap();
        prop_assert!(!ppt_test(&rho, 1).unwrap().is_violated());
    }

    #[test]
    fn eigensolver_reconstructs(seed in any::<u64>(), n in 1usize..10) {
        let g = ginibre(n, n, &mut seeded(seed));
        let h = (&g + g.adjoint()) * c(0.5, 0.0);
        let (values, vectors) = hermitian_eigh(&h).unwrap();
        prop_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!((values.iter().sum::<f64>() - trace(&h).re).abs() <= 1e-10);
        let scaled = qmarginal::linalg::ComplexMatrix::from_fn(n, n, |r, col| vectors[(r, col)] * values[col]);
        prop_assert!(max_abs_diff(&(&scaled * vectors.adjoint()), &h) <= 1e-9);
    }

    #[test]
    fn permutation_operators_compose(k in 1usize..5, d in 2usize..4, a in any::<u64>(), b in any::<u64>()) {
        let all: Vec<Permutation> = Permutation::all(k).collect();
        let p = &all[(a % all.len() as u64) as usize];
        let q = &all[(b % all.len() as u64) as usize];
        let image = |x: &Permutation| (0..k).map(|m| x.apply(m)).collect::<Vec<_>>();
        let wp = permutation_operator(d, &image(p)).unwrap().matrix();
        let wq = permutation_operator(d, &image(q)).unwrap().matrix();
        let wpq = permutation_operator(d, &image(&p.compose(q))).unwrap().matrix();
        prop_assert!(max_abs_diff(&(&wp * &wq), &wpq) == 0.0);
        prop_assert!(max_abs_diff(&(&wp * wp.adjoint()), &identity(wp.nrows())) == 0.0);
    }

    #[test]
    fn twirl_matches_closed_form(seed in any::<u64>(), d in 2usize..4, k in 2usize..4) {
        let rho = random_symmetric_supported(1, d, k, &mut seeded(seed)).unwrap();
        let got = twirl_channel(&rho, d).unwrap();
        let rho_b = partial_trace(&rho, &[0]).unwrap();
        let want = (identity(d) + rho_b.matrix() * c(k as f64, 0.0)) / c((d + k) as f64, 0.0);
        prop_assert!(max_abs_diff(&got, &want) <= 1e-10);
    }

    #[test]
    fn derived_states_keep_the_a_marginal(seed in any::<u64>(), da in 2usize..4, db in 2usize..4, k in 1usize..12) {
        let rho = random_density(layout(&[da, db]), &mut seeded(seed));
        let rho_a = partial_trace(&rho, &[0]).unwrap();
        for derived in [tilde_state(&rho, k).unwrap(), hat_state(&rho, k).unwrap()] {
            let valid = DensityMatrix::new(derived.layout().clone(), derived.matrix().clone());
            prop_assert!(valid.is_ok());
            let a = partial_trace(&derived, &[0]).unwrap();
            prop_assert!(max_abs_diff(a.matrix(), rho_a.matrix()) <= 1e-12);
        }
    }

    #[test]
    fn werner_family_is_closed_under_derived_maps(d in 2usize..5, k in 1usize..8, psi in -1.0f64..=1.0) {
        let w = werner(d, psi);
        let t = tilde_state(&w, k).unwrap();
        let h = hat_state(&w, k).unwrap();
        prop_assert!(max_abs_diff(t.matrix(), werner(d, werner_tilde_map(d, k, psi)).matrix()) <= 1e-12);
        prop_assert!(max_abs_diff(h.matrix(), werner(d, werner_hat_map(d, k, psi)).matrix()) <= 1e-12);
    }

    #[test]
    fn generalized_hat_reduces_to_hat(seed in any::<u64>(), d in 2usize..4, k in 1usize..4) {
        let rho = random_density(layout(&[2, d]), &mut seeded(seed));
        let g = generalized_hat(&rho, k).unwrap();
        prop_assert!(max_abs_diff(g.matrix(), hat_state(&rho, k).unwrap().matrix()) <= 1e-12);
    }

    #[test]
    fn generalized_hat_is_a_state(seed in any::<u64>(), k in 2usize..5) {
        let rho = random_symmetric_supported(2, 2, 2, &mut seeded(seed)).unwrap();
        let g = generalized_hat(&rho, k).unwrap();
        prop_assert!(min_eigenvalue(g.matrix()).unwrap() >= -1e-9);
        prop_assert!((trace(g.matrix()) - c(1.0, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn state_files_round_trip_bit_for_bit(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let rho = random_density(layout(&[da, db]), &mut seeded(seed));
        let back = read_state(&write_state(&rho), Tolerances::default()).unwrap();
        prop_assert_eq!(back, rho);
    }

    #[test]
    fn projections_are_idempotent(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = seeded(seed);
        let n = 2 * 2usize.pow(k as u32);
        let g = ginibre(n, n, &mut rng);
        let h = (&g + g.adjoint()) * c(0.5, 0.0);
        let target = random_density(layout(&[2, 2]), &mut rng);
        let ext = SystemLayout::extension(2, 2, k).unwrap();

        let p = project_psd(&h).unwrap();
        prop_assert!(max_abs_diff(&project_psd(&p).unwrap(), &p) <= 1e-12);
        let s = project_permutation_invariant(&h, &ext).unwrap();
        prop_assert!(max_abs_diff(&project_permutation_invariant(&s, &ext).unwrap(), &s) <= 1e-12);
        let m = project_marginal_affine(&h, &target).unwrap();
        prop_assert!(max_abs_diff(&project_marginal_affine(&m, &target).unwrap(), &m) <= 1e-12);
    }
}

#[test]
fn symmetric_projectors() {
    for d in [2, 3] {
        for r in [1, 2, 3] {
            let p = symmetric_projector(d, r).unwrap();
            assert!(max_abs_diff(&(&p * &p), &p) <= 1e-12);
            assert!(max_abs_diff(&p.adjoint(), &p) == 0.0);
            let want = binomial((d + r - 1) as u64, r as u64) as f64;
            assert!((trace(&p).re - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn werner_ppt_iff_psi_nonnegative() {
    for d in [2, 3, 4] {
        for i in 0..=200 {
            let psi = (i as f64 - 100.0) / 100.0;
            let ppt = !ppt_test(&werner(d, psi), 1).unwrap().is_violated();
            assert_eq!(ppt, psi >= 0.0, "d={d} psi={psi}");
        }
    }
}

#[test]
fn criterion_thresholds_map_to_zero() {
    for d in 2..6 {
        for k in 1..8 {
            let t = werner_paper_kext_threshold(d, k);
            assert!(werner_tilde_map(d, k, t).abs() <= 1e-12);
            assert!(werner_hat_map(d, k, -1.0 / k as f64).abs() <= 1e-12);
        }
    }
}

#[test]
fn werner_concurrence_on_grid() {
    for i in 0..=200 {
        let psi = (i as f64 - 100.0) / 100.0;
        let got = wootters_concurrence(&werner(2, psi)).unwrap();
        assert!((got - (-psi).max(0.0)).abs() <= 1e-9, "psi={psi}");
    }
}

#[test]
fn violation_is_monotone_in_k() {
    let mut states: Vec<DensityMatrix> = Vec::new();
    for d in [2, 3] {
        for i in 0..=40 {
            states.push(werner(d, -1.0 + i as f64 / 20.0));
        }
    }
    let n = 10;
    for i in 0..=n {
        for j in 0..=n - i {
            for l in 0..=n - i - j {
                let p = [i, j, l, n - i - j - l].map(|x| x as f64 / n as f64);
                states.push(bell_state(&BellDiagonalParams::new(p).unwrap()));
            }
        }
    }
    for rho in &states {
        let mut violated = false;
        for k in 1..=12 {
            let now = ppt_test(&tilde_state(rho, k).unwrap(), 1).unwrap().is_violated();
            assert!(!violated || now, "violation lost at k={k}");
            violated = now;
        }
    }
}

#[test]
fn bosonic_verdict_matches_polytope_on_grid() {
    let n = 20;
    for i in 0..=n {
        for j in 0..=n - i {
            for l in 0..=n - i - j {
                let p = [i, j, l, n - i - j - l].map(|x| x as f64 / n as f64);
                let params = BellDiagonalParams::new(p).unwrap();
                let problem = ExtensionProblem::bosonic(bell_state(&params), 2).unwrap();
                let v = qmarginal::criteria::bosonic_extension_verdict(&problem).unwrap();
                let max_p = p.iter().cloned().fold(0.0, f64::max);
                if (max_p - 0.75).abs() > 1e-9 {
                    assert_eq!(v.is_violated(), !bell_paper_condition(&params), "{p:?}");
                }
            }
        }
    }
}

#[test]
fn two_qubit_symmetric_k2_uses_the_hat_state() {
    let rho = bell_state(&BellDiagonalParams::new([0.8, 0.2, 0.0, 0.0]).unwrap());
    let v = symmetric_extension_verdict(&ExtensionProblem::symmetric(rho, 2).unwrap()).unwrap();
    assert_eq!(v.criterion, "hat-ppt");
    assert!(v.is_violated());
    let eigs = hermitian_eigs(&partial_transpose_matrix(
        hat_state(&bell_state(&BellDiagonalParams::new([0.8, 0.2, 0.0, 0.0]).unwrap()), 2)
            .unwrap()
            .matrix(),
        &[2, 2],
        1,
    )
    .unwrap())
    .unwrap();
    // hat weights q_i = 1/8 + p_i/2; PT eigenvalues are 1/2 - q_i
    assert!((eigs[0] - (0.5 - (0.125 + 0.4))).abs() <= 1e-12);
}
