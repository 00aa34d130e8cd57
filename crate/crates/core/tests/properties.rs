mod common;

use common::*;
use deltak::clifford::{self, LowTarget};
use deltak::gap::{self, CheckMode, OperatorElement};
use deltak::homotopy;
use deltak::localizer;
use deltak::{linalg, models, CMatrix, TolerancePolicy};
use proptest::prelude::*;

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn tol(m: &CMatrix) -> f64 {
    pol().threshold(m.rows(), linalg::operator_norm(m).max(1.0)) * 10.0
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eigenvalues_sorted_and_unitarily_invariant(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let h = hermitian(&mut r, n);
        let u = random_unitary(&mut r, n);
        let a = linalg::eig_hermitian(&h, &pol()).unwrap();
        prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
        let conj = (&(&u * &h) * &u.adjoint()).hermitian_part();
        let b = linalg::eig_hermitian(&conj, &pol()).unwrap();
        prop_assert!(max_diff(&a, &b) <= tol(&h));
    }

    #[test]
    fn inertia_counts_and_negation(seed in any::<u64>(), n in 1usize..7) {
        let h = hermitian(&mut rng(seed), n);
        let (i, sig) = linalg::inertia_signature(&h, &pol(), false).unwrap();
        prop_assert_eq!(i.n_plus + i.n_zero + i.n_minus, n);
        let (_, neg) = linalg::inertia_signature(&h.scale(-1.0), &pol(), false).unwrap();
        prop_assert_eq!(sig, -neg);
    }

    #[test]
    fn direct_sum_norm_and_spectrum(seed in any::<u64>(), n in 1usize..5, k in 1usize..5) {
        let mut r = rng(seed);
        let (a, b) = (hermitian(&mut r, n), hermitian(&mut r, k));
        let s = linalg::direct_sum(&a, &b);
        let ns = linalg::operator_norm(&s);
        prop_assert!((ns - linalg::operator_norm(&a).max(linalg::operator_norm(&b))).abs() <= tol(&s));
        let mut union = linalg::eig_hermitian(&a, &pol()).unwrap();
        union.extend(linalg::eig_hermitian(&b, &pol()).unwrap());
        prop_assert!(max_diff(&linalg::eig_hermitian(&s, &pol()).unwrap(), &sorted(union)) <= tol(&s));
    }

    #[test]
    fn similarity_reflexive_and_symmetric(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let a = gaussian(&mut r, n);
        prop_assert!(linalg::verify_similarity(&a, &a, &CMatrix::identity(n), &pol()).unwrap());
        let p = &gaussian(&mut r, n) + &CMatrix::identity(n).scale(4.0);
        let pinv = linalg::inverse(&p, &pol()).unwrap();
        let b = &(&p * &a) * &pinv;
        let loose = TolerancePolicy::new(1e4).unwrap();
        prop_assert!(linalg::verify_similarity(&a, &b, &p, &loose).unwrap());
        prop_assert!(linalg::verify_similarity(&b, &a, &pinv, &loose).unwrap());
    }

    #[test]
    fn sigma_symmetric(seed in any::<u64>(), n in 1usize..7) {
        let x = OperatorElement::single(gaussian(&mut rng(seed), n)).unwrap();
        let s = gap::sigma_spectrum(&x, &pol()).unwrap();
        let neg: Vec<f64> = s.iter().rev().map(|l| -l).collect();
        prop_assert!(max_diff(&s, &neg) <= tol(&x.matrix));
    }

    #[test]
    fn self_adjoint_modes_agree(seed in any::<u64>(), n in 1usize..6, frac in 0.05f64..1.5) {
        let x = OperatorElement::single(hermitian(&mut rng(seed), n)).unwrap();
        let dmax = gap::max_delta(&x, &pol()).unwrap();
        let delta = frac * dmax.min(5.0);
        let tau = tol(&x.matrix);
        prop_assume!((delta - dmax).abs() > 10.0 * tau && delta > 10.0 * tau);
        let verdicts: Vec<bool> = [(CheckMode::Spectrum, 0), (CheckMode::Grid, 9), (CheckMode::SelfAdjoint, 0)]
            .into_iter()
            .map(|(m, g)| gap::delta_singular_check(&x, delta, m, g, &pol()).unwrap().verdict)
            .collect();
        prop_assert!(verdicts.iter().all(|&v| v == verdicts[0]), "{:?}", verdicts);
    }

    #[test]
    fn gapped_s_gap_bound(seed in 0u64..1000, d in 1usize..5, delta in 0.05f64..0.95, frac in 0.01f64..0.99) {
        let x = models::random_gapped(d, 1, delta, seed % 2 == 0, seed).unwrap();
        let s = frac * delta;
        let g = gap::s_gap(&x, s, &pol()).unwrap();
        prop_assert!(g >= s.min(delta - s) - tol(&x.matrix));
    }

    #[test]
    fn self_adjoint_bordered_spectrum(seed in any::<u64>(), n in 1usize..6, s in 0.0f64..2.0) {
        let x = OperatorElement::single(hermitian(&mut rng(seed), n)).unwrap();
        let lam = linalg::eig_hermitian(&x.matrix, &pol()).unwrap();
        let expect: Vec<f64> = lam.iter().flat_map(|l| [s + l, s - l]).collect();
        let got = linalg::eig_hermitian(&gap::bordered(&x, s).unwrap(), &pol()).unwrap();
        prop_assert!(max_diff(&got, &sorted(expect)) <= tol(&x.matrix) * 4.0);
    }

    #[test]
    fn verdict_unitarily_invariant(seed in any::<u64>(), n in 1usize..6, delta in 0.0f64..2.0) {
        let mut r = rng(seed);
        let x = OperatorElement::single(gaussian(&mut r, n)).unwrap();
        let dmax = gap::max_delta(&x, &pol()).unwrap();
        prop_assume!((delta - dmax).abs() > 1e-6);
        let (u, v) = (random_unitary(&mut r, n), random_unitary(&mut r, n));
        let y = x.with_matrix(&(&u * &x.matrix) * &v).unwrap();
        let a = gap::delta_singular_check(&x, delta, CheckMode::Spectrum, 0, &pol()).unwrap();
        let b = gap::delta_singular_check(&y, delta, CheckMode::Spectrum, 0, &pol()).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn graded_parts_are_projections(seed in any::<u64>(), p in 1usize..6, k in 1usize..3) {
        let rep = clifford::clifford_rep(p).unwrap();
        let a = gaussian(&mut rng(seed), rep.rep_dim * k);
        let e = clifford::graded_part(&a, &rep, 0).unwrap();
        let o = clifford::graded_part(&a, &rep, 1).unwrap();
        prop_assert!((&(&e + &o) - &a).max_abs() < 1e-12);
        prop_assert!((&clifford::graded_part(&e, &rep, 0).unwrap() - &e).max_abs() < 1e-12);
        prop_assert!(clifford::graded_part(&e, &rep, 1).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn embedding_preserves_gap(seed in 0u64..1000, d in 1usize..5, delta in 0.05f64..0.95) {
        let x = models::random_gapped(d, 1, delta, true, seed).unwrap();
        let dx = gap::max_delta(&x, &pol()).unwrap();
        for target in [LowTarget::V0, LowTarget::V1] {
            let y = clifford::embed_low(&x, target).unwrap();
            prop_assert!((gap::max_delta(&y, &pol()).unwrap() - dx).abs() <= tol(&x.matrix));
        }
    }

    #[test]
    fn stabilize_associative(seed in 0u64..1000, d in 1usize..4, m in 1usize..3, k in 0usize..3) {
        let x = models::random_gapped(d, 1, 0.4, false, seed).unwrap();
        let a = homotopy::stabilize(&homotopy::stabilize(&x, 1 + m).unwrap(), 1 + m + k).unwrap();
        prop_assert_eq!(a, homotopy::stabilize(&x, 1 + m + k).unwrap());
    }

    #[test]
    fn direct_sum_commutes_up_to_swap(seed in 0u64..1000, d in 1usize..4) {
        let x = models::random_gapped(d, 1, 0.4, false, seed).unwrap();
        let y = models::random_gapped(d, 1, 0.4, false, seed + 1).unwrap();
        let xy = homotopy::direct_sum_class(&x, &y).unwrap();
        let yx = homotopy::direct_sum_class(&y, &x).unwrap();
        let perm: Vec<usize> = (0..2 * d).map(|i| (i + d) % (2 * d)).collect();
        let p = linalg::signed_permutation(&perm, &vec![1.0; 2 * d]).unwrap();
        prop_assert!(linalg::verify_similarity(&xy.matrix, &yx.matrix, &p, &pol()).unwrap());
    }

    #[test]
    fn random_gapped_is_deterministic(seed in any::<u64>(), d in 1usize..5, n in 1usize..3, sa in any::<bool>()) {
        let a = models::random_gapped(d, n, 0.3, sa, seed).unwrap();
        prop_assert_eq!(&a, &models::random_gapped(d, n, 0.3, sa, seed).unwrap());
        prop_assert!(gap::delta_singular_check(&a, 0.3, CheckMode::Spectrum, 0, &pol()).unwrap().verdict);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn circle_symmetries(n in 1usize..6, m in -5i64..=5) {
        prop_assume!(m.unsigned_abs() as usize <= n);
        let t = models::circle_dirac(n).unwrap();
        let x = models::circle_unitary_truncation(m, n).unwrap();
        let y = models::circle_unitary_truncation(-m, n).unwrap();
        prop_assert_eq!(&y.matrix, &x.matrix.adjoint());
        let c = localizer::commutator_norm(&t, &x).unwrap();
        prop_assert!((c - m.unsigned_abs() as f64).abs() < 1e-12);
    }

    #[test]
    fn circle_index_negates(n in 3usize..7, m in 1i64..=2) {
        let t = models::circle_dirac(n).unwrap();
        let plus = models::circle_unitary_truncation(m, n).unwrap();
        let minus = models::circle_unitary_truncation(-m, n).unwrap();
        let a = localizer::index(&t, &plus, 0.5, None, &pol()).unwrap().index;
        let b = localizer::index(&t, &minus, 0.5, None, &pol()).unwrap().index;
        prop_assert_eq!((a, b), (m, -m));
    }

    #[test]
    fn gap_bound_holds_on_random_grids(seed in 0u64..1000, d in 1usize..5) {
        let mut r = rng(seed);
        let x = models::random_gapped(d, 1, 0.4, seed % 2 == 1, seed).unwrap();
        let t = localizer::SpectralTriple::odd(random_diagonal(&mut r, d, 2.0), &pol()).unwrap();
        let region = localizer::valid_region(&t, &x, 0.4, &pol()).unwrap();
        for (kappa, s) in region.grid(5) {
            let c = localizer::gap_bound_check(&t, &x, kappa, s, Some(0.4), &pol()).unwrap();
            prop_assert!(c.holds, "{:?} at ({}, {})", c, kappa, s);
        }
    }
}
