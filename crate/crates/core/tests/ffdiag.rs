mod common;

use proptest::prelude::*;
use sparsetrial_core::nalgebra::{DMatrix, DVector};
use sparsetrial_core::synth::{random_mixing, synth_mixture, MixingModel};
use sparsetrial_core::{
    ffdiag, ica, separate_sources, CovarianceSet, FfdiagConfig, SymMatrix, Trial, TrialSet,
};

/// `{A Λ_k Aᵀ}` with positive diagonals drawn log-uniformly, so ratios differ.
fn diagonalizable(
    seed: u64,
    m: usize,
    count: usize,
    cond: f64,
) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    use rand::Rng;
    let mut rng = common::rng(seed);
    let a = common::mixing_with_condition(&mut rng, m, cond);
    let mats = (0..count)
        .map(|_| {
            let d = DVector::from_fn(m, |_, _| 10f64.powf(rng.random_range(-1.0..1.0)));
            &a * DMatrix::from_diagonal(&d) * a.transpose()
        })
        .collect();
    (a, mats)
}

fn lag0_set(mats: &[DMatrix<f64>]) -> CovarianceSet {
    CovarianceSet::from_lag0(
        mats.iter()
            .map(|m| SymMatrix::symmetrize(m.clone()))
            .collect(),
    )
    .unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn structural_invariants(seed in any::<u64>(), m in 2usize..6, count in 1usize..6) {
        let (_, mats) = diagonalizable(seed, m, count, 10.0);
        let cfg = FfdiagConfig::default();
        let r = ffdiag(&lag0_set(&mats), &cfg).unwrap();
        for row in r.demixing.row_iter() {
            prop_assert!((row.norm() - 1.0).abs() < 1e-10);
        }
        prop_assert!(r.iterations <= cfg.max_iters);
        prop_assert_eq!(r.cost_trace.len(), r.iterations);
        let at_v = common::joint_cost(&r.demixing, &mats);
        let at_identity = common::joint_cost(&DMatrix::identity(m, m), &mats);
        prop_assert!(at_v <= at_identity * (1.0 + 1e-12));
        for (k, c) in mats.iter().enumerate() {
            let q = &r.demixing * c * r.demixing.transpose();
            let p = common::off_diag_sq(&q).sqrt();
            prop_assert!((r.quality[k] - p).abs() <= 1e-12 * (1.0 + p.max(q.norm())));
        }
    }

    #[test]
    fn exact_recovery(seed in any::<u64>(), m in 2usize..6) {
        let (a, mats) = diagonalizable(seed, m, 5, 10.0);
        let r = ffdiag(&lag0_set(&mats), &FfdiagConfig::default()).unwrap();
        let initial = common::joint_cost(&DMatrix::identity(m, m), &mats);
        prop_assert!(common::joint_cost(&r.demixing, &mats) <= 1e-8 * initial);
        prop_assert!(common::amari(&r.demixing, &a) < 0.05);
    }
}

#[test]
fn fixed_two_by_two_mixing_is_undone() {
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.3, 1.0]);
    let mats = vec![
        &a * DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])) * a.transpose(),
        &a * DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])) * a.transpose(),
    ];
    let r = ffdiag(&lag0_set(&mats), &FfdiagConfig::default()).unwrap();
    assert!(r.final_cost() <= 1e-10);
    let p = &r.demixing * &a;
    // generalized permutation: one dominant entry per row
    for row in p.row_iter() {
        let mut v: Vec<f64> = row.iter().map(|x| x.abs()).collect();
        v.sort_by(f64::total_cmp);
        assert!(v[0] <= 1e-4 * v[1], "{p}");
    }
}

#[test]
fn generic_pair_keeps_positive_cost() {
    let mut rng = common::rng(11);
    let mats: Vec<DMatrix<f64>> = (0..2)
        .map(|_| common::random_spd(&mut rng, 4).into_inner())
        .collect();
    let r = ffdiag(&lag0_set(&mats), &FfdiagConfig::default()).unwrap();
    assert!(r.converged);
    let cost = common::joint_cost(&r.demixing, &mats);
    assert!(cost > 0.0);
    assert!((cost - r.final_cost()).abs() <= 1e-10 * cost.max(1.0));
    assert!(r.quality.iter().all(|&p| p > 0.0));
}

#[test]
fn known_inverse_diagonalizes_sources() {
    use rand::Rng;
    let mut rng = common::rng(5);
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.3, 1.0]);
    let n = 4000;
    let trials: Vec<Trial> = (0..4)
        .map(|k| {
            // two independent sources with exactly zero sample cross-covariance
            let s0: Vec<f64> = (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let s1: Vec<f64> = (0..n)
                .map(|t| if (t / 2) % 2 == 0 { s0[t] } else { -s0[t] })
                .collect();
            let s = DMatrix::from_fn(2, n, |i, t| if i == 0 { s0[t] } else { s1[t] });
            Trial::new(&a * s, k % 2)
        })
        .collect();
    let set = TrialSet::new(trials, 250.0, vec![0, 1], vec![0; 4], None).unwrap();
    let out = separate_sources(&a.try_inverse().unwrap(), &set).unwrap();
    for t in out.trials() {
        let c = common::brute_lagged_cov(&t.data, 0);
        assert!(common::off_diag_sq(&c).sqrt() < 1e-6, "{c}");
    }
}

#[test]
fn clean_identity_mixture_is_left_alone() {
    let model = MixingModel::motor_imagery(DMatrix::identity(4, 4), 2);
    let syn = synth_mixture(&model, &[0, 1], 20, 500, 3).unwrap();
    let (r, _) = ica(&syn.mixtures, &[0, 1], &FfdiagConfig::default()).unwrap();
    assert!(common::amari(&r.demixing, &DMatrix::identity(4, 4)) < 0.05);
}

#[test]
fn contaminated_trials_have_larger_residues() {
    for seed in 0..5 {
        let model = MixingModel::motor_imagery(random_mixing(8, 10.0, 100 + seed), 2)
            .with_contamination(0.25, 20.0);
        let syn = synth_mixture(&model, &[0, 1], 20, 500, seed).unwrap();
        let (r, _) = ica(&syn.mixtures, &[0, 1], &FfdiagConfig::default()).unwrap();
        let flags = syn.mixtures.contaminated().unwrap();
        let pick = |want: bool| {
            (0..flags.len())
                .filter(|&k| flags[k] == want)
                .map(|k| r.quality[k])
                .collect()
        };
        assert!(median(pick(true)) > median(pick(false)), "seed {seed}");
    }
}
