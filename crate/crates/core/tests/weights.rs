mod common;

use proptest::prelude::*;
use rand::Rng;
use sparsetrial_core::nalgebra::DMatrix;
use sparsetrial_core::weights::{solve_admm, AdmmConfig, WeightProblem};
use sparsetrial_core::SymMatrix;

struct Case {
    p: Vec<f64>,
    mats: Vec<SymMatrix>,
    alpha: f64,
}

fn random_case(seed: u64, k: usize, alpha: f64) -> Case {
    let mut rng = common::rng(seed);
    let mats = (0..k).map(|_| common::random_spd(&mut rng, 3)).collect();
    let p = (0..k)
        .map(|_| 10f64.powf(rng.random_range(-1.0..1.0)))
        .collect();
    Case { p, mats, alpha }
}

fn problem(c: &Case) -> WeightProblem {
    let refs: Vec<&SymMatrix> = c.mats.iter().collect();
    WeightProblem::from_matrices(&c.p, &refs, c.alpha).unwrap()
}

fn raw(c: &Case) -> Vec<DMatrix<f64>> {
    c.mats.iter().map(|m| m.as_matrix().clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_grid_oracle(seed in any::<u64>(), k in 1usize..=4, a in 0usize..3) {
        let alpha = [0.0, 1.0, 10.2][a];
        let case = random_case(seed, k, alpha);
        let sol = solve_admm(&problem(&case), &AdmmConfig::default()).unwrap();
        let g = common::gram(&raw(&case));
        let (best, _) = common::grid_oracle(&case.p, &g, alpha, 1e-3);
        let got = common::weight_objective(&case.p, &g, alpha, sol.w.as_slice());
        prop_assert!(got <= best + 1e-4 * (1.0 + best.abs()), "admm {got} oracle {best}");
        prop_assert!((sol.w.sum() - 1.0).abs() <= 1e-8);
        prop_assert!(sol.w.min() >= -1e-8);
        if sol.converged {
            prop_assert!(sol.primal_residual <= AdmmConfig::default().tol_primal);
        }
    }

    #[test]
    fn common_residue_scale_cancels(seed in any::<u64>(), k in 2usize..=5, scale in 1e-3f64..1e3) {
        let case = random_case(seed, k, 10.2);
        let scaled = Case { p: case.p.iter().map(|p| p * scale).collect(), mats: case.mats.clone(), alpha: case.alpha };
        let cfg = AdmmConfig::default();
        let a = solve_admm(&problem(&case), &cfg).unwrap();
        let b = solve_admm(&problem(&scaled), &cfg).unwrap();
        prop_assert!((a.w - b.w).amax() <= 1e-8);
    }

    #[test]
    fn high_residue_trial_is_dropped(seed in any::<u64>(), k in 2usize..=6, r in 100f64..1000.0) {
        let mut case = random_case(seed, k, 10.2);
        case.p = vec![1.0; k];
        case.p[k - 1] = r;
        let sol = solve_admm(&problem(&case), &AdmmConfig::default()).unwrap();
        prop_assert!(sol.w[k - 1] < 1e-3, "{}", sol.w);
    }

    #[test]
    fn zero_alpha_is_uniform(seed in any::<u64>(), k in 1usize..=8) {
        let case = random_case(seed, k, 0.0);
        let sol = solve_admm(&problem(&case), &AdmmConfig::default()).unwrap();
        for w in sol.w.iter() {
            prop_assert!((w - 1.0 / k as f64).abs() <= 1e-6);
        }
    }
}

#[test]
fn constant_quadratic_picks_smallest_residue() {
    let case = Case {
        p: vec![1.0, 2.0, 100.0],
        mats: vec![SymMatrix::identity(2); 3],
        alpha: 10.2,
    };
    let sol = solve_admm(&problem(&case), &AdmmConfig::default()).unwrap();
    let g = common::gram(&raw(&case));
    let (_, w) = common::grid_oracle(&case.p, &g, 10.2, 1e-3);
    for (a, b) in sol.w.iter().zip(&w) {
        assert!((a - b).abs() <= 1e-3, "{} vs {w:?}", sol.w);
    }
}
