//! Per-trial weights: equal, inverse-residue, and sparse weights from the
//! simplex-constrained regularized ℓ1 problem
//!
//! ```text
//! min_w  α/tr(D) · ‖D w‖₁ + ½ · (w − 1/K)ᵀ G (w − 1/K) / tr(G)
//! s.t.   1ᵀw = 1,  w ≥ 0
//! ```
//!
//! with `D = diag(p)` and `G_ij = tr(Q_i Q_jᵀ)`, solved by ADMM splitting the
//! affine constraint (kept in the `w` step through a multiplier ξ) from the
//! nonnegativity constraint (handled by projection in the `v` step).

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::ffdiag::DiagResult;
use crate::linalg::{sym_eigen_desc, SymMatrix};

/// Quality vector, Gram matrix and regularization weight of one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProblem {
    p: DVector<f64>,
    gram: DMatrix<f64>,
    alpha: f64,
}

impl WeightProblem {
    /// Checks `p ≥ 0` finite with positive sum, and `G` symmetric PSD with positive trace.
    pub fn new(p: DVector<f64>, gram: DMatrix<f64>, alpha: f64) -> Result<Self> {
        let k = p.len();
        if k == 0 {
            return Err(Error::InvalidArgument(
                "weight problem needs at least one trial".into(),
            ));
        }
        if gram.nrows() != k || gram.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: gram.nrows(),
                what: "Gram matrix",
            });
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(
                "alpha must be finite and >= 0".into(),
            ));
        }
        if p.iter().any(|v| !v.is_finite()) || gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "weight problem",
            });
        }
        if p.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("quality values must be >= 0".into()));
        }
        if !(p.sum() > 0.0) {
            return Err(Error::DegenerateQuality);
        }
        let trace = gram.trace();
        if !(trace > 0.0) {
            return Err(Error::InvalidArgument("Gram matrix has zero trace".into()));
        }
        let scale = gram.amax();
        for i in 0..k {
            for j in (i + 1)..k {
                if (gram[(i, j)] - gram[(j, i)]).abs() > 1e-8 * scale {
                    return Err(Error::InvalidArgument(
                        "Gram matrix is not symmetric".into(),
                    ));
                }
            }
        }
        let (eigs, _) = sym_eigen_desc(&gram);
        if eigs.last().copied().unwrap_or(0.0) < -1e-8 * trace {
            return Err(Error::NotPositiveDefinite {
                what: "Gram matrix",
            });
        }
        Ok(WeightProblem { p, gram, alpha })
    }

    /// Builds the problem from per-trial quality values and the matrices whose
    /// trace inner products form `G`.
    pub fn from_matrices(p: &[f64], mats: &[&SymMatrix], alpha: f64) -> Result<Self> {
        if p.len() != mats.len() {
            return Err(Error::DimensionMismatch {
                expected: p.len(),
                found: mats.len(),
                what: "matrices",
            });
        }
        let k = mats.len();
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                // tr(A Bᵀ) is the Frobenius inner product
                let g = mats[i].as_matrix().dot(mats[j].as_matrix());
                gram[(i, j)] = g;
                gram[(j, i)] = g;
            }
        }
        Self::new(DVector::from_column_slice(p), gram, alpha)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn quality(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Objective value at `w` (the ℓ1 term uses |w_k|).
    pub fn objective(&self, w: &DVector<f64>) -> f64 {
        let k = self.len() as f64;
        let l1: f64 = self.p.iter().zip(w.iter()).map(|(p, w)| p * w.abs()).sum();
        let d = w.map(|v| v - 1.0 / k);
        let quad = d.dot(&(&self.gram * &d));
        self.alpha / self.p.sum() * l1 + 0.5 * quad / self.gram.trace()
    }
}

/// Problem for the trials `trial_indices` of a diagonalization result, using
/// their residues and transformed lag-0 matrices.
pub fn build_problem(
    diag: &DiagResult,
    trial_indices: &[usize],
    alpha: f64,
) -> Result<WeightProblem> {
    if trial_indices.is_empty() {
        return Err(Error::InvalidArgument("empty trial subset".into()));
    }
    let p: Vec<f64> = trial_indices.iter().map(|&k| diag.quality[k]).collect();
    let mats: Vec<&SymMatrix> = trial_indices.iter().map(|&k| diag.lag0(k)).collect();
    WeightProblem::from_matrices(&p, &mats, alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub rho: f64,
    pub max_iters: usize,
    pub tol_primal: f64,
    pub tol_dual: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: 1.0,
            max_iters: 5000,
            tol_primal: 1e-8,
            tol_dual: 1e-8,
        }
    }
}

impl AdmmConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !(self.tol_primal > 0.0) || !(self.tol_dual > 0.0) {
            return Err(Error::InvalidArgument(
                "ADMM needs rho > 0 and positive tolerances".into(),
            ));
        }
        Ok(())
    }
}

/// ADMM iterate: primal `w`, projected copy `v`, scaled dual `y`, and the
/// multiplier ξ of the affine constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub w: DVector<f64>,
    pub v: DVector<f64>,
    pub y: DVector<f64>,
    pub xi: f64,
}

impl AdmmState {
    /// `w = v = 1/K`, `y = 0`.
    pub fn initial(k: usize) -> Self {
        let uniform = DVector::from_element(k, 1.0 / k as f64);
        AdmmState {
            w: uniform.clone(),
            v: uniform,
            y: DVector::zeros(k),
            xi: 0.0,
        }
    }
}

/// Factorized `w`-step system `(ρ G/tr(G) + I)` with its constant right-hand side.
#[derive(Debug, Clone)]
pub struct WStep {
    factor: Cholesky<f64, Dyn>,
    /// `ρ (G 1 / (K tr G) − α/tr(D) · D 1)`
    offset: DVector<f64>,
    /// `M⁻¹ 1`
    ones_solved: DVector<f64>,
    rho: f64,
}

impl WStep {
    pub fn new(problem: &WeightProblem, rho: f64) -> Result<Self> {
        let k = problem.len();
        let tr_g = problem.gram.trace();
        let mut system = &problem.gram * (rho / tr_g);
        for i in 0..k {
            system[(i, i)] += 1.0;
        }
        let factor = Cholesky::new(system).ok_or(Error::NotPositiveDefinite {
            what: "w-step system",
        })?;
        let ones = DVector::from_element(k, 1.0);
        let pull = &problem.gram * &ones / (k as f64 * tr_g);
        let push = &problem.p * (problem.alpha / problem.p.sum());
        let offset = (pull - push) * rho;
        let ones_solved = factor.solve(&ones);
        Ok(WStep {
            factor,
            offset,
            ones_solved,
            rho,
        })
    }

    /// Solves the stationarity condition for `w` with `1ᵀw = 1`, given the
    /// previous `v` and `y`. Returns `(w, ξ)`.
    pub fn solve(&self, v: &DVector<f64>, y: &DVector<f64>) -> (DVector<f64>, f64) {
        let rhs = v - y + &self.offset;
        let base = self.factor.solve(&rhs);
        let xi = (base.sum() - 1.0) / (self.rho * self.ones_solved.sum());
        let w = base - &self.ones_solved * (self.rho * xi);
        (w, xi)
    }
}

/// One `w` update from `state`, factorizing the system on the fly.
pub fn admm_w_step(
    state: &AdmmState,
    problem: &WeightProblem,
    cfg: &AdmmConfig,
) -> Result<(DVector<f64>, f64)> {
    cfg.validate()?;
    Ok(WStep::new(problem, cfg.rho)?.solve(&state.v, &state.y))
}

/// Projection of `w + y` onto the nonnegative orthant.
pub fn admm_v_step(w_next: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    (w_next + y).map(|v| v.max(0.0))
}

/// Scaled dual ascent `y + w − v`.
pub fn admm_y_step(y: &DVector<f64>, w_next: &DVector<f64>, v_next: &DVector<f64>) -> DVector<f64> {
    y + w_next - v_next
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSolution {
    /// Feasible weights: the final `v` rescaled to sum to one.
    pub w: DVector<f64>,
    /// Last raw iterate.
    pub state: AdmmState,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
    pub converged: bool,
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(x: &DVector<f64>) -> DVector<f64> {
    let mut sorted: Vec<f64> = x.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    x.map(|v| (v - theta).max(0.0))
}

/// Runs ADMM from [`AdmmState::initial`] until both residuals
/// `‖w − v‖₂` and `ρ‖v_{n+1} − v_n‖₂` fall below their tolerances.
///
/// Hitting `max_iters` is reported through `converged = false`, not an error.
pub fn solve_admm(problem: &WeightProblem, cfg: &AdmmConfig) -> Result<WeightSolution> {
    cfg.validate()?;
    let k = problem.len();
    let step = WStep::new(problem, cfg.rho)?;
    let mut state = AdmmState::initial(k);
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iters {
        let (w, xi) = step.solve(&state.v, &state.y);
        let v = admm_v_step(&w, &state.y);
        let y = admm_y_step(&state.y, &w, &v);
        primal = (&w - &v).norm();
        dual = cfg.rho * (&v - &state.v).norm();
        state = AdmmState { w, v, y, xi };
        iterations += 1;
        if primal < cfg.tol_primal && dual < cfg.tol_dual {
            converged = true;
            break;
        }
    }
    let total = state.v.sum();
    let w = if total > f64::EPSILON {
        &state.v / total
    } else {
        project_simplex(&state.w)
    };
    let objective = problem.objective(&w);
    Ok(WeightSolution {
        w,
        state,
        iterations,
        primal_residual: primal,
        dual_residual: dual,
        objective,
        converged,
    })
}

/// `1/K` for every trial.
pub fn equal_weights(k: usize) -> DVector<f64> {
    DVector::from_element(k, 1.0 / k as f64)
}

/// `w_k = η / p_k` with `η = 1 / Σ_j p_j⁻¹`.
pub fn quality_weights(p: &[f64]) -> Result<DVector<f64>> {
    if p.is_empty() {
        return Err(Error::InvalidArgument("empty quality vector".into()));
    }
    if let Some(k) = p.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroResidue(k));
    }
    if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "quality values must be positive and finite".into(),
        ));
    }
    let eta = 1.0 / p.iter().map(|v| 1.0 / v).sum::<f64>();
    Ok(DVector::from_iterator(p.len(), p.iter().map(|v| eta / v)))
}

/// `Σ_k w_k · mats_k`.
pub fn weighted_covariance(mats: &[&SymMatrix], w: &DVector<f64>) -> Result<SymMatrix> {
    if mats.len() != w.len() || mats.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: mats.len(),
            found: w.len(),
            what: "weights",
        });
    }
    if (w.sum() - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument("weights must sum to one".into()));
    }
    let dim = mats[0].dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for (m, &wk) in mats.iter().zip(w.iter()) {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
                what: "covariance dimension",
            });
        }
        acc += m.as_matrix() * wk;
    }
    Ok(SymMatrix::symmetrize(acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use nalgebra::{dmatrix, dvector};

    fn identity_problem(p: &[f64], alpha: f64) -> WeightProblem {
        let i2 = SymMatrix::identity(2);
        let mats: Vec<&SymMatrix> = p.iter().map(|_| &i2).collect();
        WeightProblem::from_matrices(p, &mats, alpha).unwrap()
    }

    #[test]
    fn identity_gram_is_all_twos() {
        let prob = identity_problem(&[1.0, 1.0, 1.0], 1.0);
        assert_eq!(prob.gram(), &DMatrix::from_element(3, 3, 2.0));
    }

    #[test]
    fn degenerate_quality_rejected() {
        let i2 = SymMatrix::identity(2);
        assert_eq!(
            WeightProblem::from_matrices(&[0.0, 0.0, 0.0], &[&i2, &i2, &i2], 1.0),
            Err(Error::DegenerateQuality)
        );
    }

    #[test]
    fn single_trial_problem() {
        let q = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let prob = WeightProblem::from_matrices(&[0.5], &[&q], 10.2).unwrap();
        assert_eq!(prob.gram(), &dmatrix![5.0]);
        let sol = solve_admm(&prob, &AdmmConfig::default()).unwrap();
        assert_eq!(sol.w, dvector![1.0]);
    }

    #[test]
    fn symmetric_w_step_splits_evenly() {
        let prob = WeightProblem::new(dvector![1.0, 1.0], DMatrix::identity(2, 2), 0.0).unwrap();
        let state = AdmmState {
            w: DVector::zeros(2),
            v: DVector::zeros(2),
            y: DVector::zeros(2),
            xi: 0.0,
        };
        let (w, _) = admm_w_step(&state, &prob, &AdmmConfig::default()).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn w_step_matches_dense_kkt_solve() {
        // Oracle: solve the (K+1)×(K+1) stationarity + constraint system directly.
        let prob = identity_problem(&[1.0, 2.0, 100.0], 10.2);
        let rho = 1.0;
        let k = 3;
        let state = AdmmState::initial(k);
        let state = AdmmState {
            v: DVector::zeros(k),
            y: DVector::zeros(k),
            ..state
        };
        let (w, xi) = admm_w_step(&state, &prob, &AdmmConfig::default()).unwrap();

        let g = prob.gram();
        let tr_g = g.trace();
        let a = 10.2 / 103.0;
        let mut kkt = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for i in 0..k {
            for j in 0..k {
                kkt[(i, j)] = g[(i, j)] / tr_g + if i == j { 1.0 / rho } else { 0.0 };
            }
            kkt[(i, k)] = 1.0;
            kkt[(k, i)] = 1.0;
            let g_row: f64 = (0..k).map(|j| g[(i, j)]).sum();
            rhs[i] = g_row / (k as f64 * tr_g) - a * prob.quality()[i];
        }
        rhs[k] = 1.0;
        let sol = kkt.lu().solve(&rhs).unwrap();
        for i in 0..k {
            assert!((w[i] - sol[i]).abs() < 1e-10, "{} vs {}", w[i], sol[i]);
        }
        assert!((xi - sol[k]).abs() < 1e-10);
        assert!((w.sum() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn v_and_y_steps() {
        let z = DVector::zeros(3);
        assert_eq!(
            admm_v_step(&dvector![0.2, -0.3, 0.1], &z),
            dvector![0.2, 0.0, 0.1]
        );
        assert_eq!(
            admm_v_step(&dvector![0.2, 0.3, 0.1], &z),
            dvector![0.2, 0.3, 0.1]
        );
        assert_eq!(admm_v_step(&dvector![-0.2, -0.3, -0.1], &z), z);
        let y = admm_y_step(
            &dvector![0.0, 0.0],
            &dvector![1.0, 0.0],
            &dvector![0.5, 0.5],
        );
        assert_eq!(y, dvector![0.5, -0.5]);
        let w = dvector![0.3, 0.7];
        assert_eq!(admm_y_step(&y, &w, &w), y);
    }

    #[test]
    fn zero_alpha_gives_uniform_weights() {
        let q: Vec<SymMatrix> = (0..4)
            .map(|k| SymMatrix::from_diagonal(&[1.0 + k as f64, 2.0, 0.5 * k as f64]))
            .collect();
        let refs: Vec<&SymMatrix> = q.iter().collect();
        let prob = WeightProblem::from_matrices(&[1.0, 5.0, 2.0, 9.0], &refs, 0.0).unwrap();
        let sol = solve_admm(&prob, &AdmmConfig::default()).unwrap();
        for &w in sol.w.iter() {
            assert!((w - 0.25).abs() < 1e-6);
        }
    }

    #[test]
    fn large_residue_vertex_is_dropped() {
        let sol = solve_admm(
            &identity_problem(&[1.0, 2.0, 100.0], 10.2),
            &AdmmConfig::default(),
        )
        .unwrap();
        assert!((sol.w[0] - 1.0).abs() < 1e-3, "{:?}", sol.w);
        assert!(sol.w[2] < 1e-3);
    }

    #[test]
    fn simple_weights() {
        assert_eq!(equal_weights(4), dvector![0.25, 0.25, 0.25, 0.25]);
        assert_eq!(equal_weights(1), dvector![1.0]);
        assert!((equal_weights(7).sum() - 1.0).abs() < 1e-15);
        let q = quality_weights(&[2.0, 2.0, 2.0]).unwrap();
        assert!(q.iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-15));
        let q = quality_weights(&[1.0, 3.0]).unwrap();
        assert!((q[0] - 0.75).abs() < 1e-15 && (q[1] - 0.25).abs() < 1e-15);
        assert_eq!(quality_weights(&[1.0, 0.0]), Err(Error::ZeroResidue(1)));
    }

    #[test]
    fn weighted_average() {
        let i = SymMatrix::identity(2);
        let two = SymMatrix::from_diagonal(&[2.0, 2.0]);
        let c = weighted_covariance(&[&i, &two], &dvector![0.25, 0.75]).unwrap();
        assert!((c.as_matrix() - DMatrix::identity(2, 2) * 1.75).amax() < 1e-15);
        let c = weighted_covariance(&[&i, &two], &dvector![1.0, 0.0]).unwrap();
        assert_eq!(c, i);
        assert!(weighted_covariance(&[&i], &dvector![0.5, 0.5]).is_err());
        assert_eq!(
            weighted_covariance(&[&i, &two], &equal_weights(2)).unwrap(),
            SymMatrix::from_diagonal(&[1.5, 1.5])
        );
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&dvector![0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
        assert_eq!(project_simplex(&dvector![2.0, 0.0]), dvector![1.0, 0.0]);
    }
}
