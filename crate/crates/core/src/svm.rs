//! Soft-margin binary SVM trained by sequential minimal optimization with
//! maximal-violating-pair working-set selection.

use alloc::vec;
use alloc::vec::Vec;

use crate::csp::FeatureVector;
use crate::error::{Error, Result};
use crate::Label;

/// Curvature floor for pairs with non-positive second derivative.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    /// `exp(-γ ‖x − z‖²)`
    Rbf,
    /// `xᵀz`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub kernel: Kernel,
    pub gamma: f64,
    pub c: f64,
    /// Stop once the maximal KKT violation gap is at most `tol`.
    pub tol: f64,
    /// Iteration budget in multiples of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            kernel: Kernel::Rbf,
            gamma: 1e-5,
            c: 1.0,
            tol: 1e-3,
            max_passes: 1000,
        }
    }
}

impl SvmConfig {
    pub fn kernel_value(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kernel {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                libm::exp(-self.gamma * d2)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::InvalidArgument(
                "SVM box constraint c must be positive".into(),
            ));
        }
        if self.kernel == Kernel::Rbf && !(self.gamma > 0.0) {
            return Err(Error::InvalidArgument("RBF gamma must be positive".into()));
        }
        if !(self.tol > 0.0) || self.max_passes == 0 {
            return Err(Error::InvalidArgument(
                "SVM tolerance and max_passes must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i · y_i` for each support vector.
    pub dual_coeffs: Vec<f64>,
    pub bias: f64,
    pub config: SvmConfig,
    /// Label predicted for negative decision values.
    pub negative_label: Label,
    /// Label predicted for non-negative decision values.
    pub positive_label: Label,
    pub iterations: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map(Vec::len).unwrap_or(0)
    }

    pub fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(sv, a)| a * self.config.kernel_value(sv, x))
            .sum::<f64>()
            + self.bias
    }
}

/// Trains on exactly two classes; the smaller label maps to `y = −1`.
pub fn svm_train(features: &[FeatureVector], cfg: &SvmConfig) -> Result<SvmModel> {
    cfg.validate()?;
    let mut labels: Vec<Label> = features.iter().map(|f| f.label).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() != 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "SVM training needs exactly two classes, found {}",
            labels.len()
        )));
    }
    let dim = features[0].values.len();
    for f in features {
        if f.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: f.values.len(),
                what: "feature vector",
            });
        }
        if f.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "feature vector",
            });
        }
    }
    let (neg, pos) = (labels[0], labels[1]);
    let n = features.len();
    let y: Vec<f64> = features
        .iter()
        .map(|f| if f.label == pos { 1.0 } else { -1.0 })
        .collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = y[i] * y[j] * cfg.kernel_value(&features[i].values, &features[j].values);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }

    let c = cfg.c;
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let budget = cfg.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;
    let mut converged = false;
    while iterations < budget {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let score = -y[t] * grad[t];
            let up = if y[t] > 0.0 {
                alpha[t] < c
            } else {
                alpha[t] > 0.0
            };
            let low = if y[t] > 0.0 {
                alpha[t] > 0.0
            } else {
                alpha[t] < c
            };
            if up && score > gmax {
                gmax = score;
                i = t;
            }
            if low && score < gmin {
                gmin = score;
                j = t;
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin <= cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qii, qjj, qij) = (q[i * n + i], q[j * n + j], q[i * n + j]);
        if y[i] != y[j] {
            let mut quad = qii + qjj + 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let mut quad = qii + qjj - 2.0 * qij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q[t * n + i] * di + q[t * n + j] * dj;
        }
    }

    // offset from free variables, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_count) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            free_count += 1;
            free_sum += yg;
        }
    }
    let rho = if free_count > 0 {
        free_sum / free_count as f64
    } else if ub.is_finite() && lb.is_finite() {
        (ub + lb) / 2.0
    } else if ub.is_finite() {
        ub
    } else {
        lb
    };

    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(features[t].values.clone());
            dual_coeffs.push(alpha[t] * y[t]);
        }
    }
    Ok(SvmModel {
        support_vectors,
        dual_coeffs,
        bias: -rho,
        config: *cfg,
        negative_label: neg,
        positive_label: pos,
        iterations,
        converged,
    })
}

/// Predicted label and raw decision value.
pub fn svm_predict(model: &SvmModel, feature: &[f64]) -> Result<(Label, f64)> {
    let dim = model.dim();
    if !model.support_vectors.is_empty() && feature.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: feature.len(),
            what: "feature vector",
        });
    }
    let d = model.decision_value(feature);
    let label = if d >= 0.0 {
        model.positive_label
    } else {
        model.negative_label
    };
    Ok((label, d))
}
