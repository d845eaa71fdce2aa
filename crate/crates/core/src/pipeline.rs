//! End-to-end method variants and stratified k-fold cross-validation.
//!
//! Every model component (demixing matrix, trial weights, CSP filters, SVM)
//! is fitted on the training fold only; test trials are only transformed.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::covariance::{lagged_covariance, trial_covariance_set, CovarianceSet, DEFAULT_TAUS};
use crate::csp::{csp_features, csp_filters, CspModel};
use crate::error::{Error, Result};
use crate::ffdiag::{ffdiag, separate_sources, FfdiagConfig};
use crate::linalg::SymMatrix;
use crate::svm::{svm_predict, svm_train, SvmConfig, SvmModel};
use crate::trial::{preprocess, PreprocessConfig, TrialSet};
use crate::weights::{
    equal_weights, quality_weights, solve_admm, weighted_covariance, AdmmConfig, WeightProblem,
};
use crate::Label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodVariant {
    /// Source domain, `w_k = 1/K`.
    IcaCspEqual,
    /// Source domain, `w_k ∝ 1/p_k`.
    IcaCspQuality,
    /// Source domain, sparse ADMM weights.
    IcaCspSparse,
    /// Mixture domain, sparse ADMM weights (baseline without source separation).
    CspSparse,
}

impl MethodVariant {
    pub const ALL: [MethodVariant; 4] = [
        MethodVariant::IcaCspEqual,
        MethodVariant::IcaCspQuality,
        MethodVariant::IcaCspSparse,
        MethodVariant::CspSparse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodVariant::IcaCspEqual => "ica-csp-equal",
            MethodVariant::IcaCspQuality => "ica-csp-quality",
            MethodVariant::IcaCspSparse => "ica-csp-sparse",
            MethodVariant::CspSparse => "csp-sparse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    pub fn uses_sources(self) -> bool {
        self != MethodVariant::CspSparse
    }
}

impl core::fmt::Display for MethodVariant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub variant: MethodVariant,
    pub alpha: f64,
    pub svm: SvmConfig,
    pub folds: usize,
    /// CSP filter pairs.
    pub m: usize,
    pub taus: Vec<usize>,
    pub ffdiag: FfdiagConfig,
    pub admm: AdmmConfig,
    pub preprocess: PreprocessConfig,
    pub seed: u64,
    pub class_pair: Option<(Label, Label)>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            variant: MethodVariant::IcaCspSparse,
            alpha: 10.2,
            svm: SvmConfig::default(),
            folds: 10,
            m: 3,
            taus: DEFAULT_TAUS.to_vec(),
            ffdiag: FfdiagConfig::default(),
            admm: AdmmConfig::default(),
            preprocess: PreprocessConfig::default(),
            seed: 0,
            class_pair: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidArgument("folds must be >= 2".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(
                "alpha must be finite and >= 0".into(),
            ));
        }
        if self.m == 0 {
            return Err(Error::InvalidArgument("m must be >= 1".into()));
        }
        if !self.taus.contains(&0) {
            return Err(Error::InvalidArgument("taus must include lag 0".into()));
        }
        if let Some((a, b)) = self.class_pair {
            if a == b {
                return Err(Error::InvalidArgument(
                    "class pair needs two distinct labels".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Monotonic time source in seconds; the core has no clock of its own.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// Seconds spent per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimes {
    pub separation: f64,
    pub weighting: f64,
    pub csp: f64,
    pub svm: f64,
}

impl core::ops::AddAssign for StageTimes {
    fn add_assign(&mut self, o: StageTimes) {
        self.separation += o.separation;
        self.weighting += o.weighting;
        self.csp += o.csp;
        self.svm += o.svm;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmSummary {
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
}

/// Weights assigned to one class's training trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeights {
    pub class: Label,
    /// Trial indices into the set the weights were fitted on.
    pub trials: Vec<usize>,
    pub quality: Vec<f64>,
    pub weights: Vec<f64>,
    pub admm: Option<AdmmSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub accuracy: f64,
    /// Predicted label per test trial, in test-set order.
    pub predictions: Vec<Label>,
    pub class_weights: Vec<ClassWeights>,
    pub ffdiag_converged: bool,
    pub times: StageTimes,
}

impl FoldResult {
    /// True when the joint diagonalization and every ADMM solve converged.
    pub fn converged(&self) -> bool {
        self.ffdiag_converged
            && self
                .class_weights
                .iter()
                .all(|c| c.admm.map(|a| a.converged).unwrap_or(true))
    }
}

/// Training-side quantities shared by all pairs of classes.
struct Fitted {
    train: TrialSet,
    test: Option<TrialSet>,
    class_weights: Vec<ClassWeights>,
    class_covariances: Vec<SymMatrix>,
    ffdiag_converged: bool,
}

fn classes_for(set: &TrialSet, cfg: &PipelineConfig) -> Vec<Label> {
    match cfg.class_pair {
        Some((a, b)) => {
            let mut v = vec![a, b];
            v.sort_unstable();
            v
        }
        None => set.label_set().to_vec(),
    }
}

fn fit(
    train: &TrialSet,
    test: Option<&TrialSet>,
    classes: &[Label],
    cfg: &PipelineConfig,
    clock: &dyn Clock,
    times: &mut StageTimes,
) -> Result<Fitted> {
    for &c in classes {
        if !train.labels().any(|l| l == c) {
            return Err(Error::MissingClass(c));
        }
    }
    let t0 = clock.now();
    let mut converged = true;
    let (train_data, test_data, lag0, quality): (
        TrialSet,
        Option<TrialSet>,
        Vec<SymMatrix>,
        Option<Vec<f64>>,
    ) = if cfg.variant.uses_sources() {
        let cov = trial_covariance_set(train, &cfg.taus)?;
        let diag = ffdiag(&cov, &cfg.ffdiag)?;
        converged = diag.converged;
        let lag0 = (0..train.len()).map(|k| diag.lag0(k).clone()).collect();
        (
            separate_sources(&diag.demixing, train)?,
            test.map(|t| separate_sources(&diag.demixing, t))
                .transpose()?,
            lag0,
            Some(diag.quality),
        )
    } else {
        let lag0 = train
            .trials()
            .iter()
            .map(|t| lagged_covariance(t, 0))
            .collect::<Result<Vec<_>>>()?;
        (train.clone(), test.cloned(), lag0, None)
    };
    let t1 = clock.now();
    times.separation += t1 - t0;

    let mut class_weights = Vec::with_capacity(classes.len());
    let mut class_covariances = Vec::with_capacity(classes.len());
    for &c in classes {
        let idx = train.indices_of(c);
        let mats: Vec<&SymMatrix> = idx.iter().map(|&k| &lag0[k]).collect();
        let p: Vec<f64> = match &quality {
            Some(q) => idx.iter().map(|&k| q[k]).collect(),
            None => {
                // residues from a per-class diagonalization of the mixture covariances
                let set = CovarianceSet::from_lag0(mats.iter().map(|m| (*m).clone()).collect())?;
                let diag = ffdiag(&set, &cfg.ffdiag)?;
                converged &= diag.converged;
                diag.quality
            }
        };
        let (w, admm) = match cfg.variant {
            MethodVariant::IcaCspEqual => (equal_weights(idx.len()), None),
            MethodVariant::IcaCspQuality => (quality_weights(&p)?, None),
            MethodVariant::IcaCspSparse | MethodVariant::CspSparse => {
                let problem = WeightProblem::from_matrices(&p, &mats, cfg.alpha)?;
                let sol = solve_admm(&problem, &cfg.admm)?;
                let summary = AdmmSummary {
                    iterations: sol.iterations,
                    converged: sol.converged,
                    primal_residual: sol.primal_residual,
                    dual_residual: sol.dual_residual,
                    objective: sol.objective,
                };
                (sol.w, Some(summary))
            }
        };
        class_covariances.push(weighted_covariance(&mats, &w)?);
        class_weights.push(ClassWeights {
            class: c,
            trials: idx,
            quality: p,
            weights: w.iter().copied().collect(),
            admm,
        });
    }
    times.weighting += clock.now() - t1;
    Ok(Fitted {
        train: train_data,
        test: test_data,
        class_weights,
        class_covariances,
        ffdiag_converged: converged,
    })
}

/// One CSP + SVM model for a pair of classes `(a, b)` with `a < b`.
struct PairModel {
    csp: CspModel,
    svm: SvmModel,
}

fn train_pairs(
    fitted: &Fitted,
    classes: &[Label],
    cfg: &PipelineConfig,
    clock: &dyn Clock,
    times: &mut StageTimes,
) -> Result<Vec<PairModel>> {
    let mut models = Vec::new();
    for a in 0..classes.len() {
        for b in (a + 1)..classes.len() {
            let t0 = clock.now();
            let csp = csp_filters(
                &fitted.class_covariances[a],
                &fitted.class_covariances[b],
                cfg.m,
            )?;
            let features = fitted
                .train
                .trials()
                .iter()
                .filter(|t| t.label == classes[a] || t.label == classes[b])
                .map(|t| csp_features(&csp, t))
                .collect::<Result<Vec<_>>>()?;
            let t1 = clock.now();
            let svm = svm_train(&features, &cfg.svm)?;
            times.csp += t1 - t0;
            times.svm += clock.now() - t1;
            models.push(PairModel { csp, svm });
        }
    }
    Ok(models)
}

/// One-vs-one vote; ties go to the larger summed margin, then the smaller label.
fn predict(models: &[PairModel], classes: &[Label], trial: &crate::trial::Trial) -> Result<Label> {
    if models.len() == 1 {
        let f = csp_features(&models[0].csp, trial)?;
        return Ok(svm_predict(&models[0].svm, &f.values)?.0);
    }
    let mut votes = vec![0usize; classes.len()];
    let mut margins = vec![0.0f64; classes.len()];
    for model in models {
        let f = csp_features(&model.csp, trial)?;
        let (label, d) = svm_predict(&model.svm, &f.values)?;
        let winner = classes
            .iter()
            .position(|&c| c == label)
            .expect("pair label among classes");
        votes[winner] += 1;
        margins[winner] += d.abs();
    }
    let mut best = 0;
    for c in 1..classes.len() {
        if votes[c] > votes[best] || (votes[c] == votes[best] && margins[c] > margins[best]) {
            best = c;
        }
    }
    Ok(classes[best])
}

fn score(
    train: &TrialSet,
    test: &TrialSet,
    classes: &[Label],
    cfg: &PipelineConfig,
    clock: &dyn Clock,
) -> Result<FoldResult> {
    let mut times = StageTimes::default();
    let fitted = fit(train, Some(test), classes, cfg, clock, &mut times)?;
    let models = train_pairs(&fitted, classes, cfg, clock, &mut times)?;
    let t0 = clock.now();
    let test_data = fitted.test.as_ref().expect("test data transformed");
    let predictions = test_data
        .trials()
        .iter()
        .map(|t| predict(&models, classes, t))
        .collect::<Result<Vec<_>>>()?;
    times.svm += clock.now() - t0;
    let correct = predictions
        .iter()
        .zip(test.labels())
        .filter(|(p, l)| **p == *l)
        .count();
    Ok(FoldResult {
        accuracy: correct as f64 / test.len() as f64,
        predictions,
        class_weights: fitted.class_weights,
        ffdiag_converged: fitted.ffdiag_converged,
        times,
    })
}

fn restrict(set: &TrialSet, classes: &[Label]) -> Result<TrialSet> {
    let keep: Vec<usize> = (0..set.len())
        .filter(|&k| classes.contains(&set.trial(k).label))
        .collect();
    if keep.len() == set.len() {
        Ok(set.clone())
    } else if keep.is_empty() {
        Err(Error::InsufficientTrials {
            needed: 1,
            found: 0,
        })
    } else {
        set.subset(&keep)
    }
}

/// Preprocesses both sets, fits every stage on `train`, and returns accuracy on `test`.
pub fn run_fold(train: &TrialSet, test: &TrialSet, cfg: &PipelineConfig) -> Result<FoldResult> {
    run_fold_with_clock(train, test, cfg, &NoClock)
}

pub fn run_fold_with_clock(
    train: &TrialSet,
    test: &TrialSet,
    cfg: &PipelineConfig,
    clock: &dyn Clock,
) -> Result<FoldResult> {
    cfg.validate()?;
    let classes = classes_for(train, cfg);
    let train = preprocess(&restrict(train, &classes)?, &cfg.preprocess)?;
    let test = preprocess(&restrict(test, &classes)?, &cfg.preprocess)?;
    score(&train, &test, &classes, cfg, clock)
}

/// Per-class weights fitted on every trial of `set` (no held-out data).
pub fn fit_weights(set: &TrialSet, cfg: &PipelineConfig) -> Result<Vec<ClassWeights>> {
    cfg.validate()?;
    let classes = classes_for(set, cfg);
    let (restricted, kept) = restrict_with_index(set, &classes)?;
    let pre = preprocess(&restricted, &cfg.preprocess)?;
    let mut times = StageTimes::default();
    let mut fitted = fit(&pre, None, &classes, cfg, &NoClock, &mut times)?;
    for cw in &mut fitted.class_weights {
        cw.trials.iter_mut().for_each(|k| *k = kept[*k]);
    }
    Ok(fitted.class_weights)
}

fn restrict_with_index(set: &TrialSet, classes: &[Label]) -> Result<(TrialSet, Vec<usize>)> {
    let keep: Vec<usize> = (0..set.len())
        .filter(|&k| classes.contains(&set.trial(k).label))
        .collect();
    Ok((restrict(set, classes)?, keep))
}

/// Stratified fold id per trial: each class is shuffled with `seed` and dealt
/// round-robin, so remainders land in the lowest-numbered folds.
pub fn stratified_folds(labels: &[Label], folds: usize, seed: u64) -> Vec<usize> {
    let mut classes: Vec<Label> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    for c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&k| labels[k] == c).collect();
        idx.shuffle(&mut rng);
        for (i, k) in idx.into_iter().enumerate() {
            assignment[k] = i % folds;
        }
    }
    assignment
}

/// Per-fold diagnostics kept in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldDiagnostics {
    /// Weights with trial indices into the cross-validated set.
    pub class_weights: Vec<ClassWeights>,
    pub converged: bool,
    pub times: StageTimes,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub variant: MethodVariant,
    pub config: PipelineConfig,
    pub per_fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Fold id of each trial of the cross-validated set.
    pub fold_of_trial: Vec<usize>,
    pub folds: Vec<FoldDiagnostics>,
    pub times: StageTimes,
}

impl CvReport {
    pub fn converged(&self) -> bool {
        self.folds.iter().all(|f| f.converged)
    }
}

pub fn cross_validate(set: &TrialSet, cfg: &PipelineConfig) -> Result<CvReport> {
    cross_validate_with_clock(set, cfg, &NoClock)
}

pub fn cross_validate_with_clock(
    set: &TrialSet,
    cfg: &PipelineConfig,
    clock: &dyn Clock,
) -> Result<CvReport> {
    cfg.validate()?;
    let classes = classes_for(set, cfg);
    let set = restrict(set, &classes)?;
    if set.len() < cfg.folds {
        return Err(Error::InsufficientTrials {
            needed: cfg.folds,
            found: set.len(),
        });
    }
    for &c in &classes {
        let n = set.labels().filter(|&l| l == c).count();
        if n < cfg.folds {
            return Err(Error::InsufficientTrials {
                needed: cfg.folds,
                found: n,
            });
        }
    }
    let pre = preprocess(&set, &cfg.preprocess)?;
    let labels: Vec<Label> = pre.labels().collect();
    let fold_of_trial = stratified_folds(&labels, cfg.folds, cfg.seed);

    let mut per_fold_accuracy = Vec::with_capacity(cfg.folds);
    let mut folds = Vec::with_capacity(cfg.folds);
    let mut times = StageTimes::default();
    for f in 0..cfg.folds {
        let train_idx: Vec<usize> = (0..pre.len()).filter(|&k| fold_of_trial[k] != f).collect();
        let test_idx: Vec<usize> = (0..pre.len()).filter(|&k| fold_of_trial[k] == f).collect();
        let train = pre.subset(&train_idx)?;
        let test = pre.subset(&test_idx)?;
        let mut result = score(&train, &test, &classes, cfg, clock)?;
        for cw in &mut result.class_weights {
            cw.trials.iter_mut().for_each(|k| *k = train_idx[*k]);
        }
        per_fold_accuracy.push(result.accuracy);
        times += result.times;
        let converged = result.converged();
        folds.push(FoldDiagnostics {
            class_weights: result.class_weights,
            converged,
            times: result.times,
        });
    }
    let mean_accuracy = per_fold_accuracy.iter().sum::<f64>() / cfg.folds as f64;
    Ok(CvReport {
        variant: cfg.variant,
        config: cfg.clone(),
        per_fold_accuracy,
        mean_accuracy,
        fold_of_trial,
        folds,
        times,
    })
}
