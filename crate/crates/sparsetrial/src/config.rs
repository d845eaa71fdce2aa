//! Optional JSON configuration. Every field may be omitted; present fields
//! overwrite the built-in defaults and are in turn overwritten by CLI flags.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sparsetrial_core::pipeline::{MethodVariant, PipelineConfig};
use sparsetrial_core::svm::Kernel;
use sparsetrial_core::{BandSpec, Label, Tolerance};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub variant: Option<String>,
    pub alpha: Option<f64>,
    pub svm: Option<SvmSection>,
    pub folds: Option<usize>,
    pub m: Option<usize>,
    pub taus: Option<Vec<usize>>,
    pub ffdiag: Option<FfdiagSection>,
    pub admm: Option<AdmmSection>,
    pub preprocess: Option<PreprocessSection>,
    pub seed: Option<u64>,
    pub class_pair: Option<[Label; 2]>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvmSection {
    /// `rbf` or `linear`.
    pub kernel: Option<String>,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub tol: Option<f64>,
    pub max_passes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FfdiagSection {
    pub epsilon: Option<f64>,
    /// `relative` (default) or `absolute`.
    pub tolerance: Option<String>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmmSection {
    pub rho: Option<f64>,
    pub max_iters: Option<usize>,
    pub tol_primal: Option<f64>,
    pub tol_dual: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessSection {
    pub remove_mean: Option<bool>,
    /// `null` disables filtering.
    pub bandpass: Option<Option<BandSection>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub low_hz: f64,
    pub high_hz: f64,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_order() -> usize {
    BandSpec::default().order
}

pub fn parse_variant(s: &str) -> Result<MethodVariant> {
    MethodVariant::parse(s).ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(v) = &self.variant {
            cfg.variant = parse_variant(v)?;
        }
        set(&mut cfg.alpha, self.alpha);
        set(&mut cfg.folds, self.folds);
        set(&mut cfg.m, self.m);
        set(&mut cfg.seed, self.seed);
        if let Some(t) = &self.taus {
            cfg.taus = t.clone();
        }
        if let Some([a, b]) = self.class_pair {
            cfg.class_pair = Some((a, b));
        }
        if let Some(s) = &self.svm {
            if let Some(k) = &s.kernel {
                cfg.svm.kernel = match k.as_str() {
                    "rbf" => Kernel::Rbf,
                    "linear" => Kernel::Linear,
                    _ => return Err(Error::Config(format!("unknown kernel `{k}`"))),
                };
            }
            set(&mut cfg.svm.gamma, s.gamma);
            set(&mut cfg.svm.c, s.c);
            set(&mut cfg.svm.tol, s.tol);
            set(&mut cfg.svm.max_passes, s.max_passes);
        }
        if let Some(f) = &self.ffdiag {
            let eps = f.epsilon.unwrap_or(match cfg.ffdiag.epsilon {
                Tolerance::Relative(e) | Tolerance::Absolute(e) => e,
            });
            cfg.ffdiag.epsilon = match f.tolerance.as_deref() {
                None | Some("relative") => Tolerance::Relative(eps),
                Some("absolute") => Tolerance::Absolute(eps),
                Some(t) => return Err(Error::Config(format!("unknown tolerance kind `{t}`"))),
            };
            set(&mut cfg.ffdiag.max_iters, f.max_iters);
        }
        if let Some(a) = &self.admm {
            set(&mut cfg.admm.rho, a.rho);
            set(&mut cfg.admm.max_iters, a.max_iters);
            set(&mut cfg.admm.tol_primal, a.tol_primal);
            set(&mut cfg.admm.tol_dual, a.tol_dual);
        }
        if let Some(p) = &self.preprocess {
            set(&mut cfg.preprocess.remove_mean, p.remove_mean);
            if let Some(b) = p.bandpass {
                cfg.preprocess.bandpass = b.map(|b| BandSpec {
                    low_hz: b.low_hz,
                    high_hz: b.high_hz,
                    order: b.order,
                });
            }
        }
        Ok(())
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}
