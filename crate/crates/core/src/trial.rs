//! Labeled multichannel trials and per-trial preprocessing.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::filter::BandPass;
use crate::Label;

/// One recorded repetition: an M×N (channels × samples) matrix and its class.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub data: DMatrix<f64>,
    pub label: Label,
}

impl Trial {
    pub fn new(data: DMatrix<f64>, label: Label) -> Self {
        Trial { data, label }
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples(&self) -> usize {
        self.data.ncols()
    }
}

/// A validated collection of trials sharing channel and sample counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    trials: Vec<Trial>,
    sample_rate_hz: f64,
    label_set: Vec<Label>,
    sessions: Vec<i64>,
    contaminated: Option<Vec<bool>>,
}

impl TrialSet {
    /// Builds a set and checks every invariant: K ≥ 1, uniform M×N with N > M,
    /// finite entries, labels drawn from a declared set of at least two classes.
    pub fn new(
        trials: Vec<Trial>,
        sample_rate_hz: f64,
        label_set: Vec<Label>,
        sessions: Vec<i64>,
        contaminated: Option<Vec<bool>>,
    ) -> Result<Self> {
        if trials.is_empty() {
            return Err(Error::InvalidArgument("trial set is empty".into()));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::InvalidArgument(
                "sample rate must be positive".into(),
            ));
        }
        let mut labels = label_set;
        labels.sort_unstable();
        labels.dedup();
        if labels.len() < 2 {
            return Err(Error::InvalidArgument(
                "label set needs at least two classes".into(),
            ));
        }
        let m = trials[0].channels();
        let n = trials[0].samples();
        if m == 0 || n <= m {
            return Err(Error::InvalidArgument(alloc::format!(
                "trials need more samples than channels (M={m}, N={n})"
            )));
        }
        for t in &trials {
            if t.channels() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: t.channels(),
                    what: "trial channels",
                });
            }
            if t.samples() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.samples(),
                    what: "trial samples",
                });
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { what: "trial data" });
            }
            if labels.binary_search(&t.label).is_err() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "unknown label {}",
                    t.label
                )));
            }
        }
        if sessions.len() != trials.len() {
            return Err(Error::DimensionMismatch {
                expected: trials.len(),
                found: sessions.len(),
                what: "session ids",
            });
        }
        if let Some(flags) = &contaminated {
            if flags.len() != trials.len() {
                return Err(Error::DimensionMismatch {
                    expected: trials.len(),
                    found: flags.len(),
                    what: "contamination flags",
                });
            }
        }
        Ok(TrialSet {
            trials,
            sample_rate_hz,
            label_set: labels,
            sessions,
            contaminated,
        })
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn trial(&self, k: usize) -> &Trial {
        &self.trials[k]
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.trials[0].channels()
    }

    pub fn samples(&self) -> usize {
        self.trials[0].samples()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Declared labels, sorted ascending.
    pub fn label_set(&self) -> &[Label] {
        &self.label_set
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.trials.iter().map(|t| t.label)
    }

    pub fn sessions(&self) -> &[i64] {
        &self.sessions
    }

    pub fn contaminated(&self) -> Option<&[bool]> {
        self.contaminated.as_deref()
    }

    /// Indices of trials carrying `label`, in set order.
    pub fn indices_of(&self, label: Label) -> Vec<usize> {
        self.trials
            .iter()
            .enumerate()
            .filter(|(_, t)| t.label == label)
            .map(|(k, _)| k)
            .collect()
    }

    /// New set containing the given trials in the given order. The label set is kept.
    pub fn subset(&self, indices: &[usize]) -> Result<TrialSet> {
        let trials = indices.iter().map(|&k| self.trials[k].clone()).collect();
        let sessions = indices.iter().map(|&k| self.sessions[k]).collect();
        let contaminated = self
            .contaminated
            .as_ref()
            .map(|f| indices.iter().map(|&k| f[k]).collect());
        TrialSet::new(
            trials,
            self.sample_rate_hz,
            self.label_set.clone(),
            sessions,
            contaminated,
        )
    }

    /// Same metadata with each trial's data replaced by `f(data)`.
    pub fn map_data<F>(&self, mut f: F) -> Result<TrialSet>
    where
        F: FnMut(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    {
        let trials = self
            .trials
            .iter()
            .map(|t| Ok(Trial::new(f(&t.data)?, t.label)))
            .collect::<Result<Vec<_>>>()?;
        TrialSet::new(
            trials,
            self.sample_rate_hz,
            self.label_set.clone(),
            self.sessions.clone(),
            self.contaminated.clone(),
        )
    }

    /// Same data and metadata with labels replaced.
    pub fn relabel(&self, labels: &[Label]) -> Result<TrialSet> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: labels.len(),
                what: "labels",
            });
        }
        let trials = self
            .trials
            .iter()
            .zip(labels)
            .map(|(t, &l)| Trial::new(t.data.clone(), l))
            .collect();
        TrialSet::new(
            trials,
            self.sample_rate_hz,
            self.label_set.clone(),
            self.sessions.clone(),
            self.contaminated.clone(),
        )
    }
}

/// Band-pass settings: edges in Hz and Butterworth prototype order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl Default for BandSpec {
    fn default() -> Self {
        BandSpec {
            low_hz: 8.0,
            high_hz: 30.0,
            order: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreprocessConfig {
    pub remove_mean: bool,
    pub bandpass: Option<BandSpec>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            remove_mean: true,
            bandpass: None,
        }
    }
}

/// Subtracts each channel's mean in place.
pub fn remove_channel_means(data: &mut DMatrix<f64>) {
    let n = data.ncols() as f64;
    for mut row in data.row_iter_mut() {
        let mean = row.iter().sum::<f64>() / n;
        row.iter_mut().for_each(|v| *v -= mean);
    }
}

/// Applies the zero-phase band-pass (when configured) and then channel-mean removal.
pub fn preprocess(set: &TrialSet, cfg: &PreprocessConfig) -> Result<TrialSet> {
    let filter = match cfg.bandpass {
        Some(band) => Some(BandPass::design(band, set.sample_rate_hz())?),
        None => None,
    };
    set.map_data(|data| {
        let mut out = match &filter {
            Some(f) => f.filtfilt_rows(data),
            None => data.clone(),
        };
        if cfg.remove_mean {
            remove_channel_means(&mut out);
        }
        Ok(out)
    })
}
