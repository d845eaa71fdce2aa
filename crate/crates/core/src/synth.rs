//! Synthetic two-or-more-class trials generated as `X = A·S` plus optional
//! artifact bursts on a known subset of trials.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::condition_number;
use crate::trial::{Trial, TrialSet};
use crate::Label;

const BURN_IN: usize = 200;
/// Log-normal spread of per-trial source amplitudes.
const AMPLITUDE_JITTER: f64 = 0.25;

/// Spectral shape of one latent source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSpectrum {
    /// Narrow-band resonance (AR(2)) around `freq_hz`, unit variance before scaling.
    Oscillation {
        freq_hz: f64,
        bandwidth_hz: f64,
        amplitude: f64,
    },
    /// Coloured broadband noise (AR(1) with coefficient `ar`), unit variance before scaling.
    Broadband { ar: f64, amplitude: f64 },
}

/// Mixing matrix, per-class source spectra and contamination settings.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingModel {
    pub mixing: DMatrix<f64>,
    /// `source_spectra[c][s]`: spectrum of source `s` for the `c`-th class.
    pub source_spectra: Vec<Vec<SourceSpectrum>>,
    pub contamination_rate: f64,
    pub artifact_gain: f64,
    pub condition_cap: f64,
    pub sample_rate_hz: f64,
}

impl MixingModel {
    /// Motor-imagery-like model: one oscillatory source per class whose power is
    /// raised for that class and lowered for the others, broadband noise elsewhere.
    pub fn motor_imagery(mixing: DMatrix<f64>, class_count: usize) -> Self {
        let m = mixing.nrows();
        let designated = class_count.min(m.saturating_sub(1)).max(1);
        let source_spectra = (0..class_count)
            .map(|c| {
                (0..m)
                    .map(|s| {
                        if s < designated {
                            SourceSpectrum::Oscillation {
                                freq_hz: 10.0 + 4.0 * s as f64,
                                bandwidth_hz: 2.0,
                                amplitude: if s == c % designated { 1.5 } else { 0.6 },
                            }
                        } else {
                            let frac = s as f64 / m as f64;
                            SourceSpectrum::Broadband {
                                ar: -0.5 + 1.3 * frac,
                                amplitude: 1.0,
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        MixingModel {
            mixing,
            source_spectra,
            contamination_rate: 0.0,
            artifact_gain: 1.0,
            condition_cap: 10.0,
            sample_rate_hz: 250.0,
        }
    }

    pub fn with_contamination(mut self, rate: f64, gain: f64) -> Self {
        self.contamination_rate = rate;
        self.artifact_gain = gain;
        self
    }

    pub fn channels(&self) -> usize {
        self.mixing.nrows()
    }
}

/// Random `U·diag(s)·Vᵀ` with Haar-like orthogonal factors and singular values
/// spread log-uniformly over `[1, condition]`.
pub fn random_mixing(channels: usize, condition: f64, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orthogonal = |rng: &mut ChaCha8Rng| {
        let g = DMatrix::from_fn(channels, channels, |_, _| {
            rng.sample::<f64, _>(StandardNormal)
        });
        g.qr().q()
    };
    let u = orthogonal(&mut rng);
    let v = orthogonal(&mut rng);
    let log_cap = libm::log(condition.max(1.0));
    let s = DVector::from_fn(channels, |i, _| {
        if channels == 1 {
            1.0
        } else {
            // endpoints pinned so the condition number sits just below `condition`
            let t = match i {
                0 => 0.0,
                i if i == channels - 1 => 1.0 - 1e-9,
                _ => rng.random::<f64>(),
            };
            libm::exp(t * log_cap)
        }
    });
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

/// Output of [`synth_mixture`].
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    /// Recorded trials `X^k = A·S^k` (+ artifacts), rounded to f32 precision.
    pub mixtures: TrialSet,
    /// Latent source trials `S^k`, rounded to f32 precision.
    pub sources: TrialSet,
    pub model: MixingModel,
}

fn quantize(m: &mut DMatrix<f64>) {
    m.iter_mut().for_each(|v| *v = *v as f32 as f64);
}

fn source_row(spec: SourceSpectrum, n: usize, fs: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut noise = || rng.sample::<f64, _>(StandardNormal);
    let mut out = Vec::with_capacity(n);
    match spec {
        SourceSpectrum::Oscillation {
            freq_hz,
            bandwidth_hz,
            amplitude,
        } => {
            let r = libm::exp(-PI * bandwidth_hz / fs);
            let c = 2.0 * r * libm::cos(2.0 * PI * freq_hz / fs);
            let (mut x1, mut x2) = (0.0, 0.0);
            for t in 0..(n + BURN_IN) {
                let x = c * x1 - r * r * x2 + noise();
                x2 = x1;
                x1 = x;
                if t >= BURN_IN {
                    out.push(x);
                }
            }
            let mean = out.iter().sum::<f64>() / n as f64;
            let var = out.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let scale = amplitude / libm::sqrt(var.max(f64::MIN_POSITIVE));
            out.iter_mut().for_each(|v| *v *= scale);
        }
        SourceSpectrum::Broadband { ar, amplitude } => {
            let scale = amplitude * libm::sqrt(1.0 - ar * ar);
            let mut x1 = 0.0;
            for t in 0..(n + BURN_IN) {
                let x = ar * x1 + noise();
                x1 = x;
                if t >= BURN_IN {
                    out.push(x * scale);
                }
            }
        }
    }
    out
}

/// Generates `trials_per_class · |classes|` trials, interleaved by class.
///
/// Exactly `round(contamination_rate · K)` trials receive an additive burst of
/// white noise on a random channel subset over a random window covering at
/// least a quarter of the trial. The burst standard deviation is
/// `artifact_gain` times the RMS of the clean channel it lands on.
pub fn synth_mixture(
    model: &MixingModel,
    classes: &[Label],
    trials_per_class: usize,
    samples: usize,
    seed: u64,
) -> Result<Synthesis> {
    let m = model.channels();
    if !model.mixing.is_square() {
        return Err(Error::InvalidArgument(
            "mixing matrix must be square".into(),
        ));
    }
    if samples <= m {
        return Err(Error::InvalidArgument(alloc::format!(
            "need more samples than channels (M={m}, N={samples})"
        )));
    }
    if !(0.0..=1.0).contains(&model.contamination_rate) {
        return Err(Error::InvalidArgument(
            "contamination rate must lie in [0, 1]".into(),
        ));
    }
    if !(model.artifact_gain > 0.0) {
        return Err(Error::InvalidArgument(
            "artifact gain must be positive".into(),
        ));
    }
    if classes.len() < 2 || model.source_spectra.len() < classes.len() {
        return Err(Error::InvalidArgument(
            "need at least two classes, each with source spectra".into(),
        ));
    }
    if model.source_spectra.iter().any(|s| s.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: model
                .source_spectra
                .iter()
                .map(|s| s.len())
                .find(|&l| l != m)
                .unwrap_or(0),
            what: "source spectra per class",
        });
    }
    let condition = condition_number(&model.mixing);
    if !(condition <= model.condition_cap) {
        return Err(Error::IllConditionedMixing {
            condition,
            cap: model.condition_cap,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = trials_per_class * classes.len();
    let mut sources = Vec::with_capacity(total);
    let mut mixtures = Vec::with_capacity(total);
    for k in 0..total {
        let c = k % classes.len();
        let label = classes[c];
        let mut s = DMatrix::zeros(m, samples);
        for (row, spec) in model.source_spectra[c].iter().enumerate() {
            let jitter = libm::exp(AMPLITUDE_JITTER * rng.sample::<f64, _>(StandardNormal));
            let values = source_row(*spec, samples, model.sample_rate_hz, &mut rng);
            for (col, v) in values.into_iter().enumerate() {
                s[(row, col)] = v * jitter;
            }
        }
        quantize(&mut s);
        let x = &model.mixing * &s;
        sources.push(Trial::new(s, label));
        mixtures.push(Trial::new(x, label));
    }

    let n_bad = libm::round(model.contamination_rate * total as f64) as usize;
    let mut flags = vec![false; total];
    for k in index::sample(&mut rng, total, n_bad).into_vec() {
        flags[k] = true;
    }
    for (k, trial) in mixtures.iter_mut().enumerate() {
        if flags[k] {
            let n_ch = rng.random_range(1..=(m / 2).max(1));
            let min_len = samples.div_ceil(4);
            let len = rng.random_range(min_len..=samples);
            let start = rng.random_range(0..=(samples - len));
            for ch in index::sample(&mut rng, m, n_ch).into_vec() {
                let rms = libm::sqrt(trial.data.row(ch).norm_squared() / samples as f64);
                let sd = model.artifact_gain * rms;
                for t in start..start + len {
                    trial.data[(ch, t)] += sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        quantize(&mut trial.data);
    }

    let sessions = vec![0; total];
    let label_set = classes.to_vec();
    Ok(Synthesis {
        mixtures: TrialSet::new(
            mixtures,
            model.sample_rate_hz,
            label_set.clone(),
            sessions.clone(),
            Some(flags),
        )?,
        sources: TrialSet::new(sources, model.sample_rate_hz, label_set, sessions, None)?,
        model: model.clone(),
    })
}
