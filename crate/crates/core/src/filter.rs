//! Butterworth band-pass design (bilinear transform, second-order sections)
//! and zero-phase forward-backward filtering.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::trial::BandSpec;

/// One biquad in transposed direct form II, `a0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + z_inv * self.b[1] + z2 * self.b[2];
        let den = Complex64::new(1.0, 0.0) + z_inv * self.a[0] + z2 * self.a[1];
        num / den
    }

    /// Steady-state delay line for a unit step input.
    fn step_state(&self) -> [f64; 2] {
        let dc = (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1]);
        let z2 = self.b[2] - self.a[1] * dc;
        let z1 = self.b[1] - self.a[0] * dc + z2;
        [z1, z2]
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }
}

/// Digital Butterworth band-pass filter as a cascade of biquads.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPass {
    sections: Vec<Biquad>,
}

impl BandPass {
    /// Designs an `order`-pole prototype mapped to the band `[low_hz, high_hz]`
    /// (the resulting digital filter has `2·order` poles).
    pub fn design(band: BandSpec, sample_rate_hz: f64) -> Result<Self> {
        let nyquist = sample_rate_hz / 2.0;
        if !(band.low_hz > 0.0 && band.low_hz < band.high_hz && band.high_hz < nyquist) {
            return Err(Error::InvalidArgument(alloc::format!(
                "band edges must satisfy 0 < low < high < {nyquist} Hz"
            )));
        }
        if band.order == 0 {
            return Err(Error::InvalidArgument("filter order must be >= 1".into()));
        }
        let n = band.order;
        let fs2 = 2.0 * sample_rate_hz;
        let w1 = fs2 * libm::tan(PI * band.low_hz / sample_rate_hz);
        let w2 = fs2 * libm::tan(PI * band.high_hz / sample_rate_hz);
        let bw = w2 - w1;
        let w0 = libm::sqrt(w1 * w2);

        let mut poles = Vec::with_capacity(2 * n);
        for k in 0..n {
            let theta = PI * (2 * k + n + 1) as f64 / (2 * n) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            let scaled = proto * (bw / 2.0);
            let disc = (scaled * scaled - w0 * w0).sqrt();
            for s in [scaled + disc, scaled - disc] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }

        let imag_tol = 1e-12;
        let mut sections = Vec::with_capacity(n);
        let mut reals: Vec<f64> = Vec::new();
        for p in &poles {
            if p.im > imag_tol {
                sections.push(Biquad {
                    b: [1.0, 0.0, -1.0],
                    a: [-2.0 * p.re, p.norm_sqr()],
                });
            } else if p.im.abs() <= imag_tol {
                reals.push(p.re);
            }
        }
        reals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        for pair in reals.chunks(2) {
            let (p1, p2) = (pair[0], *pair.get(1).unwrap_or(&0.0));
            sections.push(Biquad {
                b: [1.0, 0.0, -1.0],
                a: [-(p1 + p2), p1 * p2],
            });
        }

        // unity gain at the band centre
        let centre = 2.0 * libm::atan(w0 / fs2);
        let mut filt = BandPass { sections };
        let g = filt.response(centre).norm();
        let per_section = libm::pow(1.0 / g, 1.0 / filt.sections.len() as f64);
        for s in &mut filt.sections {
            s.b.iter_mut().for_each(|b| *b *= per_section);
        }
        Ok(filt)
    }

    fn response(&self, omega: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -omega);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
    }

    /// Magnitude of the single-pass frequency response at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        self.response(2.0 * PI * freq_hz / sample_rate_hz).norm()
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    /// Causal single pass with the given per-section initial states.
    fn run(&self, x: &mut [f64], init: &[[f64; 2]]) {
        for (s, z0) in self.sections.iter().zip(init) {
            let (mut z1, mut z2) = (z0[0], z0[1]);
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[0] * y + z2;
                z2 = s.b[2] * input - s.a[1] * y;
                *v = y;
            }
        }
    }

    /// Per-section step states scaled for a cascade, as for a constant input of 1.
    fn cascade_step_state(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        let mut out = Vec::with_capacity(self.sections.len());
        for s in &self.sections {
            let st = s.step_state();
            out.push([st[0] * scale, st[1] * scale]);
            scale *= s.dc_gain();
        }
        out
    }

    /// Zero-phase filtering of one signal: odd-extension padding, forward and
    /// backward passes started from steady-state conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        let len = x.len();
        if len < 2 {
            return x.to_vec();
        }
        let pad = (3 * (2 * self.sections.len() + 1)).min(len - 1);
        let mut ext = vec![0.0; len + 2 * pad];
        for i in 0..pad {
            ext[i] = 2.0 * x[0] - x[pad - i];
            ext[pad + len + i] = 2.0 * x[len - 1] - x[len - 2 - i];
        }
        ext[pad..pad + len].copy_from_slice(x);

        let zi = self.cascade_step_state();
        let scaled =
            |x0: f64| -> Vec<[f64; 2]> { zi.iter().map(|z| [z[0] * x0, z[1] * x0]).collect() };
        let init = scaled(ext[0]);
        self.run(&mut ext, &init);
        ext.reverse();
        let init = scaled(ext[0]);
        self.run(&mut ext, &init);
        ext.reverse();
        ext[pad..pad + len].to_vec()
    }

    /// Row-wise [`BandPass::filtfilt`] of a channels × samples matrix.
    pub fn filtfilt_rows(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = data.clone();
        let mut buf = vec![0.0; data.ncols()];
        for r in 0..data.nrows() {
            for (c, v) in buf.iter_mut().enumerate() {
                *v = data[(r, c)];
            }
            let y = self.filtfilt(&buf);
            for (c, v) in y.into_iter().enumerate() {
                out[(r, c)] = v;
            }
        }
        out
    }
}
