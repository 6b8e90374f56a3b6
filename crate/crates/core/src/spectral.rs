//! Streaming STFT analysis and synthesis.
//!
//! Both sides use a periodic square-root Hann window, so the analysis/synthesis
//! product is a Hann window which overlap-adds to exactly one at 50 % overlap.
//! With a hop of `hop_len` and window of `window_len`, a unity-processing round trip
//! reproduces the input delayed by `window_len - hop_len` samples.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex32;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{DspError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub sample_rate_hz: u32,
    pub window_len: usize,
    pub hop_len: usize,
    pub fft_len: usize,
    pub lookahead_frames: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { sample_rate_hz: 48_000, window_len: 960, hop_len: 480, fft_len: 960, lookahead_frames: 2 }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate_hz == 0 {
            return Err(DspError::InvalidArgument("sample rate must be positive".into()));
        }
        if self.window_len != self.fft_len {
            return Err(DspError::InvalidArgument(format!(
                "window_len ({}) must equal fft_len ({})",
                self.window_len, self.fft_len
            )));
        }
        if self.hop_len == 0 || !self.window_len.is_multiple_of(self.hop_len) {
            return Err(DspError::InvalidArgument(format!(
                "hop_len ({}) must divide window_len ({})",
                self.hop_len, self.window_len
            )));
        }
        if self.window_len / self.hop_len != 2 {
            return Err(DspError::InvalidArgument("window_len must be exactly twice hop_len".into()));
        }
        Ok(())
    }

    pub fn bin_count(&self) -> usize {
        self.fft_len / 2 + 1
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.fft_len as f64
    }

    /// Delay of a unity-processing analysis/synthesis round trip.
    pub fn round_trip_delay(&self) -> usize {
        self.window_len - self.hop_len
    }
}

/// Algorithmic latency: one full window plus the look-ahead frames.
pub fn latency_samples(cfg: &StftConfig) -> usize {
    cfg.window_len + cfg.lookahead_frames * cfg.hop_len
}

/// One STFT frame.
#[derive(Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex32>,
    pub frame_index: u64,
}

impl fmt::Debug for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectrum").field("frame_index", &self.frame_index).field("bins", &self.bins.len()).finish()
    }
}

impl Spectrum {
    pub fn zeros(n_bins: usize) -> Self {
        Self { bins: vec![Complex32::new(0.0, 0.0); n_bins], frame_index: 0 }
    }

    pub fn from_bins(bins: Vec<Complex32>, frame_index: u64) -> Self {
        Self { bins, frame_index }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Copies `other` into `self` without reallocating when the sizes match.
    pub fn copy_from(&mut self, other: &Spectrum) {
        self.bins.copy_from_slice(&other.bins);
        self.frame_index = other.frame_index;
    }

    pub fn fill_zero(&mut self) {
        self.bins.fill(Complex32::new(0.0, 0.0));
    }

    /// Total power accumulated in 64-bit.
    pub fn power(&self) -> f64 {
        power_of(&self.bins)
    }

    pub fn is_finite(&self) -> bool {
        self.bins.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

pub(crate) fn power_of(bins: &[Complex32]) -> f64 {
    bins.iter().map(|c| (c.re as f64).powi(2) + (c.im as f64).powi(2)).sum()
}

/// Periodic square-root Hann window, `sin(pi n / N)`.
pub fn sqrt_hann(len: usize) -> Vec<f32> {
    (0..len).map(|n| (PI * n as f64 / len as f64).sin() as f32).collect()
}

pub struct AnalysisState {
    cfg: StftConfig,
    window: Vec<f32>,
    buf: Vec<f32>,
    fft_buf: Vec<Complex32>,
    scratch: Vec<Complex32>,
    fft: Arc<dyn Fft<f32>>,
    frames: u64,
}

impl AnalysisState {
    pub fn new(cfg: StftConfig) -> Result<Self> {
        cfg.validate()?;
        let fft = FftPlanner::<f32>::new().plan_fft_forward(cfg.fft_len);
        Ok(Self {
            window: sqrt_hann(cfg.window_len),
            buf: vec![0.0; cfg.window_len],
            fft_buf: vec![Complex32::new(0.0, 0.0); cfg.fft_len],
            scratch: vec![Complex32::new(0.0, 0.0); fft.get_inplace_scratch_len()],
            fft,
            cfg,
            frames: 0,
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.cfg
    }

    pub fn reset(&mut self) {
        self.buf.fill(0.0);
        self.frames = 0;
    }

    /// Shifts `hop` into the input buffer and writes the windowed DFT of the most
    /// recent `window_len` samples into `out`.
    pub fn analyze_into(&mut self, hop: &[f32], out: &mut Spectrum) -> Result<()> {
        let h = self.cfg.hop_len;
        if hop.len() != h {
            return Err(DspError::InvalidArgument(format!("hop has {} samples, expected {}", hop.len(), h)));
        }
        if out.bins.len() != self.cfg.bin_count() {
            return Err(DspError::InvalidArgument(format!(
                "spectrum has {} bins, expected {}",
                out.bins.len(),
                self.cfg.bin_count()
            )));
        }
        self.buf.copy_within(h.., 0);
        let n = self.buf.len();
        self.buf[n - h..].copy_from_slice(hop);
        for ((o, &x), &w) in self.fft_buf.iter_mut().zip(&self.buf).zip(&self.window) {
            *o = Complex32::new(x * w, 0.0);
        }
        self.fft.process_with_scratch(&mut self.fft_buf, &mut self.scratch);
        let nb = out.bins.len();
        out.bins.copy_from_slice(&self.fft_buf[..nb]);
        out.frame_index = self.frames;
        self.frames += 1;
        Ok(())
    }

    pub fn analyze(&mut self, hop: &[f32]) -> Result<Spectrum> {
        let mut out = Spectrum::zeros(self.cfg.bin_count());
        self.analyze_into(hop, &mut out)?;
        Ok(out)
    }
}

pub struct SynthesisState {
    cfg: StftConfig,
    window: Vec<f32>,
    acc: Vec<f64>,
    fft_buf: Vec<Complex32>,
    scratch: Vec<Complex32>,
    ifft: Arc<dyn Fft<f32>>,
}

impl SynthesisState {
    pub fn new(cfg: StftConfig) -> Result<Self> {
        cfg.validate()?;
        let ifft = FftPlanner::<f32>::new().plan_fft_inverse(cfg.fft_len);
        Ok(Self {
            window: sqrt_hann(cfg.window_len),
            acc: vec![0.0; cfg.window_len],
            fft_buf: vec![Complex32::new(0.0, 0.0); cfg.fft_len],
            scratch: vec![Complex32::new(0.0, 0.0); ifft.get_inplace_scratch_len()],
            ifft,
            cfg,
        })
    }

    pub fn reset(&mut self) {
        self.acc.fill(0.0);
    }

    /// Inverse DFT, synthesis window and overlap-add; writes `hop_len` samples.
    ///
    /// The imaginary parts of the DC and Nyquist bins are discarded.
    pub fn synthesize_into(&mut self, spec: &Spectrum, out: &mut [f32]) -> Result<()> {
        let h = self.cfg.hop_len;
        if out.len() != h {
            return Err(DspError::InvalidArgument(format!("output hop has {} samples, expected {}", out.len(), h)));
        }
        let nb = self.cfg.bin_count();
        if spec.bins.len() != nb {
            return Err(DspError::InvalidArgument(format!("spectrum has {} bins, expected {}", spec.bins.len(), nb)));
        }
        if let Some(bin) = spec.bins.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(DspError::NonFinite { bin });
        }
        // Hermitian extension; DC and Nyquist must be real
        let n = self.cfg.fft_len;
        self.fft_buf[..nb].copy_from_slice(&spec.bins);
        self.fft_buf[0].im = 0.0;
        self.fft_buf[nb - 1].im = 0.0;
        for k in 1..nb - 1 {
            self.fft_buf[n - k] = spec.bins[k].conj();
        }
        self.ifft.process_with_scratch(&mut self.fft_buf, &mut self.scratch);
        let norm = 1.0 / n as f64;
        for ((a, x), &w) in self.acc.iter_mut().zip(&self.fft_buf).zip(&self.window) {
            *a += x.re as f64 * w as f64 * norm;
        }
        for (o, &a) in out.iter_mut().zip(&self.acc[..h]) {
            *o = a as f32;
        }
        self.acc.copy_within(h.., 0);
        let n = self.acc.len();
        self.acc[n - h..].fill(0.0);
        Ok(())
    }

    pub fn synthesize(&mut self, spec: &Spectrum) -> Result<Vec<f32>> {
        let mut out = vec![0.0; self.cfg.hop_len];
        self.synthesize_into(spec, &mut out)?;
        Ok(out)
    }
}
