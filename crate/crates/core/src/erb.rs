//! ERB band layout, log-power band features and piecewise-constant band gains.
//!
//! Band edges are spaced uniformly on the ERB-rate scale
//! `erb(f) = 21.4 * log10(1 + 0.00437 f)` and snapped to bin indices. Low bands are
//! widened greedily to the minimum width, and band widths never decrease with frequency.

use std::fmt::Write as _;

use crate::error::{DspError, Result};
use crate::spectral::{Spectrum, StftConfig};

pub const DEFAULT_BANDS: usize = 32;
pub const DEFAULT_MIN_WIDTH: usize = 2;
/// Power floor added before taking the log of band power.
pub const FEATURE_FLOOR: f64 = 1e-20;

pub fn freq_to_erb(freq_hz: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * freq_hz).log10()
}

pub fn erb_to_freq(erb: f64) -> f64 {
    (10f64.powf(erb / 21.4) - 1.0) / 0.00437
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErbLayout {
    edges: Vec<usize>,
    min_band_width: usize,
    sample_rate_hz: u32,
    fft_len: usize,
}

impl ErbLayout {
    pub fn design(cfg: &StftConfig, n_bands: usize, min_width: usize) -> Result<Self> {
        design_layout(cfg, n_bands, min_width)
    }

    pub fn n_bands(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn n_bins(&self) -> usize {
        *self.edges.last().unwrap()
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn min_band_width(&self) -> usize {
        self.min_band_width
    }

    pub fn width(&self, band: usize) -> usize {
        self.edges[band + 1] - self.edges[band]
    }

    pub fn band_range(&self, band: usize) -> std::ops::Range<usize> {
        self.edges[band]..self.edges[band + 1]
    }

    pub fn band_of_bin(&self, bin: usize) -> Option<usize> {
        if bin >= self.n_bins() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= bin) - 1)
    }

    pub fn center_hz(&self, band: usize) -> f64 {
        let bw = self.sample_rate_hz as f64 / self.fft_len as f64;
        let r = self.band_range(band);
        (r.start + r.end - 1) as f64 * 0.5 * bw
    }

    /// Plain-text table: band index, first bin, last bin, center frequency.
    pub fn dump_table(&self) -> String {
        let mut s = String::from("band\tfirst_bin\tlast_bin\tcenter_hz\n");
        for b in 0..self.n_bands() {
            let r = self.band_range(b);
            let _ = writeln!(s, "{}\t{}\t{}\t{:.1}", b, r.start, r.end - 1, self.center_hz(b));
        }
        s
    }
}

/// Designs a rectangular ERB partition of `cfg.bin_count()` bins into `n_bands` bands.
pub fn design_layout(cfg: &StftConfig, n_bands: usize, min_width: usize) -> Result<ErbLayout> {
    cfg.validate()?;
    let n_bins = cfg.bin_count();
    let min_width = min_width.max(1);
    if n_bands == 0 || n_bands * min_width > n_bins {
        return Err(DspError::InvalidArgument(format!(
            "cannot fit {n_bands} bands of width >= {min_width} into {n_bins} bins"
        )));
    }
    let bin_hz = cfg.bin_width_hz();
    let erb_top = freq_to_erb(cfg.sample_rate_hz as f64 / 2.0);
    let step = erb_top / n_bands as f64;

    let mut edges = Vec::with_capacity(n_bands + 1);
    edges.push(0usize);
    let mut prev_width = 0usize;
    for i in 0..n_bands - 1 {
        let start = edges[i];
        let target = (erb_to_freq(step * (i + 1) as f64) / bin_hz).round() as usize;
        let lo = min_width.max(prev_width);
        // every remaining band must still fit with width >= this one
        let hi = (n_bins - start) / (n_bands - i);
        let width = target.saturating_sub(start).clamp(lo, hi);
        edges.push(start + width);
        prev_width = width;
    }
    edges.push(n_bins);
    Ok(ErbLayout { edges, min_band_width: min_width, sample_rate_hz: cfg.sample_rate_hz, fft_len: cfg.fft_len })
}

/// Per-band real gains, clamped to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErbGains {
    g: Vec<f32>,
}

impl ErbGains {
    pub fn ones(n_bands: usize) -> Self {
        Self { g: vec![1.0; n_bands] }
    }

    pub fn zeros(n_bands: usize) -> Self {
        Self { g: vec![0.0; n_bands] }
    }

    pub fn from_values(values: &[f32]) -> Result<Self> {
        if let Some(bin) = values.iter().position(|v| !v.is_finite()) {
            return Err(DspError::NonFinite { bin });
        }
        Ok(Self { g: values.iter().map(|v| v.clamp(0.0, 1.0)).collect() })
    }

    /// Sets one band gain; NaN maps to 0.
    #[inline]
    pub fn set(&mut self, band: usize, value: f32) {
        self.g[band] = if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) };
    }

    pub fn fill(&mut self, value: f32) {
        for b in 0..self.g.len() {
            self.set(b, value);
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn mean(&self) -> f32 {
        if self.g.is_empty() {
            return 0.0;
        }
        self.g.iter().map(|&v| v as f64).sum::<f64>() as f32 / self.g.len() as f32
    }
}

/// Per-band log power in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct ErbFeatures {
    pub f: Vec<f64>,
}

impl ErbFeatures {
    pub fn zeros(n_bands: usize) -> Self {
        Self { f: vec![0.0; n_bands] }
    }
}

/// Mean power per band, accumulated in 64-bit.
pub fn band_powers_into(spec: &Spectrum, layout: &ErbLayout, out: &mut [f64]) {
    debug_assert_eq!(out.len(), layout.n_bands());
    for (b, o) in out.iter_mut().enumerate() {
        let r = layout.band_range(b);
        let n = r.len() as f64;
        *o = crate::spectral::power_of(&spec.bins[r]) / n;
    }
}

pub fn compress_into(spec: &Spectrum, layout: &ErbLayout, out: &mut ErbFeatures) {
    for b in 0..layout.n_bands() {
        let r = layout.band_range(b);
        let p = crate::spectral::power_of(&spec.bins[r.clone()]) / r.len() as f64;
        out.f[b] = 10.0 * (p + FEATURE_FLOOR).log10();
    }
}

pub fn compress(spec: &Spectrum, layout: &ErbLayout) -> ErbFeatures {
    let mut out = ErbFeatures::zeros(layout.n_bands());
    compress_into(spec, layout, &mut out);
    out
}

/// Exponential mean normalisation of features (unit time constant of `tau_s`).
#[derive(Debug, Clone)]
pub struct FeatureNormalizer {
    alpha: f64,
    mean: Vec<f64>,
}

impl FeatureNormalizer {
    pub fn new(cfg: &StftConfig, n_bands: usize, tau_s: f64) -> Self {
        let hop_s = cfg.hop_len as f64 / cfg.sample_rate_hz as f64;
        Self { alpha: (-hop_s / tau_s).exp(), mean: vec![-60.0; n_bands] }
    }

    pub fn normalize(&mut self, feats: &mut ErbFeatures) {
        for (m, f) in self.mean.iter_mut().zip(feats.f.iter_mut()) {
            *m = *f * (1.0 - self.alpha) + *m * self.alpha;
            *f -= *m;
        }
    }
}

/// Multiplies every bin by the gain of its band. Phase is unchanged.
pub fn apply_gains_into(spec: &Spectrum, gains: &ErbGains, layout: &ErbLayout, out: &mut Spectrum) {
    debug_assert_eq!(gains.len(), layout.n_bands());
    for b in 0..layout.n_bands() {
        let g = gains.g[b];
        let r = layout.band_range(b);
        for (o, &x) in out.bins[r.clone()].iter_mut().zip(&spec.bins[r]) {
            *o = x * g;
        }
    }
    out.frame_index = spec.frame_index;
}

pub fn apply_gains(spec: &Spectrum, gains: &ErbGains, layout: &ErbLayout) -> Spectrum {
    let mut out = Spectrum::zeros(spec.len());
    apply_gains_into(spec, gains, layout, &mut out);
    out
}

/// Expands band gains to per-bin gains.
pub fn expand_gains(gains: &ErbGains, layout: &ErbLayout) -> Vec<f32> {
    let mut v = vec![0.0; layout.n_bins()];
    for b in 0..layout.n_bands() {
        v[layout.band_range(b)].fill(gains.g[b]);
    }
    v
}
