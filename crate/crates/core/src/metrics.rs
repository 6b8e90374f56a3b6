//! Desk-scale quality measures used by tests and the CLI.

use crate::error::{DspError, Result};
use crate::spectral::{AnalysisState, Spectrum, StftConfig};

/// Per-frame SNR clamp used by segmental SNR, in dB.
pub const SEG_SNR_MIN_DB: f64 = -10.0;
pub const SEG_SNR_MAX_DB: f64 = 35.0;

/// Relative error energy `10 log10(|x - y|^2 / |x|^2)` in dB.
pub fn relative_error_db(reference: &[f32], estimate: &[f32]) -> f64 {
    let n = reference.len().min(estimate.len());
    let (mut err, mut sig) = (0.0f64, 0.0f64);
    for (&r, &e) in reference[..n].iter().zip(&estimate[..n]) {
        err += (r as f64 - e as f64).powi(2);
        sig += (r as f64).powi(2);
    }
    10.0 * ((err + 1e-30) / (sig + 1e-30)).log10()
}

/// Segmental SNR restricted to bins below `max_hz`.
///
/// Both signals are analysed with the same STFT; each frame contributes
/// `10 log10(sum |S|^2 / sum |S - Y|^2)` clamped to
/// [`SEG_SNR_MIN_DB`, `SEG_SNR_MAX_DB`]. Frames whose reference energy is below
/// `1e-10` of the loudest frame are skipped.
pub fn band_segmental_snr(clean: &[f32], processed: &[f32], cfg: &StftConfig, max_hz: f64) -> Result<f64> {
    if clean.len() != processed.len() {
        return Err(DspError::InvalidArgument(format!("length mismatch: {} vs {}", clean.len(), processed.len())));
    }
    let hop = cfg.hop_len;
    let n_bins = cfg.bin_count();
    let top = ((max_hz / cfg.bin_width_hz()).round() as usize + 1).min(n_bins);
    let mut sa = AnalysisState::new(*cfg)?;
    let mut ya = AnalysisState::new(*cfg)?;
    let mut s = Spectrum::zeros(n_bins);
    let mut y = Spectrum::zeros(n_bins);
    let mut frames = Vec::new();
    for (cs, ps) in clean.chunks_exact(hop).zip(processed.chunks_exact(hop)) {
        sa.analyze_into(cs, &mut s)?;
        ya.analyze_into(ps, &mut y)?;
        let (mut sig, mut err) = (0.0f64, 0.0f64);
        for (a, b) in s.bins[..top].iter().zip(&y.bins[..top]) {
            sig += a.norm_sqr() as f64;
            err += (a - b).norm_sqr() as f64;
        }
        frames.push((sig, err));
    }
    let peak = frames.iter().map(|f| f.0).fold(0.0, f64::max);
    let vals: Vec<f64> = frames
        .iter()
        .filter(|f| f.0 > peak * 1e-10 && f.0 > 0.0)
        .map(|&(sig, err)| (10.0 * (sig / (err + 1e-30)).log10()).clamp(SEG_SNR_MIN_DB, SEG_SNR_MAX_DB))
        .collect();
    if vals.is_empty() {
        return Err(DspError::InvalidArgument("reference has no energy".into()));
    }
    Ok(vals.iter().sum::<f64>() / vals.len() as f64)
}
