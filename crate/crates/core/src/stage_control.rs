//! SNR gating of the two enhancement stages and the attenuation limiter.

use serde::{Deserialize, Serialize};

use crate::error::{DspError, Result};
use crate::estimators::{SnrEstimate, SNR_MAX_DB, SNR_MIN_DB};
use crate::spectral::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateThresholds {
    pub silence_below_db: f32,
    pub df_off_above_db: f32,
}

impl Default for GateThresholds {
    fn default() -> Self {
        Self { silence_below_db: -10.0, df_off_above_db: 20.0 }
    }
}

impl GateThresholds {
    pub fn new(silence_below_db: f32, df_off_above_db: f32) -> Result<Self> {
        let th = Self { silence_below_db, df_off_above_db };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        let range = SNR_MIN_DB..=SNR_MAX_DB;
        for (name, v) in [("silence_below_db", self.silence_below_db), ("df_off_above_db", self.df_off_above_db)] {
            if !range.contains(&v) {
                return Err(DspError::InvalidArgument(format!("{name} = {v} outside [{SNR_MIN_DB}, {SNR_MAX_DB}] dB")));
            }
        }
        if self.silence_below_db >= self.df_off_above_db {
            return Err(DspError::InvalidArgument(format!(
                "silence_below_db ({}) must be below df_off_above_db ({})",
                self.silence_below_db, self.df_off_above_db
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageDecision {
    /// Both stages off, silent spectrum.
    Silence,
    /// Envelope gains only.
    ErbOnly,
    /// Envelope gains and deep filtering.
    Full,
}

impl StageDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            StageDecision::Silence => "silence",
            StageDecision::ErbOnly => "erb_only",
            StageDecision::Full => "full",
        }
    }
}

/// Strict inequalities: a value exactly at either threshold runs all stages.
pub fn decide(snr: SnrEstimate, th: &GateThresholds) -> StageDecision {
    let xi = snr.xi_db();
    if xi < th.silence_below_db {
        StageDecision::Silence
    } else if xi > th.df_off_above_db {
        StageDecision::ErbOnly
    } else {
        StageDecision::Full
    }
}

/// Maximum attenuation in dB (>= 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttenLimit {
    pub max_atten_db: f32,
}

impl Default for AttenLimit {
    fn default() -> Self {
        Self { max_atten_db: 100.0 }
    }
}

impl AttenLimit {
    pub fn new(max_atten_db: f32) -> Result<Self> {
        let lim = Self { max_atten_db };
        lim.validate()?;
        Ok(lim)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.max_atten_db.is_finite() || self.max_atten_db < 0.0 {
            return Err(DspError::InvalidArgument(format!(
                "attenuation limit must be finite and >= 0 dB, got {}",
                self.max_atten_db
            )));
        }
        Ok(())
    }

    /// Linear magnitude floor `10^(-max_atten_db / 20)`.
    pub fn floor(&self) -> f32 {
        10f32.powf(-self.max_atten_db / 20.0)
    }
}

/// Bounds every bin's effective gain from below by the limit floor.
///
/// Bins where `|processed| < floor * |noisy|` are replaced by `floor * noisy`. A zero dB
/// limit means no attenuation at all and returns the noisy frame unchanged.
pub fn limit_attenuation_into(noisy: &Spectrum, processed: &Spectrum, lim: &AttenLimit, out: &mut Spectrum) {
    out.frame_index = processed.frame_index;
    if lim.max_atten_db == 0.0 {
        out.bins.copy_from_slice(&noisy.bins);
        return;
    }
    let floor = lim.floor();
    for ((o, &x), &p) in out.bins.iter_mut().zip(&noisy.bins).zip(&processed.bins) {
        *o = if p.norm_sqr() >= floor * floor * x.norm_sqr() { p } else { x * floor };
    }
}

pub fn limit_attenuation(noisy: &Spectrum, processed: &Spectrum, lim: &AttenLimit) -> Spectrum {
    let mut out = Spectrum::zeros(noisy.len());
    limit_attenuation_into(noisy, processed, lim, &mut out);
    out
}

/// Selects the frame for a gating decision. `Silence` yields the all-zero spectrum.
pub fn apply_decision_into(decision: StageDecision, erb_out: &Spectrum, stitched: &Spectrum, out: &mut Spectrum) {
    match decision {
        StageDecision::Silence => {
            out.fill_zero();
            out.frame_index = erb_out.frame_index;
        }
        StageDecision::ErbOnly => out.copy_from(erb_out),
        StageDecision::Full => out.copy_from(stitched),
    }
}

pub fn apply_decision(decision: StageDecision, _noisy: &Spectrum, erb_out: &Spectrum, stitched: &Spectrum) -> Spectrum {
    let mut out = Spectrum::zeros(erb_out.len());
    apply_decision_into(decision, erb_out, stitched, &mut out);
    out
}
