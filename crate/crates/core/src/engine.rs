//! The streaming frame loop.
//!
//! Each call to [`Engine::process_hop`] takes one hop of input and, once the pipeline
//! is primed, returns one hop of output:
//!
//! ```text
//! hop -> analyze -> estimate -> ERB gains -> deep filter -> stitch -> gate -> limit -> synthesize -> hop
//! ```
//!
//! The output is the input delayed by exactly [`latency_samples`]: the STFT round trip
//! contributes `window_len - hop_len`, the look-ahead `l * hop_len`, and one extra hop of
//! output alignment brings the total to `window_len + l * hop_len`. The first
//! `latency / hop_len` calls emit nothing.
//!
//! Configuration is published through a [`ControlHandle`]; the audio side picks up the
//! newest whole snapshot at the start of a frame and never blocks on it.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crossbeam_queue::ArrayQueue;
use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::deep_filter::{stitch_into, DfConfig, MultiFrameBuffer};
use crate::erb::{apply_gains_into, design_layout, ErbLayout, DEFAULT_BANDS, DEFAULT_MIN_WIDTH};
use crate::error::EngineError;
use crate::estimators::{
    BlindEstimator, Estimator, EstimatorInput, EstimatorKind, EstimatorOutput, OracleEstimator, PassthroughEstimator,
};
use crate::signal::white_noise;
use crate::spectral::{latency_samples, power_of, AnalysisState, Spectrum, StftConfig, SynthesisState};
use crate::stage_control::{
    apply_decision_into, decide, limit_attenuation_into, AttenLimit, GateThresholds, StageDecision,
};

pub const METER_QUEUE_CAPACITY: usize = 1024;
/// RMS floor for meters, in dBFS.
pub const RMS_FLOOR_DB: f32 = -120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageOverrides {
    pub erb_enabled: bool,
    pub df_enabled: bool,
}

impl Default for StageOverrides {
    fn default() -> Self {
        Self { erb_enabled: true, df_enabled: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub stft: StftConfig,
    pub df: DfConfig,
    pub thresholds: GateThresholds,
    pub atten: AttenLimit,
    pub estimator_kind: EstimatorKind,
    pub stages: StageOverrides,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            df: DfConfig::default(),
            thresholds: GateThresholds::default(),
            atten: AttenLimit::default(),
            estimator_kind: EstimatorKind::Blind,
            stages: StageOverrides::default(),
        }
    }
}

impl EngineConfig {
    pub fn with_estimator(mut self, kind: EstimatorKind) -> Self {
        self.estimator_kind = kind;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.stft.validate()?;
        self.df.validate(self.stft.bin_count())?;
        self.thresholds.validate()?;
        self.atten.validate()?;
        Ok(())
    }

    pub fn latency_samples(&self) -> usize {
        latency_samples(&self.stft)
    }
}

/// Per-hop telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeterFrame {
    pub frame_index: u64,
    pub xi_db: f32,
    pub decision: StageDecision,
    pub mean_gain: f32,
    /// Low-band energy after deep filtering relative to the first-stage low band.
    pub df_delta_db: f32,
    pub in_rms_db: f32,
    pub out_rms_db: f32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub analysis_s: f64,
    pub estimate_s: f64,
    pub erb_s: f64,
    pub df_s: f64,
    pub gate_s: f64,
    pub synthesis_s: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.analysis_s + self.estimate_s + self.erb_s + self.df_s + self.gate_s + self.synthesis_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RtfReport {
    pub processed_audio_s: f64,
    pub wall_time_s: f64,
    pub rtf: f64,
    pub stages: StageTimes,
}

impl fmt::Display for RtfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.stages;
        write!(
            f,
            "rtf={:.4} audio_s={:.3} wall_s={:.4} analysis_s={:.4} estimate_s={:.4} erb_s={:.4} df_s={:.4} gate_s={:.4} synthesis_s={:.4}",
            self.rtf,
            self.processed_audio_s,
            self.wall_time_s,
            s.analysis_s,
            s.estimate_s,
            s.erb_s,
            s.df_s,
            s.gate_s,
            s.synthesis_s
        )
    }
}

struct SharedConfig {
    slot: Mutex<EngineConfig>,
    version: AtomicU64,
    stft: StftConfig,
    df: DfConfig,
    has_reference: bool,
}

/// Control-plane side of an engine. Cheap to clone and `Send`.
#[derive(Clone)]
pub struct ControlHandle {
    shared: Arc<SharedConfig>,
}

impl ControlHandle {
    fn new(cfg: EngineConfig, has_reference: bool) -> Self {
        Self {
            shared: Arc::new(SharedConfig {
                slot: Mutex::new(cfg),
                version: AtomicU64::new(0),
                stft: cfg.stft,
                df: cfg.df,
                has_reference,
            }),
        }
    }

    fn check(&self, cfg: &EngineConfig) -> Result<(), EngineError> {
        cfg.validate()?;
        if cfg.stft != self.shared.stft || cfg.df != self.shared.df {
            return Err(EngineError::InvalidConfig(
                "STFT and deep-filter layout cannot change on a running engine".into(),
            ));
        }
        if cfg.estimator_kind == EstimatorKind::Oracle && !self.shared.has_reference {
            return Err(EngineError::MissingReference);
        }
        Ok(())
    }

    /// Publishes a whole new config. Invalid configs are rejected and the previous one kept.
    pub fn update(&self, cfg: EngineConfig) -> Result<(), EngineError> {
        self.modify(|c| *c = cfg).map(|_| ())
    }

    /// Read-modify-write of the pending config as one atomic step.
    pub fn modify(&self, f: impl FnOnce(&mut EngineConfig)) -> Result<EngineConfig, EngineError> {
        let mut slot = self.shared.slot.lock().unwrap_or_else(|e| e.into_inner());
        let mut next = *slot;
        f(&mut next);
        self.check(&next)?;
        *slot = next;
        self.shared.version.fetch_add(1, Ordering::Release);
        Ok(next)
    }

    /// The config the next frame will use.
    pub fn snapshot(&self) -> EngineConfig {
        *self.shared.slot.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn has_reference(&self) -> bool {
        self.shared.has_reference
    }

    fn version(&self) -> u64 {
        self.shared.version.load(Ordering::Acquire)
    }

    /// Non-blocking read used by the audio side.
    fn try_snapshot(&self) -> Option<(EngineConfig, u64)> {
        let slot = self.shared.slot.try_lock().ok()?;
        Some((*slot, self.version()))
    }
}

/// Consumer side of the bounded meter queue (oldest entries are dropped on overflow).
#[derive(Clone)]
pub struct MeterReceiver {
    queue: Arc<ArrayQueue<MeterFrame>>,
}

impl MeterReceiver {
    pub fn try_recv(&self) -> Option<MeterFrame> {
        self.queue.pop()
    }

    pub fn drain(&self) -> Vec<MeterFrame> {
        std::iter::from_fn(|| self.queue.pop()).collect()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

/// Result of [`Engine::process_buffer`].
#[derive(Debug, Clone, Default)]
pub struct OfflineOutput {
    pub samples: Vec<f32>,
    pub meters: Vec<MeterFrame>,
    pub non_finite_hops: usize,
}

struct FrameInfo {
    frame_index: u64,
    xi_db: f32,
    decision: StageDecision,
    mean_gain: f32,
    df_delta_db: f32,
}

pub struct Engine {
    cfg: EngineConfig,
    applied_version: u64,
    control: ControlHandle,
    layout: ErbLayout,

    analysis: AnalysisState,
    clean_analysis: Option<AnalysisState>,
    synthesis: SynthesisState,
    noisy_buf: MultiFrameBuffer,
    clean_buf: Option<MultiFrameBuffer>,

    passthrough: PassthroughEstimator,
    blind: BlindEstimator,
    oracle: Option<OracleEstimator>,
    est: EstimatorOutput,

    frame: Spectrum,
    clean_frame: Spectrum,
    erb_out: Spectrum,
    stitched: Spectrum,
    gated: Spectrum,
    limited: Spectrum,
    df_low: Vec<Complex32>,
    zero_hop: Vec<f32>,
    synth_hop: Vec<f32>,
    pending_hop: Vec<f32>,
    in_rms: Vec<f32>,

    hops_in: u64,
    warmup_hops: u64,
    warmup_frames: u64,
    meters: Arc<ArrayQueue<MeterFrame>>,
    last_meter: Option<MeterFrame>,
    timing: Option<StageTimes>,
}

impl Engine {
    /// Engine without a clean reference stream.
    pub fn new(cfg: EngineConfig) -> Result<Self, EngineError> {
        Self::build(cfg, false)
    }

    /// Engine that also receives an aligned clean reference (required by the oracle).
    pub fn with_reference(cfg: EngineConfig) -> Result<Self, EngineError> {
        Self::build(cfg, true)
    }

    fn build(cfg: EngineConfig, reference: bool) -> Result<Self, EngineError> {
        let control = ControlHandle::new(cfg, reference);
        control.check(&cfg)?;
        let stft = cfg.stft;
        let n_bins = stft.bin_count();
        let layout = design_layout(&stft, DEFAULT_BANDS, DEFAULT_MIN_WIDTH)?;
        let hop = stft.hop_len;
        let warmup_hops = (latency_samples(&stft) / hop) as u64;
        Ok(Self {
            applied_version: control.version(),
            control,
            analysis: AnalysisState::new(stft)?,
            clean_analysis: if reference { Some(AnalysisState::new(stft)?) } else { None },
            synthesis: SynthesisState::new(stft)?,
            noisy_buf: MultiFrameBuffer::new(cfg.df, n_bins)?,
            clean_buf: if reference { Some(MultiFrameBuffer::new(cfg.df, n_bins)?) } else { None },
            passthrough: PassthroughEstimator::new(&cfg.df),
            blind: BlindEstimator::new(&stft, layout.clone(), cfg.df),
            oracle: reference.then(|| OracleEstimator::new(layout.clone(), cfg.df)),
            est: EstimatorOutput::passthrough(layout.n_bands(), &cfg.df),
            frame: Spectrum::zeros(n_bins),
            clean_frame: Spectrum::zeros(n_bins),
            erb_out: Spectrum::zeros(n_bins),
            stitched: Spectrum::zeros(n_bins),
            gated: Spectrum::zeros(n_bins),
            limited: Spectrum::zeros(n_bins),
            df_low: vec![Complex32::new(0.0, 0.0); cfg.df.df_bins],
            zero_hop: vec![0.0; hop],
            synth_hop: vec![0.0; hop],
            pending_hop: vec![0.0; hop],
            in_rms: vec![RMS_FLOOR_DB; warmup_hops as usize + 1],
            hops_in: 0,
            warmup_hops,
            warmup_frames: (stft.window_len / hop - 1) as u64,
            meters: Arc::new(ArrayQueue::new(METER_QUEUE_CAPACITY)),
            last_meter: None,
            timing: None,
            layout,
            cfg,
        })
    }

    pub fn hop_len(&self) -> usize {
        self.cfg.stft.hop_len
    }

    pub fn latency_samples(&self) -> usize {
        latency_samples(&self.cfg.stft)
    }

    pub fn layout(&self) -> &ErbLayout {
        &self.layout
    }

    pub fn has_reference(&self) -> bool {
        self.clean_buf.is_some()
    }

    pub fn control(&self) -> ControlHandle {
        self.control.clone()
    }

    pub fn meters(&self) -> MeterReceiver {
        MeterReceiver { queue: self.meters.clone() }
    }

    pub fn last_meter(&self) -> Option<MeterFrame> {
        self.last_meter
    }

    pub fn hops_processed(&self) -> u64 {
        self.hops_in
    }

    /// The config the most recent frame ran with.
    pub fn current_config(&self) -> EngineConfig {
        self.cfg
    }

    /// The config the next frame will use.
    pub fn snapshot_config(&self) -> EngineConfig {
        self.control.snapshot()
    }

    /// Validates and publishes `cfg`; it takes effect at the next frame boundary.
    pub fn update_config(&self, cfg: EngineConfig) -> Result<(), EngineError> {
        self.control.update(cfg)
    }

    pub fn set_timing(&mut self, enabled: bool) {
        self.timing = enabled.then(StageTimes::default);
    }

    pub fn stage_times(&self) -> Option<StageTimes> {
        self.timing
    }

    /// Clears all signal state; the config is kept.
    pub fn reset(&mut self) {
        self.analysis.reset();
        if let Some(a) = &mut self.clean_analysis {
            a.reset();
        }
        self.synthesis.reset();
        self.noisy_buf.reset();
        if let Some(b) = &mut self.clean_buf {
            b.reset();
        }
        self.blind.reset();
        if let Some(o) = &mut self.oracle {
            o.reset();
        }
        self.est.set_passthrough(self.cfg.df.lookahead_l);
        self.pending_hop.fill(0.0);
        self.synth_hop.fill(0.0);
        self.in_rms.fill(RMS_FLOOR_DB);
        self.hops_in = 0;
        self.last_meter = None;
        while self.meters.pop().is_some() {}
    }

    /// Processes one hop. Returns whether `output` was written (false during warm-up).
    pub fn process_hop(&mut self, input: &[f32], output: &mut [f32]) -> Result<bool, EngineError> {
        self.process(input, None, output)
    }

    /// Like [`Engine::process_hop`] with an aligned clean reference hop.
    pub fn process_hop_with_reference(
        &mut self,
        input: &[f32],
        clean: &[f32],
        output: &mut [f32],
    ) -> Result<bool, EngineError> {
        self.process(input, Some(clean), output)
    }

    fn refresh_config(&mut self) {
        if self.control.version() == self.applied_version {
            return;
        }
        // a writer holding the lock just delays the switch by one frame
        if let Some((cfg, version)) = self.control.try_snapshot() {
            self.cfg = cfg;
            self.applied_version = version;
        }
    }

    fn process(&mut self, input: &[f32], clean: Option<&[f32]>, output: &mut [f32]) -> Result<bool, EngineError> {
        let hop = self.cfg.stft.hop_len;
        for len in [input.len(), output.len()].into_iter().chain(clean.map(<[f32]>::len)) {
            if len != hop {
                return Err(EngineError::HopLength { expected: hop, got: len });
            }
        }
        self.refresh_config();
        let t_start = self.timing.map(|_| Instant::now());

        let finite = input.iter().all(|v| v.is_finite());
        let input = if finite { input } else { &self.zero_hop[..] };
        self.analysis.analyze_into(input, &mut self.frame)?;
        let rms_slot = (self.hops_in % self.in_rms.len() as u64) as usize;
        self.in_rms[rms_slot] = rms_db(input);
        let handle = self.noisy_buf.push_frame(&self.frame);
        if let (Some(a), Some(b)) = (&mut self.clean_analysis, &mut self.clean_buf) {
            let c = clean.filter(|c| c.iter().all(|v| v.is_finite())).unwrap_or(&self.zero_hop);
            a.analyze_into(c, &mut self.clean_frame)?;
            b.push_frame(&self.clean_frame);
        }
        if let (Some(t), Some(t0)) = (self.timing.as_mut(), t_start) {
            t.analysis_s += t0.elapsed().as_secs_f64();
        }

        let info = match handle {
            Some(t) => Some(self.process_frame(t)?),
            None => None,
        };

        let emitted = self.hops_in >= self.warmup_hops;
        if emitted {
            output.copy_from_slice(&self.pending_hop);
        }
        self.pending_hop.copy_from_slice(&self.synth_hop);

        if let (true, Some(info)) = (emitted, info) {
            let lag = self.warmup_hops;
            let slot = ((self.hops_in + self.in_rms.len() as u64 - lag) % self.in_rms.len() as u64) as usize;
            let meter = MeterFrame {
                frame_index: info.frame_index,
                xi_db: info.xi_db,
                decision: info.decision,
                mean_gain: info.mean_gain,
                df_delta_db: info.df_delta_db,
                in_rms_db: self.in_rms[slot],
                out_rms_db: rms_db(output),
            };
            self.last_meter = Some(meter);
            self.meters.force_push(meter);
        }
        let hop_index = self.hops_in;
        self.hops_in += 1;
        if finite {
            Ok(emitted)
        } else {
            Err(EngineError::NonFiniteInput { hop: hop_index, emitted })
        }
    }

    fn process_frame(&mut self, t: crate::deep_filter::FrameHandle) -> Result<FrameInfo, EngineError> {
        let cfg = self.cfg;
        let mut clock = self.timing.map(|_| Instant::now());
        let mut lap = |slot: fn(&mut StageTimes) -> &mut f64, timing: &mut Option<StageTimes>| {
            if let (Some(times), Some(c)) = (timing.as_mut(), clock.as_mut()) {
                let now = Instant::now();
                *slot(times) += (now - *c).as_secs_f64();
                *c = now;
            }
        };

        let input = EstimatorInput { noisy: &self.noisy_buf, clean: self.clean_buf.as_ref(), target: t };
        match cfg.estimator_kind {
            EstimatorKind::Passthrough => self.passthrough.estimate(&input, &mut self.est)?,
            EstimatorKind::Blind => self.blind.estimate(&input, &mut self.est)?,
            EstimatorKind::Oracle => {
                self.oracle.as_mut().ok_or(EngineError::MissingReference)?.estimate(&input, &mut self.est)?
            }
        }
        let warming_up = t.index() < self.warmup_frames;
        if warming_up {
            self.est.set_passthrough(cfg.df.lookahead_l);
        }
        lap(|s| &mut s.estimate_s, &mut self.timing);

        let x = self.noisy_buf.frame(t);
        let mut decision = if warming_up { StageDecision::Full } else { decide(self.est.snr, &cfg.thresholds) };
        if decision == StageDecision::Full && !cfg.stages.df_enabled {
            decision = StageDecision::ErbOnly;
        }

        // identity estimate outside silence: every stage and the limiter return x unchanged
        if self.est.identity && decision != StageDecision::Silence {
            self.synthesis.synthesize_into(x, &mut self.synth_hop)?;
            lap(|s| &mut s.synthesis_s, &mut self.timing);
            return Ok(FrameInfo {
                frame_index: t.index(),
                xi_db: self.est.snr.xi_db(),
                decision,
                mean_gain: 1.0,
                df_delta_db: 0.0,
            });
        }

        let unit_gains = self.est.identity || !cfg.stages.erb_enabled;
        if unit_gains {
            self.erb_out.copy_from(x);
        } else {
            apply_gains_into(x, &self.est.gains, &self.layout, &mut self.erb_out);
        }
        lap(|s| &mut s.erb_s, &mut self.timing);

        let nb = cfg.df.df_bins;
        let mut df_delta_db = 0.0;
        if decision == StageDecision::Full {
            if self.est.identity {
                self.stitched.copy_from(&self.erb_out);
            } else {
                self.noisy_buf.apply_df(&self.est.coefs, t, &mut self.df_low)?;
                stitch_into(&self.df_low, &self.erb_out, &mut self.stitched);
                let e_df = power_of(&self.df_low);
                let e_erb = power_of(&self.erb_out.bins[..nb]);
                df_delta_db = (10.0 * ((e_df + 1e-12) / (e_erb + 1e-12)).log10()) as f32;
            }
        }
        lap(|s| &mut s.df_s, &mut self.timing);

        apply_decision_into(decision, &self.erb_out, &self.stitched, &mut self.gated);
        limit_attenuation_into(x, &self.gated, &cfg.atten, &mut self.limited);
        lap(|s| &mut s.gate_s, &mut self.timing);

        self.synthesis.synthesize_into(&self.limited, &mut self.synth_hop)?;
        lap(|s| &mut s.synthesis_s, &mut self.timing);

        Ok(FrameInfo {
            frame_index: t.index(),
            xi_db: self.est.snr.xi_db(),
            decision,
            mean_gain: if unit_gains { 1.0 } else { self.est.gains.mean() },
            df_delta_db,
        })
    }

    /// Offline driver: feeds `noisy` hop by hop, flushes the latency with zeros and
    /// returns exactly `noisy.len()` delay-compensated samples.
    pub fn process_buffer(
        &mut self,
        noisy: &[f32],
        clean: Option<&[f32]>,
        collect_meters: bool,
    ) -> Result<OfflineOutput, EngineError> {
        if let Some(c) = clean {
            if c.len() != noisy.len() {
                return Err(EngineError::InvalidConfig(format!(
                    "clean reference has {} samples, input has {}",
                    c.len(),
                    noisy.len()
                )));
            }
        }
        let hop = self.hop_len();
        let padded = noisy.len().div_ceil(hop) * hop + self.latency_samples();
        let mut out = OfflineOutput { samples: Vec::with_capacity(padded), ..Default::default() };
        let mut in_hop = vec![0.0f32; hop];
        let mut clean_hop = vec![0.0f32; hop];
        let mut out_hop = vec![0.0f32; hop];
        let meters = self.meters();
        for start in (0..padded).step_by(hop) {
            fill_hop(&mut in_hop, noisy, start);
            let res = match clean {
                Some(c) => {
                    fill_hop(&mut clean_hop, c, start);
                    self.process_hop_with_reference(&in_hop, &clean_hop, &mut out_hop)
                }
                None if self.has_reference() => {
                    self.process_hop_with_reference(&in_hop, &self.zero_hop.clone(), &mut out_hop)
                }
                None => self.process_hop(&in_hop, &mut out_hop),
            };
            let emitted = match res {
                Ok(e) => e,
                Err(EngineError::NonFiniteInput { emitted, .. }) => {
                    out.non_finite_hops += 1;
                    emitted
                }
                Err(e) => return Err(e),
            };
            if emitted {
                out.samples.extend_from_slice(&out_hop);
            }
            if collect_meters {
                out.meters.extend(std::iter::from_fn(|| meters.try_recv()));
            }
        }
        out.samples.truncate(noisy.len());
        Ok(out)
    }
}

fn fill_hop(hop: &mut [f32], src: &[f32], start: usize) {
    hop.fill(0.0);
    if start < src.len() {
        let end = (start + hop.len()).min(src.len());
        hop[..end - start].copy_from_slice(&src[start..end]);
    }
}

pub fn rms_db(x: &[f32]) -> f32 {
    if x.is_empty() {
        return RMS_FLOOR_DB;
    }
    let ms = x.iter().map(|&v| (v as f64).powi(2)).sum::<f64>() / x.len() as f64;
    ((10.0 * ms.log10()) as f32).max(RMS_FLOOR_DB)
}

/// Processes `duration_s` of seeded white noise single-threaded and reports the
/// real-time factor. The engine is reset before and after the run.
pub fn measure_rtf(engine: &mut Engine, duration_s: f64, seed: u64) -> Result<RtfReport, EngineError> {
    let sr = engine.cfg.stft.sample_rate_hz as f64;
    let hop = engine.hop_len();
    let n_hops = ((duration_s * sr) as usize).div_ceil(hop);
    let noise = white_noise(n_hops * hop, seed, 0.1);
    let reference: Option<Vec<f32>> = engine.has_reference().then(|| noise.iter().map(|v| v * 0.5).collect());
    let mut out = vec![0.0f32; hop];
    engine.reset();
    engine.set_timing(true);
    let start = Instant::now();
    for (i, chunk) in noise.chunks_exact(hop).enumerate() {
        match &reference {
            Some(r) => engine.process_hop_with_reference(chunk, &r[i * hop..(i + 1) * hop], &mut out)?,
            None => engine.process_hop(chunk, &mut out)?,
        };
    }
    let wall = start.elapsed();
    let stages = engine.stage_times().unwrap_or_default();
    engine.set_timing(false);
    engine.reset();
    let audio = (n_hops * hop) as f64 / sr;
    let wall_s = Duration::as_secs_f64(&wall);
    Ok(RtfReport { processed_audio_s: audio, wall_time_s: wall_s, rtf: wall_s / audio, stages })
}
