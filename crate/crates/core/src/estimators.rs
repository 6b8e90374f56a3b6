//! Per-frame estimates of band gains, filter taps and local SNR.
//!
//! Three estimators share one contract: given the noisy multi-frame window (and a clean
//! window when a reference is available) they fill an [`EstimatorOutput`] for the
//! delayed frame `t`.
//!
//! * [`PassthroughEstimator`] emits unit gains and passthrough taps.
//! * [`OracleEstimator`] uses the clean reference: ideal band amplitude ratios and
//!   least-squares filter taps.
//! * [`BlindEstimator`] tracks a per-band noise floor and applies a Wiener-like rule.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::deep_filter::{DfCoefSet, DfConfig, FrameHandle, LsSolver, MultiFrameBuffer};
use crate::erb::{band_powers_into, ErbGains, ErbLayout};
use crate::error::{DspError, EngineError};
use crate::spectral::{Spectrum, StftConfig};

pub const SNR_MIN_DB: f32 = -15.0;
pub const SNR_MAX_DB: f32 = 35.0;

/// Frame-level local SNR in dB, always within `[SNR_MIN_DB, SNR_MAX_DB]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SnrEstimate(f32);

impl SnrEstimate {
    /// Clamps into range; NaN maps to the lower bound.
    pub fn new(xi_db: f32) -> Self {
        if xi_db.is_nan() {
            return Self(SNR_MIN_DB);
        }
        Self(xi_db.clamp(SNR_MIN_DB, SNR_MAX_DB))
    }

    pub fn from_power_ratio(ratio: f64) -> Self {
        if ratio.is_nan() || ratio <= 0.0 {
            return Self(SNR_MIN_DB);
        }
        Self::new((10.0 * ratio.log10()) as f32)
    }

    pub fn xi_db(self) -> f32 {
        self.0
    }
}

/// Ground-truth local SNR from aligned clean and noise frames, summed over all bins.
pub fn local_snr(clean: &Spectrum, noise: &Spectrum) -> SnrEstimate {
    snr_from_energies(clean.power(), noise.power())
}

fn snr_from_energies(es: f64, en: f64) -> SnrEstimate {
    match (es > 0.0, en > 0.0) {
        (false, _) => SnrEstimate(SNR_MIN_DB),
        (true, false) => SnrEstimate(SNR_MAX_DB),
        (true, true) => SnrEstimate::from_power_ratio(es / en),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutput {
    pub gains: ErbGains,
    pub coefs: DfCoefSet,
    pub snr: SnrEstimate,
    /// Set when gains are all one and taps are passthrough, so stages may be skipped.
    pub identity: bool,
}

impl EstimatorOutput {
    pub fn passthrough(n_bands: usize, df: &DfConfig) -> Self {
        Self {
            gains: ErbGains::ones(n_bands),
            coefs: DfCoefSet::identity(df),
            snr: SnrEstimate::new(0.0),
            identity: true,
        }
    }

    pub fn set_passthrough(&mut self, lookahead: usize) {
        self.gains.fill(1.0);
        self.coefs.set_identity(lookahead);
        self.snr = SnrEstimate::new(0.0);
        self.identity = true;
    }
}

pub struct EstimatorInput<'a> {
    pub noisy: &'a MultiFrameBuffer,
    pub clean: Option<&'a MultiFrameBuffer>,
    pub target: FrameHandle,
}

pub trait Estimator: Send {
    fn kind(&self) -> EstimatorKind;

    /// Fills `out` for frame `input.target`.
    fn estimate(&mut self, input: &EstimatorInput<'_>, out: &mut EstimatorOutput) -> Result<(), EngineError>;

    fn reset(&mut self);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Passthrough,
    Blind,
    Oracle,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Passthrough => "passthrough",
            EstimatorKind::Blind => "blind",
            EstimatorKind::Oracle => "oracle",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "passthrough" => Ok(EstimatorKind::Passthrough),
            "blind" => Ok(EstimatorKind::Blind),
            "oracle" => Ok(EstimatorKind::Oracle),
            other => Err(format!("unknown estimator '{other}' (expected passthrough, blind or oracle)")),
        }
    }
}

#[derive(Debug, Default)]
pub struct PassthroughEstimator {
    lookahead: usize,
}

impl PassthroughEstimator {
    pub fn new(df: &DfConfig) -> Self {
        Self { lookahead: df.lookahead_l }
    }
}

impl Estimator for PassthroughEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Passthrough
    }

    fn estimate(&mut self, _input: &EstimatorInput<'_>, out: &mut EstimatorOutput) -> Result<(), EngineError> {
        if !out.identity {
            out.set_passthrough(self.lookahead);
        }
        Ok(())
    }

    fn reset(&mut self) {}
}

// ---------------------------------------------------------------------------
// Oracle

/// Ideal-target estimate for frame `target` of the aligned windows.
///
/// Gains are `sqrt(clean band power / noisy band power)` clamped to `[0, 1]`, taps come
/// from the least-squares fit over the whole window, and the SNR is measured on the
/// target frame with `noise = noisy - clean`.
pub fn oracle_estimate_at(
    noisy: &[Spectrum],
    clean: &[Spectrum],
    target: usize,
    layout: &ErbLayout,
    solver: &mut LsSolver,
    scratch: &mut OracleScratch,
    out: &mut EstimatorOutput,
) -> Result<(), DspError> {
    let (x, s) = (&noisy[target], &clean[target]);
    band_powers_into(x, layout, &mut scratch.noisy_bands);
    band_powers_into(s, layout, &mut scratch.clean_bands);
    for (b, (&pn, &pc)) in scratch.noisy_bands.iter().zip(&scratch.clean_bands).enumerate() {
        let g = if pn > 0.0 { (pc / pn).sqrt() } else { 0.0 };
        out.gains.set(b, g as f32);
    }
    solver.solve_into(noisy, clean, &mut out.coefs, |_| {})?;

    let mut es = 0.0f64;
    let mut en = 0.0f64;
    for (&xv, &sv) in x.bins.iter().zip(&s.bins) {
        let z: Complex32 = xv - sv;
        es += (sv.re as f64).powi(2) + (sv.im as f64).powi(2);
        en += (z.re as f64).powi(2) + (z.im as f64).powi(2);
    }
    out.snr = snr_from_energies(es, en);
    out.identity = false;
    Ok(())
}

/// Oracle estimate for the center frame of the windows.
pub fn oracle_estimate(
    noisy: &[Spectrum],
    clean: &[Spectrum],
    layout: &ErbLayout,
    df: &DfConfig,
) -> Result<EstimatorOutput, DspError> {
    let mut out = EstimatorOutput::passthrough(layout.n_bands(), df);
    let mut solver = LsSolver::new(df);
    let mut scratch = OracleScratch::new(layout.n_bands());
    oracle_estimate_at(noisy, clean, noisy.len() / 2, layout, &mut solver, &mut scratch, &mut out)?;
    Ok(out)
}

pub struct OracleScratch {
    noisy_bands: Vec<f64>,
    clean_bands: Vec<f64>,
}

impl OracleScratch {
    pub fn new(n_bands: usize) -> Self {
        Self { noisy_bands: vec![0.0; n_bands], clean_bands: vec![0.0; n_bands] }
    }
}

pub const DEFAULT_ORACLE_WINDOW: usize = 24;

/// Streaming oracle: keeps the last `window` noisy/clean frames (newest = `t + l`).
pub struct OracleEstimator {
    layout: ErbLayout,
    df: DfConfig,
    noisy: Vec<Spectrum>,
    clean: Vec<Spectrum>,
    solver: LsSolver,
    scratch: OracleScratch,
}

impl OracleEstimator {
    pub fn new(layout: ErbLayout, df: DfConfig) -> Self {
        Self::with_window(layout, df, DEFAULT_ORACLE_WINDOW)
    }

    pub fn with_window(layout: ErbLayout, df: DfConfig, window: usize) -> Self {
        let window = window.max(4 * df.order_n);
        let n_bins = layout.n_bins();
        Self {
            noisy: (0..window).map(|_| Spectrum::zeros(n_bins)).collect(),
            clean: (0..window).map(|_| Spectrum::zeros(n_bins)).collect(),
            solver: LsSolver::new(&df),
            scratch: OracleScratch::new(layout.n_bands()),
            layout,
            df,
        }
    }
}

impl Estimator for OracleEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Oracle
    }

    fn estimate(&mut self, input: &EstimatorInput<'_>, out: &mut EstimatorOutput) -> Result<(), EngineError> {
        let clean = input.clean.ok_or(EngineError::MissingReference)?;
        let (Some(x), Some(s)) = (input.noisy.newest(), clean.newest()) else {
            return Err(EngineError::MissingReference);
        };
        self.noisy.rotate_left(1);
        self.clean.rotate_left(1);
        self.noisy.last_mut().unwrap().copy_from(x);
        self.clean.last_mut().unwrap().copy_from(s);
        let target = self.noisy.len() - 1 - self.df.lookahead_l;
        oracle_estimate_at(&self.noisy, &self.clean, target, &self.layout, &mut self.solver, &mut self.scratch, out)?;
        Ok(())
    }

    fn reset(&mut self) {
        for s in self.noisy.iter_mut().chain(self.clean.iter_mut()) {
            s.fill_zero();
        }
    }
}

// ---------------------------------------------------------------------------
// Blind

/// Frames averaged to initialise the noise floor.
pub const FLOOR_INIT_FRAMES: usize = 10;
/// Time constant of the band power smoother.
pub const POWER_SMOOTHING_S: f64 = 0.1;
/// Maximum floor rise, in dB per second (6 dB over a 1.5 s window).
pub const FLOOR_RISE_DB_PER_S: f64 = 4.0;
/// Multiplier applied to the tracked minimum to compensate its downward bias.
pub const FLOOR_BIAS: f64 = 2.5;
const POWER_EPS: f64 = 1e-12;

/// Per-band smoothed power and a decaying-minimum noise floor.
#[derive(Debug, Clone)]
pub struct NoiseFloorState {
    smoothed: Vec<f64>,
    floor: Vec<f64>,
    band_power: Vec<f64>,
    init_acc: Vec<f64>,
    frames: usize,
    alpha: f64,
    rise: f64,
}

impl NoiseFloorState {
    pub fn new(cfg: &StftConfig, n_bands: usize) -> Self {
        let hop_s = cfg.hop_len as f64 / cfg.sample_rate_hz as f64;
        Self {
            smoothed: vec![0.0; n_bands],
            floor: vec![0.0; n_bands],
            band_power: vec![0.0; n_bands],
            init_acc: vec![0.0; n_bands],
            frames: 0,
            alpha: (-hop_s / POWER_SMOOTHING_S).exp(),
            rise: 10f64.powf(FLOOR_RISE_DB_PER_S * hop_s / 10.0),
        }
    }

    pub fn is_initialized(&self) -> bool {
        self.frames >= FLOOR_INIT_FRAMES
    }

    pub fn floor(&self) -> &[f64] {
        &self.floor
    }

    pub fn smoothed(&self) -> &[f64] {
        &self.smoothed
    }

    pub fn reset(&mut self) {
        self.smoothed.fill(0.0);
        self.floor.fill(0.0);
        self.init_acc.fill(0.0);
        self.frames = 0;
    }
}

/// One step of the blind estimator on a single noisy frame.
///
/// During the first [`FLOOR_INIT_FRAMES`] frames the floor is being initialised and the
/// output is passthrough.
pub fn blind_estimate(
    state: &mut NoiseFloorState,
    noisy: &Spectrum,
    layout: &ErbLayout,
    df: &DfConfig,
    out: &mut EstimatorOutput,
) {
    band_powers_into(noisy, layout, &mut state.band_power);
    if state.frames < FLOOR_INIT_FRAMES {
        for (a, &p) in state.init_acc.iter_mut().zip(&state.band_power) {
            *a += p;
        }
        state.frames += 1;
        if state.frames == FLOOR_INIT_FRAMES {
            for ((s, f), &a) in state.smoothed.iter_mut().zip(state.floor.iter_mut()).zip(&state.init_acc) {
                *s = a / FLOOR_INIT_FRAMES as f64;
                *f = *s;
            }
        }
        out.set_passthrough(df.lookahead_l);
        return;
    }

    let mut excess = 0.0f64;
    for b in 0..layout.n_bands() {
        let s = state.alpha * state.smoothed[b] + (1.0 - state.alpha) * state.band_power[b];
        let f = s.min(state.floor[b] * state.rise);
        state.smoothed[b] = s;
        state.floor[b] = f;
        let gamma = (s + POWER_EPS) / (FLOOR_BIAS * f + POWER_EPS);
        out.gains.set(b, (1.0 - 1.0 / gamma) as f32);
        excess += gamma - 1.0;
    }
    // single-frame estimate: the DF stage reduces to the band gain on the target-frame tap
    out.coefs.set_identity(df.lookahead_l);
    for b in 0..layout.n_bands() {
        let g = Complex32::new(out.gains.values()[b], 0.0);
        for f in layout.band_range(b).take_while(|&f| f < df.df_bins) {
            out.coefs.set(f, df.lookahead_l, g).expect("gain within tap cap");
        }
    }
    out.snr = SnrEstimate::from_power_ratio(excess / layout.n_bands() as f64);
    out.identity = false;
}

pub struct BlindEstimator {
    layout: ErbLayout,
    df: DfConfig,
    state: NoiseFloorState,
}

impl BlindEstimator {
    pub fn new(cfg: &StftConfig, layout: ErbLayout, df: DfConfig) -> Self {
        Self { state: NoiseFloorState::new(cfg, layout.n_bands()), layout, df }
    }

    pub fn state(&self) -> &NoiseFloorState {
        &self.state
    }
}

impl Estimator for BlindEstimator {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Blind
    }

    fn estimate(&mut self, input: &EstimatorInput<'_>, out: &mut EstimatorOutput) -> Result<(), EngineError> {
        // causal: only the target frame itself, never the look-ahead frames
        let frame = input.noisy.frame(input.target);
        blind_estimate(&mut self.state, frame, &self.layout, &self.df, out);
        Ok(())
    }

    fn reset(&mut self) {
        self.state.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::erb::design_layout;
    use crate::signal::{sine, white_noise};
    use crate::spectral::AnalysisState;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn layout() -> ErbLayout {
        design_layout(&StftConfig::default(), 32, 2).unwrap()
    }

    fn flat(v: f32) -> Spectrum {
        Spectrum::from_bins(vec![Complex32::new(v, 0.0); 481], 0)
    }

    fn analyze_all(x: &[f32]) -> Vec<Spectrum> {
        let mut a = AnalysisState::new(StftConfig::default()).unwrap();
        x.chunks_exact(480).map(|h| a.analyze(h).unwrap()).collect()
    }

    fn rand_spectrum(rng: &mut ChaCha8Rng, std: f32, bins: std::ops::Range<usize>) -> Spectrum {
        let mut s = Spectrum::zeros(481);
        for k in bins {
            let re: f32 = rng.sample(StandardNormal);
            let im: f32 = rng.sample(StandardNormal);
            s.bins[k] = Complex32::new(re, im) * std;
        }
        s
    }

    #[test]
    fn snr_clamp_and_arithmetic() {
        assert_eq!(local_snr(&flat(1.0), &flat(1.0)).xi_db(), 0.0);
        assert_eq!(local_snr(&flat(1.0), &flat(0.0)).xi_db(), 35.0);
        assert_eq!(local_snr(&flat(0.0), &flat(0.0)).xi_db(), -15.0);
        let s = flat(10f32.sqrt());
        assert!((local_snr(&s, &flat(1.0)).xi_db() - 10.0).abs() < 1e-5);
        assert_eq!(SnrEstimate::new(f32::NAN).xi_db(), -15.0);
        assert_eq!(SnrEstimate::new(99.0).xi_db(), 35.0);
    }

    #[test]
    fn estimator_kind_parses() {
        for k in [EstimatorKind::Passthrough, EstimatorKind::Blind, EstimatorKind::Oracle] {
            assert_eq!(k.to_string().parse::<EstimatorKind>().unwrap(), k);
        }
        assert!("dnn".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn oracle_clean_equals_noisy() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Spectrum> = (0..24).map(|_| rand_spectrum(&mut rng, 1.0, 0..481)).collect();
        let out = oracle_estimate(&x, &x, &layout(), &DfConfig::default()).unwrap();
        assert!(out.gains.values().iter().all(|&g| (g - 1.0).abs() < 1e-6));
        assert_eq!(out.snr.xi_db(), 35.0);
        for f in 0..96 {
            assert!((out.coefs.get(f, 2) - Complex32::new(1.0, 0.0)).norm() < 1e-3);
        }
    }

    #[test]
    fn oracle_zero_clean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<Spectrum> = (0..24).map(|_| rand_spectrum(&mut rng, 1.0, 0..481)).collect();
        let z: Vec<Spectrum> = (0..24).map(|_| Spectrum::zeros(481)).collect();
        let out = oracle_estimate(&x, &z, &layout(), &DfConfig::default()).unwrap();
        assert!(out.gains.values().iter().all(|&g| g == 0.0));
        assert_eq!(out.snr.xi_db(), -15.0);
    }

    #[test]
    fn oracle_band_gain_matches_power_ratio() {
        // clean occupies only the widest band at -6 dB relative to the noise there:
        // expected gain sqrt(0.25 / 1.25) = sqrt(0.2)
        let l = layout();
        let band = 31;
        let r = l.band_range(band);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frames = 120;
        let clean: Vec<Spectrum> = (0..frames).map(|_| rand_spectrum(&mut rng, 0.5, r.clone())).collect();
        let noisy: Vec<Spectrum> = clean
            .iter()
            .map(|s| {
                let z = rand_spectrum(&mut rng, 1.0, 0..481);
                Spectrum::from_bins(s.bins.iter().zip(&z.bins).map(|(a, b)| a + b).collect(), 0)
            })
            .collect();
        let df = DfConfig::default();
        let mut solver = LsSolver::new(&df);
        let mut scratch = OracleScratch::new(32);
        let mut out = EstimatorOutput::passthrough(32, &df);
        let mut sum = 0.0;
        for t in 0..frames {
            oracle_estimate_at(&noisy, &clean, t, &l, &mut solver, &mut scratch, &mut out).unwrap();
            sum += out.gains.values()[band] as f64;
        }
        let mean = sum / frames as f64;
        let expected = 0.2f64.sqrt();
        assert!((mean - expected).abs() < 0.1 * expected, "mean gain {mean:.3}");
    }

    fn ln_spectrum(s: &Spectrum, k: f32) -> Spectrum {
        Spectrum::from_bins(s.bins.iter().map(|c| c * k).collect(), 0)
    }

    proptest! {
        #[test]
        fn oracle_is_scale_consistent(seed in 0u64..500, scale in 0.01f32..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let clean: Vec<Spectrum> = (0..20).map(|_| rand_spectrum(&mut rng, 1.0, 0..481)).collect();
            let noisy: Vec<Spectrum> = clean.iter().map(|s| {
                let z = rand_spectrum(&mut rng, 0.8, 0..481);
                Spectrum::from_bins(s.bins.iter().zip(&z.bins).map(|(a, b)| a + b).collect(), 0)
            }).collect();
            let l = layout();
            let df = DfConfig::default();
            let a = oracle_estimate(&noisy, &clean, &l, &df).unwrap();
            let ns: Vec<Spectrum> = noisy.iter().map(|s| ln_spectrum(s, scale)).collect();
            let cs: Vec<Spectrum> = clean.iter().map(|s| ln_spectrum(s, scale)).collect();
            let b = oracle_estimate(&ns, &cs, &l, &df).unwrap();
            for (x, y) in a.gains.values().iter().zip(b.gains.values()) {
                prop_assert!((x - y).abs() < 1e-5);
            }
            prop_assert!((a.snr.xi_db() - b.snr.xi_db()).abs() < 1e-4);
        }

        #[test]
        fn outputs_stay_in_range(seed in 0u64..500, level in 0.0f32..1e3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = layout();
            let df = DfConfig::default();
            let mut st = NoiseFloorState::new(&StftConfig::default(), 32);
            let mut out = EstimatorOutput::passthrough(32, &df);
            for _ in 0..30 {
                let amp = level * rng.gen::<f32>();
                let s = rand_spectrum(&mut rng, amp, 0..481);
                blind_estimate(&mut st, &s, &l, &df, &mut out);
                prop_assert!(out.gains.values().iter().all(|g| (0.0..=1.0).contains(g)));
                prop_assert!((SNR_MIN_DB..=SNR_MAX_DB).contains(&out.snr.xi_db()));
                for (f, s) in st.floor().iter().zip(st.smoothed()) {
                    prop_assert!(f <= s);
                }
            }
        }
    }

    fn run_blind(x: &[f32]) -> Vec<EstimatorOutput> {
        let l = layout();
        let df = DfConfig::default();
        let mut st = NoiseFloorState::new(&StftConfig::default(), 32);
        let mut out = EstimatorOutput::passthrough(32, &df);
        analyze_all(x)
            .iter()
            .map(|s| {
                blind_estimate(&mut st, s, &l, &df, &mut out);
                out.clone()
            })
            .collect()
    }

    #[test]
    fn blind_suppresses_stationary_noise_within_3s() {
        let outs = run_blind(&white_noise(48_000 * 8, 11, 0.1));
        for (t, o) in outs.iter().enumerate().skip(300) {
            let max = o.gains.values().iter().cloned().fold(0.0f32, f32::max);
            assert!(max < 0.3, "frame {t}: max gain {max}");
        }
    }

    #[test]
    fn blind_silence_gives_zero_gains() {
        let outs = run_blind(&vec![0.0; 48_000]);
        let last = outs.last().unwrap();
        assert!(last.gains.values().iter().all(|&g| g == 0.0));
        assert_eq!(last.snr.xi_db(), -15.0);
    }

    #[test]
    fn blind_keeps_tone_band_after_noise_convergence() {
        // 3 s of noise for the floor to settle, then a strong 1 kHz tone
        let n = 48_000 * 4;
        let noise = white_noise(n, 12, 0.01);
        let tone = sine(1000.0, 0.5, 48_000, n);
        let x: Vec<f32> = (0..n).map(|i| noise[i] + if i >= 48_000 * 3 { tone[i] } else { 0.0 }).collect();
        let outs = run_blind(&x);
        let l = layout();
        let tone_band = l.band_of_bin(20).unwrap();
        let o = &outs[360];
        assert!(o.gains.values()[tone_band] > 0.9, "tone band gain {}", o.gains.values()[tone_band]);
        for b in 20..32 {
            assert!(o.gains.values()[b] < 0.3, "band {b} gain {}", o.gains.values()[b]);
        }
    }

    #[test]
    fn blind_is_causal() {
        let a = white_noise(48_000, 13, 0.1);
        let mut b = a.clone();
        for v in &mut b[24_000..] {
            *v *= 10.0;
        }
        let (oa, ob) = (run_blind(&a), run_blind(&b));
        // frame t covers samples up to (t + 1) * 480; frames ending before 24000 must match
        for t in 0..49 {
            assert_eq!(oa[t], ob[t], "frame {t}");
        }
        assert_ne!(oa[60], ob[60]);
    }

    #[test]
    fn blind_taps_carry_band_gains() {
        let outs = run_blind(&white_noise(48_000, 14, 0.1));
        let l = layout();
        let o = &outs[80];
        for f in 0..96 {
            let g = o.gains.values()[l.band_of_bin(f).unwrap()];
            for i in 0..5 {
                let expected = if i == 2 { Complex32::new(g, 0.0) } else { Complex32::new(0.0, 0.0) };
                assert_eq!(o.coefs.get(f, i), expected, "bin {f} tap {i}");
            }
        }
    }
}
