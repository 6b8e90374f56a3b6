//! Multi-frame complex filtering of the low-frequency bins.
//!
//! For output frame `t` and bin `f < df_bins` the filter computes
//!
//! ```text
//! Y(t, f) = sum_{i=0}^{N-1} conj(W_i(f)) * X(t - i + l, f)
//! ```
//!
//! Tap `i` is paired with frame `t - i + l`, i.e. taps run from the newest
//! (look-ahead) frame down to the oldest one. Coefficients are stored unconjugated;
//! the conjugate is taken when filtering.

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{DspError, Result};
use crate::spectral::Spectrum;

pub const COEF_FILE_MAGIC: &[u8; 4] = b"DFC1";
pub const DEFAULT_TAP_CAP: f32 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfConfig {
    pub order_n: usize,
    pub lookahead_l: usize,
    pub df_bins: usize,
}

impl Default for DfConfig {
    fn default() -> Self {
        Self { order_n: 5, lookahead_l: 2, df_bins: 96 }
    }
}

impl DfConfig {
    pub fn validate(&self, n_bins: usize) -> Result<()> {
        if self.order_n == 0 {
            return Err(DspError::InvalidArgument("filter order must be at least 1".into()));
        }
        if self.lookahead_l >= self.order_n {
            return Err(DspError::InvalidArgument(format!(
                "look-ahead {} must be smaller than the filter order {}",
                self.lookahead_l, self.order_n
            )));
        }
        if self.df_bins > n_bins {
            return Err(DspError::InvalidArgument(format!(
                "df_bins {} exceeds {} spectrum bins",
                self.df_bins, n_bins
            )));
        }
        Ok(())
    }
}

/// Index of the (delayed) frame a filter output belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrameHandle(u64);

impl FrameHandle {
    pub fn index(self) -> u64 {
        self.0
    }
}

/// Ring of the last `order_n` spectra.
pub struct MultiFrameBuffer {
    cfg: DfConfig,
    ring: Vec<Spectrum>,
    zero: Spectrum,
    frames_seen: u64,
}

impl MultiFrameBuffer {
    pub fn new(cfg: DfConfig, n_bins: usize) -> Result<Self> {
        cfg.validate(n_bins)?;
        Ok(Self {
            ring: (0..cfg.order_n).map(|_| Spectrum::zeros(n_bins)).collect(),
            zero: Spectrum::zeros(n_bins),
            frames_seen: 0,
            cfg,
        })
    }

    pub fn config(&self) -> &DfConfig {
        &self.cfg
    }

    pub fn frames_seen(&self) -> u64 {
        self.frames_seen
    }

    pub fn reset(&mut self) {
        for s in &mut self.ring {
            s.fill_zero();
        }
        self.frames_seen = 0;
    }

    /// Stores the next frame. Returns the handle of the frame `newest - l` once enough
    /// look-ahead frames are buffered.
    pub fn push_frame(&mut self, spec: &Spectrum) -> Option<FrameHandle> {
        let n = self.cfg.order_n as u64;
        let slot = &mut self.ring[(self.frames_seen % n) as usize];
        slot.copy_from(spec);
        slot.frame_index = self.frames_seen;
        self.frames_seen += 1;
        let l = self.cfg.lookahead_l as u64;
        (self.frames_seen > l).then(|| FrameHandle(self.frames_seen - 1 - l))
    }

    pub fn newest(&self) -> Option<&Spectrum> {
        (self.frames_seen > 0).then(|| self.get(self.frames_seen as i64 - 1))
    }

    /// Frame by absolute index. Indices before the stream start or already evicted
    /// read as silence.
    pub fn get(&self, index: i64) -> &Spectrum {
        let newest = self.frames_seen as i64 - 1;
        let oldest = newest - self.cfg.order_n as i64 + 1;
        assert!(index <= newest, "frame {index} has not been pushed yet");
        if index < 0 || index < oldest {
            return &self.zero;
        }
        &self.ring[(index as u64 % self.cfg.order_n as u64) as usize]
    }

    pub fn frame(&self, t: FrameHandle) -> &Spectrum {
        self.get(t.0 as i64)
    }

    /// Frame paired with tap `i` for output frame `t`, i.e. `X(t - i + l)`.
    pub fn tap_frame(&self, t: FrameHandle, i: usize) -> &Spectrum {
        self.get(t.0 as i64 - i as i64 + self.cfg.lookahead_l as i64)
    }

    /// Applies the multi-frame filter for frame `t`, writing `df_bins` outputs.
    pub fn apply_df(&self, coefs: &DfCoefSet, t: FrameHandle, out: &mut [Complex32]) -> Result<()> {
        let (nb, n) = (self.cfg.df_bins, self.cfg.order_n);
        debug_assert_eq!(coefs.order_n, n);
        debug_assert_eq!(coefs.df_bins, nb);
        assert!(out.len() >= nb, "output holds {} bins, need {}", out.len(), nb);
        for (f, o) in out[..nb].iter_mut().enumerate() {
            let taps = coefs.taps(f);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, w) in taps.iter().enumerate() {
                acc += c64(w.conj()) * c64(self.tap_frame(t, i).bins[f]);
            }
            let y = Complex32::new(acc.re as f32, acc.im as f32);
            if !(y.re.is_finite() && y.im.is_finite()) {
                return Err(DspError::NonFinite { bin: f });
            }
            *o = y;
        }
        Ok(())
    }
}

#[inline]
fn c64(c: Complex32) -> Complex64 {
    Complex64::new(c.re as f64, c.im as f64)
}

/// Low band from the filter output, high band from the first-stage output.
pub fn stitch_into(df_low: &[Complex32], erb_out: &Spectrum, out: &mut Spectrum) {
    let nb = df_low.len();
    out.bins[..nb].copy_from_slice(df_low);
    out.bins[nb..].copy_from_slice(&erb_out.bins[nb..]);
    out.frame_index = erb_out.frame_index;
}

pub fn stitch(df_low: &[Complex32], erb_out: &Spectrum) -> Spectrum {
    let mut out = Spectrum::zeros(erb_out.len());
    stitch_into(df_low, erb_out, &mut out);
    out
}

/// Per-bin complex filter taps, stored bin-major then tap.
#[derive(Debug, Clone, PartialEq)]
pub struct DfCoefSet {
    order_n: usize,
    df_bins: usize,
    cap: f32,
    w: Vec<Complex32>,
}

impl DfCoefSet {
    pub fn zeros(cfg: &DfConfig) -> Self {
        Self {
            order_n: cfg.order_n,
            df_bins: cfg.df_bins,
            cap: DEFAULT_TAP_CAP,
            w: vec![Complex32::new(0.0, 0.0); cfg.order_n * cfg.df_bins],
        }
    }

    /// Passthrough taps: `W_l = 1`, all others zero.
    pub fn identity(cfg: &DfConfig) -> Self {
        let mut c = Self::zeros(cfg);
        c.set_identity(cfg.lookahead_l);
        c
    }

    pub fn with_cap(mut self, cap: f32) -> Self {
        self.cap = cap;
        let taps = std::mem::take(&mut self.w);
        self.w = taps.into_iter().map(|w| clamp_mag(w, cap)).collect();
        self
    }

    pub fn set_identity(&mut self, lookahead: usize) {
        self.w.fill(Complex32::new(0.0, 0.0));
        for f in 0..self.df_bins {
            self.w[f * self.order_n + lookahead] = Complex32::new(1.0, 0.0);
        }
    }

    pub fn set_bin_identity(&mut self, bin: usize, lookahead: usize) {
        let taps = &mut self.w[bin * self.order_n..(bin + 1) * self.order_n];
        taps.fill(Complex32::new(0.0, 0.0));
        taps[lookahead] = Complex32::new(1.0, 0.0);
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn df_bins(&self) -> usize {
        self.df_bins
    }

    pub fn cap(&self) -> f32 {
        self.cap
    }

    pub fn get(&self, bin: usize, tap: usize) -> Complex32 {
        self.w[bin * self.order_n + tap]
    }

    pub fn taps(&self, bin: usize) -> &[Complex32] {
        &self.w[bin * self.order_n..(bin + 1) * self.order_n]
    }

    /// Sets one tap, scaling it down to the magnitude cap if needed.
    pub fn set(&mut self, bin: usize, tap: usize, value: Complex32) -> Result<()> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(DspError::NonFinite { bin });
        }
        self.w[bin * self.order_n + tap] = clamp_mag(value, self.cap);
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Serializes to the `DFC1` fixture format: a 16-byte header
    /// (`"DFC1"`, order_n, df_bins, reserved as little-endian u32) followed by
    /// little-endian f32 re/im pairs, bin-major then tap.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.w.len() * 8);
        out.extend_from_slice(COEF_FILE_MAGIC);
        out.extend_from_slice(&(self.order_n as u32).to_le_bytes());
        out.extend_from_slice(&(self.df_bins as u32).to_le_bytes());
        out.extend_from_slice(&0u32.to_le_bytes());
        for c in &self.w {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 || &bytes[..4] != COEF_FILE_MAGIC {
            return Err(DspError::InvalidArgument("missing DFC1 header".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        let (order_n, df_bins) = (word(4), word(8));
        let body = &bytes[16..];
        if order_n == 0 || body.len() != order_n * df_bins * 8 {
            return Err(DspError::InvalidArgument(format!(
                "coefficient payload has {} bytes, expected {}",
                body.len(),
                order_n * df_bins * 8
            )));
        }
        let mut set = Self::zeros(&DfConfig { order_n, lookahead_l: 0, df_bins });
        for (k, chunk) in body.chunks_exact(8).enumerate() {
            let re = f32::from_le_bytes(chunk[..4].try_into().unwrap());
            let im = f32::from_le_bytes(chunk[4..].try_into().unwrap());
            if !(re.is_finite() && im.is_finite()) {
                return Err(DspError::NonFinite { bin: k / order_n });
            }
            // stored verbatim: re-clamping already clamped taps is not idempotent in f32
            set.w[k] = Complex32::new(re, im);
        }
        Ok(set)
    }
}

fn clamp_mag(w: Complex32, cap: f32) -> Complex32 {
    let m = w.norm();
    if m > cap {
        w * (cap / m)
    } else {
        w
    }
}

/// Result of the least-squares oracle: the taps and the bins whose normal matrix
/// stayed singular after loading (those fall back to passthrough taps).
#[derive(Debug, Clone)]
pub struct LsSolution {
    pub coefs: DfCoefSet,
    pub singular_bins: Vec<usize>,
}

/// Per-bin least-squares filter `min_w sum_t |S(t) - w^H x(t)|^2`, solved through the
/// loaded normal equations `(R + d I) w = p` with `R = sum x x^H`, `p = sum x S^*` and
/// `d = 1e-6 trace(R) / N`.
pub fn ls_oracle_coefs(noisy: &[Spectrum], clean: &[Spectrum], cfg: &DfConfig) -> Result<LsSolution> {
    let mut solver = LsSolver::new(cfg);
    let mut coefs = DfCoefSet::zeros(cfg);
    let mut singular_bins = Vec::new();
    solver.solve_into(noisy, clean, &mut coefs, |b| singular_bins.push(b))?;
    Ok(LsSolution { coefs, singular_bins })
}

/// Reusable scratch space for [`ls_oracle_coefs`].
pub struct LsSolver {
    cfg: DfConfig,
    r: Vec<Complex64>,
    p: Vec<Complex64>,
    l: Vec<Complex64>,
    y: Vec<Complex64>,
    x: Vec<Complex64>,
}

pub const DIAGONAL_LOADING: f64 = 1e-6;

impl LsSolver {
    pub fn new(cfg: &DfConfig) -> Self {
        let n = cfg.order_n;
        let z = Complex64::new(0.0, 0.0);
        Self { cfg: *cfg, r: vec![z; n * n], p: vec![z; n], l: vec![z; n * n], y: vec![z; n], x: vec![z; n] }
    }

    pub fn solve_into(
        &mut self,
        noisy: &[Spectrum],
        clean: &[Spectrum],
        coefs: &mut DfCoefSet,
        mut on_singular: impl FnMut(usize),
    ) -> Result<()> {
        let (n, l) = (self.cfg.order_n, self.cfg.lookahead_l);
        if noisy.len() != clean.len() {
            return Err(DspError::InvalidArgument("noisy and clean windows differ in length".into()));
        }
        if noisy.len() < 4 * n {
            return Err(DspError::InvalidArgument(format!(
                "window of {} frames is shorter than 4 * order ({})",
                noisy.len(),
                4 * n
            )));
        }
        let total = noisy.len();
        let zero = Complex64::new(0.0, 0.0);
        for f in 0..self.cfg.df_bins {
            self.r.fill(zero);
            self.p.fill(zero);
            for t in (n - 1 - l)..(total - l) {
                for i in 0..n {
                    self.x[i] = c64(noisy[t + l - i].bins[f]);
                }
                let s = c64(clean[t].bins[f]);
                for i in 0..n {
                    self.p[i] += self.x[i] * s.conj();
                    for j in 0..=i {
                        self.r[i * n + j] += self.x[i] * self.x[j].conj();
                    }
                }
            }
            for i in 0..n {
                for j in 0..i {
                    self.r[j * n + i] = self.r[i * n + j].conj();
                }
            }
            let trace: f64 = (0..n).map(|i| self.r[i * n + i].re).sum();
            let solved = trace > 0.0 && {
                let load = DIAGONAL_LOADING * trace / n as f64;
                for i in 0..n {
                    self.r[i * n + i].re += load;
                }
                cholesky_solve(&self.r, &self.p, n, &mut self.l, &mut self.y, &mut self.x)
            };
            if solved && self.x.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                for i in 0..n {
                    coefs.set(f, i, Complex32::new(self.x[i].re as f32, self.x[i].im as f32))?;
                }
            } else {
                coefs.set_bin_identity(f, l);
                on_singular(f);
            }
        }
        Ok(())
    }
}

/// Solves `A x = b` for Hermitian positive definite `A` (row-major, `n x n`).
/// Returns `false` if `A` is not numerically positive definite.
fn cholesky_solve(
    a: &[Complex64],
    b: &[Complex64],
    n: usize,
    l: &mut [Complex64],
    y: &mut [Complex64],
    x: &mut [Complex64],
) -> bool {
    let zero = Complex64::new(0.0, 0.0);
    l.fill(zero);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if s.re.is_nan() || s.re <= 0.0 {
                    return false;
                }
                l[i * n + i] = Complex64::new(s.re.sqrt(), 0.0);
            } else {
                l[i * n + j] = s / l[j * n + j].re;
            }
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i].re;
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i].conj() * x[k];
        }
        x[i] = s / l[i * n + i].re;
    }
    true
}
