//! Real-time two-stage speech enhancement: ERB envelope gains followed by a
//! multi-frame complex deep filter on the low band, with SNR-driven stage gating.

pub mod deep_filter;
pub mod engine;
pub mod erb;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod signal;
pub mod spectral;
pub mod stage_control;

pub use num_complex::{Complex32, Complex64};

pub use deep_filter::{DfCoefSet, DfConfig, FrameHandle, MultiFrameBuffer};
pub use engine::{
    measure_rtf, ControlHandle, Engine, EngineConfig, MeterFrame, MeterReceiver, OfflineOutput, RtfReport,
    StageOverrides, StageTimes,
};
pub use erb::{ErbGains, ErbLayout};
pub use error::{DspError, EngineError};
pub use estimators::{Estimator, EstimatorKind, SnrEstimate};
pub use spectral::{latency_samples, Spectrum, StftConfig};
pub use stage_control::{AttenLimit, GateThresholds, StageDecision};
