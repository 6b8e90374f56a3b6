//! Newline-delimited JSON control protocol.
//!
//! Every object carries a snake_case `"type"` discriminator. Each client message is
//! answered by exactly one `config_ack` or `error`; `meter` events flow after `subscribe`.

use dfrt_core::engine::{ControlHandle, EngineConfig, MeterFrame};
use dfrt_core::error::EngineError;
use dfrt_core::estimators::EstimatorKind;
use dfrt_core::stage_control::{AttenLimit, GateThresholds};
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_METER_HZ: f64 = 10.0;
/// Meters are produced once per hop, so faster subscriptions would only repeat frames.
pub const MAX_METER_HZ: f64 = 100.0;

const MESSAGE_TYPES: [&str; 6] =
    ["set_atten", "set_thresholds", "set_stages", "set_estimator", "get_config", "subscribe"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlMessage {
    SetAtten {
        db: f32,
    },
    SetThresholds {
        silence_below_db: f32,
        df_off_above_db: f32,
    },
    SetStages {
        erb: bool,
        df: bool,
    },
    SetEstimator {
        kind: EstimatorKind,
    },
    GetConfig,
    Subscribe {
        #[serde(default = "default_meter_hz")]
        meter_hz: f64,
    },
}

fn default_meter_hz() -> f64 {
    DEFAULT_METER_HZ
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not a JSON object with a string `type`.
    Malformed,
    UnknownType,
    /// Known type with missing or ill-typed fields.
    BadFields,
    /// Well-formed but violates a config invariant.
    InvalidValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerEvent {
    ConfigAck { protocol: u32, config: EngineConfig, meter_hz: Option<f64> },
    Meter(MeterFrame),
    Error { code: ErrorCode, message: String },
}

impl ServerEvent {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        ServerEvent::Error { code, message: message.into() }
    }

    pub fn ack(config: EngineConfig, meter_hz: Option<f64>) -> Self {
        ServerEvent::ConfigAck { protocol: PROTOCOL_VERSION, config, meter_hz }
    }

    /// One NDJSON line including the trailing newline.
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("events always serialize");
        s.push('\n');
        s
    }
}

/// Parses one JSON object, distinguishing unknown kinds from malformed known ones.
pub fn parse_message(line: &str) -> Result<ControlMessage, ServerEvent> {
    let value: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| ServerEvent::error(ErrorCode::Malformed, format!("invalid JSON: {e}")))?;
    let Some(kind) = value.get("type").and_then(|t| t.as_str()).map(str::to_owned) else {
        return Err(ServerEvent::error(ErrorCode::Malformed, "message needs a string \"type\" field"));
    };
    if !MESSAGE_TYPES.contains(&kind.as_str()) {
        return Err(ServerEvent::error(
            ErrorCode::UnknownType,
            format!("unknown message type {kind:?} (protocol {PROTOCOL_VERSION})"),
        ));
    }
    serde_json::from_value(value).map_err(|e| ServerEvent::error(ErrorCode::BadFields, format!("{kind}: {e}")))
}

fn rejected(e: EngineError) -> ServerEvent {
    ServerEvent::error(ErrorCode::InvalidValue, e.to_string())
}

/// Validates and applies one message. `meter_hz` is the client's subscription, updated
/// on `subscribe`. Invalid messages leave both the engine config and `meter_hz` unchanged.
pub fn apply(msg: &ControlMessage, control: &ControlHandle, meter_hz: &mut Option<f64>) -> ServerEvent {
    let result = match *msg {
        ControlMessage::SetAtten { db } => {
            AttenLimit::new(db).map_err(EngineError::from).and_then(|atten| control.modify(|c| c.atten = atten))
        }
        ControlMessage::SetThresholds { silence_below_db, df_off_above_db } => {
            GateThresholds::new(silence_below_db, df_off_above_db)
                .map_err(EngineError::from)
                .and_then(|th| control.modify(|c| c.thresholds = th))
        }
        ControlMessage::SetStages { erb, df } => control.modify(|c| {
            c.stages.erb_enabled = erb;
            c.stages.df_enabled = df;
        }),
        ControlMessage::SetEstimator { kind } => control.modify(|c| c.estimator_kind = kind),
        ControlMessage::GetConfig => Ok(control.snapshot()),
        ControlMessage::Subscribe { meter_hz: hz } => {
            if !(hz.is_finite() && hz > 0.0 && hz <= MAX_METER_HZ) {
                return ServerEvent::error(
                    ErrorCode::InvalidValue,
                    format!("meter_hz must be in (0, {MAX_METER_HZ}], got {hz}"),
                );
            }
            *meter_hz = Some(hz);
            Ok(control.snapshot())
        }
    };
    match result {
        Ok(cfg) => ServerEvent::ack(cfg, *meter_hz),
        Err(e) => rejected(e),
    }
}
