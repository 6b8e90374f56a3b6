//! Live control and metering for a running engine over WebSocket.

pub mod protocol;
pub mod service;
pub mod source;

pub use protocol::{ControlMessage, ErrorCode, ServerEvent, PROTOCOL_VERSION};
pub use service::{Health, Service, ServiceError};
pub use source::{HopSource, LoopSource};
