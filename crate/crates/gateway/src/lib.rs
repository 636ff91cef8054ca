//! Live session gateway: JSON-over-WebSocket protocol, a per-connection
//! session state machine, NDJSON session records and offline replay.

pub mod backend;
pub mod outbox;
pub mod protocol;
pub mod record;
pub mod script;
pub mod server;
pub mod session;

pub use backend::{Backend, SimBackend};
pub use protocol::{MessageKind, WireMessage, PROTOCOL_VERSION};
pub use record::{replay_session, SessionRecord};
pub use server::{ServerConfig, LOG_DIR_ENV};
pub use session::{Phase, Session};
