//! JSON wire format. Every message is an envelope `{kind, seq, t, payload}`
//! whose payload shape depends on `kind`.

use hapticopter_core::trial::TrialEvent;
use hapticopter_core::world::{Scenario, Task};
use hapticopter_core::{Error, Result, Vec3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Protocol version negotiated by `Hello`.
pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Hello,
    LoadScenario,
    HandInput,
    ClutchInput,
    StateUpdate,
    CueUpdate,
    Event,
    ResetGoal,
    Error,
}

impl MessageKind {
    /// Kinds a client may send.
    pub fn is_inbound(self) -> bool {
        matches!(
            self,
            MessageKind::Hello
                | MessageKind::LoadScenario
                | MessageKind::HandInput
                | MessageKind::ClutchInput
                | MessageKind::ResetGoal
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireMessage {
    pub kind: MessageKind,
    pub seq: u64,
    /// Sender clock (s).
    pub t: f64,
    #[serde(default)]
    pub payload: Value,
}

impl WireMessage {
    pub fn new(kind: MessageKind, seq: u64, t: f64, payload: impl Serialize) -> Self {
        Self {
            kind,
            seq,
            t,
            payload: serde_json::to_value(payload).expect("payload serializes"),
        }
    }

    /// Parses an envelope. Unknown kinds and missing fields are rejected;
    /// the payload is checked later against the kind.
    pub fn parse(text: &str) -> Result<Self> {
        let m: WireMessage = serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad envelope: {e}")))?;
        if !m.t.is_finite() {
            return Err(Error::Parse("envelope time must be finite".into()));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }

    pub fn payload_as<T: DeserializeOwned>(&self) -> Result<T> {
        serde_json::from_value(self.payload.clone())
            .map_err(|e| Error::Parse(format!("{:?} payload: {e}", self.kind)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hello {
    pub version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HelloAck {
    pub version: u32,
    pub session: u64,
    pub dt: f64,
    pub scenario: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSource {
    Builtin(Task),
    Inline(Box<Scenario<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HandInput {
    /// Operator-frame hand position (m).
    pub position: Vec3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutchInput {
    pub engaged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateUpdate {
    pub tick: u64,
    /// Simulation time (s).
    pub time: f64,
    pub position: Vec3<f64>,
    pub velocity: Vec3<f64>,
    pub goal: Vec3<f64>,
    pub clutch_engaged: bool,
    /// No hand input recently; the goal is frozen.
    pub stale: bool,
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CueUpdate {
    pub tick: u64,
    /// Indexed front, back, left, right, up, down.
    pub intensities: [f64; 6],
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReply {
    pub message: String,
    /// The session closes after this error.
    pub fatal: bool,
    /// Sequence number of the offending message, when known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
}

/// Decoded client message.
#[derive(Debug, Clone, PartialEq)]
pub enum Inbound {
    Hello(Hello),
    LoadScenario(ScenarioSource),
    HandInput(HandInput),
    ClutchInput(ClutchInput),
    ResetGoal,
}

impl Inbound {
    pub fn decode(msg: &WireMessage) -> Result<Self> {
        Ok(match msg.kind {
            MessageKind::Hello => Inbound::Hello(msg.payload_as()?),
            MessageKind::LoadScenario => Inbound::LoadScenario(msg.payload_as()?),
            MessageKind::HandInput => {
                let h: HandInput = msg.payload_as()?;
                if !h.position.is_finite() {
                    return Err(Error::Parse("hand position must be finite".into()));
                }
                Inbound::HandInput(h)
            }
            MessageKind::ClutchInput => Inbound::ClutchInput(msg.payload_as()?),
            MessageKind::ResetGoal => {
                if !(msg.payload.is_null() || msg.payload.as_object().is_some_and(|o| o.is_empty())) {
                    return Err(Error::Parse("ResetGoal takes no payload".into()));
                }
                Inbound::ResetGoal
            }
            other => return Err(Error::Parse(format!("{other:?} is not a client message"))),
        })
    }
}

/// Payload of an `Event` message.
pub type EventPayload = TrialEvent<f64>;
