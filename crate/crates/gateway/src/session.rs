//! Per-connection protocol state machine. Purely synchronous: the server
//! calls [`Session::receive`] as messages arrive and [`Session::tick`] on
//! its clock, and replay does the same without a socket.

use std::collections::BTreeMap;

use hapticopter_core::runner::TickInput;
use hapticopter_core::teleop::{HandPose, ZeroOrderHold};
use hapticopter_core::world::{build_scenario, ScenarioParams};
use hapticopter_core::Result;

use crate::backend::Backend;
use crate::protocol::{
    CueUpdate, ErrorReply, HelloAck, Inbound, MessageKind, ScenarioSource, StateUpdate, WireMessage,
    PROTOCOL_VERSION,
};
use crate::record::{RecordEnd, RecordEntry, RecordHeader, SessionRecord, RECORD_FORMAT_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    AwaitingHello,
    Established,
    Closed,
}

pub struct Session<B> {
    id: u64,
    seed: u64,
    phase: Phase,
    backend: B,
    /// Highest inbound seq already consumed.
    consumed: Option<u64>,
    /// Accepted messages waiting for the next tick, keyed by seq.
    pending: BTreeMap<u64, (WireMessage, Inbound)>,
    out_seq: u64,
    ticks: u64,
    hold: ZeroOrderHold<f64>,
    recording: bool,
    record: Option<SessionRecord>,
}

impl<B: Backend> Session<B> {
    /// A session waiting for the client's `Hello`.
    pub fn new(id: u64, seed: u64, backend: B, recording: bool) -> Self {
        Self {
            id,
            seed,
            phase: Phase::AwaitingHello,
            backend,
            consumed: None,
            pending: BTreeMap::new(),
            out_seq: 0,
            ticks: 0,
            hold: ZeroOrderHold::new(),
            recording,
            record: None,
        }
    }

    /// A session past the handshake, as replay starts.
    pub fn established(id: u64, seed: u64, backend: B, recording: bool) -> Self {
        let mut s = Self::new(id, seed, backend, recording);
        s.establish();
        s
    }

    fn establish(&mut self) {
        self.phase = Phase::Established;
        if self.recording {
            self.record = Some(SessionRecord::new(RecordHeader {
                format_version: RECORD_FORMAT_VERSION,
                session: self.id,
                seed: self.seed,
                scenario: self.backend.scenario().clone(),
                config: self.backend.config().clone(),
            }));
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn into_backend(self) -> B {
        self.backend
    }

    /// The record so far, closed with an end marker at the current tick.
    pub fn finish_record(&self) -> Option<SessionRecord> {
        self.record.clone().map(|mut r| {
            r.end = Some(RecordEnd { ticks: self.ticks });
            r
        })
    }

    fn out(&mut self, kind: MessageKind, payload: impl serde::Serialize) -> WireMessage {
        self.out_seq += 1;
        WireMessage::new(kind, self.out_seq, self.backend.state().time, payload)
    }

    pub fn error(&mut self, message: impl Into<String>, seq: Option<u64>, fatal: bool) -> WireMessage {
        let payload = ErrorReply {
            message: message.into(),
            fatal,
            seq,
        };
        self.out(MessageKind::Error, payload)
    }

    /// Accepts one client message. Returns immediate replies (handshake
    /// acknowledgement or errors); inputs take effect on the next tick.
    pub fn receive(&mut self, msg: WireMessage) -> Vec<WireMessage> {
        let seq = Some(msg.seq);
        match self.phase {
            Phase::Closed => Vec::new(),
            _ if !msg.kind.is_inbound() => vec![self.error(format!("{:?} is not a client message", msg.kind), seq, false)],
            Phase::AwaitingHello if msg.kind != MessageKind::Hello => {
                vec![self.error("not established", seq, false)]
            }
            Phase::AwaitingHello => match Inbound::decode(&msg) {
                Ok(Inbound::Hello(h)) if h.version == PROTOCOL_VERSION => {
                    self.consumed = Some(msg.seq);
                    self.establish();
                    let ack = HelloAck {
                        version: PROTOCOL_VERSION,
                        session: self.id,
                        dt: self.backend.config().sim.dt,
                        scenario: self.backend.scenario().task,
                    };
                    vec![self.out(MessageKind::Hello, ack)]
                }
                Ok(Inbound::Hello(h)) => {
                    self.phase = Phase::Closed;
                    vec![self.error(
                        format!("protocol version {} not supported (server speaks {PROTOCOL_VERSION})", h.version),
                        seq,
                        true,
                    )]
                }
                Ok(_) => unreachable!("kind checked above"),
                Err(e) => vec![self.error(e.to_string(), seq, false)],
            },
            Phase::Established => {
                if msg.kind == MessageKind::Hello {
                    return vec![self.error("already established", seq, false)];
                }
                if self.consumed.is_some_and(|c| msg.seq <= c) || self.pending.contains_key(&msg.seq) {
                    return vec![self.error(format!("seq {} already used", msg.seq), seq, false)];
                }
                match Inbound::decode(&msg) {
                    Ok(inbound) => {
                        self.pending.insert(msg.seq, (msg, inbound));
                        Vec::new()
                    }
                    Err(e) => vec![self.error(e.to_string(), seq, false)],
                }
            }
        }
    }

    /// Applies queued inputs in seq order, advances the backend one step
    /// and returns `Event`s followed by `StateUpdate` and `CueUpdate`.
    pub fn tick(&mut self) -> Result<Vec<WireMessage>> {
        if self.phase != Phase::Established {
            return Ok(Vec::new());
        }
        let mut replies = Vec::new();
        let mut clutch = None;
        for (seq, (msg, inbound)) in std::mem::take(&mut self.pending) {
            self.consumed = Some(seq);
            if let Some(r) = &mut self.record {
                r.entries.push(RecordEntry { tick: self.ticks, msg });
            }
            let now = self.backend.state().time;
            match inbound {
                Inbound::HandInput(h) => self.hold.push(HandPose::new(h.position, now))?,
                Inbound::ClutchInput(c) => clutch = Some(c.engaged),
                Inbound::ResetGoal => self.backend.reset_goal(),
                Inbound::LoadScenario(src) => {
                    let loaded = match src {
                        ScenarioSource::Builtin(task) => build_scenario(task, &ScenarioParams::default()),
                        ScenarioSource::Inline(s) => s.validate().map(|_| *s),
                    }
                    .and_then(|s| self.backend.load(s));
                    match loaded {
                        Ok(()) => {
                            self.hold = ZeroOrderHold::new();
                            clutch = None;
                        }
                        Err(e) => replies.push(self.error(format!("cannot load scenario: {e}"), Some(seq), false)),
                    }
                }
                Inbound::Hello(_) => unreachable!("rejected on receive"),
            }
        }

        let now = self.backend.state().time;
        let stale = self.hold.is_stale(now);
        let input = TickInput {
            hand: self.hold.latest().copied(),
            clutch,
            stale,
        };
        let report = self.backend.step(&input)?;
        self.ticks += 1;

        for e in &report.events {
            replies.push(self.out(MessageKind::Event, e));
        }
        let s = self.backend.state();
        let state = StateUpdate {
            tick: self.ticks,
            time: s.time,
            position: s.position,
            velocity: s.velocity,
            goal: self.backend.goal(),
            clutch_engaged: self.backend.clutch_engaged(),
            stale,
            complete: self.backend.is_complete(),
        };
        let cue = self.backend.cue();
        let cue = CueUpdate {
            tick: self.ticks,
            intensities: cue.intensities,
            max: cue.max,
        };
        replies.push(self.out(MessageKind::StateUpdate, state));
        replies.push(self.out(MessageKind::CueUpdate, cue));
        Ok(replies)
    }
}
