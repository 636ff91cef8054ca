//! Scripted clients: a synthetic pilot speaking the wire protocol to an
//! in-process session, with seeded delivery jitter. Used to exercise
//! recording and replay without a browser.

use hapticopter_core::haptics::HapticCue;
use hapticopter_core::pilot::{Observation, Pilot, PilotPolicy};
use hapticopter_core::runner::LoopConfig;
use hapticopter_core::trial::TrialLog;
use hapticopter_core::world::Scenario;
use hapticopter_core::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::SimBackend;
use crate::protocol::{ClutchInput, CueUpdate, Hello, HandInput, MessageKind, StateUpdate, WireMessage, PROTOCOL_VERSION};
use crate::record::SessionRecord;
use crate::session::Session;

#[derive(Debug, Clone)]
pub struct ScriptedSession {
    pub log: TrialLog<f64>,
    pub record: SessionRecord,
    /// Messages the session sent back, in order.
    pub outbound: usize,
}

/// Flies `policy` through `scenario` for `ticks` ticks over the protocol.
///
/// Client messages go through JSON text both ways. Seeded jitter holds some
/// messages back a tick, shuffles what is sent within a tick, and inserts
/// occasional input dropouts long enough to trip the staleness guard.
pub fn run_scripted_session(
    scenario: &Scenario<f64>,
    config: &LoopConfig<f64>,
    policy: &PilotPolicy<f64>,
    ticks: u64,
) -> Result<ScriptedSession> {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed.rotate_left(17) ^ 0x005e_5510);
    let mut session = Session::new(policy.seed, policy.seed, SimBackend::new(scenario, config)?, true);
    let mut pilot = Pilot::new(policy, scenario, config.mapping.scale)?;
    let dt = config.sim.dt;

    let mut seq = 0u64;
    let mut next = |kind, t: f64, payload: serde_json::Value| {
        seq += 1;
        WireMessage::new(kind, seq, t, payload)
    };
    let send = |session: &mut Session<SimBackend>, m: &WireMessage| -> Result<usize> {
        let replies = session.receive(WireMessage::parse(&m.to_json())?);
        if let Some(e) = replies.iter().find(|r| r.kind == MessageKind::Error) {
            return Err(Error::Parse(format!("session refused seq {}: {}", m.seq, e.payload)));
        }
        Ok(replies.len())
    };

    let mut outbound = send(&mut session, &next(MessageKind::Hello, 0.0, serde_json::to_value(Hello { version: PROTOCOL_VERSION })?))?;
    let mut observed = (scenario.spawn, 0.0);
    let mut cue = HapticCue::silent(config.cue.max_intensity);
    let mut held_back: Vec<WireMessage> = Vec::new();
    let mut dropout = 0u32;

    for k in 0..ticks {
        let t = k as f64 * dt;
        let obs = Observation {
            position: observed.0,
            time: observed.1,
        };
        let hand = pilot.step(&obs, &cue, dt);

        let mut batch = std::mem::take(&mut held_back);
        if k == 0 {
            batch.push(next(MessageKind::ClutchInput, t, serde_json::to_value(ClutchInput { engaged: true })?));
        }
        if dropout > 0 {
            dropout -= 1;
        } else if rng.random_bool(0.002) {
            dropout = rng.random_range(31..60);
        } else {
            let m = next(MessageKind::HandInput, t, serde_json::to_value(HandInput { position: hand.position })?);
            if rng.random_bool(0.1) {
                held_back.push(m);
            } else {
                batch.push(m);
            }
        }
        if batch.len() > 1 && rng.random_bool(0.5) {
            batch.reverse();
        }
        for m in &batch {
            outbound += send(&mut session, m)?;
        }

        for m in session.tick()? {
            outbound += 1;
            match m.kind {
                MessageKind::StateUpdate => {
                    let s: StateUpdate = m.payload_as()?;
                    observed = (s.position, s.time);
                }
                MessageKind::CueUpdate => {
                    let c: CueUpdate = m.payload_as()?;
                    cue = HapticCue {
                        intensities: c.intensities,
                        max: c.max,
                    };
                }
                _ => {}
            }
        }
    }
    let record = session.finish_record().expect("recording was enabled");
    Ok(ScriptedSession {
        log: session.into_backend().into_log(),
        record,
        outbound,
    })
}
