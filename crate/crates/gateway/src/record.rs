//! Session records as newline-delimited JSON: one header line, one line per
//! consumed client message tagged with the tick it was applied on, and an
//! end line carrying the tick count.

use std::io::{BufRead, Write};
use std::path::Path;

use hapticopter_core::runner::LoopConfig;
use hapticopter_core::trial::TrialLog;
use hapticopter_core::world::Scenario;
use hapticopter_core::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::backend::SimBackend;
use crate::protocol::WireMessage;
use crate::session::Session;

pub const RECORD_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordHeader {
    pub format_version: u32,
    pub session: u64,
    pub seed: u64,
    pub scenario: Scenario<f64>,
    pub config: LoopConfig<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEntry {
    /// Session tick on which the message took effect.
    pub tick: u64,
    pub msg: WireMessage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordEnd {
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub header: RecordHeader,
    pub entries: Vec<RecordEntry>,
    /// `None` while the session is still running.
    pub end: Option<RecordEnd>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Marker<T> {
    Header(T),
    End(T),
}

impl SessionRecord {
    pub fn new(header: RecordHeader) -> Self {
        Self {
            header,
            entries: Vec::new(),
            end: None,
        }
    }

    pub fn write_ndjson<W: Write>(&self, mut out: W) -> Result<()> {
        let end = self
            .end
            .ok_or_else(|| Error::InputDomain("record has no end marker".into()))?;
        serde_json::to_writer(&mut out, &Marker::Header(&self.header))?;
        out.write_all(b"\n")?;
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut out, &Marker::End(end))?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn to_ndjson(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf)?;
        Ok(String::from_utf8(buf).expect("json is utf-8"))
    }

    /// Parses a record. Errors name the offending line (0 = header).
    pub fn read_ndjson<R: BufRead>(input: R) -> Result<Self> {
        let at = |i: usize, e: &dyn std::fmt::Display| Error::Parse(format!("record line {i}: {e}"));
        let mut lines = input.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));

        let (i, first) = lines.next().ok_or_else(|| Error::Parse("empty record".into()))?;
        let first = first.map_err(|e| at(i, &e))?;
        let header = match serde_json::from_str::<Marker<RecordHeader>>(&first).map_err(|e| at(i, &e))? {
            Marker::Header(h) => h,
            Marker::End(_) => return Err(at(i, &"expected a header")),
        };
        if header.format_version != RECORD_FORMAT_VERSION {
            return Err(at(i, &format!("unsupported format version {}", header.format_version)));
        }

        let mut record = SessionRecord::new(header);
        for (i, line) in lines {
            let line = line.map_err(|e| at(i, &e))?;
            if record.end.is_some() {
                return Err(at(i, &"content after end marker"));
            }
            let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| at(i, &e))?;
            if value.get("end").is_some() {
                match serde_json::from_value::<Marker<RecordEnd>>(value).map_err(|e| at(i, &e))? {
                    Marker::End(end) => record.end = Some(end),
                    Marker::Header(_) => unreachable!("keyed by `end`"),
                }
                continue;
            }
            let entry: RecordEntry = serde_json::from_value(value).map_err(|e| at(i, &e))?;
            if record.entries.last().is_some_and(|p| entry.tick < p.tick || entry.msg.seq <= p.msg.seq) {
                return Err(at(i, &"entries out of order"));
            }
            record.entries.push(entry);
        }
        let end = record.end.ok_or_else(|| Error::Parse("record has no end marker (truncated?)".into()))?;
        if let Some(last) = record.entries.last() {
            if last.tick >= end.ticks {
                return Err(Error::Parse(format!(
                    "entry at tick {} lies beyond the recorded {} ticks",
                    last.tick, end.ticks
                )));
            }
        }
        Ok(record)
    }

    pub fn from_ndjson(text: &str) -> Result<Self> {
        Self::read_ndjson(text.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_ndjson(std::io::BufReader::new(f))
    }

    /// Writes to a sibling `.part` file first, so readers never see a
    /// half-written record.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let part = path.with_extension("part");
        let f = std::fs::File::create(&part)?;
        self.write_ndjson(std::io::BufWriter::new(f))?;
        std::fs::rename(&part, path)?;
        Ok(())
    }
}

/// Re-runs a recorded session offline, as fast as possible, and returns the
/// trial log of the scenario that was loaded when the session ended.
pub fn replay_session(record: &SessionRecord) -> Result<TrialLog<f64>> {
    let end = record
        .end
        .ok_or_else(|| Error::InputDomain("cannot replay a record without an end marker".into()))?;
    let h = &record.header;
    let backend = SimBackend::new(&h.scenario, &h.config)?;
    let mut session = Session::established(h.session, h.seed, backend, false);
    let mut entries = record.entries.iter().peekable();
    for tick in 0..end.ticks {
        while let Some(e) = entries.next_if(|e| e.tick == tick) {
            let replies = session.receive(e.msg.clone());
            if let Some(err) = replies.iter().find(|m| m.kind == crate::protocol::MessageKind::Error) {
                return Err(Error::Parse(format!("record entry seq {} rejected: {}", e.msg.seq, err.payload)));
            }
        }
        session.tick()?;
    }
    Ok(session.into_backend().into_log())
}
