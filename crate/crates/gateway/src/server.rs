//! WebSocket endpoint `/session`. Each connection owns one simulation loop
//! paced by the wall clock; a separate writer task drains the client's
//! outbox so a slow reader never stalls the simulation.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use futures_util::{SinkExt, StreamExt};
use hapticopter_core::runner::LoopConfig;
use hapticopter_core::world::Scenario;
use tokio::net::TcpListener;
use tokio::sync::Notify;
use tokio::time::MissedTickBehavior;

use crate::backend::SimBackend;
use crate::outbox::Outbox;
use crate::protocol::WireMessage;
use crate::session::{Phase, Session};

/// Environment variable naming the directory session records are written to.
pub const LOG_DIR_ENV: &str = "HAPTICOPTER_LOG_DIR";

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub scenario: Scenario<f64>,
    /// Duration limit used for the trial log of each session (s).
    pub duration_limit: f64,
    /// Ticks per wall-clock second.
    pub tick_hz: f64,
    pub outbox_capacity: usize,
    /// Where finished session records go; `None` disables recording.
    pub log_dir: Option<PathBuf>,
}

impl ServerConfig {
    pub fn new(scenario: Scenario<f64>) -> Self {
        Self {
            scenario,
            duration_limit: 600.0,
            tick_hz: 120.0,
            outbox_capacity: 64,
            log_dir: None,
        }
    }

    /// Picks up the record directory from [`LOG_DIR_ENV`].
    pub fn with_env(mut self) -> Self {
        self.log_dir = std::env::var_os(LOG_DIR_ENV).map(PathBuf::from);
        self
    }
}

struct Shared {
    config: ServerConfig,
    next_id: AtomicU64,
}

pub fn router(config: ServerConfig) -> Router {
    let shared = Arc::new(Shared {
        config,
        next_id: AtomicU64::new(1),
    });
    Router::new().route("/session", get(upgrade)).with_state(shared)
}

/// Serves until the listener fails.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> std::io::Result<()> {
    axum::serve(listener, router(config)).await
}

/// Binds `addr`, then serves in the background. Returns the bound address.
pub async fn spawn(addr: SocketAddr, config: ServerConfig) -> std::io::Result<SocketAddr> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(e) = serve(listener, config).await {
            eprintln!("gateway stopped: {e}");
        }
    });
    Ok(local)
}

async fn upgrade(ws: WebSocketUpgrade, State(shared): State<Arc<Shared>>) -> Response {
    let id = shared.next_id.fetch_add(1, Ordering::Relaxed);
    ws.on_upgrade(move |socket| run_session(socket, shared, id))
}

async fn run_session(socket: WebSocket, shared: Arc<Shared>, id: u64) {
    let cfg = &shared.config;
    let backend = match LoopConfig::for_scenario(&cfg.scenario, cfg.duration_limit)
        .and_then(|lc| SimBackend::new(&cfg.scenario, &lc))
    {
        Ok(b) => b,
        Err(e) => {
            eprintln!("session {id}: {e}");
            return;
        }
    };
    let mut session = Session::new(id, 0, backend, cfg.log_dir.is_some());
    let (mut sink, mut stream) = socket.split();

    let outbox = Arc::new(Mutex::new(Outbox::new(cfg.outbox_capacity)));
    let wake = Arc::new(Notify::new());
    let closing = Arc::new(std::sync::atomic::AtomicBool::new(false));

    let writer = {
        let (outbox, wake, closing) = (outbox.clone(), wake.clone(), closing.clone());
        tokio::spawn(async move {
            loop {
                wake.notified().await;
                let batch = outbox.lock().expect("outbox lock").drain();
                for m in batch {
                    if sink.send(Message::Text(m.to_json().into())).await.is_err() {
                        return;
                    }
                }
                if closing.load(Ordering::Acquire) && outbox.lock().expect("outbox lock").is_empty() {
                    let _ = sink.close().await;
                    return;
                }
            }
        })
    };
    let deliver = |msgs: Vec<WireMessage>| {
        if !msgs.is_empty() {
            let mut o = outbox.lock().expect("outbox lock");
            for m in msgs {
                o.push(m);
            }
            drop(o);
            wake.notify_one();
        }
    };

    let mut clock = tokio::time::interval(Duration::from_secs_f64(1.0 / cfg.tick_hz));
    clock.set_missed_tick_behavior(MissedTickBehavior::Delay);
    loop {
        tokio::select! {
            biased;
            _ = clock.tick() => {
                match session.tick() {
                    Ok(out) => deliver(out),
                    Err(e) => {
                        let e = session.error(format!("simulation error: {e}"), None, true);
                        deliver(vec![e]);
                        break;
                    }
                }
            }
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let replies = match WireMessage::parse(text.as_str()) {
                        Ok(msg) => session.receive(msg),
                        Err(e) => vec![session.error(e.to_string(), None, false)],
                    };
                    deliver(replies);
                    if session.phase() == Phase::Closed {
                        break;
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let e = session.error("binary frames are not supported", None, false);
                    deliver(vec![e]);
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    closing.store(true, Ordering::Release);
    wake.notify_one();
    let _ = writer.await;

    if let (Some(dir), Some(record)) = (&cfg.log_dir, session.finish_record()) {
        let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
        let path = dir.join(format!("session-{id}-{stamp}.ndjson"));
        if let Err(e) = std::fs::create_dir_all(dir).map_err(Into::into).and_then(|_| record.save(&path)) {
            eprintln!("session {id}: could not write {}: {e}", path.display());
        }
    }
}
