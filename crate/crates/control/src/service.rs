//! The live service: a real-time audio thread, one control actor, a meter pump and
//! one WebSocket task per client.
//!
//! ```text
//! source -> audio thread (Engine) --meter queue--> pump --watch--> client tasks --> WS
//! client tasks --mpsc--> control actor --ControlHandle--> Engine (next frame)
//! ```
//!
//! The audio thread never waits on the network: meters leave it through a bounded
//! drop-oldest queue and config arrives as whole snapshots.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::{Json, Router};
use dfrt_core::engine::{ControlHandle, Engine, EngineConfig, MeterFrame};
use dfrt_core::error::EngineError;
use futures::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot, watch};
use tokio::time::{interval, Interval, MissedTickBehavior};

use crate::protocol::{apply, parse_message, ControlMessage, ErrorCode, ServerEvent, PROTOCOL_VERSION};
use crate::source::HopSource;

/// How often the pump moves meters from the engine queue to clients.
const PUMP_PERIOD: Duration = Duration::from_millis(5);
/// Past this much lag the audio clock restarts instead of bursting to catch up.
const MAX_LAG: Duration = Duration::from_millis(500);

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("bind {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error("audio thread: {0}")]
    Thread(std::io::Error),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Body of `GET /healthz`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub protocol: u32,
    pub source: String,
    pub hops_processed: u64,
    pub non_finite_hops: u64,
    pub uptime_s: f64,
    pub clients: usize,
    pub latency_samples: usize,
    pub config: EngineConfig,
    pub last_meter: Option<MeterFrame>,
}

struct Stats {
    started: Instant,
    hops: AtomicU64,
    non_finite: AtomicU64,
    clients: AtomicUsize,
    audio_running: AtomicBool,
    source: String,
    latency_samples: usize,
}

type ActorRequest = (ControlMessage, Option<f64>, oneshot::Sender<(ServerEvent, Option<f64>)>);

#[derive(Clone)]
struct AppState {
    actor: mpsc::Sender<ActorRequest>,
    meters: watch::Receiver<Option<MeterFrame>>,
    shutdown: watch::Receiver<bool>,
    control: ControlHandle,
    stats: Arc<Stats>,
}

pub struct Service {
    addr: SocketAddr,
    control: ControlHandle,
    stop_audio: Arc<AtomicBool>,
    shutdown: watch::Sender<bool>,
    audio: Option<thread::JoinHandle<()>>,
    tasks: Vec<tokio::task::JoinHandle<()>>,
}

impl Service {
    /// Binds `bind`, starts the audio thread on `source` and serves `/control` and `/healthz`.
    /// Must be called inside a tokio runtime.
    pub async fn start(engine: Engine, source: Box<dyn HopSource>, bind: SocketAddr) -> Result<Self, ServiceError> {
        let listener =
            tokio::net::TcpListener::bind(bind).await.map_err(|source| ServiceError::Bind { addr: bind, source })?;
        let addr = listener.local_addr().map_err(|source| ServiceError::Bind { addr: bind, source })?;
        let control = engine.control();
        let meter_queue = engine.meters();
        let stats = Arc::new(Stats {
            started: Instant::now(),
            hops: AtomicU64::new(0),
            non_finite: AtomicU64::new(0),
            clients: AtomicUsize::new(0),
            audio_running: AtomicBool::new(true),
            source: source.describe(),
            latency_samples: engine.latency_samples(),
        });
        let stop_audio = Arc::new(AtomicBool::new(false));
        let audio = {
            let (stop, stats) = (stop_audio.clone(), stats.clone());
            thread::Builder::new()
                .name("dfrt-audio".into())
                .spawn(move || audio_loop(engine, source, &stop, &stats))
                .map_err(ServiceError::Thread)?
        };

        let (shutdown_tx, shutdown_rx) = watch::channel(false);
        let (meter_tx, meter_rx) = watch::channel(None);
        let (actor_tx, actor_rx) = mpsc::channel(64);
        let mut tasks = vec![
            tokio::spawn(control_actor(actor_rx, control.clone())),
            tokio::spawn(meter_pump(meter_queue, meter_tx, shutdown_rx.clone())),
        ];

        let state = AppState {
            actor: actor_tx,
            meters: meter_rx,
            shutdown: shutdown_rx.clone(),
            control: control.clone(),
            stats,
        };
        let app = Router::new().route("/control", get(control_ws)).route("/healthz", get(healthz)).with_state(state);
        let mut stop = shutdown_rx;
        tasks.push(tokio::spawn(async move {
            let graceful = async move { stopped(&mut stop).await };
            if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(graceful).await {
                log::error!("server stopped: {e}");
            }
        }));
        log::info!("serving on {addr}");
        Ok(Self { addr, control, stop_audio, shutdown: shutdown_tx, audio: Some(audio), tasks })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn control(&self) -> ControlHandle {
        self.control.clone()
    }

    /// Stops accepting clients, closes open sockets and joins the audio thread.
    pub async fn shutdown(mut self) {
        let _ = self.shutdown.send(true);
        self.stop_audio.store(true, Ordering::Release);
        for t in self.tasks.drain(..) {
            let _ = tokio::time::timeout(Duration::from_secs(2), t).await;
        }
        if let Some(a) = self.audio.take() {
            let _ = tokio::task::spawn_blocking(move || a.join()).await;
        }
    }
}

impl Drop for Service {
    fn drop(&mut self) {
        let _ = self.shutdown.send(true);
        self.stop_audio.store(true, Ordering::Release);
    }
}

fn audio_loop(mut engine: Engine, mut source: Box<dyn HopSource>, stop: &AtomicBool, stats: &Stats) {
    let hop = engine.hop_len();
    let hop_dur = Duration::from_secs_f64(hop as f64 / engine.current_config().stft.sample_rate_hz as f64);
    let mut input = vec![0.0f32; hop];
    let mut output = vec![0.0f32; hop];
    let mut deadline = Instant::now();
    while !stop.load(Ordering::Acquire) {
        if !source.next_hop(&mut input) {
            log::info!("source exhausted");
            break;
        }
        match engine.process_hop(&input, &mut output) {
            Ok(_) => {}
            Err(EngineError::NonFiniteInput { .. }) => {
                stats.non_finite.fetch_add(1, Ordering::Relaxed);
            }
            Err(e) => {
                log::error!("audio thread stopped: {e}");
                break;
            }
        }
        stats.hops.fetch_add(1, Ordering::Relaxed);
        // output goes to the playback device in a live setup; the file loop discards it
        deadline += hop_dur;
        let now = Instant::now();
        if deadline > now {
            thread::sleep(deadline - now);
        } else if now - deadline > MAX_LAG {
            deadline = now;
        }
    }
    stats.audio_running.store(false, Ordering::Release);
}

/// The single writer of engine config: every client message is applied here in order.
async fn control_actor(mut rx: mpsc::Receiver<ActorRequest>, control: ControlHandle) {
    while let Some((msg, mut hz, reply)) = rx.recv().await {
        let event = apply(&msg, &control, &mut hz);
        if let ServerEvent::Error { message, .. } = &event {
            log::debug!("rejected {msg:?}: {message}");
        }
        let _ = reply.send((event, hz));
    }
}

async fn meter_pump(
    queue: dfrt_core::engine::MeterReceiver,
    tx: watch::Sender<Option<MeterFrame>>,
    mut shutdown: watch::Receiver<bool>,
) {
    let mut tick = interval(PUMP_PERIOD);
    tick.set_missed_tick_behavior(MissedTickBehavior::Skip);
    loop {
        tokio::select! {
            _ = tick.tick() => {
                if let Some(last) = std::iter::from_fn(|| queue.try_recv()).last() {
                    tx.send_replace(Some(last));
                }
            }
            _ = stopped(&mut shutdown) => break,
        }
    }
}

/// Resolves once the flag is set or the sender is gone.
async fn stopped(rx: &mut watch::Receiver<bool>) {
    while !*rx.borrow_and_update() {
        if rx.changed().await.is_err() {
            return;
        }
    }
}

async fn healthz(State(state): State<AppState>) -> impl IntoResponse {
    let s = &state.stats;
    Json(Health {
        status: if s.audio_running.load(Ordering::Acquire) { "ok" } else { "stopped" }.into(),
        protocol: PROTOCOL_VERSION,
        source: s.source.clone(),
        hops_processed: s.hops.load(Ordering::Relaxed),
        non_finite_hops: s.non_finite.load(Ordering::Relaxed),
        uptime_s: s.started.elapsed().as_secs_f64(),
        clients: s.clients.load(Ordering::Relaxed),
        latency_samples: s.latency_samples,
        config: state.control.snapshot(),
        last_meter: *state.meters.borrow(),
    })
}

async fn control_ws(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    ws.on_upgrade(move |socket| client_session(socket, state))
}

async fn next_tick(ticker: &mut Option<Interval>) {
    match ticker {
        Some(t) => {
            t.tick().await;
        }
        None => std::future::pending().await,
    }
}

async fn handle_line(line: &str, state: &AppState, meter_hz: &mut Option<f64>) -> ServerEvent {
    let msg = match parse_message(line) {
        Ok(m) => m,
        Err(e) => return e,
    };
    let (reply_tx, reply_rx) = oneshot::channel();
    if state.actor.send((msg, *meter_hz, reply_tx)).await.is_err() {
        return ServerEvent::error(ErrorCode::InvalidValue, "service is shutting down");
    }
    match reply_rx.await {
        Ok((event, hz)) => {
            *meter_hz = hz;
            event
        }
        Err(_) => ServerEvent::error(ErrorCode::InvalidValue, "service is shutting down"),
    }
}

async fn client_session(socket: WebSocket, state: AppState) {
    state.stats.clients.fetch_add(1, Ordering::Relaxed);
    let (mut sink, mut stream) = socket.split();
    let mut shutdown = state.shutdown.clone();
    let mut meter_hz: Option<f64> = None;
    let mut ticker: Option<Interval> = None;
    let mut last_sent: Option<u64> = None;

    loop {
        let outgoing: Vec<ServerEvent> = tokio::select! {
            incoming = stream.next() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let mut events = Vec::new();
                    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
                        let before = meter_hz;
                        events.push(handle_line(line, &state, &mut meter_hz).await);
                        if meter_hz != before {
                            ticker = meter_hz.map(|hz| {
                                let mut t = interval(Duration::from_secs_f64(1.0 / hz));
                                t.set_missed_tick_behavior(MissedTickBehavior::Delay);
                                t
                            });
                        }
                    }
                    events
                }
                Some(Ok(Message::Binary(_))) => {
                    vec![ServerEvent::error(ErrorCode::Malformed, "binary frames are not supported; send NDJSON text")]
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => continue,
            },
            _ = next_tick(&mut ticker) => {
                let latest = *state.meters.borrow();
                match latest {
                    Some(m) if last_sent != Some(m.frame_index) => {
                        last_sent = Some(m.frame_index);
                        vec![ServerEvent::Meter(m)]
                    }
                    _ => continue,
                }
            }
            _ = stopped(&mut shutdown) => {
                let _ = sink.send(Message::Close(None)).await;
                break;
            }
        };
        let mut failed = false;
        for ev in outgoing {
            if sink.send(Message::Text(ev.to_line())).await.is_err() {
                failed = true;
                break;
            }
        }
        if failed {
            break;
        }
    }
    state.stats.clients.fetch_sub(1, Ordering::Relaxed);
}
