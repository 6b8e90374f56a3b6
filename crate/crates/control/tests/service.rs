use std::time::{Duration, Instant};

use dfrt_control::protocol::{ErrorCode, ServerEvent, PROTOCOL_VERSION};
use dfrt_control::{Health, LoopSource, Service};
use dfrt_core::engine::{Engine, EngineConfig, MeterFrame};
use dfrt_core::signal::white_noise;
use futures::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start() -> Service {
    let engine = Engine::new(EngineConfig::default()).unwrap();
    let source = LoopSource::new(white_noise(48_000 * 2, 5, 0.1), "noise").unwrap();
    Service::start(engine, Box::new(source), "127.0.0.1:0".parse().unwrap()).await.unwrap()
}

async fn connect(svc: &Service) -> Ws {
    connect_async(format!("ws://{}/control", svc.local_addr())).await.unwrap().0
}

async fn send(ws: &mut Ws, text: &str) {
    ws.send(Message::Text(text.to_string())).await.unwrap();
}

async fn next_event(ws: &mut Ws) -> ServerEvent {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(5), ws.next()).await.expect("event within 5 s");
        if let Message::Text(t) = msg.unwrap().unwrap() {
            assert!(t.ends_with('\n'), "events are newline terminated");
            return serde_json::from_str(t.trim_end()).unwrap();
        }
    }
}

/// Next `config_ack` or `error`, skipping meters.
async fn reply(ws: &mut Ws) -> ServerEvent {
    loop {
        match next_event(ws).await {
            ServerEvent::Meter(_) => continue,
            other => return other,
        }
    }
}

async fn next_meter(ws: &mut Ws) -> MeterFrame {
    loop {
        if let ServerEvent::Meter(m) = next_event(ws).await {
            return m;
        }
    }
}

fn error_code(ev: &ServerEvent) -> ErrorCode {
    match ev {
        ServerEvent::Error { code, .. } => *code,
        other => panic!("expected error, got {other:?}"),
    }
}

fn acked_config(ev: &ServerEvent) -> EngineConfig {
    match ev {
        ServerEvent::ConfigAck { protocol, config, .. } => {
            assert_eq!(*protocol, PROTOCOL_VERSION);
            *config
        }
        other => panic!("expected ack, got {other:?}"),
    }
}

async fn healthz(svc: &Service) -> Health {
    let mut s = TcpStream::connect(svc.local_addr()).await.unwrap();
    s.write_all(b"GET /healthz HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").await.unwrap();
    let mut buf = Vec::new();
    s.read_to_end(&mut buf).await.unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("HTTP/1.1 200"), "{text}");
    let body = text.split("\r\n\r\n").nth(1).unwrap();
    serde_json::from_str(body).unwrap()
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn set_atten_bounds_output_level() {
    let svc = start().await;
    let mut ws = connect(&svc).await;
    send(&mut ws, r#"{"type":"subscribe","meter_hz":10}"#).await;
    acked_config(&reply(&mut ws).await);
    // let the blind floor settle; stationary noise is then gated to silence
    let before = loop {
        let m = next_meter(&mut ws).await;
        if m.frame_index >= 150 {
            break m;
        }
    };
    assert!(before.out_rms_db < before.in_rms_db - 30.0, "{before:?}");

    send(&mut ws, r#"{"type":"set_atten","db":12}"#).await;
    let ack = reply(&mut ws).await;
    let acked_at = Instant::now();
    assert_eq!(acked_config(&ack).atten.max_atten_db, 12.0);

    let mut checked = 0;
    while acked_at.elapsed() < Duration::from_millis(3300) {
        let m = next_meter(&mut ws).await;
        // within 100 ms of the ack (plus one meter period) the limit holds on every meter
        if acked_at.elapsed() > Duration::from_millis(200) {
            assert!(m.out_rms_db >= m.in_rms_db - 12.0 - 0.5, "{m:?}");
            checked += 1;
        }
    }
    assert!(checked >= 25, "only {checked} meters checked");
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn meters_arrive_at_subscribed_rate() {
    let svc = start().await;
    let mut ws = connect(&svc).await;
    send(&mut ws, r#"{"type":"subscribe","meter_hz":10}"#).await;
    assert_eq!(
        match reply(&mut ws).await {
            ServerEvent::ConfigAck { meter_hz, .. } => meter_hz,
            other => panic!("{other:?}"),
        },
        Some(10.0)
    );
    next_meter(&mut ws).await;
    let start = Instant::now();
    let mut n = 0;
    while start.elapsed() < Duration::from_secs(3) {
        next_meter(&mut ws).await;
        n += 1;
    }
    let rate = n as f64 / start.elapsed().as_secs_f64();
    assert!((8.0..=12.0).contains(&rate), "{rate:.2} Hz");
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn default_subscription_rate_is_ten_hz() {
    let svc = start().await;
    let mut ws = connect(&svc).await;
    send(&mut ws, r#"{"type":"subscribe"}"#).await;
    match reply(&mut ws).await {
        ServerEvent::ConfigAck { meter_hz, .. } => assert_eq!(meter_hz, Some(10.0)),
        other => panic!("{other:?}"),
    }
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn invalid_messages_are_rejected_without_state_change() {
    let svc = start().await;
    let mut ws = connect(&svc).await;
    send(&mut ws, r#"{"type":"get_config"}"#).await;
    let before = acked_config(&reply(&mut ws).await);

    let cases = [
        (r#"{"type":"set_thresholds","silence_below_db":50,"df_off_above_db":20}"#, ErrorCode::InvalidValue),
        (r#"{"type":"set_thresholds","silence_below_db":10,"df_off_above_db":5}"#, ErrorCode::InvalidValue),
        (r#"{"type":"set_atten","db":-3}"#, ErrorCode::InvalidValue),
        (r#"{"type":"set_estimator","kind":"oracle"}"#, ErrorCode::InvalidValue),
        (r#"{"type":"subscribe","meter_hz":0}"#, ErrorCode::InvalidValue),
        (r#"{"type":"set_atten"}"#, ErrorCode::BadFields),
        (r#"{"type":"set_atten","db":"loud"}"#, ErrorCode::BadFields),
        (r#"{"type":"launch_rockets"}"#, ErrorCode::UnknownType),
        (r#"{"db":3}"#, ErrorCode::Malformed),
        ("not json", ErrorCode::Malformed),
    ];
    for (msg, code) in cases {
        send(&mut ws, msg).await;
        assert_eq!(error_code(&reply(&mut ws).await), code, "{msg}");
    }
    // still connected, state unchanged
    send(&mut ws, r#"{"type":"get_config"}"#).await;
    assert_eq!(acked_config(&reply(&mut ws).await), before);
    assert_eq!(svc.control().snapshot(), before);
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn every_line_gets_exactly_one_reply_in_order() {
    let svc = start().await;
    let mut ws = connect(&svc).await;
    send(
        &mut ws,
        "{\"type\":\"set_atten\",\"db\":6}\n{\"type\":\"bogus\"}\n{\"type\":\"set_stages\",\"erb\":true,\"df\":false}\n",
    )
    .await;
    assert_eq!(acked_config(&reply(&mut ws).await).atten.max_atten_db, 6.0);
    assert_eq!(error_code(&reply(&mut ws).await), ErrorCode::UnknownType);
    let cfg = acked_config(&reply(&mut ws).await);
    assert!(cfg.stages.erb_enabled && !cfg.stages.df_enabled);
    assert_eq!(cfg.atten.max_atten_db, 6.0);
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn thresholds_and_estimator_round_trip() {
    let svc = start().await;
    let mut ws = connect(&svc).await;
    send(&mut ws, r#"{"type":"set_thresholds","silence_below_db":-5,"df_off_above_db":15}"#).await;
    let cfg = acked_config(&reply(&mut ws).await);
    assert_eq!((cfg.thresholds.silence_below_db, cfg.thresholds.df_off_above_db), (-5.0, 15.0));
    send(&mut ws, r#"{"type":"set_estimator","kind":"passthrough"}"#).await;
    let cfg = acked_config(&reply(&mut ws).await);
    assert_eq!(cfg.estimator_kind.to_string(), "passthrough");
    assert_eq!(svc.control().snapshot(), cfg);
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn healthz_reports_engine_state() {
    let svc = start().await;
    tokio::time::sleep(Duration::from_millis(300)).await;
    let h1 = healthz(&svc).await;
    assert_eq!(h1.status, "ok");
    assert_eq!(h1.protocol, PROTOCOL_VERSION);
    assert_eq!(h1.latency_samples, 1920);
    assert_eq!(h1.source, "loop:noise");
    assert!(h1.hops_processed > 0);
    assert!(h1.last_meter.is_some());
    tokio::time::sleep(Duration::from_millis(300)).await;
    let h2 = healthz(&svc).await;
    // paced at 100 hops per second
    let rate = (h2.hops_processed - h1.hops_processed) as f64 / (h2.uptime_s - h1.uptime_s);
    assert!((70.0..=130.0).contains(&rate), "{rate:.1} hops/s");
    svc.shutdown().await;
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn client_disconnect_leaves_others_running() {
    let svc = start().await;
    let mut a = connect(&svc).await;
    let mut b = connect(&svc).await;
    for ws in [&mut a, &mut b] {
        send(ws, r#"{"type":"subscribe","meter_hz":20}"#).await;
        acked_config(&reply(ws).await);
    }
    a.close(None).await.unwrap();
    drop(a);
    let first = next_meter(&mut b).await;
    let later = next_meter(&mut b).await;
    assert!(later.frame_index > first.frame_index);
    send(&mut b, r#"{"type":"set_atten","db":20}"#).await;
    assert_eq!(acked_config(&reply(&mut b).await).atten.max_atten_db, 20.0);
    tokio::time::sleep(Duration::from_millis(100)).await;
    assert_eq!(healthz(&svc).await.clients, 1);
    svc.shutdown().await;
}
