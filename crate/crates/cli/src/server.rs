//! WebSocket server for live steering and replays.
//!
//! Each connection owns one [`Session`]. Inbound messages are folded into
//! the session between ticks; while a trial or replay runs the session is
//! stepped every 10 ms of wall-clock time and its frames are sent back.

use std::sync::Arc;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use emotive_follow::protocol::ServerMessage;
use emotive_follow::session::{Session, SessionOptions};
use tokio::net::TcpListener;
use tokio::time::{interval, MissedTickBehavior};

/// Wall-clock period of one physics tick.
pub const TICK: Duration = Duration::from_millis(10);

pub fn router(opts: SessionOptions) -> Router {
    Router::new()
        .route("/ws", get(upgrade))
        .with_state(Arc::new(opts))
}

pub async fn serve(listener: TcpListener, opts: SessionOptions) -> std::io::Result<()> {
    axum::serve(listener, router(opts)).await
}

async fn upgrade(ws: WebSocketUpgrade, State(opts): State<Arc<SessionOptions>>) -> Response {
    ws.on_upgrade(move |socket| drive(socket, (*opts).clone()))
}

async fn send_all(socket: &mut WebSocket, msgs: Vec<ServerMessage>) -> bool {
    for m in msgs {
        if socket.send(Message::Text(m.to_text().into())).await.is_err() {
            return false;
        }
    }
    true
}

async fn drive(mut socket: WebSocket, opts: SessionOptions) {
    let mut session = Session::new(opts);
    let mut ticker = interval(TICK);
    ticker.set_missed_tick_behavior(MissedTickBehavior::Burst);
    loop {
        tokio::select! {
            inbound = socket.recv() => {
                let replies = match inbound {
                    Some(Ok(Message::Text(text))) => {
                        let was_active = session.is_active();
                        let replies = session.handle_text(text.as_str());
                        if !was_active && session.is_active() {
                            ticker.reset();
                        }
                        replies
                    }
                    Some(Ok(Message::Binary(_))) => {
                        vec![ServerMessage::error("expected a text message")]
                    }
                    Some(Ok(_)) => Vec::new(),
                    Some(Err(e)) => {
                        tracing::debug!("socket error: {e}");
                        break;
                    }
                    None => break,
                };
                if !send_all(&mut socket, replies).await {
                    break;
                }
            }
            _ = ticker.tick(), if session.is_active() => {
                let out = session.tick();
                if !send_all(&mut socket, out).await {
                    break;
                }
            }
        }
    }
    session.close();
    if let Some(p) = session.log_path() {
        tracing::info!("closed session, last log {}", p.display());
    }
}
