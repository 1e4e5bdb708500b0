//! Live wire protocol: JSON text messages exchanged over the `/ws` socket.

use serde::{Deserialize, Serialize};

use crate::behaviors::BehaviorKind;
use crate::error::{Error, Result};
use crate::geometry::{compute_observation, Pose};
use crate::leader::KeySet;
use crate::sim::{tracker_sample, World};
use crate::telemetry::{round4, TickRecord};

/// Client to server.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClientMessage {
    Start {
        behavior: BehaviorKind,
        #[serde(default)]
        seed: u64,
    },
    Keys {
        up: bool,
        down: bool,
        left: bool,
        right: bool,
    },
    Stop,
    Replay {
        log: String,
    },
}

impl ClientMessage {
    pub fn keys(k: KeySet) -> Self {
        ClientMessage::Keys {
            up: k.up,
            down: k.down,
            left: k.left,
            right: k.right,
        }
    }
}

pub fn parse_client_message(text: &str) -> Result<ClientMessage> {
    serde_json::from_str(text).map_err(|e| Error::Message(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseView {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl PoseView {
    fn of(p: &Pose) -> Self {
        PoseView {
            x: round4(p.position.x),
            y: round4(p.position.y),
            phi: round4(p.heading),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LapView {
    pub visited: u32,
    pub total: u32,
    pub laps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub t: f64,
    pub leader: PoseView,
    pub follower: PoseView,
    pub behavior: BehaviorKind,
    pub behavior_state: String,
    pub d: f64,
    pub theta: f64,
    pub lap: LapView,
}

impl StateFrame {
    /// A frame for a world. Before the first tick, `d` and `theta` come
    /// from a fresh tracker sample.
    pub fn of_world(w: &World) -> Self {
        let obs = match w.last_observation() {
            Some(o) => *o,
            None => {
                let f = tracker_sample(w.leader(), w.follower(), w.sim_time(), &w.config().arena);
                compute_observation(&f.leader, &f.follower, true)
            }
        };
        let lap = w.lap();
        StateFrame {
            t: round4(w.sim_time()),
            leader: PoseView::of(w.leader()),
            follower: PoseView::of(w.follower()),
            behavior: w.config().behavior,
            behavior_state: w.behavior().state_name().to_owned(),
            d: round4(obs.d_norm),
            theta: round4(obs.theta_deg),
            lap: LapView {
                visited: lap.visited_count() as u32,
                total: lap.total() as u32,
                laps: lap.laps_done,
            },
        }
    }

    /// A frame replaying a logged record. Positions are the record's values.
    pub fn of_record(r: &TickRecord, behavior: BehaviorKind, lap: LapView) -> Self {
        StateFrame {
            t: r.t,
            leader: PoseView {
                x: r.lx,
                y: r.ly,
                phi: r.lphi,
            },
            follower: PoseView {
                x: r.fx,
                y: r.fy,
                phi: r.fphi,
            },
            behavior,
            behavior_state: r.state.clone(),
            d: r.d,
            theta: r.theta,
            lap,
        }
    }
}

/// Server to client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    State(StateFrame),
    /// `lap_time` is null when the trial ended without a lap.
    TrialEnd { lap_time: Option<f64> },
    Error { msg: String },
}

impl ServerMessage {
    pub fn error(msg: impl std::fmt::Display) -> Self {
        ServerMessage::Error {
            msg: msg.to_string(),
        }
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("server messages always serialize")
    }
}

/// The `state` message for the world as it is now.
pub fn encode_state_frame(w: &World) -> String {
    ServerMessage::State(StateFrame::of_world(w)).to_text()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TrialConfig;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_client_message(r#"{"type":"start","behavior":"angry","seed":42}"#).unwrap(),
            ClientMessage::Start {
                behavior: BehaviorKind::Angry,
                seed: 42
            }
        );
        assert_eq!(
            parse_client_message(r#"{"type":"keys","up":true,"down":false,"left":false,"right":false}"#)
                .unwrap(),
            ClientMessage::keys(KeySet::new(true, false, false, false))
        );
        assert_eq!(parse_client_message(r#"{"type":"stop"}"#).unwrap(), ClientMessage::Stop);
        assert_eq!(
            parse_client_message(r#"{"type":"replay","log":"neutral-0-1"}"#).unwrap(),
            ClientMessage::Replay {
                log: "neutral-0-1".into()
            }
        );
        assert_eq!(
            parse_client_message(r#"{"type":"start","behavior":"sad"}"#).unwrap(),
            ClientMessage::Start {
                behavior: BehaviorKind::Sad,
                seed: 0
            }
        );
    }

    #[test]
    fn parse_rejects() {
        for bad in [
            r#"{"type":"start","behavior":"furious"}"#,
            r#"{"type":"start","behavior":"angry","seed":-1}"#,
            r#"{"type":"keys","up":true}"#,
            r#"{"type":"jump"}"#,
            r#"{"behavior":"angry"}"#,
            "not json",
            "",
        ] {
            assert!(matches!(parse_client_message(bad), Err(Error::Message(_))), "{bad}");
        }
    }

    #[test]
    fn minimal_world_frame() {
        let w = World::new(&TrialConfig::new(BehaviorKind::Neutral, 0)).unwrap();
        let text = encode_state_frame(&w);
        assert_eq!(
            text,
            r#"{"type":"state","t":0.0,"leader":{"x":440.0,"y":110.0,"phi":0.0},"follower":{"x":270.0,"y":110.0,"phi":0.0},"behavior":"neutral","behavior_state":"Following","d":100.0,"theta":0.0,"lap":{"visited":1,"total":28,"laps":0}}"#
        );
    }

    #[test]
    fn frame_rounds_to_four_decimals() {
        let leader = Pose::new(500.0, 300.0, 0.0);
        // theta of about -12.34567 degrees
        let a = (-12.34567f64).to_radians();
        let goal = leader.position - leader.orientation() * 70.0;
        let follower = Pose::new(goal.x - 100.0 * a.cos(), goal.y - 100.0 * a.sin(), 0.0);
        let w = World::with_poses(&TrialConfig::new(BehaviorKind::Happy, 0), leader, follower)
            .unwrap();
        let f = StateFrame::of_world(&w);
        assert_eq!(f.follower.x, round4(follower.position.x));
        let text = ServerMessage::State(f).to_text();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["t", "d", "theta"] {
            let s = v[key].to_string();
            let decimals = s.split('.').nth(1).map_or(0, str::len);
            assert!(decimals <= 4, "{key}={s}");
        }
        // the tracker rounds positions, so theta is close to but not exactly the input
        assert!((v["theta"].as_f64().unwrap() + 12.3457).abs() < 0.5, "{text}");
    }

    #[test]
    fn theta_rounding_rule() {
        assert_eq!(round4(-12.34567), -12.3457);
    }

    #[test]
    fn server_message_shapes() {
        assert_eq!(
            ServerMessage::TrialEnd {
                lap_time: Some(150.8)
            }
            .to_text(),
            r#"{"type":"trial_end","lap_time":150.8}"#
        );
        assert_eq!(
            ServerMessage::error("bad").to_text(),
            r#"{"type":"error","msg":"bad"}"#
        );
    }
}
