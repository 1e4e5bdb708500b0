//! Follower controllers. Each behavior is a small state machine that maps the
//! current [`Observation`] to a [`WheelCommand`]; the leader-stop gate is
//! applied on top of every one of them.

mod angry;
mod happy;
mod neutral;
mod sad;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use angry::{AngryMode, AngryState, PATTERN_PERIOD_US};
pub use happy::{HappyMode, HappyState};
pub use neutral::{NeutralMode, NeutralState};
pub use sad::{generate_sine_waypoints, sad_speed_schedule, SadMode, SadState, SpeedPair};

use crate::error::Error;
use crate::geometry::{Observation, Pose};
use crate::kinematics::{RobotGeometry, WheelCommand};

/// Every wheel speed magnitude a follower behavior may emit, in m/s.
pub const FOLLOWER_SPEEDS: [f64; 15] = [
    0.0, 0.008, 0.012, 0.016, 0.024, 0.032, 0.04, 0.06, 0.072, 0.08, 0.088, 0.1, 0.14, 0.16, 0.18,
];

/// True if `v` (or its negation) is one of [`FOLLOWER_SPEEDS`].
pub fn is_follower_speed(v: f64) -> bool {
    FOLLOWER_SPEEDS.iter().any(|s| *s == v.abs())
}

/// Simulation clock handed to the time-driven behaviors, in integer
/// microseconds so that 10 Hz toggles and 5 s timers land on exact ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clock {
    /// Time at the start of the current tick.
    pub now_us: u64,
    pub dt_us: u64,
}

impl Clock {
    pub fn from_secs(now: f64, dt: f64) -> Self {
        Self {
            now_us: (now * 1e6).round() as u64,
            dt_us: (dt * 1e6).round() as u64,
        }
    }
}

/// Half-period of the 10 Hz wheel toggles.
const TOGGLE_HALF_PERIOD_US: u64 = 100_000;

/// 0 or 1: which half of the 10 Hz toggle the clock is in.
pub(crate) fn toggle_phase(now_us: u64) -> u64 {
    (now_us / TOGGLE_HALF_PERIOD_US) % 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Branch {
    Forward,
    Left,
    Right,
}

/// The forward band `[-band, band]` is closed; the turn bands are half-open
/// so every angle in (-180, 180] maps to exactly one branch.
pub(crate) fn branch(theta_deg: f64, band_deg: f64) -> Branch {
    if theta_deg > band_deg {
        Branch::Right
    } else if theta_deg < -band_deg {
        Branch::Left
    } else {
        Branch::Forward
    }
}

/// Turn on the spot at `v` toward the requested side, or drive straight at `forward`.
pub(crate) fn turn_or_forward(b: Branch, forward: WheelCommand, turn: f64) -> WheelCommand {
    match b {
        Branch::Forward => forward,
        Branch::Right => WheelCommand::spin_right(turn),
        Branch::Left => WheelCommand::spin_left(turn),
    }
}

/// Stops the follower whenever the leader is not moving.
pub fn apply_leader_stop_gate(cmd: WheelCommand, obs: &Observation) -> WheelCommand {
    if obs.leader_moving {
        cmd
    } else {
        WheelCommand::STOP
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BehaviorKind {
    Neutral,
    Happy,
    Angry,
    Sad,
}

impl BehaviorKind {
    pub const ALL: [BehaviorKind; 4] = [
        BehaviorKind::Neutral,
        BehaviorKind::Happy,
        BehaviorKind::Angry,
        BehaviorKind::Sad,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BehaviorKind::Neutral => "neutral",
            BehaviorKind::Happy => "happy",
            BehaviorKind::Angry => "angry",
            BehaviorKind::Sad => "sad",
        }
    }
}

impl fmt::Display for BehaviorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BehaviorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "neutral" => Ok(BehaviorKind::Neutral),
            "happy" => Ok(BehaviorKind::Happy),
            "angry" => Ok(BehaviorKind::Angry),
            "sad" => Ok(BehaviorKind::Sad),
            other => Err(Error::Config(format!("unknown behavior {other:?}"))),
        }
    }
}

/// Everything a behavior may look at on one tick. Poses are tracker poses,
/// never ground truth.
#[derive(Debug, Clone, Copy)]
pub struct StepInput {
    pub obs: Observation,
    pub leader: Pose,
    pub follower: Pose,
    pub clock: Clock,
}

/// The running state machine for whichever behavior a trial uses.
#[derive(Debug, Clone, PartialEq)]
pub enum Behavior {
    Neutral(NeutralState),
    Happy(HappyState),
    Angry(AngryState),
    Sad(SadState),
}

impl Behavior {
    pub fn new(kind: BehaviorKind, seed: u64) -> Self {
        match kind {
            BehaviorKind::Neutral => Behavior::Neutral(NeutralState::default()),
            BehaviorKind::Happy => Behavior::Happy(HappyState::default()),
            BehaviorKind::Angry => Behavior::Angry(AngryState::new(seed)),
            BehaviorKind::Sad => Behavior::Sad(SadState::default()),
        }
    }

    pub fn kind(&self) -> BehaviorKind {
        match self {
            Behavior::Neutral(_) => BehaviorKind::Neutral,
            Behavior::Happy(_) => BehaviorKind::Happy,
            Behavior::Angry(_) => BehaviorKind::Angry,
            Behavior::Sad(_) => BehaviorKind::Sad,
        }
    }

    /// Pre-gate command for this tick.
    pub fn step(&mut self, input: &StepInput) -> WheelCommand {
        match self {
            Behavior::Neutral(s) => s.step(&input.obs),
            Behavior::Happy(s) => s.step(&input.obs, input.clock.now_us),
            Behavior::Angry(s) => s.step(&input.obs, input.clock),
            Behavior::Sad(s) => s.step(&input.obs, &input.leader, &input.follower),
        }
    }

    /// Feedback of the command actually driven this tick (after gating).
    pub fn record_applied(&mut self, applied: WheelCommand, dt: f64, geometry: &RobotGeometry) {
        if let Behavior::Happy(s) = self {
            s.record_applied(applied, dt, geometry);
        }
    }

    /// Short state label used in logs and state frames.
    pub fn state_name(&self) -> &'static str {
        match self {
            Behavior::Neutral(s) => s.mode.name(),
            Behavior::Happy(s) => s.mode.name(),
            Behavior::Angry(s) => s.state_name(),
            Behavior::Sad(s) => s.mode.name(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn obs(moving: bool) -> Observation {
        Observation {
            d_vec: Vec2::new(100.0, 0.0),
            d_norm: 100.0,
            theta_deg: 0.0,
            leader_moving: moving,
        }
    }

    #[test]
    fn stop_gate() {
        let c = WheelCommand::straight(0.1);
        assert_eq!(apply_leader_stop_gate(c, &obs(false)), WheelCommand::STOP);
        assert_eq!(apply_leader_stop_gate(c, &obs(true)), c);
        assert_eq!(
            apply_leader_stop_gate(WheelCommand::STOP, &obs(false)),
            WheelCommand::STOP
        );
    }

    #[test]
    fn branch_endpoints() {
        assert_eq!(branch(15.0, 15.0), Branch::Forward);
        assert_eq!(branch(-15.0, 15.0), Branch::Forward);
        assert_eq!(branch(15.000001, 15.0), Branch::Right);
        assert_eq!(branch(180.0, 15.0), Branch::Right);
        assert_eq!(branch(-179.9, 15.0), Branch::Left);
        assert_eq!(branch(10.5, 10.0), Branch::Right);
    }

    #[test]
    fn toggle_phase_at_ten_hz() {
        assert_eq!(toggle_phase(50_000), 0);
        assert_eq!(toggle_phase(150_000), 1);
        assert_eq!(toggle_phase(250_000), 0);
        assert_eq!(toggle_phase(99_999), 0);
        assert_eq!(toggle_phase(100_000), 1);
    }

    #[test]
    fn kind_round_trip() {
        for k in BehaviorKind::ALL {
            assert_eq!(k.as_str().parse::<BehaviorKind>().unwrap(), k);
            assert_eq!(Behavior::new(k, 1).kind(), k);
        }
        assert!("furious".parse::<BehaviorKind>().is_err());
    }

    #[test]
    fn speed_set_membership() {
        assert!(is_follower_speed(-0.06));
        assert!(is_follower_speed(0.088));
        assert!(!is_follower_speed(0.05));
    }
}
