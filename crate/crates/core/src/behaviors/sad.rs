use std::f64::consts::TAU;

use crate::geometry::{bearing_deg, Observation, Pose, Vec2};
use crate::kinematics::WheelCommand;

use super::{branch, turn_or_forward, Branch};

const STOP_PX: f64 = 80.0;
const RESUME_PX: f64 = 100.0;
const SINE_ENTRY_PX: f64 = 100.0;
const CATCH_UP_PX: f64 = 200.0;
const FORWARD_BAND_DEG: f64 = 15.0;
const CATCH_UP_SPEED: f64 = 0.14;
const CATCH_UP_TURN: f64 = 0.032;

/// Sine baseline: this far ahead of the follower ...
const SINE_START_AHEAD_PX: f64 = 10.0;
/// ... to this far behind the leader.
const SINE_END_BEHIND_PX: f64 = 30.0;
const SINE_AMPLITUDE_PX: f64 = 20.0;
const SINE_POINTS: usize = 5;
const WAYPOINT_REACHED_PX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SadMode {
    #[default]
    CatchUp,
    Sine,
    Stopped,
}

impl SadMode {
    pub fn name(&self) -> &'static str {
        match self {
            SadMode::CatchUp => "CatchUp",
            SadMode::Sine => "Sine",
            SadMode::Stopped => "Stopped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPair {
    pub straight: f64,
    pub turn: f64,
}

/// Wheel speeds on the sine path; slower the further behind the follower is.
pub fn sad_speed_schedule(d_norm: f64) -> SpeedPair {
    let (straight, turn) = if d_norm < 100.0 {
        (0.088, 0.008)
    } else if d_norm <= 120.0 {
        (0.08, 0.012)
    } else {
        (0.072, 0.016)
    };
    SpeedPair { straight, turn }
}

/// One sine period laid along the segment from just ahead of the follower to
/// just behind the leader, sampled at five equally spaced points excluding
/// the start. The last point is the segment end.
pub fn generate_sine_waypoints(leader: &Pose, follower: &Pose) -> Vec<Vec2> {
    sine_path(leader, follower).0
}

/// Waypoints plus the unit baseline direction (absent for a degenerate baseline).
fn sine_path(leader: &Pose, follower: &Pose) -> (Vec<Vec2>, Option<Vec2>) {
    let start = follower.position + follower.orientation() * SINE_START_AHEAD_PX;
    let end = leader.position - leader.orientation() * SINE_END_BEHIND_PX;
    let base = end - start;
    let len = base.norm();
    if len < 1.0 {
        return (vec![end], None);
    }
    let axis = base * (1.0 / len);
    let normal = axis.perp();
    let points = (1..=SINE_POINTS)
        .map(|i| {
            if i == SINE_POINTS {
                return end;
            }
            let s = i as f64 / SINE_POINTS as f64;
            start + base * s + normal * (SINE_AMPLITUDE_PX * libm::sin(TAU * s))
        })
        .collect();
    (points, Some(axis))
}

/// Lags behind on a slow sinusoidal path, sprinting to catch up when it
/// falls more than 200 px behind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SadState {
    pub mode: SadMode,
    pub waypoints: Vec<Vec2>,
    pub next_idx: usize,
    /// Unit direction of the current sine baseline.
    pub axis: Option<Vec2>,
}

impl SadState {
    pub fn step(&mut self, obs: &Observation, leader: &Pose, follower: &Pose) -> WheelCommand {
        if obs.d_norm < STOP_PX {
            self.mode = SadMode::Stopped;
            return WheelCommand::STOP;
        }
        match self.mode {
            SadMode::Stopped => {
                if obs.d_norm < RESUME_PX {
                    return WheelCommand::STOP;
                }
                if obs.d_norm > CATCH_UP_PX {
                    self.mode = SadMode::CatchUp;
                    return catch_up(obs);
                }
                self.start_sine(leader, follower);
            }
            SadMode::CatchUp => {
                if obs.d_norm >= SINE_ENTRY_PX {
                    return catch_up(obs);
                }
                self.start_sine(leader, follower);
            }
            SadMode::Sine => {}
        }
        self.follow_sine(obs, leader, follower)
    }

    fn start_sine(&mut self, leader: &Pose, follower: &Pose) {
        self.mode = SadMode::Sine;
        (self.waypoints, self.axis) = sine_path(leader, follower);
        self.next_idx = 0;
    }

    fn follow_sine(&mut self, obs: &Observation, leader: &Pose, follower: &Pose) -> WheelCommand {
        // Bounded in case a fresh set is already behind the follower.
        for _ in 0..=2 * SINE_POINTS {
            if self.next_idx >= self.waypoints.len() {
                if obs.d_norm < CATCH_UP_PX {
                    self.start_sine(leader, follower);
                } else {
                    self.mode = SadMode::CatchUp;
                    return catch_up(obs);
                }
            }
            let target = self.waypoints[self.next_idx];
            if !reached(target, follower.position, self.axis) {
                return steer_to(target, obs.d_norm, follower);
            }
            self.next_idx += 1;
        }
        WheelCommand::STOP
    }
}

/// Within 10 px, or already past the waypoint along the baseline. The second
/// case keeps the follower from circling a point that lies inside its
/// turning radius (about 26 px at the slowest table row).
fn reached(target: Vec2, position: Vec2, axis: Option<Vec2>) -> bool {
    let to_target = target - position;
    to_target.norm() <= WAYPOINT_REACHED_PX || axis.is_some_and(|a| to_target.dot(a) < 0.0)
}

fn catch_up(obs: &Observation) -> WheelCommand {
    turn_or_forward(
        branch(obs.theta_deg, FORWARD_BAND_DEG),
        WheelCommand::straight(CATCH_UP_SPEED),
        CATCH_UP_TURN,
    )
}

/// Arc toward a waypoint: the outer wheel keeps the straight speed.
fn steer_to(target: Vec2, d_norm: f64, follower: &Pose) -> WheelCommand {
    let theta = bearing_deg(follower.orientation(), target - follower.position);
    let v = sad_speed_schedule(d_norm);
    match branch(theta, FORWARD_BAND_DEG) {
        Branch::Forward => WheelCommand::straight(v.straight),
        Branch::Right => WheelCommand::new(v.straight, v.turn),
        Branch::Left => WheelCommand::new(v.turn, v.straight),
    }
}
