use crate::geometry::Observation;
use crate::kinematics::WheelCommand;

use super::{branch, turn_or_forward};

const STOP_DISTANCE_PX: f64 = 80.0;
const FORWARD_BAND_DEG: f64 = 15.0;
const FORWARD_SPEED: f64 = 0.1;
const TURN_SPEED: f64 = 0.04;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeutralMode {
    Stopped,
    #[default]
    Following,
}

impl NeutralMode {
    pub fn name(&self) -> &'static str {
        match self {
            NeutralMode::Stopped => "Stopped",
            NeutralMode::Following => "Following",
        }
    }
}

/// Plain follower: stop inside 80 px, otherwise turn on the spot until
/// roughly facing the goal and drive at it.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeutralState {
    pub mode: NeutralMode,
}

impl NeutralState {
    pub fn step(&mut self, obs: &Observation) -> WheelCommand {
        if obs.d_norm <= STOP_DISTANCE_PX {
            self.mode = NeutralMode::Stopped;
            return WheelCommand::STOP;
        }
        self.mode = NeutralMode::Following;
        turn_or_forward(
            branch(obs.theta_deg, FORWARD_BAND_DEG),
            WheelCommand::straight(FORWARD_SPEED),
            TURN_SPEED,
        )
    }
}
