use std::f64::consts::TAU;

use crate::geometry::Observation;
use crate::kinematics::{RobotGeometry, WheelCommand};

use super::{branch, toggle_phase, turn_or_forward};

const SPIN_TRIGGER_PX: f64 = 70.0;
const REARM_PX: f64 = 80.0;
const FORWARD_BAND_DEG: f64 = 15.0;
const SLOW: f64 = 0.04;
const FAST: f64 = 0.16;
const TURN_SPEED: f64 = 0.06;
const SPIN: WheelCommand = WheelCommand::spin_right(FAST);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HappyMode {
    #[default]
    Oscillating,
    Spinning,
}

impl HappyMode {
    pub fn name(&self) -> &'static str {
        match self {
            HappyMode::Oscillating => "Oscillating",
            HappyMode::Spinning => "Spinning",
        }
    }
}

/// Wiggles toward the goal with the wheels toggling in antiphase at 10 Hz,
/// and does a full turn on the spot each time it catches up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HappyState {
    pub mode: HappyMode,
    /// Heading change driven so far in the current spin, radians.
    pub spin_accum: f64,
    pub rearm: bool,
}

impl Default for HappyState {
    fn default() -> Self {
        Self {
            mode: HappyMode::Oscillating,
            spin_accum: 0.0,
            rearm: true,
        }
    }
}

impl HappyState {
    pub fn step(&mut self, obs: &Observation, now_us: u64) -> WheelCommand {
        if self.mode == HappyMode::Spinning {
            if self.spin_accum < TAU {
                return SPIN;
            }
            self.mode = HappyMode::Oscillating;
            self.rearm = false;
        }

        if obs.d_norm > REARM_PX {
            self.rearm = true;
        }
        if obs.d_norm < SPIN_TRIGGER_PX && self.rearm {
            self.mode = HappyMode::Spinning;
            self.spin_accum = 0.0;
            return SPIN;
        }

        let wiggle = if toggle_phase(now_us) == 0 {
            WheelCommand::new(FAST, SLOW)
        } else {
            WheelCommand::new(SLOW, FAST)
        };
        turn_or_forward(branch(obs.theta_deg, FORWARD_BAND_DEG), wiggle, TURN_SPEED)
    }

    /// Accumulates the rotation actually driven while spinning. A gated
    /// (stopped) tick contributes nothing, so a spin always totals 2π.
    pub fn record_applied(&mut self, applied: WheelCommand, dt: f64, geometry: &RobotGeometry) {
        if self.mode == HappyMode::Spinning {
            let (_, omega) = geometry.twist(applied);
            self.spin_accum += omega.abs() * dt;
        }
    }
}
