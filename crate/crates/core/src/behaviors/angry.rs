use crate::geometry::Observation;
use crate::kinematics::WheelCommand;
use crate::rng::Rng64;

use super::{branch, toggle_phase, turn_or_forward, Clock};

const STOP_PX: f64 = 35.0;
const RESUME_PX: f64 = 45.0;

/// Pattern-mode time between pattern draws.
pub const PATTERN_PERIOD_US: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngryMode {
    Stopped,
    Pattern,
}

/// Tailgater: closes to 35 px and surges using one of three motion patterns,
/// re-drawn at random every five seconds of pattern time.
#[derive(Debug, Clone, PartialEq)]
pub struct AngryState {
    pub mode: AngryMode,
    /// 1, 2 or 3.
    pub pattern_id: u8,
    /// Total time spent in pattern mode, microseconds.
    pub pattern_time_us: u64,
    next_draw_us: u64,
    rng: Rng64,
}

impl AngryState {
    /// Starts in pattern mode with the first pattern already drawn.
    pub fn new(seed: u64) -> Self {
        let mut rng = Rng64::new(seed);
        Self {
            mode: AngryMode::Pattern,
            pattern_id: draw_pattern(&mut rng),
            pattern_time_us: 0,
            next_draw_us: PATTERN_PERIOD_US,
            rng,
        }
    }

    /// Overrides the current pattern for the rest of this period.
    pub fn with_pattern(seed: u64, pattern_id: u8) -> Self {
        assert!((1..=3).contains(&pattern_id));
        Self {
            pattern_id,
            ..Self::new(seed)
        }
    }

    /// Time since the last pattern draw.
    pub fn pattern_since_us(&self) -> u64 {
        self.pattern_time_us + PATTERN_PERIOD_US - self.next_draw_us
    }

    pub fn state_name(&self) -> &'static str {
        match (self.mode, self.pattern_id) {
            (AngryMode::Stopped, _) => "Stopped",
            (AngryMode::Pattern, 1) => "Pattern1",
            (AngryMode::Pattern, 2) => "Pattern2",
            (AngryMode::Pattern, _) => "Pattern3",
        }
    }

    pub fn step(&mut self, obs: &Observation, clock: Clock) -> WheelCommand {
        if obs.d_norm < STOP_PX {
            self.mode = AngryMode::Stopped;
            return WheelCommand::STOP;
        }
        if self.mode == AngryMode::Stopped {
            if obs.d_norm < RESUME_PX {
                return WheelCommand::STOP;
            }
            self.mode = AngryMode::Pattern;
        }

        let theta = obs.theta_deg;
        let cmd = match self.pattern_id {
            1 => {
                let v = if toggle_phase(clock.now_us) == 0 { 0.16 } else { 0.04 };
                turn_or_forward(branch(theta, 15.0), WheelCommand::straight(v), 0.06)
            }
            2 => turn_or_forward(branch(theta, 10.0), WheelCommand::straight(0.18), 0.024),
            _ => turn_or_forward(branch(theta, 10.0), WheelCommand::straight(0.14), 0.06),
        };

        // The draw takes effect from the next tick, once this tick's
        // pattern time has been counted.
        self.pattern_time_us += clock.dt_us;
        if self.pattern_time_us >= self.next_draw_us {
            self.pattern_id = draw_pattern(&mut self.rng);
            self.next_draw_us += PATTERN_PERIOD_US;
        }
        cmd
    }
}

/// Uniform over {1, 2, 3}; repeats allowed.
fn draw_pattern(rng: &mut Rng64) -> u8 {
    1 + rng.below(3) as u8
}
