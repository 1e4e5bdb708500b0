//! Deterministic 2D leader-follower simulator.
//!
//! A human-steered leader robot is trailed by a follower whose motion
//! expresses one of four moods: neutral, happy, angry or sad. The follower
//! sees the world only through a virtual overhead tracker (integer pixels,
//! 30 Hz), and every trial is reproducible bit for bit from its config and
//! leader script.

pub mod behaviors;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod leader;
pub mod protocol;
pub mod rng;
pub mod session;
pub mod sim;
pub mod telemetry;

pub use behaviors::{Behavior, BehaviorKind};
pub use error::{Error, Result};
pub use geometry::{Observation, Pose, Vec2};
pub use kinematics::{RobotGeometry, WheelCommand};
pub use leader::{KeySet, LeaderScript};
pub use sim::{run_trial, TrialConfig, World};
pub use telemetry::{load_log, summarize, Metrics, TickRecord, TrialLog};
