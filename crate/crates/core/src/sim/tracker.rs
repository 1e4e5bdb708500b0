//! Virtual overhead tracker. Emulates what the camera pipeline hands the
//! follower: integer-pixel positions sampled at a fixed frame rate.

use serde::{Deserialize, Serialize};

use crate::geometry::{compute_goal_point, Pose, Vec2};
use crate::rng::Rng64;

/// Frames spanning the leader-motion window (about 100 ms at 30 Hz).
pub const MOTION_WINDOW_FRAMES: usize = 4;

/// Goal-point displacement below which the leader counts as stopped.
pub const MOTION_THRESHOLD_PX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    /// The camera frame.
    pub const CAMERA: Arena = Arena {
        width: 1280.0,
        height: 720.0,
    };

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn clamp_pose(&self, p: Pose) -> Pose {
        Pose {
            position: self.clamp(p.position),
            heading: p.heading,
        }
    }
}

impl Default for Arena {
    fn default() -> Self {
        Self::CAMERA
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedFrame {
    pub t: f64,
    pub leader: Pose,
    pub follower: Pose,
}

fn quantize(p: &Pose, arena: &Arena) -> Pose {
    let c = arena.clamp(p.position);
    Pose {
        position: Vec2::new(c.x.round(), c.y.round()),
        heading: p.heading,
    }
}

/// Positions clamped to the arena and rounded half away from zero;
/// headings pass through.
pub fn tracker_sample(leader: &Pose, follower: &Pose, t: f64, arena: &Arena) -> TrackedFrame {
    TrackedFrame {
        t,
        leader: quantize(leader, arena),
        follower: quantize(follower, arena),
    }
}

/// Adds -1, 0 or +1 px to each coordinate, re-clamped to the arena.
pub fn jitter_frame(frame: &mut TrackedFrame, rng: &mut Rng64, arena: &Arena) {
    for pose in [&mut frame.leader, &mut frame.follower] {
        let dx = rng.below(3) as f64 - 1.0;
        let dy = rng.below(3) as f64 - 1.0;
        pose.position = arena.clamp(pose.position + Vec2::new(dx, dy));
    }
}

/// Whether the leader's goal point moved at least 1 px across the last
/// four frames. With less history the leader is assumed to be moving.
pub fn leader_moving<'a, I>(history: I) -> bool
where
    I: IntoIterator<Item = &'a TrackedFrame>,
    I::IntoIter: DoubleEndedIterator,
{
    let mut recent = history.into_iter().rev();
    let Some(latest) = recent.next() else {
        return true;
    };
    let Some(oldest) = recent.nth(MOTION_WINDOW_FRAMES - 2) else {
        return true;
    };
    let moved = compute_goal_point(&latest.leader).distance(compute_goal_point(&oldest.leader));
    moved >= MOTION_THRESHOLD_PX
}

/// True when tick `n` starts a new sample at `rate_hz` given `physics_hz`
/// ticks per second. Works for rates that do not divide the physics rate:
/// at 30 Hz over 100 Hz physics, samples land on ticks 0, 4, 7, 10, 14, ...
pub fn is_sample_tick(n: u64, rate_hz: u32, physics_hz: u32) -> bool {
    if n == 0 {
        return true;
    }
    let r = rate_hz as u64;
    let p = physics_hz as u64;
    (n * r) / p != ((n - 1) * r) / p
}
