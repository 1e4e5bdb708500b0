//! Pixel-frame vector math for the overhead tracker.
//!
//! The frame matches camera imagery: x grows to the right, y grows down.
//! A positive heading change therefore rotates clockwise on screen, which
//! is a right turn for a robot seen from above.
//!
//! Transcendental functions go through `libm` so results are bit-identical
//! across platforms.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tracker pixels per metre on the arena surface (3.5 px per cm).
pub const PX_PER_M: f64 = 350.0;

/// Distance of the goal point behind the leader centre, in pixels.
pub const GOAL_OFFSET_PX: f64 = 70.0;

/// A point or displacement in tracker pixels.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector pointing along `heading` (radians).
    #[inline]
    pub fn from_heading(heading: f64) -> Self {
        Self::new(libm::cos(heading), libm::sin(heading))
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product `self × other`.
    #[inline]
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    /// Rotates by +90° in the pixel frame: (x, y) -> (-y, x).
    #[inline]
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Position and heading of a robot in the tracker frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    /// Radians in (-π, π].
    pub heading: f64,
}

impl Pose {
    /// Builds a pose, wrapping `heading` into (-π, π].
    ///
    /// Panics if `heading` is not finite.
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            position: Vec2::new(x, y),
            heading: normalize_angle(heading).expect("pose heading must be finite"),
        }
    }

    /// Unit vector along the heading.
    #[inline]
    pub fn orientation(&self) -> Vec2 {
        Vec2::from_heading(self.heading)
    }

    pub fn translated(&self, t: Vec2) -> Pose {
        Pose {
            position: self.position + t,
            heading: self.heading,
        }
    }
}

/// What the follower sees on one control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    /// Goal point minus follower position.
    pub d_vec: Vec2,
    pub d_norm: f64,
    /// Signed angle from the follower heading to `d_vec`, degrees in (-180, 180].
    /// Positive means the goal lies on the right-turn side.
    pub theta_deg: f64,
    pub leader_moving: bool,
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap_pi(a))
}

/// Infallible variant of [`normalize_angle`] for values known to be finite.
#[inline]
pub(crate) fn wrap_pi(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let two_pi = 2.0 * PI;
    let mut r = a - two_pi * libm::floor(a / two_pi);
    // r in [0, 2π)
    if r > PI {
        r -= two_pi;
    }
    if r <= -PI {
        r += two_pi;
    }
    r
}

/// Same as [`wrap_pi`] for degrees, into (-180, 180].
#[inline]
#[cfg(test)]
pub(crate) fn wrap_180(deg: f64) -> f64 {
    if deg > -180.0 && deg <= 180.0 {
        deg
    } else {
        let mut r = deg - 360.0 * libm::floor(deg / 360.0);
        if r > 180.0 {
            r -= 360.0;
        }
        r
    }
}

/// Goal point the follower regulates toward: 70 px behind the leader along
/// its reversed heading.
pub fn compute_goal_point(leader: &Pose) -> Vec2 {
    leader.position - leader.orientation() * GOAL_OFFSET_PX
}

/// Signed bearing in degrees from `heading` to the displacement `d`.
///
/// Returns 0 for a zero displacement so the forward branch is selected.
pub fn bearing_deg(heading: Vec2, d: Vec2) -> f64 {
    if d.x == 0.0 && d.y == 0.0 {
        return 0.0;
    }
    let deg = libm::atan2(heading.cross(d), heading.dot(d)).to_degrees();
    // atan2 returns [-π, π]; fold the -180 end onto +180.
    if deg <= -180.0 {
        deg + 360.0
    } else {
        deg
    }
}

pub fn compute_observation(leader: &Pose, follower: &Pose, leader_moving: bool) -> Observation {
    let d_vec = compute_goal_point(leader) - follower.position;
    Observation {
        d_vec,
        d_norm: d_vec.norm(),
        theta_deg: bearing_deg(follower.orientation(), d_vec),
        leader_moving,
    }
}

/// Converts metres (or m/s) to pixels (or px/s).
#[inline]
pub fn px_from_m(v: f64) -> f64 {
    v * PX_PER_M
}
