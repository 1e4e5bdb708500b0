//! Differential-drive pose integration at Thymio II scale.

use serde::{Deserialize, Serialize};

use crate::geometry::{px_from_m, wrap_pi, Pose, Vec2};

/// Hardware wheel speed limit in m/s.
pub const MAX_WHEEL_SPEED: f64 = 0.2;

/// Left/right wheel linear speeds in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelCommand {
    pub v_left: f64,
    pub v_right: f64,
}

impl WheelCommand {
    pub const STOP: WheelCommand = WheelCommand::new(0.0, 0.0);

    pub const fn new(v_left: f64, v_right: f64) -> Self {
        Self { v_left, v_right }
    }

    /// Equal speed on both wheels.
    pub const fn straight(v: f64) -> Self {
        Self::new(v, v)
    }

    /// Turn on the spot toward the right (left wheel forward).
    pub const fn spin_right(v: f64) -> Self {
        Self::new(v, -v)
    }

    pub const fn spin_left(v: f64) -> Self {
        Self::new(-v, v)
    }

    pub fn is_stop(&self) -> bool {
        self.v_left == 0.0 && self.v_right == 0.0
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.v_right, self.v_left)
    }
}

/// Clamps each wheel independently to the hardware limit.
pub fn clamp_command(c: WheelCommand) -> WheelCommand {
    WheelCommand {
        v_left: c.v_left.clamp(-MAX_WHEEL_SPEED, MAX_WHEEL_SPEED),
        v_right: c.v_right.clamp(-MAX_WHEEL_SPEED, MAX_WHEEL_SPEED),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotGeometry {
    /// Wheel separation in metres.
    pub track_width: f64,
    /// Body footprint in metres (length, width).
    pub body: (f64, f64),
}

impl RobotGeometry {
    pub const THYMIO: RobotGeometry = RobotGeometry {
        track_width: 0.094,
        body: (0.110, 0.112),
    };

    /// Forward speed in px/s and turn rate in rad/s for a wheel command.
    /// Positive turn rate is a right turn in the pixel frame.
    pub fn twist(&self, c: WheelCommand) -> (f64, f64) {
        let v = px_from_m((c.v_left + c.v_right) / 2.0);
        let omega = (c.v_left - c.v_right) / self.track_width;
        (v, omega)
    }
}

impl Default for RobotGeometry {
    fn default() -> Self {
        Self::THYMIO
    }
}

/// Semi-implicit Euler step: heading first, then translation along the new heading.
pub fn step_pose(p: &Pose, c: WheelCommand, dt: f64, g: &RobotGeometry) -> Pose {
    let (v, omega) = g.twist(c);
    let heading = wrap_pi(p.heading + omega * dt);
    let position = if v == 0.0 {
        p.position
    } else {
        p.position + Vec2::from_heading(heading) * (v * dt)
    };
    Pose { position, heading }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn clamp_examples() {
        let c = WheelCommand::new(0.18, 0.18);
        assert_eq!(clamp_command(c), c);
        assert_eq!(
            clamp_command(WheelCommand::new(0.25, -0.3)),
            WheelCommand::new(0.2, -0.2)
        );
        assert_eq!(clamp_command(WheelCommand::STOP), WheelCommand::STOP);
    }

    #[test]
    fn straight_step() {
        let p = step_pose(
            &Pose::new(0.0, 0.0, 0.0),
            WheelCommand::straight(0.1),
            0.1,
            &RobotGeometry::THYMIO,
        );
        assert!((p.position.x - 3.5).abs() < 1e-12);
        assert_eq!(p.position.y, 0.0);
        assert_eq!(p.heading, 0.0);
    }

    #[test]
    fn happy_spin_rate() {
        let (v, omega) = RobotGeometry::THYMIO.twist(WheelCommand::spin_right(0.16));
        assert_eq!(v, 0.0);
        // 0.32 / 0.094
        assert!((omega - 3.404_255_319_148_936).abs() < 1e-12);
        assert!((2.0 * PI / omega - 1.845_685_683_984_003_5).abs() < 1e-9);
    }

    #[test]
    fn neutral_turn_rate() {
        let (v, omega) = RobotGeometry::THYMIO.twist(WheelCommand::spin_right(0.04));
        assert_eq!(v, 0.0);
        assert!((omega - 0.851_063_829_787_234).abs() < 1e-12);
        assert!((omega.to_degrees() - 48.762).abs() < 1e-3);
        let p0 = Pose::new(12.0, 34.0, 0.3);
        let p1 = step_pose(&p0, WheelCommand::spin_right(0.04), 0.01, &RobotGeometry::THYMIO);
        assert_eq!(p1.position, p0.position);
    }

    fn finite_pose() -> impl Strategy<Value = Pose> {
        (-1000.0..1000.0f64, -1000.0..1000.0f64, -PI..PI).prop_map(|(x, y, h)| Pose::new(x, y, h))
    }

    fn wheel() -> impl Strategy<Value = f64> {
        -MAX_WHEEL_SPEED..=MAX_WHEEL_SPEED
    }

    proptest! {
        #[test]
        fn equal_wheels_keep_heading(p in finite_pose(), v in wheel(), dt in 0.001..0.1f64) {
            let q = step_pose(&p, WheelCommand::straight(v), dt, &RobotGeometry::THYMIO);
            prop_assert_eq!(q.heading, p.heading);
            let moved = q.position.distance(p.position);
            prop_assert!((moved - px_from_m(v.abs()) * dt).abs() < 1e-9);
        }

        #[test]
        fn opposite_wheels_rotate_in_place(p in finite_pose(), v in wheel(), dt in 0.001..0.1f64) {
            let q = step_pose(&p, WheelCommand::spin_right(v), dt, &RobotGeometry::THYMIO);
            prop_assert_eq!(q.position, p.position);
        }

        #[test]
        fn swapping_wheels_negates_turn(l in wheel(), r in wheel()) {
            let c = WheelCommand::new(l, r);
            let (v1, w1) = RobotGeometry::THYMIO.twist(c);
            let (v2, w2) = RobotGeometry::THYMIO.twist(c.swapped());
            prop_assert_eq!(v1, v2);
            prop_assert_eq!(w1, -w2);
        }

        #[test]
        fn step_is_deterministic(p in finite_pose(), l in wheel(), r in wheel()) {
            let c = WheelCommand::new(l, r);
            let a = step_pose(&p, c, 0.01, &RobotGeometry::THYMIO);
            let b = step_pose(&p, c, 0.01, &RobotGeometry::THYMIO);
            prop_assert_eq!(a.position.x.to_bits(), b.position.x.to_bits());
            prop_assert_eq!(a.position.y.to_bits(), b.position.y.to_bits());
            prop_assert_eq!(a.heading.to_bits(), b.heading.to_bits());
        }

        #[test]
        fn clamp_bounds(l in -5.0..5.0f64, r in -5.0..5.0f64) {
            let c = clamp_command(WheelCommand::new(l, r));
            prop_assert!(c.v_left.abs() <= MAX_WHEEL_SPEED && c.v_right.abs() <= MAX_WHEEL_SPEED);
        }
    }
}
