//! Leader input: arrow-key teleop and scripted key sequences.
//!
//! A script is plain text, one segment per line:
//!
//! ```text
//! # comment
//! 25.0 up
//! 1.48 right
//! 2.5 up left
//! 9.0 none
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::WheelCommand;

/// Arrow keys currently held. Construct through [`KeySet::new`] to get the
/// opposing-key cancellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct KeySet {
    pub up: bool,
    pub down: bool,
    pub left: bool,
    pub right: bool,
}

impl KeySet {
    pub const NONE: KeySet = KeySet {
        up: false,
        down: false,
        left: false,
        right: false,
    };

    pub fn new(up: bool, down: bool, left: bool, right: bool) -> Self {
        KeySet { up, down, left, right }.normalized()
    }

    /// Opposing keys held together cancel out.
    pub fn normalized(self) -> Self {
        KeySet {
            up: self.up && !self.down,
            down: self.down && !self.up,
            left: self.left && !self.right,
            right: self.right && !self.left,
        }
    }

    pub fn is_none(&self) -> bool {
        *self == KeySet::NONE
    }
}

impl fmt::Display for KeySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [
            (self.up, "up"),
            (self.down, "down"),
            (self.left, "left"),
            (self.right, "right"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, n)| *n)
        .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(" "))
        }
    }
}

/// Leader wheel speeds for the nine key combinations, m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeaderSpeeds {
    /// Both wheels, Up or Down alone.
    pub forward: f64,
    /// Turning on the spot, Left or Right alone.
    pub rotate: f64,
    /// Inner wheel on an arc, Up/Down with Left/Right.
    pub inner: f64,
}

impl Default for LeaderSpeeds {
    fn default() -> Self {
        Self {
            forward: 0.08,
            rotate: 0.05,
            inner: 0.03,
        }
    }
}

impl LeaderSpeeds {
    pub fn keys_to_command(&self, k: KeySet) -> WheelCommand {
        let k = k.normalized();
        let (f, r, i) = (self.forward, self.rotate, self.inner);
        match (k.up, k.down, k.left, k.right) {
            (true, _, false, false) => WheelCommand::new(f, f),
            (_, true, false, false) => WheelCommand::new(-f, -f),
            (false, false, true, _) => WheelCommand::new(-r, r),
            (false, false, _, true) => WheelCommand::new(r, -r),
            (true, _, true, _) => WheelCommand::new(i, f),
            (true, _, _, true) => WheelCommand::new(f, i),
            (_, true, true, _) => WheelCommand::new(-i, -f),
            (_, true, _, true) => WheelCommand::new(-f, -i),
            _ => WheelCommand::STOP,
        }
    }
}

/// Default speed table lookup.
pub fn keys_to_command(k: KeySet) -> WheelCommand {
    LeaderSpeeds::default().keys_to_command(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub duration: f64,
    pub keys: KeySet,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LeaderScript {
    pub segments: Vec<Segment>,
}

impl LeaderScript {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return Err(Error::Script {
                    line: i + 1,
                    msg: format!("duration must be positive, got {}", s.duration),
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// Keys held at time `t`. Segment boundaries belong to the earlier
    /// segment; past the end nothing is held.
    pub fn keys_at(&self, t: f64) -> KeySet {
        let mut end = 0.0;
        for s in &self.segments {
            end += s.duration;
            if t <= end {
                return s.keys;
            }
        }
        KeySet::NONE
    }

    pub fn to_text(&self) -> String {
        self.segments
            .iter()
            .map(|s| format!("{} {}\n", s.duration, s.keys))
            .collect()
    }
}

pub fn parse_leader_script(text: &str) -> Result<LeaderScript> {
    let mut segments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Script { line: line_no, msg };
        let mut parts = line.split_whitespace();
        let dur_s = parts.next().ok_or_else(|| err("missing duration".into()))?;
        let duration: f64 = dur_s
            .parse()
            .map_err(|_| err(format!("bad duration {dur_s:?}")))?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(err(format!("duration must be positive, got {dur_s}")));
        }
        let mut keys = KeySet::NONE;
        let mut any = false;
        for name in parts {
            any = true;
            match name {
                "up" => keys.up = true,
                "down" => keys.down = true,
                "left" => keys.left = true,
                "right" => keys.right = true,
                "none" => {}
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        if !any {
            return Err(err("missing keys".into()));
        }
        segments.push(Segment {
            duration,
            keys: keys.normalized(),
        });
    }
    Ok(LeaderScript { segments })
}

pub fn scripted_step(script: &LeaderScript, t: f64) -> KeySet {
    script.keys_at(t)
}

/// Reference lap on the default path, with the operator pausing at each corner.
pub const REFERENCE_LAP: &str = include_str!("../assets/reference_lap.txt");

pub fn reference_lap_script() -> LeaderScript {
    parse_leader_script(REFERENCE_LAP).expect("bundled reference script parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_raw() -> impl Iterator<Item = KeySet> {
        (0u8..16).map(|m| KeySet {
            up: m & 1 != 0,
            down: m & 2 != 0,
            left: m & 4 != 0,
            right: m & 8 != 0,
        })
    }

    #[test]
    fn command_table() {
        let k = |u, d, l, r| KeySet::new(u, d, l, r);
        let c = WheelCommand::new;
        assert_eq!(keys_to_command(KeySet::NONE), c(0.0, 0.0));
        assert_eq!(keys_to_command(k(true, false, false, false)), c(0.08, 0.08));
        assert_eq!(keys_to_command(k(false, true, false, false)), c(-0.08, -0.08));
        assert_eq!(keys_to_command(k(false, false, true, false)), c(-0.05, 0.05));
        assert_eq!(keys_to_command(k(false, false, false, true)), c(0.05, -0.05));
        assert_eq!(keys_to_command(k(true, false, true, false)), c(0.03, 0.08));
        assert_eq!(keys_to_command(k(true, false, false, true)), c(0.08, 0.03));
        assert_eq!(keys_to_command(k(false, true, true, false)), c(-0.03, -0.08));
        assert_eq!(keys_to_command(k(false, true, false, true)), c(-0.08, -0.03));
    }

    #[test]
    fn sixteen_raw_collapse_to_nine() {
        let normalized: std::collections::HashSet<KeySet> =
            all_raw().map(KeySet::normalized).collect();
        assert_eq!(normalized.len(), 9);
        let commands: Vec<WheelCommand> = normalized.iter().map(|k| keys_to_command(*k)).collect();
        for (i, a) in commands.iter().enumerate() {
            assert!(a.v_left.abs() <= 0.2 && a.v_right.abs() <= 0.2);
            for b in &commands[i + 1..] {
                assert_ne!(a, b);
            }
        }
        for raw in all_raw() {
            assert_eq!(keys_to_command(raw), keys_to_command(raw.normalized()));
        }
    }

    #[test]
    fn parse_examples() {
        let s = parse_leader_script("10.0 up").unwrap();
        assert_eq!(
            s.segments,
            vec![Segment { duration: 10.0, keys: KeySet::new(true, false, false, false) }]
        );

        let s = parse_leader_script("2.5 up left\n1.0 none").unwrap();
        assert_eq!(s.segments.len(), 2);
        assert_eq!(s.segments[0].keys, KeySet::new(true, false, true, false));
        assert!(s.segments[1].keys.is_none());

        let s = parse_leader_script("# lap\n\n3 up down\n").unwrap();
        assert!(s.segments[0].keys.is_none());
    }

    #[test]
    fn parse_errors_name_the_line() {
        match parse_leader_script("0 up") {
            Err(Error::Script { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_leader_script("1 up\n-2 up") {
            Err(Error::Script { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_leader_script("1 up\n# c\n1 sideways") {
            Err(Error::Script { line: 3, msg }) => assert!(msg.contains("sideways")),
            other => panic!("{other:?}"),
        }
        assert!(parse_leader_script("abc up").is_err());
        assert!(parse_leader_script("1.0").is_err());
        assert!(LeaderScript::new(vec![Segment { duration: 0.0, keys: KeySet::NONE }]).is_err());
    }

    #[test]
    fn scripted_examples() {
        let up = KeySet::new(true, false, false, false);
        let s = parse_leader_script("10 up").unwrap();
        assert_eq!(scripted_step(&s, 5.0), up);
        assert_eq!(scripted_step(&s, 10.001), KeySet::NONE);

        let s = parse_leader_script("2 up\n3 up left").unwrap();
        assert_eq!(scripted_step(&s, 2.5), KeySet::new(true, false, true, false));
        assert_eq!(scripted_step(&s, 0.0), up);
        assert_eq!(s.total_duration(), 5.0);
    }

    #[test]
    fn text_round_trip() {
        let s = reference_lap_script();
        assert_eq!(parse_leader_script(&s.to_text()).unwrap(), s);
    }
}
