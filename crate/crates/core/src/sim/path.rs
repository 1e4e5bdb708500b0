//! Course checkpoints and lap accounting.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec2};

/// A checkpoint counts as visited when the leader centre comes this close.
pub const CAPTURE_RADIUS_PX: f64 = 60.0;

/// Target spacing between consecutive checkpoints.
pub const CHECKPOINT_SPACING_PX: f64 = 100.0;

/// Default course: a rounded rectangle centred in the 1280×720 arena with
/// 800 px and 300 px straights and 100 px corner radius, driven clockwise
/// on screen. Starts 200 px along the top straight.
pub mod default_course {
    use crate::geometry::Vec2;

    pub const CENTER: Vec2 = Vec2::new(640.0, 360.0);
    pub const STRAIGHT_X: f64 = 800.0;
    pub const STRAIGHT_Y: f64 = 300.0;
    pub const CORNER_RADIUS: f64 = 100.0;
    pub const START: Vec2 = Vec2::new(440.0, 110.0);
}

/// `{"checkpoints":[[x,y],...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub checkpoints: Vec<[f64; 2]>,
}

impl PathFile {
    pub fn parse(text: &str) -> Result<Self> {
        let pf: PathFile =
            serde_json::from_str(text).map_err(|e| Error::PathFile(e.to_string()))?;
        pf.validate()?;
        Ok(pf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.len() < 2 {
            return Err(Error::PathFile("need at least two checkpoints".into()));
        }
        if self
            .checkpoints
            .iter()
            .any(|c| !c[0].is_finite() || !c[1].is_finite())
        {
            return Err(Error::PathFile("non-finite checkpoint".into()));
        }
        if self.checkpoints[0] == self.checkpoints[1] {
            return Err(Error::PathFile("first two checkpoints coincide".into()));
        }
        Ok(())
    }
}

/// An ordered closed course. Checkpoint 0 is the start.
#[derive(Debug, Clone, PartialEq)]
pub struct CoursePath {
    pub checkpoints: Vec<Vec2>,
}

impl CoursePath {
    pub fn default_course() -> Self {
        use default_course::*;
        let hx = STRAIGHT_X / 2.0;
        let hy = STRAIGHT_Y / 2.0;
        let r = CORNER_RADIUS;
        let c = CENTER;

        // Perimeter pieces in driving order from START.
        let pieces = [
            Piece::Line(START, Vec2::new(c.x + hx, c.y - hy - r)),
            Piece::Arc(Vec2::new(c.x + hx, c.y - hy), -FRAC_PI_2),
            Piece::Line(Vec2::new(c.x + hx + r, c.y - hy), Vec2::new(c.x + hx + r, c.y + hy)),
            Piece::Arc(Vec2::new(c.x + hx, c.y + hy), 0.0),
            Piece::Line(Vec2::new(c.x + hx, c.y + hy + r), Vec2::new(c.x - hx, c.y + hy + r)),
            Piece::Arc(Vec2::new(c.x - hx, c.y + hy), FRAC_PI_2),
            Piece::Line(Vec2::new(c.x - hx - r, c.y + hy), Vec2::new(c.x - hx - r, c.y - hy)),
            Piece::Arc(Vec2::new(c.x - hx, c.y - hy), PI),
            Piece::Line(Vec2::new(c.x - hx, c.y - hy - r), START),
        ];
        let len = |p: &Piece| match p {
            Piece::Line(a, b) => a.distance(*b),
            Piece::Arc(..) => r * FRAC_PI_2,
        };
        let perimeter: f64 = pieces.iter().map(len).sum();
        let n = (perimeter / CHECKPOINT_SPACING_PX).round() as usize;
        let spacing = perimeter / n as f64;

        let mut checkpoints = Vec::with_capacity(n);
        let mut piece_start = 0.0;
        let mut k = 0;
        for p in &pieces {
            let l = len(p);
            while k < n && (k as f64) * spacing < piece_start + l {
                let u = (k as f64 * spacing - piece_start) / l;
                checkpoints.push(match p {
                    Piece::Line(a, b) => *a + (*b - *a) * u,
                    Piece::Arc(center, a0) => {
                        *center + Vec2::from_heading(a0 + u * FRAC_PI_2) * r
                    }
                });
                k += 1;
            }
            piece_start += l;
        }
        CoursePath { checkpoints }
    }

    pub fn from_file(pf: &PathFile) -> Result<Self> {
        pf.validate()?;
        Ok(CoursePath {
            checkpoints: pf.checkpoints.iter().map(|c| Vec2::new(c[0], c[1])).collect(),
        })
    }

    pub fn to_file(&self) -> PathFile {
        PathFile {
            checkpoints: self.checkpoints.iter().map(|c| [c.x, c.y]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    /// Leader start pose: on checkpoint 0, facing checkpoint 1.
    pub fn start_pose(&self) -> Pose {
        let a = self.checkpoints[0];
        let d = self.checkpoints[1] - a;
        Pose::new(a.x, a.y, libm::atan2(d.y, d.x))
    }

    /// Closed-loop length through all checkpoints.
    pub fn polyline_length(&self) -> f64 {
        let n = self.checkpoints.len();
        (0..n)
            .map(|i| self.checkpoints[i].distance(self.checkpoints[(i + 1) % n]))
            .sum()
    }
}

enum Piece {
    Line(Vec2, Vec2),
    /// Quarter arc clockwise on screen from the given start angle.
    Arc(Vec2, f64),
}

/// Lap progress of the leader along a [`CoursePath`].
#[derive(Debug, Clone, PartialEq)]
pub struct LapProgress {
    pub path: CoursePath,
    pub visited: Vec<bool>,
    pub laps_done: u32,
    pub lap_times: Vec<f64>,
    lap_started_at: f64,
    left_start: bool,
}

impl LapProgress {
    pub fn new(path: CoursePath) -> Self {
        let n = path.len();
        LapProgress {
            path,
            visited: vec![false; n],
            laps_done: 0,
            lap_times: Vec::new(),
            lap_started_at: 0.0,
            left_start: false,
        }
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|v| **v).count()
    }

    pub fn total(&self) -> usize {
        self.visited.len()
    }

    /// Marks checkpoints near `leader` and closes the lap when every checkpoint
    /// has been seen and the leader is back at the start. Returns true on the
    /// update that completes a lap.
    pub fn update(&mut self, leader: Vec2, t: f64) -> bool {
        for (cp, seen) in self.path.checkpoints.iter().zip(self.visited.iter_mut()) {
            if cp.distance(leader) <= CAPTURE_RADIUS_PX {
                *seen = true;
            }
        }
        let at_start = self.path.checkpoints[0].distance(leader) <= CAPTURE_RADIUS_PX;
        if !at_start {
            self.left_start = true;
            return false;
        }
        if self.left_start && self.visited.iter().all(|v| *v) {
            self.laps_done += 1;
            self.lap_times.push(t - self.lap_started_at);
            self.lap_started_at = t;
            self.left_start = false;
            for (cp, seen) in self.path.checkpoints.iter().zip(self.visited.iter_mut()) {
                *seen = cp.distance(leader) <= CAPTURE_RADIUS_PX;
            }
            return true;
        }
        false
    }
}
