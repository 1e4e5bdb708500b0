//! Fixed-timestep world: leader teleop, virtual tracker, follower behavior,
//! lap tracking and trial orchestration.

mod path;
mod tracker;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

pub use path::{default_course, CoursePath, LapProgress, PathFile, CAPTURE_RADIUS_PX};
pub use tracker::{
    is_sample_tick, jitter_frame, leader_moving, tracker_sample, Arena, TrackedFrame,
    MOTION_THRESHOLD_PX, MOTION_WINDOW_FRAMES,
};

use crate::behaviors::{apply_leader_stop_gate, Behavior, BehaviorKind, Clock, StepInput};
use crate::error::{Error, Result};
use crate::geometry::{compute_goal_point, compute_observation, Observation, Pose};
use crate::kinematics::{clamp_command, step_pose, RobotGeometry, WheelCommand};
use crate::leader::{KeySet, LeaderScript, LeaderSpeeds};
use crate::rng::Rng64;
use crate::telemetry::{Footer, LogHeader, TickRecord, TrialLog};

/// The follower starts this far behind the leader's goal point.
pub const START_GAP_PX: f64 = 100.0;

/// Mixed into the trial seed for the tracker jitter stream so that turning
/// jitter on does not change the behavior's random draws.
const JITTER_STREAM: u64 = 0x6A09_E667_F3BC_C909;

const HISTORY_FRAMES: usize = 16;

/// Which course a trial runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathSpecRepr", into = "PathSpecRepr")]
pub enum PathSpec {
    Default,
    Custom(PathFile),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PathSpecRepr {
    Named(String),
    Custom(PathFile),
}

impl TryFrom<PathSpecRepr> for PathSpec {
    type Error = String;

    fn try_from(r: PathSpecRepr) -> Result<Self, Self::Error> {
        match r {
            PathSpecRepr::Named(n) if n == "default" => Ok(PathSpec::Default),
            PathSpecRepr::Named(n) => Err(format!("unknown path id {n:?}")),
            PathSpecRepr::Custom(pf) => Ok(PathSpec::Custom(pf)),
        }
    }
}

impl From<PathSpec> for PathSpecRepr {
    fn from(p: PathSpec) -> Self {
        match p {
            PathSpec::Default => PathSpecRepr::Named("default".into()),
            PathSpec::Custom(pf) => PathSpecRepr::Custom(pf),
        }
    }
}

impl PathSpec {
    pub fn course(&self) -> Result<CoursePath> {
        match self {
            PathSpec::Default => Ok(CoursePath::default_course()),
            PathSpec::Custom(pf) => CoursePath::from_file(pf),
        }
    }
}

/// Everything that determines a trial, written verbatim into the log header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub behavior: BehaviorKind,
    pub seed: u64,
    /// Physics step in seconds.
    pub dt: f64,
    pub tracker_hz: u32,
    pub frame_hz: u32,
    pub path: PathSpec,
    pub leader_speeds: LeaderSpeeds,
    /// ±1 px tracker noise drawn from the seeded stream.
    pub tracker_jitter: bool,
    pub arena: Arena,
}

impl TrialConfig {
    pub fn new(behavior: BehaviorKind, seed: u64) -> Self {
        TrialConfig {
            behavior,
            seed,
            dt: 0.01,
            tracker_hz: 30,
            frame_hz: 30,
            path: PathSpec::Default,
            leader_speeds: LeaderSpeeds::default(),
            tracker_jitter: false,
            arena: Arena::CAMERA,
        }
    }

    /// Physics ticks per second; `dt` must be the reciprocal of an integer.
    pub fn physics_hz(&self) -> Result<u32> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        let hz = (1.0 / self.dt).round();
        if (hz * self.dt - 1.0).abs() > 1e-9 || !(1.0..=1e6).contains(&hz) {
            return Err(Error::Config(format!(
                "dt {} is not the reciprocal of a whole rate",
                self.dt
            )));
        }
        Ok(hz as u32)
    }

    pub fn validate(&self) -> Result<()> {
        let physics = self.physics_hz()?;
        for (name, hz) in [("tracker_hz", self.tracker_hz), ("frame_hz", self.frame_hz)] {
            if hz == 0 || hz > physics {
                return Err(Error::Config(format!(
                    "{name} must be in 1..={physics}, got {hz}"
                )));
            }
        }
        if !(self.arena.width > 0.0 && self.arena.height > 0.0) {
            return Err(Error::Config("arena must have positive size".into()));
        }
        let s = &self.leader_speeds;
        if [s.forward, s.rotate, s.inner]
            .iter()
            .any(|v| !v.is_finite() || v.abs() > crate::kinematics::MAX_WHEEL_SPEED)
        {
            return Err(Error::Config("leader speeds must be within ±0.2 m/s".into()));
        }
        self.path.course()?;
        Ok(())
    }
}

/// The simulated arena. Exactly one owner steps it.
#[derive(Debug, Clone)]
pub struct World {
    cfg: TrialConfig,
    physics_hz: u32,
    dt_us: u64,
    ticks: u64,
    leader: Pose,
    follower: Pose,
    geometry: RobotGeometry,
    behavior: Behavior,
    history: VecDeque<TrackedFrame>,
    lap: LapProgress,
    jitter: Option<Rng64>,
    last_obs: Option<Observation>,
    last_behavior_cmd: WheelCommand,
    last_applied_cmd: WheelCommand,
}

impl World {
    /// Leader on the course start, follower [`START_GAP_PX`] behind the
    /// leader's goal point with the same heading.
    pub fn new(cfg: &TrialConfig) -> Result<Self> {
        cfg.validate()?;
        let course = cfg.path.course()?;
        let leader = course.start_pose();
        let back = compute_goal_point(&leader) - leader.orientation() * START_GAP_PX;
        let follower = Pose {
            position: back,
            heading: leader.heading,
        };
        Self::with_poses(cfg, leader, follower)
    }

    /// A world with explicit starting poses on the configured course.
    pub fn with_poses(cfg: &TrialConfig, leader: Pose, follower: Pose) -> Result<Self> {
        cfg.validate()?;
        let physics_hz = cfg.physics_hz()?;
        let mut lap = LapProgress::new(cfg.path.course()?);
        lap.update(leader.position, 0.0);
        Ok(World {
            physics_hz,
            dt_us: 1_000_000 / physics_hz as u64,
            ticks: 0,
            leader: cfg.arena.clamp_pose(leader),
            follower: cfg.arena.clamp_pose(follower),
            geometry: RobotGeometry::THYMIO,
            behavior: Behavior::new(cfg.behavior, cfg.seed),
            history: VecDeque::with_capacity(HISTORY_FRAMES),
            lap,
            jitter: cfg.tracker_jitter.then(|| Rng64::new(cfg.seed ^ JITTER_STREAM)),
            last_obs: None,
            last_behavior_cmd: WheelCommand::STOP,
            last_applied_cmd: WheelCommand::STOP,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &TrialConfig {
        &self.cfg
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// `ticks × dt`, never accumulated.
    pub fn sim_time(&self) -> f64 {
        self.ticks as f64 * self.cfg.dt
    }

    pub fn leader(&self) -> &Pose {
        &self.leader
    }

    pub fn follower(&self) -> &Pose {
        &self.follower
    }

    pub fn behavior(&self) -> &Behavior {
        &self.behavior
    }

    pub fn lap(&self) -> &LapProgress {
        &self.lap
    }

    pub fn latest_frame(&self) -> Option<&TrackedFrame> {
        self.history.back()
    }

    /// The observation the follower acted on in the last tick.
    pub fn last_observation(&self) -> Option<&Observation> {
        self.last_obs.as_ref()
    }

    /// The behavior's output in the last tick, before the stop gate.
    pub fn last_behavior_command(&self) -> WheelCommand {
        self.last_behavior_cmd
    }

    /// What the follower's wheels actually drove in the last tick.
    pub fn last_applied_command(&self) -> WheelCommand {
        self.last_applied_cmd
    }

    /// True when the current tick boundary is a UI frame boundary.
    pub fn is_frame_tick(&self) -> bool {
        is_sample_tick(self.ticks, self.cfg.frame_hz, self.physics_hz)
    }

    /// Advances the world by one physics step.
    ///
    /// The tracker samples the world at the start of the tick (when the
    /// tick falls on a tracker boundary); the follower only ever sees the
    /// latest sample.
    pub fn tick(&mut self, keys: KeySet) -> TickRecord {
        let arena = self.cfg.arena;
        let dt = self.cfg.dt;
        let now = self.sim_time();

        if is_sample_tick(self.ticks, self.cfg.tracker_hz, self.physics_hz) {
            let mut frame = tracker_sample(&self.leader, &self.follower, now, &arena);
            if let Some(rng) = self.jitter.as_mut() {
                jitter_frame(&mut frame, rng, &arena);
            }
            if self.history.len() == HISTORY_FRAMES {
                self.history.pop_front();
            }
            self.history.push_back(frame);
        }

        let leader_cmd = clamp_command(self.cfg.leader_speeds.keys_to_command(keys.normalized()));
        self.leader = arena.clamp_pose(step_pose(&self.leader, leader_cmd, dt, &self.geometry));

        let frame = *self.history.back().expect("tick 0 always samples");
        let obs = compute_observation(&frame.leader, &frame.follower, leader_moving(&self.history));
        let input = StepInput {
            obs,
            leader: frame.leader,
            follower: frame.follower,
            clock: Clock {
                now_us: self.ticks * self.dt_us,
                dt_us: self.dt_us,
            },
        };
        let raw = self.behavior.step(&input);
        let applied = clamp_command(apply_leader_stop_gate(raw, &obs));
        self.behavior.record_applied(applied, dt, &self.geometry);
        self.follower = arena.clamp_pose(step_pose(&self.follower, applied, dt, &self.geometry));

        self.ticks += 1;
        let t = self.sim_time();
        self.lap.update(self.leader.position, t);

        self.last_obs = Some(obs);
        self.last_behavior_cmd = raw;
        self.last_applied_cmd = applied;

        TickRecord::new(
            t,
            &self.leader,
            &self.follower,
            applied,
            self.behavior.state_name(),
            obs.d_norm,
            obs.theta_deg,
            obs.leader_moving,
            self.lap.visited_count() as u32,
        )
    }
}

/// Where leader key states come from during a trial.
pub trait KeySource {
    /// Keys held at simulation time `t` (start of the tick).
    fn keys_at(&mut self, t: f64) -> KeySet;
}

impl KeySource for LeaderScript {
    fn keys_at(&mut self, t: f64) -> KeySet {
        LeaderScript::keys_at(self, t)
    }
}

impl<F: FnMut(f64) -> KeySet> KeySource for F {
    fn keys_at(&mut self, t: f64) -> KeySet {
        self(t)
    }
}

/// Number of ticks that fit strictly before `max_t`.
pub fn tick_budget(max_t: f64, dt: f64) -> u64 {
    if max_t <= 0.0 {
        return 0;
    }
    (max_t / dt - 1e-9).ceil().max(0.0) as u64
}

/// Runs one trial until the leader completes a lap or `max_t` elapses.
pub fn run_trial(cfg: &TrialConfig, input: &mut dyn KeySource, max_t: f64) -> Result<TrialLog> {
    run_trial_with(cfg, input, max_t, "headless", |_, _| {})
}

/// [`run_trial`] with a provenance tag and a per-tick observer.
pub fn run_trial_with<F>(
    cfg: &TrialConfig,
    input: &mut dyn KeySource,
    max_t: f64,
    created: &str,
    mut observe: F,
) -> Result<TrialLog>
where
    F: FnMut(&World, &TickRecord),
{
    if !max_t.is_finite() {
        return Err(Error::Config("max_t must be finite".into()));
    }
    let mut world = World::new(cfg)?;
    let budget = tick_budget(max_t, cfg.dt);
    let mut records = Vec::with_capacity(budget.min(1 << 20) as usize);
    let mut footer = Footer::Timeout;
    while world.ticks() < budget {
        let keys = input.keys_at(world.sim_time());
        let rec = world.tick(keys);
        observe(&world, &rec);
        records.push(rec);
        if let Some(lap_time) = world.lap().lap_times.first() {
            footer = Footer::Lap { lap_time: *lap_time };
            break;
        }
    }
    Ok(TrialLog {
        header: LogHeader::new(cfg.clone(), created),
        records,
        footer,
    })
}
