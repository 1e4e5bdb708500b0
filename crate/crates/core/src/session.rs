//! One client's view of the simulator: a live trial steered by key
//! messages, a replay of a saved log, or nothing. Transport-agnostic; the
//! caller feeds it inbound text and calls [`Session::tick`] once per
//! physics step.

use std::fs::{File, OpenOptions};
use std::io::{BufReader, BufWriter};
use std::path::{Component, Path, PathBuf};

use crate::error::{Error, Result};
use crate::leader::KeySet;
use crate::protocol::{parse_client_message, ClientMessage, LapView, ServerMessage, StateFrame};
use crate::sim::{is_sample_tick, tick_budget, PathSpec, TrialConfig, World};
use crate::telemetry::{load_log, Footer, LogHeader, LogWriter, TrialLog};
use crate::behaviors::BehaviorKind;

#[derive(Debug, Clone)]
pub struct SessionOptions {
    pub path: PathSpec,
    /// Where live trials are logged and replays are looked up.
    pub log_dir: Option<PathBuf>,
    /// Live trials end with a timeout after this much simulated time.
    pub max_t: Option<f64>,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions {
            path: PathSpec::Default,
            log_dir: None,
            max_t: None,
        }
    }
}

type LogSink = LogWriter<BufWriter<File>>;

struct Live {
    world: World,
    keys: KeySet,
    budget: Option<u64>,
    log: Option<(PathBuf, LogSink)>,
}

struct Replay {
    log: TrialLog,
    total: u32,
    physics_hz: u32,
    next: usize,
}

enum Mode {
    Idle,
    Live(Box<Live>),
    Replay(Box<Replay>),
}

pub struct Session {
    opts: SessionOptions,
    mode: Mode,
    last_log: Option<PathBuf>,
}

impl Session {
    pub fn new(opts: SessionOptions) -> Self {
        Session {
            opts,
            mode: Mode::Idle,
            last_log: None,
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self.mode, Mode::Idle)
    }

    pub fn is_live(&self) -> bool {
        matches!(self.mode, Mode::Live(_))
    }

    /// The live world, if a trial is running.
    pub fn world(&self) -> Option<&World> {
        match &self.mode {
            Mode::Live(l) => Some(&l.world),
            _ => None,
        }
    }

    /// Log file of the current or most recent live trial.
    pub fn log_path(&self) -> Option<&Path> {
        match &self.mode {
            Mode::Live(l) => l.log.as_ref().map(|(p, _)| p.as_path()),
            _ => self.last_log.as_deref(),
        }
    }

    /// Ends whatever is running, closing its log as stopped.
    pub fn close(&mut self) -> Vec<ServerMessage> {
        self.end(Footer::Stopped)
    }

    /// Handles one inbound text message. A malformed or unserviceable
    /// message yields an error reply and leaves the session unchanged.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match parse_client_message(text) {
            Ok(msg) => self.handle(msg),
            Err(e) => vec![ServerMessage::error(e)],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Start { behavior, seed } => match self.start(behavior, seed) {
                Ok(frame) => vec![frame],
                Err(e) => vec![ServerMessage::error(e)],
            },
            ClientMessage::Keys {
                up,
                down,
                left,
                right,
            } => {
                if let Mode::Live(l) = &mut self.mode {
                    l.keys = KeySet::new(up, down, left, right);
                }
                Vec::new()
            }
            ClientMessage::Stop => match self.mode {
                Mode::Idle => Vec::new(),
                _ => {
                    let mut out = self.end(Footer::Stopped);
                    out.push(ServerMessage::TrialEnd { lap_time: None });
                    out
                }
            },
            ClientMessage::Replay { log } => match self.open_replay(&log) {
                Ok(replay) => {
                    let mut out = self.end(Footer::Stopped);
                    self.mode = Mode::Replay(Box::new(replay));
                    out.extend(self.tick());
                    out
                }
                Err(e) => vec![ServerMessage::error(e)],
            },
        }
    }

    fn start(&mut self, behavior: BehaviorKind, seed: u64) -> Result<ServerMessage> {
        let mut cfg = TrialConfig::new(behavior, seed);
        cfg.path = self.opts.path.clone();
        let world = World::new(&cfg)?;
        let budget = match self.opts.max_t {
            Some(t) => Some(tick_budget(t, cfg.dt)),
            None => None,
        };
        let log = match &self.opts.log_dir {
            Some(dir) => Some(create_log(dir, &cfg)?),
            None => None,
        };
        let frame = ServerMessage::State(StateFrame::of_world(&world));
        self.end(Footer::Stopped);
        self.mode = Mode::Live(Box::new(Live {
            world,
            keys: KeySet::NONE,
            budget,
            log,
        }));
        Ok(frame)
    }

    /// Closes whatever is running. Errors from closing the log are reported
    /// as messages.
    fn end(&mut self, footer: Footer) -> Vec<ServerMessage> {
        let mut out = Vec::new();
        if let Mode::Live(l) = std::mem::replace(&mut self.mode, Mode::Idle) {
            if let Some((path, mut sink)) = l.log {
                if let Err(e) = sink.finish(footer) {
                    out.push(ServerMessage::error(format!("log {}: {e}", path.display())));
                }
                self.last_log = Some(path);
            }
        }
        out
    }

    /// Advances one physics step. Emits a state frame on frame boundaries
    /// and a `trial_end` when the trial or replay finishes.
    pub fn tick(&mut self) -> Vec<ServerMessage> {
        match &mut self.mode {
            Mode::Idle => Vec::new(),
            Mode::Live(l) => {
                let rec = l.world.tick(l.keys);
                let mut out = Vec::new();
                if let Some((path, sink)) = &mut l.log {
                    if let Err(e) = sink.append_record(&rec) {
                        out.push(ServerMessage::error(format!("log {}: {e}", path.display())));
                        l.log = None;
                    }
                }
                let lap_time = l.world.lap().lap_times.first().copied();
                let timed_out = l.budget.is_some_and(|b| l.world.ticks() >= b);
                if l.world.is_frame_tick() || lap_time.is_some() || timed_out {
                    out.push(ServerMessage::State(StateFrame::of_world(&l.world)));
                }
                if let Some(lap_time) = lap_time {
                    out.extend(self.end(Footer::Lap { lap_time }));
                    out.push(ServerMessage::TrialEnd {
                        lap_time: Some(lap_time),
                    });
                } else if timed_out {
                    out.extend(self.end(Footer::Timeout));
                    out.push(ServerMessage::TrialEnd { lap_time: None });
                }
                out
            }
            Mode::Replay(r) => {
                let mut out = Vec::new();
                if let Some(rec) = r.log.records.get(r.next) {
                    r.next += 1;
                    let last = r.next == r.log.records.len();
                    let frame_hz = r.log.header.config.frame_hz;
                    if last || is_sample_tick(r.next as u64, frame_hz, r.physics_hz) {
                        let laps = u32::from(last && r.log.footer.lap_time().is_some());
                        let lap = LapView {
                            visited: rec.visited,
                            total: r.total,
                            laps,
                        };
                        out.push(ServerMessage::State(StateFrame::of_record(
                            rec,
                            r.log.header.config.behavior,
                            lap,
                        )));
                    }
                }
                if r.next >= r.log.records.len() {
                    let lap_time = r.log.footer.lap_time();
                    self.mode = Mode::Idle;
                    out.push(ServerMessage::TrialEnd { lap_time });
                }
                out
            }
        }
    }

    fn open_replay(&self, name: &str) -> Result<Replay> {
        let dir = self
            .opts
            .log_dir
            .as_deref()
            .ok_or_else(|| Error::Message("replay needs a log directory".into()))?;
        let path = resolve_log(dir, name)?;
        let log = load_log(BufReader::new(File::open(&path)?))?;
        let physics_hz = log.header.config.physics_hz()?;
        let total = log.header.config.path.course()?.len() as u32;
        Ok(Replay {
            log,
            total,
            physics_hz,
            next: 0,
        })
    }
}

/// Creates `<behavior>-<seed>-<n>.jsonl` with the first free `n`.
fn create_log(dir: &Path, cfg: &TrialConfig) -> Result<(PathBuf, LogSink)> {
    std::fs::create_dir_all(dir)?;
    for n in 1u32.. {
        let path = dir.join(format!("{}-{}-{n}.jsonl", cfg.behavior, cfg.seed));
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(f) => {
                let header = LogHeader::new(cfg.clone(), "live");
                let sink = LogWriter::new(BufWriter::new(f), &header)?;
                return Ok((path, sink));
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("log names exhausted")
}

/// Maps a replay request to a file inside `dir`: either a relative path or
/// a bare id with the `.jsonl` extension left off. Anything that would
/// leave the directory is refused.
pub fn resolve_log(dir: &Path, name: &str) -> Result<PathBuf> {
    let rel = Path::new(name);
    if name.is_empty() || !rel.components().all(|c| matches!(c, Component::Normal(_))) {
        return Err(Error::Message(format!("bad log name {name:?}")));
    }
    let root = dir.canonicalize()?;
    for candidate in [dir.join(rel), dir.join(format!("{name}.jsonl"))] {
        if let Ok(full) = candidate.canonicalize() {
            if full.starts_with(&root) && full.is_file() {
                return Ok(full);
            }
        }
    }
    Err(Error::Message(format!("no log named {name:?}")))
}
