//! Trial logs and summary metrics.
//!
//! A log is line-delimited JSON: one header line, one line per physics tick,
//! and a footer line. Field order is fixed and every number is rounded to at
//! most four decimals, so two runs of the same trial can be compared byte
//! for byte.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::kinematics::WheelCommand;
use crate::sim::TrialConfig;

pub const LOG_FORMAT: &str = "emotive-follow-log/1";

/// Rounds half away from zero to four decimals; negative zero becomes zero.
pub fn round4(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// One physics tick: poses and command at the end of the tick, plus the
/// observation the follower acted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub t: f64,
    pub lx: f64,
    pub ly: f64,
    pub lphi: f64,
    pub fx: f64,
    pub fy: f64,
    pub fphi: f64,
    pub vl: f64,
    pub vr: f64,
    pub state: String,
    pub d: f64,
    pub theta: f64,
    pub moving: bool,
    pub visited: u32,
}

impl TickRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        t: f64,
        leader: &Pose,
        follower: &Pose,
        cmd: WheelCommand,
        state: &str,
        d_norm: f64,
        theta_deg: f64,
        leader_moving: bool,
        visited: u32,
    ) -> Self {
        TickRecord {
            t,
            lx: leader.position.x,
            ly: leader.position.y,
            lphi: leader.heading,
            fx: follower.position.x,
            fy: follower.position.y,
            fphi: follower.heading,
            vl: cmd.v_left,
            vr: cmd.v_right,
            state: state.to_owned(),
            d: d_norm,
            theta: theta_deg,
            moving: leader_moving,
            visited,
        }
        .quantized()
    }

    /// The record as it reads back from a log file.
    pub fn quantized(mut self) -> Self {
        for v in [
            &mut self.t,
            &mut self.lx,
            &mut self.ly,
            &mut self.lphi,
            &mut self.fx,
            &mut self.fy,
            &mut self.fphi,
            &mut self.vl,
            &mut self.vr,
            &mut self.d,
            &mut self.theta,
        ] {
            *v = round4(*v);
        }
        self
    }

    pub fn cmd(&self) -> WheelCommand {
        WheelCommand::new(self.vl, self.vr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub format: String,
    pub config: TrialConfig,
    /// Free-form provenance tag. Never a wall-clock time, so logs stay
    /// reproducible.
    #[serde(default)]
    pub created: String,
}

impl LogHeader {
    pub fn new(config: TrialConfig, created: impl Into<String>) -> Self {
        LogHeader {
            format: LOG_FORMAT.to_owned(),
            config,
            created: created.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "end", rename_all = "lowercase")]
pub enum Footer {
    Lap { lap_time: f64 },
    Timeout,
    /// Ended by the operator before a lap completed.
    Stopped,
}

impl Footer {
    pub fn lap_time(&self) -> Option<f64> {
        match self {
            Footer::Lap { lap_time } => Some(*lap_time),
            Footer::Timeout | Footer::Stopped => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialLog {
    pub header: LogHeader,
    pub records: Vec<TickRecord>,
    pub footer: Footer,
}

impl TrialLog {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut sink = LogWriter::new(w, &self.header)?;
        for r in &self.records {
            sink.append_record(r)?;
        }
        sink.finish(self.footer)?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn timed_out(&self) -> bool {
        self.footer == Footer::Timeout
    }
}

/// Streams a log: header on creation, one line per record, footer on finish.
pub struct LogWriter<W: Write> {
    out: W,
    closed: bool,
}

impl<W: Write> LogWriter<W> {
    pub fn new(mut out: W, header: &LogHeader) -> Result<Self> {
        serde_json::to_writer(&mut out, header)?;
        out.write_all(b"\n")?;
        Ok(LogWriter { out, closed: false })
    }

    pub fn append_record(&mut self, r: &TickRecord) -> Result<()> {
        if self.closed {
            return Err(Error::LogClosed);
        }
        serde_json::to_writer(&mut self.out, &r.clone().quantized())?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(&mut self, footer: Footer) -> Result<()> {
        if self.closed {
            return Err(Error::LogClosed);
        }
        let footer = match footer {
            Footer::Lap { lap_time } => Footer::Lap {
                lap_time: round4(lap_time),
            },
            f => f,
        };
        serde_json::to_writer(&mut self.out, &footer)?;
        self.out.write_all(b"\n")?;
        self.out.flush()?;
        self.closed = true;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Reads a complete log, checking the format tag, strictly increasing `t`
/// and the presence of a footer.
pub fn load_log<R: BufRead>(source: R) -> Result<TrialLog> {
    let mut lines = source.lines().enumerate();
    let header: LogHeader = match lines.next() {
        None => return Err(Error::LogHeader("empty log".into())),
        Some((_, line)) => {
            let line = line?;
            serde_json::from_str(&line).map_err(|e| Error::LogHeader(e.to_string()))?
        }
    };
    if header.format != LOG_FORMAT {
        return Err(Error::LogHeader(format!(
            "unsupported format {:?}, expected {LOG_FORMAT:?}",
            header.format
        )));
    }

    let mut records: Vec<TickRecord> = Vec::new();
    let mut footer = None;
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if footer.is_some() {
            return Err(Error::LogRecord {
                line: line_no,
                msg: "content after footer".into(),
            });
        }
        let value: serde_json::Value = match serde_json::from_str(&line) {
            Ok(v) => v,
            // A half-written last line reads as truncation.
            Err(_) => break,
        };
        if value.get("end").is_some() {
            footer = Some(serde_json::from_value::<Footer>(value).map_err(|e| {
                Error::LogRecord {
                    line: line_no,
                    msg: e.to_string(),
                }
            })?);
            continue;
        }
        let rec: TickRecord = serde_json::from_value(value).map_err(|e| Error::LogRecord {
            line: line_no,
            msg: e.to_string(),
        })?;
        if let Some(prev) = records.last() {
            if rec.t <= prev.t {
                return Err(Error::LogRecord {
                    line: line_no,
                    msg: format!("t={} does not follow t={}", rec.t, prev.t),
                });
            }
        }
        records.push(rec);
    }

    match footer {
        Some(footer) => Ok(TrialLog {
            header,
            records,
            footer,
        }),
        None => Err(Error::LogTruncated {
            last_t: records.last().map(|r| r.t),
        }),
    }
}

/// Keep-up and expressiveness statistics for one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub mean_d: f64,
    pub p95_d: f64,
    pub min_d: f64,
    pub stop_fraction: f64,
    pub spin_count: u32,
    pub pattern_switch_count: u32,
    pub lap_time_s: Option<f64>,
    /// Records the distance statistics were taken over.
    pub moving_ticks: usize,
}

/// Distance statistics cover ticks where the leader was moving; if it never
/// moved they fall back to every tick.
pub fn summarize(log: &TrialLog) -> Metrics {
    let records = &log.records;
    let moving: Vec<&TickRecord> = records.iter().filter(|r| r.moving).collect();
    let basis: Vec<f64> = if moving.is_empty() {
        records.iter().map(|r| r.d).collect()
    } else {
        moving.iter().map(|r| r.d).collect()
    };

    let (mean_d, p95_d, min_d) = distance_stats(&basis);
    let stop_fraction = if moving.is_empty() {
        0.0
    } else {
        moving.iter().filter(|r| r.cmd().is_stop()).count() as f64 / moving.len() as f64
    };

    let spin_count = records
        .windows(2)
        .filter(|w| w[0].state == "Spinning" && w[1].state != "Spinning")
        .count() as u32;

    let mut pattern_switch_count = 0;
    let mut last_pattern: Option<&str> = None;
    for r in records.iter().filter(|r| r.state.starts_with("Pattern")) {
        if let Some(p) = last_pattern {
            if p != r.state {
                pattern_switch_count += 1;
            }
        }
        last_pattern = Some(&r.state);
    }

    Metrics {
        mean_d,
        p95_d,
        min_d,
        stop_fraction,
        spin_count,
        pattern_switch_count,
        lap_time_s: log.footer.lap_time(),
        moving_ticks: moving.len(),
    }
}

/// Mean, nearest-rank 95th percentile and minimum.
fn distance_stats(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
    (mean, sorted[rank - 1], sorted[0])
}
