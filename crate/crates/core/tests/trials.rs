use std::fs::File;
use std::io::{BufReader, BufWriter};

use emotive_follow::behaviors::{is_follower_speed, Behavior, Clock, StepInput};
use emotive_follow::geometry::compute_observation;
use emotive_follow::kinematics::RobotGeometry;
use emotive_follow::leader::{parse_leader_script, reference_lap_script, REFERENCE_LAP};
use emotive_follow::sim::run_trial_with;
use emotive_follow::telemetry::Footer;
use emotive_follow::{
    load_log, run_trial, summarize, BehaviorKind, KeySet, Pose, TrialConfig, World,
};
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn log_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sad.jsonl");
    let cfg = TrialConfig::new(BehaviorKind::Sad, 11);
    let log = run_trial(&cfg, &mut reference_lap_script(), 40.0).unwrap();
    log.write_to(BufWriter::new(File::create(&path).unwrap())).unwrap();

    let back = load_log(BufReader::new(File::open(&path).unwrap())).unwrap();
    assert_eq!(back, log);
    assert_eq!(back.footer, Footer::Timeout);
    assert_eq!(summarize(&back), summarize(&log));
    assert_eq!(std::fs::read(&path).unwrap(), log.to_bytes());
}

#[test]
fn reference_script_parses_and_prints_back() {
    let script = parse_leader_script(REFERENCE_LAP).unwrap();
    assert_eq!(script, reference_lap_script());
    assert_eq!(parse_leader_script(&script.to_text()).unwrap(), script);
    // the last segment runs past the lap so the finish is never cut short
    assert!((script.total_duration() - 172.348).abs() < 1e-9);
}

#[test]
fn reference_lap_metrics() {
    for kind in BehaviorKind::ALL {
        let log = run_trial(&TrialConfig::new(kind, 0), &mut reference_lap_script(), 300.0).unwrap();
        let m = summarize(&log);
        assert_eq!(m.lap_time_s, Some(150.8), "{kind}");
        assert!(m.min_d <= m.mean_d && m.mean_d <= m.p95_d, "{kind}: {m:?}");
        match kind {
            BehaviorKind::Happy => assert!(m.spin_count > 0),
            BehaviorKind::Angry => assert!(m.pattern_switch_count > 0),
            _ => {}
        }
    }
}

#[test]
fn seeds_only_matter_for_angry_and_jitter() {
    let bytes = |kind, seed, jitter| {
        let mut cfg = TrialConfig::new(kind, seed);
        cfg.tracker_jitter = jitter;
        run_trial(&cfg, &mut reference_lap_script(), 30.0).unwrap().records
    };
    assert_eq!(bytes(BehaviorKind::Sad, 1, false), bytes(BehaviorKind::Sad, 2, false));
    assert_ne!(bytes(BehaviorKind::Angry, 1, false), bytes(BehaviorKind::Angry, 2, false));
    assert_ne!(bytes(BehaviorKind::Neutral, 1, true), bytes(BehaviorKind::Neutral, 2, true));
}

#[test]
fn records_match_world_state() {
    let cfg = TrialConfig::new(BehaviorKind::Happy, 0);
    let mut checked = 0;
    run_trial_with(&cfg, &mut reference_lap_script(), 20.0, "test", |w: &World, r| {
        assert_eq!(r.state, w.behavior().state_name());
        assert_eq!(r.cmd(), w.last_applied_command());
        assert_eq!(r.moving, w.last_observation().unwrap().leader_moving);
        checked += 1;
    })
    .unwrap();
    assert_eq!(checked, 2000);
}

#[test]
fn follower_never_leaves_the_arena() {
    let mut cfg = TrialConfig::new(BehaviorKind::Angry, 3);
    cfg.tracker_jitter = true;
    let mut w = World::new(&cfg).unwrap();
    for n in 0..6000u32 {
        // circle the leader left for a while, then drive at the wall
        let keys = if n < 3000 {
            KeySet::new(true, false, true, false)
        } else {
            KeySet::new(true, false, false, false)
        };
        w.tick(keys);
        for p in [w.leader().position, w.follower().position] {
            assert!((0.0..=1280.0).contains(&p.x) && (0.0..=720.0).contains(&p.y), "{p:?}");
        }
    }
}

fn kind() -> impl Strategy<Value = BehaviorKind> {
    prop::sample::select(BehaviorKind::ALL.to_vec())
}

proptest! {
    /// Whatever the two poses, every behavior picks speeds from its table
    /// and stays within the wheel limit.
    #[test]
    fn commands_come_from_the_speed_table(
        kind in kind(),
        seed in any::<u64>(),
        lx in 0.0..1280.0f64, ly in 0.0..720.0f64, lh in -PI..PI,
        fx in 0.0..1280.0f64, fy in 0.0..720.0f64, fh in -PI..PI,
        steps in 1usize..40,
    ) {
        let leader = Pose::new(lx, ly, lh);
        let follower = Pose::new(fx, fy, fh);
        let mut b = Behavior::new(kind, seed);
        for n in 0..steps as u64 {
            let input = StepInput {
                obs: compute_observation(&leader, &follower, true),
                leader,
                follower,
                clock: Clock { now_us: n * 10_000, dt_us: 10_000 },
            };
            let c = b.step(&input);
            b.record_applied(c, 0.01, &RobotGeometry::THYMIO);
            prop_assert!(is_follower_speed(c.v_left) && is_follower_speed(c.v_right), "{c:?}");
            prop_assert!(c.v_left.abs() <= 0.2 && c.v_right.abs() <= 0.2);
        }
    }

    /// Logs survive serialization for arbitrary leader inputs.
    #[test]
    fn random_drives_round_trip(kind in kind(), seed in any::<u64>(), keys in prop::collection::vec(0u8..16, 1..20)) {
        let cfg = TrialConfig::new(kind, seed);
        let mut input = |t: f64| {
            let m = keys[((t * 2.0) as usize).min(keys.len() - 1)];
            KeySet::new(m & 1 != 0, m & 2 != 0, m & 4 != 0, m & 8 != 0)
        };
        let log = run_trial(&cfg, &mut input, 5.0).unwrap();
        prop_assert_eq!(log.records.len(), 500);
        let back = load_log(log.to_bytes().as_slice()).unwrap();
        prop_assert_eq!(back, log);
    }
}
