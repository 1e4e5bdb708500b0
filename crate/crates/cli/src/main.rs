use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use emotive_follow::leader::{parse_leader_script, reference_lap_script};
use emotive_follow::session::SessionOptions;
use emotive_follow::sim::{CoursePath, PathFile, PathSpec};
use emotive_follow::{load_log, run_trial, summarize, BehaviorKind, TrialConfig};

#[derive(Parser)]
#[command(name = "emotive-follow", version, about = "Leader-follower simulator with emotive followers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one headless trial. Exits 0 when the lap completes, 2 on timeout.
    Run {
        #[arg(long)]
        behavior: BehaviorKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Leader script; defaults to the bundled reference lap.
        #[arg(long)]
        script: Option<PathBuf>,
        /// `default` or a path file.
        #[arg(long, default_value = "default")]
        path: String,
        #[arg(long, default_value_t = 300.0)]
        max_t: f64,
        /// Write the trial log here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Add ±1 px seeded tracker noise.
        #[arg(long)]
        jitter: bool,
    },
    /// Serve the live protocol on /ws.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, default_value = "default")]
        path: String,
        /// Directory for live trial logs and replay lookups.
        #[arg(long)]
        log_dir: Option<PathBuf>,
        /// End live trials after this much simulated time.
        #[arg(long)]
        max_t: Option<f64>,
    },
    /// Print summary metrics of a trial log as JSON.
    Summarize { log: PathBuf },
    /// Print the checkpoints of a course as a path file.
    Path {
        #[arg(default_value = "default")]
        path: String,
    },
}

fn path_spec(arg: &str) -> Result<PathSpec> {
    if arg == "default" {
        return Ok(PathSpec::Default);
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading path file {arg}"))?;
    Ok(PathSpec::Custom(PathFile::parse(&text)?))
}

#[allow(clippy::too_many_arguments)]
fn run(
    behavior: BehaviorKind,
    seed: u64,
    script: Option<&Path>,
    path: &str,
    max_t: f64,
    out: Option<&Path>,
    jitter: bool,
) -> Result<ExitCode> {
    let mut script = match script {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading script {}", p.display()))?;
            parse_leader_script(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => reference_lap_script(),
    };
    let mut cfg = TrialConfig::new(behavior, seed);
    cfg.path = path_spec(path)?;
    cfg.tracker_jitter = jitter;
    let log = run_trial(&cfg, &mut script, max_t)?;
    if let Some(out) = out {
        let f = File::create(out).with_context(|| format!("creating {}", out.display()))?;
        let mut w = BufWriter::new(f);
        log.write_to(&mut w)?;
        w.flush()?;
    }
    println!("{}", serde_json::to_string(&summarize(&log))?);
    Ok(if log.timed_out() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

async fn serve(addr: SocketAddr, opts: SessionOptions) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    let local = listener.local_addr()?;
    println!("listening on ws://{local}/ws");
    std::io::stdout().flush()?;
    emotive_follow_cli::server::serve(listener, opts).await?;
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    // Usage errors exit 1; 2 is reserved for trial timeouts.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run {
            behavior,
            seed,
            script,
            path,
            max_t,
            out,
            jitter,
        } => run(behavior, seed, script.as_deref(), &path, max_t, out.as_deref(), jitter),
        Command::Serve {
            addr,
            path,
            log_dir,
            max_t,
        } => path_spec(&path).and_then(|path| {
            let opts = SessionOptions {
                path,
                log_dir,
                max_t,
            };
            tokio::runtime::Runtime::new()?.block_on(serve(addr, opts))?;
            Ok(ExitCode::SUCCESS)
        }),
        Command::Summarize { log } => (|| {
            let f = File::open(&log).with_context(|| format!("opening {}", log.display()))?;
            let log = load_log(BufReader::new(f))?;
            println!("{}", serde_json::to_string(&summarize(&log))?);
            Ok(ExitCode::SUCCESS)
        })(),
        Command::Path { path } => (|| {
            let course = path_spec(&path)?.course()?;
            println!("{}", serde_json::to_string(&CoursePath::to_file(&course))?);
            Ok(ExitCode::SUCCESS)
        })(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
