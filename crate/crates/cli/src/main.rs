//! `socnav` command-line front end.
//!
//! Every command prints one JSON object on stdout. Errors go to stderr with
//! a nonzero exit status, and no output file is left behind on failure.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use socnav::dataset;
use socnav::eval::run_evaluation_parallel;
use socnav::policy::{IdlePolicy, Policy, RandomPolicy, ScriptedPolicy};
use socnav::render::{render_frame, RenderSpec};
use socnav::{Env, Outcome, ScenarioConfig};
use tempfile::NamedTempFile;

#[derive(Parser)]
#[command(name = "socnav", version, about = "Social-navigation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and print its outcome.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step cap; defaults to the scenario's `max_steps`.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, value_enum, default_value_t = PolicyKind::Scripted)]
        policy: PolicyKind,
        /// Write PPM frames into this directory.
        #[arg(long)]
        render_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        render_stride: u64,
        /// Pixels per meter.
        #[arg(long, default_value_t = 50.0)]
        render_scale: f64,
        /// Write the final world state snapshot to this file.
        #[arg(long)]
        dump_state: Option<PathBuf>,
    },
    /// Record occupancy-grid observations from random-policy rollouts.
    Collect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 50_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run evaluation episodes and write a report.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, value_enum, default_value_t = PolicyKind::Scripted)]
        policy: PolicyKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyKind {
    Scripted,
    Random,
    /// Never moves.
    Idle,
}

impl PolicyKind {
    fn build(self, config: &ScenarioConfig) -> Box<dyn Policy + Send> {
        match self {
            PolicyKind::Scripted => Box::new(
                ScriptedPolicy::new(&config.sim).with_closest_format(config.sensors.closest_format),
            ),
            PolicyKind::Random => Box::new(RandomPolicy::default()),
            PolicyKind::Idle => Box::new(IdlePolicy),
        }
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    ScenarioConfig::from_toml_str(&text)
        .with_context(|| format!("invalid config {}", path.display()))
}

fn outcome_name(o: Outcome) -> &'static str {
    match o {
        Outcome::Success => "success",
        Outcome::Collision => "collision",
        Outcome::Truncated => "truncated",
    }
}

/// Temp file beside `path`, renamed into place only once fully written.
fn staged_file(path: &Path) -> Result<NamedTempFile> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", path.display()))
}

fn commit(file: NamedTempFile, path: &Path) -> Result<()> {
    file.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn simulate(
    config: &Path,
    seed: u64,
    steps: Option<u64>,
    policy: PolicyKind,
    render: Option<RenderSpec>,
    dump_state: Option<&Path>,
) -> Result<serde_json::Value> {
    let cfg = load_config(config)?;
    if let Some(spec) = &render {
        spec.validate()?;
    }
    let cap = steps.unwrap_or(cfg.max_steps);
    let mut policy = policy.build(&cfg);
    let mut env = Env::new(cfg)?;
    let mut obs = env.reset(seed)?;
    policy.begin_episode(env.policy_rng());

    if let Some(spec) = &render {
        fs::create_dir_all(&spec.out_dir)
            .with_context(|| format!("cannot create {}", spec.out_dir.display()))?;
    }
    let draw = |env: &Env, spec: &RenderSpec| -> Result<()> {
        let state = env.state().expect("episode is running");
        if state.step_index.is_multiple_of(spec.stride) {
            let path = spec.frame_path(state.step_index);
            let mut out = BufWriter::new(
                fs::File::create(&path)
                    .with_context(|| format!("cannot write {}", path.display()))?,
            );
            render_frame(state, spec, &mut out)?;
            out.flush()?;
        }
        Ok(())
    };

    let mut rewards = Vec::new();
    let mut outcome = Outcome::Truncated;
    if let Some(spec) = &render {
        draw(&env, spec)?;
    }
    while (rewards.len() as u64) < cap {
        let step = env.step(policy.act(&obs))?;
        rewards.push(step.reward.total);
        if let Some(spec) = &render {
            draw(&env, spec)?;
        }
        if let Some(o) = step.info.outcome {
            outcome = o;
            break;
        }
        obs = step.observation;
    }

    if let Some(path) = dump_state {
        let mut file = staged_file(path)?;
        file.write_all(
            env.state()
                .expect("episode is running")
                .to_snapshot()
                .as_bytes(),
        )?;
        commit(file, path)?;
    }
    Ok(json!({
        "outcome": outcome_name(outcome),
        "return": env.episode_return(),
        "steps": rewards.len(),
        "rewards": rewards,
    }))
}

/// Forwards writes while hashing everything that passes through.
struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn collect(config: &Path, samples: u64, seed: u64, out: &Path) -> Result<serde_json::Value> {
    let cfg = load_config(config)?;
    let file = staged_file(out)?;
    let mut sink = HashingWriter {
        inner: BufWriter::new(file),
        hasher: Sha256::new(),
        bytes: 0,
    };
    let written = dataset::collect(&cfg, samples, seed, &mut sink)?;
    let digest = hex::encode(sink.hasher.finalize());
    let file = sink.inner.into_inner().map_err(|e| e.into_error())?;
    commit(file, out)?;
    Ok(json!({
        "samples": written,
        "bytes": sink.bytes,
        "sha256": digest,
        "path": out,
    }))
}

fn evaluate(
    config: &Path,
    episodes: usize,
    policy: PolicyKind,
    seed: u64,
    report_path: &Path,
) -> Result<serde_json::Value> {
    let cfg = load_config(config)?;
    if episodes == 0 {
        bail!("--episodes must be at least 1");
    }
    let report = run_evaluation_parallel(|| policy.build(&cfg), &cfg, episodes, seed)?;
    let mut file = staged_file(report_path)?;
    file.write_all(report.to_json().as_bytes())?;
    commit(file, report_path)?;
    Ok(json!({
        "episodes": report.counts.total(),
        "success_rate": report.rates.success,
        "collision_rate": report.rates.collision,
        "truncated_rate": report.rates.truncated,
        "report": report_path,
    }))
}

fn run(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            steps,
            policy,
            render_dir,
            render_stride,
            render_scale,
            dump_state,
        } => {
            let render = render_dir.map(|out_dir| RenderSpec {
                out_dir,
                stride: render_stride,
                scale: render_scale,
            });
            simulate(&config, seed, steps, policy, render, dump_state.as_deref())
        }
        Command::Collect {
            config,
            samples,
            seed,
            out,
        } => collect(&config, samples, seed, &out),
        Command::Evaluate {
            config,
            episodes,
            policy,
            seed,
            report,
        } => evaluate(&config, episodes, policy, seed, &report),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
