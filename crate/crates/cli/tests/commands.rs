use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use socnav::policy::{Policy, ScriptedPolicy};
use socnav::{Env, EvalReport, ScenarioConfig, WorldState};

fn socnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_socnav"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    v.sort();
    v
}

#[test]
fn simulate_scripted_reaches_goal_in_empty_arena() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "empty.toml", "version = 1\nn_humans = 0\n");
    let v = json(&socnav(&["simulate", "--config", &cfg, "--seed", "3"]));
    assert_eq!(v["outcome"], "success");
    assert_eq!(v["rewards"].as_array().unwrap().last().unwrap(), 500.0);
    assert_eq!(v["steps"], v["rewards"].as_array().unwrap().len());
}

#[test]
fn simulate_zero_steps_truncates_immediately() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let v = json(&socnav(&["simulate", "--config", &cfg, "--steps", "0"]));
    assert_eq!(v["outcome"], "truncated");
    assert_eq!(v["steps"], 0);
    assert_eq!(v["return"], 0.0);
    assert!(v["rewards"].as_array().unwrap().is_empty());
}

#[test]
fn simulate_matches_library_rewards() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path(), "c.toml", "version = 1\nseed = 4\n");
    let v = json(&socnav(&[
        "simulate", "--config", &cfg_path, "--seed", "11",
    ]));

    let cfg = ScenarioConfig::from_toml_str("version = 1\nseed = 4\n").unwrap();
    let mut policy = ScriptedPolicy::new(&cfg.sim);
    let mut env = Env::new(cfg).unwrap();
    let mut obs = env.reset(11).unwrap();
    policy.begin_episode(env.policy_rng());
    let mut expected = Vec::new();
    loop {
        let s = env.step(policy.act(&obs)).unwrap();
        expected.push(s.reward.total);
        if s.info.outcome.is_some() {
            break;
        }
        obs = s.observation;
    }
    let got: Vec<f64> = v["rewards"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_f64().unwrap())
        .collect();
    assert_eq!(got, expected);
    assert_eq!(v["return"].as_f64().unwrap(), env.episode_return());
}

#[test]
fn simulate_renders_frames_and_dumps_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let frames = dir.path().join("frames");
    let state = dir.path().join("state.json");
    let args = [
        "simulate",
        "--config",
        &cfg,
        "--steps",
        "6",
        "--policy",
        "random",
        "--render-dir",
        frames.to_str().unwrap(),
        "--render-stride",
        "2",
        "--dump-state",
        state.to_str().unwrap(),
    ];
    let v = json(&socnav(&args));
    let steps = v["steps"].as_u64().unwrap();
    let names = files_in(&frames);
    let expected: Vec<String> = (0..=steps)
        .filter(|s| s % 2 == 0)
        .map(|s| format!("frame_{s:06}.ppm"))
        .collect();
    assert_eq!(names, expected);
    let img = fs::read(frames.join("frame_000000.ppm")).unwrap();
    let header = b"P6\n500 500\n255\n";
    assert!(img.starts_with(header));
    assert_eq!(img.len(), header.len() + 500 * 500 * 3);

    let snap = WorldState::from_snapshot(&fs::read_to_string(&state).unwrap()).unwrap();
    assert_eq!(snap.step_index, steps);

    // Same flags, same frames.
    let again = dir.path().join("again");
    let mut args2 = args;
    args2[8] = again.to_str().unwrap();
    json(&socnav(&args2));
    for name in names {
        assert_eq!(
            fs::read(frames.join(&name)).unwrap(),
            fs::read(again.join(&name)).unwrap()
        );
    }
}

#[test]
fn bad_config_fails_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(
        dir.path(),
        "bad.toml",
        "version = 1\n[sim]\ndt = \"fast\"\n",
    );
    let out_dir = dir.path().join("out");
    fs::create_dir(&out_dir).unwrap();
    let frames = out_dir.join("frames");
    let o = |name: &str| out_dir.join(name).to_str().unwrap().to_owned();

    let runs = [
        socnav(&[
            "simulate",
            "--config",
            &bad,
            "--render-dir",
            frames.to_str().unwrap(),
            "--dump-state",
            &o("s.json"),
        ]),
        socnav(&[
            "collect",
            "--config",
            &bad,
            "--samples",
            "5",
            "--out",
            &o("d.osgd"),
        ]),
        socnav(&[
            "evaluate",
            "--config",
            &bad,
            "--episodes",
            "2",
            "--report",
            &o("r.json"),
        ]),
    ];
    for out in &runs {
        assert!(!out.status.success());
        assert!(out.stdout.is_empty());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("line 3") && err.contains("dt"), "{err}");
    }
    assert!(files_in(&out_dir).is_empty());

    let invalid = write_config(dir.path(), "invalid.toml", "agent_radius = -1.0\n");
    let out = socnav(&["simulate", "--config", &invalid]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("agent_radius"));

    let out = socnav(&["simulate", "--config", &o("missing.toml")]);
    assert!(!out.status.success());
}

#[test]
fn collect_writes_digested_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let a = dir.path().join("a.osgd");
    let b = dir.path().join("b.osgd");
    let run = |p: &Path| {
        json(&socnav(&[
            "collect",
            "--config",
            &cfg,
            "--samples",
            "100",
            "--seed",
            "2",
            "--out",
            p.to_str().unwrap(),
        ]))
    };
    let va = run(&a);
    let vb = run(&b);
    assert_eq!(va["samples"], 100);
    assert_eq!(va["bytes"], 360_056);
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes.len(), 360_056);
    assert_eq!(va["sha256"], hex::encode(Sha256::digest(&bytes)));
    assert_eq!(va["sha256"], vb["sha256"]);
    assert_eq!(
        socnav::dataset::read(bytes.as_slice()).unwrap().count(),
        100
    );
    assert_eq!(files_in(dir.path()), ["a.osgd", "b.osgd", "c.toml"]);
}

#[test]
fn collect_to_unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "");
    let target = dir.path().join("no/such/dir/d.osgd");
    let out = socnav(&[
        "collect",
        "--config",
        &cfg,
        "--samples",
        "3",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
}

#[test]
fn evaluate_idle_in_empty_arena_truncates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "n_humans = 0\n");
    let report = dir.path().join("r.json");
    let v = json(&socnav(&[
        "evaluate",
        "--config",
        &cfg,
        "--episodes",
        "20",
        "--policy",
        "idle",
        "--report",
        report.to_str().unwrap(),
    ]));
    assert_eq!(v["truncated_rate"], 1.0);
    assert_eq!(v["success_rate"], 0.0);
    assert_eq!(v["collision_rate"], 0.0);
    let r: EvalReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r.counts.truncated, 20);
}

#[test]
fn evaluate_scripted_rates_sum_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(dir.path(), "e.toml", "n_humans = 0\n");
    let crowd = write_config(dir.path(), "c.toml", "");
    let report = dir.path().join("r.json");
    let r = report.to_str().unwrap();

    let v = json(&socnav(&[
        "evaluate",
        "--config",
        &empty,
        "--episodes",
        "100",
        "--report",
        r,
    ]));
    assert!(v["success_rate"].as_f64().unwrap() >= 0.95);

    let v = json(&socnav(&[
        "evaluate",
        "--config",
        &crowd,
        "--episodes",
        "30",
        "--policy",
        "random",
        "--seed",
        "5",
        "--report",
        r,
    ]));
    let report: EvalReport = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let c = report.counts;
    assert_eq!(c.success + c.collision + c.truncated, 30);
    let sum: f64 = ["success_rate", "collision_rate", "truncated_rate"]
        .iter()
        .map(|k| v[k].as_f64().unwrap() * 30.0)
        .sum();
    assert!((sum - 30.0).abs() < 1e-9);
}
