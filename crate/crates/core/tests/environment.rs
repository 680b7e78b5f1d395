use socnav::dataset::{self, DatasetError, GridDatasetHeader, HEADER_LEN};
use socnav::eval::{run_evaluation_parallel, sliding_window_stats};
use socnav::policy::{IdlePolicy, RandomPolicy, ScriptedPolicy};
use socnav::sensing::BufferData;
use socnav::{run_evaluation, Action, Env, EnvError, Modality, Outcome, ScenarioConfig, VecEnv};

fn empty_arena() -> ScenarioConfig {
    ScenarioConfig {
        n_humans: 0,
        ..Default::default()
    }
}

#[test]
fn config_text_builds_env_with_named_buffers() {
    let mut env = Env::from_config_text("version = 1\nn_humans = 2\n").unwrap();
    let obs = env.reset(0).unwrap();
    let (buffers, goal) = obs.named_buffers();
    let names: Vec<_> = buffers.iter().map(|b| (b.name, b.shape.clone())).collect();
    assert_eq!(
        names,
        vec![
            ("closest", vec![2]),
            ("raycast", vec![360]),
            ("leog", vec![60, 60])
        ]
    );
    assert!(matches!(buffers[2].data, BufferData::U8(c) if c.len() == 3600));
    assert!(goal[0] >= 3.0);
}

#[test]
fn named_buffers_follow_configured_modalities() {
    let mut cfg = empty_arena();
    cfg.sensors.modalities = vec![Modality::Raycast];
    cfg.sensors.ray_count = 16;
    let mut env = Env::new(cfg).unwrap();
    let obs = env.reset(0).unwrap();
    let (buffers, _) = obs.named_buffers();
    assert_eq!(buffers.len(), 1);
    assert_eq!(
        (buffers[0].name, buffers[0].shape.as_slice()),
        ("raycast", &[16][..])
    );
}

#[test]
fn bad_config_text_is_rejected() {
    assert!(matches!(
        Env::from_config_text("n_humans = -1"),
        Err(EnvError::Config(_))
    ));
    let err = Env::from_config_text("[sim]\ndt = 0.0").unwrap_err();
    assert!(err.to_string().contains("sim.dt"), "{err}");
}

#[test]
fn actions_are_clamped() {
    let cfg = empty_arena();
    let mut a = Env::new(cfg.clone()).unwrap();
    let mut b = Env::new(cfg).unwrap();
    a.reset(3).unwrap();
    b.reset(3).unwrap();
    let sa = a.step(Action::new(2.0, -7.0)).unwrap();
    let sb = b.step(Action::new(1.0, -1.0)).unwrap();
    assert_eq!(sa, sb);
    assert_eq!(Action::new(2.0, 0.5).vx(), 1.0);
    assert_eq!(Action::new(f64::NAN, 0.5).vx(), 0.0);
}

#[test]
fn step_lifecycle_errors() {
    let mut env = Env::new(empty_arena()).unwrap();
    assert!(matches!(env.step(Action::IDLE), Err(EnvError::NotReset)));
    env.reset(0).unwrap();
    let mut last = None;
    for _ in 0..env.config().max_steps {
        let s = env.step(Action::IDLE).unwrap();
        if s.info.outcome.is_some() {
            last = Some(s);
            break;
        }
    }
    let last = last.expect("episode must end by max_steps");
    assert!(last.truncated && !last.terminated);
    assert_eq!(last.info.outcome, Some(Outcome::Truncated));
    assert_eq!(last.info.step_index, 200);
    assert!(matches!(
        env.step(Action::IDLE),
        Err(EnvError::EpisodeFinished)
    ));
    env.reset(1).unwrap();
    env.step(Action::IDLE).unwrap();
}

#[test]
fn idle_policy_in_empty_arena_always_truncates() {
    let report = run_evaluation(&mut IdlePolicy, &empty_arena(), 50, 0).unwrap();
    assert_eq!(report.rates.truncated, 1.0);
    assert_eq!(report.counts.truncated, 50);
    // Every step costs exactly the step penalty.
    for e in &report.episodes {
        assert_eq!(e.episode_return, -5.0 * 200.0);
    }
}

#[test]
fn parallel_evaluation_matches_sequential() {
    let cfg = ScenarioConfig::default();
    let seq = run_evaluation(&mut ScriptedPolicy::new(&cfg.sim), &cfg, 40, 10).unwrap();
    let par = run_evaluation_parallel(|| ScriptedPolicy::new(&cfg.sim), &cfg, 40, 10).unwrap();
    assert_eq!(seq, par);
    let seq = run_evaluation(&mut RandomPolicy::default(), &cfg, 40, 10).unwrap();
    let par = run_evaluation_parallel(RandomPolicy::default, &cfg, 40, 10).unwrap();
    assert_eq!(seq, par);
}

#[test]
fn eval_report_json_round_trips() {
    let cfg = ScenarioConfig::default();
    let report = run_evaluation(&mut RandomPolicy::default(), &cfg, 25, 0).unwrap();
    let back: socnav::EvalReport = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(back, report);
    assert_eq!(report.windows.len(), 16);
}

#[test]
fn window_statistics_by_hand() {
    use Outcome::*;
    let seq = [Success, Success, Collision, Truncated, Success];
    let w = sliding_window_stats(&seq, 4);
    assert_eq!(w.len(), 2);
    assert_eq!(w[0].mean.success, 0.5);
    assert_eq!(w[0].std.success, 0.5);
    assert_eq!(w[1].mean.collision, 0.25);
    assert!((w[1].std.collision - 0.1875f64.sqrt()).abs() < 1e-15);
}

#[test]
fn vec_env_is_reproducible() {
    let cfg = ScenarioConfig::default();
    let run = || {
        let mut v = VecEnv::new(&cfg, 4).unwrap();
        v.reset().unwrap();
        let mut trace = Vec::new();
        for i in 0..300 {
            let actions: Vec<Action> = (0..4)
                .map(|k| Action::new(((i + k) % 3) as f64 - 1.0, 0.5))
                .collect();
            for s in v.step(&actions).unwrap() {
                trace.push((s.step.reward.total.to_bits(), s.reset_observation.is_some()));
            }
        }
        trace
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.iter().any(|t| t.1), "no slot finished an episode");
}

#[test]
fn dataset_round_trip() {
    let cfg = ScenarioConfig::default();
    let mut bytes = Vec::new();
    assert_eq!(dataset::collect(&cfg, 100, 3, &mut bytes).unwrap(), 100);
    assert_eq!(bytes.len(), HEADER_LEN + 100 * 3600);
    assert_eq!(bytes.len(), 360_056);

    let mut reader = dataset::read(bytes.as_slice()).unwrap();
    assert_eq!(reader.header(), &GridDatasetHeader::for_config(&cfg, 100));
    assert!(reader.header().matches(&cfg));
    let grids: Vec<Vec<u8>> = reader.by_ref().collect::<Result<_, _>>().unwrap();
    assert_eq!(grids.len(), 100);
    assert!(grids
        .iter()
        .all(|g| g.len() == 3600 && g.iter().all(|&c| c <= 1)));
    assert!(grids.iter().any(|g| g.contains(&1)));

    // Same seed, same bytes; a different seed differs.
    let mut again = Vec::new();
    dataset::collect(&cfg, 100, 3, &mut again).unwrap();
    assert_eq!(again, bytes);
    let mut other = Vec::new();
    dataset::collect(&cfg, 100, 4, &mut other).unwrap();
    assert_ne!(other, bytes);
}

#[test]
fn dataset_reader_rejects_damage() {
    let cfg = ScenarioConfig::default();
    let mut bytes = Vec::new();
    dataset::collect(&cfg, 3, 0, &mut bytes).unwrap();

    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert!(matches!(
        dataset::read(bad.as_slice()),
        Err(DatasetError::BadMagic)
    ));

    let cut = &bytes[..bytes.len() - 10];
    let out: Result<Vec<_>, _> = dataset::read(cut).unwrap().collect();
    assert!(matches!(out, Err(DatasetError::Truncated { at: 2, .. })));

    let mut long = bytes.clone();
    long.push(0);
    let out: Result<Vec<_>, _> = dataset::read(long.as_slice()).unwrap().collect();
    assert!(matches!(out, Err(DatasetError::TrailingData { .. })));

    let mut cell = bytes.clone();
    cell[HEADER_LEN + 5] = 7;
    let out: Result<Vec<_>, _> = dataset::read(cell.as_slice()).unwrap().collect();
    assert!(matches!(
        out,
        Err(DatasetError::BadCell { grid: 0, value: 7 })
    ));
}

#[test]
fn dataset_requires_leog() {
    let mut cfg = ScenarioConfig::default();
    cfg.sensors.modalities = vec![Modality::Raycast];
    let mut sink = Vec::new();
    assert!(matches!(
        dataset::collect(&cfg, 10, 0, &mut sink),
        Err(DatasetError::LeogDisabled)
    ));
    assert!(sink.is_empty());
}
