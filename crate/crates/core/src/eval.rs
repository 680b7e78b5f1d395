//! Outcome metrics, evaluation runs and the checkpoint schedule.
//!
//! Evaluation episodes always live in the `Eval` seed namespace, so they can
//! never replay a training episode.

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::env::{Env, EnvError, EpisodeId, Outcome};
use crate::policy::Policy;

/// Test episodes per sliding window.
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub id: EpisodeId,
    pub outcome: Outcome,
    pub steps: u64,
    pub episode_return: f64,
    /// Sum of the per-step reward totals, accumulated independently of the
    /// environment's own running return.
    pub reward_sum: f64,
}

/// Plays one episode to completion.
pub fn run_episode<P: Policy + ?Sized>(
    env: &mut Env,
    policy: &mut P,
    id: EpisodeId,
) -> Result<EpisodeSummary, EnvError> {
    let mut obs = env.reset_episode(id)?;
    policy.begin_episode(env.policy_rng());
    let mut reward_sum = 0.0;
    loop {
        let action = policy.act(&obs);
        let step = env.step(action)?;
        reward_sum += step.reward.total;
        if let Some(outcome) = step.info.outcome {
            return Ok(EpisodeSummary {
                id,
                outcome,
                steps: step.info.step_index,
                episode_return: step.info.episode_return,
                reward_sum,
            });
        }
        obs = step.observation;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub success: u64,
    pub collision: u64,
    pub truncated: u64,
}

impl OutcomeCounts {
    pub fn from_outcomes<'a>(outcomes: impl IntoIterator<Item = &'a Outcome>) -> Self {
        let mut c = OutcomeCounts::default();
        for o in outcomes {
            match o {
                Outcome::Success => c.success += 1,
                Outcome::Collision => c.collision += 1,
                Outcome::Truncated => c.truncated += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.success + self.collision + self.truncated
    }

    /// Exact rates `(success, collision, truncated)`; they sum to one.
    pub fn exact_rates(&self) -> [Ratio<u64>; 3] {
        let n = self.total().max(1);
        [
            Ratio::new(self.success, n),
            Ratio::new(self.collision, n),
            Ratio::new(self.truncated, n),
        ]
    }

    pub fn rates(&self) -> Rates {
        let n = self.total().max(1) as f64;
        Rates {
            success: self.success as f64 / n,
            collision: self.collision as f64 / n,
            truncated: self.truncated as f64 / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rates {
    pub success: f64,
    pub collision: f64,
    pub truncated: f64,
}

/// Mean and (population) standard deviation of the three outcome indicators
/// over `len` consecutive episodes starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub start: usize,
    pub len: usize,
    pub mean: Rates,
    pub std: Rates,
}

/// Slides a window over the episode sequence with stride one. Sequences
/// shorter than the window yield a single window over everything.
pub fn sliding_window_stats(outcomes: &[Outcome], window: usize) -> Vec<WindowStats> {
    assert!(window >= 1, "window must be at least one episode");
    if outcomes.is_empty() {
        return Vec::new();
    }
    let len = window.min(outcomes.len());
    outcomes
        .windows(len)
        .enumerate()
        .map(|(start, w)| {
            let mean = OutcomeCounts::from_outcomes(w).rates();
            // For 0/1 indicators the population variance is p(1 - p).
            let sd = |p: f64| (p * (1.0 - p)).max(0.0).sqrt();
            WindowStats {
                start,
                len,
                mean,
                std: Rates {
                    success: sd(mean.success),
                    collision: sd(mean.collision),
                    truncated: sd(mean.truncated),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub episodes: Vec<EpisodeSummary>,
    pub counts: OutcomeCounts,
    pub rates: Rates,
    pub mean_steps: f64,
    pub mean_return: f64,
    pub window: usize,
    pub windows: Vec<WindowStats>,
}

impl EvalReport {
    pub fn from_episodes(episodes: Vec<EpisodeSummary>, window: usize) -> Self {
        let outcomes: Vec<Outcome> = episodes.iter().map(|e| e.outcome).collect();
        let counts = OutcomeCounts::from_outcomes(&outcomes);
        let n = episodes.len().max(1) as f64;
        EvalReport {
            mean_steps: episodes.iter().map(|e| e.steps as f64).sum::<f64>() / n,
            mean_return: episodes.iter().map(|e| e.episode_return).sum::<f64>() / n,
            rates: counts.rates(),
            windows: sliding_window_stats(&outcomes, window),
            counts,
            window,
            episodes,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("eval report is always serializable")
    }
}

/// Runs `n_episodes` evaluation episodes with seeds `seed_base + i`.
pub fn run_evaluation<P: Policy + ?Sized>(
    policy: &mut P,
    config: &ScenarioConfig,
    n_episodes: usize,
    seed_base: u64,
) -> Result<EvalReport, EnvError> {
    assert!(n_episodes >= 1, "evaluation needs at least one episode");
    let mut env = Env::new(config.clone())?;
    let episodes = (0..n_episodes as u64)
        .map(|i| run_episode(&mut env, policy, EpisodeId::eval(seed_base.wrapping_add(i))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::from_episodes(episodes, DEFAULT_WINDOW))
}

/// Same as [`run_evaluation`] but spreads episodes across threads, one fresh
/// policy and environment per episode. Results are identical to the
/// sequential run for policies whose state is reset by `begin_episode`.
pub fn run_evaluation_parallel<P, F>(
    make_policy: F,
    config: &ScenarioConfig,
    n_episodes: usize,
    seed_base: u64,
) -> Result<EvalReport, EnvError>
where
    P: Policy,
    F: Fn() -> P + Sync,
{
    assert!(n_episodes >= 1, "evaluation needs at least one episode");
    Env::new(config.clone())?;
    let episodes = (0..n_episodes as u64)
        .into_par_iter()
        .map_init(
            || Env::new(config.clone()).expect("config validated above"),
            |env, i| {
                let mut policy = make_policy();
                run_episode(env, &mut policy, EpisodeId::eval(seed_base.wrapping_add(i)))
            },
        )
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport::from_episodes(episodes, DEFAULT_WINDOW))
}

/// Periodic evaluation during training: after every `eval_every` training
/// episodes, up to `train_episodes`, run `eval_episodes` test episodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSchedule {
    pub train_episodes: u64,
    pub eval_every: u64,
    pub eval_episodes: u64,
    pub window: usize,
}

impl Default for EvalSchedule {
    fn default() -> Self {
        EvalSchedule {
            train_episodes: 700,
            eval_every: 50,
            eval_episodes: 20,
            window: DEFAULT_WINDOW,
        }
    }
}

impl EvalSchedule {
    /// Training-episode counts at which evaluation happens.
    pub fn checkpoints(&self) -> Vec<u64> {
        assert!(self.eval_every >= 1, "eval_every must be positive");
        (1..=self.train_episodes / self.eval_every)
            .map(|k| k * self.eval_every)
            .collect()
    }

    pub fn total_test_episodes(&self) -> u64 {
        self.checkpoints().len() as u64 * self.eval_episodes
    }

    /// Evaluation seeds for checkpoint number `index` (0-based). Checkpoints
    /// use consecutive, non-overlapping seed blocks.
    pub fn checkpoint_seeds(&self, index: usize, seed_base: u64) -> std::ops::Range<u64> {
        let start = seed_base + index as u64 * self.eval_episodes;
        start..start + self.eval_episodes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointReport {
    pub train_episodes: u64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub schedule: EvalSchedule,
    pub checkpoints: Vec<CheckpointReport>,
    /// Window statistics over the concatenated test episodes of all
    /// checkpoints, in schedule order.
    pub windows: Vec<WindowStats>,
}

impl ProtocolReport {
    pub fn test_episodes(&self) -> usize {
        self.checkpoints
            .iter()
            .map(|c| c.report.episodes.len())
            .sum()
    }
}

/// Evaluates the policy returned by `policy_at(checkpoint)` at every
/// checkpoint of `schedule`. Training happens outside; the callback hands
/// over whatever policy exists after that many training episodes.
pub fn run_protocol<P, F>(
    schedule: &EvalSchedule,
    config: &ScenarioConfig,
    seed_base: u64,
    mut policy_at: F,
) -> Result<ProtocolReport, EnvError>
where
    P: Policy,
    F: FnMut(u64) -> P,
{
    let mut env = Env::new(config.clone())?;
    let mut checkpoints = Vec::new();
    let mut all = Vec::new();
    for (index, train_episodes) in schedule.checkpoints().into_iter().enumerate() {
        let mut policy = policy_at(train_episodes);
        let episodes = schedule
            .checkpoint_seeds(index, seed_base)
            .map(|seed| run_episode(&mut env, &mut policy, EpisodeId::eval(seed)))
            .collect::<Result<Vec<_>, _>>()?;
        all.extend(episodes.iter().map(|e| e.outcome));
        checkpoints.push(CheckpointReport {
            train_episodes,
            report: EvalReport::from_episodes(episodes, schedule.window),
        });
    }
    Ok(ProtocolReport {
        schedule: *schedule,
        checkpoints,
        windows: sliding_window_stats(&all, schedule.window),
    })
}
