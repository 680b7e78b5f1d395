//! Episodic environment: reset / step with the terminated-truncated split.

use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ScenarioConfig};
use crate::geometry::Vec2;
use crate::reward::{intermediate_reward, terminal_reward, RewardBreakdown};
use crate::rng::{episode_key, SeedNamespace, SimRng, POLICY_STREAM, WORLD_STREAM};
use crate::sensing::{Observation, Sensors};
use crate::sim::{sample_free_point, Human, Termination, WorldState};

/// Minimum straight-line distance between the agent's start and its goal.
pub const MIN_START_GOAL_DISTANCE: f64 = 3.0;

/// Extra free space between a spawning human and the agent, on top of the
/// two radii.
pub const HUMAN_SPAWN_MARGIN: f64 = 0.5;

/// Identifies one episode. The namespace keeps training, evaluation and
/// dataset episodes on disjoint generator keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EpisodeId {
    pub namespace: SeedNamespace,
    pub seed: u64,
    pub sub: u64,
}

impl EpisodeId {
    pub fn train(seed: u64) -> Self {
        EpisodeId {
            namespace: SeedNamespace::Train,
            seed,
            sub: 0,
        }
    }

    pub fn eval(seed: u64) -> Self {
        EpisodeId {
            namespace: SeedNamespace::Eval,
            seed,
            sub: 0,
        }
    }

    pub fn key(&self, config_seed: u64) -> [u8; 32] {
        episode_key(config_seed, self.namespace, self.seed, self.sub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Truncated,
}

impl From<Termination> for Outcome {
    fn from(t: Termination) -> Self {
        match t {
            Termination::Success => Outcome::Success,
            Termination::Collision => Outcome::Collision,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario too crowded: could not place {what} after {attempts} attempts")]
    TooCrowded { what: &'static str, attempts: usize },
    #[error("step called on a finished episode; call reset first")]
    EpisodeFinished,
    #[error("step called before the first reset")]
    NotReset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    /// Set on the step that ends the episode.
    pub outcome: Option<Outcome>,
    pub step_index: u64,
    pub episode_return: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    pub terminated: bool,
    pub truncated: bool,
    pub info: StepInfo,
}

/// Samples a fresh initial world for `id`.
pub fn reset_world(config: &ScenarioConfig, id: EpisodeId) -> Result<WorldState, EnvError> {
    config.validate()?;
    let mut rng = SimRng::from_key(id.key(config.seed), WORLD_STREAM);
    let arena = config.arena;
    let statics = &config.static_obstacles;
    let crowded = |what| EnvError::TooCrowded {
        what,
        attempts: crate::sim::MAX_SAMPLE_ATTEMPTS,
    };

    let agent_pos = sample_free_point(&mut rng, &arena, statics, config.agent_radius, |_| true)
        .ok_or_else(|| crowded("agent"))?;
    let agent_goal = sample_free_point(&mut rng, &arena, statics, config.agent_radius, |p| {
        p.distance(agent_pos) >= MIN_START_GOAL_DISTANCE
    })
    .ok_or_else(|| crowded("agent goal"))?;

    let hr = config.human_radius;
    let mut placed: Vec<Vec2> = Vec::with_capacity(config.n_humans);
    let mut humans = Vec::with_capacity(config.n_humans);
    for _ in 0..config.n_humans {
        let pos = sample_free_point(&mut rng, &arena, statics, hr, |p| {
            p.distance(agent_pos) >= config.agent_radius + hr + HUMAN_SPAWN_MARGIN
                && placed.iter().all(|&q| p.distance(q) >= 2.0 * hr)
        })
        .ok_or_else(|| crowded("human"))?;
        let goal = sample_free_point(&mut rng, &arena, statics, hr, |p| {
            p.distance(pos) >= crate::sim::HUMAN_GOAL_MIN_DISTANCE
        })
        .ok_or_else(|| crowded("human goal"))?;
        placed.push(pos);
        humans.push(Human {
            pos,
            radius: hr,
            goal,
            max_speed: config.sim.human_max_speed,
        });
    }

    Ok(WorldState {
        arena,
        agent_pos,
        agent_radius: config.agent_radius,
        agent_goal,
        humans,
        static_obstacles: statics.clone(),
        step_index: 0,
        rng,
    })
}

/// One environment instance. Single-threaded; run many instances for
/// parallel rollouts.
#[derive(Debug, Clone)]
pub struct Env {
    config: ScenarioConfig,
    sensors: Sensors,
    state: Option<WorldState>,
    episode: Option<EpisodeId>,
    finished: Option<Outcome>,
    episode_return: f64,
}

impl Env {
    pub fn new(config: ScenarioConfig) -> Result<Self, EnvError> {
        config.validate()?;
        Ok(Env {
            sensors: Sensors::new(config.sensors.clone()),
            config,
            state: None,
            episode: None,
            finished: None,
            episode_return: 0.0,
        })
    }

    /// Builds an environment from configuration text in the TOML schema.
    pub fn from_config_text(text: &str) -> Result<Self, EnvError> {
        Env::new(ScenarioConfig::from_toml_str(text)?)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn state(&self) -> Option<&WorldState> {
        self.state.as_ref()
    }

    pub fn episode(&self) -> Option<EpisodeId> {
        self.episode
    }

    pub fn finished(&self) -> Option<Outcome> {
        self.finished
    }

    pub fn episode_return(&self) -> f64 {
        self.episode_return
    }

    /// Starts a training-namespace episode.
    pub fn reset(&mut self, episode_seed: u64) -> Result<Observation, EnvError> {
        self.reset_episode(EpisodeId::train(episode_seed))
    }

    pub fn reset_episode(&mut self, id: EpisodeId) -> Result<Observation, EnvError> {
        let state = reset_world(&self.config, id)?;
        Ok(self.install(state, Some(id)))
    }

    /// Starts an episode from an explicit state, e.g. a loaded snapshot.
    pub fn reset_to_state(&mut self, state: WorldState) -> Observation {
        self.install(state, None)
    }

    fn install(&mut self, state: WorldState, id: Option<EpisodeId>) -> Observation {
        let obs = self.sensors.observe(&state);
        self.state = Some(state);
        self.episode = id;
        self.finished = None;
        self.episode_return = 0.0;
        obs
    }

    /// Generator for a policy acting in the current episode. Independent of
    /// the world's generator, so policy draws never perturb the simulation.
    pub fn policy_rng(&self) -> SimRng {
        let key = self
            .episode
            .map(|id| id.key(self.config.seed))
            .unwrap_or([0; 32]);
        SimRng::from_key(key, POLICY_STREAM)
    }

    pub fn observe(&self) -> Option<Observation> {
        self.state.as_ref().map(|s| self.sensors.observe(s))
    }

    pub fn step(&mut self, action: crate::sim::Action) -> Result<StepResult, EnvError> {
        if self.finished.is_some() {
            return Err(EnvError::EpisodeFinished);
        }
        let cfg = &self.config;
        let state = self.state.as_mut().ok_or(EnvError::NotReset)?;

        let prev = state.agent_pos;
        state.advance(action, &cfg.sim);

        let (reward, outcome) = match state.check_termination(cfg.goal_radius) {
            Some(t) => (terminal_reward(t, &cfg.rewards), Some(Outcome::from(t))),
            None => {
                let r = intermediate_reward(
                    prev,
                    state.agent_pos,
                    state.agent_goal,
                    state.humans.iter().map(|h| h.pos),
                    &cfg.rewards,
                    &cfg.sim,
                );
                let truncated = state.step_index >= cfg.max_steps;
                (r, truncated.then_some(Outcome::Truncated))
            }
        };
        self.episode_return += reward.total;
        self.finished = outcome;

        let observation = self.sensors.observe(state);
        Ok(StepResult {
            observation,
            reward,
            terminated: matches!(outcome, Some(Outcome::Success | Outcome::Collision)),
            truncated: outcome == Some(Outcome::Truncated),
            info: StepInfo {
                outcome,
                step_index: state.step_index,
                episode_return: self.episode_return,
            },
        })
    }
}
