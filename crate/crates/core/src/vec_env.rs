//! Batched stepping over independent environments.

use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::env::{Env, EnvError, EpisodeId, StepResult};
use crate::sensing::Observation;
use crate::sim::Action;

/// Result of one batched step for a single slot. When the slot's episode
/// ended, `reset_observation` holds the first observation of the next one.
#[derive(Debug, Clone)]
pub struct SlotStep {
    pub step: StepResult,
    pub reset_observation: Option<Observation>,
}

/// `N` environments sharing one scenario, each auto-resetting. Slot `i`
/// plays training episodes with seeds `(i << 32) | k` for `k = 0, 1, …`,
/// so the sequence of episodes does not depend on thread scheduling.
pub struct VecEnv {
    envs: Vec<Env>,
    episodes: Vec<u64>,
}

impl VecEnv {
    pub fn new(config: &ScenarioConfig, n: usize) -> Result<Self, EnvError> {
        let envs = (0..n)
            .map(|_| Env::new(config.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VecEnv {
            envs,
            episodes: vec![0; n],
        })
    }

    pub fn len(&self) -> usize {
        self.envs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envs.is_empty()
    }

    fn episode_id(slot: usize, k: u64) -> EpisodeId {
        EpisodeId::train(((slot as u64) << 32) | k)
    }

    pub fn reset(&mut self) -> Result<Vec<Observation>, EnvError> {
        self.envs
            .par_iter_mut()
            .zip(self.episodes.par_iter_mut())
            .enumerate()
            .map(|(slot, (env, k))| {
                let obs = env.reset_episode(Self::episode_id(slot, *k))?;
                *k += 1;
                Ok(obs)
            })
            .collect()
    }

    /// Steps every slot with its action, in parallel.
    pub fn step(&mut self, actions: &[Action]) -> Result<Vec<SlotStep>, EnvError> {
        assert_eq!(actions.len(), self.envs.len(), "one action per environment");
        self.envs
            .par_iter_mut()
            .zip(self.episodes.par_iter_mut())
            .zip(actions.par_iter())
            .enumerate()
            .map(|(slot, ((env, k), &action))| {
                let step = env.step(action)?;
                let reset_observation = if step.terminated || step.truncated {
                    let obs = env.reset_episode(Self::episode_id(slot, *k))?;
                    *k += 1;
                    Some(obs)
                } else {
                    None
                };
                Ok(SlotStep {
                    step,
                    reset_observation,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_independent_envs() {
        let cfg = ScenarioConfig {
            max_steps: 7,
            ..Default::default()
        };
        let mut vec_env = VecEnv::new(&cfg, 3).unwrap();
        vec_env.reset().unwrap();
        let mut solo = Env::new(cfg.clone()).unwrap();
        solo.reset_episode(VecEnv::episode_id(1, 0)).unwrap();
        let actions = [Action::new(0.2, 0.1), Action::new(-0.5, 0.9), Action::IDLE];
        for t in 0..7 {
            let batch = vec_env.step(&actions).unwrap();
            let single = solo.step(actions[1]).unwrap();
            assert_eq!(batch[1].step, single, "step {t}");
        }
        // Slot 1 hit max_steps unless it ended earlier; either way it reset.
        let batch = vec_env.step(&actions).unwrap();
        assert_eq!(batch.len(), 3);
    }
}
