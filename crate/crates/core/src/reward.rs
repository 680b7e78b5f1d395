//! Per-step rewards.
//!
//! Non-terminal steps earn `r_step + r_goal_d + r_social`; a step that ends
//! the episode at the goal or in a collision earns only the terminal reward.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::sim::{goal_force, repulsion_magnitude, SimParams, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    pub w_goal_r: f64,
    pub w_coll: f64,
    /// Magnitude of the per-step penalty; always applied as `-w_step`.
    pub w_step: f64,
    pub w_goal_d: f64,
    pub w_social: f64,
    /// Radius of the proximity penalty around each human.
    pub r_soc_reward: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_goal_r: 500.0,
            w_coll: -500.0,
            w_step: 5.0,
            w_goal_d: 10.0,
            w_social: -100.0,
            r_soc_reward: 1.5,
        }
    }
}

impl RewardWeights {
    pub fn first_invalid(&self) -> Option<&'static str> {
        let finite = [
            ("w_goal_r", self.w_goal_r),
            ("w_coll", self.w_coll),
            ("w_step", self.w_step),
            ("w_goal_d", self.w_goal_d),
            ("w_social", self.w_social),
        ];
        if let Some((name, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Some(name);
        }
        if self.w_step < 0.0 {
            return Some("w_step");
        }
        if !(self.r_soc_reward.is_finite() && self.r_soc_reward > 0.0) {
            return Some("r_soc_reward");
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub r_step: f64,
    pub r_goal_d: f64,
    pub r_social: f64,
    pub r_end: f64,
    pub total: f64,
    pub terminal: bool,
}

/// Reward for a step that did not end the episode.
///
/// `r_goal_d` is the goal force at the previous position projected onto the
/// step's displacement, normalised by the largest possible displacement.
/// `r_social` sums the linear proximity kernel over human centers.
pub fn intermediate_reward(
    prev_pos: Vec2,
    new_pos: Vec2,
    goal: Vec2,
    humans: impl IntoIterator<Item = Vec2>,
    weights: &RewardWeights,
    params: &SimParams,
) -> RewardBreakdown {
    let r_step = -weights.w_step;
    let progress = (new_pos - prev_pos) / (params.agent_max_speed * params.dt);
    let r_goal_d = weights.w_goal_d * goal_force(prev_pos, goal, params.d_sat).dot(progress);
    let proximity: f64 = humans
        .into_iter()
        .map(|h| repulsion_magnitude(new_pos.distance(h), weights.r_soc_reward))
        .sum();
    let r_social = weights.w_social * proximity;
    RewardBreakdown {
        r_step,
        r_goal_d,
        r_social,
        r_end: 0.0,
        total: r_step + r_goal_d + r_social,
        terminal: false,
    }
}

pub fn terminal_reward(outcome: Termination, weights: &RewardWeights) -> RewardBreakdown {
    let r_end = match outcome {
        Termination::Success => weights.w_goal_r,
        Termination::Collision => weights.w_coll,
    };
    RewardBreakdown {
        r_end,
        total: r_end,
        terminal: true,
        ..RewardBreakdown::default()
    }
}
