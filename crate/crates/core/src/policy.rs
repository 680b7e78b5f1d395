//! Non-learning policies: a force-based scripted controller, the uniform
//! random policy used for dataset collection, and an idle baseline.

use std::f64::consts::TAU;

use crate::geometry::Vec2;
use crate::rng::SimRng;
use crate::sensing::Observation;
use crate::sim::{goal_force, Action, SimParams};

/// Anything that maps observations to actions.
pub trait Policy {
    /// Called once per episode with a generator derived from the episode id.
    fn begin_episode(&mut self, _rng: SimRng) {}

    fn act(&mut self, obs: &Observation) -> Action;
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn begin_episode(&mut self, rng: SimRng) {
        (**self).begin_episode(rng)
    }

    fn act(&mut self, obs: &Observation) -> Action {
        (**self).act(obs)
    }
}

/// Never moves.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdlePolicy;

impl Policy for IdlePolicy {
    fn act(&mut self, _obs: &Observation) -> Action {
        Action::IDLE
    }
}

/// Uniform random actions on `[-1, 1]²`.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    rng: SimRng,
}

impl RandomPolicy {
    pub fn new(rng: SimRng) -> Self {
        RandomPolicy { rng }
    }

    pub fn sample(&mut self) -> Action {
        random_action(&mut self.rng)
    }
}

impl Default for RandomPolicy {
    fn default() -> Self {
        RandomPolicy::new(SimRng::seed_from_u64(0))
    }
}

impl Policy for RandomPolicy {
    fn begin_episode(&mut self, rng: SimRng) {
        self.rng = rng;
    }

    fn act(&mut self, _obs: &Observation) -> Action {
        self.sample()
    }
}

pub fn random_action(rng: &mut SimRng) -> Action {
    let vx = rng.uniform(-1.0, 1.0);
    let vy = rng.uniform(-1.0, 1.0);
    Action::new(vx, vy)
}

/// Reactive controller: goal force plus repulsion from sensed obstacles.
///
/// Repulsion comes from the raycast when present (each ray closer than
/// `influence` pushes back along its direction, weighted by its angular
/// width), otherwise from the closest-obstacle reading.
#[derive(Debug, Clone, Copy)]
pub struct ScriptedPolicy {
    pub d_sat: f64,
    /// Surface distance below which obstacles repel.
    pub influence: f64,
    pub gain: f64,
    /// Fraction of the repulsion rotated a quarter turn, so head-on
    /// encounters resolve sideways instead of stalling.
    pub swerve: f64,
    pub closest_polar: bool,
}

impl ScriptedPolicy {
    pub fn new(params: &SimParams) -> Self {
        ScriptedPolicy {
            d_sat: params.d_sat,
            influence: 1.2,
            gain: 3.0,
            swerve: 0.5,
            closest_polar: true,
        }
    }

    pub fn with_closest_format(mut self, format: crate::sensing::CoordFormat) -> Self {
        self.closest_polar = format == crate::sensing::CoordFormat::Polar;
        self
    }

    fn repulsion(&self, obs: &Observation) -> Vec2 {
        let ramp = |d: f64| ((self.influence - d) / self.influence).max(0.0);
        if let Some(rays) = &obs.raycast {
            let n = rays.len() as f64;
            let width = TAU / n;
            let mut push = Vec2::ZERO;
            for (k, &d) in rays.iter().enumerate() {
                let w = ramp(d);
                if w > 0.0 {
                    push -= Vec2::from_angle(TAU * k as f64 / n) * (w * width);
                }
            }
            return push;
        }
        if let Some([a, b]) = obs.closest {
            let (dist, dir) = if self.closest_polar {
                (a, Vec2::from_angle(b))
            } else {
                let v = Vec2::new(a, b);
                (v.length(), v.try_normalize().unwrap_or(Vec2::X))
            };
            return -dir * ramp(dist);
        }
        Vec2::ZERO
    }
}

impl Policy for ScriptedPolicy {
    fn act(&mut self, obs: &Observation) -> Action {
        let g = obs.goal_rel;
        let to_goal = Vec2::from_angle(g.angle) * g.distance;
        let attract = goal_force(Vec2::ZERO, to_goal, self.d_sat);
        if attract == Vec2::ZERO {
            return Action::IDLE;
        }
        let rep = self.repulsion(obs) * self.gain;
        // Swerve to whichever side keeps the goal ahead.
        let side = Vec2::new(-rep.y, rep.x);
        let side = if side.dot(attract) >= 0.0 {
            side
        } else {
            -side
        };
        let cmd = (attract + rep + side * self.swerve).clip_to_unit();
        Action::new(cmd.x, cmd.y)
    }
}
