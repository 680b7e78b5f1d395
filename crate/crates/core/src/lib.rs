//! Deterministic 2D social-navigation simulator and reinforcement-learning
//! environment.
//!
//! A robot (the agent) must reach a goal in an arena populated by walking
//! humans and static furniture. Humans follow a goal force plus a social
//! repulsion from each other and from obstacles; they ignore the agent. The
//! agent perceives the scene through any combination of a closest-obstacle
//! reading, a 360-ray lidar-style raycast and an occupancy grid centered on
//! itself, plus its goal's relative position.
//!
//! ```
//! use socnav::{Action, Env, ScenarioConfig};
//!
//! let mut env = Env::new(ScenarioConfig::default()).unwrap();
//! let obs = env.reset(0).unwrap();
//! assert_eq!(obs.leog.as_ref().unwrap().rows, 60);
//! let step = env.step(Action::new(1.0, 0.0)).unwrap();
//! assert!(!step.terminated || step.info.outcome.is_some());
//! ```

pub mod config;
pub mod dataset;
pub mod env;
pub mod eval;
pub mod geometry;
pub mod policy;
pub mod render;
pub mod reward;
pub mod rng;
pub mod sensing;
pub mod sim;
pub mod vec_env;

pub use config::{ConfigError, ScenarioConfig};
pub use env::{reset_world, Env, EnvError, EpisodeId, Outcome, StepInfo, StepResult};
pub use eval::{run_evaluation, EvalReport, EvalSchedule, OutcomeCounts};
pub use geometry::{Shape, Vec2};
pub use policy::{IdlePolicy, Policy, RandomPolicy, ScriptedPolicy};
pub use reward::{RewardBreakdown, RewardWeights};
pub use rng::{SeedNamespace, SimRng};
pub use sensing::{CoordFormat, Modality, Observation, OccupancyGrid, SensorConfig};
pub use sim::{Action, Arena, Human, SimParams, Termination, WorldState};
pub use vec_env::VecEnv;
