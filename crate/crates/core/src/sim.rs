//! World state and the fixed-timestep transition.
//!
//! Humans move under a weighted sum of an attractive goal force and a linear
//! repulsion from other humans and static obstacles. The agent is moved
//! kinematically by its action and is invisible to the humans: no human ever
//! reacts to the agent, so the agent cannot shove people out of its way.

use serde::{Deserialize, Serialize};

use crate::geometry::{Shape, Vec2};
use crate::rng::SimRng;

/// Current snapshot format version.
pub const SNAPSHOT_VERSION: u32 = 1;

/// Rejection-sampling budget for any single sampled point.
pub const MAX_SAMPLE_ATTEMPTS: usize = 10_000;

/// Minimum distance between a human and a freshly sampled goal.
pub const HUMAN_GOAL_MIN_DISTANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Default for Arena {
    fn default() -> Self {
        Arena {
            width: 10.0,
            height: 10.0,
        }
    }
}

impl Arena {
    pub fn contains_shape(&self, s: &Shape) -> bool {
        let (lo, hi) = s.bounds();
        lo.x >= 0.0 && lo.y >= 0.0 && hi.x <= self.width && hi.y <= self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Human {
    pub pos: Vec2,
    pub radius: f64,
    pub goal: Vec2,
    pub max_speed: f64,
}

/// Holonomic velocity command, each component in `[-1, 1]` and scaled by the
/// agent's maximum speed. Commands longer than unit norm are clipped when
/// applied, so the agent never exceeds its maximum speed.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Action {
    vx: f64,
    vy: f64,
}

impl Action {
    pub const IDLE: Action = Action { vx: 0.0, vy: 0.0 };

    /// Clamps both components to `[-1, 1]`; non-finite components become 0.
    pub fn new(vx: f64, vy: f64) -> Self {
        let clean = |v: f64| {
            if v.is_finite() {
                v.clamp(-1.0, 1.0)
            } else {
                0.0
            }
        };
        Action {
            vx: clean(vx),
            vy: clean(vy),
        }
    }

    pub fn vx(&self) -> f64 {
        self.vx
    }

    pub fn vy(&self) -> f64 {
        self.vy
    }

    pub fn as_vec(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }
}

impl From<[f64; 2]> for Action {
    fn from([vx, vy]: [f64; 2]) -> Self {
        Action::new(vx, vy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    /// Timestep, seconds.
    pub dt: f64,
    pub agent_max_speed: f64,
    pub human_max_speed: f64,
    /// Distance at which the goal force saturates at unit magnitude.
    pub d_sat: f64,
    /// Cutoff radius of the social repulsion.
    pub r_soc: f64,
    pub w_goal: f64,
    pub w_soc: f64,
    /// A human closer than this to its goal gets a new one.
    pub human_goal_radius: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 0.1,
            agent_max_speed: 1.5,
            human_max_speed: 1.0,
            d_sat: 1.0,
            r_soc: 1.5,
            w_goal: 1.0,
            w_soc: 1.0,
            human_goal_radius: 0.3,
        }
    }
}

impl SimParams {
    /// Returns the name of the first parameter that is not strictly positive.
    pub fn first_invalid(&self) -> Option<&'static str> {
        [
            ("dt", self.dt),
            ("agent_max_speed", self.agent_max_speed),
            ("human_max_speed", self.human_max_speed),
            ("d_sat", self.d_sat),
            ("r_soc", self.r_soc),
            ("w_goal", self.w_goal),
            ("w_soc", self.w_soc),
            ("human_goal_radius", self.human_goal_radius),
        ]
        .into_iter()
        .find(|(_, v)| !(v.is_finite() && *v > 0.0))
        .map(|(name, _)| name)
    }
}

/// Why an episode ended before its step budget ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Success,
    Collision,
}

/// The simulator's complete state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub arena: Arena,
    pub agent_pos: Vec2,
    pub agent_radius: f64,
    pub agent_goal: Vec2,
    pub humans: Vec<Human>,
    pub static_obstacles: Vec<Shape>,
    pub step_index: u64,
    pub rng: SimRng,
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    version: u32,
    state: WorldState,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("malformed snapshot: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported snapshot version {0}")]
    Version(u32),
}

/// Force toward `goal`, proportional to distance and saturating at unit
/// magnitude once the goal is `d_sat` or farther.
#[inline]
pub fn goal_force(pos: Vec2, goal: Vec2, d_sat: f64) -> Vec2 {
    let offset = goal - pos;
    let dist = offset.length();
    if dist == 0.0 {
        return Vec2::ZERO;
    }
    offset / dist * (dist / d_sat).min(1.0)
}

/// Linear repulsion kernel magnitude: 1 at contact, 0 at and beyond `r_soc`.
#[inline]
pub fn repulsion_magnitude(d: f64, r_soc: f64) -> f64 {
    ((r_soc - d) / r_soc).max(0.0)
}

#[inline]
fn repulsion_from(subject: Vec2, other: Vec2, r_soc: f64) -> Vec2 {
    let away = subject - other;
    let d = away.length();
    if d >= r_soc {
        return Vec2::ZERO;
    }
    if d == 0.0 {
        return Vec2::X;
    }
    away / d * repulsion_magnitude(d, r_soc)
}

/// Sum of linear repulsions pushing `subject` away from each of `others`.
pub fn social_force(subject: Vec2, others: &[Vec2], r_soc: f64) -> Vec2 {
    others.iter().fold(Vec2::ZERO, |acc, &o| {
        acc + repulsion_from(subject, o, r_soc)
    })
}

/// Repulsion from the nearest surface point of each static shape within
/// `r_soc`. A subject inside a shape is pushed out at unit magnitude.
pub fn obstacle_force(subject: Vec2, shapes: &[Shape], r_soc: f64) -> Vec2 {
    let mut total = Vec2::ZERO;
    for s in shapes {
        let d = s.distance_to_surface(subject);
        if d >= r_soc {
            continue;
        }
        let surface = s.closest_surface_point(subject);
        if d > 0.0 {
            total += (subject - surface) / d * repulsion_magnitude(d, r_soc);
        } else {
            total += (surface - subject).try_normalize().unwrap_or(Vec2::X);
        }
    }
    total
}

/// Rejection-samples a point in the arena at least `clearance` from the walls
/// and from every static shape, additionally satisfying `accept`.
pub fn sample_free_point(
    rng: &mut SimRng,
    arena: &Arena,
    statics: &[Shape],
    clearance: f64,
    mut accept: impl FnMut(Vec2) -> bool,
) -> Option<Vec2> {
    for _ in 0..MAX_SAMPLE_ATTEMPTS {
        let p = Vec2::new(
            rng.uniform(clearance, arena.width - clearance),
            rng.uniform(clearance, arena.height - clearance),
        );
        if statics.iter().all(|s| s.distance_to_surface(p) > clearance) && accept(p) {
            return Some(p);
        }
    }
    None
}

impl WorldState {
    /// Pure transition: returns the successor state, leaving `self` untouched.
    pub fn step(&self, action: Action, params: &SimParams) -> WorldState {
        let mut next = self.clone();
        next.advance(action, params);
        next
    }

    /// In-place version of [`WorldState::step`].
    pub fn advance(&mut self, action: Action, params: &SimParams) {
        let disp = action.as_vec().clip_to_unit() * (params.agent_max_speed * params.dt);
        self.agent_pos += disp;

        // Forces are evaluated on pre-step positions for every human before
        // anyone moves. The agent's position is never read here.
        let velocities: Vec<Vec2> = self
            .humans
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let mut social = Vec2::ZERO;
                for (j, other) in self.humans.iter().enumerate() {
                    if i != j {
                        social += repulsion_from(h.pos, other.pos, params.r_soc);
                    }
                }
                social += obstacle_force(h.pos, &self.static_obstacles, params.r_soc);
                let drive =
                    goal_force(h.pos, h.goal, params.d_sat) * params.w_goal + social * params.w_soc;
                drive.clip_to_unit() * h.max_speed
            })
            .collect();

        for (h, v) in self.humans.iter_mut().zip(velocities) {
            h.pos += v * params.dt;
        }

        for i in 0..self.humans.len() {
            let h = self.humans[i];
            if h.pos.distance(h.goal) < params.human_goal_radius {
                let fresh = sample_free_point(
                    &mut self.rng,
                    &self.arena,
                    &self.static_obstacles,
                    h.radius,
                    |p| p.distance(h.pos) >= HUMAN_GOAL_MIN_DISTANCE,
                );
                if let Some(goal) = fresh {
                    self.humans[i].goal = goal;
                }
            }
        }

        self.step_index += 1;
    }

    /// Goal reached wins over a simultaneous collision.
    pub fn check_termination(&self, goal_radius: f64) -> Option<Termination> {
        if self.agent_pos.distance(self.agent_goal) < goal_radius {
            return Some(Termination::Success);
        }
        if self.agent_collides() {
            return Some(Termination::Collision);
        }
        None
    }

    pub fn agent_collides(&self) -> bool {
        let p = self.agent_pos;
        let r = self.agent_radius;
        self.humans.iter().any(|h| p.distance(h.pos) < r + h.radius)
            || self
                .static_obstacles
                .iter()
                .any(|s| s.distance_to_surface(p) < r)
    }

    /// Every shape a sensor can see, statics first, then humans.
    pub fn obstacle_shapes(&self) -> impl Iterator<Item = Shape> + '_ {
        self.static_obstacles
            .iter()
            .copied()
            .chain(self.humans.iter().map(|h| Shape::circle(h.pos, h.radius)))
    }

    pub fn to_snapshot(&self) -> String {
        let snap = Snapshot {
            version: SNAPSHOT_VERSION,
            state: self.clone(),
        };
        serde_json::to_string_pretty(&snap).expect("world state is always serializable")
    }

    pub fn from_snapshot(text: &str) -> Result<WorldState, SnapshotError> {
        #[derive(Deserialize)]
        struct Header {
            version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.version != SNAPSHOT_VERSION {
            return Err(SnapshotError::Version(header.version));
        }
        let snap: Snapshot = serde_json::from_str(text)?;
        Ok(snap.state)
    }
}
