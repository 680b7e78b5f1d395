//! Brute-force oracles and scene generators shared by the integration tests.
//!
//! Nothing here calls into the crate's geometry queries: every oracle works
//! from raw shape parameters so it stays independent of the code under test.

#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socnav::{Arena, Human, Shape, SimRng, Vec2, WorldState};

/// Closed point-in-shape predicate from first principles.
pub fn inside(shape: &Shape, x: f64, y: f64) -> bool {
    match *shape {
        Shape::Circle { center, radius } => {
            let dx = x - center.x;
            let dy = y - center.y;
            dx * dx + dy * dy <= radius * radius
        }
        Shape::Rect {
            center,
            half_extents,
        } => {
            x >= center.x - half_extents.x
                && x <= center.x + half_extents.x
                && y >= center.y - half_extents.y
                && y <= center.y + half_extents.y
        }
    }
}

/// Uniform samples along the shape's boundary.
pub fn boundary_samples(shape: &Shape, n: usize) -> Vec<(f64, f64)> {
    match *shape {
        Shape::Circle { center, radius } => (0..n)
            .map(|k| {
                let a = TAU * k as f64 / n as f64;
                (center.x + radius * a.cos(), center.y + radius * a.sin())
            })
            .collect(),
        Shape::Rect {
            center,
            half_extents: h,
        } => {
            let (w, ht) = (2.0 * h.x, 2.0 * h.y);
            let perimeter = 2.0 * (w + ht);
            let (x0, y0) = (center.x - h.x, center.y - h.y);
            (0..n)
                .map(|k| {
                    let mut s = perimeter * k as f64 / n as f64;
                    if s < w {
                        return (x0 + s, y0);
                    }
                    s -= w;
                    if s < ht {
                        return (x0 + w, y0 + s);
                    }
                    s -= ht;
                    if s < w {
                        return (x0 + w - s, y0 + ht);
                    }
                    s -= w;
                    (x0, y0 + ht - s)
                })
                .collect()
        }
    }
}

/// Minimum distance from `p` to dense boundary samples of `shape`.
pub fn sampled_boundary_distance(shape: &Shape, p: Vec2, n: usize) -> f64 {
    boundary_samples(shape, n)
        .into_iter()
        .map(|(x, y)| ((x - p.x).powi(2) + (y - p.y).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// First marching sample inside any shape, or `max_range` if none.
pub fn ray_march(shapes: &[Shape], origin: Vec2, angle: f64, step: f64, max_range: f64) -> f64 {
    let (c, s) = (angle.cos(), angle.sin());
    let steps = (max_range / step).ceil() as usize;
    for k in 0..=steps {
        let t = (k as f64 * step).min(max_range);
        let (x, y) = (origin.x + t * c, origin.y + t * s);
        if shapes.iter().any(|sh| inside(sh, x, y)) {
            return t;
        }
    }
    max_range
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random static shape fully inside the 10×10 arena.
pub fn random_static(r: &mut ChaCha8Rng) -> Shape {
    if r.random_bool(0.5) {
        let radius = r.random_range(0.2..1.2);
        Shape::circle(
            Vec2::new(
                r.random_range(radius..10.0 - radius),
                r.random_range(radius..10.0 - radius),
            ),
            radius,
        )
    } else {
        let h = Vec2::new(r.random_range(0.1..1.5), r.random_range(0.1..1.5));
        Shape::rect(
            Vec2::new(
                r.random_range(h.x..10.0 - h.x),
                r.random_range(h.y..10.0 - h.y),
            ),
            h,
        )
    }
}

/// A random scene with up to `max_humans` humans and `max_statics` static
/// shapes, none of which contains the agent's center.
pub fn random_scene(r: &mut ChaCha8Rng, max_humans: usize, max_statics: usize) -> WorldState {
    let agent = Vec2::new(r.random_range(1.0..9.0), r.random_range(1.0..9.0));
    let clear = |s: &Shape| !inside(s, agent.x, agent.y);
    let n_statics = r.random_range(0..=max_statics);
    let mut statics = Vec::new();
    while statics.len() < n_statics {
        let s = random_static(r);
        if clear(&s) {
            statics.push(s);
        }
    }
    let n_humans = r.random_range(0..=max_humans);
    let mut humans = Vec::new();
    while humans.len() < n_humans {
        let pos = Vec2::new(r.random_range(0.3..9.7), r.random_range(0.3..9.7));
        if clear(&Shape::circle(pos, 0.3)) {
            humans.push(Human {
                pos,
                radius: 0.3,
                goal: Vec2::new(r.random_range(0.3..9.7), r.random_range(0.3..9.7)),
                max_speed: 1.0,
            });
        }
    }
    WorldState {
        arena: Arena::default(),
        agent_pos: agent,
        agent_radius: 0.3,
        agent_goal: Vec2::new(r.random_range(0.3..9.7), r.random_range(0.3..9.7)),
        humans,
        static_obstacles: statics,
        step_index: 0,
        rng: SimRng::seed_from_u64(r.random()),
    }
}

/// Every sensed shape of a scene: statics, then human discs.
pub fn scene_shapes(w: &WorldState) -> Vec<Shape> {
    let mut v = w.static_obstacles.clone();
    v.extend(w.humans.iter().map(|h| Shape::circle(h.pos, h.radius)));
    v
}

/// Occupancy oracle: tests every cell center against every shape.
pub fn leog_oracle(w: &WorldState, side: f64, res: f64) -> Vec<u8> {
    let n = (side / res).round() as usize;
    let shapes = scene_shapes(w);
    let mut cells = vec![0u8; n * n];
    for row in 0..n {
        for col in 0..n {
            let x = w.agent_pos.x - side / 2.0 + (col as f64 + 0.5) * res;
            let y = w.agent_pos.y - side / 2.0 + (row as f64 + 0.5) * res;
            if shapes.iter().any(|s| inside(s, x, y)) {
                cells[row * n + col] = 1;
            }
        }
    }
    cells
}
