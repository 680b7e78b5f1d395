//! Binary PPM (P6) snapshots of a world, one pixel sampled at its center.

use std::io::{self, Write};
use std::path::PathBuf;

use crate::geometry::{Shape, Vec2};
use crate::sim::WorldState;

pub const BACKGROUND: [u8; 3] = [255, 255, 255];
pub const STATIC_COLOR: [u8; 3] = [128, 128, 128];
pub const HUMAN_COLOR: [u8; 3] = [40, 90, 220];
pub const AGENT_COLOR: [u8; 3] = [220, 40, 40];
pub const GOAL_COLOR: [u8; 3] = [30, 170, 60];

/// Radius of the goal marker, meters.
pub const GOAL_MARK_RADIUS: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub out_dir: PathBuf,
    /// Render every `stride`-th step.
    pub stride: u64,
    /// Pixels per meter.
    pub scale: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("frame stride must be >= 1")]
    Stride,
    #[error("pixel scale must be >= 1, got {0}")]
    Scale(f64),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl RenderSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.stride < 1 {
            return Err(RenderError::Stride);
        }
        if !(self.scale.is_finite() && self.scale >= 1.0) {
            return Err(RenderError::Scale(self.scale));
        }
        Ok(())
    }

    pub fn frame_path(&self, step: u64) -> PathBuf {
        self.out_dir.join(format!("frame_{step:06}.ppm"))
    }
}

/// Image size in pixels for the state's arena.
pub fn image_size(state: &WorldState, scale: f64) -> (usize, usize) {
    (
        (state.arena.width * scale).round() as usize,
        (state.arena.height * scale).round() as usize,
    )
}

/// Rasterizes `state`; world +y points up the image.
pub fn render_rgb(state: &WorldState, scale: f64) -> (usize, usize, Vec<u8>) {
    let (w, h) = image_size(state, scale);
    let mut px = BACKGROUND.repeat(w * h);
    let mut paint = |shape: Shape, color: [u8; 3]| {
        let (lo, hi) = shape.bounds();
        let col0 = ((lo.x * scale).floor().max(0.0) as usize).min(w);
        let col1 = ((hi.x * scale).ceil().max(0.0) as usize).min(w);
        let row0 = ((state.arena.height - hi.y) * scale).floor().max(0.0) as usize;
        let row1 = (((state.arena.height - lo.y) * scale).ceil().max(0.0) as usize).min(h);
        for row in row0.min(h)..row1 {
            let y = state.arena.height - (row as f64 + 0.5) / scale;
            for col in col0..col1 {
                let x = (col as f64 + 0.5) / scale;
                if shape.contains(Vec2::new(x, y)) {
                    let i = 3 * (row * w + col);
                    px[i..i + 3].copy_from_slice(&color);
                }
            }
        }
    };
    for s in &state.static_obstacles {
        paint(*s, STATIC_COLOR);
    }
    paint(
        Shape::circle(state.agent_goal, GOAL_MARK_RADIUS),
        GOAL_COLOR,
    );
    for hmn in &state.humans {
        paint(Shape::circle(hmn.pos, hmn.radius), HUMAN_COLOR);
    }
    paint(
        Shape::circle(state.agent_pos, state.agent_radius),
        AGENT_COLOR,
    );
    (w, h, px)
}

pub fn render_frame<W: Write>(
    state: &WorldState,
    spec: &RenderSpec,
    sink: &mut W,
) -> Result<(), RenderError> {
    spec.validate()?;
    let (w, h, px) = render_rgb(state, spec.scale);
    write!(sink, "P6\n{w} {h}\n255\n")?;
    sink.write_all(&px)?;
    Ok(())
}
