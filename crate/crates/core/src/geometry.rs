//! Planar vectors, obstacle shapes and closed-form distance / intersection
//! queries.
//!
//! Agents and humans are discs; static obstacles are discs or axis-aligned
//! rectangles. Every query here is exact up to floating-point rounding.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A 2D vector in meters, world frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };
    pub const X: Vec2 = Vec2 { x: 1.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    /// Angle from the +x axis in `(-π, π]`. Zero for the zero vector.
    #[inline]
    pub fn angle(self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            return 0.0;
        }
        let a = self.y.atan2(self.x);
        // atan2 returns -π for (-x, -0.0); fold onto the closed end.
        if a == -std::f64::consts::PI {
            std::f64::consts::PI
        } else {
            a
        }
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    #[inline]
    pub fn try_normalize(self) -> Option<Vec2> {
        let len = self.length();
        if len > 0.0 {
            Some(self / len)
        } else {
            None
        }
    }

    /// Scales the vector down to unit length if it is longer; shorter vectors
    /// pass through unchanged.
    #[inline]
    pub fn clip_to_unit(self) -> Vec2 {
        let len = self.length();
        if len > 1.0 {
            self / len
        } else {
            self
        }
    }

    #[inline]
    pub fn abs(self) -> Vec2 {
        Vec2::new(self.x.abs(), self.y.abs())
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2::new(x, y)
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn div(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x / rhs, self.y / rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    #[inline]
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Obstacle geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Circle { center: Vec2, radius: f64 },
    Rect { center: Vec2, half_extents: Vec2 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapeError {
    #[error("shape coordinates must be finite")]
    NonFinite,
    #[error("circle radius must be > 0, got {0}")]
    Radius(f64),
    #[error("rectangle half-extents must be > 0, got ({0}, {1})")]
    HalfExtents(f64, f64),
}

impl Shape {
    pub fn circle(center: Vec2, radius: f64) -> Self {
        Shape::Circle { center, radius }
    }

    pub fn rect(center: Vec2, half_extents: Vec2) -> Self {
        Shape::Rect {
            center,
            half_extents,
        }
    }

    pub fn validate(&self) -> Result<(), ShapeError> {
        match *self {
            Shape::Circle { center, radius } => {
                if !center.is_finite() || !radius.is_finite() {
                    return Err(ShapeError::NonFinite);
                }
                if radius <= 0.0 {
                    return Err(ShapeError::Radius(radius));
                }
            }
            Shape::Rect {
                center,
                half_extents: h,
            } => {
                if !center.is_finite() || !h.is_finite() {
                    return Err(ShapeError::NonFinite);
                }
                if h.x <= 0.0 || h.y <= 0.0 {
                    return Err(ShapeError::HalfExtents(h.x, h.y));
                }
            }
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        match *self {
            Shape::Circle { center, .. } | Shape::Rect { center, .. } => center,
        }
    }

    /// Axis-aligned bounding box as `(min, max)` corners.
    pub fn bounds(&self) -> (Vec2, Vec2) {
        match *self {
            Shape::Circle { center, radius } => {
                let r = Vec2::new(radius, radius);
                (center - r, center + r)
            }
            Shape::Rect {
                center,
                half_extents,
            } => (center - half_extents, center + half_extents),
        }
    }

    /// Closed point-in-shape test: boundary points count as inside.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Shape::Circle { center, radius } => (p - center).length_squared() <= radius * radius,
            Shape::Rect {
                center,
                half_extents: h,
            } => {
                let l = (p - center).abs();
                l.x <= h.x && l.y <= h.y
            }
        }
    }

    /// Signed distance from `p` to the boundary; negative strictly inside.
    #[inline]
    pub fn distance_to_surface(&self, p: Vec2) -> f64 {
        match *self {
            Shape::Circle { center, radius } => (p - center).length() - radius,
            Shape::Rect {
                center,
                half_extents: h,
            } => {
                let d = (p - center).abs() - h;
                let outside = Vec2::new(d.x.max(0.0), d.y.max(0.0)).length();
                let inside = d.x.max(d.y).min(0.0);
                outside + inside
            }
        }
    }

    /// Nearest boundary point to `p`. A query exactly at a circle center, or
    /// equidistant from two rectangle faces, resolves toward +x.
    pub fn closest_surface_point(&self, p: Vec2) -> Vec2 {
        match *self {
            Shape::Circle { center, radius } => {
                let dir = (p - center).try_normalize().unwrap_or(Vec2::X);
                center + dir * radius
            }
            Shape::Rect {
                center,
                half_extents: h,
            } => {
                let l = p - center;
                if l.x.abs() > h.x || l.y.abs() > h.y {
                    // Outside: clamping onto the box lands on the boundary.
                    return center + Vec2::new(l.x.clamp(-h.x, h.x), l.y.clamp(-h.y, h.y));
                }
                let gap_x = h.x - l.x.abs();
                let gap_y = h.y - l.y.abs();
                if gap_x <= gap_y {
                    let sx = if l.x >= 0.0 { h.x } else { -h.x };
                    center + Vec2::new(sx, l.y)
                } else {
                    let sy = if l.y >= 0.0 { h.y } else { -h.y };
                    center + Vec2::new(l.x, sy)
                }
            }
        }
    }

    /// Smallest `t ≥ 0` with `origin + t·dir` on the boundary. Origins inside
    /// (or on) the shape report `t = 0`. `dir` must be unit length.
    #[inline]
    pub fn ray_intersect(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        match *self {
            Shape::Circle { center, radius } => ray_circle(origin, dir, center, radius),
            Shape::Rect {
                center,
                half_extents,
            } => ray_rect(origin, dir, center - half_extents, center + half_extents),
        }
    }
}

#[inline]
fn ray_circle(origin: Vec2, dir: Vec2, center: Vec2, radius: f64) -> Option<f64> {
    let m = origin - center;
    let c = m.length_squared() - radius * radius;
    if c <= 0.0 {
        return Some(0.0);
    }
    let b = m.dot(dir);
    if b > 0.0 {
        return None;
    }
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    // c > 0 and b <= 0 keep the nearer root non-negative; the product form
    // avoids cancellation when the ray grazes the circle.
    let q = -b + disc.sqrt();
    Some((c / q).max(0.0))
}

#[inline]
fn ray_rect(origin: Vec2, dir: Vec2, min: Vec2, max: Vec2) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for (o, d, lo, hi) in [
        (origin.x, dir.x, min.x, max.x),
        (origin.y, dir.y, min.y, max.y),
    ] {
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
        } else {
            let inv = 1.0 / d;
            let (a, b) = ((lo - o) * inv, (hi - o) * inv);
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            t_near = t_near.max(a);
            t_far = t_far.min(b);
        }
    }
    if t_far < t_near || t_far < 0.0 {
        return None;
    }
    Some(t_near.max(0.0))
}
