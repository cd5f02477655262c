//! Plane geometry primitives shared by all modules.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    /// Polar coordinates `(rho, theta)` with `theta` in `[-pi, pi)`.
    pub fn to_polar(self) -> (f64, f64) {
        (self.norm(), normalize_angle(self.y.atan2(self.x)))
    }

    pub fn from_polar(rho: f64, theta: f64) -> Vec2 {
        Vec2::new(rho * theta.cos(), rho * theta.sin())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Map an angle to the canonical interval `[-pi, pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t < -PI {
        t += 2.0 * PI;
    } else if t >= PI {
        t -= 2.0 * PI;
    }
    t
}

/// Shortest signed angular distance from `a` to `b`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(b - a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_into_half_open_interval() {
        assert_eq!(normalize_angle(PI), -PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((normalize_angle(-3.0 * PI) + PI).abs() < 1e-15);
        for k in -6..=6 {
            let t = 0.37 + k as f64 * 2.0 * PI;
            assert!((normalize_angle(t) - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn polar_round_trip() {
        let p = Vec2::new(-0.3, 0.7);
        let (r, t) = p.to_polar();
        let q = Vec2::from_polar(r, t);
        assert!(p.dist(q) < 1e-14);
    }
}
