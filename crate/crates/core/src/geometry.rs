//! Small planar and spatial vector types plus the local heading frame used
//! by edges and waypoints.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    /// Counter-clockwise perpendicular, i.e. `z × self`.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::epsilon() {
            Some(self * n.recip())
        } else {
            None
        }
    }

    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    pub fn lift(self, z: T) -> Vec3<T> {
        Vec3::new(self.x, self.y, z)
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> SubAssign for Vec2<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::epsilon() {
            Some(self * n.recip())
        } else {
            None
        }
    }

    #[inline]
    pub fn xy(self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    /// Angle between this (unit) vector and world up.
    pub fn incline(self) -> T {
        self.z.max(-T::one()).min(T::one()).acos()
    }

    /// Flips the vector so that its z component is non-negative.
    pub fn upward(self) -> Self {
        if self.z < T::zero() {
            self * -T::one()
        } else {
            self
        }
    }
}

impl<T: Scalar> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Scalar> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Scalar> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

/// Right-handed local frame with `z` along world up and `x` horizontal.
///
/// Only the planar parts of `x_hat` and `y_hat` are stored since both are
/// horizontal by construction; `y_hat = z × x_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    pub origin: Vec3<T>,
    pub x_hat: Vec2<T>,
    pub y_hat: Vec2<T>,
}

/// Frame attached to the child node of a graph edge.
pub type EdgeFrame<T> = Frame<T>;
/// Frame attached to an optimized waypoint.
pub type WaypointFrame<T> = Frame<T>;

impl<T: Scalar> Frame<T> {
    /// Builds a frame at `origin` heading along `heading`. A degenerate heading
    /// falls back to world `+x`.
    pub fn new(origin: Vec3<T>, heading: Vec2<T>) -> Self {
        let x_hat = heading.normalized().unwrap_or_else(|| Vec2::new(T::one(), T::zero()));
        Self {
            origin,
            x_hat,
            y_hat: x_hat.perp(),
        }
    }

    /// Frame at `to` oriented along `to - from`.
    pub fn between(from: Vec2<T>, to: Vec2<T>, height: T) -> Self {
        Self::new(to.lift(height), to - from)
    }

    #[inline]
    pub fn planar_origin(&self) -> Vec2<T> {
        self.origin.xy()
    }

    /// Same orientation, new origin.
    pub fn moved_to(&self, origin: Vec3<T>) -> Self {
        Self { origin, ..*self }
    }

    /// Coordinates of a planar point in this frame's (x, y) axes.
    #[inline]
    pub fn to_local(&self, p: Vec2<T>) -> Vec2<T> {
        let d = p - self.planar_origin();
        Vec2::new(d.dot(self.x_hat), d.dot(self.y_hat))
    }

    #[inline]
    pub fn y_hat3(&self) -> Vec3<T> {
        self.y_hat.lift(T::zero())
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let mut w = a % two_pi;
    if w <= -T::PI() {
        w += two_pi;
    } else if w > T::PI() {
        w -= two_pi;
    }
    w
}
