use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::Scalar;

/// One of the three world axes. `X` is depth (along the operator's line of
/// sight), `Y` is lateral (positive to the operator's left) and `Z` is up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// The two remaining axes, in increasing order.
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::X, Axis::Z),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

/// Cartesian triple in meters (or m/s, m/s² depending on use).
///
/// Serialized as a JSON array `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<S> {
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Scalar> Vec3<S> {
    #[inline]
    pub const fn new(x: S, y: S, z: S) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    #[inline]
    pub fn splat(v: S) -> Self {
        Self::new(v, v, v)
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Self::new(S::lit(x), S::lit(y), S::lit(z))
    }

    /// Unit vector along `axis`, scaled by `sign`.
    pub fn axis(axis: Axis, sign: S) -> Self {
        let mut v = Self::zero();
        v[axis] = sign;
        v
    }

    #[inline]
    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm_squared(self) -> S {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> S {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map(self, f: impl Fn(S) -> S) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn zip_map(self, o: Self, f: impl Fn(S, S) -> S) -> Self {
        Self::new(f(self.x, o.x), f(self.y, o.y), f(self.z, o.z))
    }

    /// Component-wise clamp to `[-limit, limit]`.
    pub fn clamp_abs(self, limit: S) -> Self {
        self.map(|c| c.max(-limit).min(limit))
    }

    /// Component-wise clamp to `[lo, hi]`.
    pub fn clamp_box(self, lo: Self, hi: Self) -> Self {
        Self::new(
            self.x.max(lo.x).min(hi.x),
            self.y.max(lo.y).min(hi.y),
            self.z.max(lo.z).min(hi.z),
        )
    }

    /// Rescales the vector so its length does not exceed `max_len`.
    pub fn clamp_norm(self, max_len: S) -> Self {
        let n = self.norm();
        if n > max_len && n > S::zero() {
            self * (max_len / n)
        } else {
            self
        }
    }

    pub fn distance(self, o: Self) -> S {
        (self - o).norm()
    }

    pub fn to_array(self) -> [S; 3] {
        [self.x, self.y, self.z]
    }

    pub fn cast<T: Scalar>(self) -> Vec3<T> {
        Vec3::new(
            T::lit(self.x.as_f64()),
            T::lit(self.y.as_f64()),
            T::lit(self.z.as_f64()),
        )
    }
}

impl<S: Scalar> From<[S; 3]> for Vec3<S> {
    fn from(a: [S; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl<S> Index<Axis> for Vec3<S> {
    type Output = S;
    #[inline]
    fn index(&self, a: Axis) -> &S {
        match a {
            Axis::X => &self.x,
            Axis::Y => &self.y,
            Axis::Z => &self.z,
        }
    }
}

impl<S> IndexMut<Axis> for Vec3<S> {
    #[inline]
    fn index_mut(&mut self, a: Axis) -> &mut S {
        match a {
            Axis::X => &mut self.x,
            Axis::Y => &mut self.y,
            Axis::Z => &mut self.z,
        }
    }
}

impl<S: Scalar> Add for Vec3<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<S: Scalar> AddAssign for Vec3<S> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> Sub for Vec3<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<S: Scalar> SubAssign for Vec3<S> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Scalar> Mul<S> for Vec3<S> {
    type Output = Self;
    #[inline]
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

impl<S: Scalar> Neg for Vec3<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<S: Scalar> Serialize for Vec3<S> {
    fn serialize<Se: Serializer>(&self, s: Se) -> Result<Se::Ok, Se::Error> {
        [self.x, self.y, self.z].serialize(s)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for Vec3<S> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[S; 3]>::deserialize(d)?;
        Ok(Self::new(x, y, z))
    }
}
