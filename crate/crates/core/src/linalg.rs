//! Minimal fixed-size linear algebra for the planar models.
//!
//! Everything here is small enough (2-vectors, 2x2 blocks, one 6x6 solve per
//! dynamics evaluation) that hand-rolled arithmetic beats pulling in a matrix
//! crate, and it keeps the `no_std` build trivial.

#[allow(unused_imports)]
use crate::math::*;

/// Planar vector in the x-z plane (x lateral, z vertical).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, z: 0.0 };

    pub fn new(x: f64, z: f64) -> Self {
        Vec2 { x, z }
    }

    /// Unit vector at `angle` from the +x axis.
    pub fn unit(angle: f64) -> Self {
        Vec2 {
            x: angle.cos(),
            z: angle.sin(),
        }
    }

    /// `d/dangle` of [`Vec2::unit`]; also `unit(angle)` rotated +90 degrees.
    pub fn unit_perp(angle: f64) -> Self {
        Vec2 {
            x: -angle.sin(),
            z: angle.cos(),
        }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.z * o.z
    }

    /// z-component of the 3D cross product (planar wedge).
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.z - self.z * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.z)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2 {
            x: self.x * s,
            z: self.z * s,
        }
    }
}

impl core::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.z + o.z)
    }
}

impl core::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.z - o.z)
    }
}

impl core::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.z)
    }
}

/// Column-major 2x2 matrix: `col0`, `col1` are the columns.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat2 {
    pub col0: Vec2,
    pub col1: Vec2,
}

impl Mat2 {
    pub fn from_cols(col0: Vec2, col1: Vec2) -> Self {
        Mat2 { col0, col1 }
    }

    pub fn det(self) -> f64 {
        self.col0.cross(self.col1)
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        self.col0.scale(v.x) + self.col1.scale(v.z)
    }

    /// Solves `self * x = rhs`; `None` when the determinant vanishes.
    pub fn solve(self, rhs: Vec2) -> Option<Vec2> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Vec2::new(rhs.cross(self.col1) / d, self.col0.cross(rhs) / d))
    }
}

/// Solves the dense system `a * x = b` in place by Gaussian elimination with
/// partial pivoting. Returns `None` when a pivot falls below `1e-12` times the
/// largest initial row magnitude (rank-deficient for our purposes).
pub fn solve_in_place<const N: usize>(a: &mut [[f64; N]; N], b: &mut [f64; N]) -> Option<[f64; N]> {
    let mut scale = 0.0;
    for row in a.iter() {
        for v in row.iter() {
            scale = f64::max(scale, v.abs());
        }
    }
    let tol = 1e-12 * scale.max(1e-300);

    for col in 0..N {
        let mut pivot = col;
        let mut best = a[col][col].abs();
        for row in col + 1..N {
            let mag = a[row][col].abs();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        if best < tol {
            return None;
        }
        if pivot != col {
            a.swap(col, pivot);
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col][col];
        for row in col + 1..N {
            let f = a[row][col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }

    let mut x = [0.0; N];
    for col in (0..N).rev() {
        let mut acc = b[col];
        for k in col + 1..N {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}
