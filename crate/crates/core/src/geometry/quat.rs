use nalgebra::Matrix3;

use crate::error::{Error, Result};

/// Unit quaternion with the scalar part stored last and kept non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    x: f64,
    y: f64,
    z: f64,
    w: f64,
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion {
        x: 0.0,
        y: 0.0,
        z: 0.0,
        w: 1.0,
    };

    /// Normalizes the input and resolves the double cover towards `w >= 0`.
    ///
    /// Fails when the norm is zero or any component is not finite.
    pub fn new(x: f64, y: f64, z: f64, w: f64) -> Result<Self> {
        if ![x, y, z, w].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { line: 0 });
        }
        let norm = (x * x + y * y + z * z + w * w).sqrt();
        if norm <= f64::MIN_POSITIVE || !norm.is_finite() {
            return Err(Error::DegenerateQuaternion { line: 0 });
        }
        Ok(Self::canonical(x / norm, y / norm, z / norm, w / norm))
    }

    fn canonical(x: f64, y: f64, z: f64, w: f64) -> Self {
        if w < 0.0 {
            Quaternion {
                x: -x,
                y: -y,
                z: -z,
                w: -w,
            }
        } else {
            Quaternion { x, y, z, w }
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }
    pub fn w(&self) -> f64 {
        self.w
    }

    /// Components in `[x, y, z, w]` order.
    pub fn to_array(&self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let Quaternion { x, y, z, w } = *self;
        let (xx, yy, zz) = (x * x, y * y, z * z);
        let (xy, xz, yz) = (x * y, x * z, y * z);
        let (wx, wy, wz) = (w * x, w * y, w * z);
        Matrix3::new(
            1.0 - 2.0 * (yy + zz),
            2.0 * (xy - wz),
            2.0 * (xz + wy),
            2.0 * (xy + wz),
            1.0 - 2.0 * (xx + zz),
            2.0 * (yz - wx),
            2.0 * (xz - wy),
            2.0 * (yz + wx),
            1.0 - 2.0 * (xx + yy),
        )
    }

    /// Shepperd's method: branch on the largest of trace and diagonal entries.
    pub fn from_rotation_matrix(m: &Matrix3<f64>) -> Self {
        let trace = m[(0, 0)] + m[(1, 1)] + m[(2, 2)];
        let (x, y, z, w);
        if trace > m[(0, 0)] && trace > m[(1, 1)] && trace > m[(2, 2)] {
            let s = 2.0 * (1.0 + trace).sqrt();
            w = 0.25 * s;
            x = (m[(2, 1)] - m[(1, 2)]) / s;
            y = (m[(0, 2)] - m[(2, 0)]) / s;
            z = (m[(1, 0)] - m[(0, 1)]) / s;
        } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            w = (m[(2, 1)] - m[(1, 2)]) / s;
            x = 0.25 * s;
            y = (m[(0, 1)] + m[(1, 0)]) / s;
            z = (m[(0, 2)] + m[(2, 0)]) / s;
        } else if m[(1, 1)] >= m[(2, 2)] {
            let s = 2.0 * (1.0 + m[(1, 1)] - m[(0, 0)] - m[(2, 2)]).sqrt();
            w = (m[(0, 2)] - m[(2, 0)]) / s;
            x = (m[(0, 1)] + m[(1, 0)]) / s;
            y = 0.25 * s;
            z = (m[(1, 2)] + m[(2, 1)]) / s;
        } else {
            let s = 2.0 * (1.0 + m[(2, 2)] - m[(0, 0)] - m[(1, 1)]).sqrt();
            w = (m[(1, 0)] - m[(0, 1)]) / s;
            x = (m[(0, 2)] + m[(2, 0)]) / s;
            y = (m[(1, 2)] + m[(2, 1)]) / s;
            z = 0.25 * s;
        }
        let n = (x * x + y * y + z * z + w * w).sqrt();
        Self::canonical(x / n, y / n, z / n, w / n)
    }

    fn dot(&self, o: &Quaternion) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z + self.w * o.w
    }

    /// Shortest-arc spherical interpolation, `t` in `[0, 1]`.
    pub fn slerp(&self, other: &Quaternion, t: f64) -> Quaternion {
        let mut b = *other;
        let mut cos = self.dot(&b);
        if cos < 0.0 {
            b = Quaternion {
                x: -b.x,
                y: -b.y,
                z: -b.z,
                w: -b.w,
            };
            cos = -cos;
        }
        let (wa, wb) = if cos > 1.0 - 1e-12 {
            (1.0 - t, t)
        } else {
            let theta = cos.min(1.0).acos();
            let s = theta.sin();
            (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
        };
        let (x, y, z, w) = (
            wa * self.x + wb * b.x,
            wa * self.y + wb * b.y,
            wa * self.z + wb * b.z,
            wa * self.w + wb * b.w,
        );
        let n = (x * x + y * y + z * z + w * w).sqrt();
        Self::canonical(x / n, y / n, z / n, w / n)
    }
}
