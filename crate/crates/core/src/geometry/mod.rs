//! Camera poses, trajectories and the elementary kinematic quantities built on them.
//!
//! Poses are camera-to-world. In the camera frame the optical axis is `+z`,
//! `+x` points right and `+y` points down.

mod io;
mod quat;
mod resample;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub use io::{
    format_g9, load_trajectory, parse_trajectory, write_trajectory, write_trajectory_string,
};
pub use quat::Quaternion;
pub use resample::resample;

pub type Rotation = Matrix3<f64>;
pub type Point = Vector3<f64>;

const ROTATION_TOL: f64 = 1e-9;

/// One camera sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub frame_index: u64,
    pub rotation: Rotation,
    pub center: Point,
}

impl Pose {
    pub fn new(frame_index: u64, rotation: Rotation, center: Point) -> Result<Self> {
        if !is_rotation(&rotation) || !center.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRotation);
        }
        Ok(Pose {
            frame_index,
            rotation,
            center,
        })
    }

    pub fn identity(frame_index: u64) -> Self {
        Pose {
            frame_index,
            rotation: Rotation::identity(),
            center: Point::zeros(),
        }
    }

    pub fn quaternion(&self) -> Quaternion {
        Quaternion::from_rotation_matrix(&self.rotation)
    }
}

/// True when `m` is orthonormal with determinant +1 within 1e-9.
pub fn is_rotation(m: &Rotation) -> bool {
    m.iter().all(|v| v.is_finite())
        && (m * m.transpose() - Rotation::identity()).amax() <= ROTATION_TOL
        && (m.determinant() - 1.0).abs() <= ROTATION_TOL
}

/// Ordered pose sequence sharing one world frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    id: String,
    poses: Vec<Pose>,
}

impl Trajectory {
    /// Frame indices must strictly increase. Length is not checked here; the
    /// metric and alignment operations reject `N < 2` themselves.
    pub fn new(id: impl Into<String>, poses: Vec<Pose>) -> Result<Self> {
        for w in poses.windows(2) {
            if w[1].frame_index <= w[0].frame_index {
                return Err(Error::NonMonotonicFrames {
                    prev: w[0].frame_index,
                    next: w[1].frame_index,
                });
            }
        }
        Ok(Trajectory {
            id: id.into(),
            poses,
        })
    }

    /// Builds frames `0..n` from parallel rotation and center lists.
    pub fn from_parts(
        id: impl Into<String>,
        rotations: &[Rotation],
        centers: &[Point],
    ) -> Result<Self> {
        if rotations.len() != centers.len() {
            return Err(Error::LengthMismatch(rotations.len(), centers.len()));
        }
        let poses = rotations
            .iter()
            .zip(centers)
            .enumerate()
            .map(|(i, (r, c))| Pose::new(i as u64, *r, *c))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(id, poses)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn centers(&self) -> Vec<Point> {
        self.poses.iter().map(|p| p.center).collect()
    }

    pub fn rotations(&self) -> Vec<Rotation> {
        self.poses.iter().map(|p| p.rotation).collect()
    }

    pub(crate) fn require_len(&self, min: usize) -> Result<()> {
        if self.poses.len() < min {
            Err(Error::TooShort(self.poses.len()))
        } else {
            Ok(())
        }
    }

    /// Applies `f` to every center, keeping rotations and frame indices.
    pub fn map_centers(&self, mut f: impl FnMut(&Point) -> Point) -> Trajectory {
        let poses = self
            .poses
            .iter()
            .map(|p| Pose {
                center: f(&p.center),
                ..p.clone()
            })
            .collect();
        Trajectory {
            id: self.id.clone(),
            poses,
        }
    }

    /// Applies `f` to every rotation, keeping centers and frame indices.
    pub fn map_rotations(&self, mut f: impl FnMut(&Rotation) -> Rotation) -> Trajectory {
        let poses = self
            .poses
            .iter()
            .map(|p| Pose {
                rotation: f(&p.rotation),
                ..p.clone()
            })
            .collect();
        Trajectory {
            id: self.id.clone(),
            poses,
        }
    }
}

/// `d_i = |c_{i+1} - c_i|` for every consecutive pair.
pub fn frame_displacements(traj: &Trajectory) -> Result<Vec<f64>> {
    traj.require_len(2)?;
    Ok(traj
        .poses
        .windows(2)
        .map(|w| (w[1].center - w[0].center).norm())
        .collect())
}

pub fn path_length(traj: &Trajectory) -> Result<f64> {
    Ok(frame_displacements(traj)?.iter().sum())
}

/// Distance between the first and last camera centers.
pub fn net_displacement(traj: &Trajectory) -> Result<f64> {
    traj.require_len(2)?;
    let first = &traj.poses[0].center;
    let last = &traj.poses[traj.len() - 1].center;
    Ok((last - first).norm())
}

/// `Raᵀ · Rb`: the rotation taking frame `a` to frame `b`, expressed in `a`.
pub fn relative_rotation(ra: &Rotation, rb: &Rotation) -> Rotation {
    ra.transpose() * rb
}

/// Geodesic distance on SO(3): `arccos((tr(Ra·Rbᵀ) - 1) / 2)`, in `[0, π]`.
/// Evaluated as `atan2(sin, cos)`, the sine taken from the skew part of `Ra·Rbᵀ`.
pub fn geodesic_angle(ra: &Rotation, rb: &Rotation) -> f64 {
    let m = ra * rb.transpose();
    let cos = ((m.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
    let sin = 0.5
        * Vector3::new(
            m[(2, 1)] - m[(1, 2)],
            m[(0, 2)] - m[(2, 0)],
            m[(1, 0)] - m[(0, 1)],
        )
        .norm();
    sin.atan2(cos)
}
