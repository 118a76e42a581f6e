#![allow(dead_code)]

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use trajcurate::geometry::path_length;
use trajcurate::{Point, Pose, Rotation, Trajectory};

/// Uniform random rotation from a normalized Gaussian quaternion, expanded
/// with the textbook formula.
pub fn random_rotation(rng: &mut impl Rng) -> Rotation {
    let mut q = [0.0f64; 4];
    for v in &mut q {
        *v = StandardNormal.sample(rng);
    }
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Matrix3::new(
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        1.0 - 2.0 * (x * x + y * y),
    )
}

pub fn random_point(rng: &mut impl Rng, half: f64) -> Point {
    Vector3::from_fn(|_, _| rng.random_range(-half..half))
}

/// Random walk with small random rotation increments.
pub fn random_trajectory(rng: &mut impl Rng, id: &str) -> Trajectory {
    let n = rng.random_range(4..40);
    let mut c = random_point(rng, 5.0);
    let mut r = random_rotation(rng);
    let mut poses = Vec::with_capacity(n);
    let mut frame = rng.random_range(0..10u64);
    for _ in 0..n {
        poses.push(Pose {
            frame_index: frame,
            rotation: r,
            center: c,
        });
        frame += rng.random_range(1..4);
        c += random_point(rng, 1.0);
        let axis =
            nalgebra::Unit::new_normalize(random_point(rng, 1.0) + Vector3::new(1e-3, 0.0, 0.0));
        r *= nalgebra::Rotation3::from_axis_angle(&axis, rng.random_range(0.0..0.3)).into_inner();
    }
    Trajectory::new(id, poses).unwrap()
}

/// Independent Gaussian center noise with per-axis standard deviation
/// `frac` times the path length. Rotation-only clips are returned unchanged.
pub fn gaussian_center_noise(t: &Trajectory, frac: f64, rng: &mut impl Rng) -> Trajectory {
    let len = path_length(t).unwrap();
    if len == 0.0 {
        return t.clone();
    }
    let normal = Normal::new(0.0, frac * len).unwrap();
    t.map_centers(|c| c + Vector3::from_fn(|_, _| normal.sample(rng)))
}
