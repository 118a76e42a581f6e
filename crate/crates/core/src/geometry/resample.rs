use crate::error::{Error, Result};
use crate::geometry::{Pose, Quaternion, Trajectory};

/// Resamples to `k` poses evenly spaced in frame-index space between the
/// first and last frame. Centers are interpolated linearly, rotations by
/// slerp. Output frames are numbered `0..k`.
pub fn resample(traj: &Trajectory, k: usize) -> Result<Trajectory> {
    traj.require_len(2)?;
    if k < 2 {
        return Err(Error::InvalidParam(format!(
            "resample count must be >= 2, got {k}"
        )));
    }
    let poses = traj.poses();
    if poses.len() == k
        && poses
            .iter()
            .enumerate()
            .all(|(j, p)| p.frame_index == j as u64)
    {
        return Ok(traj.clone());
    }
    let first = poses[0].frame_index as f64;
    let last = poses[poses.len() - 1].frame_index as f64;
    let quats: Vec<Quaternion> = poses.iter().map(Pose::quaternion).collect();

    let mut out = Vec::with_capacity(k);
    let mut seg = 0;
    for j in 0..k {
        let target = if j == k - 1 {
            last
        } else {
            first + (last - first) * j as f64 / (k - 1) as f64
        };
        while seg + 2 < poses.len() && poses[seg + 1].frame_index as f64 <= target {
            seg += 1;
        }
        let (a, b) = (&poses[seg], &poses[seg + 1]);
        let (fa, fb) = (a.frame_index as f64, b.frame_index as f64);
        let u = ((target - fa) / (fb - fa)).clamp(0.0, 1.0);
        let (center, rotation) = if u == 0.0 {
            (a.center, a.rotation)
        } else if u == 1.0 {
            (b.center, b.rotation)
        } else {
            (
                a.center + (b.center - a.center) * u,
                quats[seg].slerp(&quats[seg + 1], u).to_rotation_matrix(),
            )
        };
        out.push(Pose {
            frame_index: j as u64,
            rotation,
            center,
        });
    }
    Trajectory::new(traj.id(), out)
}
