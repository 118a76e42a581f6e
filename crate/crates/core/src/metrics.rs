//! Scalar trajectory measures and the smoothness filter.
//!
//! Single-trajectory measures: jump ratio `max_i d_i / mean(d)`, complexity
//! ratio `L / (|c_N - c_1| + ε)`, and overall motion magnitudes. Pair
//! measures: TransErr (mean aligned center distance) and RotErr (mean
//! geodesic angle), both after resampling the pair to a common length.

use serde::{Deserialize, Serialize};

use crate::alignment::{align_rotation_only, estimate_trajectory_alignment, AlignParams};
use crate::error::{Error, Result};
use crate::geometry::{
    frame_displacements, geodesic_angle, net_displacement, resample, Rotation, Trajectory,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterThresholds {
    pub tau_jump: f64,
    pub tau_complex: f64,
    pub epsilon: f64,
    /// Total translation (world units) below which a clip is treated as
    /// rotation-only.
    pub tau_static_trans: f64,
    /// Total rotation (radians) below which a rotation-only clip is static.
    pub tau_static_rot: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        FilterThresholds {
            tau_jump: 5.0,
            tau_complex: 3.0,
            epsilon: 1e-8,
            tau_static_trans: 1e-2,
            tau_static_rot: 0.035,
        }
    }
}

impl FilterThresholds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("tau_jump", self.tau_jump),
            ("tau_complex", self.tau_complex),
            ("epsilon", self.epsilon),
            ("tau_static_trans", self.tau_static_trans),
            ("tau_static_rot", self.tau_static_rot),
        ];
        for (name, v) in all {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.tau_jump <= 1.0 || self.tau_complex <= 1.0 {
            return Err(Error::InvalidParam(
                "tau_jump and tau_complex must exceed 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Decision {
    Keep,
    RejectJump,
    RejectComplex,
    RejectStatic,
    RotationOnlyKeep,
}

impl Decision {
    pub const ALL: [Decision; 5] = [
        Decision::Keep,
        Decision::RejectJump,
        Decision::RejectComplex,
        Decision::RejectStatic,
        Decision::RotationOnlyKeep,
    ];

    pub fn is_kept(self) -> bool {
        matches!(self, Decision::Keep | Decision::RotationOnlyKeep)
    }
}

/// Ratios are absent exactly when the clip took the rotation-only/static branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub id: String,
    pub decision: Decision,
    pub r_jump: Option<f64>,
    pub r_complex: Option<f64>,
    pub total_trans: f64,
    pub total_rot: f64,
}

pub fn jump_ratio(traj: &Trajectory) -> Result<f64> {
    let d = frame_displacements(traj)?;
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::UndefinedRatio);
    }
    let max = d.iter().copied().fold(0.0, f64::max);
    // max >= mean holds mathematically; keep it exact under rounding.
    Ok((max / mean).max(1.0))
}

pub fn complexity_ratio(traj: &Trajectory, epsilon: f64) -> Result<f64> {
    let length: f64 = frame_displacements(traj)?.iter().sum();
    Ok(length / (net_displacement(traj)? + epsilon))
}

/// Total translation (path length) and total rotation (sum of geodesic
/// angles between consecutive frames).
pub fn motion_magnitudes(traj: &Trajectory) -> Result<(f64, f64)> {
    let trans = frame_displacements(traj)?.iter().sum();
    let rot = traj
        .poses()
        .windows(2)
        .map(|w| geodesic_angle(&w[0].rotation, &w[1].rotation))
        .sum();
    Ok((trans, rot))
}

/// True when the clip's total translation is below the rotation-only gate.
pub fn is_rotation_only(traj: &Trajectory, th: &FilterThresholds) -> Result<bool> {
    Ok(motion_magnitudes(traj)?.0 < th.tau_static_trans)
}

pub fn filter_trajectory(traj: &Trajectory, th: &FilterThresholds) -> Result<FilterVerdict> {
    let (total_trans, total_rot) = motion_magnitudes(traj)?;
    let mut verdict = FilterVerdict {
        id: traj.id().to_string(),
        decision: Decision::Keep,
        r_jump: None,
        r_complex: None,
        total_trans,
        total_rot,
    };
    if total_trans < th.tau_static_trans {
        verdict.decision = if total_rot < th.tau_static_rot {
            Decision::RejectStatic
        } else {
            Decision::RotationOnlyKeep
        };
        return Ok(verdict);
    }
    let r_jump = jump_ratio(traj)?;
    let r_complex = complexity_ratio(traj, th.epsilon)?;
    verdict.r_jump = Some(r_jump);
    verdict.r_complex = Some(r_complex);
    verdict.decision = if r_jump > th.tau_jump {
        Decision::RejectJump
    } else if r_complex > th.tau_complex {
        Decision::RejectComplex
    } else {
        Decision::Keep
    };
    Ok(verdict)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    Translational,
    RotationOnly,
}

/// Settings shared by every trajectory-pair measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PairParams {
    /// Both trajectories are resampled to this many poses first.
    pub resample_k: usize,
    pub align: AlignParams,
    /// In translational mode, rotate estimated orientations by the alignment
    /// rotation before comparing them.
    pub rotate_orientations: bool,
}

impl Default for PairParams {
    fn default() -> Self {
        PairParams {
            resample_k: 64,
            align: AlignParams::default(),
            rotate_orientations: true,
        }
    }
}

impl PairParams {
    pub fn validate(&self) -> Result<()> {
        if self.resample_k < 3 {
            return Err(Error::InvalidParam(format!(
                "resample_k must be >= 3, got {}",
                self.resample_k
            )));
        }
        self.align.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairErrors {
    /// Zero in rotation-only mode, where translation is ignored.
    pub trans_err: f64,
    pub rot_err: f64,
}

/// Mean geodesic angle between paired rotations.
pub fn mean_geodesic(est: &[Rotation], reference: &[Rotation]) -> Result<f64> {
    if est.len() != reference.len() {
        return Err(Error::LengthMismatch(est.len(), reference.len()));
    }
    if est.is_empty() {
        return Err(Error::TooShort(0));
    }
    Ok(est
        .iter()
        .zip(reference)
        .map(|(a, b)| geodesic_angle(a, b))
        .sum::<f64>()
        / est.len() as f64)
}

/// TransErr and RotErr of `est` against `reference`, sharing one alignment.
pub fn pair_errors(
    est: &Trajectory,
    reference: &Trajectory,
    mode: ErrorMode,
    params: &PairParams,
) -> Result<PairErrors> {
    let est = resample(est, params.resample_k)?;
    let reference = resample(reference, params.resample_k)?;
    match mode {
        ErrorMode::Translational => {
            let (t, _) = estimate_trajectory_alignment(&est, &reference, &params.align)?;
            let trans_err = est
                .poses()
                .iter()
                .zip(reference.poses())
                .map(|(e, r)| (t.apply(&e.center) - r.center).norm())
                .sum::<f64>()
                / est.len() as f64;
            let est_rot: Vec<Rotation> = if params.rotate_orientations {
                est.poses()
                    .iter()
                    .map(|p| t.rotation * p.rotation)
                    .collect()
            } else {
                est.rotations()
            };
            let rot_err = mean_geodesic(&est_rot, &reference.rotations())?;
            Ok(PairErrors { trans_err, rot_err })
        }
        ErrorMode::RotationOnly => {
            let a = align_rotation_only(&est)?;
            let b = align_rotation_only(&reference)?;
            Ok(PairErrors {
                trans_err: 0.0,
                rot_err: mean_geodesic(&a.rotations(), &b.rotations())?,
            })
        }
    }
}

/// Mean distance between aligned estimated centers and reference centers.
pub fn trans_err(est: &Trajectory, reference: &Trajectory, params: &PairParams) -> Result<f64> {
    Ok(pair_errors(est, reference, ErrorMode::Translational, params)?.trans_err)
}

pub fn rot_err(
    est: &Trajectory,
    reference: &Trajectory,
    mode: ErrorMode,
    params: &PairParams,
) -> Result<f64> {
    Ok(pair_errors(est, reference, mode, params)?.rot_err)
}
