//! Similarity alignment between trajectories.
//!
//! Point sets are aligned with the closed-form least-squares similarity
//! (centering, rotation from the SVD of the cross-covariance, then scale by
//! least squares). Trajectories are aligned by RANSAC over index-paired
//! camera centers. Rotation-only trajectories are instead aligned by removing
//! the first-frame orientation.

mod ransac;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Quaternion, Rotation, Trajectory};

pub use ransac::{estimate_similarity_ransac, RansacParams};

/// `x ↦ scale · rotation · x + translation`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTransform {
    pub scale: f64,
    pub rotation: Rotation,
    pub translation: Point,
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        SimilarityTransform {
            scale: 1.0,
            rotation: Rotation::identity(),
            translation: Point::zeros(),
        }
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.scale * (self.rotation * x) + self.translation
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SimilarityTransform) -> SimilarityTransform {
        SimilarityTransform {
            scale: self.scale * other.scale,
            rotation: self.rotation * other.rotation,
            translation: self.apply(&other.translation),
        }
    }

    pub fn inverse(&self) -> SimilarityTransform {
        let rt = self.rotation.transpose();
        SimilarityTransform {
            scale: 1.0 / self.scale,
            rotation: rt,
            translation: -(rt * self.translation) / self.scale,
        }
    }

    /// Maps centers through the transform and left-multiplies rotations.
    pub fn apply_to_trajectory(&self, traj: &Trajectory) -> Trajectory {
        traj.map_centers(|c| self.apply(c))
            .map_rotations(|r| self.rotation * r)
    }
}

#[derive(Serialize, Deserialize)]
struct TransformRepr {
    scale: f64,
    quaternion: [f64; 4],
    translation: [f64; 3],
}

impl Serialize for SimilarityTransform {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TransformRepr {
            scale: self.scale,
            quaternion: Quaternion::from_rotation_matrix(&self.rotation).to_array(),
            translation: self.translation.into(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimilarityTransform {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TransformRepr::deserialize(d)?;
        let [x, y, z, w] = r.quaternion;
        let q = Quaternion::new(x, y, z, w).map_err(serde::de::Error::custom)?;
        if !(r.scale > 0.0) {
            return Err(serde::de::Error::custom("scale must be positive"));
        }
        Ok(SimilarityTransform {
            scale: r.scale,
            rotation: q.to_rotation_matrix(),
            translation: r.translation.into(),
        })
    }
}

fn centroid(pts: impl ExactSizeIterator<Item = Point>) -> Point {
    let n = pts.len() as f64;
    pts.fold(Point::zeros(), |acc, p| acc + p) / n
}

/// Rotation maximizing `tr(Rᵀ M)`, with the last singular direction flipped
/// when needed so the result is never a reflection.
pub(crate) fn procrustes(m: &Matrix3<f64>) -> Rotation {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let d = (u * v_t).determinant();
    let s = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d.signum()));
    u * s * v_t
}

/// Root-mean-square distance of the points from their centroid.
pub fn rms_extent(pts: &[Point]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    let mean = centroid(pts.iter().copied());
    (pts.iter().map(|p| (p - mean).norm_squared()).sum::<f64>() / pts.len() as f64).sqrt()
}

/// Ratio of the second to the first principal extent; zero for collinear sets.
fn planarity(centered: &[Point]) -> f64 {
    let scatter = centered
        .iter()
        .fold(Matrix3::zeros(), |acc, x| acc + x * x.transpose());
    let mut ev: Vec<f64> = scatter
        .symmetric_eigenvalues()
        .iter()
        .map(|v| v.max(0.0))
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    if ev[0] <= 0.0 {
        0.0
    } else {
        (ev[1] / ev[0]).sqrt()
    }
}

const COLLINEAR_TOL: f64 = 1e-9;

/// Least-squares similarity taking `src[i]` onto `dst[i]`.
///
/// Needs at least three points whose centered configuration has rank ≥ 2.
pub fn estimate_similarity(src: &[Point], dst: &[Point]) -> Result<SimilarityTransform> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch(src.len(), dst.len()));
    }
    if src.len() < 3 {
        return Err(Error::Degenerate(format!(
            "need at least 3 correspondences, got {}",
            src.len()
        )));
    }
    let mu_src = centroid(src.iter().copied());
    let mu_dst = centroid(dst.iter().copied());
    let xs: Vec<Point> = src.iter().map(|p| p - mu_src).collect();
    let ys: Vec<Point> = dst.iter().map(|p| p - mu_dst).collect();
    if planarity(&xs) <= COLLINEAR_TOL {
        return Err(Error::Degenerate(
            "source points are collinear or coincident".into(),
        ));
    }
    let cross = xs
        .iter()
        .zip(&ys)
        .fold(Matrix3::zeros(), |acc, (x, y)| acc + y * x.transpose());
    let rotation = procrustes(&cross);
    finish_similarity(&xs, &ys, mu_src, mu_dst, rotation)
}

/// Least-squares scale for a fixed rotation, then the translation.
fn finish_similarity(
    xs: &[Point],
    ys: &[Point],
    mu_src: Point,
    mu_dst: Point,
    rotation: Rotation,
) -> Result<SimilarityTransform> {
    let var_src: f64 = xs.iter().map(|x| x.norm_squared()).sum();
    let corr: f64 = xs.iter().zip(ys).map(|(x, y)| y.dot(&(rotation * x))).sum();
    let scale = corr / var_src;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Degenerate(format!("non-positive scale {scale}")));
    }
    let translation = mu_dst - scale * (rotation * mu_src);
    Ok(SimilarityTransform {
        scale,
        rotation,
        translation,
    })
}

/// Pose correspondences used for trajectory alignment.
pub(crate) struct PoseSets<'a> {
    pub src: &'a [Point],
    pub dst: &'a [Point],
    pub src_rot: &'a [Rotation],
    pub dst_rot: &'a [Rotation],
}

impl PoseSets<'_> {
    /// Similarity over the indexed subset. The rotation maximizes the
    /// scale-free position correlation plus `orientation_weight` times the
    /// mean orientation agreement `tr(R_dstᵀ · R · R_src) / 3`.
    pub fn fit(&self, idx: &[usize], orientation_weight: f64) -> Result<SimilarityTransform> {
        let mu_src = centroid(idx.iter().map(|&i| self.src[i]));
        let mu_dst = centroid(idx.iter().map(|&i| self.dst[i]));
        let xs: Vec<Point> = idx.iter().map(|&i| self.src[i] - mu_src).collect();
        let ys: Vec<Point> = idx.iter().map(|&i| self.dst[i] - mu_dst).collect();
        let sx: f64 = xs.iter().map(|x| x.norm_squared()).sum();
        let sy: f64 = ys.iter().map(|y| y.norm_squared()).sum();
        if sx <= 0.0 || sy <= 0.0 {
            return Err(Error::Degenerate("coincident centers".into()));
        }
        let mut m = xs
            .iter()
            .zip(&ys)
            .fold(Matrix3::zeros(), |acc, (x, y)| acc + y * x.transpose());
        m /= (sx * sy).sqrt();
        if orientation_weight > 0.0 {
            let w = orientation_weight / (3.0 * idx.len() as f64);
            for &i in idx {
                m += w * self.dst_rot[i] * self.src_rot[i].transpose();
            }
        } else if planarity(&xs) <= COLLINEAR_TOL {
            return Err(Error::Degenerate(
                "collinear centers without orientation term".into(),
            ));
        }
        finish_similarity(&xs, &ys, mu_src, mu_dst, procrustes(&m))
    }

    pub fn residual(&self, t: &SimilarityTransform, i: usize) -> f64 {
        (self.dst[i] - t.apply(&self.src[i])).norm()
    }
}

/// Options for trajectory alignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AlignParams {
    pub ransac: RansacParams,
    /// Relative weight of orientation agreement when solving the rotation.
    pub orientation_weight: f64,
}

impl Default for AlignParams {
    fn default() -> Self {
        AlignParams {
            ransac: RansacParams::default(),
            orientation_weight: 0.1,
        }
    }
}

impl AlignParams {
    pub fn validate(&self) -> Result<()> {
        self.ransac.validate()?;
        if !(self.orientation_weight >= 0.0) || !self.orientation_weight.is_finite() {
            return Err(Error::InvalidParam(format!(
                "orientation_weight {}",
                self.orientation_weight
            )));
        }
        Ok(())
    }
}

/// Extents below this (relative to the coordinate magnitude) count as no translation.
const NEGLIGIBLE_EXTENT: f64 = 1e-12;

fn has_translation(pts: &[Point]) -> bool {
    let scale = pts.iter().map(|p| p.amax()).fold(1.0, f64::max);
    rms_extent(pts) > NEGLIGIBLE_EXTENT * scale
}

/// RANSAC similarity between index-paired poses of two equal-length trajectories.
pub fn estimate_trajectory_alignment(
    src: &Trajectory,
    dst: &Trajectory,
    params: &AlignParams,
) -> Result<(SimilarityTransform, Vec<bool>)> {
    src.require_len(2)?;
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch(src.len(), dst.len()));
    }
    let (sc, dc) = (src.centers(), dst.centers());
    if !has_translation(&sc) || !has_translation(&dc) {
        return Err(Error::RotationOnlyInput);
    }
    let (sr, dr) = (src.rotations(), dst.rotations());
    let sets = PoseSets {
        src: &sc,
        dst: &dc,
        src_rot: &sr,
        dst_rot: &dr,
    };
    let threshold = params.ransac.inlier_threshold_rel * rms_extent(&dc);
    ransac::run(
        sc.len(),
        &params.ransac,
        threshold,
        |idx| sets.fit(idx, params.orientation_weight),
        |t, i| sets.residual(t, i),
    )
}

/// `src` mapped onto `dst`'s frame: centers through the estimated similarity,
/// rotations left-multiplied by its rotation.
pub fn align_to(src: &Trajectory, dst: &Trajectory, params: &AlignParams) -> Result<Trajectory> {
    let (t, _) = estimate_trajectory_alignment(src, dst, params)?;
    Ok(t.apply_to_trajectory(src))
}

/// Removes the global orientation offset: rotation `i` becomes `R_1ᵀ · R_i`.
/// Centers are copied unchanged.
pub fn align_rotation_only(traj: &Trajectory) -> Result<Trajectory> {
    traj.require_len(2)?;
    let r1t = traj.poses()[0].rotation.transpose();
    Ok(traj.map_rotations(|r| r1t * r))
}
