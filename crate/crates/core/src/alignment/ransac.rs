use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_similarity, rms_extent, SimilarityTransform};
use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacParams {
    pub iterations: usize,
    /// Inlier distance as a fraction of the destination set's RMS extent.
    pub inlier_threshold_rel: f64,
    pub min_sample: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            iterations: 256,
            inlier_threshold_rel: 0.05,
            min_sample: 3,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::InvalidParam("ransac iterations must be >= 1".into()));
        }
        if !(self.inlier_threshold_rel > 0.0 && self.inlier_threshold_rel < 1.0) {
            return Err(Error::InvalidParam(format!(
                "inlier_threshold_rel must lie in (0, 1), got {}",
                self.inlier_threshold_rel
            )));
        }
        if self.min_sample != 3 {
            return Err(Error::InvalidParam("min_sample must be 3".into()));
        }
        Ok(())
    }
}

/// RANSAC over index-paired point sets. Hypotheses come from minimal samples;
/// the winner has the most inliers, ties going to the lower inlier RMS and
/// then the earlier hypothesis. The returned transform is refit on the
/// winner's inliers; the mask is the winner's.
pub fn estimate_similarity_ransac(
    src: &[Point],
    dst: &[Point],
    params: &RansacParams,
) -> Result<(SimilarityTransform, Vec<bool>)> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch(src.len(), dst.len()));
    }
    let threshold = params.inlier_threshold_rel * rms_extent(dst);
    let pick = |idx: &[usize]| -> (Vec<Point>, Vec<Point>) {
        (
            idx.iter().map(|&i| src[i]).collect(),
            idx.iter().map(|&i| dst[i]).collect(),
        )
    };
    run(
        src.len(),
        params,
        threshold,
        |idx| {
            let (s, d) = pick(idx);
            estimate_similarity(&s, &d)
        },
        |t, i| (dst[i] - t.apply(&src[i])).norm(),
    )
}

struct Hypothesis {
    count: usize,
    rms: f64,
    mask: Vec<bool>,
}

pub(crate) fn run(
    n: usize,
    params: &RansacParams,
    threshold: f64,
    fit: impl Fn(&[usize]) -> Result<SimilarityTransform>,
    residual: impl Fn(&SimilarityTransform, usize) -> f64,
) -> Result<(SimilarityTransform, Vec<bool>)> {
    params.validate()?;
    let k = params.min_sample;
    if n < k {
        return Err(Error::Degenerate(format!(
            "need at least {k} correspondences, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<Hypothesis> = None;
    let mut sample = Vec::with_capacity(k);
    for _ in 0..params.iterations {
        sample.clear();
        sample.extend(index::sample(&mut rng, n, k));
        sample.sort_unstable();
        let Ok(model) = fit(&sample) else { continue };
        let mut mask = vec![false; n];
        let (mut count, mut sq) = (0usize, 0.0f64);
        for (i, slot) in mask.iter_mut().enumerate() {
            let r = residual(&model, i);
            if r <= threshold {
                *slot = true;
                count += 1;
                sq += r * r;
            }
        }
        if count < k {
            continue;
        }
        let rms = (sq / count as f64).sqrt();
        let better = match &best {
            None => true,
            Some(b) => count > b.count || (count == b.count && rms < b.rms),
        };
        if better {
            best = Some(Hypothesis { count, rms, mask });
        }
        // Every point is an inlier: later hypotheses can only tie on the mask,
        // and the refit depends on nothing else.
        if count == n {
            break;
        }
    }
    let best = best.ok_or(Error::RobustFitFailed { min_inliers: k })?;
    let inliers: Vec<usize> = (0..n).filter(|&i| best.mask[i]).collect();
    let model = fit(&inliers)?;
    Ok((model, best.mask))
}
