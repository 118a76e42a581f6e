//! Template classification and intra-class pair matching.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{path_length, resample, Trajectory};
use crate::library::MotionTemplate;
use crate::metrics::{pair_errors, ErrorMode, PairErrors, PairParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyParams {
    pub rot_weight: f64,
    pub pair: PairParams,
    /// Clips with path length below this go to the rotation-only branch.
    pub tau_static_trans: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            rot_weight: 1.0,
            pair: PairParams::default(),
            tau_static_trans: 1e-2,
        }
    }
}

impl ClassifyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rot_weight >= 0.0) || !self.rot_weight.is_finite() {
            return Err(Error::InvalidParam(format!(
                "rot_weight must be >= 0, got {}",
                self.rot_weight
            )));
        }
        if !(self.tau_static_trans > 0.0) {
            return Err(Error::InvalidParam(format!(
                "tau_static_trans must be > 0, got {}",
                self.tau_static_trans
            )));
        }
        self.pair.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLabel {
    pub trajectory_id: String,
    pub class_id: usize,
    pub class_name: String,
    pub trans_err: f64,
    pub rot_err: f64,
    pub score: f64,
}

/// Centers scaled so the path length is 1.
pub fn normalize_unit_length(traj: &Trajectory) -> Result<Trajectory> {
    let len = path_length(traj)?;
    if !(len > 0.0) {
        return Err(Error::RotationOnlyInput);
    }
    Ok(traj.map_centers(|c| c / len))
}

fn is_rotation_only(traj: &Trajectory, tau_static_trans: f64) -> Result<bool> {
    Ok(path_length(traj)? < tau_static_trans)
}

struct Entry {
    class_id: usize,
    name: String,
    rotation_only: bool,
    /// Resampled, and normalized to unit length when translational.
    prepared: Trajectory,
}

/// Templates prepared once for repeated classification.
pub struct Classifier {
    entries: Vec<Entry>,
    params: ClassifyParams,
}

impl Classifier {
    pub fn new(templates: &[MotionTemplate], params: ClassifyParams) -> Result<Self> {
        params.validate()?;
        if templates.is_empty() {
            return Err(Error::NoTemplates);
        }
        let k = params.pair.resample_k;
        let entries = templates
            .iter()
            .map(|t| {
                let prepared = if t.rotation_only {
                    resample(&t.trajectory, k)?
                } else {
                    resample(&normalize_unit_length(&t.trajectory)?, k)?
                };
                Ok(Entry {
                    class_id: t.class_id,
                    name: t.name.clone(),
                    rotation_only: t.rotation_only,
                    prepared,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Classifier { entries, params })
    }

    pub fn params(&self) -> &ClassifyParams {
        &self.params
    }

    /// Scores `traj` against every eligible template and returns the
    /// minimum, ties going to the lowest class id. Templates whose
    /// alignment fails are skipped; the last failure is returned when none
    /// succeeds.
    pub fn classify(&self, traj: &Trajectory) -> Result<ClassLabel> {
        let p = &self.params;
        let rotation_only = is_rotation_only(traj, p.tau_static_trans)?;
        let (query, mode) = if rotation_only {
            (resample(traj, p.pair.resample_k)?, ErrorMode::RotationOnly)
        } else {
            (
                resample(&normalize_unit_length(traj)?, p.pair.resample_k)?,
                ErrorMode::Translational,
            )
        };
        let mut best: Option<(f64, &Entry, PairErrors)> = None;
        let mut last_err = None;
        for entry in self
            .entries
            .iter()
            .filter(|e| e.rotation_only == rotation_only)
        {
            let errs = match pair_errors(&query, &entry.prepared, mode, &p.pair) {
                Ok(e) => e,
                Err(e) => {
                    last_err = Some(e);
                    continue;
                }
            };
            let score = errs.trans_err + p.rot_weight * errs.rot_err;
            let better = match &best {
                None => true,
                Some((s, b, _)) => score < *s || (score == *s && entry.class_id < b.class_id),
            };
            if better {
                best = Some((score, entry, errs));
            }
        }
        match best {
            Some((score, entry, errs)) => Ok(ClassLabel {
                trajectory_id: traj.id().to_string(),
                class_id: entry.class_id,
                class_name: entry.name.clone(),
                trans_err: errs.trans_err,
                rot_err: errs.rot_err,
                score,
            }),
            None => Err(last_err.unwrap_or(Error::NoTemplates)),
        }
    }
}

pub fn classify(
    traj: &Trajectory,
    templates: &[MotionTemplate],
    params: &ClassifyParams,
) -> Result<ClassLabel> {
    Classifier::new(templates, params.clone())?.classify(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchThresholds {
    pub max_trans_err: f64,
    pub max_rot_err: f64,
    /// Random candidate pairs drawn per class.
    pub n_candidates: usize,
}

impl Default for MatchThresholds {
    fn default() -> Self {
        MatchThresholds {
            max_trans_err: 0.1,
            max_rot_err: 0.05,
            n_candidates: 200,
        }
    }
}

impl MatchThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_trans_err > 0.0) {
            return Err(Error::InvalidParam(format!(
                "max_trans_err must be > 0, got {}",
                self.max_trans_err
            )));
        }
        if !(self.max_rot_err > 0.0) {
            return Err(Error::InvalidParam(format!(
                "max_rot_err must be > 0, got {}",
                self.max_rot_err
            )));
        }
        Ok(())
    }

    pub fn accepts(&self, e: &PairErrors) -> bool {
        e.trans_err <= self.max_trans_err && e.rot_err <= self.max_rot_err
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchPair {
    pub id_a: String,
    pub id_b: String,
    pub class_id: usize,
    pub trans_err: f64,
    pub rot_err: f64,
}

/// Errors of `a` against `b`, taking the elementwise max over both
/// alignment directions. Translational clips are normalized to unit length.
pub fn symmetric_errors(
    a: &Trajectory,
    b: &Trajectory,
    params: &ClassifyParams,
) -> Result<PairErrors> {
    let ra = is_rotation_only(a, params.tau_static_trans)?;
    let rb = is_rotation_only(b, params.tau_static_trans)?;
    if ra != rb {
        return Err(Error::MixedMotionKinds);
    }
    let (a, b, mode) = if ra {
        (a.clone(), b.clone(), ErrorMode::RotationOnly)
    } else {
        (
            normalize_unit_length(a)?,
            normalize_unit_length(b)?,
            ErrorMode::Translational,
        )
    };
    let ab = pair_errors(&a, &b, mode, &params.pair)?;
    let ba = pair_errors(&b, &a, mode, &params.pair)?;
    Ok(PairErrors {
        trans_err: ab.trans_err.max(ba.trans_err),
        rot_err: ab.rot_err.max(ba.rot_err),
    })
}

/// `Some` when both symmetric errors are within the thresholds. The pair is
/// returned with ids in lexicographic order.
pub fn match_pair(
    a: &Trajectory,
    b: &Trajectory,
    class_id: usize,
    th: &MatchThresholds,
    params: &ClassifyParams,
) -> Result<Option<MatchPair>> {
    th.validate()?;
    let e = symmetric_errors(a, b, params)?;
    if !th.accepts(&e) {
        return Ok(None);
    }
    let (id_a, id_b) = if a.id() <= b.id() {
        (a.id(), b.id())
    } else {
        (b.id(), a.id())
    };
    Ok(Some(MatchPair {
        id_a: id_a.to_string(),
        id_b: id_b.to_string(),
        class_id,
        trans_err: e.trans_err,
        rot_err: e.rot_err,
    }))
}

/// Unordered pair `(i, j)`, `i < j`, at position `k` of the row-major
/// enumeration of all pairs of `n` items.
fn pair_at(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    while k >= n - 1 - i {
        k -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + k)
}

/// Evaluates up to `th.n_candidates` distinct random pairs of `members`
/// (drawn with `seed`) and returns the accepted ones sorted by ids. Pairs
/// whose evaluation fails count as rejected.
pub fn match_within_class(
    members: &[Trajectory],
    class_id: usize,
    th: &MatchThresholds,
    params: &ClassifyParams,
    seed: u64,
) -> Result<Vec<MatchPair>> {
    th.validate()?;
    params.validate()?;
    let mut sorted: Vec<&Trajectory> = members.iter().collect();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    let n = sorted.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let total = n * (n - 1) / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = index::sample(&mut rng, total, th.n_candidates.min(total)).into_vec();
    picks.sort_unstable();
    let mut pairs: Vec<MatchPair> = picks
        .into_par_iter()
        .filter_map(|k| {
            let (i, j) = pair_at(n, k);
            match_pair(sorted[i], sorted[j], class_id, th, params)
                .ok()
                .flatten()
        })
        .collect();
    pairs.sort_by(|a, b| (&a.id_a, &a.id_b).cmp(&(&b.id_a, &b.id_b)));
    Ok(pairs)
}
