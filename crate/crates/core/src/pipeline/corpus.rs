//! On-disk corpora: the manifest format and the synthetic corpus generator.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alignment::SimilarityTransform;
use crate::error::{Error, Result};
use crate::geometry::{frame_displacements, load_trajectory, write_trajectory, Point, Trajectory};
use crate::library::{motion_types, sample_trajectory, MotionType, SampleRanges, TemplateParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    /// Every frame after a cut point is shifted by a large step.
    Jump,
    /// Alternating sideways offsets along the whole clip.
    Jitter,
    /// One pose repeated.
    Static,
    /// Translation removed, rotation kept.
    RotationOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Pose file, relative to the manifest root.
    pub path: PathBuf,
    pub n_frames: usize,
    /// Generating class, for synthetic corpora.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_id: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<DefectKind>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    /// Directory that entry paths are relative to. When absent, the directory
    /// holding the manifest file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<PathBuf>,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m: CorpusManifest =
            serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if m.root.is_none() {
            let dir = path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            m.root = Some(dir.to_path_buf());
        }
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::InvalidParam(format!(
                    "duplicate manifest id {:?}",
                    e.id
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        match &self.root {
            Some(r) => r.join(&entry.path),
            None => entry.path.clone(),
        }
    }

    /// Loads an entry's pose file; the trajectory takes the entry id.
    pub fn load_entry(&self, entry: &ManifestEntry) -> Result<Trajectory> {
        let mut t = load_trajectory(self.resolve(entry))?;
        t.set_id(entry.id.clone());
        Ok(t)
    }

    /// Same entries, with the root made absolute so the manifest can be
    /// written anywhere.
    pub fn with_absolute_root(&self, entries: Vec<ManifestEntry>) -> Result<Self> {
        let root = self.root.clone().unwrap_or_else(|| PathBuf::from("."));
        let root = std::path::absolute(&root).map_err(|e| Error::io(&root, e))?;
        Ok(CorpusManifest {
            root: Some(root),
            entries,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DefectPlan {
    pub jump: usize,
    pub jitter: usize,
    #[serde(rename = "static")]
    pub static_: usize,
    pub rotation_only: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    /// Clean samples per class.
    pub per_class: usize,
    /// Class ids to sample; all 50 when absent.
    pub classes: Option<Vec<usize>>,
    pub ranges: SampleRanges,
    /// Place each clip in a random world frame (rotation, scale, offset).
    pub world_frame: bool,
    pub defects: DefectPlan,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            per_class: 40,
            classes: None,
            ranges: SampleRanges::default(),
            world_frame: false,
            defects: DefectPlan::default(),
        }
    }
}

impl CorpusSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn validate(&self, canonical: &TemplateParams) -> Result<()> {
        self.ranges.validate(canonical)?;
        if let Some(cs) = &self.classes {
            if let Some(bad) = cs.iter().find(|&&c| c >= crate::library::NUM_CLASSES) {
                return Err(Error::InvalidParam(format!("class id {bad} out of range")));
            }
        }
        Ok(())
    }
}

fn random_unit(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_similarity(rng: &mut impl Rng) -> SimilarityTransform {
    let axis = Unit::new_normalize(random_unit(rng));
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    SimilarityTransform {
        scale: 2f64.powf(rng.random_range(-1.0..1.0)),
        rotation: *Rotation3::from_axis_angle(&axis, angle).matrix(),
        translation: Vector3::from_fn(|_, _| rng.random_range(-5.0..5.0)),
    }
}

fn mean_step(t: &Trajectory) -> Result<f64> {
    let d = frame_displacements(t)?;
    Ok(d.iter().sum::<f64>() / d.len() as f64)
}

/// Shifts every frame from a cut in the middle half by 20 mean steps.
pub fn plant_jump(t: &Trajectory, rng: &mut impl Rng) -> Result<Trajectory> {
    let n = t.len();
    let cut = rng.random_range(n / 4..(3 * n / 4).max(n / 4 + 1)).max(1);
    let step = 20.0 * mean_step(t)?.max(1e-3);
    let dir = random_unit(rng);
    let mut k = 0;
    Ok(t.map_centers(|c| {
        let out = if k >= cut { c + dir * step } else { *c };
        k += 1;
        out
    }))
}

/// Offsets frames alternately by ±3 mean steps perpendicular to the chord.
pub fn plant_jitter(t: &Trajectory, rng: &mut impl Rng) -> Result<Trajectory> {
    let centers = t.centers();
    let chord = centers[centers.len() - 1] - centers[0];
    let perp = loop {
        let p = random_unit(rng).cross(&chord);
        if p.norm() > 1e-6 * chord.norm().max(1e-12) {
            break p.normalize();
        }
    };
    let a = 3.0 * mean_step(t)?.max(1e-3);
    let mut k = 0;
    Ok(t.map_centers(|c| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        k += 1;
        c + perp * (sign * a)
    }))
}

pub fn plant_static(t: &Trajectory) -> Trajectory {
    let first = t.poses()[0].clone();
    let mut out = t.map_centers(|_| first.center);
    out = out.map_rotations(|_| first.rotation);
    out
}

pub fn plant_rotation_only(t: &Trajectory) -> Trajectory {
    let c0: Point = t.poses()[0].center;
    t.map_centers(|_| c0)
}

fn has_rotation(mt: &MotionType) -> bool {
    use crate::library::Primitive::*;
    mt.primitives
        .iter()
        .any(|(p, _)| matches!(p, Pan | Tilt | Roll | Arc | OrbitLateral | OrbitVertical))
}

/// Writes `spec`'s corpus under `out_dir` (pose files in `trajectories/`,
/// `manifest.json` at the top) and returns the manifest. Clean clips come
/// first in class order, then jump, jitter, static and rotation-only clips.
pub fn gen_corpus(
    spec: &CorpusSpec,
    canonical: &TemplateParams,
    seed: u64,
    out_dir: &Path,
) -> Result<CorpusManifest> {
    spec.validate(canonical)?;
    let types = motion_types();
    let classes: Vec<usize> = spec
        .classes
        .clone()
        .unwrap_or_else(|| (0..types.len()).collect());
    let translational: Vec<&MotionType> = types.iter().filter(|t| !t.is_rotation_only()).collect();
    let rotating: Vec<&MotionType> = types
        .iter()
        .filter(|t| !t.is_rotation_only() && has_rotation(t))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clips: Vec<(String, Trajectory, Option<usize>, Option<DefectKind>)> = Vec::new();
    for &c in &classes {
        for k in 0..spec.per_class {
            let t = sample_trajectory(&types[c], &spec.ranges, rng.random())?;
            clips.push((format!("c{c:02}_{k:04}"), t, Some(c), None));
        }
    }
    let plan = [
        (DefectKind::Jump, spec.defects.jump),
        (DefectKind::Jitter, spec.defects.jitter),
        (DefectKind::Static, spec.defects.static_),
        (DefectKind::RotationOnly, spec.defects.rotation_only),
    ];
    for (kind, count) in plan {
        let pool = if kind == DefectKind::RotationOnly {
            &rotating
        } else {
            &translational
        };
        for k in 0..count {
            let mt = pool[rng.random_range(0..pool.len())];
            let base = sample_trajectory(mt, &spec.ranges, rng.random())?;
            let t = match kind {
                DefectKind::Jump => plant_jump(&base, &mut rng)?,
                DefectKind::Jitter => plant_jitter(&base, &mut rng)?,
                DefectKind::Static => plant_static(&base),
                DefectKind::RotationOnly => plant_rotation_only(&base),
            };
            let tag = serde_json::to_value(kind)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            clips.push((format!("d_{tag}_{k:04}"), t, None, Some(kind)));
        }
    }

    let dir = out_dir.join("trajectories");
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut entries = Vec::with_capacity(clips.len());
    for (id, mut t, class_id, defect) in clips {
        if spec.world_frame {
            t = random_similarity(&mut rng).apply_to_trajectory(&t);
        }
        t.set_id(id.clone());
        let rel = PathBuf::from("trajectories").join(format!("{id}.txt"));
        write_trajectory(&t, out_dir.join(&rel))?;
        entries.push(ManifestEntry {
            id,
            path: rel,
            n_frames: t.len(),
            class_id,
            defect,
        });
    }
    let manifest = CorpusManifest {
        root: None,
        entries,
    };
    manifest.save(out_dir.join("manifest.json"))?;
    Ok(manifest)
}
