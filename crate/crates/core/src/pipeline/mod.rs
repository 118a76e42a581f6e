//! The curation pipeline over on-disk corpora: filter, classify, match.
//!
//! Each stage is fail-soft: an entry that cannot be read or processed is
//! recorded as an [`EntryError`] and the stage continues. A stage whose error
//! rate exceeds 10% ends the run with [`Error::ErrorRateExceeded`].

mod corpus;

pub use corpus::*;

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::alignment::AlignParams;
use crate::classify::{
    match_within_class, ClassLabel, Classifier, ClassifyParams, MatchPair, MatchThresholds,
};
use crate::error::{Error, Result};
use crate::library::{library_templates, motion_types, TemplateParams};
use crate::metrics::{filter_trajectory, Decision, FilterThresholds, FilterVerdict, PairParams};

pub const VERDICTS_FILE: &str = "verdicts.jsonl";
pub const FILTERED_FILE: &str = "filtered.json";
pub const LABELS_FILE: &str = "labels.jsonl";
pub const PAIRS_FILE: &str = "pairs.jsonl";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: FilterThresholds,
    #[serde(rename = "match")]
    pub matching: MatchThresholds,
    pub templates: TemplateParams,
    pub resample_k: usize,
    pub rot_weight: f64,
    pub align: AlignParams,
    /// Worker threads; all logical cores when absent.
    pub jobs: Option<usize>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            filter: FilterThresholds::default(),
            matching: MatchThresholds::default(),
            templates: TemplateParams::default(),
            resample_k: 64,
            rot_weight: 1.0,
            align: AlignParams::default(),
            jobs: None,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: PipelineConfig = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        self.matching.validate()?;
        self.templates.validate()?;
        self.classify_params().validate()?;
        if self.jobs == Some(0) {
            return Err(Error::InvalidParam("jobs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn classify_params(&self) -> ClassifyParams {
        ClassifyParams {
            rot_weight: self.rot_weight,
            pair: PairParams {
                resample_k: self.resample_k,
                align: self.align.clone(),
                ..PairParams::default()
            },
            tau_static_trans: self.filter.tau_static_trans,
        }
    }

    pub fn jobs(&self) -> usize {
        self.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs())
            .build()
            .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryError {
    pub id: String,
    pub stage: String,
    pub message: String,
}

impl EntryError {
    fn new(id: &str, stage: &str, e: &Error) -> Self {
        EntryError {
            id: id.to_string(),
            stage: stage.to_string(),
            message: e.to_string(),
        }
    }
}

fn check_error_rate(stage: &'static str, errors: usize, total: usize) -> Result<()> {
    if errors * 10 > total {
        Err(Error::ErrorRateExceeded {
            stage,
            errors,
            total,
        })
    } else {
        Ok(())
    }
}

pub fn write_jsonl<T: Serialize>(path: impl AsRef<Path>, items: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| Error::json(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::json(path, e))?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// One per readable entry, in manifest order.
    pub verdicts: Vec<FilterVerdict>,
    /// Entries with a keeping decision, root made absolute.
    pub kept: CorpusManifest,
    pub errors: Vec<EntryError>,
}

pub fn run_filter(manifest: &CorpusManifest, cfg: &PipelineConfig) -> Result<FilterOutput> {
    cfg.validate()?;
    let results: Vec<Result<FilterVerdict>> = cfg.pool()?.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| filter_trajectory(&manifest.load_entry(e)?, &cfg.filter))
            .collect()
    });
    let mut out = FilterOutput {
        verdicts: Vec::new(),
        kept: CorpusManifest::default(),
        errors: Vec::new(),
    };
    let mut kept = Vec::new();
    for (entry, r) in manifest.entries.iter().zip(results) {
        match r {
            Ok(v) => {
                if v.decision.is_kept() {
                    kept.push(entry.clone());
                }
                out.verdicts.push(v);
            }
            Err(e) => out.errors.push(EntryError::new(&entry.id, "filter", &e)),
        }
    }
    out.kept = manifest.with_absolute_root(kept)?;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ClassifyOutput {
    /// Sorted by trajectory id.
    pub labels: Vec<ClassLabel>,
    pub errors: Vec<EntryError>,
}

pub fn run_classify(manifest: &CorpusManifest, cfg: &PipelineConfig) -> Result<ClassifyOutput> {
    cfg.validate()?;
    let templates = library_templates(&cfg.templates)?;
    let classifier = Classifier::new(&templates, cfg.classify_params())?;
    let results: Vec<Result<ClassLabel>> = cfg.pool()?.install(|| {
        manifest
            .entries
            .par_iter()
            .map(|e| classifier.classify(&manifest.load_entry(e)?))
            .collect()
    });
    let mut out = ClassifyOutput {
        labels: Vec::new(),
        errors: Vec::new(),
    };
    for (entry, r) in manifest.entries.iter().zip(results) {
        match r {
            Ok(l) => out.labels.push(l),
            Err(e) => out.errors.push(EntryError::new(&entry.id, "classify", &e)),
        }
    }
    out.labels
        .sort_by(|a, b| a.trajectory_id.cmp(&b.trajectory_id));
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MatchOutput {
    /// Sorted by (id_a, id_b).
    pub pairs: Vec<MatchPair>,
    pub candidates_evaluated: usize,
    pub errors: Vec<EntryError>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-class candidate seed.
pub fn class_seed(seed: u64, class_id: usize) -> u64 {
    splitmix64(seed ^ splitmix64(class_id as u64))
}

pub fn run_match(
    labels: &[ClassLabel],
    manifest: &CorpusManifest,
    cfg: &PipelineConfig,
) -> Result<MatchOutput> {
    cfg.validate()?;
    let params = cfg.classify_params();
    let by_id: HashMap<&str, &ManifestEntry> = manifest
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e))
        .collect();
    let mut classes: BTreeMap<usize, Vec<&ClassLabel>> = BTreeMap::new();
    for l in labels {
        classes.entry(l.class_id).or_default().push(l);
    }
    let mut out = MatchOutput {
        pairs: Vec::new(),
        candidates_evaluated: 0,
        errors: Vec::new(),
    };
    let pool = cfg.pool()?;
    for (class_id, members) in classes {
        let loaded: Vec<Result<_>> = pool.install(|| {
            members
                .par_iter()
                .map(|l| match by_id.get(l.trajectory_id.as_str()) {
                    Some(e) => manifest.load_entry(e),
                    None => Err(Error::InvalidParam(format!(
                        "label id {:?} not in manifest",
                        l.trajectory_id
                    ))),
                })
                .collect()
        });
        let mut trajs = Vec::with_capacity(loaded.len());
        for (l, r) in members.iter().zip(loaded) {
            match r {
                Ok(t) => trajs.push(t),
                Err(e) => out
                    .errors
                    .push(EntryError::new(&l.trajectory_id, "match", &e)),
            }
        }
        let n = trajs.len();
        out.candidates_evaluated += cfg.matching.n_candidates.min(n * n.saturating_sub(1) / 2);
        let seed = class_seed(cfg.seed, class_id);
        let pairs =
            pool.install(|| match_within_class(&trajs, class_id, &cfg.matching, &params, seed))?;
        out.pairs.extend(pairs);
    }
    out.pairs
        .sort_by(|a, b| (&a.id_a, &a.id_b).cmp(&(&b.id_a, &b.id_b)));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub class_id: usize,
    pub name: String,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub filter: f64,
    pub classify: f64,
    #[serde(rename = "match")]
    pub matching: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub corpus_size: usize,
    /// Every decision, including zero counts. Together with the filter
    /// errors these sum to `corpus_size`.
    pub filter_counts: BTreeMap<Decision, usize>,
    pub labeled: usize,
    pub class_histogram: Vec<ClassCount>,
    pub candidates_evaluated: usize,
    pub pairs_accepted: usize,
    pub errors: Vec<EntryError>,
    /// Stage that exceeded the error-rate limit, if any.
    pub aborted_at: Option<String>,
    /// Seconds per stage.
    pub wall_time: StageTimes,
}

impl PipelineReport {
    fn new(corpus_size: usize) -> Self {
        PipelineReport {
            corpus_size,
            filter_counts: Decision::ALL.iter().map(|d| (*d, 0)).collect(),
            labeled: 0,
            class_histogram: motion_types()
                .into_iter()
                .map(|m| ClassCount {
                    class_id: m.class_id,
                    name: m.name,
                    count: 0,
                })
                .collect(),
            candidates_evaluated: 0,
            pairs_accepted: 0,
            errors: Vec::new(),
            aborted_at: None,
            wall_time: StageTimes::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Multi-line human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!("corpus: {}\n", self.corpus_size);
        for (d, n) in &self.filter_counts {
            s += &format!("  {d:?}: {n}\n");
        }
        s += &format!("labeled: {}\n", self.labeled);
        let populated = self.class_histogram.iter().filter(|c| c.count > 0).count();
        s += &format!(
            "classes populated: {populated} of {}\n",
            self.class_histogram.len()
        );
        s += &format!(
            "pairs: {} accepted of {} evaluated\n",
            self.pairs_accepted, self.candidates_evaluated
        );
        s += &format!("errors: {}\n", self.errors.len());
        if let Some(stage) = &self.aborted_at {
            s += &format!("aborted at: {stage}\n");
        }
        let t = &self.wall_time;
        s += &format!(
            "wall time: filter {:.2}s, classify {:.2}s, match {:.2}s\n",
            t.filter, t.classify, t.matching
        );
        s
    }
}

/// Runs filter, classify and match in order, writing every artifact and
/// `report.json` into `out_dir`. On an error-rate abort the report is still
/// written, with `aborted_at` set, before the error is returned.
pub fn run_all(
    manifest: &CorpusManifest,
    cfg: &PipelineConfig,
    out_dir: &Path,
) -> Result<PipelineReport> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut report = PipelineReport::new(manifest.entries.len());
    let report_path = out_dir.join(REPORT_FILE);
    let abort = |report: &mut PipelineReport, e: Error| -> Result<PipelineReport> {
        if let Error::ErrorRateExceeded { stage, .. } = &e {
            report.aborted_at = Some(stage.to_string());
            report.save(&report_path)?;
        }
        Err(e)
    };

    let t0 = Instant::now();
    let filtered = run_filter(manifest, cfg)?;
    report.wall_time.filter = t0.elapsed().as_secs_f64();
    for v in &filtered.verdicts {
        *report.filter_counts.entry(v.decision).or_default() += 1;
    }
    write_jsonl(out_dir.join(VERDICTS_FILE), &filtered.verdicts)?;
    filtered.kept.save(out_dir.join(FILTERED_FILE))?;
    report.errors.extend(filtered.errors.iter().cloned());
    if let Err(e) = check_error_rate("filter", filtered.errors.len(), manifest.entries.len()) {
        return abort(&mut report, e);
    }

    let t0 = Instant::now();
    let classified = run_classify(&filtered.kept, cfg)?;
    report.wall_time.classify = t0.elapsed().as_secs_f64();
    write_jsonl(out_dir.join(LABELS_FILE), &classified.labels)?;
    report.labeled = classified.labels.len();
    for l in &classified.labels {
        report.class_histogram[l.class_id].count += 1;
    }
    report.errors.extend(classified.errors.iter().cloned());
    if let Err(e) = check_error_rate(
        "classify",
        classified.errors.len(),
        filtered.kept.entries.len(),
    ) {
        return abort(&mut report, e);
    }

    let t0 = Instant::now();
    let matched = run_match(&classified.labels, &filtered.kept, cfg)?;
    report.wall_time.matching = t0.elapsed().as_secs_f64();
    write_jsonl(out_dir.join(PAIRS_FILE), &matched.pairs)?;
    report.candidates_evaluated = matched.candidates_evaluated;
    report.pairs_accepted = matched.pairs.len();
    report.errors.extend(matched.errors.iter().cloned());
    if let Err(e) = check_error_rate("match", matched.errors.len(), classified.labels.len()) {
        return abort(&mut report, e);
    }
    report.save(&report_path)?;
    Ok(report)
}

/// Writes `templates.json` and one pose file per template into `out_dir`.
pub fn export_templates(params: &TemplateParams, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let templates = library_templates(params)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let index = out_dir.join("templates.json");
    let text = serde_json::to_string_pretty(&templates).map_err(|e| Error::json(&index, e))?;
    std::fs::write(&index, text + "\n").map_err(|e| Error::io(&index, e))?;
    let mut written = vec![index];
    for t in &templates {
        let path = out_dir.join(format!("{}.txt", t.trajectory.id()));
        crate::geometry::write_trajectory(&t.trajectory, &path)?;
        written.push(path);
    }
    Ok(written)
}
