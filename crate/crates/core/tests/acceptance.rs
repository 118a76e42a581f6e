//! End-to-end acceptance checks, run as a single test. Prints one PASS/FAIL
//! line per criterion on stderr.

mod common;

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{gaussian_center_noise, random_point, random_rotation, random_trajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use trajcurate::alignment::{
    estimate_similarity, estimate_similarity_ransac, RansacParams, SimilarityTransform,
};
use trajcurate::classify::{
    match_pair, symmetric_errors, ClassLabel, Classifier, ClassifyParams, MatchPair,
    MatchThresholds,
};
use trajcurate::conditioning::{
    compose_cfg, interpolant, rope_frequencies, shift_coords, target_velocity, GuidanceWeights,
    Modality, RopeConfig, TokenCoord,
};
use trajcurate::geometry::{net_displacement, path_length};
use trajcurate::library::{
    library_templates, motion_types, sample_trajectory, SampleRanges, TemplateParams,
};
use trajcurate::metrics::{
    complexity_ratio, filter_trajectory, jump_ratio, pair_errors, Decision, ErrorMode,
    FilterThresholds, PairParams,
};
use trajcurate::pipeline::{
    gen_corpus, plant_jitter, plant_jump, read_jsonl, run_all, CorpusManifest, CorpusSpec,
    DefectPlan, PipelineConfig, PipelineReport, FILTERED_FILE, LABELS_FILE, PAIRS_FILE,
    REPORT_FILE, VERDICTS_FILE,
};
use trajcurate::Trajectory;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    check(
        elapsed < Duration::from_secs(limit_s),
        format!("took {elapsed:.2?}, limit {limit_s} s"),
    )
}

fn c1_umeyama() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let n = rng.random_range(20..60);
        let src: Vec<_> = (0..n).map(|_| random_point(&mut rng, 1.0)).collect();
        let truth = SimilarityTransform {
            scale: rng.random_range(0.1..10.0),
            rotation: random_rotation(&mut rng),
            translation: random_point(&mut rng, 10.0),
        };
        let dst: Vec<_> = src
            .iter()
            .map(|p| truth.scale * (truth.rotation * p) + truth.translation)
            .collect();
        let est = estimate_similarity(&src, &dst).map_err(|e| format!("trial {trial}: {e}"))?;
        let err = (est.scale - truth.scale)
            .abs()
            .max((est.rotation - truth.rotation).amax())
            .max((est.translation - truth.translation).amax());
        worst = worst.max(err);
        check(err <= 1e-9, format!("trial {trial}: error {err:e}"))?;
    }
    within(t0.elapsed(), 5)?;
    Ok(format!(
        "1000 transforms, worst component error {worst:.1e}, {:.2?}",
        t0.elapsed()
    ))
}

fn c2_ransac() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut good = 0;
    for trial in 0..1000u64 {
        let n = 50;
        let src: Vec<_> = (0..n).map(|_| random_point(&mut rng, 1.0)).collect();
        let truth = SimilarityTransform {
            scale: rng.random_range(0.1..10.0),
            rotation: random_rotation(&mut rng),
            translation: random_point(&mut rng, 10.0),
        };
        let mut dst: Vec<_> = src.iter().map(|p| truth.apply(p)).collect();
        let extent = trajcurate::alignment::rms_extent(&dst);
        let mut truth_mask = vec![true; n];
        for i in rand::seq::index::sample(&mut rng, n, n / 5) {
            let dir = random_point(&mut rng, 1.0).normalize();
            dst[i] += dir * extent * rng.random_range(0.5..2.0);
            truth_mask[i] = false;
        }
        let params = RansacParams {
            seed: trial,
            ..RansacParams::default()
        };
        let Ok((est, mask)) = estimate_similarity_ransac(&src, &dst, &params) else {
            continue;
        };
        let err = (est.scale - truth.scale)
            .abs()
            .max((est.rotation - truth.rotation).amax())
            .max((est.translation - truth.translation).amax());
        if err <= 1e-6 && mask == truth_mask {
            good += 1;
        }
    }
    check(good >= 999, format!("{good}/1000 trials recovered"))?;
    within(t0.elapsed(), 30)?;
    Ok(format!(
        "{good}/1000 exact recoveries at 20% outliers, {:.2?}",
        t0.elapsed()
    ))
}

fn c3_metric_invariants() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = PairParams::default();
    let (mut worst_self, mut worst_sim, mut worst_rot) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..10_000 {
        let t = random_trajectory(&mut rng, "t");
        let r_jump = jump_ratio(&t).map_err(|e| e.to_string())?;
        check(r_jump >= 1.0, format!("#{k}: r_jump {r_jump}"))?;
        let (len, net) = (path_length(&t).unwrap(), net_displacement(&t).unwrap());
        check(len >= net, format!("#{k}: L {len} < net {net}"))?;
        let e =
            pair_errors(&t, &t, ErrorMode::Translational, &p).map_err(|e| format!("#{k}: {e}"))?;
        worst_self = worst_self.max(e.trans_err).max(e.rot_err);
        let s = SimilarityTransform {
            scale: 2f64.powf(rng.random_range(-3.0..3.0)),
            rotation: random_rotation(&mut rng),
            translation: random_point(&mut rng, 20.0),
        };
        let moved = s.apply_to_trajectory(&t);
        let te = pair_errors(&moved, &t, ErrorMode::Translational, &p)
            .map_err(|e| format!("#{k}: {e}"))?
            .trans_err;
        worst_sim = worst_sim.max(te);
        let other = random_trajectory(&mut rng, "u");
        let g = random_rotation(&mut rng);
        let base = pair_errors(&t, &other, ErrorMode::RotationOnly, &p)
            .unwrap()
            .rot_err;
        let offset = pair_errors(
            &t.map_rotations(|r| g * r),
            &other,
            ErrorMode::RotationOnly,
            &p,
        )
        .unwrap()
        .rot_err;
        worst_rot = worst_rot.max((base - offset).abs());
    }
    check(worst_self <= 1e-12, format!("self error {worst_self:e}"))?;
    check(
        worst_sim <= 1e-6,
        format!("similarity trans_err {worst_sim:e}"),
    )?;
    check(
        worst_rot <= 1e-12,
        format!("rotation-only offset change {worst_rot:e}"),
    )?;
    Ok(format!(
        "10000 trajectories: self {worst_self:.1e}, similar copy {worst_sim:.1e}, offset {worst_rot:.1e}, {:.2?}",
        t0.elapsed()
    ))
}

fn c4_filter() -> Outcome {
    let th = FilterThresholds::default();
    check(
        th.tau_jump == 5.0 && th.tau_complex == 3.0,
        "default thresholds are not 5 and 3.0",
    )?;
    let types = motion_types();
    let ranges = SampleRanges::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut jumps, mut jitters, mut clean) = (0, 0, 0);
    for mt in &types {
        for k in 0..40 {
            let t = sample_trajectory(mt, &ranges, rng.random()).unwrap();
            let d = filter_trajectory(&t, &th).unwrap().decision;
            check(d.is_kept(), format!("clean {} #{k} got {d:?}", mt.name))?;
            clean += 1;
            if mt.is_rotation_only() || k >= 5 {
                continue;
            }
            let j = plant_jump(&t, &mut rng).unwrap();
            let r = jump_ratio(&j).unwrap();
            check(r >= 6.0, format!("planted jump ratio {r}"))?;
            let d = filter_trajectory(&j, &th).unwrap().decision;
            check(
                d == Decision::RejectJump,
                format!("jump in {} got {d:?}", mt.name),
            )?;
            jumps += 1;
            let z = plant_jitter(&t, &mut rng).unwrap();
            let r = complexity_ratio(&z, th.epsilon).unwrap();
            check(r >= 4.0, format!("planted jitter ratio {r}"))?;
            let d = filter_trajectory(&z, &th).unwrap().decision;
            check(
                d == Decision::RejectComplex,
                format!("jitter in {} got {d:?}", mt.name),
            )?;
            jitters += 1;
        }
    }
    Ok(format!(
        "{jumps} jumps and {jitters} jitters rejected, {clean} clean samples kept"
    ))
}

fn c5_classification() -> Outcome {
    let t0 = Instant::now();
    let templates = library_templates(&TemplateParams::default()).unwrap();
    let classifier = Classifier::new(&templates, ClassifyParams::default()).unwrap();
    for t in &templates {
        let l = classifier
            .classify(&t.trajectory)
            .map_err(|e| e.to_string())?;
        check(
            l.class_id == t.class_id && l.score < 1e-9,
            format!("template {} -> {} ({:e})", t.name, l.class_name, l.score),
        )?;
    }
    let types = motion_types();
    let ranges = SampleRanges::default();
    let hits = |samples: &[(usize, Trajectory)]| -> usize {
        samples
            .par_iter()
            .filter(|(c, s)| classifier.classify(s).ok().map(|l| l.class_id) == Some(*c))
            .count()
    };
    let clean: Vec<(usize, Trajectory)> = (0..2000u64)
        .map(|i| {
            let mt = &types[(i % 50) as usize];
            (
                mt.class_id,
                sample_trajectory(mt, &ranges, 50_000 + i).unwrap(),
            )
        })
        .collect();
    let correct = hits(&clean);
    check(
        correct == 2000,
        format!("noiseless accuracy {correct}/2000"),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noisy: Vec<(usize, Trajectory)> = (0..2000u64)
        .map(|i| {
            let mt = &types[(i % 50) as usize];
            let s = sample_trajectory(mt, &ranges, 60_000 + i).unwrap();
            (mt.class_id, gaussian_center_noise(&s, 0.01, &mut rng))
        })
        .collect();
    let noisy = hits(&noisy);
    check(noisy >= 1900, format!("1% noise accuracy {noisy}/2000"))?;
    within(t0.elapsed(), 60)?;
    Ok(format!(
        "50/50 templates, noiseless {correct}/2000, 1% noise {noisy}/2000, {:.2?}",
        t0.elapsed()
    ))
}

fn same_class_pairs(cls: usize, n: u64, seed: u64) -> Vec<Trajectory> {
    let mt = &motion_types()[cls];
    let ranges = SampleRanges {
        noise: 0.002,
        ..Default::default()
    };
    (0..n)
        .map(|k| sample_trajectory(mt, &ranges, seed + k).unwrap())
        .collect()
}

fn c6_matching(pipeline_dir: &Path, corpus: &CorpusManifest) -> Outcome {
    let truth: std::collections::HashMap<&str, Option<usize>> = corpus
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e.class_id))
        .collect();
    let pairs: Vec<MatchPair> =
        read_jsonl(pipeline_dir.join(PAIRS_FILE)).map_err(|e| e.to_string())?;
    check(!pairs.is_empty(), "no pairs accepted")?;
    for p in &pairs {
        let (a, b) = (truth[p.id_a.as_str()], truth[p.id_b.as_str()]);
        check(
            a == Some(p.class_id) && b == Some(p.class_id),
            format!("cross-class pair {p:?}"),
        )?;
    }

    let params = ClassifyParams::default();
    let loose = MatchThresholds {
        max_trans_err: 1e9,
        max_rot_err: 1e9,
        n_candidates: 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut evaluated = Vec::new();
    for cls in [6usize, 13, 20, 24, 40, 46] {
        let members = same_class_pairs(cls, 6, 70_000 + 100 * cls as u64);
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (a, b) = (&members[i], &members[j]);
                let ab = match_pair(a, b, cls, &loose, &params).map_err(|e| e.to_string())?;
                let ba = match_pair(b, a, cls, &loose, &params).map_err(|e| e.to_string())?;
                check(ab == ba, format!("asymmetric pair {ab:?} vs {ba:?}"))?;
                let again = match_pair(a, b, cls, &loose, &params).unwrap();
                check(ab == again, "repeated evaluation differs")?;
                evaluated.push(symmetric_errors(a, b, &params).unwrap());
            }
        }
    }
    for _ in 0..2000 {
        let lo = MatchThresholds {
            max_trans_err: rng.random_range(1e-4..0.2),
            max_rot_err: rng.random_range(1e-4..0.2),
            n_candidates: 1,
        };
        let hi = MatchThresholds {
            max_trans_err: lo.max_trans_err + rng.random_range(0.0..0.1),
            max_rot_err: lo.max_rot_err + rng.random_range(0.0..0.1),
            n_candidates: 1,
        };
        for e in &evaluated {
            check(
                !lo.accepts(e) || hi.accepts(e),
                format!("raising thresholds dropped {e:?}"),
            )?;
        }
    }
    Ok(format!(
        "{} accepted pairs all within class; {} pairs symmetric and repeatable; monotone over 2000 threshold pairs",
        pairs.len(),
        evaluated.len()
    ))
}

fn c7_cfg() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let n = rng.random_range(1..32);
        let v = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-100.0..100.0)).collect()
        };
        let (u, t, f) = (v(&mut rng), v(&mut rng), v(&mut rng));
        let out = compose_cfg(&u, &t, &f, GuidanceWeights { w_t: 1.0, w_m: 1.0 }).unwrap();
        check(out == f, "unit weights did not return eps_full")?;
    }
    let dim = 5;
    for _ in 0..1000 {
        let w = GuidanceWeights {
            w_t: rng.random_range(-10.0..10.0),
            w_m: rng.random_range(-10.0..10.0),
        };
        let expect = [1.0 - w.w_t, w.w_t - w.w_m, w.w_m];
        for k in 0..dim {
            let zero = vec![0.0; dim];
            let mut e = zero.clone();
            e[k] = 1.0;
            let outs = [
                compose_cfg(&e, &zero, &zero, w).unwrap(),
                compose_cfg(&zero, &e, &zero, w).unwrap(),
                compose_cfg(&zero, &zero, &e, w).unwrap(),
            ];
            for (out, coef) in outs.iter().zip(expect) {
                for (j, &x) in out.iter().enumerate() {
                    let want = if j == k { coef } else { 0.0 };
                    check(
                        (x - want).abs() <= 1e-15 * (1.0 + want.abs()),
                        format!("coefficient {x} vs {want}"),
                    )?;
                }
            }
        }
    }
    Ok(
        "10000 unit-weight compositions exact; coefficients (1-w_T, w_T-w_M, w_M) on basis vectors"
            .into(),
    )
}

fn c8_rope() -> Outcome {
    let mut tuples = 0usize;
    for fr in 1..=8u64 {
        for h in 1..=8u64 {
            for w in 1..=8u64 {
                let cfg = RopeConfig::new(fr, h, w, 12);
                let mut seen = std::collections::HashSet::new();
                for f in 0..fr {
                    for y in 0..h {
                        for x in 0..w {
                            let c = TokenCoord::new(f, y, x);
                            let s = [Modality::Noise, Modality::Content, Modality::Motion]
                                .map(|m| shift_coords(c, m, &cfg).unwrap());
                            check(
                                s[0] != s[1] && s[0] != s[2] && s[1] != s[2],
                                format!("collision at {c:?}"),
                            )?;
                            for t in s {
                                check(seen.insert(t), format!("tuple {t:?} produced twice"))?;
                            }
                            tuples += 3;
                        }
                    }
                }
            }
        }
    }
    for dim in [4usize, 64, 128] {
        let cfg = RopeConfig::new(1, 1, 1, dim);
        let f = rope_frequencies(&cfg).unwrap();
        check(f.len() == dim / 2, "frequency count")?;
        for (i, v) in f.iter().enumerate() {
            let want = (-(2.0 * i as f64 / dim as f64) * 10000f64.ln()).exp();
            check(
                (v - want).abs() <= 1e-12,
                format!("D={dim} i={i}: {v} vs {want}"),
            )?;
        }
    }
    Ok(format!("{tuples} shifted tuples distinct over all F,H,W <= 8; frequencies match for D in {{4, 64, 128}}"))
}

fn c9_flow() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..16);
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        check(interpolant(&x0, &x1, 0.0).unwrap() == x0, "t=0 endpoint")?;
        check(interpolant(&x0, &x1, 1.0).unwrap() == x1, "t=1 endpoint")?;
        let u = target_velocity(&x0, &x1).unwrap();
        let h = 1e-3;
        for k in 0..1000 {
            let t = k as f64 * (1.0 - h) / 999.0;
            let a = interpolant(&x0, &x1, t).unwrap();
            let b = interpolant(&x0, &x1, t + h).unwrap();
            for i in 0..n {
                worst = worst.max(((b[i] - a[i]) / h - u[i]).abs());
            }
        }
    }
    check(worst <= 1e-9, format!("finite difference error {worst:e}"))?;
    Ok(format!(
        "endpoints exact; finite-difference error {worst:.1e} over a 1000-point t grid"
    ))
}

fn strip_wall_time(path: &Path) -> Result<serde_json::Value, String> {
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    v.as_object_mut()
        .ok_or("report is not an object")?
        .remove("wall_time");
    Ok(v)
}

fn c10_pipeline(corpus: &CorpusManifest, runs: &[(usize, &Path, Duration)]) -> Outcome {
    for (jobs, _, elapsed) in runs {
        within(*elapsed, 60).map_err(|e| format!("jobs={jobs}: {e}"))?;
    }
    let (_, first, _) = runs[0];
    let report = PipelineReport::load(first.join(REPORT_FILE)).map_err(|e| e.to_string())?;
    let rejected: usize = [
        Decision::RejectJump,
        Decision::RejectComplex,
        Decision::RejectStatic,
    ]
    .iter()
    .map(|d| report.filter_counts[d])
    .sum();
    let kept =
        report.filter_counts[&Decision::Keep] + report.filter_counts[&Decision::RotationOnlyKeep];
    check(report.corpus_size == corpus.entries.len(), "corpus size")?;
    check(
        rejected == 200 && kept == 2000,
        format!("{rejected} rejected, {kept} kept"),
    )?;
    check(
        report.class_histogram.iter().all(|c| c.count == 40),
        "class histogram is not 40 per class",
    )?;
    let labels: Vec<ClassLabel> = read_jsonl(first.join(LABELS_FILE)).map_err(|e| e.to_string())?;
    let truth: std::collections::HashMap<&str, Option<usize>> = corpus
        .entries
        .iter()
        .map(|e| (e.id.as_str(), e.class_id))
        .collect();
    check(
        labels
            .iter()
            .all(|l| truth[l.trajectory_id.as_str()] == Some(l.class_id)),
        "mislabeled clip",
    )?;
    for (jobs, dir, _) in &runs[1..] {
        for f in [VERDICTS_FILE, FILTERED_FILE, LABELS_FILE, PAIRS_FILE] {
            let a = std::fs::read(first.join(f)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dir.join(f)).map_err(|e| e.to_string())?;
            check(a == b, format!("{f} differs for jobs={jobs}"))?;
        }
        check(
            strip_wall_time(&first.join(REPORT_FILE))? == strip_wall_time(&dir.join(REPORT_FILE))?,
            format!("report differs for jobs={jobs}"),
        )?;
    }
    let times: Vec<String> = runs
        .iter()
        .map(|(j, _, e)| format!("jobs={j} {e:.1?}"))
        .collect();
    Ok(format!(
        "{} clips: {rejected} rejected, {kept} kept, 40 per class, {} pairs; identical outputs; {}",
        corpus.entries.len(),
        report.pairs_accepted,
        times.join(", ")
    ))
}

fn report(results: &mut Vec<(String, bool)>, name: &str, outcome: Outcome) {
    let (pass, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let line = format!(
        "[{}] {name}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    results.push((name.to_string(), pass));
}

#[test]
fn acceptance_criteria() {
    let mut results = Vec::new();
    report(&mut results, "1 umeyama recovery", c1_umeyama());
    report(&mut results, "2 ransac robustness", c2_ransac());
    report(&mut results, "3 metric invariants", c3_metric_invariants());
    report(&mut results, "4 filter thresholds", c4_filter());
    report(
        &mut results,
        "5 template self-consistency",
        c5_classification(),
    );

    let dir = tempfile::tempdir().unwrap();
    let spec = CorpusSpec {
        per_class: 40,
        defects: DefectPlan {
            jump: 70,
            jitter: 70,
            static_: 60,
            rotation_only: 0,
        },
        ..Default::default()
    };
    gen_corpus(
        &spec,
        &TemplateParams::default(),
        2024,
        &dir.path().join("corpus"),
    )
    .unwrap();
    let corpus = CorpusManifest::load(dir.path().join("corpus/manifest.json")).unwrap();
    let mut runs = Vec::new();
    for jobs in [1usize, 8] {
        let out = dir.path().join(format!("run_jobs{jobs}"));
        let cfg = PipelineConfig {
            jobs: Some(jobs),
            seed: 11,
            ..Default::default()
        };
        let t0 = Instant::now();
        run_all(&corpus, &cfg, &out).unwrap();
        runs.push((jobs, out, t0.elapsed()));
    }
    let runs_ref: Vec<(usize, &Path, Duration)> =
        runs.iter().map(|(j, p, e)| (*j, p.as_path(), *e)).collect();

    report(&mut results, "6 matching", c6_matching(&runs[0].1, &corpus));
    report(&mut results, "7 cfg algebra", c7_cfg());
    report(&mut results, "8 rope disjointness", c8_rope());
    report(&mut results, "9 flow-matching kernel", c9_flow());
    report(
        &mut results,
        "10 pipeline determinism and scaling",
        c10_pipeline(&corpus, &runs_ref),
    );

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, p)| !p)
        .map(|(n, _)| n.as_str())
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
