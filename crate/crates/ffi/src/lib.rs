//! C ABI for `trajcurate`.
//!
//! Objects are opaque handles created by `tc_*_new` / `tc_*_load` functions
//! and released with the matching `tc_*_free`. Every fallible call returns a
//! [`TcStatus`]; on failure, [`tc_last_error`] describes the most recent error
//! on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use trajcurate::classify::{symmetric_errors, Classifier, ClassifyParams, MatchThresholds};
use trajcurate::conditioning::{compose_cfg, GuidanceWeights};
use trajcurate::geometry::{load_trajectory, parse_trajectory, write_trajectory};
use trajcurate::library::{library_templates, TemplateParams};
use trajcurate::metrics::{
    filter_trajectory, pair_errors, Decision, ErrorMode, FilterThresholds, PairParams,
};
use trajcurate::{alignment, Error, Point, Pose, Quaternion, Trajectory};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Degenerate = 5,
    RotationOnlyInput = 6,
    MixedMotionKinds = 7,
    OutOfRange = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcDecision {
    Keep = 0,
    RejectJump = 1,
    RejectComplex = 2,
    RejectStatic = 3,
    RotationOnlyKeep = 4,
}

impl From<Decision> for TcDecision {
    fn from(d: Decision) -> Self {
        match d {
            Decision::Keep => TcDecision::Keep,
            Decision::RejectJump => TcDecision::RejectJump,
            Decision::RejectComplex => TcDecision::RejectComplex,
            Decision::RejectStatic => TcDecision::RejectStatic,
            Decision::RotationOnlyKeep => TcDecision::RotationOnlyKeep,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TcFilterThresholds {
    pub tau_jump: f64,
    pub tau_complex: f64,
    pub epsilon: f64,
    pub tau_static_trans: f64,
    pub tau_static_rot: f64,
}

impl From<TcFilterThresholds> for FilterThresholds {
    fn from(t: TcFilterThresholds) -> Self {
        FilterThresholds {
            tau_jump: t.tau_jump,
            tau_complex: t.tau_complex,
            epsilon: t.epsilon,
            tau_static_trans: t.tau_static_trans,
            tau_static_rot: t.tau_static_rot,
        }
    }
}

/// Ratios are NaN when the filter did not compute them (rotation-only or
/// static clips).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TcFilterVerdict {
    pub decision: TcDecision,
    pub r_jump: f64,
    pub r_complex: f64,
    pub total_trans: f64,
    pub total_rot: f64,
}

/// Opaque trajectory.
pub struct TcTrajectory(Trajectory);

/// Opaque template library with a prepared classifier.
pub struct TcLibrary {
    classifier: Classifier,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TcStatus {
    match e {
        Error::Parse { .. }
        | Error::DuplicateFrame { .. }
        | Error::NonFinite { .. }
        | Error::DegenerateQuaternion { .. }
        | Error::Json { .. } => TcStatus::Parse,
        Error::Io { .. } => TcStatus::Io,
        Error::InFile { source, .. } => status_of(source),
        Error::Degenerate(_) | Error::RobustFitFailed { .. } | Error::UndefinedRatio => {
            TcStatus::Degenerate
        }
        Error::RotationOnlyInput => TcStatus::RotationOnlyInput,
        Error::MixedMotionKinds => TcStatus::MixedMotionKinds,
        Error::OutOfRange { .. } => TcStatus::OutOfRange,
        _ => TcStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status and last-error message.
fn guard(f: impl FnOnce() -> Result<(), (TcStatus, String)>) -> TcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TcStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (TcStatus, String)>;
}

impl<T> IntoFfi<T> for trajcurate::Result<T> {
    fn ffi(self) -> Result<T, (TcStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (TcStatus, String) {
    (TcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (TcStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (TcStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a, T>(
    p: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (TcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TcStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (TcStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn tc_filter_thresholds_default() -> TcFilterThresholds {
    let d = FilterThresholds::default();
    TcFilterThresholds {
        tau_jump: d.tau_jump,
        tau_complex: d.tau_complex,
        epsilon: d.epsilon,
        tau_static_trans: d.tau_static_trans,
        tau_static_rot: d.tau_static_rot,
    }
}

/// Loads a pose file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_load(
    path: *const c_char,
    out: *mut *mut TcTrajectory,
) -> TcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = load_trajectory(str_arg(path, "path")?).ffi()?;
        *out = Box::into_raw(Box::new(TcTrajectory(t)));
        Ok(())
    })
}

/// Parses pose-file text.
///
/// # Safety
/// `id` and `text` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_parse(
    id: *const c_char,
    text: *const c_char,
    out: *mut *mut TcTrajectory,
) -> TcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = parse_trajectory(str_arg(id, "id")?, str_arg(text, "text")?).ffi()?;
        *out = Box::into_raw(Box::new(TcTrajectory(t)));
        Ok(())
    })
}

/// Builds a trajectory from `n` frame indices, `3n` center coordinates and
/// `4n` quaternion components (x, y, z, w per pose).
///
/// # Safety
/// The arrays must hold the stated number of elements; `id` must be a
/// NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_from_arrays(
    id: *const c_char,
    n: usize,
    frames: *const u64,
    centers: *const f64,
    quats: *const f64,
    out: *mut *mut TcTrajectory,
) -> TcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let id = str_arg(id, "id")?;
        let frames = slice_arg(frames, n, "frames")?;
        let centers = slice_arg(centers, 3 * n, "centers")?;
        let quats = slice_arg(quats, 4 * n, "quats")?;
        let mut poses = Vec::with_capacity(n);
        for i in 0..n {
            let q = &quats[4 * i..4 * i + 4];
            let q = Quaternion::new(q[0], q[1], q[2], q[3]).ffi()?;
            let c = &centers[3 * i..3 * i + 3];
            poses.push(
                Pose::new(
                    frames[i],
                    q.to_rotation_matrix(),
                    Point::new(c[0], c[1], c[2]),
                )
                .ffi()?,
            );
        }
        let t = Trajectory::new(id, poses).ffi()?;
        *out = Box::into_raw(Box::new(TcTrajectory(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_free(t: *mut TcTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of poses; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_len(t: *const TcTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Copies pose `i`: frame index, center (3 values) and quaternion (x, y, z, w).
///
/// # Safety
/// `t` must be a live handle; `frame`, `center` and `quat` must be writable
/// for 1, 3 and 4 elements.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_pose(
    t: *const TcTrajectory,
    i: usize,
    frame: *mut u64,
    center: *mut f64,
    quat: *mut f64,
) -> TcStatus {
    guard(|| {
        let t = &ref_arg(t, "trajectory")?.0;
        let pose = t
            .poses()
            .get(i)
            .ok_or((TcStatus::OutOfRange, format!("pose {i} of {}", t.len())))?;
        if center.is_null() || quat.is_null() {
            return Err(null("output array"));
        }
        *out_arg(frame, "frame")? = pose.frame_index;
        std::slice::from_raw_parts_mut(center, 3).copy_from_slice(pose.center.as_slice());
        std::slice::from_raw_parts_mut(quat, 4).copy_from_slice(&pose.quaternion().to_array());
        Ok(())
    })
}

/// # Safety
/// `t` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn tc_trajectory_write(
    t: *const TcTrajectory,
    path: *const c_char,
) -> TcStatus {
    guard(|| write_trajectory(&ref_arg(t, "trajectory")?.0, str_arg(path, "path")?).ffi())
}

/// Smoothness filter verdict.
///
/// # Safety
/// `t` must be a live handle; `th` readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn tc_filter(
    t: *const TcTrajectory,
    th: *const TcFilterThresholds,
    out: *mut TcFilterVerdict,
) -> TcStatus {
    guard(|| {
        let t = &ref_arg(t, "trajectory")?.0;
        let th: FilterThresholds = (*ref_arg(th, "thresholds")?).into();
        th.validate().ffi()?;
        let v = filter_trajectory(t, &th).ffi()?;
        *out_arg(out, "out")? = TcFilterVerdict {
            decision: v.decision.into(),
            r_jump: v.r_jump.unwrap_or(f64::NAN),
            r_complex: v.r_complex.unwrap_or(f64::NAN),
            total_trans: v.total_trans,
            total_rot: v.total_rot,
        };
        Ok(())
    })
}

/// TransErr and RotErr of `est` against `reference` with default pair
/// settings. With `rotation_only` nonzero, translation is ignored and
/// `trans_err` is 0.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tc_pair_errors(
    est: *const TcTrajectory,
    reference: *const TcTrajectory,
    rotation_only: bool,
    trans_err: *mut f64,
    rot_err: *mut f64,
) -> TcStatus {
    guard(|| {
        let mode = if rotation_only {
            ErrorMode::RotationOnly
        } else {
            ErrorMode::Translational
        };
        let e = pair_errors(
            &ref_arg(est, "est")?.0,
            &ref_arg(reference, "reference")?.0,
            mode,
            &PairParams::default(),
        )
        .ffi()?;
        *out_arg(trans_err, "trans_err")? = e.trans_err;
        *out_arg(rot_err, "rot_err")? = e.rot_err;
        Ok(())
    })
}

/// Least-squares similarity taking `src` onto `dst` (`n` points each, xyz
/// interleaved). Writes the scale, a row-major 3×3 rotation and the
/// translation.
///
/// # Safety
/// `src` and `dst` must hold `3n` values; `rotation` 9 and `translation` 3
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn tc_estimate_similarity(
    src: *const f64,
    dst: *const f64,
    n: usize,
    scale: *mut f64,
    rotation: *mut f64,
    translation: *mut f64,
) -> TcStatus {
    guard(|| {
        let to_points = |s: &[f64]| {
            s.chunks_exact(3)
                .map(|c| Point::new(c[0], c[1], c[2]))
                .collect::<Vec<_>>()
        };
        let src = to_points(slice_arg(src, 3 * n, "src")?);
        let dst = to_points(slice_arg(dst, 3 * n, "dst")?);
        let t = alignment::estimate_similarity(&src, &dst).ffi()?;
        if rotation.is_null() || translation.is_null() {
            return Err(null("output array"));
        }
        *out_arg(scale, "scale")? = t.scale;
        let rot = std::slice::from_raw_parts_mut(rotation, 9);
        for r in 0..3 {
            for c in 0..3 {
                rot[3 * r + c] = t.rotation[(r, c)];
            }
        }
        std::slice::from_raw_parts_mut(translation, 3).copy_from_slice(t.translation.as_slice());
        Ok(())
    })
}

/// The 50 canonical templates at default magnitudes, ready to classify with
/// the given rotation weight.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tc_library_new(rot_weight: f64, out: *mut *mut TcLibrary) -> TcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let templates = library_templates(&TemplateParams::default()).ffi()?;
        let params = ClassifyParams {
            rot_weight,
            ..ClassifyParams::default()
        };
        let classifier = Classifier::new(&templates, params).ffi()?;
        let names = templates
            .iter()
            .map(|t| CString::new(t.name.as_str()).unwrap_or_default())
            .collect();
        *out = Box::into_raw(Box::new(TcLibrary { classifier, names }));
        Ok(())
    })
}

/// # Safety
/// `lib` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_library_free(lib: *mut TcLibrary) {
    if !lib.is_null() {
        drop(Box::from_raw(lib));
    }
}

/// Number of classes; 0 for a null handle.
///
/// # Safety
/// `lib` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_library_len(lib: *const TcLibrary) -> usize {
    lib.as_ref().map_or(0, |l| l.names.len())
}

/// Class name owned by the library, or null when out of range.
///
/// # Safety
/// `lib` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tc_library_class_name(
    lib: *const TcLibrary,
    class_id: usize,
) -> *const c_char {
    lib.as_ref()
        .and_then(|l| l.names.get(class_id))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Nearest template class of `t`.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tc_classify(
    lib: *const TcLibrary,
    t: *const TcTrajectory,
    class_id: *mut usize,
    score: *mut f64,
) -> TcStatus {
    guard(|| {
        let label = ref_arg(lib, "library")?
            .classifier
            .classify(&ref_arg(t, "trajectory")?.0)
            .ffi()?;
        *out_arg(class_id, "class_id")? = label.class_id;
        *out_arg(score, "score")? = label.score;
        Ok(())
    })
}

/// Symmetric match test. `accepted` is set to whether both errors are within
/// the thresholds; the errors are written either way.
///
/// # Safety
/// Handles must be live; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn tc_match_pair(
    a: *const TcTrajectory,
    b: *const TcTrajectory,
    max_trans_err: f64,
    max_rot_err: f64,
    accepted: *mut bool,
    trans_err: *mut f64,
    rot_err: *mut f64,
) -> TcStatus {
    guard(|| {
        let (a, b) = (&ref_arg(a, "a")?.0, &ref_arg(b, "b")?.0);
        let th = MatchThresholds {
            max_trans_err,
            max_rot_err,
            n_candidates: 1,
        };
        th.validate().ffi()?;
        let e = symmetric_errors(a, b, &ClassifyParams::default()).ffi()?;
        *out_arg(accepted, "accepted")? = th.accepts(&e);
        *out_arg(trans_err, "trans_err")? = e.trans_err;
        *out_arg(rot_err, "rot_err")? = e.rot_err;
        Ok(())
    })
}

/// Dual-condition guidance over vectors of length `n`; writes `n` values.
///
/// # Safety
/// Each input must hold `n` values and `out` must be writable for `n`.
#[no_mangle]
pub unsafe extern "C" fn tc_compose_cfg(
    n: usize,
    eps_uncond: *const f64,
    eps_text: *const f64,
    eps_full: *const f64,
    w_t: f64,
    w_m: f64,
    out: *mut f64,
) -> TcStatus {
    guard(|| {
        let r = compose_cfg(
            slice_arg(eps_uncond, n, "eps_uncond")?,
            slice_arg(eps_text, n, "eps_text")?,
            slice_arg(eps_full, n, "eps_full")?,
            GuidanceWeights { w_t, w_m },
        )
        .ffi()?;
        if n > 0 {
            if out.is_null() {
                return Err(null("out"));
            }
            std::slice::from_raw_parts_mut(out, n).copy_from_slice(&r);
        }
        Ok(())
    })
}
