//! Pose files: one pose per line, `frame tx ty tz qx qy qz qw`, quaternion
//! scalar-last. `#` starts a comment line; blank lines are skipped.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, Pose, Quaternion, Trajectory};

/// Reads a pose file. The trajectory id is the file stem.
pub fn load_trajectory(path: impl AsRef<Path>) -> Result<Trajectory> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_trajectory(&id, &text).map_err(|e| Error::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

pub fn parse_trajectory(id: &str, text: &str) -> Result<Trajectory> {
    let mut poses = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let frame = parse_frame(fields[0], line)?;
        let mut v = [0.0f64; 7];
        for (slot, field) in v.iter_mut().zip(&fields[1..]) {
            *slot = field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("not a number: {field:?}"),
            })?;
            if !slot.is_finite() {
                return Err(Error::NonFinite { line });
            }
        }
        if !seen.insert(frame) {
            return Err(Error::DuplicateFrame { line, frame });
        }
        let q = Quaternion::new(v[3], v[4], v[5], v[6]).map_err(|e| match e {
            Error::DegenerateQuaternion { .. } => Error::DegenerateQuaternion { line },
            _ => Error::NonFinite { line },
        })?;
        poses.push(Pose {
            frame_index: frame,
            rotation: q.to_rotation_matrix(),
            center: Point::new(v[0], v[1], v[2]),
        });
    }
    if poses.len() < 2 {
        return Err(Error::TooShort(poses.len()));
    }
    poses.sort_by_key(|p| p.frame_index);
    Trajectory::new(id, poses)
}

// Frame indices are integers, but tools commonly write them as "12.000000".
fn parse_frame(field: &str, line: usize) -> Result<u64> {
    if let Ok(f) = field.parse::<u64>() {
        return Ok(f);
    }
    match field.parse::<f64>() {
        Ok(f) if !f.is_finite() => Err(Error::NonFinite { line }),
        Ok(f) if f >= 0.0 && f.fract() == 0.0 && f <= u64::MAX as f64 => Ok(f as u64),
        _ => Err(Error::Parse {
            line,
            msg: format!("invalid frame index {field:?}"),
        }),
    }
}

pub fn write_trajectory_string(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.len() * 96);
    for pose in traj.poses() {
        let q = pose.quaternion();
        let c = &pose.center;
        let _ = write!(out, "{}", pose.frame_index);
        for v in [c.x, c.y, c.z, q.x(), q.y(), q.z(), q.w()] {
            out.push(' ');
            out.push_str(&format_g9(v));
        }
        out.push('\n');
    }
    out
}

pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_trajectory_string(traj)).map_err(|e| Error::io(path, e))
}

/// C's `printf("%.9g", v)`.
pub fn format_g9(v: f64) -> String {
    const P: i32 = 9;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    // The exponent is taken after rounding to P significant digits.
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..P).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (P - 1 - exp) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
