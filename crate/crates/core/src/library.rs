//! The 50-type camera-motion library (20 basic, 30 composite) and generators
//! for canonical templates and randomized samples.
//!
//! Directions are expressed in the first camera frame (optical axis `+z`,
//! `+x` right, `+y` down); the first pose of every template is the identity
//! at the origin.
//!
//! | word             | primitive | axis / direction          |
//! |------------------|-----------|---------------------------|
//! | Pan Right        | rotation  | `+y`, forward turns to `+x` |
//! | Pan Left         | rotation  | `-y`                      |
//! | Tilt Up          | rotation  | `+x`, forward turns to `-y` |
//! | Tilt Down        | rotation  | `-x`                      |
//! | Roll Clockwise   | rotation  | `+z`, right turns to down |
//! | Truck Right/Left | translate | `+x` / `-x`               |
//! | Dolly In/Out     | translate | `+z` / `-z`               |
//! | Boom Up/Down     | translate | `-y` / `+y`               |
//!
//! Simultaneous rotations compose as `roll · tilt · pan`; translations add.
//! Arcs and orbits move on a circle about a look-at point on the initial
//! optical axis, turning to keep it centered. Arcs are horizontal; orbits
//! tilt the plane of motion up or down, and the pan/tilt in an orbit's name
//! is that look-at compensation.

use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{path_length, Point, Rotation, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Basic,
    Composite,
}

/// Building blocks; each carries a direction sign in [`MotionType::primitives`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    /// `+1` = right.
    Pan,
    /// `+1` = up.
    Tilt,
    /// `+1` = clockwise.
    Roll,
    /// `+1` = right.
    Truck,
    /// `+1` = in.
    Dolly,
    /// `+1` = up.
    Boom,
    /// Diagonal translation components, sized by `TemplateParams::diagonal`.
    DiagonalTruck,
    DiagonalDolly,
    DiagonalBoom,
    /// Horizontal arc about the look-at point, `+1` = right.
    Arc,
    /// Lateral and vertical parts of an orbit's initial direction.
    OrbitLateral,
    OrbitVertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionType {
    pub class_id: usize,
    pub name: String,
    pub kind: Kind,
    pub primitives: Vec<(Primitive, f64)>,
}

impl MotionType {
    fn sign_of(&self, p: Primitive) -> f64 {
        self.primitives
            .iter()
            .filter(|(q, _)| *q == p)
            .map(|(_, s)| s)
            .sum()
    }

    /// True when the canonical template never translates.
    pub fn is_rotation_only(&self) -> bool {
        self.primitives
            .iter()
            .all(|(p, _)| matches!(p, Primitive::Pan | Primitive::Tilt | Primitive::Roll))
    }
}

use Primitive::*;

const L: f64 = -1.0;
const R: f64 = 1.0;
const UP: f64 = 1.0;
const DOWN: f64 = -1.0;
const IN: f64 = 1.0;
const OUT: f64 = -1.0;

type Entry = (&'static str, Kind, Vec<(Primitive, f64)>);

/// (name, kind, primitives) for class ids `0..50`, in library order.
fn catalogue() -> Vec<Entry> {
    use Kind::{Basic as B, Composite as C};
    vec![
        ("Pan Left", B, vec![(Pan, L)]),
        ("Pan Right", B, vec![(Pan, R)]),
        ("Tilt Up", B, vec![(Tilt, UP)]),
        ("Tilt Down", B, vec![(Tilt, DOWN)]),
        ("Truck Left", B, vec![(Truck, L)]),
        ("Truck Right", B, vec![(Truck, R)]),
        ("Dolly In", B, vec![(Dolly, IN)]),
        ("Dolly Out", B, vec![(Dolly, OUT)]),
        ("Boom Up", B, vec![(Boom, UP)]),
        ("Boom Down", B, vec![(Boom, DOWN)]),
        ("Roll Clockwise", B, vec![(Roll, 1.0)]),
        ("Roll Counterclockwise", B, vec![(Roll, -1.0)]),
        ("Arc Left", B, vec![(Arc, L)]),
        ("Arc Right", B, vec![(Arc, R)]),
        (
            "Diagonal Forward-Left",
            B,
            vec![(DiagonalDolly, IN), (DiagonalTruck, L)],
        ),
        (
            "Diagonal Forward-Right",
            B,
            vec![(DiagonalDolly, IN), (DiagonalTruck, R)],
        ),
        (
            "Diagonal Backward-Left",
            B,
            vec![(DiagonalDolly, OUT), (DiagonalTruck, L)],
        ),
        (
            "Diagonal Backward-Right",
            B,
            vec![(DiagonalDolly, OUT), (DiagonalTruck, R)],
        ),
        (
            "Diagonal Forward-Up",
            B,
            vec![(DiagonalDolly, IN), (DiagonalBoom, UP)],
        ),
        (
            "Diagonal Forward-Down",
            B,
            vec![(DiagonalDolly, IN), (DiagonalBoom, DOWN)],
        ),
        ("Truck Left+Pan Right", C, vec![(Truck, L), (Pan, R)]),
        ("Truck Right+Pan Left", C, vec![(Truck, R), (Pan, L)]),
        ("Boom Up+Tilt Down", C, vec![(Boom, UP), (Tilt, DOWN)]),
        ("Boom Down+Tilt Up", C, vec![(Boom, DOWN), (Tilt, UP)]),
        ("Pan Left + Tilt Up", C, vec![(Pan, L), (Tilt, UP)]),
        ("Pan Right + Tilt Up", C, vec![(Pan, R), (Tilt, UP)]),
        ("Pan Left + Tilt Down", C, vec![(Pan, L), (Tilt, DOWN)]),
        ("Pan Right + Tilt Down", C, vec![(Pan, R), (Tilt, DOWN)]),
        ("Dolly In + Tilt Up", C, vec![(Dolly, IN), (Tilt, UP)]),
        ("Dolly In + Tilt Down", C, vec![(Dolly, IN), (Tilt, DOWN)]),
        ("Dolly Out+Tilt Up", C, vec![(Dolly, OUT), (Tilt, UP)]),
        ("Dolly Out+Tilt Down", C, vec![(Dolly, OUT), (Tilt, DOWN)]),
        ("Boom Up+Truck Left", C, vec![(Boom, UP), (Truck, L)]),
        ("Boom Up+Truck Right", C, vec![(Boom, UP), (Truck, R)]),
        ("Boom Up+Pan Left", C, vec![(Boom, UP), (Pan, L)]),
        ("Boom Up+Pan Right", C, vec![(Boom, UP), (Pan, R)]),
        ("Truck Right+Tilt Up", C, vec![(Truck, R), (Tilt, UP)]),
        ("Truck Left+Tilt Down", C, vec![(Truck, L), (Tilt, DOWN)]),
        ("Truck Left+Tilt Up", C, vec![(Truck, L), (Tilt, UP)]),
        ("Truck Right+Tilt Down", C, vec![(Truck, R), (Tilt, DOWN)]),
        (
            "Dolly In+Truck Left+Pan Right",
            C,
            vec![(Dolly, IN), (Truck, L), (Pan, R)],
        ),
        (
            "Dolly In+Truck Right+Pan Left",
            C,
            vec![(Dolly, IN), (Truck, R), (Pan, L)],
        ),
        (
            "Dolly Out+Truck Right+Pan Left",
            C,
            vec![(Dolly, OUT), (Truck, R), (Pan, L)],
        ),
        (
            "Dolly Out+Truck Left+Pan Right",
            C,
            vec![(Dolly, OUT), (Truck, L), (Pan, R)],
        ),
        ("Orbit Forward-Up+Tilt Down", C, vec![(OrbitVertical, UP)]),
        ("Orbit Forward-Down+Tilt Up", C, vec![(OrbitVertical, DOWN)]),
        (
            "Orbit Forward-Up-Left+Tilt Down+Pan Right",
            C,
            vec![(OrbitVertical, UP), (OrbitLateral, L)],
        ),
        (
            "Orbit Forward-Up-Right+Tilt Down+Pan Left",
            C,
            vec![(OrbitVertical, UP), (OrbitLateral, R)],
        ),
        (
            "Orbit Forward-Down-Left+Tilt Up+Pan Right",
            C,
            vec![(OrbitVertical, DOWN), (OrbitLateral, L)],
        ),
        (
            "Orbit Forward-Down-Right+Tilt Up+Pan Left",
            C,
            vec![(OrbitVertical, DOWN), (OrbitLateral, R)],
        ),
    ]
}

pub const NUM_CLASSES: usize = 50;
pub const NUM_BASIC: usize = 20;

/// All 50 motion types, class ids `0..50`, basic types first.
pub fn motion_types() -> Vec<MotionType> {
    catalogue()
        .into_iter()
        .enumerate()
        .map(|(class_id, (name, kind, primitives))| MotionType {
            class_id,
            name: name.to_string(),
            kind,
            primitives,
        })
        .collect()
}

pub fn motion_type(class_id: usize) -> Option<MotionType> {
    motion_types().into_iter().nth(class_id)
}

pub fn motion_type_by_name(name: &str) -> Option<MotionType> {
    motion_types().into_iter().find(|m| m.name == name)
}

/// Magnitudes for one generated trajectory. Angles in degrees, distances in
/// world units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemplateParams {
    pub n_frames: usize,
    pub pan_deg: f64,
    pub tilt_deg: f64,
    pub roll_deg: f64,
    pub dolly_dist: f64,
    pub truck_dist: f64,
    pub boom_dist: f64,
    pub arc_deg: f64,
    pub arc_radius: f64,
    pub orbit_deg: f64,
    pub orbit_radius: f64,
    pub diagonal: f64,
}

impl Default for TemplateParams {
    fn default() -> Self {
        TemplateParams {
            n_frames: 81,
            pan_deg: 30.0,
            tilt_deg: 20.0,
            roll_deg: 45.0,
            dolly_dist: 1.0,
            truck_dist: 1.0,
            boom_dist: 1.0,
            arc_deg: 45.0,
            arc_radius: 2.0,
            orbit_deg: 45.0,
            orbit_radius: 2.0,
            diagonal: 1.0,
        }
    }
}

impl TemplateParams {
    fn magnitudes(&self) -> [(&'static str, f64); 11] {
        [
            ("pan_deg", self.pan_deg),
            ("tilt_deg", self.tilt_deg),
            ("roll_deg", self.roll_deg),
            ("dolly_dist", self.dolly_dist),
            ("truck_dist", self.truck_dist),
            ("boom_dist", self.boom_dist),
            ("arc_deg", self.arc_deg),
            ("arc_radius", self.arc_radius),
            ("orbit_deg", self.orbit_deg),
            ("orbit_radius", self.orbit_radius),
            ("diagonal", self.diagonal),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_frames < 2 {
            return Err(Error::InvalidParam(format!(
                "n_frames must be >= 2, got {}",
                self.n_frames
            )));
        }
        for (name, v) in self.magnitudes() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

fn axis_rotation(axis: Unit<Vector3<f64>>, angle: f64) -> Rotation {
    *Rotation3::from_axis_angle(&axis, angle).matrix()
}

/// Per-frame pose generator for one motion type at fixed magnitudes.
struct Motion {
    pan: f64,
    tilt: f64,
    roll: f64,
    translation: Vector3<f64>,
    /// (initial tangent direction, radius, sweep angle)
    orbit: Option<(Vector3<f64>, f64, f64)>,
}

impl Motion {
    fn new(mt: &MotionType, p: &TemplateParams) -> Self {
        let s = |q| mt.sign_of(q);
        let right = Vector3::x();
        let forward = Vector3::z();
        let up = -Vector3::y();
        let translation = right * (s(Truck) * p.truck_dist + s(DiagonalTruck) * p.diagonal)
            + forward * (s(Dolly) * p.dolly_dist + s(DiagonalDolly) * p.diagonal)
            + up * (s(Boom) * p.boom_dist + s(DiagonalBoom) * p.diagonal);
        let orbit = if s(Arc) != 0.0 {
            Some((right * s(Arc), p.arc_radius, p.arc_deg.to_radians()))
        } else if s(OrbitLateral) != 0.0 || s(OrbitVertical) != 0.0 {
            let dir = (right * s(OrbitLateral) + up * s(OrbitVertical)).normalize();
            Some((dir, p.orbit_radius, p.orbit_deg.to_radians()))
        } else {
            None
        };
        Motion {
            pan: s(Pan) * p.pan_deg.to_radians(),
            tilt: s(Tilt) * p.tilt_deg.to_radians(),
            roll: s(Roll) * p.roll_deg.to_radians(),
            translation,
            orbit,
        }
    }

    /// Pose at progress `u` in `[0, 1]`.
    fn at(&self, u: f64) -> (Rotation, Point) {
        // Pan about +y turns the view right; tilt about +x turns it up;
        // roll about +z turns the image clockwise.
        let mut rot = axis_rotation(Vector3::z_axis(), u * self.roll)
            * axis_rotation(Vector3::x_axis(), u * self.tilt)
            * axis_rotation(Vector3::y_axis(), u * self.pan);
        let mut center = self.translation * u;
        if let Some((dir, radius, sweep)) = self.orbit {
            let theta = u * sweep;
            let z = Vector3::z();
            center += radius * ((1.0 - theta.cos()) * z + theta.sin() * dir);
            // Keeps the look-at point (0, 0, radius) on the optical axis.
            let axis = Unit::new_normalize(dir.cross(&z));
            rot = axis_rotation(axis, theta) * rot;
        }
        (rot, center)
    }
}

/// Constant-speed trajectory of `p.n_frames` poses, frames `0..n`.
pub fn build_template(mt: &MotionType, p: &TemplateParams) -> Result<Trajectory> {
    p.validate()?;
    let motion = Motion::new(mt, p);
    let n = p.n_frames;
    let (rots, centers): (Vec<Rotation>, Vec<Point>) =
        (0..n).map(|j| motion.at(j as f64 / (n - 1) as f64)).unzip();
    Trajectory::from_parts(format!("template_{:02}", mt.class_id), &rots, &centers)
}

#[derive(Debug, Clone, Serialize)]
pub struct MotionTemplate {
    pub class_id: usize,
    pub name: String,
    pub kind: Kind,
    pub primitives: Vec<(Primitive, f64)>,
    /// Text description of the motion; the type name.
    pub description: String,
    #[serde(skip)]
    pub trajectory: Trajectory,
    /// True when the template never translates.
    #[serde(skip)]
    pub rotation_only: bool,
}

pub fn library_templates(p: &TemplateParams) -> Result<Vec<MotionTemplate>> {
    motion_types()
        .into_iter()
        .map(|mt| {
            let trajectory = build_template(&mt, p)?;
            Ok(MotionTemplate {
                class_id: mt.class_id,
                description: mt.name.clone(),
                rotation_only: mt.is_rotation_only(),
                name: mt.name,
                kind: mt.kind,
                primitives: mt.primitives,
                trajectory,
            })
        })
        .collect()
}

/// Closed interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Range { lo: v, hi: v }
    }

    fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

/// Sampling law for synthetic trajectories of one motion type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleRanges {
    pub n_frames: (usize, usize),
    pub pan_deg: Range,
    pub tilt_deg: Range,
    pub roll_deg: Range,
    pub dolly_dist: Range,
    pub truck_dist: Range,
    pub boom_dist: Range,
    pub arc_deg: Range,
    pub arc_radius: Range,
    pub orbit_deg: Range,
    pub orbit_radius: Range,
    pub diagonal: Range,
    /// Amplitude of the smooth center perturbation, as a fraction of the
    /// sample's path length.
    pub noise: f64,
}

impl Default for SampleRanges {
    fn default() -> Self {
        SampleRanges {
            n_frames: (49, 121),
            pan_deg: Range::new(24.0, 38.0),
            tilt_deg: Range::new(15.0, 26.0),
            roll_deg: Range::new(35.0, 55.0),
            dolly_dist: Range::new(0.9, 1.1),
            truck_dist: Range::new(0.9, 1.1),
            boom_dist: Range::new(0.9, 1.1),
            arc_deg: Range::new(38.0, 55.0),
            arc_radius: Range::new(1.5, 3.0),
            orbit_deg: Range::new(38.0, 55.0),
            orbit_radius: Range::new(1.5, 3.0),
            diagonal: Range::new(0.8, 1.25),
            noise: 0.0,
        }
    }
}

impl SampleRanges {
    /// Every range collapsed onto the given template magnitudes, no noise.
    pub fn fixed(p: &TemplateParams) -> Self {
        SampleRanges {
            n_frames: (p.n_frames, p.n_frames),
            pan_deg: Range::point(p.pan_deg),
            tilt_deg: Range::point(p.tilt_deg),
            roll_deg: Range::point(p.roll_deg),
            dolly_dist: Range::point(p.dolly_dist),
            truck_dist: Range::point(p.truck_dist),
            boom_dist: Range::point(p.boom_dist),
            arc_deg: Range::point(p.arc_deg),
            arc_radius: Range::point(p.arc_radius),
            orbit_deg: Range::point(p.orbit_deg),
            orbit_radius: Range::point(p.orbit_radius),
            diagonal: Range::point(p.diagonal),
            noise: 0.0,
        }
    }

    fn ranges(&self) -> [(&'static str, Range); 11] {
        [
            ("pan_deg", self.pan_deg),
            ("tilt_deg", self.tilt_deg),
            ("roll_deg", self.roll_deg),
            ("dolly_dist", self.dolly_dist),
            ("truck_dist", self.truck_dist),
            ("boom_dist", self.boom_dist),
            ("arc_deg", self.arc_deg),
            ("arc_radius", self.arc_radius),
            ("orbit_deg", self.orbit_deg),
            ("orbit_radius", self.orbit_radius),
            ("diagonal", self.diagonal),
        ]
    }

    /// Ranges must be well-formed, positive and contain the canonical values.
    pub fn validate(&self, canonical: &TemplateParams) -> Result<()> {
        let (lo, hi) = self.n_frames;
        if lo < 2 || lo > hi || !(lo..=hi).contains(&canonical.n_frames) {
            return Err(Error::InvalidParam(format!("n_frames range ({lo}, {hi})")));
        }
        for ((name, r), (_, c)) in self.ranges().into_iter().zip(canonical.magnitudes()) {
            if !(r.lo > 0.0) || !(r.lo <= r.hi) || !r.hi.is_finite() || !r.contains(c) {
                return Err(Error::InvalidParam(format!(
                    "{name} range [{}, {}] must contain {c}",
                    r.lo, r.hi
                )));
            }
        }
        if !(self.noise >= 0.0) || !self.noise.is_finite() {
            return Err(Error::InvalidParam(format!("noise {}", self.noise)));
        }
        Ok(())
    }
}

/// One randomized trajectory of type `mt`. Magnitudes and frame count are
/// drawn uniformly from `ranges`; with `noise > 0` each center axis gets a
/// low-frequency sinusoid of amplitude `noise · L`. A pure function of its
/// arguments.
pub fn sample_trajectory(mt: &MotionType, ranges: &SampleRanges, seed: u64) -> Result<Trajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = ranges.n_frames;
    let n_frames = if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    };
    let params = TemplateParams {
        n_frames,
        pan_deg: ranges.pan_deg.draw(&mut rng),
        tilt_deg: ranges.tilt_deg.draw(&mut rng),
        roll_deg: ranges.roll_deg.draw(&mut rng),
        dolly_dist: ranges.dolly_dist.draw(&mut rng),
        truck_dist: ranges.truck_dist.draw(&mut rng),
        boom_dist: ranges.boom_dist.draw(&mut rng),
        arc_deg: ranges.arc_deg.draw(&mut rng),
        arc_radius: ranges.arc_radius.draw(&mut rng),
        orbit_deg: ranges.orbit_deg.draw(&mut rng),
        orbit_radius: ranges.orbit_radius.draw(&mut rng),
        diagonal: ranges.diagonal.draw(&mut rng),
    };
    let mut traj = build_template(mt, &params)?;
    traj.set_id(format!("sample_{:02}_{seed}", mt.class_id));
    if ranges.noise > 0.0 {
        let amp = ranges.noise * path_length(&traj)?;
        let waves: Vec<(f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.random_range(0.5..2.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let n = traj.len();
        let mut k = 0usize;
        traj = traj.map_centers(|c| {
            let u = k as f64 / (n - 1) as f64;
            k += 1;
            let offset = Vector3::from_fn(|axis, _| {
                let (freq, phase) = waves[axis];
                amp * (std::f64::consts::TAU * freq * u + phase).sin()
            });
            c + offset
        });
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geodesic_angle, net_displacement, Quaternion};
    use crate::metrics::motion_magnitudes;

    fn template(name: &str) -> Trajectory {
        build_template(
            &motion_type_by_name(name).unwrap(),
            &TemplateParams::default(),
        )
        .unwrap()
    }

    fn last(t: &Trajectory) -> (Rotation, Point) {
        let p = t.poses().last().unwrap();
        (p.rotation, p.center)
    }

    #[test]
    fn library_shape() {
        let types = motion_types();
        assert_eq!(types.len(), NUM_CLASSES);
        assert_eq!(types.iter().filter(|t| t.kind == Kind::Basic).count(), 20);
        assert_eq!(
            types.iter().filter(|t| t.kind == Kind::Composite).count(),
            30
        );
        assert!(types[..NUM_BASIC].iter().all(|t| t.kind == Kind::Basic));
        for (i, t) in types.iter().enumerate() {
            assert_eq!(t.class_id, i);
        }
        let mut names: Vec<&str> = types.iter().map(|t| t.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 50);
        assert_eq!(types[28].name, "Dolly In + Tilt Up");
        assert_eq!(types[49].name, "Orbit Forward-Down-Right+Tilt Up+Pan Left");
    }

    #[test]
    fn composites_have_two_or_three_named_parts() {
        for t in motion_types().iter().filter(|t| t.kind == Kind::Composite) {
            let parts = t.name.split('+').count();
            assert!((2..=3).contains(&parts), "{}", t.name);
            if !t.name.starts_with("Orbit") {
                assert_eq!(t.primitives.len(), parts, "{}", t.name);
            }
        }
    }

    #[test]
    fn pan_left_quaternion_oracle() {
        let t = template("Pan Left");
        assert!(t.centers().iter().all(|c| *c == Point::zeros()));
        let (rot, _) = last(&t);
        // Rotation of -30 degrees about +y, built directly as a quaternion.
        let half = -15f64.to_radians();
        let q = Quaternion::new(0.0, half.sin(), 0.0, half.cos()).unwrap();
        assert!((rot - q.to_rotation_matrix()).amax() < 1e-12);
        // The view turned toward camera-left.
        assert!((rot * Vector3::z()).x < 0.0);
        let (trans, total_rot) = motion_magnitudes(&t).unwrap();
        assert_eq!(trans, 0.0);
        assert!((total_rot - 30f64.to_radians()).abs() < 1e-9);
    }

    #[test]
    fn sign_table_directions() {
        let fwd = |name: &str| last(&template(name)).0 * Vector3::z();
        assert!(fwd("Pan Right").x > 0.0);
        assert!(fwd("Tilt Up").y < 0.0);
        assert!(fwd("Tilt Down").y > 0.0);
        let right_axis = last(&template("Roll Clockwise")).0 * Vector3::x();
        assert!(
            right_axis.y > 0.0,
            "clockwise roll turns the right axis downward"
        );
        assert!((last(&template("Dolly In")).1 - Point::new(0., 0., 1.)).amax() < 1e-15);
        assert!((last(&template("Dolly Out")).1 - Point::new(0., 0., -1.)).amax() < 1e-15);
        assert!((last(&template("Truck Left")).1 - Point::new(-1., 0., 0.)).amax() < 1e-15);
        assert!((last(&template("Boom Up")).1 - Point::new(0., -1., 0.)).amax() < 1e-15);
        assert!(
            (last(&template("Diagonal Backward-Right")).1 - Point::new(1., 0., -1.)).amax() < 1e-15
        );
        assert!(
            (last(&template("Diagonal Forward-Down")).1 - Point::new(0., 1., 1.)).amax() < 1e-15
        );
        assert!(template("Dolly In")
            .rotations()
            .iter()
            .all(|r| *r == Rotation::identity()));
    }

    #[test]
    fn truck_left_pan_right_is_composition_of_basics() {
        let p = TemplateParams::default();
        let truck = template("Truck Left");
        let pan = template("Pan Right");
        let both =
            build_template(&motion_type_by_name("Truck Left+Pan Right").unwrap(), &p).unwrap();
        let (rot, center) = last(&both);
        assert!((center - Point::new(-1.0, 0.0, 0.0)).amax() < 1e-15);
        assert!((geodesic_angle(&rot, &Rotation::identity()) - 30f64.to_radians()).abs() < 1e-12);
        assert!((rot * Vector3::z()).x > 0.0);
        for ((a, b), c) in truck.poses().iter().zip(pan.poses()).zip(both.poses()) {
            assert!((c.center - (a.center + b.center)).amax() < 1e-12);
            assert!((c.rotation - b.rotation * a.rotation).amax() < 1e-12);
        }
    }

    #[test]
    fn orbit_names_match_compensation() {
        for t in motion_types()
            .iter()
            .filter(|t| t.name.starts_with("Orbit"))
        {
            let traj = build_template(t, &TemplateParams::default()).unwrap();
            let (rot, center) = last(&traj);
            let f = rot * Vector3::z();
            // Look-at point stays on the optical axis.
            let target = Point::new(0.0, 0.0, 2.0);
            assert!(
                ((target - center).normalize() - f).amax() < 1e-12,
                "{}",
                t.name
            );
            assert!(center.z > 0.0, "orbits move forward: {}", t.name);
            assert_eq!(t.name.contains("Tilt Down"), f.y > 1e-9, "{}", t.name);
            assert_eq!(t.name.contains("Tilt Up"), f.y < -1e-9, "{}", t.name);
            assert_eq!(t.name.contains("Pan Right"), f.x > 1e-9, "{}", t.name);
            assert_eq!(t.name.contains("Pan Left"), f.x < -1e-9, "{}", t.name);
        }
    }

    #[test]
    fn closed_form_lengths() {
        let p = TemplateParams::default();
        for t in motion_types() {
            let traj = build_template(&t, &p).unwrap();
            let (len, rot) = motion_magnitudes(&traj).unwrap();
            let name = t.name.as_str();
            if name.starts_with("Arc") {
                // Chords of a circle: compare against the discretized arc.
                let n = (p.n_frames - 1) as f64;
                let chord = 2.0 * p.arc_radius * (p.arc_deg.to_radians() / (2.0 * n)).sin();
                assert!((len - n * chord).abs() < 1e-9, "{name}");
                assert!(
                    (len - p.arc_radius * p.arc_deg.to_radians()).abs() < 1e-3,
                    "{name}"
                );
                assert!((rot - p.arc_deg.to_radians()).abs() < 1e-9, "{name}");
            } else if t.is_rotation_only() {
                assert_eq!(len, 0.0, "{name}");
            }
            match name {
                "Pan Left" | "Pan Right" => assert!((rot - p.pan_deg.to_radians()).abs() < 1e-9),
                "Tilt Up" | "Tilt Down" => assert!((rot - p.tilt_deg.to_radians()).abs() < 1e-9),
                "Roll Clockwise" | "Roll Counterclockwise" => {
                    assert!((rot - p.roll_deg.to_radians()).abs() < 1e-9)
                }
                "Dolly In" | "Truck Left" | "Boom Down" => {
                    assert!((len - 1.0).abs() < 1e-12);
                    assert!((net_displacement(&traj).unwrap() - 1.0).abs() < 1e-12);
                }
                n if n.starts_with("Diagonal") => assert!((len - 2f64.sqrt()).abs() < 1e-12),
                _ => {}
            }
        }
    }

    #[test]
    fn basic_rotations_share_one_axis() {
        for name in ["Pan Left", "Tilt Down", "Roll Clockwise"] {
            let t = template(name);
            let axes: Vec<Vector3<f64>> = t.poses()[1..]
                .iter()
                .map(|p| {
                    Rotation3::from_matrix_unchecked(p.rotation)
                        .axis()
                        .unwrap()
                        .into_inner()
                })
                .collect();
            for a in &axes {
                assert!((a - axes[0]).amax() < 1e-9, "{name}");
            }
            assert!(t.centers().iter().all(|c| *c == Point::zeros()));
        }
    }

    #[test]
    fn templates_start_at_identity_and_are_deterministic() {
        let a = library_templates(&TemplateParams::default()).unwrap();
        let b = library_templates(&TemplateParams::default()).unwrap();
        assert_eq!(a.len(), 50);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.trajectory, y.trajectory);
            let first = &x.trajectory.poses()[0];
            assert_eq!(first.rotation, Rotation::identity());
            assert_eq!(first.center, Point::zeros());
            assert_eq!(x.trajectory.len(), 81);
        }
        let rotation_only: Vec<&str> = a
            .iter()
            .filter(|t| t.rotation_only)
            .map(|t| t.name.as_str())
            .collect();
        assert_eq!(rotation_only.len(), 10);
    }

    #[test]
    fn collapsed_ranges_reproduce_template() {
        let p = TemplateParams::default();
        for mt in motion_types() {
            let s = sample_trajectory(&mt, &SampleRanges::fixed(&p), 99).unwrap();
            let t = build_template(&mt, &p).unwrap();
            assert_eq!(s.poses(), t.poses());
        }
    }

    #[test]
    fn sampling_is_deterministic_and_varied() {
        let mt = motion_type_by_name("Arc Left").unwrap();
        let ranges = SampleRanges {
            noise: 0.01,
            ..Default::default()
        };
        let a = sample_trajectory(&mt, &ranges, 5).unwrap();
        let b = sample_trajectory(&mt, &ranges, 5).unwrap();
        let c = sample_trajectory(&mt, &ranges, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.poses(), c.poses());
    }

    #[test]
    fn parameter_validation() {
        assert!(TemplateParams {
            n_frames: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TemplateParams {
            pan_deg: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        let p = TemplateParams::default();
        assert!(SampleRanges::default().validate(&p).is_ok());
        let bad = SampleRanges {
            pan_deg: Range::new(40.0, 60.0),
            ..Default::default()
        };
        assert!(bad.validate(&p).is_err());
        assert!(SampleRanges {
            noise: -1.0,
            ..Default::default()
        }
        .validate(&p)
        .is_err());
    }
}
