//! Camera-trajectory curation toolkit.
//!
//! The crate covers the whole real-data curation path for camera trajectories:
//! smoothness filtering ([`metrics`]), classification against a library of 50
//! canonical motion templates ([`library`], [`classify`]), and intra-class
//! pairwise matching, with similarity alignment ([`alignment`]) underneath.
//! [`conditioning`] holds the small math kernel used when those trajectories
//! condition a video generator: the flow-matching interpolant, dual-condition
//! guidance composition and modality-shifted rotary positions.
//! [`pipeline`] drives everything over on-disk corpora.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod classify;
pub mod conditioning;
pub mod error;
pub mod geometry;
pub mod library;
pub mod metrics;
pub mod pipeline;

pub use error::{Error, Result};
pub use geometry::{Point, Pose, Quaternion, Rotation, Trajectory};
