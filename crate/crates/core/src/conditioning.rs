//! Conditioning arithmetic: the flow-matching interpolant and its velocity,
//! dual-condition classifier-free guidance, and 3D RoPE coordinate shifting.
//!
//! During training each of the text and motion conditions is dropped with
//! probability [`DROP_TEXT_PROB`] / [`DROP_MOTION_PROB`], and both together with
//! [`DROP_BOTH_PROB`]; those constants are recorded here only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DROP_TEXT_PROB: f64 = 0.05;
pub const DROP_MOTION_PROB: f64 = 0.05;
pub const DROP_BOTH_PROB: f64 = 0.05;

fn check_dims(expected: &[f64], others: &[&[f64]]) -> Result<()> {
    for o in others {
        if o.len() != expected.len() {
            return Err(Error::DimMismatch {
                expected: expected.len(),
                got: o.len(),
            });
        }
    }
    for v in std::iter::once(expected).chain(others.iter().copied()) {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParam(
                "state vector has non-finite entries".into(),
            ));
        }
    }
    Ok(())
}

/// `x_t = (1 - t)·x0 + t·x1`.
pub fn interpolant(x0: &[f64], x1: &[f64], t: f64) -> Result<Vec<f64>> {
    check_dims(x0, &[x1])?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange {
            name: "t",
            value: t,
        });
    }
    Ok(x0
        .iter()
        .zip(x1)
        .map(|(a, b)| (1.0 - t) * a + t * b)
        .collect())
}

/// `u = x1 - x0`, the same at every `t`.
pub fn target_velocity(x0: &[f64], x1: &[f64]) -> Result<Vec<f64>> {
    check_dims(x0, &[x1])?;
    Ok(x0.iter().zip(x1).map(|(a, b)| b - a).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceWeights {
    pub w_t: f64,
    pub w_m: f64,
}

/// `ε(∅,∅) + w_T·(ε(c_T,∅) − ε(∅,∅)) + w_M·(ε(c_T,c_M) − ε(c_T,∅))`,
/// evaluated as `(1 − w_T)·uncond + (w_T − w_M)·text + w_M·full`.
pub fn compose_cfg(
    eps_uncond: &[f64],
    eps_text: &[f64],
    eps_full: &[f64],
    w: GuidanceWeights,
) -> Result<Vec<f64>> {
    check_dims(eps_uncond, &[eps_text, eps_full])?;
    if !w.w_t.is_finite() || !w.w_m.is_finite() {
        return Err(Error::InvalidParam(
            "guidance weights must be finite".into(),
        ));
    }
    Ok(eps_uncond
        .iter()
        .zip(eps_text)
        .zip(eps_full)
        .map(|((u, t), f)| (1.0 - w.w_t) * u + (w.w_t - w.w_m) * t + w.w_m * f)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenCoord {
    pub f: u64,
    pub h: u64,
    pub w: u64,
}

impl TokenCoord {
    pub const fn new(f: u64, h: u64, w: u64) -> Self {
        TokenCoord { f, h, w }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    /// The noisy latent being denoised.
    Noise,
    /// The reference-content latent.
    Content,
    /// The reference-motion latent.
    Motion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RopeConfig {
    pub frames: u64,
    pub height: u64,
    pub width: u64,
    /// Channel dimension, even.
    pub dim: usize,
    pub theta: f64,
    /// Channels given to the (f, h, w) axes; each even, summing to `dim`.
    /// Defaults to `dim / 6` frequency pairs for each of h and w, the rest to f.
    #[serde(default)]
    pub axis_channels: Option<[usize; 3]>,
}

impl RopeConfig {
    pub fn new(frames: u64, height: u64, width: u64, dim: usize) -> Self {
        RopeConfig {
            frames,
            height,
            width,
            dim,
            theta: 10000.0,
            axis_channels: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 || self.height == 0 || self.width == 0 {
            return Err(Error::InvalidParam(
                "latent extents must be positive".into(),
            ));
        }
        if self.dim == 0 || !self.dim.is_multiple_of(2) {
            return Err(Error::InvalidParam(format!(
                "dim must be even and positive, got {}",
                self.dim
            )));
        }
        if !(self.theta > 1.0) || !self.theta.is_finite() {
            return Err(Error::InvalidParam(format!(
                "theta must exceed 1, got {}",
                self.theta
            )));
        }
        if let Some(ch) = self.axis_channels {
            if ch.iter().any(|c| c % 2 != 0) || ch.iter().sum::<usize>() != self.dim {
                return Err(Error::InvalidParam(format!(
                    "axis_channels {ch:?} must be even and sum to {}",
                    self.dim
                )));
            }
        }
        Ok(())
    }

    /// Channels per axis in (f, h, w) order.
    pub fn split(&self) -> [usize; 3] {
        self.axis_channels.unwrap_or_else(|| {
            let pairs = self.dim / 2;
            let hw = pairs / 3;
            [2 * (pairs - 2 * hw), 2 * hw, 2 * hw]
        })
    }
}

/// Moves a token into its modality's block: content is offset by `F` frames,
/// motion by `(F, H, W)`.
pub fn shift_coords(c: TokenCoord, m: Modality, cfg: &RopeConfig) -> Result<TokenCoord> {
    cfg.validate()?;
    for (name, v, n) in [
        ("f", c.f, cfg.frames),
        ("h", c.h, cfg.height),
        ("w", c.w, cfg.width),
    ] {
        if v >= n {
            return Err(Error::OutOfRange {
                name,
                value: v as f64,
            });
        }
    }
    Ok(match m {
        Modality::Noise => c,
        Modality::Content => TokenCoord::new(c.f + cfg.frames, c.h, c.w),
        Modality::Motion => TokenCoord::new(c.f + cfg.frames, c.h + cfg.height, c.w + cfg.width),
    })
}

/// `theta^(-2i/dim)` for `i = 0..dim/2`.
pub fn frequencies(theta: f64, dim: usize) -> Vec<f64> {
    (0..dim / 2)
        .map(|i| theta.powf(-2.0 * i as f64 / dim as f64))
        .collect()
}

pub fn rope_frequencies(cfg: &RopeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok(frequencies(cfg.theta, cfg.dim))
}

/// Rotation angles for a shifted coordinate: `dim / 2` entries, the f block
/// first, then h, then w. Each block uses the frequencies of its own channel
/// width.
pub fn rope_phase(c: TokenCoord, cfg: &RopeConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.dim / 2);
    for (pos, channels) in [c.f, c.h, c.w].into_iter().zip(cfg.split()) {
        out.extend(
            frequencies(cfg.theta, channels)
                .into_iter()
                .map(|fr| pos as f64 * fr),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolant_examples() {
        let (x0, x1) = ([0.0, 0.0], [2.0, 4.0]);
        assert_eq!(interpolant(&x0, &x1, 0.5).unwrap(), vec![1.0, 2.0]);
        assert_eq!(interpolant(&x0, &x1, 0.0).unwrap(), x0.to_vec());
        assert_eq!(interpolant(&x0, &x1, 1.0).unwrap(), x1.to_vec());
        assert_eq!(target_velocity(&x0, &x1).unwrap(), vec![2.0, 4.0]);
        assert_eq!(target_velocity(&x1, &x1).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            interpolant(&x0, &[1.0], 0.5),
            Err(Error::DimMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            interpolant(&x0, &x1, 1.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(interpolant(&x0, &[f64::NAN, 0.0], 0.5).is_err());
    }

    #[test]
    fn cfg_examples() {
        let w = GuidanceWeights { w_t: 2.0, w_m: 3.0 };
        assert_eq!(compose_cfg(&[0.0], &[1.0], &[2.0], w).unwrap(), vec![5.0]);
        let (u, t, f) = ([0.3, -1.7], [2.5, 0.1], [9.0, -4.25]);
        assert_eq!(
            compose_cfg(&u, &t, &f, GuidanceWeights { w_t: 1.0, w_m: 1.0 }).unwrap(),
            f.to_vec()
        );
        assert_eq!(
            compose_cfg(&u, &t, &f, GuidanceWeights { w_t: 1.0, w_m: 0.0 }).unwrap(),
            t.to_vec()
        );
        assert_eq!(
            compose_cfg(&u, &t, &f, GuidanceWeights { w_t: 0.0, w_m: 0.0 }).unwrap(),
            u.to_vec()
        );
    }

    #[test]
    fn shift_examples() {
        let cfg = RopeConfig::new(10, 4, 8, 12);
        let c = TokenCoord::new(3, 2, 5);
        assert_eq!(
            shift_coords(c, Modality::Content, &cfg).unwrap(),
            TokenCoord::new(13, 2, 5)
        );
        assert_eq!(
            shift_coords(c, Modality::Motion, &cfg).unwrap(),
            TokenCoord::new(13, 6, 13)
        );
        assert_eq!(shift_coords(c, Modality::Noise, &cfg).unwrap(), c);
        assert!(shift_coords(TokenCoord::new(10, 0, 0), Modality::Noise, &cfg).is_err());
        assert!(shift_coords(TokenCoord::new(0, 4, 0), Modality::Motion, &cfg).is_err());
    }

    #[test]
    fn frequency_examples() {
        let mut cfg = RopeConfig::new(1, 1, 1, 4);
        assert_eq!(rope_frequencies(&cfg).unwrap(), vec![1.0, 0.01]);
        cfg.dim = 128;
        let f = rope_frequencies(&cfg).unwrap();
        assert_eq!(f.len(), 64);
        assert_eq!(f[0], 1.0);
        assert!(f.windows(2).all(|w| w[1] < w[0]));
        cfg.dim = 5;
        assert!(rope_frequencies(&cfg).is_err());
    }

    #[test]
    fn split_assigns_remainder_to_frames() {
        assert_eq!(RopeConfig::new(1, 1, 1, 128).split(), [44, 42, 42]);
        assert_eq!(RopeConfig::new(1, 1, 1, 12).split(), [4, 4, 4]);
        assert_eq!(RopeConfig::new(1, 1, 1, 2).split(), [2, 0, 0]);
        let mut cfg = RopeConfig::new(1, 1, 1, 12);
        cfg.axis_channels = Some([6, 4, 2]);
        assert_eq!(cfg.split(), [6, 4, 2]);
        cfg.axis_channels = Some([6, 4, 4]);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn phase_layout() {
        let cfg = RopeConfig::new(4, 4, 4, 12);
        assert!(rope_phase(TokenCoord::new(0, 0, 0), &cfg)
            .unwrap()
            .iter()
            .all(|&p| p == 0.0));
        let p = rope_phase(TokenCoord::new(2, 3, 5), &cfg).unwrap();
        let f4 = frequencies(10000.0, 4);
        assert_eq!(
            p,
            vec![
                2.0 * f4[0],
                2.0 * f4[1],
                3.0 * f4[0],
                3.0 * f4[1],
                5.0 * f4[0],
                5.0 * f4[1]
            ]
        );
    }
}
