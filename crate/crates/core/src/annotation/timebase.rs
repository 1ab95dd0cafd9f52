//! Frame index <-> playback time conversion for constant-frame-rate video.
//!
//! Web players report time in seconds; annotations live on frame indices.
//! The conversion rounds half-up on `t * fps` so every client maps the same
//! timestamp to the same frame regardless of its own float formatting.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Timestamps within this many frames below a half-frame boundary round up.
/// Absorbs decimal-to-binary error such as `0.06 * 25 = 1.4999999999999998`.
pub const HALF_FRAME_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimebaseError {
    #[error("frame rate {num}/{den} is not positive")]
    InvalidFrameRate { num: u32, den: u32 },
    #[error("time {0} s is negative or not finite")]
    InvalidTime(f64),
    #[error("video has a variable frame rate; time to frame conversion is unreliable")]
    NonConstantFrameRate,
}

/// An exact rational frame rate, always stored in lowest terms.
///
/// Serialized as `[num, den]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct FrameRate {
    num: u32,
    den: u32,
}

impl FrameRate {
    pub fn new(num: u32, den: u32) -> Result<Self, TimebaseError> {
        if num == 0 || den == 0 {
            return Err(TimebaseError::InvalidFrameRate { num, den });
        }
        let g = num_integer::gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    /// Whole-number rate such as 25 fps.
    pub fn integer(fps: u32) -> Result<Self, TimebaseError> {
        Self::new(fps, 1)
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.num) / f64::from(self.den)
    }
}

impl fmt::Display for FrameRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl TryFrom<[u32; 2]> for FrameRate {
    type Error = TimebaseError;

    fn try_from([num, den]: [u32; 2]) -> Result<Self, Self::Error> {
        FrameRate::new(num, den)
    }
}

impl From<FrameRate> for [u32; 2] {
    fn from(r: FrameRate) -> Self {
        [r.num, r.den]
    }
}

/// Frame shown at playback time `t` seconds: `round_half_up(t * fps)`.
pub fn frame_from_time(t: f64, fps: FrameRate) -> Result<u64, TimebaseError> {
    if !t.is_finite() || t < 0.0 {
        return Err(TimebaseError::InvalidTime(t));
    }
    let exact = t * f64::from(fps.num) / f64::from(fps.den);
    Ok((exact + 0.5 + HALF_FRAME_SLACK).floor() as u64)
}

/// Presentation time of `frame` in seconds: `frame / fps`.
pub fn time_from_frame(frame: u64, fps: FrameRate) -> f64 {
    frame as f64 * f64::from(fps.den) / f64::from(fps.num)
}
