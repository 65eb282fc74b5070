//! The four streaming attitude aligners.
//!
//! TRIAD, OBA and newTRIAD work on the latitude-known chain and estimate
//! `C_{b0}^{n0}`. SALAD works on the normalized chain and estimates
//! `C_{b0}^{i0}` together with the latitude.

mod solvers;
mod streaming;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attmath::Mat3;

pub use solvers::*;
pub use streaming::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Triad,
    Oba,
    NewTriad,
    Salad,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Triad, Method::Oba, Method::NewTriad, Method::Salad];

    pub fn name(self) -> &'static str {
        match self {
            Method::Triad => "triad",
            Method::Oba => "oba",
            Method::NewTriad => "newtriad",
            Method::Salad => "salad",
        }
    }

    pub fn needs_latitude(self) -> bool {
        self != Method::Salad
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method `{s}` (expected triad, oba, newtriad or salad)"))
    }
}

/// Convergence phase of the latitude estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatitudeStage {
    /// The trace-identity argument exceeds one; latitude is held at zero.
    Growing,
    /// Valid argument, estimate still moving.
    Accelerating,
    /// Update-to-update change has settled.
    Stable,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub eigen_gap: Option<f64>,
    pub sqrt_arg: Option<f64>,
    pub det_sign: Option<f64>,
    pub anchor_fallback: bool,
    pub stage: Option<LatitudeStage>,
    pub not_ready: Option<NotReady>,
}

/// One aligner output at one epoch.
///
/// When `ready` is false the attitude fields hold the last ready solution,
/// propagated to the current time, or `None` if there has not been one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentEstimate {
    pub method: Method,
    /// Seconds since alignment start.
    pub t: f64,
    /// `C_{b0}^{n0}`, or `C_{b0}^{i0}` for SALAD.
    pub c_b0: Option<Mat3>,
    /// Real-time `C_b^n(t)`.
    pub c_bn: Option<Mat3>,
    /// Estimated latitude, rad (SALAD only).
    pub latitude: Option<f64>,
    pub ready: bool,
    pub diagnostics: Diagnostics,
}
