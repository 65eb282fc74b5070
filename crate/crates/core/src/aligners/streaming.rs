use super::solvers::*;
use super::{AlignmentEstimate, Diagnostics, LatitudeStage, Method};
use crate::attmath::{Mat3, Vec3};
use crate::earth::EarthModel;
use crate::propagation::{Epoch, VelocityVectors};

/// Latitude change per update below which the estimate counts as settled.
pub const STABLE_LATITUDE_STEP: f64 = 0.005 * std::f64::consts::PI / 180.0;

/// A streaming estimator fed one epoch at a time.
pub trait Aligner: Send {
    fn method(&self) -> Method;
    fn update(&mut self, epoch: &Epoch) -> AlignmentEstimate;
}

pub fn build_aligner(method: Method, earth: EarthModel) -> Box<dyn Aligner> {
    match method {
        Method::Triad => Box::new(TriadAligner::new()),
        Method::Oba => Box::new(ObaAligner::new()),
        Method::NewTriad => Box::new(NewTriadAligner::new()),
        Method::Salad => Box::new(SaladAligner::new(earth)),
    }
}

fn known_estimate(
    method: Method,
    epoch: &Epoch,
    held: &mut Option<Mat3>,
    solved: Result<Mat3, NotReady>,
    mut diagnostics: Diagnostics,
) -> AlignmentEstimate {
    let ready = match solved {
        Ok(c) => {
            *held = Some(c);
            true
        }
        Err(e) => {
            diagnostics.not_ready = Some(e);
            false
        }
    };
    let c_bn = match (held.as_ref(), epoch.c_n_n0.as_ref()) {
        (Some(c), Some(n)) => Some(realtime_attitude_known(c, n, &epoch.c_b_b0)),
        _ => None,
    };
    AlignmentEstimate { method, t: epoch.t, c_b0: *held, c_bn, latitude: None, ready, diagnostics }
}

fn no_chain(method: Method, epoch: &Epoch, held: &mut Option<Mat3>) -> AlignmentEstimate {
    let diagnostics = Diagnostics::default();
    known_estimate(method, epoch, held, Err(NotReady::NoData), diagnostics)
}

/// Two-epoch TRIAD pairing the current epoch with the one nearest `t/2`.
#[derive(Debug, Clone, Default)]
pub struct TriadAligner {
    history: Vec<(f64, VelocityVectors)>,
    held: Option<Mat3>,
}

impl TriadAligner {
    pub fn new() -> Self {
        Self::default()
    }

    fn nearest_half(&self, t: f64) -> Option<&VelocityVectors> {
        let target = 0.5 * t;
        let i = self.history.partition_point(|(ti, _)| *ti < target);
        let mut best: Option<&(f64, VelocityVectors)> = None;
        for j in [i.wrapping_sub(1), i] {
            if let Some(h) = self.history.get(j) {
                if best.map_or(true, |b| (h.0 - target).abs() < (b.0 - target).abs()) {
                    best = Some(h);
                }
            }
        }
        best.map(|b| &b.1)
    }
}

impl Aligner for TriadAligner {
    fn method(&self) -> Method {
        Method::Triad
    }

    fn update(&mut self, epoch: &Epoch) -> AlignmentEstimate {
        let Some(vv) = epoch.known else {
            return no_chain(Method::Triad, epoch, &mut self.held);
        };
        let solved = match self.nearest_half(epoch.t) {
            Some(v1) => triad_align(&v1.v_ref, &vv.v_ref, &v1.v_obs, &vv.v_obs),
            None => Err(NotReady::NoData),
        };
        self.history.push((epoch.t, vv));
        known_estimate(Method::Triad, epoch, &mut self.held, solved, Diagnostics::default())
    }
}

/// Wahba/OBA over every epoch so far.
#[derive(Debug, Clone, Default)]
pub struct ObaAligner {
    acc: WahbaAccumulator,
    held: Option<Mat3>,
}

impl ObaAligner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accumulator(&self) -> &WahbaAccumulator {
        &self.acc
    }
}

impl Aligner for ObaAligner {
    fn method(&self) -> Method {
        Method::Oba
    }

    fn update(&mut self, epoch: &Epoch) -> AlignmentEstimate {
        let Some(vv) = epoch.known else {
            return no_chain(Method::Oba, epoch, &mut self.held);
        };
        self.acc.add(&vv.v_ref, &vv.v_obs);
        let solved = oba_align(&self.acc);
        known_estimate(Method::Oba, epoch, &mut self.held, solved, Diagnostics::default())
    }
}

/// Dyadic-tensor newTRIAD on the latitude-known chain.
#[derive(Debug, Clone, Default)]
pub struct NewTriadAligner {
    acc: DyadicAccumulator,
    previous: Option<AnchorPair>,
    held: Option<Mat3>,
}

impl NewTriadAligner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn accumulator(&self) -> &DyadicAccumulator {
        &self.acc
    }
}

impl Aligner for NewTriadAligner {
    fn method(&self) -> Method {
        Method::NewTriad
    }

    fn update(&mut self, epoch: &Epoch) -> AlignmentEstimate {
        let Some(vv) = epoch.known else {
            return no_chain(Method::NewTriad, epoch, &mut self.held);
        };
        self.acc.add(&vv.v_ref, &vv.v_obs);
        let latest = AnchorPair { v_ref: vv.v_ref, v_obs: vv.v_obs };
        let anchors = Anchors { latest, previous: self.previous };
        self.previous = Some(latest);
        let mut diagnostics = Diagnostics::default();
        let solved = newtriad_solve(&self.acc, &anchors).map(|s| {
            diagnostics.eigen_gap = Some(s.eigen_gap);
            diagnostics.anchor_fallback = s.anchor_fallback;
            s.c_b0
        });
        known_estimate(Method::NewTriad, epoch, &mut self.held, solved, diagnostics)
    }
}

/// Latitude-free alignment on the normalized chain.
#[derive(Debug, Clone)]
pub struct SaladAligner {
    earth: EarthModel,
    acc: DyadicAccumulator,
    previous: Option<AnchorPair>,
    held: Option<(Mat3, f64)>,
    last_l_plus: Option<f64>,
    stable: bool,
}

impl SaladAligner {
    pub fn new(earth: EarthModel) -> Self {
        Self { earth, acc: DyadicAccumulator::new(), previous: None, held: None, last_l_plus: None, stable: false }
    }

    pub fn accumulator(&self) -> &DyadicAccumulator {
        &self.acc
    }

    fn stage(&mut self, lat: &LatitudeSolution) -> LatitudeStage {
        if lat.clamp == Some(LatitudeClamp::AboveOne) {
            self.last_l_plus = None;
            return LatitudeStage::Growing;
        }
        if let Some(prev) = self.last_l_plus {
            if (lat.l_plus - prev).abs() < STABLE_LATITUDE_STEP {
                self.stable = true;
            }
        }
        self.last_l_plus = Some(lat.l_plus);
        if self.stable {
            LatitudeStage::Stable
        } else {
            LatitudeStage::Accelerating
        }
    }
}

impl Aligner for SaladAligner {
    fn method(&self) -> Method {
        Method::Salad
    }

    fn update(&mut self, epoch: &Epoch) -> AlignmentEstimate {
        let vv = epoch.normalized;
        self.acc.add(&vv.v_ref, &vv.v_obs);
        let latest = AnchorPair { v_ref: vv.v_ref, v_obs: vv.v_obs };
        let anchors = Anchors { latest, previous: self.previous };
        self.previous = Some(latest);

        let mut d = Diagnostics::default();
        let solved = salad_latitude(&self.acc).and_then(|lat| {
            d.sqrt_arg = Some(lat.sqrt_arg);
            d.stage = Some(self.stage(&lat));
            if lat.clamp == Some(LatitudeClamp::AboveOne) {
                return Err(NotReady::LatitudeGrowing);
            }
            salad_solve(&self.acc, lat.l_plus, &anchors)
        });
        let ready = match solved {
            Ok(s) => {
                d.eigen_gap = Some(s.eigen_gap);
                d.det_sign = Some(s.det.signum());
                d.anchor_fallback = s.anchor_fallback;
                self.held = Some((s.c_b0, s.latitude));
                true
            }
            Err(e) => {
                d.not_ready = Some(e);
                false
            }
        };
        let c_bn = self
            .held
            .map(|(c, lat)| realtime_attitude_inertial(&self.earth, &c, lat, epoch.t, &epoch.c_b_b0));
        AlignmentEstimate {
            method: Method::Salad,
            t: epoch.t,
            c_b0: self.held.map(|h| h.0),
            c_bn,
            latitude: self.held.map(|h| h.1),
            ready,
            diagnostics: d,
        }
    }
}

/// Zero-length vectors carry no direction; used by the harness to skip
/// epochs before any sample has been integrated.
pub fn is_degenerate(vv: &VelocityVectors) -> bool {
    vv.v_ref == Vec3::zeros() || vv.v_obs == Vec3::zeros()
}
