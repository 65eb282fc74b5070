//! Inertial-frame trackers and velocity-vector integration.
//!
//! The body tracker follows `C_b^{b0}(t)` from gyro samples, the navigation
//! tracker follows `C_n^{n0}(t)` from the known earth rate. Two integrators
//! turn accelerometer samples into matched reference/observation vector
//! pairs:
//!
//! - the latitude-known chain integrates `C_n^{n0}(t) (-g^n)` against
//!   `C_b^{b0}(t) f^b(t)`,
//! - the normalized chain integrates the latitude-free `[cos wt, sin wt, 1]`
//!   against the unit observation `C_b^{b0}(t) f^b(t) / |f^b(t)|`.
//!
//! Both use the trapezoidal rule on the rotated integrand, starting from the
//! first sample of the stream.

use serde::{Deserialize, Serialize};

use crate::attmath::{Mat3, Quat, Vec3};
use crate::earth::EarthModel;
use crate::error::AlignError;

/// Quaternion renormalization interval of the body tracker.
pub const RENORMALIZE_EVERY: u64 = 1000;

/// Accelerometer samples shorter than this fraction of `g` are skipped.
pub const MIN_SPECIFIC_FORCE_FRACTION: f64 = 0.1;

/// One IMU reading in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Seconds.
    pub t: f64,
    /// Angular rate, rad/s.
    pub gyro: Vec3,
    /// Specific force, m/s^2.
    pub accel: Vec3,
}

impl ImuSample {
    pub fn new(t: f64, gyro: Vec3, accel: Vec3) -> Self {
        Self { t, gyro, accel }
    }
}

/// How a gyro sample relates to the interval that ends at its timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GyroSemantics {
    /// The sample is the mean rate over `(t_prev, t]`, i.e. a delta-angle
    /// divided by the interval. This is what strapdown IMUs deliver.
    #[default]
    IntervalAverage,
    /// The sample is the instantaneous rate at `t`; consecutive samples are
    /// averaged before forming the rotation vector.
    PointSample,
}

/// Tracks `C_b^{b0}(t)`, identity at the first sample.
#[derive(Debug, Clone)]
pub struct BodyTracker {
    q: Quat,
    t_last: f64,
    last_rate: Vec3,
    updates: u64,
    semantics: GyroSemantics,
}

impl BodyTracker {
    pub fn start(first: &ImuSample, semantics: GyroSemantics) -> Self {
        Self { q: Quat::identity(), t_last: first.t, last_rate: first.gyro, updates: 0, semantics }
    }

    pub fn update(&mut self, sample: &ImuSample) -> Result<(), AlignError> {
        if !(sample.t > self.t_last) {
            return Err(AlignError::NonMonotonicTime { t: sample.t, t_last: self.t_last });
        }
        let dt = sample.t - self.t_last;
        let rate = match self.semantics {
            GyroSemantics::IntervalAverage => sample.gyro,
            GyroSemantics::PointSample => (self.last_rate + sample.gyro) * 0.5,
        };
        self.q *= Quat::from_scaled_axis(rate * dt);
        self.updates += 1;
        if self.updates % RENORMALIZE_EVERY == 0 {
            self.q.renormalize();
        }
        self.t_last = sample.t;
        self.last_rate = sample.gyro;
        Ok(())
    }

    pub fn dcm(&self) -> Mat3 {
        *self.q.to_rotation_matrix().matrix()
    }

    pub fn quaternion(&self) -> &Quat {
        &self.q
    }

    pub fn t_last(&self) -> f64 {
        self.t_last
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }
}

/// Tracks `C_n^{n0}(t)` for a stationary carrier at a known latitude.
///
/// The rate is constant, so the state is just elapsed time and the matrix is
/// the closed-form rotation.
#[derive(Debug, Clone)]
pub struct NavTracker {
    earth: EarthModel,
    latitude: f64,
    elapsed: f64,
}

impl NavTracker {
    pub fn new(earth: EarthModel, latitude: f64) -> Self {
        Self { earth, latitude, elapsed: 0.0 }
    }

    pub fn update(&mut self, dt: f64) -> Result<(), AlignError> {
        if !(dt > 0.0) {
            return Err(AlignError::invalid("dt", format!("must be positive, got {dt}")));
        }
        self.elapsed += dt;
        Ok(())
    }

    /// Sets the elapsed time directly; avoids summing many small steps.
    pub fn advance_to(&mut self, elapsed: f64) {
        self.elapsed = elapsed;
    }

    pub fn dcm(&self) -> Mat3 {
        self.earth.nav_rotation(self.latitude, self.elapsed)
    }

    pub fn latitude(&self) -> f64 {
        self.latitude
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }
}

/// Matched reference/observation integrals at time `t` (seconds since the
/// first sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityVectors {
    pub v_ref: Vec3,
    pub v_obs: Vec3,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chain {
    /// Reference `C_n^{n0}(t) (-g^n)`, observation `C_b^{b0}(t) f^b`.
    LatitudeKnown { latitude: f64 },
    /// Reference `[cos wt, sin wt, 1]`, observation the unit vector of
    /// `C_b^{b0}(t) f^b`.
    Normalized,
}

/// Trapezoidal integrator for one chain.
#[derive(Debug, Clone)]
pub struct VelocityIntegrator {
    chain: Chain,
    earth: EarthModel,
    last: Option<(f64, Vec3, Vec3)>,
    v_ref: Vec3,
    v_obs: Vec3,
    skipped: usize,
}

impl VelocityIntegrator {
    pub fn new(chain: Chain, earth: EarthModel) -> Self {
        Self { chain, earth, last: None, v_ref: Vec3::zeros(), v_obs: Vec3::zeros(), skipped: 0 }
    }

    /// Adds the integrand point at elapsed time `t`.
    ///
    /// `c_n_n0` is required by the latitude-known chain. Returns `false` when
    /// the sample is skipped because the specific force is too short to
    /// normalize.
    pub fn push(&mut self, t: f64, c_b_b0: &Mat3, c_n_n0: Option<&Mat3>, accel: &Vec3) -> bool {
        let norm = accel.norm();
        if !(norm >= MIN_SPECIFIC_FORCE_FRACTION * self.earth.g) {
            self.skipped += 1;
            return false;
        }
        let (r, o) = match self.chain {
            Chain::LatitudeKnown { .. } => {
                let c_n_n0 = c_n_n0.expect("latitude-known chain needs the navigation tracker");
                (c_n_n0 * (-self.earth.gravity_n()), c_b_b0 * accel)
            }
            Chain::Normalized => {
                (self.earth.normalized_reference_i0(t), c_b_b0 * (accel / norm))
            }
        };
        if let Some((t_prev, r_prev, o_prev)) = self.last {
            let half = 0.5 * (t - t_prev);
            self.v_ref += (r_prev + r) * half;
            self.v_obs += (o_prev + o) * half;
        }
        self.last = Some((t, r, o));
        true
    }

    pub fn vectors(&self) -> VelocityVectors {
        VelocityVectors { v_ref: self.v_ref, v_obs: self.v_obs, t: self.last.map_or(0.0, |l| l.0) }
    }

    pub fn chain(&self) -> Chain {
        self.chain
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }
}

/// Everything an aligner needs at one update epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epoch {
    /// Seconds since alignment start.
    pub t: f64,
    pub c_b_b0: Mat3,
    /// `C_n^{n0}(t)`, present when the latitude is known.
    pub c_n_n0: Option<Mat3>,
    pub known: Option<VelocityVectors>,
    pub normalized: VelocityVectors,
}

/// Emits an epoch every `1 / update_hz` seconds of stream time.
#[derive(Debug, Clone)]
pub struct EpochClock {
    period: f64,
    next: f64,
}

impl EpochClock {
    pub fn new(update_hz: f64) -> Result<Self, AlignError> {
        if !(update_hz > 0.0 && update_hz.is_finite()) {
            return Err(AlignError::invalid("update_hz", format!("must be positive, got {update_hz}")));
        }
        let period = 1.0 / update_hz;
        Ok(Self { period, next: period })
    }

    /// True when elapsed time `t` reaches the next epoch.
    pub fn due(&mut self, t: f64) -> bool {
        // Sample clocks are not exact multiples of the period in floating
        // point; allow a microsecond of slack.
        if t + 1e-6 < self.next {
            return false;
        }
        while self.next <= t + 1e-6 {
            self.next += self.period;
        }
        true
    }
}

/// Runs the trackers and both integration chains over a sample stream.
#[derive(Debug, Clone)]
pub struct InertialPropagator {
    earth: EarthModel,
    semantics: GyroSemantics,
    t0: f64,
    body: Option<BodyTracker>,
    nav: Option<NavTracker>,
    known: Option<VelocityIntegrator>,
    normalized: VelocityIntegrator,
}

impl InertialPropagator {
    /// `latitude` enables the latitude-known chain.
    pub fn new(earth: EarthModel, latitude: Option<f64>, semantics: GyroSemantics) -> Self {
        Self {
            earth,
            semantics,
            t0: 0.0,
            body: None,
            nav: latitude.map(|l| NavTracker::new(earth, l)),
            known: latitude.map(|l| VelocityIntegrator::new(Chain::LatitudeKnown { latitude: l }, earth)),
            normalized: VelocityIntegrator::new(Chain::Normalized, earth),
        }
    }

    /// Consumes one sample. The first sample fixes the alignment start.
    pub fn push(&mut self, sample: &ImuSample) -> Result<(), AlignError> {
        let body = match &mut self.body {
            None => {
                self.t0 = sample.t;
                self.body.insert(BodyTracker::start(sample, self.semantics))
            }
            Some(b) => {
                b.update(sample)?;
                b
            }
        };
        let elapsed = sample.t - self.t0;
        if let Some(nav) = &mut self.nav {
            nav.advance_to(elapsed);
        }
        let c_b_b0 = body.dcm();
        let c_n_n0 = self.nav.as_ref().map(NavTracker::dcm);
        if let Some(known) = &mut self.known {
            known.push(elapsed, &c_b_b0, c_n_n0.as_ref(), &sample.accel);
        }
        self.normalized.push(elapsed, &c_b_b0, None, &sample.accel);
        Ok(())
    }

    pub fn started(&self) -> bool {
        self.body.is_some()
    }

    /// Elapsed time of the last sample.
    pub fn elapsed(&self) -> f64 {
        self.body.as_ref().map_or(0.0, |b| b.t_last() - self.t0)
    }

    pub fn start_time(&self) -> f64 {
        self.t0
    }

    pub fn body(&self) -> Option<&BodyTracker> {
        self.body.as_ref()
    }

    pub fn skipped(&self) -> usize {
        self.normalized.skipped()
    }

    pub fn epoch(&self) -> Epoch {
        let c_b_b0 = self.body.as_ref().map_or_else(Mat3::identity, BodyTracker::dcm);
        Epoch {
            t: self.elapsed(),
            c_b_b0,
            c_n_n0: self.nav.as_ref().map(NavTracker::dcm),
            known: self.known.as_ref().map(VelocityIntegrator::vectors),
            normalized: self.normalized.vectors(),
        }
    }

    pub fn earth(&self) -> &EarthModel {
        &self.earth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attmath::{orthonormality_residual, rot_z, rotation_from_vector};
    use approx::assert_relative_eq;

    #[test]
    fn constant_yaw_rate_is_exact() {
        let omega = 0.3;
        let dt = 0.02;
        let first = ImuSample::new(0.0, Vec3::new(0.0, 0.0, omega), Vec3::new(0.0, 0.0, 9.8));
        for semantics in [GyroSemantics::IntervalAverage, GyroSemantics::PointSample] {
            let mut tr = BodyTracker::start(&first, semantics);
            for k in 1..=500 {
                let s = ImuSample { t: k as f64 * dt, ..first };
                tr.update(&s).unwrap();
            }
            assert!((tr.dcm() - rot_z(omega * 10.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_rate_stays_identity() {
        let first = ImuSample::new(0.0, Vec3::zeros(), Vec3::new(0.0, 0.0, 9.8));
        let mut tr = BodyTracker::start(&first, GyroSemantics::IntervalAverage);
        for k in 1..=2000 {
            tr.update(&ImuSample { t: k as f64 * 0.01, ..first }).unwrap();
        }
        assert_eq!(tr.dcm(), Mat3::identity());
    }

    #[test]
    fn non_monotonic_time_rejected() {
        let first = ImuSample::new(1.0, Vec3::zeros(), Vec3::z());
        let mut tr = BodyTracker::start(&first, GyroSemantics::IntervalAverage);
        assert!(matches!(tr.update(&first), Err(AlignError::NonMonotonicTime { .. })));
        assert!(tr.update(&ImuSample { t: 0.5, ..first }).is_err());
    }

    #[test]
    fn orthonormality_drift_before_renormalization() {
        let first = ImuSample::new(0.0, Vec3::new(0.7, -1.1, 0.4), Vec3::z());
        let mut tr = BodyTracker::start(&first, GyroSemantics::IntervalAverage);
        for k in 1..RENORMALIZE_EVERY {
            let w = Vec3::new((k as f64 * 0.1).sin(), 0.8, (k as f64 * 0.07).cos());
            tr.update(&ImuSample::new(k as f64 * 0.01, w, Vec3::z())).unwrap();
        }
        assert!((tr.quaternion().as_ref().norm() - 1.0).abs() < 1e-9);
        assert!(orthonormality_residual(&tr.dcm()) < 1e-9);
    }

    #[test]
    fn nav_tracker_matches_rodrigues() {
        let earth = EarthModel::default();
        let mut nav = NavTracker::new(earth, std::f64::consts::FRAC_PI_2);
        assert_eq!(nav.dcm(), Mat3::identity());
        nav.update(600.0).unwrap();
        assert_relative_eq!(nav.dcm(), rot_z(earth.omega_e * 600.0), epsilon = 1e-15);
        assert!(nav.update(0.0).is_err());

        let mut st = 1u64;
        for _ in 0..50 {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1);
            let lat = ((st >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 3.0;
            let t = (st >> 50) as f64;
            let mut nav = NavTracker::new(earth, lat);
            for _ in 0..10 {
                nav.update(t / 10.0).unwrap();
            }
            // Matrix exponential by its power series.
            let a = crate::attmath::skew(&(earth.omega_ie_n(lat) * t));
            let mut term = Mat3::identity();
            let mut series = Mat3::identity();
            for k in 1..30 {
                term = term * a / k as f64;
                series += term;
            }
            assert!((nav.dcm() - series).norm() < 1e-10);
        }
    }

    #[test]
    fn integrals_start_at_zero() {
        let earth = EarthModel::default();
        let mut p = InertialPropagator::new(earth, Some(0.5), GyroSemantics::IntervalAverage);
        p.push(&ImuSample::new(3.0, Vec3::zeros(), Vec3::new(0.0, 0.0, earth.g))).unwrap();
        let e = p.epoch();
        assert_eq!(e.t, 0.0);
        assert_eq!(e.known.unwrap().v_ref, Vec3::zeros());
        assert_eq!(e.known.unwrap().v_obs, Vec3::zeros());
        assert_eq!(e.normalized.v_obs, Vec3::zeros());
    }

    #[test]
    fn weak_specific_force_is_skipped() {
        let earth = EarthModel::default();
        let mut p = InertialPropagator::new(earth, Some(0.5), GyroSemantics::IntervalAverage);
        let up = Vec3::new(0.0, 0.0, earth.g);
        p.push(&ImuSample::new(0.0, Vec3::zeros(), up)).unwrap();
        p.push(&ImuSample::new(0.1, Vec3::zeros(), up * 0.05)).unwrap();
        p.push(&ImuSample::new(0.2, Vec3::zeros(), up)).unwrap();
        assert_eq!(p.skipped(), 1);
        // The gap is bridged by one trapezoid from 0.0 to 0.2.
        assert_relative_eq!(p.epoch().normalized.v_obs, Vec3::new(0.0, 0.0, 0.2), epsilon = 1e-15);
    }

    #[test]
    fn static_body_vectors_differ_by_constant_rotation() {
        // Static carrier with a fixed attitude: gyro sees only earth rate.
        let earth = EarthModel::default();
        let lat = 0.7;
        let c_b_n = rotation_from_vector(&Vec3::new(0.1, -0.2, 2.0));
        let gyro = c_b_n.transpose() * earth.omega_ie_n(lat);
        let accel = c_b_n.transpose() * (-earth.gravity_n());
        let mut p = InertialPropagator::new(earth, Some(lat), GyroSemantics::IntervalAverage);
        for k in 0..=3000 {
            p.push(&ImuSample::new(k as f64 * 0.02, gyro, accel)).unwrap();
            let e = p.epoch();
            let vv = e.known.unwrap();
            assert!((vv.v_ref - c_b_n * vv.v_obs).norm() <= 1e-8 * vv.v_ref.norm().max(1.0));
            let nv = e.normalized;
            let s = crate::earth::latitude_scaling(lat);
            assert_relative_eq!((s * nv.v_ref).norm(), nv.v_obs.norm(), epsilon = 1e-8);
        }
    }

    #[test]
    fn epoch_clock_cadence() {
        let mut clock = EpochClock::new(1.0).unwrap();
        let due: Vec<usize> = (0..=250).filter(|k| clock.due(*k as f64 * 0.02)).collect();
        assert_eq!(due, vec![50, 100, 150, 200, 250]);
        assert!(EpochClock::new(0.0).is_err());
    }
}
