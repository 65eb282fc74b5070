//! Swaying-base trajectory and IMU stream synthesis.
//!
//! Each Euler angle oscillates as `center + A cos(2 pi t / T)`. The carrier
//! does not translate, so the accelerometer sees only the apparent gravity
//! and the gyro sees the sway rate plus the earth rate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::attmath::{euler_to_dcm, rot_x, rot_y, rotation_vector, EulerAngles, Mat3, Vec3, GIMBAL_MARGIN};
use crate::earth::EarthModel;
use crate::error::AlignError;
use crate::propagation::ImuSample;

const DEG: f64 = PI / 180.0;

/// Cosine sway about a fixed center. Arrays are ordered pitch, roll, yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwayProfile {
    /// rad
    pub amplitude: [f64; 3],
    /// s
    pub period: [f64; 3],
    pub center: EulerAngles,
}

impl SwayProfile {
    pub fn new(amplitude: [f64; 3], period: [f64; 3], center: EulerAngles) -> Result<Self, AlignError> {
        if amplitude.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(AlignError::invalid("amplitude", format!("must be finite and non-negative, got {amplitude:?}")));
        }
        if period.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(AlignError::invalid("period", format!("must be positive, got {period:?}")));
        }
        Ok(Self { amplitude, period, center })
    }

    /// 7, 10, 5 degrees with 5, 6, 7 second periods around `center`.
    pub fn reference(center: EulerAngles) -> Self {
        Self { amplitude: [7.0 * DEG, 10.0 * DEG, 5.0 * DEG], period: [5.0, 6.0, 7.0], center }
    }

    pub fn stationary(center: EulerAngles) -> Self {
        Self { amplitude: [0.0; 3], period: [1.0; 3], center }
    }
}

/// Euler angles at `t` and their time derivatives `[pitch, roll, yaw]`.
pub fn sway_euler(profile: &SwayProfile, t: f64) -> (EulerAngles, [f64; 3]) {
    let c = [profile.center.pitch, profile.center.roll, profile.center.yaw];
    let mut angle = [0.0; 3];
    let mut rate = [0.0; 3];
    for i in 0..3 {
        let w = 2.0 * PI / profile.period[i];
        let (s, co) = (w * t).sin_cos();
        angle[i] = c[i] + profile.amplitude[i] * co;
        rate[i] = -profile.amplitude[i] * w * s;
    }
    (EulerAngles::new(angle[0], angle[1], angle[2]), rate)
}

/// Body rate relative to the navigation frame, in body axes, for the
/// yaw-pitch-roll sequence `C_b^n = Rz Rx Ry`.
pub fn euler_rates_to_body_rate(euler: &EulerAngles, rates: &[f64; 3]) -> Result<Vec3, AlignError> {
    if !(euler.pitch.abs() < PI / 2.0 - GIMBAL_MARGIN) {
        return Err(AlignError::GimbalProximity { pitch: euler.pitch });
    }
    let ry_t = rot_y(euler.roll).transpose();
    let rx_t = rot_x(euler.pitch).transpose();
    let [dp, dr, dy] = *rates;
    Ok(ry_t * rx_t * Vec3::new(0.0, 0.0, dy) + ry_t * Vec3::new(dp, 0.0, 0.0) + Vec3::new(0.0, dr, 0.0))
}

/// Constant biases and white-noise densities of the IMU triads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorErrorModel {
    /// rad/s per axis
    pub gyro_bias: Vec3,
    /// Angle random walk, rad/sqrt(s).
    pub gyro_arw: f64,
    /// m/s^2 per axis
    pub accel_bias: Vec3,
    /// Velocity random walk, (m/s^2)/sqrt(Hz).
    pub accel_vrw: f64,
    pub seed: u64,
}

impl SensorErrorModel {
    pub fn none() -> Self {
        Self { gyro_bias: Vec3::zeros(), gyro_arw: 0.0, accel_bias: Vec3::zeros(), accel_vrw: 0.0, seed: 0 }
    }

    /// 0.02 deg/h gyro bias, 0.002 deg/sqrt(h) ARW, 100 ug accelerometer bias,
    /// 10 ug/sqrt(Hz) VRW, same sign on every axis.
    pub fn navigation_grade(g: f64, seed: u64) -> Self {
        Self {
            gyro_bias: Vec3::repeat(0.02 * PI / (180.0 * 3600.0)),
            gyro_arw: 0.002 * PI / 180.0 / 60.0,
            accel_bias: Vec3::repeat(100.0 * 1e-6 * g),
            accel_vrw: 10.0 * 1e-6 * g,
            seed,
        }
    }

    pub fn bias_only(self) -> Self {
        Self { gyro_arw: 0.0, accel_vrw: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<(), AlignError> {
        if !(self.gyro_arw >= 0.0 && self.accel_vrw >= 0.0) {
            return Err(AlignError::invalid("noise density", "must be non-negative"));
        }
        if !(self.gyro_bias.iter().chain(self.accel_bias.iter()).all(|b| b.is_finite())) {
            return Err(AlignError::invalid("bias", "must be finite"));
        }
        Ok(())
    }
}

/// What a gyro sample represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GyroModel {
    /// Mean rate over the interval ending at the sample (delta-angle / dt).
    #[default]
    IntervalAverage,
    /// Instantaneous angular rate at the sample time.
    Instantaneous,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    pub euler: EulerAngles,
    pub c_b_n: Mat3,
    pub c_b_b0: Mat3,
}

/// Counter-based Gaussian source: SplitMix64 finalizer over
/// `seed + counter * golden`, paired through Box-Muller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStream {
    seed: u64,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn bits(&self, counter: u64) -> u64 {
        let mut z = self.seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in (0, 1].
    pub fn uniform(&self, counter: u64) -> f64 {
        ((self.bits(counter) >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal number `index`.
    pub fn gaussian(&self, index: u64) -> f64 {
        let u1 = self.uniform(2 * index);
        let u2 = self.uniform(2 * index + 1);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }
}

/// A complete simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simulation {
    pub profile: SwayProfile,
    pub errors: SensorErrorModel,
    /// rad
    pub latitude: f64,
    /// Hz
    pub fs: f64,
    /// s
    pub duration: f64,
    pub earth: EarthModel,
    pub gyro_model: GyroModel,
}

impl Simulation {
    pub fn validate(&self) -> Result<(), AlignError> {
        if !(self.fs > 0.0 && self.fs.is_finite()) {
            return Err(AlignError::invalid("fs", format!("must be positive, got {}", self.fs)));
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(AlignError::invalid("duration", format!("must be non-negative, got {}", self.duration)));
        }
        if !(self.latitude.abs() <= PI / 2.0) {
            return Err(AlignError::invalid("latitude", format!("must be within +-90 deg, got {}", self.latitude)));
        }
        self.errors.validate()
    }

    /// Number of intervals; samples run from index 0 to this inclusive.
    pub fn intervals(&self) -> u64 {
        (self.duration * self.fs).round() as u64
    }

    pub fn sample_time(&self, k: i64) -> f64 {
        k as f64 / self.fs
    }

    /// Ground truth at time `t` (seconds, zero at alignment start).
    pub fn truth_at(&self, t: f64) -> Result<TruthSample, AlignError> {
        let (euler, _) = sway_euler(&self.profile, t);
        let c_b_n = euler_to_dcm(&euler);
        let (e0, _) = sway_euler(&self.profile, 0.0);
        let c_b_n0 = euler_to_dcm(&e0);
        let c_b_b0 = c_b_n0.transpose() * self.earth.nav_rotation(self.latitude, t) * c_b_n;
        if !(euler.pitch.abs() < PI / 2.0 - GIMBAL_MARGIN) {
            return Err(AlignError::GimbalProximity { pitch: euler.pitch });
        }
        Ok(TruthSample { t, euler, c_b_n, c_b_b0 })
    }

    fn true_gyro(&self, k: i64, truth: &TruthSample) -> Result<Vec3, AlignError> {
        match self.gyro_model {
            GyroModel::IntervalAverage => {
                let prev = self.truth_at(self.sample_time(k - 1))?;
                Ok(rotation_vector(&(prev.c_b_b0.transpose() * truth.c_b_b0)) * self.fs)
            }
            GyroModel::Instantaneous => {
                let (euler, rates) = sway_euler(&self.profile, truth.t);
                let w_nb = euler_rates_to_body_rate(&euler, &rates)?;
                Ok(w_nb + truth.c_b_n.transpose() * self.earth.omega_ie_n(self.latitude))
            }
        }
    }

    /// IMU sample and truth at sample index `k`.
    pub fn sample(&self, k: u64) -> Result<(ImuSample, TruthSample), AlignError> {
        let ki = k as i64;
        let truth = self.truth_at(self.sample_time(ki))?;
        let gyro = self.true_gyro(ki, &truth)?;
        let accel = truth.c_b_n.transpose() * (-self.earth.gravity_n());
        let noise = NoiseStream::new(self.errors.seed);
        let sg = self.errors.gyro_arw * self.fs.sqrt();
        let sa = self.errors.accel_vrw * self.fs.sqrt();
        let n = |axis: u64| noise.gaussian(6 * k + axis);
        let gyro = gyro + self.errors.gyro_bias + Vec3::new(n(0), n(1), n(2)) * sg;
        let accel = accel + self.errors.accel_bias + Vec3::new(n(3), n(4), n(5)) * sa;
        Ok((ImuSample::new(truth.t, gyro, accel), truth))
    }

    pub fn run(&self) -> Result<(Vec<ImuSample>, Vec<TruthSample>), AlignError> {
        self.validate()?;
        (0..=self.intervals()).map(|k| self.sample(k)).collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().unzip())
    }
}

/// Synthesizes an IMU stream and its ground truth.
pub fn synth_imu(
    profile: &SwayProfile,
    errors: &SensorErrorModel,
    latitude: f64,
    fs: f64,
    duration: f64,
    earth: &EarthModel,
) -> Result<(Vec<ImuSample>, Vec<TruthSample>), AlignError> {
    Simulation { profile: *profile, errors: *errors, latitude, fs, duration, earth: *earth, gyro_model: GyroModel::default() }
        .run()
}
