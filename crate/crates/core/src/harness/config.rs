use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::aligners::Method;
use crate::attmath::{EulerAngles, Vec3};
use crate::earth::{EarthModel, EQUATORIAL_GRAVITY, WGS84_OMEGA_E};
use crate::propagation::GyroSemantics;
use crate::simulator::{GyroModel, SensorErrorModel, Simulation, SwayProfile};

/// A scalar applied to every axis, or one value per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis {
    Same(f64),
    Axes([f64; 3]),
}

impl PerAxis {
    pub fn to_vec3(self) -> Vec3 {
        match self {
            PerAxis::Same(v) => Vec3::repeat(v),
            PerAxis::Axes(a) => Vec3::from(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    /// Sample rate, Hz.
    pub fs: f64,
    pub duration_s: f64,
    pub gyro_model: GyroModel,
}

impl Default for SimSection {
    fn default() -> Self {
        Self { fs: 50.0, duration_s: 180.0, gyro_model: GyroModel::IntervalAverage }
    }
}

/// Arrays are ordered pitch, roll, yaw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwaySection {
    pub amplitude_deg: [f64; 3],
    pub period_s: [f64; 3],
    pub center_deg: [f64; 3],
}

impl Default for SwaySection {
    fn default() -> Self {
        Self { amplitude_deg: [7.0, 10.0, 5.0], period_s: [5.0, 6.0, 7.0], center_deg: [0.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EarthSection {
    /// True latitude of simulated runs, and the known latitude handed to the
    /// latitude-dependent aligners.
    pub latitude_deg: f64,
    /// rad/s
    pub omega_e: f64,
    /// m/s^2
    pub g: f64,
}

impl Default for EarthSection {
    fn default() -> Self {
        Self { latitude_deg: 30.266, omega_e: WGS84_OMEGA_E, g: EQUATORIAL_GRAVITY }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSection {
    /// Constant biases.
    pub bias: bool,
    /// White noise.
    pub noise: bool,
    pub gyro_bias_dph: PerAxis,
    /// deg/sqrt(h)
    pub gyro_arw_dpsh: f64,
    pub accel_bias_ug: PerAxis,
    /// ug/sqrt(Hz)
    pub accel_vrw_ug: f64,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self {
            bias: true,
            noise: true,
            gyro_bias_dph: PerAxis::Same(0.02),
            gyro_arw_dpsh: 0.002,
            accel_bias_ug: PerAxis::Same(100.0),
            accel_vrw_ug: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HarnessSection {
    pub methods: Vec<Method>,
    pub update_hz: f64,
    /// `[start, end]`, s.
    pub rmse_window_s: [f64; 2],
    pub seed: u64,
    pub gyro_semantics: GyroSemantics,
}

impl Default for HarnessSection {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            update_hz: 1.0,
            rmse_window_s: [150.0, 180.0],
            seed: 1,
            gyro_semantics: GyroSemantics::IntervalAverage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Random sway centers are drawn uniformly from these ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSection {
    pub runs: usize,
    pub pitch_deg: [f64; 2],
    pub roll_deg: [f64; 2],
    pub yaw_deg: [f64; 2],
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        Self { runs: 300, pitch_deg: [-60.0, 60.0], roll_deg: [-180.0, 180.0], yaw_deg: [0.0, 360.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub step_deg: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { lat_min_deg: -85.0, lat_max_deg: 85.0, step_deg: 1.0 }
    }
}

/// Everything an experiment needs. Every key has a default, so an empty
/// file describes the reference simulation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub sim: SimSection,
    pub sway: SwaySection,
    pub earth: EarthSection,
    pub sensors: SensorSection,
    pub harness: HarnessSection,
    pub output: OutputSection,
    pub montecarlo: MonteCarloSection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    /// Parses TOML text, applies `key.path=value` overrides, then validates.
    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self, HarnessError> {
        let mut table: toml::Table =
            text.parse().map_err(|e: toml::de::Error| HarnessError::config("", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = serde_path_to_error::deserialize(table).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(if path == "." { "" } else { &path }, e.into_inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, HarnessError> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?,
            None => String::new(),
        };
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |key: &str, msg: String| Err(HarnessError::config(key, msg));
        if !(self.sim.fs > 0.0 && self.sim.fs.is_finite()) {
            return bad("sim.fs", format!("must be positive, got {}", self.sim.fs));
        }
        if !(self.sim.duration_s >= 0.0 && self.sim.duration_s.is_finite()) {
            return bad("sim.duration_s", format!("must be non-negative, got {}", self.sim.duration_s));
        }
        if self.sway.amplitude_deg.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
            return bad("sway.amplitude_deg", "must be non-negative".into());
        }
        if self.sway.period_s.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return bad("sway.period_s", "must be positive".into());
        }
        if !(self.earth.latitude_deg.abs() <= 90.0) {
            return bad("earth.latitude_deg", format!("must be within [-90, 90], got {}", self.earth.latitude_deg));
        }
        EarthModel::new(self.earth.omega_e, self.earth.g).map_err(|e| HarnessError::config("earth", e.to_string()))?;
        if !(self.sensors.gyro_arw_dpsh >= 0.0 && self.sensors.accel_vrw_ug >= 0.0) {
            return bad("sensors", "noise densities must be non-negative".into());
        }
        if self.harness.methods.is_empty() {
            return bad("harness.methods", "at least one method is required".into());
        }
        if !(self.harness.update_hz > 0.0 && self.harness.update_hz.is_finite()) {
            return bad("harness.update_hz", format!("must be positive, got {}", self.harness.update_hz));
        }
        let [a, b] = self.harness.rmse_window_s;
        if !(b > a) {
            return bad("harness.rmse_window_s", format!("end must exceed start, got [{a}, {b}]"));
        }
        if self.montecarlo.runs == 0 {
            return bad("montecarlo.runs", "must be at least 1".into());
        }
        for (key, [lo, hi]) in [
            ("montecarlo.pitch_deg", self.montecarlo.pitch_deg),
            ("montecarlo.roll_deg", self.montecarlo.roll_deg),
            ("montecarlo.yaw_deg", self.montecarlo.yaw_deg),
        ] {
            if !(hi >= lo) {
                return bad(key, format!("range [{lo}, {hi}] is empty"));
            }
        }
        if !(self.sweep.step_deg > 0.0) {
            return bad("sweep.step_deg", format!("must be positive, got {}", self.sweep.step_deg));
        }
        if !(self.sweep.lat_max_deg >= self.sweep.lat_min_deg)
            || self.sweep.lat_min_deg.abs() > 90.0
            || self.sweep.lat_max_deg.abs() > 90.0
        {
            return bad("sweep", "latitude range must be ordered and within [-90, 90]".into());
        }
        Ok(())
    }

    pub fn earth_model(&self) -> EarthModel {
        EarthModel { omega_e: self.earth.omega_e, g: self.earth.g }
    }

    pub fn latitude(&self) -> f64 {
        self.earth.latitude_deg.to_radians()
    }

    pub fn sway_profile(&self) -> SwayProfile {
        let [p, r, y] = self.sway.center_deg;
        SwayProfile {
            amplitude: self.sway.amplitude_deg.map(f64::to_radians),
            period: self.sway.period_s,
            center: EulerAngles::from_degrees(p, r, y),
        }
    }

    pub fn sensor_errors(&self, seed: u64) -> SensorErrorModel {
        let s = &self.sensors;
        let g = self.earth.g;
        let pi = std::f64::consts::PI;
        let mut m = SensorErrorModel {
            gyro_bias: s.gyro_bias_dph.to_vec3().map(|b| b * pi / (180.0 * 3600.0)),
            gyro_arw: s.gyro_arw_dpsh * pi / 180.0 / 60.0,
            accel_bias: s.accel_bias_ug.to_vec3().map(|b| b * 1e-6 * g),
            accel_vrw: s.accel_vrw_ug * 1e-6 * g,
            seed,
        };
        if !s.bias {
            m.gyro_bias = Vec3::zeros();
            m.accel_bias = Vec3::zeros();
        }
        if !s.noise {
            m = m.bias_only();
        }
        m
    }

    pub fn simulation(&self, seed: u64) -> Simulation {
        Simulation {
            profile: self.sway_profile(),
            errors: self.sensor_errors(seed),
            latitude: self.latitude(),
            fs: self.sim.fs,
            duration: self.sim.duration_s,
            earth: self.earth_model(),
            gyro_model: self.sim.gyro_model,
        }
    }
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), HarnessError> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| HarnessError::config(item, "override must look like key.path=value".into()))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(HarnessError::config(key, "empty key segment".into()));
    }
    let mut cursor = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cursor.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(HarnessError::config(key, format!("`{p}` is not a table"))),
        };
    }
    cursor.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = ExperimentConfig::from_toml_str("", &[]).unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.harness.methods.len(), 4);
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string(), &[]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_reports_path() {
        let err = ExperimentConfig::from_toml_str("[sim]\nfss = 3\n", &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("sim"), "{msg}");
        assert!(msg.contains("fss"), "{msg}");
        let err = ExperimentConfig::from_toml_str("[sway]\nperiod_s = [1, 2]\n", &[]).unwrap_err();
        assert!(err.to_string().contains("sway.period_s"), "{err}");
    }

    #[test]
    fn overrides_apply_and_validate() {
        let o = vec!["sim.fs=100".to_string(), "harness.methods=[\"salad\"]".to_string()];
        let c = ExperimentConfig::from_toml_str("[sim]\nfs = 10.0\n", &o).unwrap();
        assert_eq!(c.sim.fs, 100.0);
        assert_eq!(c.harness.methods, vec![Method::Salad]);
        let c = ExperimentConfig::from_toml_str("", &["sensors.gyro_bias_dph=[0.01, 0.02, -0.03]".into()]).unwrap();
        assert_eq!(c.sensors.gyro_bias_dph, PerAxis::Axes([0.01, 0.02, -0.03]));
        let c = ExperimentConfig::from_toml_str("", &["sim.gyro_model=instantaneous".into()]).unwrap();
        assert_eq!(c.sim.gyro_model, GyroModel::Instantaneous);
        let err = ExperimentConfig::from_toml_str("", &["sim.fs=-1".into()]).unwrap_err();
        assert!(err.to_string().contains("sim.fs"));
        assert!(ExperimentConfig::from_toml_str("", &["nonsense".into()]).is_err());
    }

    #[test]
    fn sensor_error_switches() {
        let mut c = ExperimentConfig::default();
        let full = c.sensor_errors(5);
        assert_eq!(full, SensorErrorModel::navigation_grade(c.earth.g, 5));
        c.sensors.noise = false;
        assert_eq!(c.sensor_errors(5).gyro_arw, 0.0);
        assert_eq!(c.sensor_errors(5).gyro_bias, full.gyro_bias);
        c.sensors.bias = false;
        assert_eq!(c.sensor_errors(5), SensorErrorModel { seed: 5, ..SensorErrorModel::none() });
    }
}
