#![allow(dead_code)]

use swayalign::aligners::{build_aligner, AlignmentEstimate, Method};
use swayalign::attmath::EulerAngles;
use swayalign::earth::EarthModel;
use swayalign::propagation::{Epoch, EpochClock, GyroSemantics, InertialPropagator};
use swayalign::simulator::{GyroModel, SensorErrorModel, Simulation, SwayProfile, TruthSample};

pub const REFERENCE_LATITUDE_DEG: f64 = 30.266;

pub fn simulation(lat_deg: f64, errors: SensorErrorModel, duration: f64) -> Simulation {
    Simulation {
        profile: SwayProfile::reference(EulerAngles::default()),
        errors,
        latitude: lat_deg.to_radians(),
        fs: 50.0,
        duration,
        earth: EarthModel::default(),
        gyro_model: GyroModel::IntervalAverage,
    }
}

pub fn noiseless(lat_deg: f64, duration: f64) -> Simulation {
    simulation(lat_deg, SensorErrorModel::none(), duration)
}

/// Update epochs at 1 Hz with the truth sample they were taken at.
pub fn epochs(sim: &Simulation, known_latitude: bool, semantics: GyroSemantics) -> Vec<(Epoch, TruthSample)> {
    let (imu, truth) = sim.run().unwrap();
    let mut prop = InertialPropagator::new(sim.earth, known_latitude.then_some(sim.latitude), semantics);
    let mut clock = EpochClock::new(1.0).unwrap();
    let mut out = Vec::new();
    for (i, s) in imu.iter().enumerate() {
        prop.push(s).unwrap();
        if i > 0 && clock.due(prop.elapsed()) {
            out.push((prop.epoch(), truth[i]));
        }
    }
    out
}

/// Streams `epochs` through one aligner.
pub fn estimates(method: Method, earth: EarthModel, epochs: &[(Epoch, TruthSample)]) -> Vec<AlignmentEstimate> {
    let mut a = build_aligner(method, earth);
    epochs.iter().map(|(e, _)| a.update(e)).collect()
}

pub fn max_abs_deg(v: &swayalign::attmath::Vec3) -> f64 {
    v.iter().map(|x| x.abs().to_degrees()).fold(0.0, f64::max)
}
