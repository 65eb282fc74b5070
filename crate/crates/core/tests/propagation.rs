mod common;

use common::*;
use swayalign::attmath::{euler_to_dcm, EulerAngles};
use swayalign::earth::latitude_scaling;
use swayalign::propagation::{GyroSemantics, InertialPropagator};
use swayalign::simulator::{GyroModel, Simulation, SwayProfile};

/// Largest `|v_ref - C_b0 v_obs| / |v_ref|` over every sample of the
/// latitude-known chain.
fn known_chain_residual(sim: &Simulation, semantics: GyroSemantics) -> f64 {
    let (imu, truth) = sim.run().unwrap();
    let c_b0 = truth[0].c_b_n;
    let mut prop = InertialPropagator::new(sim.earth, Some(sim.latitude), semantics);
    let mut worst: f64 = 0.0;
    for s in &imu {
        prop.push(s).unwrap();
        let vv = prop.epoch().known.unwrap();
        let n = vv.v_ref.norm();
        if n > 0.0 {
            worst = worst.max((vv.v_ref - c_b0 * vv.v_obs).norm() / n);
        }
    }
    worst
}

#[test]
fn known_chain_identity_holds_at_every_sample() {
    let r = known_chain_residual(&noiseless(REFERENCE_LATITUDE_DEG, 180.0), GyroSemantics::IntervalAverage);
    assert!(r < 1e-7, "residual {r:e}");
}

#[test]
fn static_body_identity() {
    for lat in [-60.0, 0.0, 30.266, 89.0] {
        let mut sim = noiseless(lat, 120.0);
        sim.profile = SwayProfile::stationary(EulerAngles::from_degrees(3.0, -2.0, 40.0));
        let r = known_chain_residual(&sim, GyroSemantics::IntervalAverage);
        assert!(r < 1e-8, "lat {lat}: residual {r:e}");
    }
}

#[test]
fn halving_the_step_shrinks_the_residual() {
    // Instantaneous rates make the attitude update the only approximation.
    let run = |fs: f64| {
        let mut sim = noiseless(REFERENCE_LATITUDE_DEG, 60.0);
        sim.fs = fs;
        sim.gyro_model = GyroModel::Instantaneous;
        known_chain_residual(&sim, GyroSemantics::PointSample)
    };
    let (coarse, fine) = (run(25.0), run(50.0));
    assert!(coarse > 0.0 && fine > 0.0);
    assert!(coarse / fine >= 3.0, "coarse {coarse:e}, fine {fine:e}");
}

#[test]
fn normalized_chain_preserves_norm() {
    let sim = noiseless(REFERENCE_LATITUDE_DEG, 180.0);
    let s = latitude_scaling(sim.latitude);
    for (e, _) in epochs(&sim, false, GyroSemantics::IntervalAverage) {
        let vv = e.normalized;
        let (a, b) = ((s * vv.v_ref).norm(), vv.v_obs.norm());
        assert!((a - b).abs() < 1e-8, "t {}: {a} vs {b}", e.t);
    }
}

#[test]
fn tracker_replays_the_true_trajectory() {
    let sim = noiseless(REFERENCE_LATITUDE_DEG, 180.0);
    let (imu, truth) = sim.run().unwrap();
    let mut prop = InertialPropagator::new(sim.earth, None, GyroSemantics::IntervalAverage);
    for (s, tr) in imu.iter().zip(&truth) {
        prop.push(s).unwrap();
        let d = (prop.body().unwrap().dcm() - tr.c_b_b0).abs().max();
        assert!(d < 1e-6, "t {}: {d:e}", s.t);
    }
}

#[test]
fn epochs_follow_the_update_rate() {
    let sim = noiseless(REFERENCE_LATITUDE_DEG, 10.0);
    let ts: Vec<f64> = epochs(&sim, true, GyroSemantics::IntervalAverage).iter().map(|(e, _)| e.t).collect();
    assert_eq!(ts.len(), 10);
    for (k, t) in ts.iter().enumerate() {
        assert!((t - (k + 1) as f64).abs() < 1e-9);
    }
}

#[test]
fn truth_chain_is_consistent() {
    let sim = noiseless(REFERENCE_LATITUDE_DEG, 30.0);
    let (_, truth) = sim.run().unwrap();
    let c0 = euler_to_dcm(&truth[0].euler);
    for tr in truth.iter().step_by(37) {
        let rebuilt = sim.earth.nav_rotation(sim.latitude, tr.t).transpose() * c0 * tr.c_b_b0;
        assert!((rebuilt - tr.c_b_n).abs().max() < 1e-10);
    }
}
