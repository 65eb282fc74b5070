use super::{ExperimentConfig, HarnessError};
use crate::aligners::{build_aligner, misalignment, AlignmentEstimate, Method};
use crate::attmath::{Mat3, Vec3};
use crate::earth::EarthModel;
use crate::propagation::{EpochClock, GyroSemantics, ImuSample, InertialPropagator};

/// How a stream is aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignOptions {
    pub methods: Vec<Method>,
    /// Known latitude for TRIAD, OBA and newTRIAD, rad.
    pub latitude: Option<f64>,
    pub earth: EarthModel,
    pub update_hz: f64,
    pub semantics: GyroSemantics,
}

impl AlignOptions {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            methods: cfg.harness.methods.clone(),
            latitude: Some(cfg.latitude()),
            earth: cfg.earth_model(),
            update_hz: cfg.harness.update_hz,
            semantics: cfg.harness.gyro_semantics,
        }
    }
}

/// Ground truth available at an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochTruth {
    pub c_b_n: Mat3,
    pub latitude: Option<f64>,
}

/// All aligner outputs at one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochResult {
    /// Seconds since alignment start.
    pub t: f64,
    pub estimates: Vec<AlignmentEstimate>,
    pub truth: Option<EpochTruth>,
}

/// Runs every requested aligner over `samples`. `truth(i)` gives the ground
/// truth at sample `i`, when known.
pub fn align_samples(
    opts: &AlignOptions,
    samples: &[ImuSample],
    truth: impl Fn(usize) -> Option<EpochTruth>,
) -> Result<Vec<EpochResult>, HarnessError> {
    if opts.latitude.is_none() {
        if let Some(m) = opts.methods.iter().find(|m| m.needs_latitude()) {
            return Err(HarnessError::config("earth.latitude_deg", format!("method {m} needs a known latitude")));
        }
    }
    let mut prop = InertialPropagator::new(opts.earth, opts.latitude, opts.semantics);
    let mut clock = EpochClock::new(opts.update_hz)?;
    let mut aligners: Vec<_> = opts.methods.iter().map(|m| build_aligner(*m, opts.earth)).collect();
    let mut out = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        prop.push(s)?;
        let t = prop.elapsed();
        if i == 0 || !clock.due(t) {
            continue;
        }
        let epoch = prop.epoch();
        let estimates = aligners.iter_mut().map(|a| a.update(&epoch)).collect();
        out.push(EpochResult { t, estimates, truth: truth(i) });
    }
    Ok(out)
}

/// One line of the error series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub method: Method,
    /// `[phi_E, phi_N, phi_U]`, deg; NaN when unavailable.
    pub phi_deg: [f64; 3],
    /// Estimated minus true latitude, deg; NaN when unavailable.
    pub lat_err_deg: f64,
    pub ready: bool,
}

pub fn series_rows(results: &[EpochResult]) -> Vec<SeriesRow> {
    let mut rows = Vec::new();
    for r in results {
        for e in &r.estimates {
            let phi = match (e.c_bn.as_ref(), r.truth.as_ref()) {
                (Some(est), Some(tr)) => misalignment(est, &tr.c_b_n).map(f64::to_degrees),
                _ => Vec3::repeat(f64::NAN),
            };
            let lat_err = match (e.latitude, r.truth.and_then(|t| t.latitude)) {
                (Some(l), Some(lt)) => (l - lt).to_degrees(),
                _ => f64::NAN,
            };
            rows.push(SeriesRow { t: r.t, method: e.method, phi_deg: phi.into(), lat_err_deg: lat_err, ready: e.ready });
        }
    }
    rows
}

/// Simulates the configured run with `seed` and aligns it.
pub fn simulate_and_align(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<EpochResult>, HarnessError> {
    let sim = cfg.simulation(seed);
    let (imu, truth) = sim.run()?;
    let lat = sim.latitude;
    align_samples(&AlignOptions::from_config(cfg), &imu, |i| {
        Some(EpochTruth { c_b_n: truth[i].c_b_n, latitude: Some(lat) })
    })
}

/// The configured simulation aligned with `harness.seed`, as series rows.
pub fn run_alignment(cfg: &ExperimentConfig) -> Result<Vec<SeriesRow>, HarnessError> {
    Ok(series_rows(&simulate_and_align(cfg, cfg.harness.seed)?))
}
