use rayon::prelude::*;

use super::{mean_std, rmse_window, series_rows, simulate_and_align, ExperimentConfig, HarnessError, RmseWindow};
use crate::aligners::{misalignment, Method};
use crate::simulator::NoiseStream;

const CENTER_STREAM: u64 = 0xC3A5_C85C_97CB_3127;

/// Terminal SALAD result at one latitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lat_deg: f64,
    /// Estimated minus true latitude, deg; NaN when never ready.
    pub lat_err_deg: f64,
    pub phi_deg: [f64; 3],
    pub ready: bool,
}

/// Latitudes of the sweep, endpoints included.
pub fn sweep_latitudes(lat_min_deg: f64, lat_max_deg: f64, step_deg: f64) -> Vec<f64> {
    let n = ((lat_max_deg - lat_min_deg) / step_deg + 1e-9).floor() as usize;
    (0..=n).map(|i| lat_min_deg + i as f64 * step_deg).collect()
}

/// One bias-only SALAD run per latitude of the configured sweep.
pub fn latitude_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, HarnessError> {
    let s = &cfg.sweep;
    sweep_latitudes(s.lat_min_deg, s.lat_max_deg, s.step_deg)
        .into_par_iter()
        .map(|lat| {
            let mut c = cfg.clone();
            c.earth.latitude_deg = lat;
            c.sensors.bias = true;
            c.sensors.noise = false;
            c.harness.methods = vec![Method::Salad];
            let results = simulate_and_align(&c, c.harness.seed)?;
            let mut row = SweepRow { lat_deg: lat, lat_err_deg: f64::NAN, phi_deg: [f64::NAN; 3], ready: false };
            if let Some(last) = results.last() {
                let e = &last.estimates[0];
                row.ready = e.ready;
                if let (Some(l), Some(c_bn), Some(tr)) = (e.latitude, e.c_bn, last.truth) {
                    row.lat_err_deg = l.to_degrees() - lat;
                    row.phi_deg = misalignment(&c_bn, &tr.c_b_n).map(f64::to_degrees).into();
                }
            }
            Ok(row)
        })
        .collect()
}

/// One Monte-Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub run: usize,
    /// pitch, roll, yaw
    pub center_deg: [f64; 3],
    pub seed: u64,
    /// Final-window RMSE per method; `None` if the method never became ready
    /// in the window.
    pub rmse: Vec<(Method, Option<RmseWindow>)>,
}

impl MonteCarloRun {
    pub fn window(&self, m: Method) -> Option<&RmseWindow> {
        self.rmse.iter().find(|(mm, _)| *mm == m).and_then(|(_, w)| w.as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub ready_runs: usize,
    pub phi_e: ChannelStats,
    pub phi_n: ChannelStats,
    pub phi_u: ChannelStats,
    pub lat: ChannelStats,
    /// Largest single-epoch error over all windows, deg.
    pub max_abs: f64,
}

/// Distribution of `yaw RMSE(newTRIAD) - yaw RMSE(OBA)` over runs, deg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YawDifference {
    pub mean: f64,
    pub std: f64,
    pub max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub runs: Vec<MonteCarloRun>,
    pub methods: Vec<MethodSummary>,
    pub yaw_difference: Option<YawDifference>,
}

/// Configuration of run `run`: a random sway center and its own noise seed.
pub fn monte_carlo_config(cfg: &ExperimentConfig, run: usize) -> ExperimentConfig {
    let base = cfg.harness.seed;
    let centers = NoiseStream::new(base ^ CENTER_STREAM);
    let mc = &cfg.montecarlo;
    let pick = |i: u64, [lo, hi]: [f64; 2]| lo + centers.uniform(3 * run as u64 + i) * (hi - lo);
    let mut c = cfg.clone();
    c.sway.center_deg = [pick(0, mc.pitch_deg), pick(1, mc.roll_deg), pick(2, mc.yaw_deg)];
    c.harness.seed = NoiseStream::new(base).bits(run as u64);
    c
}

pub fn monte_carlo(cfg: &ExperimentConfig, runs: usize) -> Result<MonteCarloReport, HarnessError> {
    if runs == 0 {
        return Err(HarnessError::config("montecarlo.runs", "must be at least 1".into()));
    }
    let [t0, t1] = cfg.harness.rmse_window_s;
    let runs: Vec<MonteCarloRun> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let c = monte_carlo_config(cfg, run);
            let rows = series_rows(&simulate_and_align(&c, c.harness.seed)?);
            let rmse = c.harness.methods.iter().map(|m| (*m, rmse_window(&rows, *m, t0, t1).ok())).collect();
            Ok(MonteCarloRun { run, center_deg: c.sway.center_deg, seed: c.harness.seed, rmse })
        })
        .collect::<Result<_, HarnessError>>()?;

    let methods = cfg
        .harness
        .methods
        .iter()
        .map(|m| {
            let ws: Vec<&RmseWindow> = runs.iter().filter_map(|r| r.window(*m)).collect();
            let stats = |f: fn(&RmseWindow) -> f64| {
                let v: Vec<f64> = ws.iter().map(|w| f(w)).filter(|x| x.is_finite()).collect();
                let (mean, std) = mean_std(&v);
                ChannelStats { mean, std }
            };
            MethodSummary {
                method: *m,
                ready_runs: ws.len(),
                phi_e: stats(|w| w.phi_e),
                phi_n: stats(|w| w.phi_n),
                phi_u: stats(|w| w.phi_u),
                lat: stats(|w| w.lat),
                max_abs: ws.iter().map(|w| w.max_abs).fold(0.0, f64::max),
            }
        })
        .collect();

    let diffs: Vec<f64> = runs
        .iter()
        .filter_map(|r| Some(r.window(Method::NewTriad)?.phi_u - r.window(Method::Oba)?.phi_u))
        .collect();
    let yaw_difference = (!diffs.is_empty()).then(|| {
        let (mean, std) = mean_std(&diffs);
        YawDifference { mean, std, max_abs: diffs.iter().map(|d| d.abs()).fold(0.0, f64::max) }
    });
    Ok(MonteCarloReport { runs, methods, yaw_difference })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_range_includes_endpoints() {
        let l = sweep_latitudes(-85.0, 85.0, 1.0);
        assert_eq!(l.len(), 171);
        assert_eq!(l[0], -85.0);
        assert_eq!(*l.last().unwrap(), 85.0);
        assert_eq!(sweep_latitudes(0.0, 1.0, 0.1).len(), 11);
    }

    #[test]
    fn monte_carlo_centers_are_seeded_and_in_range() {
        let cfg = ExperimentConfig::default();
        for run in 0..50 {
            let a = monte_carlo_config(&cfg, run);
            assert_eq!(a, monte_carlo_config(&cfg, run));
            let [p, r, y] = a.sway.center_deg;
            assert!((-60.0..=60.0).contains(&p) && (-180.0..=180.0).contains(&r) && (0.0..=360.0).contains(&y));
        }
        assert_ne!(monte_carlo_config(&cfg, 0).harness.seed, monte_carlo_config(&cfg, 1).harness.seed);
    }
}
