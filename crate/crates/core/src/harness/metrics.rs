use super::{HarnessError, SeriesRow};
use crate::aligners::Method;

/// Root-mean-square errors over a time window, deg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseWindow {
    pub method: Method,
    pub t_start: f64,
    pub t_end: f64,
    pub phi_e: f64,
    pub phi_n: f64,
    pub phi_u: f64,
    /// NaN when no latitude error is available.
    pub lat: f64,
    /// Largest single-epoch misalignment component, deg.
    pub max_abs: f64,
    pub count: usize,
}

/// RMSE of each channel over ready rows of `method` with `t` in
/// `[t_start, t_end]`.
pub fn rmse_window(rows: &[SeriesRow], method: Method, t_start: f64, t_end: f64) -> Result<RmseWindow, HarnessError> {
    if !(t_end > t_start) {
        return Err(HarnessError::config("rmse window", format!("end {t_end} must exceed start {t_start}")));
    }
    let tol = 1e-9 * t_end.abs().max(1.0);
    let sel: Vec<&SeriesRow> = rows
        .iter()
        .filter(|r| r.method == method && r.ready && r.t >= t_start - tol && r.t <= t_end + tol)
        .filter(|r| r.phi_deg.iter().all(|p| p.is_finite()))
        .collect();
    if sel.is_empty() {
        return Err(HarnessError::EmptyWindow { method: method.to_string(), t_start, t_end });
    }
    let rms = |f: &dyn Fn(&SeriesRow) -> f64| {
        let vals: Vec<f64> = sel.iter().map(|r| f(r)).filter(|v| v.is_finite()).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            (vals.iter().map(|v| v * v).sum::<f64>() / vals.len() as f64).sqrt()
        }
    };
    Ok(RmseWindow {
        method,
        t_start,
        t_end,
        phi_e: rms(&|r| r.phi_deg[0]),
        phi_n: rms(&|r| r.phi_deg[1]),
        phi_u: rms(&|r| r.phi_deg[2]),
        lat: rms(&|r| r.lat_err_deg),
        max_abs: sel.iter().flat_map(|r| r.phi_deg).map(f64::abs).fold(0.0, f64::max),
        count: sel.len(),
    })
}

/// Sample mean and standard deviation (n - 1 denominator).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, _) = mean_std(&rx);
    let (my, _) = mean_std(&ry);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
