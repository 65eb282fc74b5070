//! CSV schemas.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces every value bit for bit. Unavailable values are written as
//! `NaN`.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{HarnessError, MonteCarloRun, SeriesRow, SweepRow};
use crate::aligners::Method;
use crate::attmath::{EulerAngles, Vec3};
use crate::propagation::ImuSample;
use crate::simulator::TruthSample;

pub const IMU_HEADER: [&str; 7] = ["t", "gx", "gy", "gz", "ax", "ay", "az"];
pub const TRUTH_HEADER: [&str; 4] = ["t", "pitch", "roll", "yaw"];
pub const SERIES_HEADER: [&str; 7] = ["t", "method", "phi_e_deg", "phi_n_deg", "phi_u_deg", "lat_err_deg", "ready"];
pub const SWEEP_HEADER: [&str; 6] = ["lat_deg", "lat_err_deg", "phi_e_deg", "phi_n_deg", "phi_u_deg", "ready"];
pub const MONTECARLO_HEADER: [&str; 10] = [
    "run",
    "method",
    "pitch_center_deg",
    "roll_center_deg",
    "yaw_center_deg",
    "rmse_e_deg",
    "rmse_n_deg",
    "rmse_u_deg",
    "rmse_lat_deg",
    "ready",
];

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, HarnessError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| HarnessError::io(path, e))
}

fn write_rows<W: Write>(
    out: W,
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<(), HarnessError> {
    let io_err = |e: csv::Error| HarnessError::io(path, e.into());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(&r).map_err(io_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_imu_csv<W: Write>(out: W, samples: &[ImuSample]) -> Result<(), HarnessError> {
    let rows = samples.iter().map(|s| {
        [s.t, s.gyro.x, s.gyro.y, s.gyro.z, s.accel.x, s.accel.y, s.accel.z].into_iter().map(num).collect()
    });
    write_rows(out, Path::new("<imu>"), &IMU_HEADER, rows)
}

pub fn write_imu_file(path: &Path, samples: &[ImuSample]) -> Result<(), HarnessError> {
    write_imu_csv(create(path)?, samples)
}

pub fn write_truth_file(path: &Path, truth: &[TruthSample]) -> Result<(), HarnessError> {
    let rows = truth.iter().map(|s| [s.t, s.euler.pitch, s.euler.roll, s.euler.yaw].into_iter().map(num).collect());
    write_rows(create(path)?, path, &TRUTH_HEADER, rows)
}

pub fn write_series_file(path: &Path, rows: &[SeriesRow]) -> Result<(), HarnessError> {
    let it = rows.iter().map(|r| {
        vec![
            num(r.t),
            r.method.to_string(),
            num(r.phi_deg[0]),
            num(r.phi_deg[1]),
            num(r.phi_deg[2]),
            num(r.lat_err_deg),
            flag(r.ready).to_string(),
        ]
    });
    write_rows(create(path)?, path, &SERIES_HEADER, it)
}

pub fn write_sweep_file(path: &Path, rows: &[SweepRow]) -> Result<(), HarnessError> {
    let it = rows.iter().map(|r| {
        vec![
            num(r.lat_deg),
            num(r.lat_err_deg),
            num(r.phi_deg[0]),
            num(r.phi_deg[1]),
            num(r.phi_deg[2]),
            flag(r.ready).to_string(),
        ]
    });
    write_rows(create(path)?, path, &SWEEP_HEADER, it)
}

pub fn write_montecarlo_file(path: &Path, runs: &[MonteCarloRun]) -> Result<(), HarnessError> {
    let it = runs.iter().flat_map(|run| {
        run.rmse.iter().map(move |(m, w)| {
            let c = run.center_deg;
            let (e, n, u, lat, ready) = match w {
                Some(w) => (w.phi_e, w.phi_n, w.phi_u, w.lat, true),
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, false),
            };
            vec![
                run.run.to_string(),
                m.to_string(),
                num(c[0]),
                num(c[1]),
                num(c[2]),
                num(e),
                num(n),
                num(u),
                num(lat),
                flag(ready).to_string(),
            ]
        })
    });
    write_rows(create(path)?, path, &MONTECARLO_HEADER, it)
}

/// Reads records after checking the header; hands each record and its line
/// number to `parse`.
fn read_records<R: Read, T>(
    input: R,
    path: &Path,
    header: &[&str],
    mut parse: impl FnMut(&csv::StringRecord, u64) -> Result<T, HarnessError>,
) -> Result<Vec<T>, HarnessError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut records = rdr.records();
    let line_of = |e: &csv::Error| e.position().map_or(0, |p| p.line());
    match records.next() {
        None => return Err(HarnessError::parse(path, 1, format!("missing header `{}`", header.join(",")))),
        Some(Err(e)) => return Err(HarnessError::parse(path, line_of(&e), e.to_string())),
        Some(Ok(h)) => {
            if h.iter().ne(header.iter().copied()) {
                let got: Vec<&str> = h.iter().collect();
                return Err(HarnessError::parse(
                    path,
                    1,
                    format!("expected header `{}`, found `{}`", header.join(","), got.join(",")),
                ));
            }
        }
    }
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| HarnessError::parse(path, line_of(&e), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != header.len() {
            return Err(HarnessError::parse(path, line, format!("expected {} fields, found {}", header.len(), rec.len())));
        }
        out.push(parse(&rec, line)?);
    }
    Ok(out)
}

fn field(rec: &csv::StringRecord, i: usize, path: &Path, line: u64, header: &[&str]) -> Result<f64, HarnessError> {
    rec[i].parse::<f64>().map_err(|_| HarnessError::parse(path, line, format!("bad number `{}` in column `{}`", &rec[i], header[i])))
}

fn check_monotone(path: &Path, line: u64, t: f64, last: &mut Option<f64>) -> Result<(), HarnessError> {
    if !t.is_finite() {
        return Err(HarnessError::parse(path, line, format!("time {t} is not finite")));
    }
    if let Some(prev) = *last {
        if !(t > prev) {
            return Err(HarnessError::parse(path, line, format!("time {t} does not increase (previous {prev})")));
        }
    }
    *last = Some(t);
    Ok(())
}

pub fn read_imu_csv<R: Read>(input: R, path: &Path) -> Result<Vec<ImuSample>, HarnessError> {
    let mut last = None;
    read_records(input, path, &IMU_HEADER, |rec, line| {
        let mut v = [0.0; 7];
        for (i, x) in v.iter_mut().enumerate() {
            *x = field(rec, i, path, line, &IMU_HEADER)?;
        }
        if v[1..].iter().any(|x| !x.is_finite()) {
            return Err(HarnessError::parse(path, line, "non-finite sensor value"));
        }
        check_monotone(path, line, v[0], &mut last)?;
        Ok(ImuSample::new(v[0], Vec3::new(v[1], v[2], v[3]), Vec3::new(v[4], v[5], v[6])))
    })
}

pub fn read_imu_file(path: &Path) -> Result<Vec<ImuSample>, HarnessError> {
    read_imu_csv(File::open(path).map_err(|e| HarnessError::io(path, e))?, path)
}

/// Truth rows as `(t, euler)`.
pub fn read_truth_file(path: &Path) -> Result<Vec<(f64, EulerAngles)>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut last = None;
    read_records(file, path, &TRUTH_HEADER, |rec, line| {
        let v: Vec<f64> = (0..4).map(|i| field(rec, i, path, line, &TRUTH_HEADER)).collect::<Result<_, _>>()?;
        check_monotone(path, line, v[0], &mut last)?;
        Ok((v[0], EulerAngles::new(v[1], v[2], v[3])))
    })
}

pub fn read_series_file(path: &Path) -> Result<Vec<SeriesRow>, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    read_records(file, path, &SERIES_HEADER, |rec, line| {
        let f = |i| field(rec, i, path, line, &SERIES_HEADER);
        let method: Method = rec[1].parse().map_err(|e: String| HarnessError::parse(path, line, e))?;
        let ready = match &rec[6] {
            "1" => true,
            "0" => false,
            other => return Err(HarnessError::parse(path, line, format!("bad ready flag `{other}`"))),
        };
        Ok(SeriesRow { t: f(0)?, method, phi_deg: [f(2)?, f(3)?, f(4)?], lat_err_deg: f(5)?, ready })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<ImuSample>, HarnessError> {
        read_imu_csv(text.as_bytes(), Path::new("mem.csv"))
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse("t,gx,gy,gz,ax,ay,az\n").unwrap().is_empty());
        assert!(parse("").is_err());
        assert!(parse("t,gx,gy,gz,ax,ay\n").is_err());
    }

    #[test]
    fn short_row_reports_line() {
        let text = "t,gx,gy,gz,ax,ay,az\n0,0,0,0,0,0,9.8\n0.1,0,0,0,0,9.8\n";
        match parse(text) {
            Err(HarnessError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("7"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_number_and_time_order() {
        let text = "t,gx,gy,gz,ax,ay,az\n0,0,0,x,0,0,9.8\n";
        assert!(matches!(parse(text), Err(HarnessError::Parse { line: 2, .. })));
        let text = "t,gx,gy,gz,ax,ay,az\n0.2,0,0,0,0,0,9.8\n0.1,0,0,0,0,0,9.8\n";
        assert!(matches!(parse(text), Err(HarnessError::Parse { line: 3, .. })));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let samples: Vec<ImuSample> = (0..100)
            .map(|k| {
                let x = k as f64;
                ImuSample::new(x / 3.0, Vec3::new(x.sin() * 1e-3, -x.cos() / 7.0, 1e-300 * x), Vec3::new(0.1 / 3.0, x.exp(), -9.78))
            })
            .collect();
        let mut buf = Vec::new();
        write_imu_csv(&mut buf, &samples).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), samples);
    }
}
