use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use swayalign::aligners::Method;
use swayalign::attmath::euler_to_dcm;
use swayalign::harness::*;

#[derive(Parser)]
#[command(name = "swayalign", version, about = "Swaying-base self-alignment for strapdown inertial navigation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set sim.fs=100`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Shorthand for `--set harness.seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut o = self.overrides.clone();
        if let Some(s) = self.seed {
            o.push(format!("harness.seed={s}"));
        }
        Ok(ExperimentConfig::load(self.config.as_deref(), &o)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the effective configuration as TOML.
    Config {
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic IMU log and its ground truth.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output directory (default: `output.dir`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Align a simulated run or a recorded IMU log and write the error series.
    Align {
        #[command(flatten)]
        common: Common,
        /// IMU CSV to replay instead of simulating.
        #[arg(long)]
        imu: Option<PathBuf>,
        /// Truth CSV matching `--imu` row for row.
        #[arg(long, requires = "imu")]
        truth: Option<PathBuf>,
        /// Series CSV (default: `<output.dir>/series.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bias-only SALAD runs across latitudes.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep CSV (default: `<output.dir>/sweep.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated runs with random sway centers.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Number of runs (default: `montecarlo.runs`).
        #[arg(long)]
        runs: Option<usize>,
        /// Per-run CSV (default: `<output.dir>/montecarlo.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Window RMSE statistics from a series CSV.
    Rmse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        series: PathBuf,
        /// Restrict to one method.
        #[arg(long)]
        method: Option<Method>,
        /// Window start, s (default: `harness.rmse_window_s[0]`).
        #[arg(long)]
        from: Option<f64>,
        /// Window end, s (default: `harness.rmse_window_s[1]`).
        #[arg(long)]
        to: Option<f64>,
    },
}

fn out_path(explicit: Option<PathBuf>, cfg: &ExperimentConfig, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| cfg.output.dir.join(name))
}

fn print_rmse(rows: &[SeriesRow], methods: &[Method], t0: f64, t1: f64) {
    println!("method,count,rmse_e_deg,rmse_n_deg,rmse_u_deg,rmse_lat_deg");
    for m in methods {
        match rmse_window(rows, *m, t0, t1) {
            Ok(w) => println!("{m},{},{:.6e},{:.6e},{:.6e},{:.6e}", w.count, w.phi_e, w.phi_n, w.phi_u, w.lat),
            Err(e) => println!("{m},0,NaN,NaN,NaN,NaN  # {e}"),
        }
    }
}

fn replay(cfg: &ExperimentConfig, imu: &Path, truth: Option<&Path>) -> Result<Vec<SeriesRow>> {
    let samples = read_imu_file(imu)?;
    let truth = match truth {
        Some(p) => {
            let t = read_truth_file(p)?;
            if t.len() != samples.len() {
                bail!("{}: {} truth rows for {} IMU rows", p.display(), t.len(), samples.len());
            }
            Some(t)
        }
        None => None,
    };
    let lat = cfg.latitude();
    let results = align_samples(&AlignOptions::from_config(cfg), &samples, |i| {
        truth.as_ref().map(|t| EpochTruth { c_b_n: euler_to_dcm(&t[i].1), latitude: Some(lat) })
    })?;
    Ok(series_rows(&results))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Config { common } => {
            print!("{}", common.load()?.to_toml_string());
        }
        Command::Simulate { common, out_dir } => {
            let cfg = common.load()?;
            let dir = out_dir.unwrap_or_else(|| cfg.output.dir.clone());
            let (imu, truth) = cfg.simulation(cfg.harness.seed).run()?;
            write_imu_file(&dir.join("imu.csv"), &imu)?;
            write_truth_file(&dir.join("truth.csv"), &truth)?;
            println!("wrote {} samples to {}", imu.len(), dir.display());
        }
        Command::Align { common, imu, truth, out } => {
            let cfg = common.load()?;
            let rows = match imu {
                Some(p) => replay(&cfg, &p, truth.as_deref())?,
                None => run_alignment(&cfg)?,
            };
            let path = out_path(out, &cfg, "series.csv");
            write_series_file(&path, &rows)?;
            let [t0, t1] = cfg.harness.rmse_window_s;
            print_rmse(&rows, &cfg.harness.methods, t0, t1);
        }
        Command::Sweep { common, out } => {
            let cfg = common.load()?;
            let rows = latitude_sweep(&cfg)?;
            let path = out_path(out, &cfg, "sweep.csv");
            write_sweep_file(&path, &rows)?;
            let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.lat_deg.abs() >= 5.0 && r.ready).collect();
            if sel.len() >= 2 {
                let x: Vec<f64> = sel.iter().map(|r| r.lat_deg.abs()).collect();
                let y: Vec<f64> = sel.iter().map(|r| r.lat_err_deg.abs()).collect();
                println!("spearman(|L|, |dL|) over |L| >= 5 deg: {:.4}", spearman(&x, &y));
            }
            println!("{} latitudes, {} ready; wrote {}", rows.len(), rows.iter().filter(|r| r.ready).count(), path.display());
        }
        Command::Montecarlo { common, runs, out } => {
            let cfg = common.load()?;
            let n = runs.unwrap_or(cfg.montecarlo.runs);
            let report = monte_carlo(&cfg, n)?;
            let path = out_path(out, &cfg, "montecarlo.csv");
            write_montecarlo_file(&path, &report.runs)?;
            println!("method,ready_runs,mean_e_deg,std_e_deg,mean_n_deg,std_n_deg,mean_u_deg,std_u_deg,mean_lat_deg,max_abs_deg");
            for s in &report.methods {
                println!(
                    "{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}",
                    s.method, s.ready_runs, s.phi_e.mean, s.phi_e.std, s.phi_n.mean, s.phi_n.std, s.phi_u.mean,
                    s.phi_u.std, s.lat.mean, s.max_abs
                );
            }
            if let Some(d) = report.yaw_difference {
                println!("yaw rmse newtriad - oba: mean {:.6e} std {:.6e} max|.| {:.6e} deg", d.mean, d.std, d.max_abs);
            }
        }
        Command::Rmse { common, series, method, from, to } => {
            let cfg = common.load()?;
            let rows = read_series_file(&series)?;
            let methods: Vec<Method> = match method {
                Some(m) => vec![m],
                None => Method::ALL.into_iter().filter(|m| rows.iter().any(|r| r.method == *m)).collect(),
            };
            let [d0, d1] = cfg.harness.rmse_window_s;
            let (t0, t1) = (from.unwrap_or(d0), to.unwrap_or(d1));
            if !(t1 > t0) {
                bail!("window end {t1} must exceed start {t0}");
            }
            print_rmse(&rows, &methods, t0, t1);
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli).context("swayalign failed") {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
