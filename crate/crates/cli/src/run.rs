//! Parallel ensemble execution and CSV emission.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use qfc_core::control::make_controller;
use qfc_core::ensemble::{
    preflight, reduce_summaries, run_initial_condition, sample_initial_state, EnsembleConfig,
    EnsembleResult,
};
use qfc_core::integrator::{simulate_trajectory, TrajectoryRecord};
use qfc_core::model::ModelSpec;
use qfc_core::rng::{stream_rng, STREAM_INIT_STATE, STREAM_TRAJECTORY};

/// Run the ensemble with one rayon task per initial condition.
///
/// Per-condition work is independently seeded and the reduction runs over
/// the collected results in index order, so the output is bitwise identical
/// to the sequential runner no matter how many workers execute it.
pub fn run_ensemble_parallel(
    spec: &ModelSpec,
    cfg: &EnsembleConfig,
) -> qfc_core::Result<EnsembleResult> {
    cfg.validate()?;
    preflight(spec, cfg)?;
    let summaries = (0..cfg.n_initial)
        .into_par_iter()
        .map(|i| run_initial_condition(spec, cfg, i))
        .collect::<qfc_core::Result<Vec<_>>>()?;
    Ok(reduce_summaries(cfg, &summaries))
}

/// Fixed-format float with well over twelve significant digits, stable
/// across runs.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the ensemble averages as `ensemble.csv`.
pub fn write_ensemble_csv(path: &Path, res: &EnsembleResult) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("t,mean_fidelity,stderr_fidelity,mean_x_estimate,control_duty_cycle\n");
    for k in 0..res.sample_times.len() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(res.sample_times[k]),
            fmt_f64(res.mean_fidelity[k]),
            fmt_f64(res.stderr_fidelity[k]),
            fmt_f64(res.mean_x_estimate[k]),
            fmt_f64(res.control_duty_cycle[k]),
        ));
    }
    fs::write(path, out)
}

fn write_trajectory_csv(path: &Path, rec: &TrajectoryRecord) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str("t,fidelity,x_true,x_estimate,control,y_cumulative\n");
    for k in 0..rec.sample_times.len() {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(rec.sample_times[k]),
            fmt_f64(rec.fidelity[k]),
            fmt_f64(rec.x_true[k]),
            fmt_f64(rec.x_estimate[k]),
            rec.control[k],
            fmt_f64(rec.y_cumulative[k]),
        ));
    }
    fs::write(path, out)
}

/// Re-simulate every trajectory from its own RNG stream and dump it to
/// `trajectories/traj_<i>_<j>.csv`. The streams are the same ones the
/// ensemble runner uses, so the dumped records match the aggregated run
/// exactly.
pub fn dump_trajectories(
    spec: &ModelSpec,
    cfg: &EnsembleConfig,
    dir: &Path,
) -> Result<(), Box<dyn std::error::Error>> {
    let traj_dir = dir.join("trajectories");
    fs::create_dir_all(&traj_dir)?;
    for i in 0..cfg.n_initial {
        let mut init_rng = stream_rng(cfg.master_seed, &[STREAM_INIT_STATE, i as u64]);
        let rho0 = sample_initial_state(&cfg.init, spec.dim(), &mut init_rng)?;
        let mut controller = make_controller(cfg.controller, spec, &cfg.params)?;
        for j in 0..cfg.runs_per_initial {
            let mut rng =
                stream_rng(cfg.master_seed, &[STREAM_TRAJECTORY, i as u64, j as u64]);
            let rec = simulate_trajectory(
                spec,
                controller.as_mut(),
                &rho0,
                cfg.t_final,
                cfg.dt,
                &mut rng,
                cfg.sample_every,
                format!("seed={} i={} j={}", cfg.master_seed, i, j),
            )?;
            write_trajectory_csv(&traj_dir.join(format!("traj_{i}_{j}.csv")), &rec)?;
        }
    }
    Ok(())
}

/// Emit a minimal gnuplot stub next to the data.
pub fn write_plot_stub(dir: &Path) -> std::io::Result<()> {
    let mut f = fs::File::create(dir.join("plot.gp"))?;
    writeln!(f, "set datafile separator ','")?;
    writeln!(f, "set key autotitle columnhead")?;
    writeln!(f, "set xlabel 't'")?;
    writeln!(f, "set ylabel 'mean fidelity'")?;
    writeln!(f, "plot 'ensemble.csv' using 1:2 with lines")?;
    writeln!(f, "pause -1")?;
    Ok(())
}
