//! Monte Carlo orchestration: sample initial conditions, run repeated
//! trajectories per condition, and aggregate fidelity statistics with a
//! fixed-order reduction so results are bitwise-deterministic regardless of
//! how the work is scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::control::{make_controller, ControllerKind, ControllerParams};
use crate::error::{Error, Result};
use crate::integrator::simulate_trajectory;
use crate::linalg::Cm;
use crate::model::{check_assumptions, ModelSpec};
use crate::operators::DensityMatrix;
use crate::rng::{stream_rng, STREAM_INIT_STATE, STREAM_TRAJECTORY};

/// How initial states are drawn for each initial-condition index.
#[derive(Debug, Clone, PartialEq)]
pub enum InitScheme {
    /// Haar-random pure state |psi><psi|.
    HaarPure,
    /// Ginibre-induced mixed state G G^dag / Tr[G G^dag].
    GinibreMixed,
    /// The same fixed state for every index.
    Fixed(DensityMatrix),
}

/// Full ensemble protocol description.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    /// Number of distinct initial conditions.
    pub n_initial: usize,
    /// Trajectories per initial condition.
    pub runs_per_initial: usize,
    pub t_final: f64,
    pub dt: f64,
    pub controller: ControllerKind,
    pub params: ControllerParams,
    pub master_seed: u64,
    pub sample_every: usize,
    pub init: InitScheme,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_initial == 0 {
            return Err(Error::DomainError {
                name: "n_initial",
                value: 0.0,
            });
        }
        if self.runs_per_initial == 0 {
            return Err(Error::DomainError {
                name: "runs_per_initial",
                value: 0.0,
            });
        }
        if self.dt <= 0.0 {
            return Err(Error::DomainError {
                name: "dt",
                value: self.dt,
            });
        }
        if self.t_final < self.dt {
            return Err(Error::DomainError {
                name: "t_final",
                value: self.t_final,
            });
        }
        Ok(())
    }

    /// Number of sample rows each trajectory produces.
    pub fn n_samples(&self) -> usize {
        let steps = libm::ceil(self.t_final / self.dt) as usize;
        steps / self.sample_every.max(1) + 1
    }
}

/// Ensemble-averaged output, one entry per sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub sample_times: Vec<f64>,
    pub mean_fidelity: Vec<f64>,
    /// Standard error over the per-initial-condition means.
    pub stderr_fidelity: Vec<f64>,
    /// Mean controller estimate over trajectories where it is defined.
    pub mean_x_estimate: Vec<f64>,
    /// Fraction of trajectories with control active at each sample time.
    pub control_duty_cycle: Vec<f64>,
    pub n_trajectories_total: usize,
}

/// Draw an initial state according to the scheme.
pub fn sample_initial_state(
    scheme: &InitScheme,
    dim: usize,
    rng: &mut impl Rng,
) -> Result<DensityMatrix> {
    if dim < 2 {
        return Err(Error::InvalidDimension { dim });
    }
    match scheme {
        InitScheme::Fixed(rho) => {
            if rho.dim() != dim {
                return Err(Error::InvalidDimension { dim: rho.dim() });
            }
            Ok(rho.clone())
        }
        InitScheme::HaarPure => {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            let mut norm2 = 0.0;
            for e in v.iter_mut() {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                *e = Complex64::new(re, im);
                norm2 += e.norm_sqr();
            }
            let inv = 1.0 / libm::sqrt(norm2);
            let mut m = Cm::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    m[(i, j)] = v[i] * v[j].conj() * inv * inv;
                }
            }
            Ok(DensityMatrix::from_trusted(m))
        }
        InitScheme::GinibreMixed => {
            let mut g = Cm::zeros(dim, dim);
            for e in g.iter_mut() {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                *e = Complex64::new(re, im);
            }
            let gg = &g * g.adjoint();
            let tr = gg.trace().re;
            Ok(DensityMatrix::from_trusted(
                gg * Complex64::new(1.0 / tr, 0.0),
            ))
        }
    }
}

/// Per-initial-condition aggregate: the mean over its `runs_per_initial`
/// trajectories.
#[derive(Debug, Clone)]
pub struct ConditionSummary {
    pub mean_fidelity: Vec<f64>,
    pub mean_x_estimate: Vec<f64>,
    pub mean_control: Vec<f64>,
    /// Final-sample true signal of each run (for convergence classification).
    pub final_x_true: Vec<f64>,
}

/// Run all trajectories of initial-condition index `i`.
///
/// The initial state comes from the stream (master_seed, INIT, i); run j is
/// driven by the stream (master_seed, TRAJ, i, j).
pub fn run_initial_condition(
    spec: &ModelSpec,
    cfg: &EnsembleConfig,
    i: usize,
) -> Result<ConditionSummary> {
    let mut init_rng = stream_rng(cfg.master_seed, &[STREAM_INIT_STATE, i as u64]);
    let rho0 = sample_initial_state(&cfg.init, spec.dim(), &mut init_rng)?;
    let n_samples = cfg.n_samples();
    let mut fid = vec![0.0; n_samples];
    let mut est = vec![0.0; n_samples];
    let mut ctl = vec![0.0; n_samples];
    let mut final_x = Vec::with_capacity(cfg.runs_per_initial);
    let mut controller = make_controller(cfg.controller, spec, &cfg.params)?;
    for j in 0..cfg.runs_per_initial {
        let mut rng = stream_rng(cfg.master_seed, &[STREAM_TRAJECTORY, i as u64, j as u64]);
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
        for k in 0..n_samples {
            fid[k] += rec.fidelity[k];
            let e = rec.x_estimate[k];
            est[k] += if e.is_nan() { 0.0 } else { e };
            ctl[k] += rec.control[k] as f64;
        }
        final_x.push(*rec.x_true.last().unwrap());
    }
    let inv = 1.0 / cfg.runs_per_initial as f64;
    for k in 0..n_samples {
        fid[k] *= inv;
        est[k] *= inv;
        ctl[k] *= inv;
    }
    Ok(ConditionSummary {
        mean_fidelity: fid,
        mean_x_estimate: est,
        mean_control: ctl,
        final_x_true: final_x,
    })
}

/// Deterministic fixed-order reduction of per-condition summaries.
pub fn reduce_summaries(
    cfg: &EnsembleConfig,
    summaries: &[ConditionSummary],
) -> EnsembleResult {
    let n_samples = cfg.n_samples();
    let n = summaries.len();
    let mut mean_fid = vec![0.0; n_samples];
    let mut mean_est = vec![0.0; n_samples];
    let mut duty = vec![0.0; n_samples];
    for s in summaries {
        for k in 0..n_samples {
            mean_fid[k] += s.mean_fidelity[k];
            mean_est[k] += s.mean_x_estimate[k];
            duty[k] += s.mean_control[k];
        }
    }
    let inv = 1.0 / n as f64;
    for k in 0..n_samples {
        mean_fid[k] *= inv;
        mean_est[k] *= inv;
        duty[k] *= inv;
    }
    // Standard error over the per-condition means.
    let mut stderr = vec![0.0; n_samples];
    if n > 1 {
        for k in 0..n_samples {
            let mut ss = 0.0;
            for s in summaries {
                let d = s.mean_fidelity[k] - mean_fid[k];
                ss += d * d;
            }
            stderr[k] = libm::sqrt(ss / ((n - 1) as f64 * n as f64));
        }
    }
    let dt = cfg.dt;
    let se = cfg.sample_every.max(1);
    let sample_times = (0..n_samples).map(|k| (k * se) as f64 * dt).collect();
    EnsembleResult {
        sample_times,
        mean_fidelity: mean_fid,
        stderr_fidelity: stderr,
        mean_x_estimate: mean_est,
        control_duty_cycle: duty,
        n_trajectories_total: n * cfg.runs_per_initial,
    }
}

/// Run the full two-level ensemble protocol sequentially.
///
/// Model assumptions are checked first and the run aborts on failure; the
/// equilibrium-uniqueness check only applies when control can act.
pub fn run_ensemble(spec: &ModelSpec, cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    cfg.validate()?;
    preflight(spec, cfg)?;
    let mut summaries = Vec::with_capacity(cfg.n_initial);
    for i in 0..cfg.n_initial {
        summaries.push(run_initial_condition(spec, cfg, i)?);
    }
    Ok(reduce_summaries(cfg, &summaries))
}

/// Assumption gate shared by the sequential and parallel runners.
pub fn preflight(spec: &ModelSpec, cfg: &EnsembleConfig) -> Result<()> {
    let report = check_assumptions(spec);
    if !report.a1_hermitian.pass {
        return Err(Error::AssumptionViolation { which: "A1" });
    }
    if !report.a2_commute.pass {
        return Err(Error::AssumptionViolation { which: "A2" });
    }
    if !report.a3_spectral.pass {
        return Err(Error::AssumptionViolation { which: "A3" });
    }
    if cfg.controller != ControllerKind::Free && !report.unique_equilibrium {
        return Err(Error::AssumptionViolation {
            which: "unique equilibrium",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::build_qutrit_preset;
    use crate::testutil::test_rng;

    fn small_config(controller: ControllerKind) -> EnsembleConfig {
        EnsembleConfig {
            n_initial: 4,
            runs_per_initial: 2,
            t_final: 0.3,
            dt: 1e-3,
            controller,
            params: ControllerParams::default(),
            master_seed: 2024,
            sample_every: 50,
            init: InitScheme::HaarPure,
        }
    }

    #[test]
    fn haar_states_are_pure_and_normalized() {
        let mut rng = test_rng(1);
        for _ in 0..50 {
            let rho = sample_initial_state(&InitScheme::HaarPure, 3, &mut rng).unwrap();
            let m = rho.matrix();
            assert!((m.trace().re - 1.0).abs() < 1e-12);
            // purity Tr[rho^2] = 1 for a rank-one projector
            let purity = (m * m).trace().re;
            assert!((purity - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_mean_approaches_maximally_mixed() {
        let mut rng = test_rng(2);
        let n = 4000;
        let mut acc = Cm::zeros(3, 3);
        for _ in 0..n {
            acc += sample_initial_state(&InitScheme::HaarPure, 3, &mut rng)
                .unwrap()
                .matrix();
        }
        acc /= Complex64::new(n as f64, 0.0);
        let third = 1.0 / 3.0;
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { third } else { 0.0 };
                assert!((acc[(i, j)].re - expect).abs() < 5e-2);
                assert!(acc[(i, j)].im.abs() < 5e-2);
            }
        }
    }

    #[test]
    fn ginibre_states_are_valid_and_mixed() {
        let mut rng = test_rng(3);
        for _ in 0..20 {
            let rho = sample_initial_state(&InitScheme::GinibreMixed, 3, &mut rng).unwrap();
            let m = rho.matrix();
            assert!((m.trace().re - 1.0).abs() < 1e-12);
            let purity = (m * m).trace().re;
            assert!(purity < 1.0 - 1e-6);
            assert!(purity >= 1.0 / 3.0 - 1e-12);
        }
    }

    #[test]
    fn fixed_scheme_passes_state_through() {
        let rho = DensityMatrix::basis_state(3, 1).unwrap();
        let mut rng = test_rng(4);
        let out =
            sample_initial_state(&InitScheme::Fixed(rho.clone()), 3, &mut rng).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
        assert!(matches!(
            sample_initial_state(&InitScheme::Fixed(rho), 4, &mut rng),
            Err(Error::InvalidDimension { .. })
        ));
    }

    #[test]
    fn free_ensemble_from_target_is_flat() {
        let spec = build_qutrit_preset();
        let mut cfg = small_config(ControllerKind::Free);
        cfg.init = InitScheme::Fixed(DensityMatrix::basis_state(3, 0).unwrap());
        let res = run_ensemble(&spec, &cfg).unwrap();
        assert_eq!(res.n_trajectories_total, 8);
        for k in 0..cfg.n_samples() {
            assert!((res.mean_fidelity[k] - 1.0).abs() < 1e-12);
            assert!(res.stderr_fidelity[k] < 1e-12);
            assert_eq!(res.control_duty_cycle[k], 0.0);
        }
    }

    #[test]
    fn repeated_runs_are_bitwise_identical() {
        let spec = build_qutrit_preset();
        let cfg = small_config(ControllerKind::Windowed { window_k: 20 });
        let a = run_ensemble(&spec, &cfg).unwrap();
        let b = run_ensemble(&spec, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduction_matches_manual_average() {
        let spec = build_qutrit_preset();
        let cfg = small_config(ControllerKind::Ergodic);
        let summaries: Vec<_> = (0..cfg.n_initial)
            .map(|i| run_initial_condition(&spec, &cfg, i).unwrap())
            .collect();
        let res = reduce_summaries(&cfg, &summaries);
        let k = cfg.n_samples() - 1;
        let manual: f64 = summaries.iter().map(|s| s.mean_fidelity[k]).sum::<f64>()
            / cfg.n_initial as f64;
        assert!((res.mean_fidelity[k] - manual).abs() < 1e-15);
        assert!(res.stderr_fidelity[k] >= 0.0);
        assert_eq!(res.sample_times.len(), cfg.n_samples());
        assert!((res.sample_times[k] - cfg.t_final).abs() < 1e-12);
    }

    #[test]
    fn duty_cycle_reflects_activation_delay() {
        // Before tau_s output-based control is forced off; the t = 0 sample
        // therefore always has zero duty cycle.
        let spec = build_qutrit_preset();
        let cfg = small_config(ControllerKind::Ergodic);
        let res = run_ensemble(&spec, &cfg).unwrap();
        assert_eq!(res.control_duty_cycle[0], 0.0);
        for &d in &res.control_duty_cycle {
            assert!((0.0..=1.0).contains(&d));
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small_config(ControllerKind::Free);
        cfg.n_initial = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config(ControllerKind::Free);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config(ControllerKind::Free);
        cfg.t_final = 1e-5;
        assert!(cfg.validate().is_err());
    }
}
