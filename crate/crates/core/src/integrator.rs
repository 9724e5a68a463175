//! Positivity-preserving integration of the controlled stochastic master
//! equation and generation of the homodyne measurement record.
//!
//! Each step applies the Kraus-form update
//! `M = I + (-i H_eff - L^2 / 2) dt + L dy`, `rho' = M rho M^dag / Tr[...]`,
//! which keeps the state exactly trace-one and positive semidefinite by
//! construction.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::control::Controller;
use crate::error::{Error, Result};
use crate::linalg::{self, Cm};
use crate::model::ModelSpec;
use crate::operators::{DensityMatrix, HermitianOperator};

/// Outcome of a single integration step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub rho_next: DensityMatrix,
    /// Measurement increment dy = 2 Tr[L rho] dt + dW.
    pub dy: f64,
    /// Drift signal 2 Tr[L rho] evaluated before the step.
    pub x_true: f64,
}

/// One positivity-preserving step of the stochastic master equation.
///
/// `dw` is a single Gaussian increment of variance `dt`; the same noise
/// realization drives both the state update and the measurement record.
pub fn rouchon_step(
    h_eff: &HermitianOperator,
    l: &HermitianOperator,
    rho: &DensityMatrix,
    dt: f64,
    dw: f64,
) -> Result<StepResult> {
    if dt <= 0.0 {
        return Err(Error::DomainError {
            name: "dt",
            value: dt,
        });
    }
    if h_eff.dim() != l.dim() || l.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: h_eff.dim(),
            found: l.dim().max(rho.dim()),
        });
    }
    let mut engine = StepEngine::new(h_eff.matrix(), &Cm::zeros(l.dim(), l.dim()), l.matrix(), dt);
    let mut state = rho.matrix().clone();
    let (dy, x_true) = engine.step(&mut state, 0, dw)?;
    Ok(StepResult {
        rho_next: DensityMatrix::from_trusted(state),
        dy,
        x_true,
    })
}

/// Reusable workspace for the hot loop: the two deterministic Kraus parts
/// (control off / on) are precomputed, and all per-step products go through
/// preallocated buffers.
pub(crate) struct StepEngine {
    /// K_f = I + (-i (H0 + f F0) - L^2 / 2) dt, for f = 0, 1.
    k: [Cm; 2],
    l: Cm,
    dt: f64,
    m: Cm,
    tmp: Cm,
    next: Cm,
}

impl StepEngine {
    /// `h0` and `h1` are the effective Hamiltonians with control off and on.
    pub fn new(h0: &Cm, f0: &Cm, l: &Cm, dt: f64) -> Self {
        let n = l.nrows();
        let ident = Cm::identity(n, n);
        let l2_half = (l * l).scale(0.5);
        let minus_i_dt = Complex64::new(0.0, -dt);
        let k0 = &ident + h0 * minus_i_dt - l2_half.scale(dt);
        let k1 = &ident + (h0 + f0) * minus_i_dt - l2_half.scale(dt);
        StepEngine {
            k: [k0, k1],
            l: l.clone(),
            dt,
            m: Cm::zeros(n, n),
            tmp: Cm::zeros(n, n),
            next: Cm::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Advance `rho` in place; returns (dy, x_true).
    pub fn step(&mut self, rho: &mut Cm, f: usize, dw: f64) -> Result<(f64, f64)> {
        let x_true = 2.0 * linalg::trace_prod_re(&self.l, rho);
        let dy = x_true * self.dt + dw;
        // M = K_f + dy L
        self.m.copy_from(&self.k[f]);
        let n = self.dim();
        let dy_c = Complex64::new(dy, 0.0);
        for i in 0..n {
            for j in 0..n {
                self.m[(i, j)] += dy_c * self.l[(i, j)];
            }
        }
        // next = M rho M^dag
        self.m.mul_to(rho, &mut self.tmp);
        self.tmp.mul_to(&self.m.adjoint(), &mut self.next);
        let norm = linalg::trace_re(&self.next);
        if norm < 1e-14 {
            return Err(Error::DegenerateNormalization { norm });
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        for e in self.next.iter_mut() {
            *e *= inv;
        }
        rho.copy_from(&self.next);
        Ok((dy, x_true))
    }
}

/// Per-step and sampled per-trajectory output.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub sample_times: Vec<f64>,
    /// Population of the target eigenspace at each sample.
    pub fidelity: Vec<f64>,
    /// True drift signal 2 Tr[L rho] at each sample.
    pub x_true: Vec<f64>,
    /// Controller estimate at each sample (NaN when undefined).
    pub x_estimate: Vec<f64>,
    /// Control value f at each sample.
    pub control: Vec<u8>,
    /// Cumulative measurement record y at each sample.
    pub y_cumulative: Vec<f64>,
    /// Identifier of the RNG stream that drove this trajectory.
    pub seed_info: String,
}

/// Integrate one closed-loop trajectory.
///
/// Control is strictly causal: the control applied over step k is computed
/// from the measurement record up to step k - 1, so `dy_k` never influences
/// `f_k`. The controller sees each `(dy, dt)` pair after the step; only the
/// ideal controller additionally receives the state.
pub fn simulate_trajectory(
    spec: &ModelSpec,
    controller: &mut dyn Controller,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
    rng: &mut impl rand::Rng,
    sample_every: usize,
    seed_info: String,
) -> Result<TrajectoryRecord> {
    if dt <= 0.0 || t_final < dt {
        return Err(Error::DomainError {
            name: "t_final/dt",
            value: t_final,
        });
    }
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho0.dim(),
        });
    }
    let sample_every = sample_every.max(1);
    let steps = libm::ceil(t_final / dt) as usize;
    let sqrt_dt = libm::sqrt(dt);
    let target = spec.target_projector().clone();

    let mut engine = StepEngine::new(spec.h0.matrix(), spec.f0.matrix(), spec.l.matrix(), dt);
    let mut rho = rho0.matrix().clone();
    let mut y_cum = 0.0;

    let n_samples = steps / sample_every + 1;
    let mut rec = TrajectoryRecord {
        sample_times: Vec::with_capacity(n_samples),
        fidelity: Vec::with_capacity(n_samples),
        x_true: Vec::with_capacity(n_samples),
        x_estimate: Vec::with_capacity(n_samples),
        control: Vec::with_capacity(n_samples),
        y_cumulative: Vec::with_capacity(n_samples),
        seed_info,
    };

    let record =
        |t: f64, rho: &Cm, f: u8, x_est: f64, y: f64, rec: &mut TrajectoryRecord| {
            rec.sample_times.push(t);
            rec.fidelity.push(linalg::trace_prod_re(&target, rho));
            rec.x_true.push(2.0 * linalg::trace_prod_re(spec.l.matrix(), rho));
            rec.x_estimate.push(x_est);
            rec.control.push(f);
            rec.y_cumulative.push(y);
        };

    controller.reset();
    record(0.0, &rho, controller_f(controller)?, controller.estimate(), y_cum, &mut rec);

    for k in 0..steps {
        let f = controller_f(controller)?;
        let dw: f64 = rng.sample::<f64, _>(rand_distr::StandardNormal) * sqrt_dt;
        let (dy, _x) = engine.step(&mut rho, f as usize, dw)?;
        y_cum += dy;
        controller.observe(dy, dt, Some(&rho));
        if (k + 1) % sample_every == 0 {
            record(
                (k + 1) as f64 * dt,
                &rho,
                controller_f(controller)?,
                controller.estimate(),
                y_cum,
                &mut rec,
            );
        }
    }

    Ok(rec)
}

fn controller_f(controller: &dyn Controller) -> Result<u8> {
    let f = controller.current_f();
    if f == 0.0 {
        Ok(0)
    } else if f == 1.0 {
        Ok(1)
    } else {
        Err(Error::ControllerFault { value: f })
    }
}
