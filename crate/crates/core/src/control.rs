//! The switching feedback law and its signal sources: the ideal expectation
//! signal, the ergodic time-averaged estimate, and the windowed moving
//! average. All estimates feed the same hysteresis rule.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, Cm};
use crate::model::{Mode, ModelSpec};

/// Inverse CDF of the standard normal distribution.
///
/// Acklam's rational approximation refined with one Halley step against
/// erfc, giving near machine precision over (0, 1).
pub fn norm_ppf(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::DomainError {
            name: "p",
            value: p,
        });
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement: e = Phi(x) - p, using Phi(x) = erfc(-x/sqrt2)/2.
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * libm::sqrt(2.0 * core::f64::consts::PI) * libm::exp(0.5 * x * x);
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Activation delay tau_s = [Phi^{-1}((1 + beta)/2) / epsilon]^2: the first
/// time at which the noise term W_t / t stays below epsilon with probability
/// at least beta.
pub fn compute_tau_s(beta: f64, epsilon: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::DomainError {
            name: "beta",
            value: beta,
        });
    }
    if epsilon <= 0.0 {
        return Err(Error::DomainError {
            name: "epsilon",
            value: epsilon,
        });
    }
    let q = norm_ppf((1.0 + beta) / 2.0)?;
    let r = q / epsilon;
    Ok(r * r)
}

/// Switching thresholds on the drift signal x = 2 Tr[L rho].
///
/// Cooling: switch on at `2 delta - gamma + 2 lambda_1`, off at
/// `2 delta - 2 gamma + 2 lambda_1`. Heating flips the inequalities, with
/// delta and gamma both negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HysteresisThresholds {
    /// Signal level at which control switches on.
    pub on: f64,
    /// Signal level at which control switches off.
    pub off: f64,
    pub gamma: f64,
    pub mode: Mode,
}

impl HysteresisThresholds {
    /// Build thresholds from the model's gap and target eigenvalue.
    ///
    /// `gamma` must lie in (0, delta) for cooling or (delta, 0) for heating.
    pub fn from_model(spec: &ModelSpec, gamma: f64) -> Result<Self> {
        let delta = spec.gap();
        let lambda = spec.target_eigenvalue();
        match spec.mode {
            Mode::Cooling => {
                if !(gamma > 0.0 && gamma < delta) {
                    return Err(Error::InvalidGamma {
                        gamma,
                        low: 0.0,
                        high: delta,
                    });
                }
            }
            Mode::Heating => {
                if !(gamma > delta && gamma < 0.0) {
                    return Err(Error::InvalidGamma {
                        gamma,
                        low: delta,
                        high: 0.0,
                    });
                }
            }
        }
        Ok(HysteresisThresholds {
            on: 2.0 * delta - gamma + 2.0 * lambda,
            off: 2.0 * delta - 2.0 * gamma + 2.0 * lambda,
            gamma,
            mode: spec.mode,
        })
    }
}

/// The hysteresis latch: on/off thresholds with in-band memory.
#[derive(Debug, Clone)]
pub struct Hysteresis {
    pub thresholds: HysteresisThresholds,
    latch: u8,
    initialized: bool,
}

impl Hysteresis {
    pub fn new(thresholds: HysteresisThresholds) -> Self {
        Hysteresis {
            thresholds,
            latch: 0,
            initialized: false,
        }
    }

    pub fn reset(&mut self) {
        self.latch = 0;
        self.initialized = false;
    }

    /// Feed a signal value; returns the control decision and updates the
    /// latch. Inside the band the previous decision is kept; on the very
    /// first sample an in-band signal defaults to "off".
    pub fn update(&mut self, x: f64) -> u8 {
        let t = &self.thresholds;
        let f = match t.mode {
            Mode::Cooling => {
                if x >= t.on {
                    1
                } else if x <= t.off {
                    0
                } else {
                    self.latch
                }
            }
            Mode::Heating => {
                if x <= t.on {
                    1
                } else if x >= t.off {
                    0
                } else {
                    self.latch
                }
            }
        };
        self.latch = f;
        self.initialized = true;
        f
    }

    pub fn current(&self) -> u8 {
        self.latch
    }
}

/// Compute the ideal drift signal x = 2 Tr[L rho].
pub fn ideal_signal(l: &Cm, rho: &Cm) -> Result<f64> {
    if l.nrows() != rho.nrows() {
        return Err(Error::DimensionMismatch {
            expected: l.nrows(),
            found: rho.nrows(),
        });
    }
    Ok(2.0 * linalg::trace_prod_re(l, rho))
}

/// A feedback controller driven step by step by the measurement record.
///
/// The simulation loop calls `current_f()` before each step (strict
/// causality: the decision is a function of the record up to the previous
/// step) and `observe()` after it. `rho` is only available to the ideal
/// controller; output-based controllers must ignore it.
pub trait Controller {
    fn reset(&mut self);
    fn observe(&mut self, dy: f64, dt: f64, rho: Option<&Cm>);
    fn current_f(&self) -> f64;
    /// The controller's current signal estimate (NaN when undefined).
    fn estimate(&self) -> f64;
}

/// Which signal source drives the switching law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ControllerKind {
    /// No control at all (open loop).
    Free,
    /// Ideal drift signal x_t = 2 Tr[L rho_t].
    Ideal,
    /// Ergodic estimate y_t / t.
    Ergodic,
    /// Moving-average estimate over a trailing window of `window_k` samples.
    Windowed { window_k: usize },
}

/// Tunable controller parameters with paper-calibrated defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    /// Hysteresis width parameter; defaults to delta / 2 when `None`.
    pub gamma: Option<f64>,
    /// Confidence level in the activation-delay rule.
    pub beta: f64,
    /// Noise threshold in the activation-delay rule; defaults to |delta|
    /// when `None`.
    pub epsilon: Option<f64>,
    /// Override the computed activation delay.
    pub tau_s_override: Option<f64>,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            gamma: None,
            beta: 0.6,
            epsilon: None,
            tau_s_override: None,
        }
    }
}

/// Open-loop "controller": f is identically zero.
pub struct FreeController;

impl Controller for FreeController {
    fn reset(&mut self) {}
    fn observe(&mut self, _dy: f64, _dt: f64, _rho: Option<&Cm>) {}
    fn current_f(&self) -> f64 {
        0.0
    }
    fn estimate(&self) -> f64 {
        f64::NAN
    }
}

/// Benchmark controller reading the true drift signal off the state.
pub struct IdealController {
    l: Cm,
    hysteresis: Hysteresis,
    last_x: f64,
    has_signal: bool,
}

impl IdealController {
    pub fn new(l: Cm, thresholds: HysteresisThresholds) -> Self {
        IdealController {
            l,
            hysteresis: Hysteresis::new(thresholds),
            last_x: f64::NAN,
            has_signal: false,
        }
    }
}

impl Controller for IdealController {
    fn reset(&mut self) {
        self.hysteresis.reset();
        self.last_x = f64::NAN;
        self.has_signal = false;
    }

    fn observe(&mut self, _dy: f64, _dt: f64, rho: Option<&Cm>) {
        if let Some(rho) = rho {
            let x = 2.0 * linalg::trace_prod_re(&self.l, rho);
            self.last_x = x;
            self.has_signal = true;
            self.hysteresis.update(x);
        }
    }

    fn current_f(&self) -> f64 {
        self.hysteresis.current() as f64
    }

    fn estimate(&self) -> f64 {
        self.last_x
    }
}

/// Output-based controller using the ergodic estimate y_t / t, gated off
/// until the activation delay tau_s has elapsed.
pub struct ErgodicController {
    hysteresis: Hysteresis,
    tau_s: f64,
    y_total: f64,
    t_now: f64,
}

impl ErgodicController {
    pub fn new(thresholds: HysteresisThresholds, tau_s: f64) -> Self {
        ErgodicController {
            hysteresis: Hysteresis::new(thresholds),
            tau_s,
            y_total: 0.0,
            t_now: 0.0,
        }
    }

    /// Whether the activation delay has elapsed.
    pub fn active(&self) -> bool {
        self.t_now >= self.tau_s
    }
}

impl Controller for ErgodicController {
    fn reset(&mut self) {
        self.hysteresis.reset();
        self.y_total = 0.0;
        self.t_now = 0.0;
    }

    fn observe(&mut self, dy: f64, dt: f64, _rho: Option<&Cm>) {
        self.y_total += dy;
        self.t_now += dt;
        if self.active() {
            let x_hat = self.y_total / self.t_now;
            self.hysteresis.update(x_hat);
        }
    }

    fn current_f(&self) -> f64 {
        if self.active() {
            self.hysteresis.current() as f64
        } else {
            0.0
        }
    }

    fn estimate(&self) -> f64 {
        if self.t_now > 0.0 {
            self.y_total / self.t_now
        } else {
            f64::NAN
        }
    }
}

/// Output-based controller using a trailing moving average of the output
/// increments. Until the window fills it coincides with the ergodic
/// estimate; the same activation delay applies.
pub struct WindowedController {
    hysteresis: Hysteresis,
    tau_s: f64,
    window: Vec<f64>,
    head: usize,
    filled: usize,
    sum: f64,
    inserts_since_rebuild: usize,
    t_now: f64,
    dt_window: f64,
}

impl WindowedController {
    /// `capacity` is the window length in samples (k), so the window covers
    /// `k * dt` time units.
    pub fn new(thresholds: HysteresisThresholds, tau_s: f64, capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::DomainError {
                name: "window_k",
                value: 0.0,
            });
        }
        Ok(WindowedController {
            hysteresis: Hysteresis::new(thresholds),
            tau_s,
            window: vec![0.0; capacity],
            head: 0,
            filled: 0,
            sum: 0.0,
            inserts_since_rebuild: 0,
            t_now: 0.0,
            dt_window: 0.0,
        })
    }

    pub fn active(&self) -> bool {
        self.t_now >= self.tau_s
    }

    fn x_hat(&self) -> f64 {
        let span = if self.filled < self.window.len() {
            self.t_now
        } else {
            self.dt_window
        };
        if span > 0.0 {
            self.sum / span
        } else {
            f64::NAN
        }
    }
}

impl Controller for WindowedController {
    fn reset(&mut self) {
        self.hysteresis.reset();
        self.window.iter_mut().for_each(|w| *w = 0.0);
        self.head = 0;
        self.filled = 0;
        self.sum = 0.0;
        self.inserts_since_rebuild = 0;
        self.t_now = 0.0;
        self.dt_window = 0.0;
    }

    fn observe(&mut self, dy: f64, dt: f64, _rho: Option<&Cm>) {
        let k = self.window.len();
        let evicted = self.window[self.head];
        self.window[self.head] = dy;
        self.head = (self.head + 1) % k;
        if self.filled < k {
            self.filled += 1;
        }
        self.sum += dy - evicted;
        self.t_now += dt;
        self.dt_window = dt * k as f64;
        // Periodically recompute the running sum exactly to cap drift from
        // the incremental add/subtract updates.
        self.inserts_since_rebuild += 1;
        if self.inserts_since_rebuild >= k {
            self.inserts_since_rebuild = 0;
            self.sum = self.window[..self.filled].iter().sum();
        }
        if self.active() {
            let x_hat = self.x_hat();
            self.hysteresis.update(x_hat);
        }
    }

    fn current_f(&self) -> f64 {
        if self.active() {
            self.hysteresis.current() as f64
        } else {
            0.0
        }
    }

    fn estimate(&self) -> f64 {
        self.x_hat()
    }
}

/// Build a controller of the requested kind for a model.
///
/// Unset parameters take the documented defaults: gamma = delta / 2,
/// epsilon = |delta|, and tau_s computed from (beta, epsilon).
pub fn make_controller(
    kind: ControllerKind,
    spec: &ModelSpec,
    params: &ControllerParams,
) -> Result<Box<dyn Controller + Send>> {
    if let ControllerKind::Free = kind {
        return Ok(Box::new(FreeController));
    }
    let delta = spec.gap();
    let gamma = params.gamma.unwrap_or(delta / 2.0);
    let thresholds = HysteresisThresholds::from_model(spec, gamma)?;
    match kind {
        ControllerKind::Free => unreachable!(),
        ControllerKind::Ideal => Ok(Box::new(IdealController::new(
            spec.l.matrix().clone(),
            thresholds,
        ))),
        ControllerKind::Ergodic => {
            let tau_s = resolve_tau_s(params, delta)?;
            Ok(Box::new(ErgodicController::new(thresholds, tau_s)))
        }
        ControllerKind::Windowed { window_k } => {
            let tau_s = resolve_tau_s(params, delta)?;
            Ok(Box::new(WindowedController::new(
                thresholds, tau_s, window_k,
            )?))
        }
    }
}

fn resolve_tau_s(params: &ControllerParams, delta: f64) -> Result<f64> {
    if let Some(t) = params.tau_s_override {
        if t < 0.0 {
            return Err(Error::DomainError {
                name: "tau_s_override",
                value: t,
            });
        }
        return Ok(t);
    }
    let epsilon = params.epsilon.unwrap_or_else(|| libm::fabs(delta));
    compute_tau_s(params.beta, epsilon)
}
