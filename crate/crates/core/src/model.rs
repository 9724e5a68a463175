//! Control-model assembly and verification: assumption checks, Liouvillian
//! construction, equilibrium-uniqueness rank test, and deterministic
//! average-dynamics integration.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Cm};
use crate::operators::{
    spectral_decompose, DensityMatrix, HermitianOperator, SpectralDecomposition, Tolerances,
};

/// Whether the controller targets the bottom or the top eigenspace of L.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cooling,
    Heating,
}

/// A complete control model: free Hamiltonian, measurement operator, control
/// Hamiltonian, the spectral decomposition of L, and the task mode.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub h0: HermitianOperator,
    pub l: HermitianOperator,
    pub f0: HermitianOperator,
    pub spectrum: SpectralDecomposition,
    pub mode: Mode,
}

impl ModelSpec {
    pub fn new(
        h0: HermitianOperator,
        l: HermitianOperator,
        f0: HermitianOperator,
        mode: Mode,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = h0.dim();
        for op in [&l, &f0] {
            if op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.dim(),
                });
            }
        }
        let spectrum = spectral_decompose(&l, tol.cluster_tol)?;
        Ok(ModelSpec {
            h0,
            l,
            f0,
            spectrum,
            mode,
        })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// Projector onto the target eigenspace: lowest for cooling, highest for
    /// heating.
    pub fn target_projector(&self) -> &Cm {
        match self.mode {
            Mode::Cooling => self.spectrum.ground_projector(),
            Mode::Heating => self.spectrum.top_projector(),
        }
    }

    /// Target eigenvalue of L.
    pub fn target_eigenvalue(&self) -> f64 {
        match self.mode {
            Mode::Cooling => self.spectrum.lambda_min(),
            Mode::Heating => self.spectrum.lambda_max(),
        }
    }

    /// Spectral gap delta for the active mode: lambda_2 - lambda_1 when
    /// cooling, lambda_{r-1} - lambda_r (negative) when heating.
    pub fn gap(&self) -> f64 {
        match self.mode {
            Mode::Cooling => self.spectrum.gap_low,
            Mode::Heating => self.spectrum.gap_high,
        }
    }

    /// Same operators with a different control Hamiltonian.
    pub fn with_f0(&self, f0: HermitianOperator) -> Result<Self> {
        ModelSpec::new(
            self.h0.clone(),
            self.l.clone(),
            f0,
            self.mode,
            &Tolerances::default(),
        )
    }
}

/// Outcome of one assumption check: the signed margin or residual, and
/// whether it passes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Check {
    pub pass: bool,
    /// Residual for A1/A2 (pass iff small), signed margin for A3 (pass iff
    /// strictly positive).
    pub value: f64,
}

/// Result of the four model checks. Failures are entries here, not errors.
#[derive(Debug, Clone)]
pub struct AssumptionReport {
    pub a1_hermitian: Check,
    pub a2_commute: Check,
    pub a3_spectral: Check,
    pub unique_equilibrium: bool,
    pub liouvillian_rank: usize,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.a1_hermitian.pass
            && self.a2_commute.pass
            && self.a3_spectral.pass
            && self.unique_equilibrium
    }
}

pub const COMMUTE_TOL: f64 = 1e-10;
pub const RANK_TOL: f64 = 1e-9;

/// Run all four model checks: L Hermitian, [H0, L] = 0, the spectral
/// separation condition for the active mode, and uniqueness of the maximally
/// mixed equilibrium under active control.
pub fn check_assumptions(spec: &ModelSpec) -> AssumptionReport {
    let n = spec.dim() as f64;
    // A1 is enforced by the HermitianOperator type; report the residual anyway.
    let a1_res = linalg::hermiticity_residual(spec.l.matrix());
    let a2_res = linalg::commutator(spec.h0.matrix(), spec.l.matrix()).norm();
    let eigs = &spec.spectrum.distinct_eigenvalues;
    let r = eigs.len();
    let a3_margin = match spec.mode {
        Mode::Cooling => n * eigs[1] - spec.l.trace(),
        Mode::Heating => spec.l.trace() - n * eigs[r - 2],
    };
    let eq = verify_unique_equilibrium(spec, RANK_TOL);
    AssumptionReport {
        a1_hermitian: Check {
            pass: a1_res <= Tolerances::default().hermit_tol,
            value: a1_res,
        },
        a2_commute: Check {
            pass: a2_res <= COMMUTE_TOL,
            value: a2_res,
        },
        a3_spectral: Check {
            pass: a3_margin > 0.0,
            value: a3_margin,
        },
        unique_equilibrium: eq.unique,
        liouvillian_rank: eq.rank,
    }
}

/// Apply the average-dynamics generator directly:
/// sigma -> -i[H, sigma] + D_L[sigma].
pub fn apply_liouvillian(h: &Cm, l: &Cm, sigma: &Cm) -> Cm {
    let minus_i = Complex64::new(0.0, -1.0);
    let l2 = l * l;
    linalg::commutator(h, sigma) * minus_i + l * sigma * l - (&l2 * sigma + sigma * &l2).scale(0.5)
}

/// Orthonormal basis of the real vector space of N x N Hermitian matrices
/// under the trace inner product: diagonal units, then symmetric and
/// antisymmetric off-diagonal pairs.
fn hermitian_basis(n: usize) -> Vec<Cm> {
    let mut basis = Vec::with_capacity(n * n);
    let s = 1.0 / libm::sqrt(2.0);
    for i in 0..n {
        let mut m = Cm::zeros(n, n);
        m[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = Cm::zeros(n, n);
            m[(i, j)] = Complex64::new(s, 0.0);
            m[(j, i)] = Complex64::new(s, 0.0);
            basis.push(m);
            let mut m = Cm::zeros(n, n);
            m[(i, j)] = Complex64::new(0.0, s);
            m[(j, i)] = Complex64::new(0.0, -s);
            basis.push(m);
        }
    }
    basis
}

/// Matrix representation of sigma -> -i[H, sigma] + D_L[sigma] on the real
/// N^2-dimensional space of vectorized Hermitian matrices.
pub fn build_liouvillian(h: &HermitianOperator, l: &HermitianOperator) -> Result<DMatrix<f64>> {
    if h.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: l.dim(),
        });
    }
    let n = h.dim();
    let basis = hermitian_basis(n);
    let d = n * n;
    let mut rep = DMatrix::<f64>::zeros(d, d);
    for (k, bk) in basis.iter().enumerate() {
        let image = apply_liouvillian(h.matrix(), l.matrix(), bk);
        for (j, bj) in basis.iter().enumerate() {
            // Coordinates are real because the generator preserves hermiticity.
            let mut acc = 0.0;
            for r in 0..n {
                for c in 0..n {
                    acc += (bj[(r, c)].conj() * image[(r, c)]).re;
                }
            }
            rep[(j, k)] = acc;
        }
    }
    Ok(rep)
}

/// Coordinates of a Hermitian matrix in the `hermitian_basis` ordering.
pub fn vectorize_hermitian(m: &Cm) -> Vec<f64> {
    let n = m.nrows();
    let basis = hermitian_basis(n);
    basis
        .iter()
        .map(|b| {
            let mut acc = 0.0;
            for r in 0..n {
                for c in 0..n {
                    acc += (b[(r, c)].conj() * m[(r, c)]).re;
                }
            }
            acc
        })
        .collect()
}

/// Result of the Liouvillian rank test.
#[derive(Debug, Clone)]
pub struct EquilibriumCheck {
    pub unique: bool,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

/// Rank test for uniqueness of the maximally mixed equilibrium under active
/// control (H = H0 + F0): unique iff rank of the Liouvillian is N^2 - 1.
///
/// Rank is counted by singular-value thresholding at
/// `rank_tol * sigma_max`.
pub fn verify_unique_equilibrium(spec: &ModelSpec, rank_tol: f64) -> EquilibriumCheck {
    let n = spec.dim();
    let h_active =
        HermitianOperator::from_trusted(spec.h0.matrix() + spec.f0.matrix());
    let rep = build_liouvillian(&h_active, &spec.l).expect("dims already checked");
    let svd = rep.svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let smax = sv.first().cloned().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > rank_tol * smax).count();
    EquilibriumCheck {
        unique: rank == n * n - 1,
        rank,
        singular_values: sv,
    }
}

/// Deterministic trajectory of the average dynamics together with the
/// Lyapunov-style curve V(sigma_t) = Tr[L sigma_t] - lambda_target.
#[derive(Debug, Clone)]
pub struct AverageTrajectory {
    pub times: Vec<f64>,
    /// V at every integration step.
    pub v_curve: Vec<f64>,
    /// First time V dropped strictly below the spectral gap, if it did.
    pub first_below_gap: Option<f64>,
    pub final_state: Cm,
}

/// Integrate the average dynamics
/// d sigma/dt = -i[H0 + f F0, sigma] + D_L[sigma]
/// with classical fourth-order Runge-Kutta at fixed step `dt`.
///
/// Errors with `StepTooLarge` when the trace drifts beyond 1e-6.
pub fn evolve_average(
    spec: &ModelSpec,
    control_on: bool,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<AverageTrajectory> {
    if dt <= 0.0 {
        return Err(Error::DomainError {
            name: "dt",
            value: dt,
        });
    }
    if t_final < dt {
        return Err(Error::DomainError {
            name: "t_final",
            value: t_final,
        });
    }
    if rho0.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.dim(),
            found: rho0.dim(),
        });
    }
    let h = if control_on {
        spec.h0.matrix() + spec.f0.matrix()
    } else {
        spec.h0.matrix().clone()
    };
    let l = spec.l.matrix();
    let lambda = spec.target_eigenvalue();
    let gap = libm::fabs(spec.gap());
    let steps = libm::ceil(t_final / dt) as usize;

    let mut sigma = rho0.matrix().clone();
    let mut times = Vec::with_capacity(steps + 1);
    let mut v_curve = Vec::with_capacity(steps + 1);
    let mut first_below_gap = None;

    let mut record = |t: f64, sigma: &Cm, first: &mut Option<f64>| {
        let v = match spec.mode {
            Mode::Cooling => linalg::trace_prod_re(l, sigma) - lambda,
            Mode::Heating => lambda - linalg::trace_prod_re(l, sigma),
        };
        times.push(t);
        v_curve.push(v);
        if first.is_none() && v < gap {
            *first = Some(t);
        }
    };
    record(0.0, &sigma, &mut first_below_gap);

    for k in 0..steps {
        let k1 = apply_liouvillian(&h, l, &sigma);
        let k2 = apply_liouvillian(&h, l, &(&sigma + k1.scale(0.5 * dt)));
        let k3 = apply_liouvillian(&h, l, &(&sigma + k2.scale(0.5 * dt)));
        let k4 = apply_liouvillian(&h, l, &(&sigma + k3.scale(dt)));
        sigma += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
        let drift = (linalg::trace_re(&sigma) - 1.0).abs();
        if drift > 1e-6 {
            return Err(Error::StepTooLarge {
                trace_deviation: drift,
            });
        }
        record((k + 1) as f64 * dt, &sigma, &mut first_below_gap);
    }

    Ok(AverageTrajectory {
        times,
        v_curve,
        first_below_gap,
        final_state: sigma,
    })
}
