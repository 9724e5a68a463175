//! Validated quantum primitives: Hermitian operators, density matrices,
//! spectral decompositions, and the superoperators entering the stochastic
//! master equation.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, Cm};

/// Validation tolerances. Defaults sit roughly two orders of magnitude above
/// double-precision eigensolver noise at the dimensions we care about (N <= 8).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermit_tol: f64,
    pub trace_tol: f64,
    pub psd_tol: f64,
    pub cluster_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermit_tol: 1e-10,
            trace_tol: 1e-10,
            psd_tol: 1e-9,
            cluster_tol: 1e-8,
        }
    }
}

/// A validated complex Hermitian matrix of dimension >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: Cm,
}

impl HermitianOperator {
    pub fn new(mat: Cm, tol: &Tolerances) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        if mat.nrows() < 2 {
            return Err(Error::DimensionTooSmall { dim: mat.nrows() });
        }
        let residual = linalg::hermiticity_residual(&mat);
        if residual > tol.hermit_tol {
            return Err(Error::NotHermitian { residual });
        }
        Ok(HermitianOperator { mat })
    }

    /// Build from a real diagonal.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Cm::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self::new(m, &Tolerances::default())
    }

    /// Wrap a matrix that is Hermitian by construction (e.g. sums and real
    /// linear combinations of validated operators). Debug builds still check.
    pub(crate) fn from_trusted(mat: Cm) -> Self {
        debug_assert!(linalg::hermiticity_residual(&mat) <= 1e-9);
        HermitianOperator { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Cm {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.mat)
    }
}

/// A validated quantum state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: Cm,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Cm {
        &self.mat
    }

    /// Maximally mixed state I/N.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension { dim });
        }
        Ok(DensityMatrix {
            mat: Cm::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0),
        })
    }

    /// Pure state |k><k| in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if dim < 2 || k >= dim {
            return Err(Error::InvalidDimension { dim });
        }
        let mut m = Cm::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { mat: m })
    }

    /// Wrap a matrix known to be a valid state by construction.
    pub(crate) fn from_trusted(mat: Cm) -> Self {
        DensityMatrix { mat }
    }
}

/// Check all density-matrix invariants and return the validated state.
///
/// Each failure reports the violated invariant together with the measured
/// violation.
pub fn validate_density(m: &Cm, tol: &Tolerances) -> Result<DensityMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let residual = linalg::hermiticity_residual(m);
    if residual > tol.hermit_tol {
        return Err(Error::NotHermitian { residual });
    }
    let deviation = (linalg::trace_re(m) - 1.0).abs();
    if deviation > tol.trace_tol {
        return Err(Error::TraceNotOne { deviation });
    }
    let min_eig = linalg::min_eigenvalue(m);
    if min_eig < -tol.psd_tol {
        return Err(Error::NotPositive {
            min_eigenvalue: min_eig,
        });
    }
    Ok(DensityMatrix { mat: m.clone() })
}

/// Distinct eigenvalues of a Hermitian operator in ascending order, with the
/// projector, multiplicity, and orthonormal eigenbasis of each eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Distinct eigenvalues lambda_1 < ... < lambda_r (cluster averages).
    pub distinct_eigenvalues: Vec<f64>,
    /// Orthogonal projector onto each eigenspace.
    pub projectors: Vec<Cm>,
    pub multiplicities: Vec<usize>,
    /// Full sign-fixed eigenbasis, columns ordered by ascending eigenvalue.
    pub eigenbasis: Cm,
    /// delta = lambda_2 - lambda_1 (the cooling gap).
    pub gap_low: f64,
    /// lambda_{r-1} - lambda_r (the heating gap; negative).
    pub gap_high: f64,
}

impl SpectralDecomposition {
    pub fn num_distinct(&self) -> usize {
        self.distinct_eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.distinct_eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.distinct_eigenvalues.last().unwrap()
    }

    /// Projector onto the lowest eigenspace.
    pub fn ground_projector(&self) -> &Cm {
        &self.projectors[0]
    }

    /// Projector onto the highest eigenspace.
    pub fn top_projector(&self) -> &Cm {
        self.projectors.last().unwrap()
    }
}

/// Eigendecompose a Hermitian operator, clustering eigenvalues whose
/// consecutive gap is at most `cluster_tol` into one degenerate group.
///
/// Errors with `SingleEigenvalue` when fewer than two distinct eigenvalues
/// survive clustering: the spectral gap is then undefined and the control
/// problem degenerate.
pub fn spectral_decompose(a: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    let n = a.dim();
    let (vals, basis) = linalg::eigh(a.matrix());

    // Group consecutive eigenvalues by gap thresholding.
    let mut groups: Vec<(usize, usize)> = Vec::new(); // [start, end)
    let mut start = 0usize;
    for i in 1..n {
        if vals[i] - vals[i - 1] > cluster_tol {
            groups.push((start, i));
            start = i;
        }
    }
    groups.push((start, n));

    if groups.len() < 2 {
        return Err(Error::SingleEigenvalue);
    }

    let mut distinct = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut multiplicities = Vec::with_capacity(groups.len());
    for &(s, e) in &groups {
        let mean = vals[s..e].iter().sum::<f64>() / (e - s) as f64;
        distinct.push(mean);
        multiplicities.push(e - s);
        let mut proj = Cm::zeros(n, n);
        for c in s..e {
            let v = basis.column(c);
            // proj += v v^dagger
            for i in 0..n {
                for j in 0..n {
                    proj[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        projectors.push(proj);
    }

    let r = distinct.len();
    let gap_low = distinct[1] - distinct[0];
    let gap_high = distinct[r - 2] - distinct[r - 1];
    Ok(SpectralDecomposition {
        distinct_eigenvalues: distinct,
        projectors,
        multiplicities,
        eigenbasis: basis,
        gap_low,
        gap_high,
    })
}

/// The dissipator D_L[rho] = L rho L - (1/2){L^2, rho} for Hermitian L.
///
/// Traceless and Hermitian for every valid input.
pub fn apply_dissipator(l: &HermitianOperator, rho: &DensityMatrix) -> Result<Cm> {
    check_dims(l.dim(), rho.dim())?;
    let lm = l.matrix();
    let rm = rho.matrix();
    let l2 = lm * lm;
    Ok(lm * rm * lm - (&l2 * rm + rm * &l2).scale(0.5))
}

/// The innovation term G_L[rho] = L rho + rho L - 2 Tr[L rho] rho for
/// Hermitian L; couples the state to the measurement noise.
pub fn apply_innovation(l: &HermitianOperator, rho: &DensityMatrix) -> Result<Cm> {
    check_dims(l.dim(), rho.dim())?;
    let lm = l.matrix();
    let rm = rho.matrix();
    let ex = linalg::trace_prod_re(lm, rm);
    Ok(lm * rm + rm * lm - rm.scale(2.0 * ex))
}

/// Population of the subspace projected by `proj`: Tr[proj rho].
pub fn subspace_fidelity(rho: &DensityMatrix, proj: &Cm) -> Result<f64> {
    check_dims(proj.nrows(), rho.dim())?;
    Ok(linalg::trace_prod_re(proj, rho.matrix()))
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
