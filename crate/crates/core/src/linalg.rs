//! Dense complex linear algebra helpers shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix; every operator and state in the crate is one of these.
pub type Cm = DMatrix<Complex64>;
/// Dense complex vector.
pub type Cv = DVector<Complex64>;

pub fn commutator(a: &Cm, b: &Cm) -> Cm {
    a * b - b * a
}

pub fn anticommutator(a: &Cm, b: &Cm) -> Cm {
    a * b + b * a
}

/// Real part of the trace.
pub fn trace_re(m: &Cm) -> f64 {
    m.trace().re
}

/// Real part of Tr[A B] without forming the product.
pub fn trace_prod_re(a: &Cm, b: &Cm) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Hermiticity residual max_ij |m_ij - conj(m_ji)|.
pub fn hermiticity_residual(m: &Cm) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix: ascending eigenvalues with
/// sign-fixed eigenvectors (largest-magnitude entry rotated to the positive
/// real axis) so the basis is reproducible.
pub fn eigh(m: &Cm) -> (alloc::vec::Vec<f64>, Cm) {
    let se = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: alloc::vec::Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let mut vals = alloc::vec::Vec::with_capacity(n);
    let mut vecs = Cm::zeros(n, n);
    for (col, &idx) in order.iter().enumerate() {
        vals.push(se.eigenvalues[idx]);
        let mut v: Cv = se.eigenvectors.column(idx).into_owned();
        sign_fix(&mut v);
        vecs.set_column(col, &v);
    }
    (vals, vecs)
}

/// Rotate the global phase so the largest-magnitude entry is real positive.
fn sign_fix(v: &mut Cv) {
    let mut best = 0usize;
    let mut best_mag = 0.0f64;
    for (i, z) in v.iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mag + 1e-14 {
            best_mag = m;
            best = i;
        }
    }
    let z = v[best];
    let mag = z.norm();
    if mag > 0.0 {
        let phase = z.conj() / Complex64::new(mag, 0.0);
        for e in v.iter_mut() {
            *e *= phase;
        }
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &Cm) -> f64 {
    let se = m.clone().symmetric_eigen();
    se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}
