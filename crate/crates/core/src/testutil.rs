//! Test-only helpers: random operators and states, independent of the
//! library's own sampling paths.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::Cm;
use crate::operators::{validate_density, DensityMatrix, HermitianOperator, Tolerances};

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> HermitianOperator {
    let mut m = Cm::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
        for j in (i + 1)..n {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m, &Tolerances::default()).unwrap()
}

/// Random full-rank mixed state via a Ginibre matrix; independent of the
/// ensemble module's sampler.
pub fn random_density(n: usize, rng: &mut impl Rng) -> DensityMatrix {
    let mut g = Cm::zeros(n, n);
    for e in g.iter_mut() {
        *e = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    let gg = &g * g.adjoint();
    let tr = gg.trace().re;
    let rho = gg * Complex64::new(1.0 / tr, 0.0);
    validate_density(&rho, &Tolerances::default()).unwrap()
}

pub fn cm_from_real(rows: usize, data: &[f64]) -> Cm {
    let v: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Cm::from_row_slice(rows, rows, &v)
}
