//! Preset model builders: the qutrit test bed and the antiferromagnetic
//! Heisenberg triangle.

use num_complex::Complex64;

use crate::error::Result;
use crate::linalg::{self, Cm};
use crate::model::{Mode, ModelSpec};
use crate::operators::{HermitianOperator, Tolerances};

/// Coupling constants of the three-site Heisenberg triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergParams {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
}

impl Default for HeisenbergParams {
    fn default() -> Self {
        HeisenbergParams {
            jx: 1.0,
            jy: 1.0,
            jz: 2.0,
        }
    }
}

/// Three-level cooling test bed: H0 = L = diag(-1, 2, 3), F0 all-ones off
/// the diagonal. The target state is |0><0|.
pub fn build_qutrit_preset() -> ModelSpec {
    let h0 = HermitianOperator::from_diagonal(&[-1.0, 2.0, 3.0]).unwrap();
    let l = h0.clone();
    let one = Complex64::new(1.0, 0.0);
    let mut f0 = Cm::from_element(3, 3, one);
    for i in 0..3 {
        f0[(i, i)] = Complex64::new(0.0, 0.0);
    }
    let f0 = HermitianOperator::new(f0, &Tolerances::default()).unwrap();
    ModelSpec::new(h0, l, f0, Mode::Cooling, &Tolerances::default()).unwrap()
}

/// Pauli axis selector for site operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

fn pauli(axis: PauliAxis) -> Cm {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match axis {
        PauliAxis::X => Cm::from_row_slice(2, 2, &[z, one, one, z]),
        PauliAxis::Y => Cm::from_row_slice(2, 2, &[z, -i, i, z]),
        PauliAxis::Z => Cm::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

/// S_i^k: the Pauli matrix sigma_k on site `site` (1-based) of three qubits,
/// identity elsewhere. Site 1 is the leftmost tensor factor.
pub fn pauli_site_operator(axis: PauliAxis, site: usize) -> HermitianOperator {
    assert!((1..=3).contains(&site), "site must be 1..=3");
    let ident = Cm::identity(2, 2);
    let p = pauli(axis);
    let factor = |i: usize| if i == site { &p } else { &ident };
    let m = factor(1).kronecker(factor(2)).kronecker(factor(3));
    HermitianOperator::new(m, &Tolerances::default()).unwrap()
}

/// Heisenberg-triangle Hamiltonian with nearest-neighbour coupling and
/// periodic boundary conditions:
/// H0 = sum_k J_k sum_i S_i^k S_{i+1 mod 3}^k.
pub fn heisenberg_hamiltonian(p: HeisenbergParams) -> HermitianOperator {
    let mut h = Cm::zeros(8, 8);
    for (axis, j) in [
        (PauliAxis::X, p.jx),
        (PauliAxis::Y, p.jy),
        (PauliAxis::Z, p.jz),
    ] {
        for i in 1..=3 {
            let next = i % 3 + 1;
            let a = pauli_site_operator(axis, i);
            let b = pauli_site_operator(axis, next);
            h += (a.matrix() * b.matrix()).scale(j);
        }
    }
    HermitianOperator::new(h, &Tolerances::default()).unwrap()
}

/// Antiferromagnetic Heisenberg triangle preset with L = H0.
///
/// F0 is tridiagonal (zero diagonal, super/subdiagonal 4) in the sign-fixed
/// ascending eigenbasis of H0, rotated back to the computational basis. The
/// intra-degeneracy basis is pinned by the deterministic eigensolver plus
/// sign fixing, so the preset is reproducible across runs.
pub fn build_heisenberg_preset(p: HeisenbergParams) -> Result<ModelSpec> {
    let h0 = heisenberg_hamiltonian(p);
    let l = h0.clone();
    let (_vals, basis) = linalg::eigh(h0.matrix());
    let mut tri = Cm::zeros(8, 8);
    let four = Complex64::new(4.0, 0.0);
    for i in 0..7 {
        tri[(i, i + 1)] = four;
        tri[(i + 1, i)] = four;
    }
    let f0_mat = &basis * tri * basis.adjoint();
    let f0 = HermitianOperator::new(f0_mat, &Tolerances::default())?;
    ModelSpec::new(h0, l, f0, Mode::Cooling, &Tolerances::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_assumptions;
    use crate::operators::spectral_decompose;
    use nalgebra::DVector;

    #[test]
    fn qutrit_preset_shape() {
        let spec = build_qutrit_preset();
        assert_eq!(spec.spectrum.distinct_eigenvalues, vec![-1.0, 2.0, 3.0]);
        assert!((spec.gap() - 3.0).abs() < 1e-12);
        assert!(check_assumptions(&spec).all_pass());
        // F0: zero diagonal, ones elsewhere
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 1.0 };
                assert!((spec.f0.matrix()[(i, j)].re - expect).abs() < 1e-15);
                assert!(spec.f0.matrix()[(i, j)].im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pauli_site_operator_properties() {
        let ident = Cm::identity(8, 8);
        for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
            for site in 1..=3 {
                let s = pauli_site_operator(axis, site);
                assert!(((s.matrix() * s.matrix()) - &ident).norm() < 1e-14);
                assert!(s.trace().abs() < 1e-14);
            }
        }
        // site 1 acts on the leftmost factor: S_1^x = sigma_x (x) I (x) I
        let s1x = pauli_site_operator(PauliAxis::X, 1);
        let expected = pauli(PauliAxis::X)
            .kronecker(&Cm::identity(2, 2))
            .kronecker(&Cm::identity(2, 2));
        assert!((s1x.matrix() - expected).norm() < 1e-14);
    }

    #[test]
    fn heisenberg_spectrum_and_gap() {
        let spec = build_heisenberg_preset(HeisenbergParams::default()).unwrap();
        let sd = &spec.spectrum;
        assert_eq!(sd.distinct_eigenvalues.len(), 3);
        assert!((sd.lambda_min() + 4.0).abs() < 1e-9);
        assert!((sd.gap_low - 6.0).abs() < 1e-9);
        assert_eq!(sd.multiplicities[0], 4);
    }

    #[test]
    fn heisenberg_ground_space_matches_entangled_states() {
        let spec = build_heisenberg_preset(HeisenbergParams::default()).unwrap();
        // Basis |abc>, site 1 = most significant bit.
        let ket = |s: &str| {
            let mut v = DVector::from_element(8, Complex64::new(0.0, 0.0));
            v[usize::from_str_radix(s, 2).unwrap()] = Complex64::new(1.0, 0.0);
            v
        };
        let s2 = libm::sqrt(2.0);
        let s6 = libm::sqrt(6.0);
        let psis = [
            (ket("010") - ket("001")) / Complex64::new(s2, 0.0),
            (ket("101") - ket("011")) / Complex64::new(s2, 0.0),
            (ket("100") * Complex64::new(2.0, 0.0) - ket("010") - ket("001"))
                / Complex64::new(s6, 0.0),
            (ket("110") * Complex64::new(2.0, 0.0) - ket("101") - ket("011"))
                / Complex64::new(s6, 0.0),
        ];
        let mut span = Cm::zeros(8, 8);
        for p in &psis {
            span += p * p.adjoint();
        }
        assert!((spec.spectrum.ground_projector() - span).norm() < 1e-8);
    }

    #[test]
    fn isotropic_triangle_has_two_fourfold_levels() {
        let h = heisenberg_hamiltonian(HeisenbergParams {
            jx: 1.0,
            jy: 1.0,
            jz: 1.0,
        });
        let sd = spectral_decompose(&h, 1e-8).unwrap();
        assert_eq!(sd.distinct_eigenvalues.len(), 2);
        assert!((sd.lambda_min() + 3.0).abs() < 1e-9);
        assert!((sd.lambda_max() - 3.0).abs() < 1e-9);
        assert_eq!(sd.multiplicities, vec![4, 4]);
    }

    #[test]
    fn hamiltonian_invariant_under_cyclic_permutation() {
        // Conjugation by the 3-cycle site permutation leaves H0 unchanged.
        let h = heisenberg_hamiltonian(HeisenbergParams::default());
        let mut perm = Cm::zeros(8, 8);
        for b in 0..8usize {
            // (b1, b2, b3) -> (b3, b1, b2) with site 1 as MSB
            let b1 = (b >> 2) & 1;
            let b2 = (b >> 1) & 1;
            let b3 = b & 1;
            let target = (b3 << 2) | (b1 << 1) | b2;
            perm[(target, b)] = Complex64::new(1.0, 0.0);
        }
        let conj = &perm * h.matrix() * perm.adjoint();
        assert!((conj - h.matrix()).norm() < 1e-12);
    }

    #[test]
    fn heisenberg_f0_is_tridiagonal_in_eigenbasis() {
        let spec = build_heisenberg_preset(HeisenbergParams::default()).unwrap();
        let (_vals, basis) = linalg::eigh(spec.h0.matrix());
        let back = basis.adjoint() * spec.f0.matrix() * &basis;
        for i in 0..8usize {
            for j in 0..8usize {
                let expect = if i.abs_diff(j) == 1 { 4.0 } else { 0.0 };
                assert!(
                    (back[(i, j)] - Complex64::new(expect, 0.0)).norm() < 1e-9,
                    "entry ({i},{j}) = {:?}",
                    back[(i, j)]
                );
            }
        }
    }

    #[test]
    fn heisenberg_passes_cooling_assumptions() {
        let spec = build_heisenberg_preset(HeisenbergParams::default()).unwrap();
        let report = check_assumptions(&spec);
        assert!(report.all_pass(), "{report:?}");
        // Tr L = 0 < 8 lambda_2
        assert!(spec.l.trace().abs() < 1e-12);
        assert!(spec.spectrum.distinct_eigenvalues[1] > 0.0);
    }
}
