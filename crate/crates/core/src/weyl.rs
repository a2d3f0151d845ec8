//! Unitary operator bases for the joint measurement.
//!
//! The default basis is the clock/shift (Weyl-Heisenberg) set
//! `U^(m·d+n) = X^m Z^n` with `X|j⟩ = |j+1 mod d⟩` and `Z|j⟩ = ω^j |j⟩`,
//! `ω = exp(2πi/d)`. At `d = 2` this is `{I, Z, X, XZ}`, the Pauli set up to
//! the phase of `XZ = -iσ_y`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{Ket, Operator, C64, ONE, ZERO};

/// Unitarity tolerance for basis elements.
pub const UNITARY_TOL: f64 = 1e-12;
/// Tolerance of the two orthogonality relations.
pub const RELATION_TOL: f64 = 1e-10;

/// `d²` unitaries on a `d`-dimensional space, indexed by `α = m·d + n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryBasis {
    dim: usize,
    ops: Vec<Operator>,
}

impl UnitaryBasis {
    /// Wrap an arbitrary operator list, checking unitarity and both
    /// orthogonality relations.
    pub fn from_operators(dim: usize, ops: Vec<Operator>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("basis dimension must be >= 2, got {dim}")));
        }
        if ops.len() != dim * dim {
            return Err(Error::Shape(format!("{} operators for d = {dim}", ops.len())));
        }
        for (alpha, op) in ops.iter().enumerate() {
            if op.dim_in() != dim || op.dim_out() != dim {
                return Err(Error::Shape(format!("operator {alpha} is not {dim}x{dim}")));
            }
            let err = op.unitarity_error();
            if err > UNITARY_TOL {
                return Err(Error::Domain(format!("operator {alpha} not unitary (error {err:e})")));
            }
        }
        let basis = Self { dim, ops };
        let trace_err = basis.trace_orthogonality_error();
        if trace_err > RELATION_TOL {
            return Err(Error::Domain(format!(
                "Tr(U_a† U_b) = d δ_ab violated by {trace_err:e}"
            )));
        }
        let comp_err = basis.completeness_error();
        if comp_err > RELATION_TOL {
            return Err(Error::Domain(format!(
                "operator completeness violated by {comp_err:e}"
            )));
        }
        Ok(basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn op(&self, alpha: usize) -> &Operator {
        &self.ops[alpha]
    }

    /// `α → (m, n)`
    pub fn pair(&self, alpha: usize) -> (usize, usize) {
        (alpha / self.dim, alpha % self.dim)
    }

    /// `(m, n) → α`
    pub fn index(&self, m: usize, n: usize) -> usize {
        m * self.dim + n
    }

    /// `max |Tr(U_a† U_b) - d δ_ab|`
    pub fn trace_orthogonality_error(&self) -> f64 {
        let d = self.dim as f64;
        let mut worst: f64 = 0.0;
        for (a, ua) in self.ops.iter().enumerate() {
            for (b, ub) in self.ops.iter().enumerate() {
                let t = ua.hs_inner(ub).unwrap_or(C64::new(f64::NAN, 0.0));
                let want = if a == b { d } else { 0.0 };
                worst = worst.max((t - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    /// `max |(1/d) Σ_α U^α_ij conj(U^α_kl) - δ_ik δ_jl|`
    pub fn completeness_error(&self) -> f64 {
        let d = self.dim;
        let n = d * d;
        // Row α of `stack` is U^α flattened row-major; (1/d) stack^T conj(stack) must be I.
        let stack = DMatrix::from_fn(self.ops.len(), n, |alpha, ij| {
            self.ops[alpha].get(ij / d, ij % d)
        });
        let gram = stack.transpose() * stack.map(|c| c.conj()) / C64::new(d as f64, 0.0);
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { ONE } else { ZERO };
                worst = worst.max((gram[(r, c)] - want).norm());
            }
        }
        worst
    }

    /// Apply `U ↦ left · U · right` to every element.
    pub fn conjugated(&self, left: &Operator, right: &Operator) -> Result<Self> {
        let ops = self
            .ops
            .iter()
            .map(|u| left.mul(u)?.mul(right))
            .collect::<Result<Vec<_>>>()?;
        Self::from_operators(self.dim, ops)
    }
}

/// Cyclic shift `X|j⟩ = |j+1 mod d⟩`.
pub fn shift(d: usize) -> Operator {
    Operator::from_matrix(DMatrix::from_fn(d, d, |r, c| {
        if r == (c + 1) % d {
            ONE
        } else {
            ZERO
        }
    }))
}

/// Clock `Z|j⟩ = ω^j |j⟩`.
pub fn clock(d: usize) -> Operator {
    Operator::from_matrix(DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            root_of_unity(d, r)
        } else {
            ZERO
        }
    }))
}

fn root_of_unity(d: usize, power: usize) -> C64 {
    let k = power % d;
    C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64)
}

/// `X^power`, which sends `|j⟩` to `|j + power mod d⟩`.
pub fn shift_power(d: usize, power: usize) -> Operator {
    Operator::from_matrix(DMatrix::from_fn(d, d, |r, c| {
        if r == (c + power) % d {
            ONE
        } else {
            ZERO
        }
    }))
}

/// `X^m Z^n` for all `(m, n)`, row-major in `(m, n)`.
pub fn build_weyl_basis(d: usize) -> Result<UnitaryBasis> {
    if d < 2 {
        return Err(Error::Domain(format!("Weyl basis needs d >= 2, got {d}")));
    }
    let mut ops = Vec::with_capacity(d * d);
    for m in 0..d {
        for n in 0..d {
            // (X^m Z^n)[r, c] = ω^(n c) if r = c + m
            ops.push(Operator::from_matrix(DMatrix::from_fn(d, d, |r, c| {
                if r == (c + m) % d {
                    root_of_unity(d, n * c)
                } else {
                    ZERO
                }
            })));
        }
    }
    UnitaryBasis::from_operators(d, ops)
}

/// `|ψ^m_α⟩ = (U^α ⊗ 1) d^(-1/2) Σ_i |ii⟩`; amplitude at `|ik⟩` is `U^α_ik / √d`.
pub fn maximally_entangled_basis(basis: &UnitaryBasis) -> Vec<Ket> {
    let d = basis.dim();
    let s = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    basis
        .ops()
        .iter()
        .map(|u| {
            let amps = (0..d * d).map(|ik| u.get(ik / d, ik % d) * s).collect();
            Ket::new(amps).expect("d² > 0")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random_unitary;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn qubit_basis_is_pauli_up_to_phase() {
        let b = build_weyl_basis(2).unwrap();
        let i = Operator::identity(2);
        let x = Operator::from_rows(2, 2, &[ZERO, ONE, ONE, ZERO]).unwrap();
        let y = Operator::from_rows(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap();
        let z = Operator::from_rows(2, 2, &[ONE, ZERO, ZERO, -ONE]).unwrap();
        assert!(b.op(0).max_abs_diff(&i).unwrap() < 1e-15);
        assert!(b.op(1).max_abs_diff(&z).unwrap() < 1e-15);
        assert!(b.op(2).max_abs_diff(&x).unwrap() < 1e-15);
        // XZ = -i σ_y
        let minus_i_y = y.scale(c(0.0, -1.0));
        assert!(b.op(3).max_abs_diff(&minus_i_y).unwrap() < 1e-15);
        // same projector sets
        let pauli = [i, z, x, y];
        for (u, p) in b.ops().iter().zip(pauli.iter()) {
            let overlap = u.hs_inner(p).unwrap().norm();
            assert!((overlap - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn qutrit_trace_gram_is_three_identity() {
        let b = build_weyl_basis(3).unwrap();
        for a in 0..9 {
            for bb in 0..9 {
                let t = b.op(a).hs_inner(b.op(bb)).unwrap();
                let want = if a == bb { 3.0 } else { 0.0 };
                assert!((t - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qutrit_completeness_entry_brute_force() {
        let b = build_weyl_basis(3).unwrap();
        let sum: C64 = b.ops().iter().map(|u| u.get(0, 1) * u.get(0, 1).conj()).sum();
        assert!((sum - c(3.0, 0.0)).norm() < 1e-12);
        let off: C64 = b.ops().iter().map(|u| u.get(0, 1) * u.get(1, 2).conj()).sum();
        assert!(off.norm() < 1e-12);
    }

    #[test]
    fn relations_hold_for_small_dims() {
        for d in 2..=5 {
            let b = build_weyl_basis(d).unwrap();
            assert!(b.ops().iter().all(|u| u.unitarity_error() <= 1e-12));
            assert!(b.trace_orthogonality_error() <= 1e-10);
            assert!(b.completeness_error() <= 1e-10);
            let kets = maximally_entangled_basis(&b);
            let n = d * d;
            let mut comp = Operator::zeros(n, n);
            for (a, ka) in kets.iter().enumerate() {
                for (bb, kb) in kets.iter().enumerate() {
                    let want = if a == bb { ONE } else { ZERO };
                    assert!((ka.inner(kb).unwrap() - want).norm() <= 1e-12);
                }
                comp = comp.add(&ka.projector()).unwrap();
            }
            assert!(comp.max_abs_diff(&Operator::identity(n)).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn qubit_entangled_basis_is_bell_up_to_phase() {
        let b = build_weyl_basis(2).unwrap();
        let s = 0.5f64.sqrt();
        let bell = [
            [s, 0.0, 0.0, s],
            [s, 0.0, 0.0, -s],
            [0.0, s, s, 0.0],
            [0.0, s, -s, 0.0],
        ];
        for (k, bk) in maximally_entangled_basis(&b).iter().zip(bell.iter()) {
            let overlap = k.inner(&Ket::from_real(bk).unwrap()).unwrap().norm();
            assert!((overlap - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn construction_is_bit_identical() {
        assert_eq!(build_weyl_basis(4).unwrap(), build_weyl_basis(4).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(build_weyl_basis(1).is_err());
        let mut ops = build_weyl_basis(2).unwrap().ops().to_vec();
        ops[3] = ops[0].clone();
        assert!(UnitaryBasis::from_operators(2, ops).is_err());
    }

    #[test]
    fn conjugation_by_local_unitaries_keeps_relations() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let d = 3;
        let q = haar_random_unitary(d, &mut rng).unwrap();
        let b = build_weyl_basis(d).unwrap();
        let conj = b.conjugated(&q, &q.adjoint()).unwrap();
        assert!(conj.completeness_error() <= 1e-10);
        assert!(shift_power(3, 2).max_abs_diff(&shift(3).mul(&shift(3)).unwrap()).unwrap() == 0.0);
        assert!((clock(2).get(1, 1) + ONE).norm() < 1e-15);
    }
}
