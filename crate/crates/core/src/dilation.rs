//! Realizing a POVM as an orthogonal measurement on system ⊗ ancilla.
//!
//! Every element is split into rank-one Kraus vectors `w` (`M = Σ w w†`).
//! Vector `k` gets the extended basis state `|k⟩`, and the isometry
//! `|s⟩ ↦ Σ_k conj(w_k[s]) |k⟩` fills the columns of `U_ext` that act on
//! `|s⟩ ⊗ |0⟩_a`. The other columns are an orthonormal complement found by
//! pivoted Gram-Schmidt over the computational basis.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::channel::SchmidtChannel;
use crate::error::{Error, Result};
use crate::fidelity::{
    prepare_outcomes, simulate_with_source, BranchSource, Corrections, Simulation,
    SimulationOptions,
};
use crate::linalg::{hermitian_eigen, Ket, Operator, C64, ZERO};
use crate::povm::PovmSet;
use crate::weyl::UnitaryBasis;

/// Relative eigenvalue cutoff when splitting an element into Kraus vectors.
const KRAUS_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DilationResult {
    local_dim: usize,
    pub ancilla_dim: usize,
    pub unitary: Operator,
    /// Extended basis indices measured for each outcome.
    pub outcome_map: Vec<Vec<usize>>,
    /// Max-abs error of each reconstructed element.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationCheck {
    pub unitarity_error: f64,
    pub completeness_error: f64,
    pub max_residual: f64,
}

fn kraus_vectors(op: &Operator) -> Result<Vec<DVector<C64>>> {
    let eig = hermitian_eigen(op)?;
    let tol = KRAUS_CUTOFF * eig.max_value().max(1.0);
    Ok(eig
        .values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &mu)| mu > tol)
        .map(|(k, &mu)| eig.vector(k).as_vector() * C64::new(mu.sqrt(), 0.0))
        .collect())
}

/// Complete the given orthonormal columns to a unitary.
fn complete_unitary(mut u: DMatrix<C64>, filled: &[bool]) -> DMatrix<C64> {
    let dim = u.nrows();
    let mut basis: Vec<DVector<C64>> = (0..dim)
        .filter(|&c| filled[c])
        .map(|c| u.column(c).into_owned())
        .collect();
    let mut used = vec![false; dim];
    for slot in (0..dim).filter(|&c| !filled[c]) {
        // pick the computational basis vector with the largest residual
        let mut best: Option<(usize, DVector<C64>, f64)> = None;
        for t in (0..dim).filter(|&t| !used[t]) {
            let mut r = DVector::from_element(dim, ZERO);
            r[t] = C64::new(1.0, 0.0);
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dotc(&r);
                    r -= b * c;
                }
            }
            let n = r.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| n > *bn) {
                best = Some((t, r, n));
            }
        }
        let (t, r, n) = best.expect("complement exists by dimension count");
        used[t] = true;
        let col = r / C64::new(n, 0.0);
        u.set_column(slot, &col);
        basis.push(col);
    }
    u
}

/// Orthogonal measurement on `d² · d_a` dimensions realizing `p`.
pub fn dilate(p: &PovmSet, ancilla_dim: usize) -> Result<DilationResult> {
    let d = p.local_dim();
    let n = p.joint_dim();
    let mut kraus = Vec::with_capacity(p.len());
    for e in p.elements() {
        kraus.push(kraus_vectors(&e.operator)?);
    }
    let total: usize = kraus.iter().map(|k| k.len()).sum();
    let needed = d.max(total.div_ceil(n));
    if ancilla_dim < needed {
        return Err(Error::AncillaCapacity {
            ancilla: ancilla_dim,
            needed,
            elements: total,
        });
    }
    let dim = n * ancilla_dim;
    let mut u = DMatrix::from_element(dim, dim, ZERO);
    let mut outcome_map = Vec::with_capacity(p.len());
    let mut next = 0;
    for vecs in &kraus {
        let mut slots = Vec::with_capacity(vecs.len());
        for w in vecs {
            for s in 0..n {
                u[(next, s * ancilla_dim)] = w[s].conj();
            }
            slots.push(next);
            next += 1;
        }
        outcome_map.push(slots);
    }
    let filled: Vec<bool> = (0..dim).map(|c| c % ancilla_dim == 0).collect();
    let u = complete_unitary(u, &filled);
    let mut out = DilationResult {
        local_dim: d,
        ancilla_dim,
        unitary: Operator::from_matrix(u),
        outcome_map,
        residuals: Vec::new(),
    };
    out.residuals = p
        .elements()
        .iter()
        .enumerate()
        .map(|(alpha, e)| out.reconstruct(alpha).max_abs_diff(&e.operator))
        .collect::<Result<_>>()?;
    Ok(out)
}

impl DilationResult {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn extended_dim(&self) -> usize {
        self.unitary.dim_in()
    }

    /// Element induced on the system by the extended projectors of `alpha`:
    /// `⟨0_a| U† P_α U |0_a⟩`.
    pub fn reconstruct(&self, alpha: usize) -> Operator {
        let n = self.local_dim * self.local_dim;
        let u = self.unitary.matrix();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for &e in &self.outcome_map[alpha] {
            let r = DVector::from_fn(n, |s, _| u[(e, s * self.ancilla_dim)].conj());
            m += &r * r.adjoint();
        }
        Operator::from_matrix(m)
    }

    pub fn check(&self) -> DilationCheck {
        let n = self.local_dim * self.local_dim;
        let sum = (0..self.outcome_map.len())
            .map(|a| self.reconstruct(a))
            .fold(Operator::zeros(n, n), |acc, m| acc.add(&m).expect("same shape"));
        DilationCheck {
            unitarity_error: self.unitary.unitarity_error(),
            completeness_error: sum
                .max_abs_diff(&Operator::identity(n))
                .expect("same shape"),
            max_residual: self.residuals.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Outcome probabilities from measuring `U_ext (|Ψ⟩ ⊗ |0⟩_a)`, where
    /// `psi` lives on particles 1, 2 and 3 (`d³` amplitudes).
    pub fn outcome_probabilities(&self, psi: &Ket) -> Result<Vec<f64>> {
        let d = self.local_dim;
        if psi.dim() != d * d * d {
            return Err(Error::Shape(format!(
                "state has dimension {}, expected {}",
                psi.dim(),
                d * d * d
            )));
        }
        let amps = psi.amplitudes();
        let mut out = Vec::with_capacity(self.outcome_map.len());
        for slots in &self.outcome_map {
            let mut p = 0.0;
            for &e in slots {
                for k in 0..d {
                    p += self.extended_amplitude(e, |s| amps[s * d + k]).norm_sqr();
                }
            }
            out.push(p);
        }
        Ok(out)
    }

    fn extended_amplitude(&self, row: usize, psi: impl Fn(usize) -> C64) -> C64 {
        let n = self.local_dim * self.local_dim;
        let u = self.unitary.matrix();
        (0..n).map(|s| u[(row, s * self.ancilla_dim)] * psi(s)).sum()
    }

    /// Monte Carlo teleportation with the joint measurement carried out as
    /// the extended projective measurement.
    #[allow(clippy::too_many_arguments)]
    pub fn simulate(
        &self,
        p: &PovmSet,
        ch: &SchmidtChannel,
        basis: &UnitaryBasis,
        corrections: Corrections,
        n_runs: usize,
        seed: u64,
        options: &SimulationOptions,
    ) -> Result<Simulation> {
        if p.local_dim() != self.local_dim || p.len() != self.outcome_map.len() {
            return Err(Error::Shape("dilation does not belong to this POVM".into()));
        }
        let prepared = prepare_outcomes(p, ch, basis, corrections)?;
        let source = DilatedBranches {
            dilation: self,
            channel: ch.state().amplitudes().to_vec(),
        };
        simulate_with_source(&source, p, &prepared, corrections, n_runs, seed, options)
    }
}

struct DilatedBranches<'a> {
    dilation: &'a DilationResult,
    channel: Vec<C64>,
}

impl BranchSource for DilatedBranches<'_> {
    fn local_dim(&self) -> usize {
        self.dilation.local_dim
    }

    fn branch_counts(&self) -> Vec<usize> {
        self.dilation.outcome_map.iter().map(|m| m.len()).collect()
    }

    fn fill(&self, phi: &[C64], out: &mut [C64]) {
        let d = self.dilation.local_dim;
        let mut cursor = 0;
        for &e in self.dilation.outcome_map.iter().flatten() {
            for k in 0..d {
                // |Ψ⟩ = |φ⟩₁ ⊗ |ψ⟩₂₃, flat index (i·d + j)·d + k
                out[cursor + k] = self
                    .dilation
                    .extended_amplitude(e, |s| phi[s / d] * self.channel[(s % d) * d + k]);
            }
            cursor += d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_channel;
    use crate::povm::{build_conclusive_povm, lambda_max, refine_inconclusive_product, refine_inconclusive_residual};
    use crate::weyl::build_weyl_basis;

    #[test]
    fn bell_measurement_needs_no_mixing() {
        let b = build_weyl_basis(2).unwrap();
        let ch = SchmidtChannel::maximally_entangled(2).unwrap();
        let p = build_conclusive_povm(&ch, &b, 1.0).unwrap();
        let dil = dilate(&p, 2).unwrap();
        let c = dil.check();
        assert!(c.unitarity_error < 1e-10 && c.completeness_error < 1e-10 && c.max_residual < 1e-10);
        assert!(dil.outcome_map[4].is_empty());
    }

    #[test]
    fn product_and_residual_sets_dilate() {
        let b2 = build_weyl_basis(2).unwrap();
        let ch = SchmidtChannel::from_cos_theta_c(0.6).unwrap();
        let p = refine_inconclusive_product(&build_conclusive_povm(&ch, &b2, 0.4).unwrap()).unwrap();
        assert_eq!(p.len(), 8);
        let dil = dilate(&p, 2).unwrap();
        assert!(dil.residuals.iter().all(|&r| r <= 1e-10));
        assert!(dil.check().unitarity_error <= 1e-10);

        let b3 = build_weyl_basis(3).unwrap();
        let ch3 = make_channel(&[0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()]).unwrap();
        let base = build_conclusive_povm(&ch3, &b3, lambda_max(&ch3)).unwrap();
        for p in [
            refine_inconclusive_product(&base).unwrap(),
            refine_inconclusive_residual(&base, &b3).unwrap(),
        ] {
            assert_eq!(p.len(), 18);
            let dil = dilate(&p, 3).unwrap();
            assert_eq!(dil.extended_dim(), 27);
            let c = dil.check();
            assert!(c.max_residual <= 1e-10 && c.unitarity_error <= 1e-10 && c.completeness_error <= 1e-10);
        }
    }

    #[test]
    fn small_ancilla_is_rejected() {
        let b = build_weyl_basis(3).unwrap();
        let ch = SchmidtChannel::maximally_entangled(3).unwrap();
        let p = build_conclusive_povm(&ch, &b, 1.0).unwrap();
        assert!(matches!(
            dilate(&p, 2),
            Err(Error::AncillaCapacity { ancilla: 2, needed: 3, .. })
        ));
    }

    #[test]
    fn unrefined_remainder_is_split_into_kraus_vectors() {
        let b = build_weyl_basis(2).unwrap();
        let ch = SchmidtChannel::from_cos_theta_c(0.3).unwrap();
        let p = build_conclusive_povm(&ch, &b, 0.5).unwrap();
        let dil = dilate(&p, 2).unwrap();
        assert_eq!(dil.outcome_map[4].len(), 4);
        assert!(dil.check().max_residual < 1e-10);
    }
}
