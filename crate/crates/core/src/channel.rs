//! Pure entangled channels in Schmidt form and the non-orthogonal
//! measurement states built on them.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, von_neumann_entropy, Ket, Operator, C64, ONE, ZERO};
use crate::weyl::UnitaryBasis;

/// Accepted deviation of `Σ a_i²` from one.
pub const NORM_TOL: f64 = 1e-9;

/// `|ψ⟩₂₃ = Σ_i a_i |ii⟩` with real `a_i ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchmidtChannel {
    coeffs: Vec<f64>,
    k_min: usize,
}

/// Validate Schmidt coefficients. They must already be normalized.
pub fn make_channel(coeffs: &[f64]) -> Result<SchmidtChannel> {
    if coeffs.len() < 2 {
        return Err(Error::Domain(format!(
            "channel needs at least two Schmidt coefficients, got {}",
            coeffs.len()
        )));
    }
    if let Some((i, &a)) = coeffs.iter().enumerate().find(|(_, a)| !(**a >= 0.0) || !a.is_finite()) {
        return Err(Error::Domain(format!("Schmidt coefficient a_{i} = {a} is not a finite nonnegative number")));
    }
    let norm: f64 = coeffs.iter().map(|a| a * a).sum();
    if norm == 0.0 {
        return Err(Error::Domain("all Schmidt coefficients are zero".into()));
    }
    let deviation = (norm - 1.0).abs();
    if deviation > NORM_TOL {
        return Err(Error::Normalization {
            context: "sum of squared Schmidt coefficients".into(),
            deviation,
        });
    }
    // lowest index wins ties
    let k_min = coeffs
        .iter()
        .enumerate()
        .fold(0, |best, (i, &a)| if a < coeffs[best] { i } else { best });
    Ok(SchmidtChannel {
        coeffs: coeffs.to_vec(),
        k_min,
    })
}

impl SchmidtChannel {
    /// `a_i = d^(-1/2)`
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        make_channel(&vec![1.0 / (d as f64).sqrt(); d])
    }

    /// Qubit channel `2^(-1/2)[√(1-cosθ_c)|00⟩ + √(1+cosθ_c)|11⟩]`.
    pub fn from_cos_theta_c(cos_theta_c: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&cos_theta_c) {
            return Err(Error::Domain(format!("cos θ_c = {cos_theta_c} outside [-1, 1]")));
        }
        let a1 = ((1.0 - cos_theta_c) / 2.0).sqrt();
        let a2 = ((1.0 + cos_theta_c) / 2.0).sqrt();
        make_channel(&[a1, a2])
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs[i]
    }

    /// `a_i²`
    pub fn weights(&self) -> Vec<f64> {
        self.coeffs.iter().map(|a| a * a).collect()
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn min_coeff(&self) -> f64 {
        self.coeffs[self.k_min]
    }

    pub fn is_full_rank(&self) -> bool {
        self.coeffs.iter().all(|&a| a > 0.0)
    }

    pub(crate) fn require_full_rank(&self) -> Result<()> {
        match self.coeffs.iter().position(|&a| a <= 0.0) {
            Some(index) => Err(Error::SingularChannel { index }),
            None => Ok(()),
        }
    }

    /// The channel state on `d²` amplitudes.
    pub fn state(&self) -> Ket {
        let d = self.dim();
        let mut amps = vec![ZERO; d * d];
        for (i, &a) in self.coeffs.iter().enumerate() {
            amps[i * d + i] = C64::new(a, 0.0);
        }
        Ket::new(amps).expect("d² > 0")
    }

    /// Entanglement entropy of either half, via the reduced density operator.
    pub fn entanglement_entropy(&self) -> Result<f64> {
        let d = self.dim();
        let rho = partial_trace(&self.state().projector(), 0, &[d, d])?;
        von_neumann_entropy(&rho)
    }

    fn check_basis(&self, basis: &UnitaryBasis) -> Result<()> {
        if basis.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "channel dimension {} vs basis dimension {}",
                self.dim(),
                basis.dim()
            )));
        }
        Ok(())
    }
}

/// `Γ^α_ij = U^α_ij a_j`, its inverse `(1/d) conj(U^α_ij) / a_j`, and the dual
/// coefficients `Γ̃ = conj(Γ⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTriple {
    pub gamma: Vec<DMatrix<C64>>,
    pub gamma_inv: Vec<DMatrix<C64>>,
    pub gamma_tilde: Vec<DMatrix<C64>>,
}

pub fn gamma_triple(ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<GammaTriple> {
    ch.check_basis(basis)?;
    ch.require_full_rank()?;
    let d = ch.dim();
    let a = ch.coeffs();
    let df = d as f64;
    let mut gamma = Vec::with_capacity(d * d);
    let mut gamma_inv = Vec::with_capacity(d * d);
    let mut gamma_tilde = Vec::with_capacity(d * d);
    for u in basis.ops() {
        gamma.push(DMatrix::from_fn(d, d, |i, j| u.get(i, j) * a[j]));
        let inv = DMatrix::from_fn(d, d, |i, j| u.get(i, j).conj() / (df * a[j]));
        gamma_tilde.push(inv.map(|c| c.conj()));
        gamma_inv.push(inv);
    }
    Ok(GammaTriple {
        gamma,
        gamma_inv,
        gamma_tilde,
    })
}

impl GammaTriple {
    /// `max |Σ_α Γ⁻¹^α_ij Γ^α_kl - δ_ik δ_jl|`
    pub fn left_inverse_error(&self) -> f64 {
        let d = self.gamma[0].nrows();
        let n = d * d;
        let mut worst: f64 = 0.0;
        for ij in 0..n {
            for kl in 0..n {
                let s: C64 = self
                    .gamma_inv
                    .iter()
                    .zip(self.gamma.iter())
                    .map(|(gi, g)| gi[(ij / d, ij % d)] * g[(kl / d, kl % d)])
                    .sum();
                let want = if ij == kl { ONE } else { ZERO };
                worst = worst.max((s - want).norm());
            }
        }
        worst
    }

    /// `max |Σ_ij Γ^α_ij Γ⁻¹^β_ij - δ_αβ|`
    pub fn right_inverse_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, g) in self.gamma.iter().enumerate() {
            for (b, gi) in self.gamma_inv.iter().enumerate() {
                let s: C64 = g.iter().zip(gi.iter()).map(|(x, y)| x * y).sum();
                let want = if a == b { ONE } else { ZERO };
                worst = worst.max((s - want).norm());
            }
        }
        worst
    }
}

fn flatten(m: &DMatrix<C64>) -> Ket {
    let d = m.nrows();
    Ket::new((0..d * m.ncols()).map(|ij| m[(ij / d, ij % d)]).collect()).expect("nonempty")
}

/// `|ψ_α⟩ = (U^α ⊗ 1)|ψ⟩₂₃ = Σ_ij Γ^α_ij |ij⟩`
pub fn basis_states(ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<Vec<Ket>> {
    Ok(gamma_triple(ch, basis)?.gamma.iter().map(flatten).collect())
}

/// Unnormalized duals `|ψ̃_α⟩ = Σ_ij Γ̃^α_ij |ij⟩` with `⟨ψ̃_α|ψ_β⟩ = δ_αβ`.
pub fn dual_states(ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<Vec<Ket>> {
    Ok(gamma_triple(ch, basis)?.gamma_tilde.iter().map(flatten).collect())
}

/// `max |Σ_{α,ij} Γ⁻¹^α_ij |ψ_α⟩⟨ij| - 1|`
pub fn modified_completeness_error(ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<f64> {
    let g = gamma_triple(ch, basis)?;
    let states: Vec<Ket> = g.gamma.iter().map(flatten).collect();
    let d = ch.dim();
    let n = d * d;
    // column ij of the sum is Σ_α Γ⁻¹^α_ij |ψ_α⟩
    let sum = DMatrix::from_fn(n, n, |row, ij| {
        states
            .iter()
            .zip(g.gamma_inv.iter())
            .map(|(s, gi)| gi[(ij / d, ij % d)] * s.amplitudes()[row])
            .sum::<C64>()
    });
    Operator::from_matrix(sum).max_abs_diff(&Operator::identity(n))
}
