//! Joint POVMs on particles 1 and 2.
//!
//! Element order is fixed: the `d²` conclusive elements first (`α = 0..d²`),
//! followed by either a single remainder or its refinement. Product
//! refinements use `α = d² + j·d + i` for the element `|ij⟩⟨ij|`.

use serde::Serialize;

use crate::channel::{dual_states, SchmidtChannel};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, psd_sqrt, Ket, Operator, C64, PSD_TOL};
use crate::weyl::{maximally_entangled_basis, UnitaryBasis};

/// Completeness tolerance.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Largest off-diagonal entry tolerated in a remainder treated as diagonal.
pub const DIAGONAL_TOL: f64 = 1e-10;

/// Role of a POVM element in the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementKind {
    /// Identifies `|ψ_α⟩`; the receiver applies `U^α`.
    Conclusive {
        #[serde(rename = "unitary")]
        alpha: usize,
    },
    /// `|ij⟩⟨ij|` piece of the remainder; the receiver holds `|j⟩`.
    InconclusiveProduct { i: usize, j: usize },
    /// `S|ψ^m_α⟩⟨ψ^m_α|S` with `S = √remainder`.
    InconclusiveResidual {
        #[serde(rename = "unitary")]
        alpha: usize,
    },
    /// Unrefined inconclusive operator.
    Remainder,
}

impl ElementKind {
    pub fn is_conclusive(&self) -> bool {
        matches!(self, ElementKind::Conclusive { .. })
    }

    pub fn label(&self) -> String {
        match self {
            ElementKind::Conclusive { alpha } => format!("conclusive({alpha})"),
            ElementKind::InconclusiveProduct { i, j } => format!("product({i};{j})"),
            ElementKind::InconclusiveResidual { alpha } => format!("residual({alpha})"),
            ElementKind::Remainder => "remainder".to_string(),
        }
    }
}

/// How the inconclusive remainder has been split up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    None,
    Product,
    Residual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub kind: ElementKind,
    pub operator: Operator,
    /// `v` with `operator = |v⟩⟨v|`, when the element was built rank-one.
    pub factor: Option<Ket>,
}

impl PovmElement {
    fn rank_one(kind: ElementKind, factor: Ket) -> Self {
        Self {
            kind,
            operator: factor.projector(),
            factor: Some(factor),
        }
    }

    /// Rank-one factor, from the stored vector or from the spectrum.
    /// `Ok(None)` for the zero operator.
    pub fn rank_one_factor(&self, alpha: usize) -> Result<Option<Ket>> {
        if let Some(f) = &self.factor {
            return Ok(if f.norm_sqr() == 0.0 { None } else { Some(f.clone()) });
        }
        let eig = hermitian_eigen(&self.operator)?;
        let top = eig.max_value();
        let tol = 1e-10 * top.max(1.0);
        let rank = eig.values.iter().filter(|&&v| v > tol).count();
        match rank {
            0 => Ok(None),
            1 => {
                let k = eig.values.len() - 1;
                Ok(Some(eig.vector(k).scaled(C64::new(top.sqrt(), 0.0))))
            }
            _ => Err(Error::DecompositionRequired { alpha, rank }),
        }
    }
}

/// Positive operators summing to the identity on the `d²`-dimensional
/// joint space of particles 1 and 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmSet {
    local_dim: usize,
    lambda: f64,
    refinement: Refinement,
    elements: Vec<PovmElement>,
}

impl PovmSet {
    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn joint_dim(&self) -> usize {
        self.local_dim * self.local_dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn refinement(&self) -> Refinement {
        self.refinement
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn remainder(&self) -> Option<&Operator> {
        self.elements
            .iter()
            .find(|e| e.kind == ElementKind::Remainder)
            .map(|e| &e.operator)
    }

    pub fn sum(&self) -> Operator {
        let n = self.joint_dim();
        self.elements
            .iter()
            .fold(Operator::zeros(n, n), |acc, e| acc.add(&e.operator).expect("same shape"))
    }

    /// `max |Σ M_α - 1|`
    pub fn completeness_error(&self) -> f64 {
        self.sum()
            .max_abs_diff(&Operator::identity(self.joint_dim()))
            .expect("same shape")
    }

    /// Smallest eigenvalue over all elements.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let mut lowest = f64::INFINITY;
        for e in &self.elements {
            lowest = lowest.min(hermitian_eigen(&e.operator)?.min_value());
        }
        Ok(lowest)
    }

    /// Outcome probabilities averaged over Haar-random inputs:
    /// `Tr[M (1/d ⊗ diag(a²))]`.
    pub fn haar_probabilities(&self, ch: &SchmidtChannel) -> Result<Vec<f64>> {
        if ch.dim() != self.local_dim {
            return Err(Error::Shape(format!(
                "channel dimension {} vs POVM local dimension {}",
                ch.dim(),
                self.local_dim
            )));
        }
        Ok(self
            .elements
            .iter()
            .map(|e| haar_probability(&e.operator, ch))
            .collect())
    }

    /// Worst `⟨ψ_β|M_α|ψ_β⟩ / ⟨ψ_β|M_β|ψ_β⟩` over conclusive `α ≠ β`.
    /// Zero elements (λ = 0) contribute a zero ratio.
    pub fn identification_ratio(&self, states: &[Ket]) -> Result<f64> {
        let conclusive: Vec<(usize, &Operator)> = self
            .elements
            .iter()
            .filter_map(|e| match e.kind {
                ElementKind::Conclusive { alpha } => Some((alpha, &e.operator)),
                _ => None,
            })
            .collect();
        let expect = |op: &Operator, k: &Ket| -> Result<f64> {
            Ok(k.inner(&op.apply(k)?)?.re)
        };
        let mut worst: f64 = 0.0;
        for (beta, state) in states.iter().enumerate() {
            let Some((_, own)) = conclusive.iter().find(|(a, _)| *a == beta) else {
                continue;
            };
            let den = expect(own, state)?;
            for (alpha, op) in &conclusive {
                if *alpha == beta {
                    continue;
                }
                let num = expect(op, state)?.abs();
                worst = worst.max(if den > 0.0 { num / den } else { num });
            }
        }
        Ok(worst)
    }
}

/// Haar-averaged probability of a single joint element on the given channel.
pub fn haar_probability(element: &Operator, ch: &SchmidtChannel) -> f64 {
    let d = ch.dim();
    let w = ch.weights();
    let mut p = 0.0;
    for i in 0..d {
        for j in 0..d {
            p += element.get(i * d + j, i * d + j).re * w[j];
        }
    }
    p / d as f64
}

/// `d · min_i a_i²`, the largest conclusive weight keeping the remainder positive.
pub fn lambda_max(ch: &SchmidtChannel) -> f64 {
    let a = ch.min_coeff();
    ch.dim() as f64 * a * a
}

fn check_dims(ch: &SchmidtChannel, basis: &UnitaryBasis) -> Result<()> {
    if ch.dim() != basis.dim() {
        return Err(Error::Shape(format!(
            "channel dimension {} vs basis dimension {}",
            ch.dim(),
            basis.dim()
        )));
    }
    Ok(())
}

/// Conclusive elements and remainder without the range check on `λ`.
pub(crate) fn assemble_conclusive(
    ch: &SchmidtChannel,
    basis: &UnitaryBasis,
    lambda: f64,
) -> Result<PovmSet> {
    check_dims(ch, basis)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("λ = {lambda} must be a finite nonnegative number")));
    }
    let d = ch.dim();
    let n = d * d;
    let scale = C64::new(lambda.sqrt(), 0.0);
    let mut elements: Vec<PovmElement> = dual_states(ch, basis)?
        .into_iter()
        .enumerate()
        .map(|(alpha, dual)| {
            PovmElement::rank_one(ElementKind::Conclusive { alpha }, dual.scaled(scale))
        })
        .collect();
    let conclusive_sum = elements
        .iter()
        .fold(Operator::zeros(n, n), |acc, e| acc.add(&e.operator).expect("same shape"));
    let remainder = Operator::identity(n).sub(&conclusive_sum)?;
    elements.push(PovmElement {
        kind: ElementKind::Remainder,
        operator: remainder,
        factor: None,
    });
    Ok(PovmSet {
        local_dim: d,
        lambda,
        refinement: Refinement::None,
        elements,
    })
}

/// `M_α = λ|ψ̃_α⟩⟨ψ̃_α|` for every `α`, plus `M_rem = 1 - Σ M_α`.
pub fn build_conclusive_povm(
    ch: &SchmidtChannel,
    basis: &UnitaryBasis,
    lambda: f64,
) -> Result<PovmSet> {
    check_dims(ch, basis)?;
    ch.require_full_rank()?;
    let d = ch.dim() as f64;
    let bound = lambda_max(ch);
    if lambda > bound * (1.0 + 1e-12) {
        // 1 - λ/(d a_j²) < 0; report the smallest such diagonal entry
        let (j, a) = (ch.k_min(), ch.min_coeff());
        return Err(Error::Positivity {
            context: format!(
                "remainder weight 1 - λ/(d a_j²) at j = {j} with λ = {lambda} > λ_max = {bound}"
            ),
            eigenvalue: 1.0 - lambda / (d * a * a),
        });
    }
    assemble_conclusive(ch, basis, lambda.min(bound))
}

fn take_remainder(p: &PovmSet) -> Result<(Vec<PovmElement>, Operator)> {
    let mut kept = Vec::with_capacity(p.len());
    let mut remainder = None;
    for e in &p.elements {
        if e.kind == ElementKind::Remainder {
            if remainder.is_some() {
                return Err(Error::Domain("POVM holds more than one remainder".into()));
            }
            remainder = Some(e.operator.clone());
        } else {
            kept.push(e.clone());
        }
    }
    let remainder =
        remainder.ok_or_else(|| Error::Domain("POVM has no remainder to refine".into()))?;
    Ok((kept, remainder))
}

/// Split a diagonal remainder into `d²` weighted product projectors
/// `w_ij |ij⟩⟨ij|`, ordered `α = d² + j·d + i`.
pub fn refine_inconclusive_product(p: &PovmSet) -> Result<PovmSet> {
    let (mut elements, remainder) = take_remainder(p)?;
    let d = p.local_dim;
    let n = d * d;
    for r in 0..n {
        for c in 0..n {
            if r != c && remainder.get(r, c).norm() > DIAGONAL_TOL {
                return Err(Error::Domain(format!(
                    "remainder is not diagonal in the product basis: entry ({r},{c}) = {:e}",
                    remainder.get(r, c).norm()
                )));
            }
        }
    }
    for j in 0..d {
        for i in 0..d {
            let ij = i * d + j;
            let w = remainder.get(ij, ij).re;
            if w < -PSD_TOL {
                return Err(Error::Positivity {
                    context: format!("remainder diagonal at |{i}{j}⟩"),
                    eigenvalue: w,
                });
            }
            let ket = Ket::basis(n, ij)?.scaled(C64::new(w.max(0.0).sqrt(), 0.0));
            elements.push(PovmElement::rank_one(ElementKind::InconclusiveProduct { i, j }, ket));
        }
    }
    Ok(PovmSet {
        local_dim: d,
        lambda: p.lambda,
        refinement: Refinement::Product,
        elements,
    })
}

/// Split the remainder `R` into `√R |ψ^m_α⟩⟨ψ^m_α| √R`, one per basis unitary.
pub fn refine_inconclusive_residual(p: &PovmSet, basis: &UnitaryBasis) -> Result<PovmSet> {
    if basis.dim() != p.local_dim {
        return Err(Error::Shape(format!(
            "basis dimension {} vs POVM local dimension {}",
            basis.dim(),
            p.local_dim
        )));
    }
    let (mut elements, remainder) = take_remainder(p)?;
    let root = psd_sqrt(&remainder)?;
    for (alpha, m) in maximally_entangled_basis(basis).iter().enumerate() {
        let v = root.apply(m)?;
        elements.push(PovmElement::rank_one(ElementKind::InconclusiveResidual { alpha }, v));
    }
    Ok(PovmSet {
        local_dim: p.local_dim,
        lambda: p.lambda,
        refinement: Refinement::Residual,
        elements,
    })
}

/// Qubit POVM family with the relative angle of the measurement states
/// released from the channel angle (`cos θ` in place of `cos θ_c`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaPovmFamily {
    cos_theta_c: f64,
    cos_theta: f64,
    lambda: f64,
}

impl ThetaPovmFamily {
    pub fn new(cos_theta_c: f64, cos_theta: f64, lambda: f64) -> Result<Self> {
        for (name, c) in [("cos θ_c", cos_theta_c), ("cos θ", cos_theta)] {
            if !(c > -1.0 && c < 1.0) {
                return Err(Error::Domain(format!("{name} = {c} must lie in (-1, 1)")));
            }
        }
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!("λ = {lambda} must be nonnegative")));
        }
        let bound = 1.0 - cos_theta.abs();
        if lambda > bound + 1e-12 {
            let j = if cos_theta >= 0.0 { 0 } else { 1 };
            let denom = if j == 0 { 1.0 - cos_theta } else { 1.0 + cos_theta };
            return Err(Error::Positivity {
                context: format!("remainder weight at j = {j}: λ = {lambda} > 1 - |cos θ| = {bound}"),
                eigenvalue: 1.0 - lambda / denom,
            });
        }
        Ok(Self {
            cos_theta_c,
            cos_theta,
            lambda,
        })
    }

    /// Per-angle optimum `λ = 1 - |cos θ|`.
    pub fn optimal(cos_theta_c: f64, cos_theta: f64) -> Result<Self> {
        Self::new(cos_theta_c, cos_theta, 1.0 - cos_theta.abs())
    }

    pub fn cos_theta_c(&self) -> f64 {
        self.cos_theta_c
    }

    pub fn cos_theta(&self) -> f64 {
        self.cos_theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// The channel the family is evaluated on.
    pub fn channel(&self) -> Result<SchmidtChannel> {
        SchmidtChannel::from_cos_theta_c(self.cos_theta_c)
    }
}

/// Four weighted states `N[√(1+c)|00⟩ ± √(1-c)|11⟩]`,
/// `N[√(1+c)|10⟩ ± √(1-c)|01⟩]` with `N = (2 - 2c²)^(-1/2)`, plus the
/// remainder fixed by completeness.
pub fn build_theta_povm(fam: &ThetaPovmFamily) -> Result<PovmSet> {
    let fam = ThetaPovmFamily::new(fam.cos_theta_c, fam.cos_theta, fam.lambda)?;
    let c = fam.cos_theta;
    let norm = 1.0 / (2.0 - 2.0 * c * c).sqrt();
    let (p, m) = (norm * (1.0 + c).sqrt(), norm * (1.0 - c).sqrt());
    let w = fam.lambda.sqrt();
    // amplitudes on |00⟩, |01⟩, |10⟩, |11⟩
    let states = [
        [p, 0.0, 0.0, m],
        [p, 0.0, 0.0, -m],
        [0.0, m, p, 0.0],
        [0.0, -m, p, 0.0],
    ];
    let mut elements = Vec::with_capacity(5);
    for (alpha, s) in states.iter().enumerate() {
        let ket = Ket::from_real(&s.map(|x| x * w))?;
        elements.push(PovmElement::rank_one(ElementKind::Conclusive { alpha }, ket));
    }
    let sum = elements
        .iter()
        .fold(Operator::zeros(4, 4), |acc, e| acc.add(&e.operator).expect("same shape"));
    let remainder = Operator::identity(4).sub(&sum)?;
    let lowest = hermitian_eigen(&remainder)?.min_value();
    if lowest < -PSD_TOL {
        return Err(Error::Positivity {
            context: "theta-family remainder".into(),
            eigenvalue: lowest,
        });
    }
    elements.push(PovmElement {
        kind: ElementKind::Remainder,
        operator: remainder,
        factor: None,
    });
    Ok(PovmSet {
        local_dim: 2,
        lambda: fam.lambda,
        refinement: Refinement::None,
        elements,
    })
}
