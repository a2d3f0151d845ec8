//! Dense complex vectors and matrices for small quantum systems.
//!
//! Joint basis states are flattened row-major: for subsystems of dimension
//! `d_a` and `d_b`, the product ket `|i⟩|j⟩` sits at index `i * d_b + j`.
//! Labels are zero-based throughout; a label `i` here is `i + 1` in
//! one-based physics notation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest number of entries a tensor product may allocate by default.
pub const DEFAULT_TENSOR_CAP: usize = 1_000_000;

/// Eigenvalues at or below this are treated as zero by `psd_sqrt`.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Negative eigenvalues down to this are accepted as rounding noise.
pub const PSD_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// A state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: DVector<C64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Shape("ket must have positive dimension".into()));
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis ket `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Shape(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = DVector::from_element(dim, ZERO);
        v[index] = ONE;
        Ok(Self { amplitudes: v })
    }

    pub(crate) fn from_vector(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Shape(format!(
                "inner product of dims {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|self⟩⟨self|`
    pub fn projector(&self) -> Operator {
        Operator::from_matrix(&self.amplitudes * self.amplitudes.adjoint())
    }

    pub fn scaled(&self, factor: C64) -> Ket {
        Ket::from_vector(&self.amplitudes * factor)
    }

    pub fn tensor(&self, other: &Ket) -> Result<Ket> {
        self.tensor_with_cap(other, DEFAULT_TENSOR_CAP)
    }

    pub fn tensor_with_cap(&self, other: &Ket, cap: usize) -> Result<Ket> {
        let requested = checked_entries(self.dim(), other.dim(), cap)?;
        let mut out = Vec::with_capacity(requested);
        for a in self.amplitudes.iter() {
            for b in other.amplitudes.iter() {
                out.push(a * b);
            }
        }
        Ok(Ket::from_vector(DVector::from_vec(out)))
    }
}

/// A linear map between finite-dimensional spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    entries: DMatrix<C64>,
}

impl Operator {
    pub fn from_matrix(entries: DMatrix<C64>) -> Self {
        Self { entries }
    }

    /// Build from row-major entries.
    pub fn from_rows(dim_out: usize, dim_in: usize, entries: &[C64]) -> Result<Self> {
        if dim_out == 0 || dim_in == 0 || entries.len() != dim_out * dim_in {
            return Err(Error::Shape(format!(
                "{} entries for a {dim_out}x{dim_in} operator",
                entries.len()
            )));
        }
        Ok(Self {
            entries: DMatrix::from_row_slice(dim_out, dim_in, entries),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim_out: usize, dim_in: usize) -> Self {
        Self {
            entries: DMatrix::from_element(dim_out, dim_in, ZERO),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self {
            entries: DMatrix::from_diagonal(&DVector::from_vec(v)),
        }
    }

    pub fn dim_out(&self) -> usize {
        self.entries.nrows()
    }

    pub fn dim_in(&self) -> usize {
        self.entries.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.dim_in() == self.dim_out()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Operator {
        Operator::from_matrix(self.entries.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        if self.dim_in() != other.dim_out() {
            return Err(Error::Shape(format!(
                "product of {}x{} and {}x{}",
                self.dim_out(),
                self.dim_in(),
                other.dim_out(),
                other.dim_in()
            )));
        }
        Ok(Operator::from_matrix(&self.entries * &other.entries))
    }

    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.dim_in() != ket.dim() {
            return Err(Error::Shape(format!(
                "{}x{} operator applied to dim {} ket",
                self.dim_out(),
                self.dim_in(),
                ket.dim()
            )));
        }
        Ok(Ket::from_vector(&self.entries * ket.as_vector()))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_shape(other)?;
        Ok(Operator::from_matrix(&self.entries + &other.entries))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.same_shape(other)?;
        Ok(Operator::from_matrix(&self.entries - &other.entries))
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator::from_matrix(&self.entries * factor)
    }

    fn same_shape(&self, other: &Operator) -> Result<()> {
        if self.entries.shape() != other.entries.shape() {
            return Err(Error::Shape(format!(
                "{:?} vs {:?}",
                self.entries.shape(),
                other.entries.shape()
            )));
        }
        Ok(())
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &Operator) -> Result<C64> {
        self.same_shape(other)?;
        Ok(self.entries.dotc(&other.entries))
    }

    /// `max |A - A†|`
    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `max |A†A - I|`
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.dim_in();
        (self.entries.adjoint() * &self.entries - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.hermiticity_error() <= 1e-12_f64.max(tol)
            && hermitian_eigen(self).map(|e| e.min_value() >= -tol).unwrap_or(false)
    }

    pub fn tensor(&self, other: &Operator) -> Result<Operator> {
        self.tensor_with_cap(other, DEFAULT_TENSOR_CAP)
    }

    pub fn tensor_with_cap(&self, other: &Operator, cap: usize) -> Result<Operator> {
        let rows = self.dim_out() * other.dim_out();
        let cols = self.dim_in() * other.dim_in();
        checked_entries(rows, cols, cap)?;
        let (br, bc) = (other.dim_out(), other.dim_in());
        let mut out = DMatrix::from_element(rows, cols, ZERO);
        for i in 0..self.dim_out() {
            for j in 0..self.dim_in() {
                let a = self.entries[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..br {
                    for l in 0..bc {
                        out[(i * br + k, j * bc + l)] = a * other.entries[(k, l)];
                    }
                }
            }
        }
        Ok(Operator::from_matrix(out))
    }
}

fn checked_entries(a: usize, b: usize, cap: usize) -> Result<usize> {
    match a.checked_mul(b) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::Capacity { requested: n, cap }),
        None => Err(Error::Capacity {
            requested: usize::MAX,
            cap,
        }),
    }
}

/// Kronecker product for kets and operators alike.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for Ket {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ket::tensor(self, other)
    }
}

impl Tensor for Operator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Operator::tensor(self, other)
    }
}

/// Spectral decomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Ket {
        Ket::from_vector(self.vectors.column(k).into_owned())
    }

    /// `V f(Λ) V†`
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Operator {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &v) in self.values.iter().enumerate() {
            let s = C64::new(f(v), 0.0);
            for r in 0..n {
                scaled[(r, k)] *= s;
            }
        }
        Operator::from_matrix(scaled * self.vectors.adjoint())
    }
}

/// The one spectral kernel: everything positive or entropic goes through here.
/// The input is symmetrized before decomposition.
pub fn hermitian_eigen(m: &Operator) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition of a {}x{} operator",
            m.dim_out(),
            m.dim_in()
        )));
    }
    let half = C64::new(0.5, 0.0);
    let sym = (m.matrix() + m.matrix().adjoint()) * half;
    let eig = sym.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(sym.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(HermitianEigen { values, vectors })
}

/// Reduced operator on subsystem `keep` of a system with subsystem dimensions `dims`.
pub fn partial_trace(rho: &Operator, keep: usize, dims: &[usize]) -> Result<Operator> {
    if keep >= dims.len() {
        return Err(Error::Shape(format!(
            "subsystem {keep} out of range for {} subsystems",
            dims.len()
        )));
    }
    let total: usize = dims.iter().product();
    if !rho.is_square() || rho.dim_in() != total || dims.contains(&0) {
        return Err(Error::Shape(format!(
            "operator {}x{} does not match subsystem dims {dims:?}",
            rho.dim_out(),
            rho.dim_in()
        )));
    }
    let dk = dims[keep];
    let left: usize = dims[..keep].iter().product();
    let right: usize = dims[keep + 1..].iter().product();
    let m = rho.matrix();
    let out = DMatrix::from_fn(dk, dk, |a, b| {
        let mut acc = ZERO;
        for l in 0..left {
            for r in 0..right {
                let row = (l * dk + a) * right + r;
                let col = (l * dk + b) * right + r;
                acc += m[(row, col)];
            }
        }
        acc
    });
    Ok(Operator::from_matrix(out))
}

/// Positive square root. Eigenvalues at or below [`EIGEN_CLAMP`] become zero.
pub fn psd_sqrt(m: &Operator) -> Result<Operator> {
    let eig = hermitian_eigen(m)?;
    let lowest = eig.min_value();
    if lowest < -PSD_TOL {
        return Err(Error::Positivity {
            context: "square root".into(),
            eigenvalue: lowest,
        });
    }
    Ok(eig.map_values(|v| if v <= EIGEN_CLAMP { 0.0 } else { v.sqrt() }))
}

/// Haar-random pure state: a normalized vector of i.i.d. standard complex Gaussians.
pub fn haar_random_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Ket> {
    if d < 2 {
        return Err(Error::Domain(format!("Haar sampling needs d >= 2, got {d}")));
    }
    let mut buf = vec![ZERO; d];
    fill_haar(&mut buf, rng);
    Ket::new(buf)
}

/// Haar-random unitary: QR of a complex Ginibre matrix with the phases of
/// `R`'s diagonal folded into `Q`.
pub fn haar_random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Operator> {
    if d == 0 {
        return Err(Error::Shape("unitary of dimension 0".into()));
    }
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        let rk = r[(k, k)];
        let phase = if rk.norm() > 0.0 { rk / rk.norm() } else { ONE };
        for row in 0..d {
            q[(row, k)] *= phase;
        }
    }
    Ok(Operator::from_matrix(q))
}

pub(crate) fn fill_haar<R: Rng + ?Sized>(buf: &mut [C64], rng: &mut R) {
    loop {
        let mut norm = 0.0;
        for c in buf.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *c = C64::new(re, im);
            norm += re * re + im * im;
        }
        if norm > 0.0 {
            let s = 1.0 / norm.sqrt();
            buf.iter_mut().for_each(|c| *c *= s);
            return;
        }
    }
}

/// Entropy in bits, `-Σ λ log₂ λ` with `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &Operator) -> Result<f64> {
    let tr = rho.trace();
    let deviation = (tr - ONE).norm();
    if deviation > 1e-8 {
        return Err(Error::Normalization {
            context: "density operator trace".into(),
            deviation,
        });
    }
    let eig = hermitian_eigen(rho)?;
    if eig.min_value() < -PSD_TOL {
        return Err(Error::Positivity {
            context: "density operator".into(),
            eigenvalue: eig.min_value(),
        });
    }
    let s: f64 = eig
        .values
        .iter()
        .filter(|&&v| v > EIGEN_CLAMP)
        .map(|&v| -v * v.log2())
        .sum();
    let max = (rho.dim_in() as f64).log2();
    Ok(s.clamp(0.0, max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_operator(n: usize, rng: &mut ChaCha8Rng) -> Operator {
        let v: Vec<C64> = (0..n * n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        Operator::from_rows(n, n, &v).unwrap()
    }

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> Operator {
        let a = random_operator(n, rng);
        let m = a.adjoint().mul(&a).unwrap();
        let tr = m.trace();
        m.scale(tr.inv())
    }

    #[test]
    fn ket_tensor_basis_bookkeeping() {
        let k = Ket::basis(2, 0).unwrap().tensor(&Ket::basis(2, 1).unwrap()).unwrap();
        assert_eq!(k.amplitudes(), &[ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn identity_tensor_identity() {
        let i4 = Operator::identity(2).tensor(&Operator::identity(2)).unwrap();
        assert_eq!(i4, Operator::identity(4));
    }

    #[test]
    fn tensor_matches_index_definition() {
        let x = Operator::from_rows(2, 2, &[ZERO, ONE, ONE, ZERO]).unwrap();
        let z = Operator::from_rows(2, 2, &[ONE, ZERO, ZERO, -ONE]).unwrap();
        let xz = x.tensor(&z).unwrap();
        // (X⊗Z)[(i,k),(j,l)] = X[i,j] Z[k,l]
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(xz.get(i * 2 + k, j * 2 + l), x.get(i, j) * z.get(k, l));
                    }
                }
            }
        }
        let expected = [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ];
        for (r, row) in expected.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                assert_eq!(xz.get(r, col), c(v, 0.0));
            }
        }
    }

    #[test]
    fn tensor_capacity_error() {
        let a = Operator::identity(40);
        let err = a.tensor_with_cap(&a, 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { requested: 2_560_000, cap: 1000 }));
        let k = Ket::basis(10, 0).unwrap();
        assert!(k.tensor_with_cap(&k, 99).is_err());
    }

    #[test]
    fn tensor_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_operator(2, &mut rng);
        let b = random_operator(3, &mut rng);
        let cc = random_operator(2, &mut rng);
        let left = a.tensor(&b).unwrap().tensor(&cc).unwrap();
        let right = a.tensor(&b.tensor(&cc).unwrap()).unwrap();
        assert!(left.max_abs_diff(&right).unwrap() <= 1e-14);
    }

    #[test]
    fn partial_trace_product_state() {
        let k = Ket::basis(4, 0).unwrap();
        let r = partial_trace(&k.projector(), 0, &[2, 2]).unwrap();
        assert_eq!(r, Ket::basis(2, 0).unwrap().projector());
    }

    #[test]
    fn partial_trace_maximally_entangled_qutrits() {
        let s = 1.0 / 3f64.sqrt();
        let mut amps = vec![ZERO; 9];
        for i in 0..3 {
            amps[i * 3 + i] = c(s, 0.0);
        }
        let rho = Ket::new(amps).unwrap().projector();
        for keep in 0..2 {
            let r = partial_trace(&rho, keep, &[3, 3]).unwrap();
            let want = Operator::identity(3).scale(c(1.0 / 3.0, 0.0));
            assert!(r.max_abs_diff(&want).unwrap() <= 1e-15);
        }
    }

    #[test]
    fn partial_trace_schmidt_state() {
        // √0.8|00⟩ + √0.2|11⟩; traced index j: ρ[a,b] = Σ_j ψ[a,j] ψ*[b,j]
        let psi = [0.8f64.sqrt(), 0.0, 0.0, 0.2f64.sqrt()];
        let mut brute = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                for j in 0..2 {
                    brute[a][b] += psi[a * 2 + j] * psi[b * 2 + j];
                }
            }
        }
        let rho = Ket::from_real(&psi).unwrap().projector();
        let r = partial_trace(&rho, 0, &[2, 2]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                assert!((r.get(a, b) - c(brute[a][b], 0.0)).norm() <= 1e-15);
            }
        }
        assert!((r.get(0, 0).re - 0.8).abs() <= 1e-15);
        assert!((r.get(1, 1).re - 0.2).abs() <= 1e-15);
    }

    #[test]
    fn partial_trace_middle_subsystem_and_shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(12, &mut rng);
        let r = partial_trace(&rho, 1, &[2, 3, 2]).unwrap();
        assert_eq!(r.dim_in(), 3);
        assert!((r.trace() - ONE).norm() <= 1e-12);
        assert!(matches!(partial_trace(&rho, 3, &[2, 3, 2]), Err(Error::Shape(_))));
        assert!(matches!(partial_trace(&rho, 0, &[2, 2]), Err(Error::Shape(_))));
    }

    #[test]
    fn psd_sqrt_simple_cases() {
        let i = Operator::identity(3);
        assert!(psd_sqrt(&i).unwrap().max_abs_diff(&i).unwrap() <= 1e-14);
        let s = psd_sqrt(&Operator::diagonal(&[4.0, 9.0])).unwrap();
        assert!(s.max_abs_diff(&Operator::diagonal(&[2.0, 3.0])).unwrap() <= 1e-14);
    }

    #[test]
    fn psd_sqrt_rejects_negative_eigenvalue() {
        match psd_sqrt(&Operator::diagonal(&[1.0, -0.25])) {
            Err(Error::Positivity { eigenvalue, .. }) => assert!((eigenvalue + 0.25).abs() < 1e-14),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn psd_sqrt_random_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 4, 9] {
            let a = random_operator(n, &mut rng);
            let m = a.adjoint().mul(&a).unwrap();
            let s = psd_sqrt(&m).unwrap();
            assert!(s.mul(&s).unwrap().max_abs_diff(&m).unwrap() <= 1e-10);
            let comm = s.mul(&m).unwrap().sub(&m.mul(&s).unwrap()).unwrap();
            assert!(comm.max_abs() <= 1e-10);
            assert!(s.is_psd(1e-10));
        }
    }

    #[test]
    fn haar_sampler_is_deterministic() {
        let a = haar_random_ket(5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = haar_random_ket(5, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.is_normalized(1e-12));
        assert!(haar_random_ket(1, &mut ChaCha8Rng::seed_from_u64(9)).is_err());
    }

    #[test]
    fn haar_sampler_first_and_second_moments() {
        // E|c|² = 1/d, E|c|⁴ = 2/(d(d+1)); σ from the exact Haar moments
        // E|c|⁴ and E|c|⁸ = 24/(d(d+1)(d+2)(d+3)).
        let n = 100_000;
        for d in [2usize, 3, 5] {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + d as u64);
            let (mut m2, mut m4) = (0.0, 0.0);
            for _ in 0..n {
                let k = haar_random_ket(d, &mut rng).unwrap();
                let p = k.amplitudes()[0].norm_sqr();
                m2 += p;
                m4 += p * p;
            }
            let (m2, m4) = (m2 / n as f64, m4 / n as f64);
            let df = d as f64;
            let e2 = 1.0 / df;
            let e4 = 2.0 / (df * (df + 1.0));
            let e8 = 24.0 / (df * (df + 1.0) * (df + 2.0) * (df + 3.0));
            let sd2 = ((e4 - e2 * e2) / n as f64).sqrt();
            let sd4 = ((e8 - e4 * e4) / n as f64).sqrt();
            assert!((m2 - e2).abs() <= 3.0 * sd2, "d={d} m2={m2}");
            assert!((m4 - e4).abs() <= 3.0 * sd4, "d={d} m4={m4}");
        }
    }

    #[test]
    fn entropy_reference_values() {
        let half = Operator::identity(2).scale(c(0.5, 0.0));
        assert!((von_neumann_entropy(&half).unwrap() - 1.0).abs() <= 1e-12);
        let pure = Ket::from_real(&[0.6, 0.8]).unwrap().projector();
        assert!(von_neumann_entropy(&pure).unwrap().abs() <= 1e-12);
        let direct = -(0.8f64 * 0.8f64.log2() + 0.2 * 0.2f64.log2());
        let s = von_neumann_entropy(&Operator::diagonal(&[0.8, 0.2])).unwrap();
        assert!((s - direct).abs() <= 1e-12);
        assert!((s - 0.72193).abs() <= 1e-5);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        let err = von_neumann_entropy(&Operator::diagonal(&[0.8, 0.3])).unwrap_err();
        assert!(matches!(err, Error::Normalization { .. }));
    }

    #[test]
    fn eigen_reconstructs_hermitian_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(6, &mut rng);
        let eig = hermitian_eigen(&rho).unwrap();
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        let back = eig.map_values(|v| v);
        assert!(back.max_abs_diff(&rho).unwrap() <= 1e-13);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn partial_trace_preserves_trace(seed in any::<u64>(), keep in 0usize..3) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random_density(12, &mut rng);
                let r = partial_trace(&rho, keep, &[2, 3, 2]).unwrap();
                prop_assert!((r.trace() - rho.trace()).norm() <= 1e-12);
            }

            #[test]
            fn entropy_is_bounded(seed in any::<u64>(), n in 2usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = von_neumann_entropy(&random_density(n, &mut rng)).unwrap();
                prop_assert!(s >= 0.0 && s <= (n as f64).log2() + 1e-12);
            }
        }
    }
}
