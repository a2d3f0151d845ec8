//! Conclusive teleportation of a `d`-dimensional unknown state.
//!
//! A partially entangled pure channel `Σ a_i |ii⟩` cannot support perfect
//! teleportation with an orthogonal joint measurement. A joint POVM built
//! from the duals of the non-orthogonal states `(U^α ⊗ 1)|ψ⟩` identifies the
//! correction unitary exactly with probability `λ ≤ d·min a_i²`, leaving an
//! inconclusive remainder that still carries some information.
//!
//! The crate builds those measurements, evaluates their Haar-averaged
//! fidelity exactly through second-moment identities, cross-checks the
//! result by Monte Carlo simulation, and realizes each POVM as an orthogonal
//! measurement on an extended space.

pub mod channel;
pub mod dilation;
pub mod error;
pub mod fidelity;
pub mod figure;
pub mod format;
pub mod formulas;
pub mod linalg;
pub mod povm;
pub mod verify;
pub mod weyl;

pub use channel::{basis_states, dual_states, gamma_triple, make_channel, GammaTriple, SchmidtChannel};
pub use dilation::{dilate, DilationResult};
pub use error::{Error, Result};
pub use fidelity::{
    avg_fidelity_term, optimal_correction, outcome_channel, report, simulate, Corrections,
    FidelityReport, OutcomeChannelMap, Simulation, SimulationOptions, TranscriptRecord,
};
pub use linalg::{
    haar_random_ket, partial_trace, psd_sqrt, von_neumann_entropy, Ket, Operator, Tensor, C64,
};
pub use povm::{
    build_conclusive_povm, build_theta_povm, lambda_max, refine_inconclusive_product,
    refine_inconclusive_residual, ElementKind, PovmSet, Refinement, ThetaPovmFamily,
};
pub use weyl::{build_weyl_basis, maximally_entangled_basis, UnitaryBasis};
