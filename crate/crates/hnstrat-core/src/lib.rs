//! Exact-arithmetic stability for bounded complexes of sheaves presented by
//! formal invariants.
//!
//! Everything here works at one of two levels:
//!
//! * the *formal* level ([`complex`], [`stability`], [`hn`], [`hm`], [`beta`]):
//!   a complex is a vector of (rank, Hilbert polynomial) pairs with image
//!   invariants for the boundary maps, and all computations (semistability
//!   verdicts, filtrations, one-parameter-subgroup weights, stratification
//!   indices) are exact rational arithmetic on those invariants;
//! * the *concrete* level ([`oracle`]): honest complexes of matrices over a
//!   small finite field, where subobjects can be enumerated outright and the
//!   formal answers cross-checked.
//!
//! No floating point is used anywhere; every comparison of polynomials is the
//! asymptotic (large-argument) order computed coefficient by coefficient.

pub mod beta;
pub mod complex;
pub mod error;
pub mod hm;
pub mod hn;
pub mod oracle;
pub mod poly;
pub mod rational;
pub mod stability;

pub use beta::StratumCertificate;
pub use complex::{BlockLabel, FormalComplex, FormalSheaf, HNFiltration, HnType, SubcomplexInvariants};
pub use error::Error;
pub use hm::OneParameterSubgroup;
pub use poly::Poly;
pub use rational::Rational;
pub use stability::{EpsilonFamily, ParameterInput, StabilityParameters, Verdict};
