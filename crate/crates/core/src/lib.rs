//! Local parent Hamiltonians for subspaces of small multi-qudit systems.
//!
//! The crate decides whether a subspace `V` is determined by the marginals of
//! its maximally mixed state on an interaction pattern `K`, and builds
//! `K`-local Hamiltonians whose ground space is exactly `V`.

pub mod constructors;
pub mod correlated;
pub mod error;
pub mod geometry2d;
pub mod maxent;
pub mod operator;
pub mod pattern;
pub mod random;
pub mod sdp;
pub mod states;

pub use error::{Error, Result};
pub use operator::{
    c64, eigh, intersect_all, log_on_support, partial_trace, tensor_embed, von_neumann_entropy, CMat, CVec,
    DensityMatrix, Eigh, HermitianOperator, Subspace, SystemShape, C64,
};
pub use pattern::{LocalBasis, LocalHamiltonian, LocalTerm, MarginalVector, Pattern};
