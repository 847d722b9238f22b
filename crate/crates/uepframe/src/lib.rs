//! Symbol-level construction and verification of multivariate tight wavelet
//! frames.
//!
//! Everything here works with Laurent polynomials on the torus: a subdivision
//! mask `p` with dilation matrix `M` is tested and extended to a tight frame
//! through the unitary extension identities
//!
//! ```text
//! δ_{σ,τ} - p^{σ*} p^τ = Σ_j q_j^{σ*} q_j^τ ,   σ, τ ∈ G,
//! ```
//!
//! either constructively from a sum-of-hermitian-squares certificate for
//! `f = 1 - Σ_σ p^{σ*} p^σ`, or numerically through a semidefinite
//! feasibility problem over Gram matrices on a fixed support set.

// indexed loops mirror the matrix subscripts throughout the numerics
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod format;
pub mod isotypical;
pub mod lattice;
pub mod laurent;
pub mod linalg;
pub mod sdp_frame;
pub mod sos_frame;
pub mod verify;

pub use isotypical::Mask;
pub use lattice::{DilationContext, IntMatrix};
pub use laurent::{LaurentPoly, MultiIndex, TorusPoint};
pub use verify::{FrameSystem, VerificationReport};
