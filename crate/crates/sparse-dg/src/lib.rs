//! Sparse grid discontinuous Galerkin solver for linear transport equations
//! in two to four dimensions, with drivers for kinetic benchmark systems
//! (Vlasov-Ampere, linear relaxation).
//!
//! The approximation space restricts hierarchical multiwavelet tensor levels
//! to |l|_1 <= N, cutting degrees of freedom from O(2^{Nd}) to
//! O(2^N N^{d-1}) while retaining the conservation and stability properties
//! of the underlying DG weak form.

pub mod basis1d;
pub mod diagnostics;
pub mod error;
pub mod function1d;
pub mod kinetic;
pub mod projection;
pub mod quadrature;
pub mod sparse_space;
pub mod time_stepper;
pub mod transform;
pub mod transport;

pub use error::{Error, Result};
