//! Exact and numerical tools for the mixed Hessian of the dispersionless
//! Toda τ-function at f(w) = w + ζ w^{1-s}: Raney numbers, Gram blocks and
//! their spectra, hypergeometric continuation past the threshold, and the
//! Jacobi-operator picture of the Gram weights.

pub mod acceptance;
pub mod continuation;
pub mod ddouble;
pub mod error;
pub mod fit;
pub mod maps;
pub mod ode;
pub mod quad;
pub mod gram;
pub mod jacobi;
pub mod linalg;
pub mod raney;
pub mod spectra;

pub use error::{Error, Result};
