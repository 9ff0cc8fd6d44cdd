//! Certified spectral rounding toolkit.
//!
//! Given vectors in isotropic position with fractional weights, the rounding
//! engine produces zero-one selections whose smallest eigenvalue and cost
//! carry runtime-checked certificates. On top of it sit a survivable
//! network-design pipeline, weighted experimental design with budgeted
//! rounding, deterministic greedy additive spectral sparsification, and a
//! validation harness for the concentration bounds the analysis relies on.
//!
//! The math core is generic over the scalar type via `num-traits`; the
//! aliases at the crate root pin `f64`, which is what the CLI and all file
//! formats use.
//!
//! ```
//! use specround::instance::VectorInstance;
//! use specround::rounding::exact_round;
//!
//! // Any instance with sum_i x_i v_i v_i^T = I can be rounded; whiten()
//! // produces that form from arbitrary vectors.
//! let vectors = vec![
//!     vec![2.0, 0.0],
//!     vec![0.0, 2.0],
//!     vec![1.0, 1.0],
//! ];
//! let inst = VectorInstance::new(2, vectors, vec![0.5, 0.5, 0.25], vec![1.0, 1.0, 3.0])
//!     .unwrap()
//!     .whiten()
//!     .unwrap();
//!
//! let out = exact_round(&inst, 0.2, 7, 4.0).unwrap();
//! // The certificate's spectral floor is recomputed from the selection.
//! assert!(out.certificate.lambda_min >= 1.0 - 1e-7);
//! let again = exact_round(&inst, 0.2, 7, 4.0).unwrap();
//! assert_eq!(out.certificate.selected, again.certificate.selected);
//! ```

pub mod error;
pub mod scalar;

pub mod concentration;
pub mod expdesign;
pub mod graph;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod netdesign;
pub mod regret;
pub mod rng;
pub mod rounding;
pub mod signing;
pub mod sparsify;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` aliases for the common case.
pub type SymMatrix64 = linalg::SymMatrix<f64>;
pub type Spectrum64 = linalg::Spectrum<f64>;
pub type Graph64 = graph::Graph<f64>;
pub type VectorInstance64 = instance::VectorInstance<f64>;
pub type ActionMatrix64 = regret::ActionMatrix<f64>;
