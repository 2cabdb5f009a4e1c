//! Moment-free quadrature on scattered nodes.
//!
//! Given interior nodes `Y`, boundary nodes `Z` with outward normals, and a
//! single known combined moment, the crate computes weight vectors `w`, `v`
//! such that
//!
//! ```text
//! ∫_Ω f dµ − ∫_∂Ω g dσ  ≈  Σ w_i f(y_i) − Σ v_i g(z_i)
//! ```
//!
//! The weights are the minimum 2-norm solution of `L^T w − B^T v = 0` plus one
//! non-homogeneous constraint, where `L` and `B` discretize the divergence and
//! the normal trace. Two discretizations are provided: polyharmonic meshless
//! finite differences ([`mfd`]) and collocation of an unfitted tensor-product
//! spline space ([`bspline`]).
//!
//! The pipeline lives in [`quadrature`]; node generation in [`nodegen`]; the
//! built-in test domains in [`geometry`]; the sparse minimum-norm solvers in
//! [`sparse`]; convergence studies and reference integrals in [`harness`].

pub mod bspline;
pub mod dense;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod integrate;
pub mod mfd;
pub mod nodegen;
pub mod par;
pub mod quadrature;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{DomainModel, Point};
pub use nodegen::NodeSet;
pub use quadrature::{ConstraintKind, Method, QuadratureRule};
pub use sparse::{SparseMatrix, TripletMatrix};
