//! Desk-scale geometry of the separable infinite-dimensional hyperbolic space
//! and of its Euclidean sibling, the separable Hilbert space.
//!
//! Vectors are finitely supported over the countable basis `e_0, e_1, ...`
//! ([`SparseVec`]); there is no ambient dimension anywhere in the API.
//! Isometries are finite-rank perturbations of the identity: a dense block on a
//! finite active index set, identity everywhere else.
//!
//! Module map:
//!
//! - [`lorentz`]: sparse vectors, the operator `J`, the Lorentz form, frames.
//! - [`models`]: hyperboloid / Klein / ideal points, distance, geodesics,
//!   angles, Busemann functions, the Hilbert-to-ball map.
//! - [`isometry`]: `Isom(H)` as Lorentz blocks, classification, translation
//!   length, Cartan and symmetry decompositions, pointwise matching, rotations.
//! - [`horoboundary`]: the frustum compactification, its equivariant action,
//!   Busemann homomorphism and cocycles, weak-convergence probes.
//! - [`euclid`]: `Isom(Hilbert) = O x Hilbert`, Hilbert horofunctions and the
//!   dense-conjugacy construction.
//! - [`sampling`]: seeded random points and isometries used by tests and
//!   experiments.

pub mod error;
pub mod euclid;
pub mod horoboundary;
pub mod isometry;
pub(crate) mod linalg;
pub mod lorentz;
pub mod models;
pub mod sampling;

pub use error::{Error, Result};
pub use euclid::EucIsometry;
pub use horoboundary::FrustumPoint;
pub use isometry::{HypIsometry, IsometryClass};
pub use lorentz::{LorentzFrame, SparseVec, Tolerance};
pub use models::{BallPoint, Geodesic, HPoint, IdealPoint};
