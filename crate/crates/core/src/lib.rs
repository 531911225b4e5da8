//! Affine invariant points of planar convex bodies.
//!
//! The crate builds the weighted-average points `T_{k,K,v}` obtained by
//! averaging the images `φ(v)` of an anchor point over the volume-preserving
//! affine group, weighted by the overlap `m(φ⁻¹(L) ∩ K)^k`. The group
//! integrals are estimated with self-normalized importance sampling over
//! a Cartan-coordinate realization of the Haar measure on `SL±(2)`.
//!
//! Module map:
//! - [`geometry`]: convex polygons, areas, centroids, clipping, Hausdorff distance.
//! - [`unimodular`]: 2×2 maps with `|det| = 1`, singular values, polar factors.
//! - [`haar`]: Haar sampling on `S_R` and translation proposals.
//! - [`weightfn`]: the overlap weight and its support/slab envelopes.
//! - [`estimator`]: the point estimator, sweeps, and the 1-D power-ratio utility.
//! - [`classical`]: centroid and John-ellipse center.
//! - [`symmetry`]: affine automorphism group and fixed set of a polygon.
//! - [`cli`]: the `aip` command-line front end.

pub mod classical;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod haar;
pub mod stats;
pub mod symmetry;
pub mod unimodular;
pub mod weightfn;

pub use error::{AipError, Result};
pub use geometry::{ConvexPolygon, HausdorffDistance, Point};
pub use unimodular::{SingularPair, UnimodularMap, VolumePreservingAffineMap};
