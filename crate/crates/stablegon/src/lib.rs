//! Certified stable polygon models for Dynkin quivers.
//!
//! This library constructs, for any orientation of an ADE Dynkin diagram, a
//! planar "stable h-gon" realizing that orientation, extracts the induced
//! total stability function on the module category, verifies instance by
//! instance that every indecomposable representation is stable, and computes
//! truncated quantum dilogarithm products with wall-crossing checks.
//!
//! All geometry is exact: points and vectors carry arbitrary-precision
//! rational coordinates and every predicate is a sign condition. No floating
//! point enters any certified path (floats appear only as search heuristics
//! inside [`realize`], whose candidates are snapped to rationals and then
//! certified exactly).
//!
//! The main pipeline:
//!
//! 1. [`realize`] turns a [`dynkin::DynkinQuiver`] into a certified
//!    [`polygon::StablePolygon`].
//! 2. [`diagonals`] enumerates the polygon's admissible diagonal classes,
//!    locates the distinguished simple diagonals, builds the intersection
//!    quiver, and reads off the stability function.
//! 3. [`reps`] independently rebuilds the module category (explicit
//!    indecomposable representations, hom spaces, embeddings) and checks
//!    total stability against the extracted phases.
//! 4. [`dt`] computes quantum dilogarithm products over the stable classes
//!    in phase-decreasing order and compares them across wall crossings.
//!
//! See the crate `examples/` directory for one runnable example per
//! capability, and the `stablegon` binary for a file-based front end.

pub mod cli;
pub mod diagonals;
pub mod dt;
pub mod dynkin;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod polygon;
pub mod realize;
pub mod reps;
pub mod svg;
