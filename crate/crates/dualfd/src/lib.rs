//! High-order finite differences on irregular 1D grids and fully
//! unstructured dual quadrilateral 2D meshes.
//!
//! The crate provides:
//!
//! - [`stencil1d`]: derivative stencils of arbitrary order and accuracy on
//!   arbitrary 1D grids via a correction system built from regular-grid
//!   stencil rows,
//! - [`mesh`]: dual quadrilateral meshes (all interior vertices have
//!   valency four, topological defects appear as non-quadrilateral faces),
//!   generation, validation, smoothing and plain-text I/O,
//! - [`subdivision`]: ternary refinement derived from knot insertion on
//!   uniform biquadratic B-splines, with boundary-preserving rules,
//! - [`stencil2d`]: per-vertex 2D derivative stencils on dual meshes,
//!   including one-sided boundary windows and three-quadrant stencils next
//!   to extraordinary faces,
//! - [`linsolve`]: global sparse operator assembly, direct solves, Newton
//!   iteration, implicit Euler time stepping and spectrum computation,
//! - [`pde`]: the model problems (Poisson, biharmonic, minimal surface,
//!   advection) with analytic solutions and upwind stencil selection,
//! - [`harness`]: convergence studies and CSV emission.

pub mod error;
pub mod harness;
pub mod linsolve;
pub mod mesh;
pub mod pde;
mod rational;
pub mod stencil1d;
pub mod stencil2d;
pub mod subdivision;

pub use error::{Error, Result};
