//! Shooting-method machinery for the radial Neumann problem
//!
//! ```text
//!   -div(|∇u|^{p-2} ∇u) = f(u)   on a ball or annulus in R^N,
//!   ∂u/∂ν = 0                    on the boundary,  u > 0,
//! ```
//!
//! reduced to the planar Cauchy problem in the radial variable r,
//!
//! ```text
//!   u' = φ_p^{-1}(v / r^{N-1}),   v' = -r^{N-1} f̂(u),
//!   u(R1) = d,                    v(R1) = 0,
//! ```
//!
//! where φ_p(s) = |s|^{p-2} s and f̂ truncates f to zero on the negative axis.
//! Neumann solutions are exactly the shooting data d whose trajectory returns
//! to v(R2) = 0, located through the winding angle of (u - 1, v) around the
//! equilibrium (1, 0) measured in generalized p-polar coordinates.
//!
//! Module map:
//! - [`ptrig`]: generalized trigonometric pair (cos_p, sin_p), the half-period
//!   pi_p, the odd power maps, and the p-polar angle of a phase point;
//! - [`nonlinearity`]: the nonlinearity f (prototype power difference or user
//!   sampled data), its primitives, monotone envelope f*, and growth probes;
//! - [`shooter`]: trajectory integration with event detection, energy trace,
//!   Pohozaev-type identity residual, and first-exit diagnostics;
//! - [`eigen`]: radial Neumann eigenvalues of the p-Laplacian via the Pruefer
//!   angle equation and bisection;
//! - [`multiplicity`]: the solution counter built on top of the shooter
//!   (threshold d*, angle scans, bracketed bisection, spiral-comparison bounds
//!   and the admissible-radius estimate R*);
//! - [`report`]: deterministic CSV and SVG emission for all of the above.
//!
//! Scans over shooting data are data-parallel; the `parallel` feature (on by
//! default) maps them over a rayon pool, and disabling it yields a bit-for-bit
//! identical sequential fallback.

pub mod error;
pub mod exec;
pub mod ode;
pub mod solve1d;
pub mod ptrig;
mod pchip;
pub mod nonlinearity;
pub mod shooter;
pub mod eigen;
pub mod multiplicity;
pub mod report;

pub use error::CoreError;
