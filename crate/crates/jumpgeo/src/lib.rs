//! Stochastic calculus with jumps on embedded Riemannian manifolds.
//!
//! The crate is organized around a small set of geometric primitives and the
//! discrete stochastic calculus built on top of them:
//!
//! - [`geometry`] — embedded manifolds (`Euclidean`, `Circle`, `Sphere`, and a
//!   callback-driven `Generic` kind) with tangent projection, exponential and
//!   logarithm maps, and geodesic distance.
//! - [`connection`] — connection rules γ(x, y) ∈ T_xM (Euclidean difference,
//!   tangent projection, inverse exponential) plus a numeric axiom checker.
//! - [`paths`] — finite càdlàg sample paths with tangent-vector jump marks
//!   (`DeltaPath`) and the random partitions their Riemann sums run on.
//! - [`integrator`] — discrete Itô integrals, 2-tensor quadratic variations,
//!   the Riemannian quadratic variation, and the Itô decomposition
//!   f(X) = f(X₀) + N + A + B.
//! - [`processes`] — constructors for exactly-verifiable jump martingales,
//!   the antipodal Poisson counterexample, truncated α-stable simulation,
//!   map pushforwards, and the tail-diameter convergence classifier.
//! - [`fractional`] — singular-integral quadrature for the fractional
//!   Laplacian, jump-energy densities, Lagrange-equation residuals, and the
//!   Lévy-system consistency check.
//! - [`experiments`] — replica-parallel drivers shared by the CLI and the
//!   acceptance suite.
//!
//! All randomness is derived from explicit `u64` seeds through a
//! counter-based splitting scheme ([`rng`]), so every simulation in this
//! crate is reproducible and independent of thread scheduling. Monte Carlo
//! sweeps go through [`parallel::replica_map`], which uses rayon when the
//! `parallel` feature (default) is enabled and a plain sequential loop
//! otherwise.

pub mod connection;
pub mod error;
pub mod experiments;
pub mod fractional;
pub mod geometry;
pub mod integrator;
pub mod linalg;
pub mod parallel;
pub mod paths;
pub mod processes;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use geometry::{ManifoldModel, TangentVector};
