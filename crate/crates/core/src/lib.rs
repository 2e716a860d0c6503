//! Numerical machinery for solving the dbar-equation on families of domains
//! `D^t` in C^n (n = 1, 2) depending continuously on a parameter `t` in [0,1].
//!
//! The crate is organized bottom-up:
//!
//! * [`expr`] - defining-function expression language with exact symbolic
//!   Wirtinger derivatives (`d/dz_j`, `d/dzbar_j`, `d/dt`),
//! * [`domain`] - domain families `{r^t < 0}`, point classification and
//!   star-shaped boundary sampling,
//! * [`calculus`] - Levi forms, real Hessians, discrete Hoelder norms and
//!   finite-difference dbar probes,
//! * [`seeley`] - Seeley-type extension operators (half-space, radial collar,
//!   parameter direction),
//! * [`convexify`] - Narasimhan normal form at boundary points and Grauert
//!   bump construction with numerical certificates,
//! * [`kernels`] - Levi polynomials, Hefer decompositions and
//!   Cauchy-Fantappie kernel coefficients,
//! * [`quad`] - quadrature rules (polar / spherical desingularization) and
//!   deterministic pairwise summation,
//! * [`solvers`] - the integral solution operators (Cauchy-Pompeiu,
//!   Bochner-Martinelli-Koppelman with Seeley extension, Cauchy-Fantappie
//!   homotopy, Leray reproduction, Oka-Weil approximation and a two-cover
//!   Cousin-I solver), plus per-family parameter sweeps.
//!
//! Everything is deterministic: fixed node orders and a pairwise summation
//! tree that is identical in the sequential and data-parallel builds, so
//! results are bitwise reproducible. The `parallel` feature (default) runs
//! the heavy loops on rayon; without it every code path falls back to plain
//! sequential iteration.

pub mod calculus;
pub mod convexify;
pub mod domain;
pub mod expr;
pub mod kernels;
pub mod par;
pub mod quad;
pub mod seeley;
pub mod solvers;

pub use expr::{DefiningExpr, EvalError, ParseError, C};
pub use domain::{DomainFamily, PointClass};
