//! Solver for singularly perturbed semilinear reaction–diffusion problems
//!
//! Discretizes ε²y″ = f(x, y), y(0) = y(1) = 0 with an exponentially fitted
//! difference scheme on a layer-adapted mesh of Bakhvalov type and solves the
//! resulting tridiagonal nonlinear system by Newton's method. A convergence
//! harness measures max-norm errors against closed-form or bootstrap
//! reference solutions and reports experimental orders.
//!
//! ```
//! use spbvp::harness::{error_against_exact, solve_cell, CellParams};
//! use spbvp::problem::Problem;
//! use spbvp::solver::NewtonConfig;
//!
//! let problem = Problem::example1();
//! let cell = CellParams {
//!     epsilon: 2.0_f64.powi(-10),
//!     n: 64,
//!     gamma: 1.0,
//!     q: 4.0,
//!     a: 1.0,
//!     p: 0.4,
//! };
//! let solution = solve_cell(&problem, &cell, &NewtonConfig::default()).unwrap();
//! let e_n = error_against_exact(&solution, &problem).unwrap();
//! assert!(e_n.is_finite());
//! ```

pub mod error;
pub mod fp;
pub mod harness;
pub mod mesh;
pub mod problem;
pub mod scheme;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{build_mesh, Mesh, MeshParams};
pub use problem::Problem;
pub use scheme::SchemeParams;
pub use solver::{newton_solve, NewtonConfig, Solution};
