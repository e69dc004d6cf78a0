//! Newton's method on the discrete system Fȳ = 0 with a Thomas direct solve.

use crate::error::{Error, IterationStats, Result};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::scheme::{fitted_coefficients, jacobian, residual, SchemeParams, TridiagonalMatrix};

/// Elimination aborts when a pivot magnitude falls below this.
pub const PIVOT_THRESHOLD: f64 = 1e-30;

/// Starting vector for the Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// y_i = 1 at interior nodes, 0 at the boundary.
    FlatOne,
    /// Caller-supplied vector of length N+1; boundary entries are pinned to 0.
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonConfig {
    /// Stop when the max-norm of the Newton step drops to this.
    pub tol: f64,
    /// Secondary stop on the max-norm of the residual.
    pub residual_tol: f64,
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
}

impl Default for NewtonConfig {
    /// Tolerances sit three orders below the smallest errors the convergence
    /// harness needs to resolve.
    fn default() -> Self {
        NewtonConfig {
            tol: 1e-12,
            residual_tol: 1e-12,
            max_iter: 50,
            initial_guess: InitialGuess::FlatOne,
        }
    }
}

impl NewtonConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.residual_tol > 0.0) {
            return Err(Error::Parameter(format!(
                "tolerances must be positive, got tol = {}, residual_tol = {}",
                self.tol, self.residual_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A converged discrete solution with its mesh and iteration statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub mesh: Mesh,
    /// Nodal values ȳ_0 .. ȳ_N; boundary entries are exactly 0.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub final_step_norm: f64,
    pub final_residual_norm: f64,
    pub converged: bool,
}

impl Solution {
    pub fn n(&self) -> usize {
        self.mesh.n()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
}

/// Solves T·x = rhs by the Thomas algorithm (no pivoting).
///
/// The caller guarantees diagonal dominance; a vanishing pivot is reported
/// as [`Error::SingularMatrix`].
pub fn thomas_solve(t: &TridiagonalMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = t.rows();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut c_prime = vec![0.0; n - 1];
    let mut d_prime = vec![0.0; n];

    let mut denom = t.diag[0];
    if !denom.is_finite() || denom.abs() < PIVOT_THRESHOLD {
        return Err(Error::SingularMatrix { row: 0, pivot: denom });
    }
    c_prime[0] = t.sup[0] / denom;
    d_prime[0] = rhs[0] / denom;

    for i in 1..n {
        denom = t.diag[i] - t.sub[i - 1] * c_prime[i - 1];
        if !denom.is_finite() || denom.abs() < PIVOT_THRESHOLD {
            return Err(Error::SingularMatrix { row: i, pivot: denom });
        }
        if i < n - 1 {
            c_prime[i] = t.sup[i] / denom;
        }
        d_prime[i] = (rhs[i] - t.sub[i - 1] * d_prime[i - 1]) / denom;
    }

    let mut x = vec![0.0; n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}

/// Newton iteration y ← y + δ with H(y)·δ = −F(y).
///
/// Boundary entries are pinned to 0 every iteration. Convergence is declared
/// on step norm or residual norm, whichever triggers first; running out of
/// iterations yields [`Error::NonConvergence`] with the per-iteration history.
pub fn newton_solve(
    problem: &Problem,
    mesh: &Mesh,
    sp: &SchemeParams,
    cfg: &NewtonConfig,
) -> Result<Solution> {
    cfg.validate()?;
    let n = mesh.n();
    let coeffs = fitted_coefficients(mesh, sp);

    let mut y = match &cfg.initial_guess {
        InitialGuess::FlatOne => vec![1.0; n + 1],
        InitialGuess::Vector(v) => {
            if v.len() != n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    got: v.len(),
                });
            }
            v.clone()
        }
    };
    y[0] = 0.0;
    y[n] = 0.0;

    let mut history: Vec<IterationStats> = Vec::new();
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;

    loop {
        let r = residual(problem, mesh, sp, &coeffs, &y)?;
        let r_norm = max_abs(&r);
        if r_norm <= cfg.residual_tol {
            return Ok(Solution {
                mesh: mesh.clone(),
                values: y,
                iterations,
                final_step_norm: if iterations == 0 { 0.0 } else { last_step },
                final_residual_norm: r_norm,
                converged: true,
            });
        }
        if iterations >= cfg.max_iter {
            return Err(Error::NonConvergence {
                iterations,
                last_step,
                last_residual: r_norm,
                history,
            });
        }

        let h = jacobian(problem, mesh, sp, &coeffs, &y)?;
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = thomas_solve(&h, &neg_r)?;
        for (yi, di) in y.iter_mut().zip(&delta) {
            *yi += di;
        }
        y[0] = 0.0;
        y[n] = 0.0;

        iterations += 1;
        last_step = max_abs(&delta);
        history.push(IterationStats {
            step_norm: last_step,
            residual_norm: r_norm,
        });

        if last_step <= cfg.tol {
            let r = residual(problem, mesh, sp, &coeffs, &y)?;
            return Ok(Solution {
                mesh: mesh.clone(),
                values: y,
                iterations,
                final_step_norm: last_step,
                final_residual_norm: max_abs(&r),
                converged: true,
            });
        }
    }
}
