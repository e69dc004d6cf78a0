//! The continuous boundary value problem ε²y″ = f(x, y), y(0) = y(1) = 0.
//!
//! A [`Problem`] bundles the reaction term `f`, its partial derivative `f_y`,
//! the lower bound `m` with f_y ≥ m > 0, and the solution box [y_L, y_U] used
//! when picking the fitting constant γ. Two benchmark problems are built in
//! and addressable by the identifiers `example1` and `example2`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type ExactFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A semilinear reaction–diffusion problem on [0, 1] with homogeneous
/// Dirichlet boundary values.
///
/// Immutable after construction and cheap to clone; safe to share across
/// threads. Smoothness of `f` (the theory asks for C², k ≥ 2) cannot be
/// checked here and is the caller's obligation.
#[derive(Clone)]
pub struct Problem {
    name: String,
    f: RealFn2,
    f_y: RealFn2,
    m: f64,
    solution_box: (f64, f64),
    exact: Option<ExactFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Problem")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("solution_box", &self.solution_box)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl Problem {
    /// Builds a problem from its reaction term and derivative.
    ///
    /// `m` must be positive and the solution box ordered; both are contracts
    /// the solver relies on, so violations panic rather than propagate.
    pub fn new<F, G>(name: impl Into<String>, f: F, f_y: G, m: f64, solution_box: (f64, f64)) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        assert!(m > 0.0, "lower bound m must be positive, got {m}");
        assert!(
            solution_box.0 <= solution_box.1,
            "solution box must be ordered, got {solution_box:?}"
        );
        Problem {
            name: name.into(),
            f: Arc::new(f),
            f_y: Arc::new(f_y),
            m,
            solution_box,
            exact: None,
        }
    }

    /// Attaches a closed-form solution `(x, ε) -> y`.
    pub fn with_exact<E>(mut self, exact: E) -> Self
    where
        E: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// ε²y″ = y − 1. Linear, with the closed-form solution
    /// y(x) = 1 − (e^{−x/ε} + e^{−(1−x)/ε})/(1 + e^{−1/ε}).
    pub fn example1() -> Self {
        Problem::new("example1", |_x, y| y - 1.0, |_x, _y| 1.0, 1.0, (0.0, 1.0))
            .with_exact(exact_example1_unchecked)
    }

    /// ε²y″ = (y − 1)(1 + (y − 1)²). Semilinear; no closed-form solution,
    /// f_y = 1 + 3(y − 1)² ranges over [1, 4] on the box [0, 1].
    pub fn example2() -> Self {
        Problem::new(
            "example2",
            |_x, y| {
                let w = y - 1.0;
                w * (1.0 + w * w)
            },
            |_x, y| {
                let w = y - 1.0;
                1.0 + 3.0 * w * w
            },
            1.0,
            (0.0, 1.0),
        )
    }

    /// Looks up a builtin problem by its CLI identifier.
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "example1" => Ok(Problem::example1()),
            "example2" => Ok(Problem::example2()),
            other => Err(Error::Parameter(format!(
                "unknown problem `{other}` (expected `example1` or `example2`)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// The reaction term f(x, y).
    pub fn f(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    /// The partial derivative f_y(x, y).
    pub fn f_y(&self, x: f64, y: f64) -> f64 {
        (self.f_y)(x, y)
    }

    /// Lower bound m with f_y ≥ m > 0.
    pub fn m(&self) -> f64 {
        self.m
    }

    /// The (y_L, y_U) box the solution lives in.
    pub fn solution_box(&self) -> (f64, f64) {
        self.solution_box
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Evaluates the closed-form solution, if one is attached.
    pub fn exact(&self, x: f64, epsilon: f64) -> Option<f64> {
        self.exact.as_ref().map(|e| e(x, epsilon))
    }
}

fn exact_example1_unchecked(x: f64, epsilon: f64) -> f64 {
    // All exponents are non-positive, so nothing overflows even at ε = 2⁻⁴⁵.
    1.0 - ((-x / epsilon).exp() + (-(1.0 - x) / epsilon).exp()) / (1.0 + (-1.0 / epsilon).exp())
}

/// Closed-form solution of [`Problem::example1`] with domain checks.
pub fn exact_solution_example1(x: f64, epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    Ok(exact_example1_unchecked(x, epsilon))
}

/// Worst offending sample found while validating a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub f_y: f64,
}

/// Outcome of sampling γ ≥ f_y and f_y ≥ m over [0, 1] × [y_L, y_U].
///
/// Sampling is a deliberate approximation; the grid used is recorded so the
/// caller can judge how much to trust a pass.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub gamma: f64,
    /// Samples per axis actually used.
    pub grid: (usize, usize),
    /// γ ≥ f_y held at every sample.
    pub gamma_dominates: bool,
    /// f_y ≥ m held at every sample.
    pub derivative_bounded_below: bool,
    /// Sample maximizing f_y − γ, when γ ≥ f_y fails.
    pub worst_gamma_violation: Option<SamplePoint>,
    /// Sample minimizing f_y, when f_y ≥ m fails.
    pub worst_lower_bound_violation: Option<SamplePoint>,
    /// Largest relative mismatch between `f_y` and a central finite
    /// difference of `f`, over the same grid.
    pub max_derivative_mismatch: f64,
}

impl ValidationReport {
    /// Both sampled hypotheses hold.
    pub fn passed(&self) -> bool {
        self.gamma_dominates && self.derivative_bounded_below
    }
}

/// Default samples per axis for [`validate_problem`].
pub const DEFAULT_VALIDATION_GRID: usize = 101;

/// Samples the box [0, 1] × [y_L, y_U] and reports whether γ ≥ f_y and
/// f_y ≥ m hold, together with a finite-difference cross-check of `f_y`
/// against `f`. Violations are report content, never errors.
pub fn validate_problem(problem: &Problem, gamma: f64, grid: usize) -> ValidationReport {
    let n = grid.max(2);
    let (y_lo, y_hi) = problem.solution_box();
    let m = problem.m();

    let mut gamma_dominates = true;
    let mut bounded_below = true;
    let mut worst_gamma: Option<SamplePoint> = None;
    let mut worst_lower: Option<SamplePoint> = None;
    let mut max_mismatch = 0.0_f64;

    for i in 0..n {
        let x = i as f64 / (n - 1) as f64;
        for j in 0..n {
            let y = y_lo + (y_hi - y_lo) * j as f64 / (n - 1) as f64;
            let fy = problem.f_y(x, y);
            if fy > gamma && worst_gamma.map_or(true, |w| fy - gamma > w.f_y - gamma) {
                gamma_dominates = false;
                worst_gamma = Some(SamplePoint { x, y, f_y: fy });
            }
            if fy < m && worst_lower.map_or(true, |w| fy < w.f_y) {
                bounded_below = false;
                worst_lower = Some(SamplePoint { x, y, f_y: fy });
            }

            let step = 1e-6 * y.abs().max(1.0);
            let fd = (problem.f(x, y + step) - problem.f(x, y - step)) / (2.0 * step);
            let mismatch = (fd - fy).abs() / fy.abs().max(1.0);
            max_mismatch = max_mismatch.max(mismatch);
        }
    }

    ValidationReport {
        gamma,
        grid: (n, n),
        gamma_dominates,
        derivative_bounded_below: bounded_below,
        worst_gamma_violation: worst_gamma,
        worst_lower_bound_violation: worst_lower,
        max_derivative_mismatch: max_mismatch,
    }
}
