//! The fitted difference scheme: per-interval coefficients, the discrete
//! nonlinear operator F, and its tridiagonal Fréchet derivative H.
//!
//! Coefficients are csch/coth of β·h and saturate for large arguments, so
//! everything here must route through the stable evaluations below — naive
//! sinh/cosh overflow long before ε = 2⁻⁴⁵.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::problem::Problem;

/// Absolute slack allowed when checking the dominance margin; covers
/// rounding in saturated Δd arithmetic.
pub const DOMINANCE_SLACK: f64 = 1e-8;

/// Fitting constant γ, central weight q, and β = √γ/ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub gamma: f64,
    pub q: f64,
    pub beta: f64,
}

impl SchemeParams {
    /// Couples γ and q with the ε the mesh was built for.
    pub fn new(gamma: f64, q: f64, epsilon: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Parameter(format!("gamma must be positive, got {gamma}")));
        }
        if !(q > 0.0) {
            return Err(Error::Parameter(format!("q must be positive, got {q}")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::Parameter(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        Ok(SchemeParams {
            gamma,
            q,
            beta: gamma.sqrt() / epsilon,
        })
    }
}

/// 1/sinh(x) for x > 0, computed as 2e^{−x}/(1 − e^{−2x}).
///
/// Underflows gracefully to 0 for large x and never overflows.
pub fn stable_csch(x: f64) -> f64 {
    assert!(x > 0.0, "stable_csch: argument must be positive, got {x}");
    2.0 * (-x).exp() / -(-2.0 * x).exp_m1()
}

/// coth(x) − csch(x) for x > 0, evaluated as tanh(x/2).
///
/// The direct difference cancels catastrophically for small x and overflows
/// for large x; the tanh form does neither.
pub fn stable_delta_d(x: f64) -> f64 {
    assert!(x > 0.0, "stable_delta_d: argument must be positive, got {x}");
    (x / 2.0).tanh()
}

/// Per-interval fitted quantities.
///
/// Entry k belongs to the interval (x_k, x_{k+1}); the operator at node i
/// reads its left-interval values at k = i−1 and right-interval values at
/// k = i.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeCoefficients {
    /// a = csch(β·h), per interval.
    pub a: Vec<f64>,
    /// d = coth(β·h), per interval.
    pub d: Vec<f64>,
    /// Δd = d − a = tanh(β·h/2), per interval.
    pub delta_d: Vec<f64>,
}

impl SchemeCoefficients {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Evaluates the fitted coefficients on every mesh interval.
pub fn fitted_coefficients(mesh: &Mesh, sp: &SchemeParams) -> SchemeCoefficients {
    debug_assert!(
        (sp.beta - sp.gamma.sqrt() / mesh.params.epsilon).abs() <= 4.0 * f64::EPSILON * sp.beta,
        "beta is not sqrt(gamma)/epsilon of this mesh"
    );
    let n = mesh.n();
    let mut a = Vec::with_capacity(n);
    let mut d = Vec::with_capacity(n);
    let mut delta_d = Vec::with_capacity(n);
    for k in 0..n {
        let x = sp.beta * mesh.step(k);
        let csch = stable_csch(x);
        let dd = stable_delta_d(x);
        a.push(csch);
        d.push(csch + dd);
        delta_d.push(dd);
    }
    SchemeCoefficients { a, d, delta_d }
}

/// Tridiagonal matrix with N+1 rows; `sub[k]` is entry (k+1, k) and
/// `sup[k]` is entry (k, k+1).
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalMatrix {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn rows(&self) -> usize {
        self.diag.len()
    }

    pub fn zeros(rows: usize) -> Self {
        TridiagonalMatrix {
            sub: vec![0.0; rows - 1],
            diag: vec![0.0; rows],
            sup: vec![0.0; rows - 1],
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.rows();
        assert_eq!(x.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.sup[i] * x[i + 1];
            }
            out[i] = v;
        }
        out
    }

    /// Row-sum norm ‖·‖∞.
    pub fn norm_inf(&self) -> f64 {
        let n = self.rows();
        let mut worst = 0.0_f64;
        for i in 0..n {
            let mut s = self.diag[i].abs();
            if i > 0 {
                s += self.sub[i - 1].abs();
            }
            if i + 1 < n {
                s += self.sup[i].abs();
            }
            worst = worst.max(s);
        }
        worst
    }
}

fn check_dims(mesh: &Mesh, coeffs: &SchemeCoefficients, y: &[f64]) -> Result<()> {
    let n = mesh.n();
    if y.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            got: y.len(),
        });
    }
    if coeffs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: coeffs.len(),
        });
    }
    Ok(())
}

/// The discrete operator F applied to a state vector.
///
/// Boundary components are F_0 = y_0 and F_N = y_N. Interior components are
/// the γ/(Δd_i + Δd_{i+1})-scaled combination of fitted differences and the
/// (1, q, 1)/γ-weighted reaction average; the scaled form stays O(1)
/// uniformly in ε.
pub fn residual(
    problem: &Problem,
    mesh: &Mesh,
    sp: &SchemeParams,
    coeffs: &SchemeCoefficients,
    y: &[f64],
) -> Result<Vec<f64>> {
    check_dims(mesh, coeffs, y)?;
    let n = mesh.n();
    let (gamma, q) = (sp.gamma, sp.q);
    let mut out = vec![0.0; n + 1];
    out[0] = y[0];
    out[n] = y[n];

    let mut f_prev = problem.f(mesh.nodes[0], y[0]);
    let mut f_here = problem.f(mesh.nodes[1], y[1]);
    for i in 1..n {
        let f_next = problem.f(mesh.nodes[i + 1], y[i + 1]);
        let (a_l, d_l, dd_l) = (coeffs.a[i - 1], coeffs.d[i - 1], coeffs.delta_d[i - 1]);
        let (a_r, d_r, dd_r) = (coeffs.a[i], coeffs.d[i], coeffs.delta_d[i]);
        let s = dd_l + dd_r;
        let left = ((q + 1.0) * a_l + d_l + dd_r) * (y[i - 1] - y[i]);
        let right = ((q + 1.0) * a_r + d_r + dd_l) * (y[i] - y[i + 1]);
        let reaction = (f_prev + q * f_here + f_next) / gamma * s;
        out[i] = gamma / s * (left - right - reaction);
        f_prev = f_here;
        f_here = f_next;
    }
    Ok(out)
}

/// The Fréchet derivative H = F′(y) as a tridiagonal matrix.
///
/// Rows 0 and N are identity rows; interior entries are the literal partial
/// derivatives of [`residual`].
pub fn jacobian(
    problem: &Problem,
    mesh: &Mesh,
    sp: &SchemeParams,
    coeffs: &SchemeCoefficients,
    y: &[f64],
) -> Result<TridiagonalMatrix> {
    check_dims(mesh, coeffs, y)?;
    let n = mesh.n();
    let (gamma, q) = (sp.gamma, sp.q);
    let mut h = TridiagonalMatrix::zeros(n + 1);
    h.diag[0] = 1.0;
    h.diag[n] = 1.0;
    h.sup[0] = 0.0;
    h.sub[n - 1] = 0.0;

    for i in 1..n {
        let (a_l, d_l, dd_l) = (coeffs.a[i - 1], coeffs.d[i - 1], coeffs.delta_d[i - 1]);
        let (a_r, d_r, dd_r) = (coeffs.a[i], coeffs.d[i], coeffs.delta_d[i]);
        let s = dd_l + dd_r;
        let g = gamma / s;
        h.diag[i] = g
            * (-q * (a_l + a_r)
                - 2.0 * (d_l + d_r)
                - q / gamma * problem.f_y(mesh.nodes[i], y[i]) * s);
        h.sub[i - 1] = g
            * (s * (1.0 - problem.f_y(mesh.nodes[i - 1], y[i - 1]) / gamma) + (q + 2.0) * a_l);
        h.sup[i] = g
            * (s * (1.0 - problem.f_y(mesh.nodes[i + 1], y[i + 1]) / gamma) + (q + 2.0) * a_r);
    }
    Ok(h)
}

/// Row-wise dominance and sign-pattern report for the Fréchet derivative.
#[derive(Debug, Clone)]
pub struct DominanceReport {
    /// |h_{i,i}| − |h_{i,i−1}| − |h_{i,i+1}| for interior rows i = 1..N−1.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// Interior row index attaining the minimum margin.
    pub min_margin_row: usize,
    /// The bound (q + 2)·m the margin is compared against.
    pub required_margin: f64,
    /// Interior rows violating the sign pattern (negative diagonal,
    /// non-negative off-diagonals).
    pub sign_violations: Vec<usize>,
    pub sign_pattern_ok: bool,
    /// min_margin ≥ (q + 2)·m − [`DOMINANCE_SLACK`].
    pub dominant: bool,
}

/// Checks strict diagonal dominance with margin (q + 2)·m, normalizing by
/// row signs: the interior diagonal is negative and off-diagonals are
/// non-negative when γ ≥ f_y, so H is the negative of a conventionally
/// signed M-matrix. Violations are report content, not errors.
pub fn mmatrix_check(h: &TridiagonalMatrix, sp: &SchemeParams, m: f64) -> DominanceReport {
    let rows = h.rows();
    let n = rows - 1;
    let mut margins = Vec::with_capacity(n.saturating_sub(1));
    let mut sign_violations = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut min_row = 1;
    for i in 1..n {
        let diag = h.diag[i];
        let sub = h.sub[i - 1];
        let sup = h.sup[i];
        if !(diag < 0.0 && sub >= 0.0 && sup >= 0.0) {
            sign_violations.push(i);
        }
        let margin = diag.abs() - sub.abs() - sup.abs();
        if margin < min_margin {
            min_margin = margin;
            min_row = i;
        }
        margins.push(margin);
    }
    let required = (sp.q + 2.0) * m;
    DominanceReport {
        margins,
        min_margin,
        min_margin_row: min_row,
        required_margin: required,
        sign_pattern_ok: sign_violations.is_empty(),
        sign_violations,
        dominant: min_margin >= required - DOMINANCE_SLACK,
    }
}
