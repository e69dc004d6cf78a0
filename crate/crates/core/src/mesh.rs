//! Layer-adapted mesh built from a piecewise generating function.
//!
//! Nodes are x_i = φ(i/N) where φ is hyperbolic (κ) inside the layer region,
//! a cubic (π) up to the midpoint, and mirrored on [1/2, 1]. The transition
//! point is α = p − ε^{1/3}; the cubic coefficient ω is fixed by π(1/2) = 1/2.

use crate::error::{Error, Result};

/// Parameters of the mesh generating function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Perturbation parameter ε ∈ (0, 1).
    pub epsilon: f64,
    /// Transition parameter p ∈ (0, 1/2).
    pub p: f64,
    /// Layer-density parameter a > 0.
    pub a: f64,
    /// Number of subintervals; even and ≥ 4.
    pub n: usize,
}

impl MeshParams {
    pub fn new(epsilon: f64, p: f64, a: f64, n: usize) -> Result<Self> {
        let params = MeshParams { epsilon, p, a, n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Parameter(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.p > 0.0 && self.p < 0.5) {
            return Err(Error::Parameter(format!(
                "p must lie in (0, 1/2), got {}",
                self.p
            )));
        }
        if !(self.a > 0.0) {
            return Err(Error::Parameter(format!("a must be positive, got {}", self.a)));
        }
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::Parameter(format!(
                "N must be an even integer >= 4, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// κ(t) = aεt/(p − t) and its first two derivatives at `alpha`.
///
/// When the transition point is clamped to 0 these reduce to κ(0) = 0,
/// κ′(0) = aε/p, κ″(0) = 2aε/p².
fn kappa_at(params: &MeshParams, alpha: f64) -> (f64, f64, f64) {
    let MeshParams { epsilon, p, a, .. } = *params;
    let d = p - alpha;
    (
        a * epsilon * alpha / d,
        a * epsilon * p / (d * d),
        2.0 * a * epsilon * p / (d * d * d),
    )
}

fn omega_from(params: &MeshParams, alpha: f64) -> f64 {
    let (k0, k1, k2) = kappa_at(params, alpha);
    let w = 0.5 - alpha;
    (0.5 - (k2 * w * w / 2.0 + k1 * w + k0)) / (w * w * w)
}

/// Cubic coefficient ω determined from π(1/2) = 1/2.
///
/// Errors when ω < 0, which signals that `a` is too large for this (ε, p)
/// pair and the generating function may lose monotonicity.
pub fn compute_omega(params: &MeshParams, alpha: f64) -> Result<f64> {
    if alpha >= 0.5 {
        return Err(Error::Parameter(format!("alpha = {alpha} must be < 1/2")));
    }
    let omega = omega_from(params, alpha);
    if omega < 0.0 {
        return Err(Error::Parameter(format!(
            "omega = {omega:.6e} < 0 for a = {}, p = {}, epsilon = {:e}; decrease a",
            params.a, params.p, params.epsilon
        )));
    }
    Ok(omega)
}

/// The generating function φ: [0, 1] → [0, 1].
///
/// κ on [0, α], the cubic π on [α, 1/2], and the reflection 1 − φ(1 − t) on
/// [1/2, 1]. `alpha` and `omega` must come from the same params.
pub fn generating_function(t: f64, params: &MeshParams, alpha: f64, omega: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&t), "t = {t} outside [0, 1]");
    if t > 0.5 {
        return 1.0 - generating_function(1.0 - t, params, alpha, omega);
    }
    if t <= alpha {
        let MeshParams { epsilon, p, a, .. } = *params;
        a * epsilon * t / (p - t)
    } else {
        let (k0, k1, k2) = kappa_at(params, alpha);
        let d = t - alpha;
        omega * d * d * d + k2 * d * d / 2.0 + k1 * d + k0
    }
}

/// A realized mesh: nodes, steps, and the generating-function data.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub params: MeshParams,
    /// Transition point max(0, p − ε^{1/3}).
    pub alpha: f64,
    /// Cubic coefficient of π.
    pub omega: f64,
    /// Nodes x_0 .. x_N.
    pub nodes: Vec<f64>,
    /// Steps h_0 .. h_{N-1}, mirrored exactly from the left half.
    ///
    /// Near x = 1 the true spacings can fall below one ulp of 1, in which
    /// case stored nodes quantize while these steps stay positive and
    /// correctly rounded; the scheme coefficients are built from them.
    steps: Vec<f64>,
    /// True when p − ε^{1/3} ≤ 0 and the α = 0 fallback was applied.
    pub clamped: bool,
}

impl Mesh {
    /// Number of subintervals N.
    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Step h_i = x_{i+1} − x_i (exact mirrored value).
    pub fn step(&self, i: usize) -> f64 {
        self.steps[i]
    }

    pub fn steps(&self) -> &[f64] {
        &self.steps
    }

    /// Uniform parameter t_i = i/N of node i.
    pub fn t(&self, i: usize) -> f64 {
        i as f64 / self.params.n as f64
    }
}

/// Builds the mesh for the given parameters.
///
/// The left half is evaluated through the generating function, node N/2 is
/// set to exactly 1/2, and the right half is mirrored via x_{N−i} = 1 − x_i,
/// which makes the symmetry defect identically zero. When p − ε^{1/3} ≤ 0
/// the transition is clamped to α = 0 (with a warning): φ = π on [0, 1/2]
/// with the κ data taken at 0. For clamped meshes ω < 0 is tolerated as long
/// as the nodes stay strictly increasing.
pub fn build_mesh(params: &MeshParams) -> Result<Mesh> {
    params.validate()?;
    let n = params.n;
    let eps_cbrt = params.epsilon.cbrt();
    let alpha_raw = params.p - eps_cbrt;
    let clamped = alpha_raw <= 0.0;
    let alpha = alpha_raw.max(0.0);

    let omega = if clamped {
        log::warn!(
            "p - epsilon^(1/3) = {alpha_raw:.4e} <= 0 for p = {}, epsilon = {:e}; \
             clamping the mesh transition point to 0",
            params.p,
            params.epsilon
        );
        let omega = omega_from(params, alpha);
        if omega < 0.0 {
            log::warn!(
                "clamped mesh has omega = {omega:.4e} < 0; \
                 continuing because the generating function is still monotone-checked"
            );
        }
        omega
    } else {
        compute_omega(params, alpha)?
    };

    let half = n / 2;
    let mut nodes = vec![0.0; n + 1];
    for (i, node) in nodes.iter_mut().enumerate().take(half) {
        *node = generating_function(i as f64 / n as f64, params, alpha, omega);
    }
    nodes[half] = 0.5;
    for i in half + 1..=n {
        nodes[i] = 1.0 - nodes[n - i];
    }

    let mut steps = vec![0.0; n];
    for i in 0..half {
        let h = nodes[i + 1] - nodes[i];
        if h <= 0.0 {
            return Err(Error::DegenerateMesh { index: i, step: h });
        }
        steps[i] = h;
    }
    for i in half..n {
        steps[i] = steps[n - 1 - i];
    }

    Ok(Mesh {
        params: *params,
        alpha,
        omega,
        nodes,
        steps,
        clamped,
    })
}

/// Empirical mesh-quality measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshReport {
    /// max_i N·h_i — bounded uniformly in N for a well-formed mesh.
    pub max_scaled_step: f64,
    /// max_i N²·|h_i − h_{i−1}| — bounded uniformly in N.
    pub max_scaled_step_diff: f64,
    /// Whether the stored nodes are strictly increasing. False signals that
    /// right-half spacings fell below the f64 resolution near 1.
    pub monotone_nodes: bool,
    /// max_i |x_i + x_{N−i} − 1|; zero by the mirrored construction.
    pub symmetry_defect: f64,
}

pub fn mesh_diagnostics(mesh: &Mesh) -> MeshReport {
    let n = mesh.n();
    let nf = n as f64;
    let mut max_scaled_step = 0.0_f64;
    let mut max_scaled_diff = 0.0_f64;
    for i in 0..n {
        max_scaled_step = max_scaled_step.max(nf * mesh.step(i));
        if i > 0 {
            max_scaled_diff = max_scaled_diff.max(nf * nf * (mesh.step(i) - mesh.step(i - 1)).abs());
        }
    }
    let monotone = mesh.nodes.windows(2).all(|w| w[0] < w[1]);
    let mut defect = 0.0_f64;
    for i in 0..=n {
        defect = defect.max((mesh.nodes[i] + mesh.nodes[n - i] - 1.0).abs());
    }
    MeshReport {
        max_scaled_step,
        max_scaled_step_diff: max_scaled_diff,
        monotone_nodes: monotone,
        symmetry_defect: defect,
    }
}
