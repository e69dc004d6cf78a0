//! Convergence studies: E_N, experimental orders, reference-solution
//! bootstrap for problems without a closed form, and table emission.

mod cache;

pub use cache::reference_cache;

use std::path::PathBuf;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fp::ulp_distance;
use crate::mesh::{build_mesh, MeshParams};
use crate::problem::Problem;
use crate::scheme::SchemeParams;
use crate::solver::{newton_solve, NewtonConfig, Solution};

/// Output layout for [`emit_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Everything needed to solve one (ε, N) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub epsilon: f64,
    pub n: usize,
    pub gamma: f64,
    pub q: f64,
    pub a: f64,
    pub p: f64,
}

/// Builds the mesh and runs Newton for a single cell.
pub fn solve_cell(problem: &Problem, cell: &CellParams, newton: &NewtonConfig) -> Result<Solution> {
    let mesh = build_mesh(&MeshParams::new(cell.epsilon, cell.p, cell.a, cell.n)?)?;
    let sp = SchemeParams::new(cell.gamma, cell.q, cell.epsilon)?;
    newton_solve(problem, &mesh, &sp, newton)
}

/// Study configuration: the (ε, N) grid plus the shared scheme, mesh, and
/// Newton parameters.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub problem: Problem,
    pub epsilons: Vec<f64>,
    /// Mesh sizes, normally an ascending doubling sequence; Ord is computed
    /// for consecutive entries with n_{j+1} = 2·n_j.
    pub ns: Vec<usize>,
    pub gamma: f64,
    pub q: f64,
    pub a: f64,
    pub p: f64,
    pub newton: NewtonConfig,
    /// Mesh size of the bootstrap reference when the problem has no closed
    /// form.
    pub reference_n: usize,
    pub format: TableFormat,
    /// Where reference solutions are cached; `None` disables caching.
    pub cache_dir: Option<PathBuf>,
}

impl StudyConfig {
    pub fn new(problem: Problem, epsilons: Vec<f64>, ns: Vec<usize>) -> Self {
        StudyConfig {
            problem,
            epsilons,
            ns,
            gamma: 1.0,
            q: 4.0,
            a: 1.0,
            p: 0.4,
            newton: NewtonConfig::default(),
            reference_n: 16384,
            format: TableFormat::Csv,
            cache_dir: None,
        }
    }

    pub fn cell(&self, epsilon: f64, n: usize) -> CellParams {
        CellParams {
            epsilon,
            n,
            gamma: self.gamma,
            q: self.q,
            a: self.a,
            p: self.p,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.ns.is_empty() {
            return Err(Error::Parameter("study grid must be non-empty".into()));
        }
        for &n in &self.ns {
            if n < 4 || n % 2 != 0 {
                return Err(Error::Parameter(format!("N = {n} must be even and >= 4")));
            }
            if !self.problem.has_exact() && self.reference_n % n != 0 {
                return Err(Error::Parameter(format!(
                    "N = {n} does not divide the reference N = {}",
                    self.reference_n
                )));
            }
        }
        Ok(())
    }
}

/// One (ε, N) cell of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub epsilon: f64,
    pub n: usize,
    /// Computed error, absent when the cell failed.
    pub e_n: Option<f64>,
    /// Experimental order against the next (doubled) N, absent on the last
    /// N and around failed cells.
    pub ord: Option<f64>,
    /// The mesh for this ε runs with the clamped transition point.
    pub clamped: bool,
    /// Failure message when the cell could not be computed.
    pub error: Option<String>,
}

/// Study results in deterministic (ε outer, N inner) order.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub problem: String,
    pub gamma: f64,
    pub q: f64,
    pub a: f64,
    pub p: f64,
    /// Set when errors were measured against a bootstrap reference.
    pub reference_n: Option<usize>,
    pub rows: Vec<TableRow>,
}

impl ConvergenceTable {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// Looks up the row for an exact (ε, N) pair.
    pub fn cell(&self, epsilon: f64, n: usize) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.epsilon == epsilon && r.n == n)
    }
}

/// E_N against a closed-form solution: max_i |y(x_i, ε) − ȳ_i|.
pub fn error_against_exact(sol: &Solution, problem: &Problem) -> Result<f64> {
    if !problem.has_exact() {
        return Err(Error::MissingExact(problem.name().to_string()));
    }
    let eps = sol.mesh.params.epsilon;
    let mut worst = 0.0_f64;
    for (x, y) in sol.mesh.nodes.iter().zip(&sol.values) {
        let exact = problem.exact(*x, eps).expect("checked above");
        worst = worst.max((exact - y).abs());
    }
    Ok(worst)
}

/// Allowed node disagreement, in ulp, between nominally coinciding coarse
/// and fine nodes.
const NODE_COINCIDENCE_ULP: u64 = 4;

/// E_N against a reference solution on a nested finer mesh.
///
/// Requires sol.N | ref.N and meshes built from identical (ε, p, a) so that
/// every coarse node coincides with a fine node; coincidence is asserted
/// before differencing.
pub fn error_against_reference(sol: &Solution, reference: &Solution) -> Result<f64> {
    let n = sol.n();
    let n_ref = reference.n();
    if n_ref % n != 0 {
        return Err(Error::Parameter(format!(
            "coarse N = {n} does not divide reference N = {n_ref}"
        )));
    }
    let stride = n_ref / n;
    let mut worst = 0.0_f64;
    for i in 0..=n {
        let coarse_x = sol.mesh.nodes[i];
        let fine_x = reference.mesh.nodes[i * stride];
        if ulp_distance(coarse_x, fine_x) > NODE_COINCIDENCE_ULP {
            return Err(Error::MeshMismatch {
                index: i,
                coarse: coarse_x,
                fine: fine_x,
            });
        }
        worst = worst.max((reference.values[i * stride] - sol.values[i]).abs());
    }
    Ok(worst)
}

/// Experimental order (ln E_N − ln E_{2N}) / ln 2.
pub fn order(e_n: f64, e_2n: f64) -> Result<f64> {
    if !(e_n > 0.0 && e_n.is_finite()) || !(e_2n > 0.0 && e_2n.is_finite()) {
        return Err(Error::Domain(format!(
            "order needs positive finite errors, got {e_n:e} and {e_2n:e}"
        )));
    }
    Ok((e_n.ln() - e_2n.ln()) / std::f64::consts::LN_2)
}

enum RefState {
    NotNeeded,
    Ready(Box<Solution>),
    Failed(String),
}

/// Runs the full (ε, N) study. Cells execute in parallel on the ambient
/// rayon pool; results are assembled in deterministic order. A failed cell
/// is recorded in its row and the remaining cells still run.
pub fn run_convergence_study(cfg: &StudyConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let needs_reference = !cfg.problem.has_exact();

    // one reference per epsilon, computed (or loaded) up front
    let refs: Vec<RefState> = cfg
        .epsilons
        .par_iter()
        .map(|&epsilon| {
            if !needs_reference {
                return RefState::NotNeeded;
            }
            let cell = cfg.cell(epsilon, cfg.reference_n);
            let solved = match &cfg.cache_dir {
                Some(dir) => reference_cache(dir, &cfg.problem, &cell, &cfg.newton),
                None => solve_cell(&cfg.problem, &cell, &cfg.newton),
            };
            match solved {
                Ok(sol) => RefState::Ready(Box::new(sol)),
                Err(err) => RefState::Failed(err.to_string()),
            }
        })
        .collect();

    let pairs: Vec<(usize, usize)> = (0..cfg.epsilons.len())
        .flat_map(|i| (0..cfg.ns.len()).map(move |j| (i, j)))
        .collect();

    let errors: Vec<std::result::Result<f64, String>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let epsilon = cfg.epsilons[i];
            let n = cfg.ns[j];
            let sol = solve_cell(&cfg.problem, &cfg.cell(epsilon, n), &cfg.newton)
                .map_err(|e| e.to_string())?;
            match &refs[i] {
                RefState::NotNeeded => {
                    error_against_exact(&sol, &cfg.problem).map_err(|e| e.to_string())
                }
                RefState::Ready(reference) => {
                    error_against_reference(&sol, reference).map_err(|e| e.to_string())
                }
                RefState::Failed(msg) => Err(format!("reference solve failed: {msg}")),
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(pairs.len());
    for i in 0..cfg.epsilons.len() {
        let epsilon = cfg.epsilons[i];
        let clamped = cfg.p - epsilon.cbrt() <= 0.0;
        for j in 0..cfg.ns.len() {
            let this = &errors[i * cfg.ns.len() + j];
            let next = if j + 1 < cfg.ns.len() && cfg.ns[j + 1] == 2 * cfg.ns[j] {
                errors[i * cfg.ns.len() + j + 1].as_ref().ok()
            } else {
                None
            };
            let (e_n, ord, error) = match this {
                Ok(e) => {
                    let ord = next.and_then(|e2| order(*e, *e2).ok());
                    (Some(*e), ord, None)
                }
                Err(msg) => (None, None, Some(msg.clone())),
            };
            rows.push(TableRow {
                epsilon,
                n: cfg.ns[j],
                e_n,
                ord,
                clamped,
                error,
            });
        }
    }

    Ok(ConvergenceTable {
        problem: cfg.problem.name().to_string(),
        gamma: cfg.gamma,
        q: cfg.q,
        a: cfg.a,
        p: cfg.p,
        reference_n: needs_reference.then_some(cfg.reference_n),
        rows,
    })
}

/// Scientific notation with 5 significant digits and a two-digit exponent,
/// e.g. `1.3294e-03`.
fn format_e5(x: f64) -> String {
    let raw = format!("{x:.4e}");
    pad_exponent(&raw)
}

fn pad_exponent(raw: &str) -> String {
    match raw.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => raw.to_string(),
    }
}

/// ε rendered as `2^-k` when it is an exact power of two, else scientific.
fn format_epsilon(epsilon: f64) -> String {
    let log = epsilon.log2();
    if log == log.round() && log.abs() < 1074.0 && 2.0_f64.powi(log as i32) == epsilon {
        format!("2^{}", log as i32)
    } else {
        format!("{epsilon:e}")
    }
}

/// Renders a table as CSV (`epsilon,N,E_N,Ord`) or as a Markdown grid.
/// Ordering is deterministic: ε outer, N inner; absent Ord prints `-`.
pub fn emit_table(table: &ConvergenceTable, format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("epsilon,N,E_N,Ord\n");
            for row in &table.rows {
                let e = match (&row.e_n, &row.error) {
                    (Some(e), _) => format_e5(*e),
                    (None, _) => "FAILED".to_string(),
                };
                let ord = row.ord.map_or("-".to_string(), |o| format!("{o:.2}"));
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    format_epsilon(row.epsilon),
                    row.n,
                    e,
                    ord
                ));
            }
        }
        TableFormat::Markdown => {
            out.push_str(&format!(
                "**{}** (gamma = {}, q = {}, a = {}, p = {}{})\n\n",
                table.problem,
                table.gamma,
                table.q,
                table.a,
                table.p,
                table
                    .reference_n
                    .map_or(String::new(), |n| format!(", reference N = {n}"))
            ));
            out.push_str("| epsilon | N | E_N | Ord |\n|---|---:|---:|---:|\n");
            for row in &table.rows {
                let e = match &row.e_n {
                    Some(e) => format_e5(*e),
                    None => format!("FAILED: {}", row.error.as_deref().unwrap_or("?")),
                };
                let ord = row.ord.map_or("-".to_string(), |o| format!("{o:.2}"));
                let eps = if row.clamped {
                    format!("{} (clamped)", format_epsilon(row.epsilon))
                } else {
                    format_epsilon(row.epsilon)
                };
                out.push_str(&format!("| {} | {} | {} | {} |\n", eps, row.n, e, ord));
            }
        }
    }
    out
}
