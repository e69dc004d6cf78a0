//! On-disk cache for bootstrap reference solutions.
//!
//! One CSV file per parameter tuple, with a header that pins every input the
//! values depend on. A corrupt or mismatched file is recomputed with a
//! warning; values are stored at 17 significant digits so a round trip is
//! bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::harness::{solve_cell, CellParams};
use crate::mesh::{build_mesh, MeshParams};
use crate::problem::Problem;
use crate::solver::{NewtonConfig, Solution};

const FORMAT_TAG: &str = "reference solution cache v1";

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325_u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn key_string(problem: &Problem, cell: &CellParams, newton: &NewtonConfig) -> String {
    format!(
        "{}|{:016x}|{}|{:016x}|{:016x}|{:016x}|{:016x}|{:016x}|{:016x}|{}",
        problem.name(),
        cell.epsilon.to_bits(),
        cell.n,
        cell.gamma.to_bits(),
        cell.q.to_bits(),
        cell.a.to_bits(),
        cell.p.to_bits(),
        newton.tol.to_bits(),
        newton.residual_tol.to_bits(),
        newton.max_iter,
    )
}

fn cache_path(dir: &Path, problem: &Problem, cell: &CellParams, newton: &NewtonConfig) -> PathBuf {
    let key = key_string(problem, cell, newton);
    dir.join(format!(
        "refsol-{}-n{}-{:016x}.csv",
        problem.name(),
        cell.n,
        fnv1a(key.as_bytes())
    ))
}

fn store(
    path: &Path,
    problem: &Problem,
    cell: &CellParams,
    newton: &NewtonConfig,
    sol: &Solution,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# {FORMAT_TAG}\n"));
    out.push_str(&format!("# problem: {}\n", problem.name()));
    out.push_str(&format!("# epsilon: {:.16e}\n", cell.epsilon));
    out.push_str(&format!("# n: {}\n", cell.n));
    out.push_str(&format!("# gamma: {:.16e}\n", cell.gamma));
    out.push_str(&format!("# q: {:.16e}\n", cell.q));
    out.push_str(&format!("# a: {:.16e}\n", cell.a));
    out.push_str(&format!("# p: {:.16e}\n", cell.p));
    out.push_str(&format!("# tol: {:.16e}\n", newton.tol));
    out.push_str(&format!("# residual_tol: {:.16e}\n", newton.residual_tol));
    out.push_str(&format!("# max_iter: {}\n", newton.max_iter));
    out.push_str(&format!("# iterations: {}\n", sol.iterations));
    out.push_str(&format!("# final_step_norm: {:.16e}\n", sol.final_step_norm));
    out.push_str(&format!(
        "# final_residual_norm: {:.16e}\n",
        sol.final_residual_norm
    ));
    out.push_str("i,x_i,y_i\n");
    for (i, (x, y)) in sol.mesh.nodes.iter().zip(&sol.values).enumerate() {
        out.push_str(&format!("{i},{x:.16e},{y:.16e}\n"));
    }

    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, out)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load(
    path: &Path,
    problem: &Problem,
    cell: &CellParams,
    newton: &NewtonConfig,
) -> std::result::Result<Solution, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let mut headers: Vec<(&str, &str)> = Vec::new();
    let mut data: Vec<&str> = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once(": ") {
                headers.push((k, v));
            } else {
                headers.push((rest, ""));
            }
        } else if !line.is_empty() && line != "i,x_i,y_i" {
            data.push(line);
        }
    }

    let header = |key: &str| -> std::result::Result<&str, String> {
        headers
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| format!("missing header `{key}`"))
    };
    let header_f64 = |key: &str| -> std::result::Result<f64, String> {
        header(key)?
            .parse::<f64>()
            .map_err(|e| format!("bad header `{key}`: {e}"))
    };
    let check_f64 = |key: &str, expected: f64| -> std::result::Result<(), String> {
        let got = header_f64(key)?;
        if got.to_bits() != expected.to_bits() {
            return Err(format!("header `{key}` = {got:e} does not match {expected:e}"));
        }
        Ok(())
    };

    if headers.first().map(|(k, _)| *k) != Some(FORMAT_TAG) {
        return Err("unrecognized format tag".into());
    }
    if header("problem")? != problem.name() {
        return Err(format!("cached problem `{}` differs", header("problem")?));
    }
    check_f64("epsilon", cell.epsilon)?;
    check_f64("gamma", cell.gamma)?;
    check_f64("q", cell.q)?;
    check_f64("a", cell.a)?;
    check_f64("p", cell.p)?;
    check_f64("tol", newton.tol)?;
    check_f64("residual_tol", newton.residual_tol)?;
    let n: usize = header("n")?.parse().map_err(|e| format!("bad n: {e}"))?;
    if n != cell.n {
        return Err(format!("cached n = {n} differs from {}", cell.n));
    }
    let max_iter: usize = header("max_iter")?
        .parse()
        .map_err(|e| format!("bad max_iter: {e}"))?;
    if max_iter != newton.max_iter {
        return Err(format!("cached max_iter = {max_iter} differs"));
    }

    if data.len() != n + 1 {
        return Err(format!("expected {} rows, found {}", n + 1, data.len()));
    }

    let mesh = build_mesh(
        &MeshParams::new(cell.epsilon, cell.p, cell.a, cell.n).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;

    let mut values = Vec::with_capacity(n + 1);
    for (i, line) in data.iter().enumerate() {
        let mut fields = line.split(',');
        let idx: usize = fields
            .next()
            .ok_or("short row")?
            .parse()
            .map_err(|e| format!("bad index: {e}"))?;
        if idx != i {
            return Err(format!("row index {idx} out of order"));
        }
        let x: f64 = fields
            .next()
            .ok_or("short row")?
            .parse()
            .map_err(|e| format!("bad x: {e}"))?;
        let y: f64 = fields
            .next()
            .ok_or("short row")?
            .parse()
            .map_err(|e| format!("bad y: {e}"))?;
        if x.to_bits() != mesh.nodes[i].to_bits() {
            return Err(format!("node {i} = {x:e} does not match the rebuilt mesh"));
        }
        if !y.is_finite() {
            return Err(format!("value {i} = {y:e} is not finite"));
        }
        values.push(y);
    }

    Ok(Solution {
        mesh,
        values,
        iterations: header("iterations")?
            .parse()
            .map_err(|e| format!("bad iterations: {e}"))?,
        final_step_norm: header_f64("final_step_norm")?,
        final_residual_norm: header_f64("final_residual_norm")?,
        converged: true,
    })
}

/// Loads the reference solution for this exact parameter tuple, or computes
/// and stores it. A corrupt or mismatched file is recomputed with a warning
/// and overwritten.
pub fn reference_cache(
    dir: &Path,
    problem: &Problem,
    cell: &CellParams,
    newton: &NewtonConfig,
) -> Result<Solution> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, problem, cell, newton);
    if path.exists() {
        match load(&path, problem, cell, newton) {
            Ok(sol) => return Ok(sol),
            Err(msg) => {
                log::warn!(
                    "reference cache {} is unusable ({msg}); recomputing",
                    path.display()
                );
            }
        }
    }
    let sol = solve_cell(problem, cell, newton)?;
    store(&path, problem, cell, newton, &sol)?;
    Ok(sol)
}
