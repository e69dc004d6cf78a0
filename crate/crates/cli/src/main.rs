//! Command-line front end: mesh dumps, single solves, and convergence
//! studies for the fitted-scheme reaction-diffusion solver.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spbvp::harness::{
    emit_table, run_convergence_study, solve_cell, CellParams, StudyConfig, TableFormat,
};
use spbvp::mesh::{build_mesh, mesh_diagnostics, MeshParams};
use spbvp::problem::Problem;
use spbvp::solver::NewtonConfig;

/// Parses a real number, accepting `2^-10` alongside plain decimal and
/// scientific forms.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: f64 = base
            .trim()
            .parse()
            .map_err(|e| format!("bad base in `{s}`: {e}"))?;
        let exp: i32 = exp
            .trim()
            .parse()
            .map_err(|e| format!("bad exponent in `{s}`: {e}"))?;
        Ok(base.powi(exp))
    } else {
        s.parse().map_err(|e| format!("bad number `{s}`: {e}"))
    }
}

/// Parses a mesh size, accepting `2^13` alongside plain integers.
fn parse_n(s: &str) -> Result<usize, String> {
    let s = s.trim();
    if let Some((base, exp)) = s.split_once('^') {
        let base: u32 = base
            .trim()
            .parse()
            .map_err(|e| format!("bad base in `{s}`: {e}"))?;
        let exp: u32 = exp
            .trim()
            .parse()
            .map_err(|e| format!("bad exponent in `{s}`: {e}"))?;
        (base as usize)
            .checked_pow(exp)
            .ok_or_else(|| format!("`{s}` overflows"))
    } else {
        s.parse().map_err(|e| format!("bad integer `{s}`: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "spbvp",
    version,
    about = "Fitted difference scheme for singularly perturbed reaction-diffusion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a layer-adapted mesh and dump it as CSV (i,t_i,x_i,h_i)
    Mesh(MeshArgs),
    /// Solve one problem instance and dump the solution as CSV (i,x_i,y_i)
    Solve(SolveArgs),
    /// Run a convergence study over an (epsilon, N) grid
    Study(StudyArgs),
}

#[derive(Args)]
struct MeshArgs {
    /// Perturbation parameter (accepts 2^-10 or decimal)
    #[arg(long, value_parser = parse_real)]
    epsilon: f64,
    /// Number of subintervals (even, >= 4; accepts 2^6)
    #[arg(long, value_parser = parse_n)]
    n: usize,
    /// Layer-density parameter
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    a: f64,
    /// Mesh transition parameter in (0, 1/2)
    #[arg(long, value_parser = parse_real)]
    p: f64,
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also print mesh diagnostics to stderr
    #[arg(long)]
    diagnostics: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Builtin problem id
    #[arg(long)]
    problem: String,
    /// Perturbation parameter (accepts 2^-10 or decimal)
    #[arg(long, value_parser = parse_real)]
    epsilon: f64,
    /// Number of subintervals (accepts 2^6)
    #[arg(long, value_parser = parse_n)]
    n: usize,
    /// Fitting constant gamma (must dominate f_y on the solution box)
    #[arg(long, value_parser = parse_real)]
    gamma: f64,
    /// Central weight of the reaction average
    #[arg(long, default_value_t = 4.0, value_parser = parse_real)]
    q: f64,
    /// Layer-density parameter
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    a: f64,
    /// Mesh transition parameter in (0, 1/2)
    #[arg(long, value_parser = parse_real)]
    p: f64,
    /// Newton step tolerance
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Newton residual tolerance
    #[arg(long, default_value_t = 1e-12)]
    residual_tol: f64,
    /// Newton iteration budget
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Md,
}

#[derive(Args)]
struct StudyArgs {
    /// Builtin problem id
    #[arg(long)]
    problem: String,
    /// Comma-separated epsilon list (2^-k syntax allowed)
    #[arg(long, value_delimiter = ',', value_parser = parse_real, required = true)]
    eps_list: Vec<f64>,
    /// Comma-separated N list (2^k syntax allowed)
    #[arg(long, value_delimiter = ',', value_parser = parse_n, required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_parser = parse_real)]
    gamma: f64,
    #[arg(long, default_value_t = 4.0, value_parser = parse_real)]
    q: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_real)]
    a: f64,
    #[arg(long, value_parser = parse_real)]
    p: f64,
    /// Mesh size of the bootstrap reference (problems without a closed form)
    #[arg(long, default_value = "16384", value_parser = parse_n)]
    reference_n: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Cache directory for reference solutions
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Worker threads for the study cells (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Newton step tolerance
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Newton iteration budget
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Write to this file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

fn write_out(output: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run_mesh(args: &MeshArgs) -> anyhow::Result<()> {
    let params = MeshParams::new(args.epsilon, args.p, args.a, args.n)?;
    let mesh = build_mesh(&params)?;
    let mut out = String::from("i,t_i,x_i,h_i\n");
    for i in 0..=args.n {
        let h = if i < args.n {
            format!("{:.16e}", mesh.step(i))
        } else {
            String::new()
        };
        out.push_str(&format!("{i},{:.16e},{:.16e},{h}\n", mesh.t(i), mesh.nodes[i]));
    }
    write_out(args.output.as_ref(), &out)?;
    if args.diagnostics {
        let report = mesh_diagnostics(&mesh);
        eprintln!(
            "mesh: alpha = {:.6e}, omega = {:.6e}, clamped = {}, \
             max N*h = {:.4e}, max N^2*|dh| = {:.4e}, monotone nodes = {}, symmetry defect = {:e}",
            mesh.alpha,
            mesh.omega,
            mesh.clamped,
            report.max_scaled_step,
            report.max_scaled_step_diff,
            report.monotone_nodes,
            report.symmetry_defect
        );
    }
    Ok(())
}

fn run_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let problem = Problem::from_id(&args.problem)?;
    let cell = CellParams {
        epsilon: args.epsilon,
        n: args.n,
        gamma: args.gamma,
        q: args.q,
        a: args.a,
        p: args.p,
    };
    let newton = NewtonConfig {
        tol: args.tol,
        residual_tol: args.residual_tol,
        max_iter: args.max_iter,
        ..NewtonConfig::default()
    };
    let sol = solve_cell(&problem, &cell, &newton)?;
    eprintln!(
        "converged in {} iterations (step {:.2e}, residual {:.2e})",
        sol.iterations, sol.final_step_norm, sol.final_residual_norm
    );
    let mut out = String::from("i,x_i,y_i\n");
    for (i, (x, y)) in sol.mesh.nodes.iter().zip(&sol.values).enumerate() {
        out.push_str(&format!("{i},{x:.16e},{y:.16e}\n"));
    }
    write_out(args.output.as_ref(), &out)
}

fn run_study(args: &StudyArgs) -> anyhow::Result<()> {
    let problem = Problem::from_id(&args.problem)?;
    let cfg = StudyConfig {
        gamma: args.gamma,
        q: args.q,
        a: args.a,
        p: args.p,
        newton: NewtonConfig {
            tol: args.tol,
            max_iter: args.max_iter,
            ..NewtonConfig::default()
        },
        reference_n: args.reference_n,
        format: match args.format {
            FormatArg::Csv => TableFormat::Csv,
            FormatArg::Md => TableFormat::Markdown,
        },
        cache_dir: args.cache_dir.clone(),
        ..StudyConfig::new(problem, args.eps_list.clone(), args.n_list.clone())
    };

    let table = match args.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .context("building worker pool")?;
            pool.install(|| run_convergence_study(&cfg))?
        }
        None => run_convergence_study(&cfg)?,
    };

    write_out(args.output.as_ref(), &emit_table(&table, cfg.format))?;
    let failed: Vec<_> = table.rows.iter().filter(|r| r.error.is_some()).collect();
    if !failed.is_empty() {
        for row in &failed {
            eprintln!(
                "cell (epsilon = {:e}, N = {}) failed: {}",
                row.epsilon,
                row.n,
                row.error.as_deref().unwrap_or("?")
            );
        }
        bail!("{} of {} cells failed", failed.len(), table.rows.len());
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Mesh(args) => run_mesh(args),
        Command::Solve(args) => run_solve(args),
        Command::Study(args) => run_study(args),
    }
}
