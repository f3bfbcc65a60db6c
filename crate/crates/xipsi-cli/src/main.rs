//! `xipsi` command-line interface: measure queries, region-curve exports,
//! table reproduction, the discretized convex program, and strip-family
//! density exports.
//!
//! Exit codes: 0 success, 2 input error, 3 infeasible grid input,
//! 4 solver/quadrature non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use xipsi::boundary::{boundary_export, region_check, write_boundary_csv_path, Curve, RegionPoint};
use xipsi::descriptor::Descriptor;
use xipsi::gridcop::GridCopula;
use xipsi::optimize::{density_from_field, qp_solve, QpProblem};
use xipsi::pgm::{write_density_pgm_path, write_matrix_csv_path};
use xipsi::tables::{table1, table2, table_csv, table_text, TableRow};
use xipsi::twoparam::{path_params, StripCopula};
use xipsi::Error;

#[derive(Parser)]
#[command(name = "xipsi", version, about = "Chatterjee's xi and Spearman's footrule for bivariate copulas")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Grid size for grid-evaluated families (default 400)
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Absolute tolerance for quadrature-evaluated families (default 1e-6)
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// JSON config file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (0 = automatic)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format of measure summaries
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate xi, psi (and tau where available) for a family descriptor
    /// (inline JSON or a .json file) or a grid CSV file
    Measures { descriptor: String },
    /// Export a region curve (upper | jensen | si_lower | path) as CSV
    Boundary {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-family maximizers of the gap psi - xi (CSV via --out)
    Table1 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-family minimizers of the sum xi + psi (CSV via --out)
    Table2 {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the discretized convex program and export the minimizer field
    Optimize {
        #[arg(long)]
        mu: f64,
        /// Output file prefix (writes <prefix>.h.csv, <prefix>.density.pgm,
        /// <prefix>.density.csv, <prefix>.log.csv, <prefix>.summary.json)
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-12)]
        obj_tol: f64,
    },
    /// Check a (xi, psi) point against the attainable-region bounds
    #[command(allow_negative_numbers = true)]
    RegionCheck {
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        psi: f64,
    },
    /// Build a strip copula from (alpha, beta) or a path parameter mu,
    /// report measures and optionally export its density
    Twoparam {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        mu: Option<f64>,
        /// Output file prefix for density exports (PGM + CSV)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Density sampling resolution
        #[arg(long, default_value_t = 128)]
        density_n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pgm,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    grid_n: Option<usize>,
    quad_tol: Option<f64>,
    output_dir: Option<PathBuf>,
    threads: Option<usize>,
    format: Option<String>,
}

#[derive(Debug, Clone)]
struct Config {
    grid_n: usize,
    quad_tol: f64,
    output_dir: PathBuf,
    threads: usize,
    format: Format,
}

impl Config {
    /// Precedence: flags > config file > env (threads only) > defaults.
    fn resolve(cli: &Cli) -> Result<Self, Error> {
        let file: FileConfig = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Parse(format!("bad config file: {e}")))?
            }
            None => FileConfig::default(),
        };
        let env_threads = std::env::var("XIPSI_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok());
        let format = match (&cli.format, file.format.as_deref()) {
            (Some(f), _) => *f,
            (None, Some("json")) => Format::Json,
            (None, Some("csv")) => Format::Csv,
            (None, Some("pgm")) => Format::Pgm,
            (None, Some(other)) => {
                return Err(Error::Parse(format!("unknown format '{other}' in config")))
            }
            (None, None) => Format::Json,
        };
        let cfg = Config {
            grid_n: cli.n.or(file.grid_n).unwrap_or(400),
            quad_tol: cli.tol.or(file.quad_tol).unwrap_or(1e-6),
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from(".")),
            threads: cli.threads.or(file.threads).or(env_threads).unwrap_or(0),
            format,
        };
        if cfg.grid_n < 16 {
            return Err(Error::Parse(format!("grid_n {} < 16", cfg.grid_n)));
        }
        if !cfg.quad_tol.is_finite() || cfg.quad_tol <= 0.0 {
            return Err(Error::Parse(format!("quad_tol {} must be > 0", cfg.quad_tol)));
        }
        Ok(cfg)
    }

    fn resolve_out(&self, out: &Path) -> PathBuf {
        if out.is_absolute() {
            out.to_path_buf()
        } else {
            self.output_dir.join(out)
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InfeasibleGrid { .. } => 3,
        Error::SolverNonConvergence { .. } | Error::QuadratureNonConvergence { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match Config::resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cfg.threads > 0 {
        // ignore failure if a pool already exists (tests call main via the binary)
        let _ = rayon_pool(cfg.threads);
    }
    match run(cli.cmd, &cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn rayon_pool(threads: usize) -> Result<(), Error> {
    xipsi::build_thread_pool(threads).map_err(Error::Parse)
}

fn run(cmd: Cmd, cfg: &Config) -> Result<ExitCode, Error> {
    match cmd {
        Cmd::Measures { descriptor } => cmd_measures(&descriptor, cfg),
        Cmd::Boundary {
            curve,
            samples,
            out,
        } => {
            let curve: Curve = curve.parse()?;
            if samples < 2 {
                return Err(Error::Parse("need at least 2 samples".into()));
            }
            let rows = boundary_export(curve, samples, cfg.quad_tol)?;
            write_boundary_csv_path(&cfg.resolve_out(&out), &rows)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Table1 { out } => emit_table(table1(cfg.grid_n), "psi-xi", out.as_deref(), cfg),
        Cmd::Table2 { out } => emit_table(table2(cfg.grid_n), "xi+psi", out.as_deref(), cfg),
        Cmd::Optimize {
            mu,
            out,
            max_iters,
            obj_tol,
        } => cmd_optimize(mu, cfg.grid_n, max_iters, obj_tol, &cfg.resolve_out(&out)),
        Cmd::RegionCheck { xi, psi } => {
            let verdict = region_check(RegionPoint::new(xi, psi)?)?;
            println!("{}", serde_json::to_string_pretty(&verdict)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Twoparam {
            alpha,
            beta,
            mu,
            out,
            density_n,
        } => cmd_twoparam(alpha, beta, mu, out.as_deref(), density_n, cfg),
    }
}

fn cmd_measures(descriptor: &str, cfg: &Config) -> Result<ExitCode, Error> {
    let trimmed = descriptor.trim();
    let report = if trimmed.starts_with('{') {
        Descriptor::from_json(trimmed)?.measures(cfg.grid_n, cfg.quad_tol)?
    } else {
        let path = Path::new(trimmed);
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(path)?;
            Descriptor::from_json(&text)?.measures(cfg.grid_n, cfg.quad_tol)?
        } else {
            GridCopula::read_csv_path(path)?.measures()
        }
    };
    match cfg.format {
        Format::Csv => {
            println!("xi,psi,tau,method,n");
            println!(
                "{},{},{},{:?},{}",
                report.xi,
                report.psi,
                report.tau.map(|t| t.to_string()).unwrap_or_default(),
                report.method,
                report.n_or_tol
            );
        }
        _ => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn emit_table(
    rows: Vec<TableRow>,
    value_label: &str,
    out: Option<&Path>,
    cfg: &Config,
) -> Result<ExitCode, Error> {
    print!("{}", table_text(&rows, value_label));
    if let Some(path) = out {
        std::fs::write(cfg.resolve_out(path), table_csv(&rows))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_optimize_files(
    prefix: &Path,
    sol: &xipsi::optimize::QpSolution,
) -> Result<(), Error> {
    let with = |suffix: &str| -> PathBuf {
        let mut name = prefix.file_name().unwrap_or_default().to_os_string();
        name.push(suffix);
        prefix.with_file_name(name)
    };
    sol.h.write_csv_path(&with(".h.csv"))?;
    let (density, _clip) = density_from_field(&sol.h);
    write_density_pgm_path(&with(".density.pgm"), sol.h.n(), &density)?;
    write_matrix_csv_path(&with(".density.csv"), "density", sol.h.n(), &density)?;
    let mut log = String::from("iter,objective,feas_residual\n");
    for row in &sol.log {
        log.push_str(&format!("{},{},{}\n", row.iter, row.objective, row.feas_residual));
    }
    std::fs::write(with(".log.csv"), log)?;
    Ok(())
}

fn optimize_summary(sol: &xipsi::optimize::QpSolution, mu: f64, converged: bool) -> serde_json::Value {
    serde_json::json!({
        "mu": mu,
        "n": sol.h.n(),
        "objective": sol.objective,
        "xi": sol.h.xi(),
        "psi": sol.h.psi(),
        "iterations": sol.iterations,
        "feasibility_residual": sol.feasibility_residual,
        "stationarity_residual": sol.stationarity_residual,
        "converged": converged,
    })
}

fn cmd_optimize(
    mu: f64,
    n: usize,
    max_iters: usize,
    obj_tol: f64,
    prefix: &Path,
) -> Result<ExitCode, Error> {
    let problem = QpProblem::new(mu, n)?;
    match qp_solve(problem, max_iters, obj_tol) {
        Ok(sol) => {
            write_optimize_files(prefix, &sol)?;
            let summary = optimize_summary(&sol, mu, true);
            std::fs::write(
                summary_path(prefix),
                serde_json::to_string_pretty(&summary)?,
            )?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::SolverNonConvergence { best, .. }) => {
            // best iterate is still written for inspection
            write_optimize_files(prefix, &best)?;
            let summary = optimize_summary(&best, mu, false);
            std::fs::write(
                summary_path(prefix),
                serde_json::to_string_pretty(&summary)?,
            )?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            eprintln!("error: solver did not converge");
            Ok(ExitCode::from(4))
        }
        Err(e) => Err(e),
    }
}

fn summary_path(prefix: &Path) -> PathBuf {
    let mut name = prefix.file_name().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    prefix.with_file_name(name)
}

fn cmd_twoparam(
    alpha: Option<f64>,
    beta: Option<f64>,
    mu: Option<f64>,
    out: Option<&Path>,
    density_n: usize,
    cfg: &Config,
) -> Result<ExitCode, Error> {
    let (alpha, beta) = match (alpha, beta, mu) {
        (Some(a), Some(b), None) => (a, b),
        (None, None, Some(m)) => {
            let p = path_params(m)?;
            (p.alpha, p.beta)
        }
        _ => {
            return Err(Error::Parse(
                "provide either --alpha and --beta, or --mu".into(),
            ))
        }
    };
    let sc = StripCopula::build(alpha, beta)?;
    let m = sc.measures(cfg.quad_tol.max(1e-10))?;
    let summary = serde_json::json!({
        "alpha": alpha,
        "beta": beta,
        "xi": m.xi,
        "psi": m.psi,
        "method": "quadrature",
        "tol": m.n_or_tol,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(prefix) = out {
        let prefix = cfg.resolve_out(prefix);
        let n = density_n;
        let mut density = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                density[i * n + j] =
                    sc.density(xipsi::gridcop::midpoint(i, n), xipsi::gridcop::midpoint(j, n));
            }
        }
        let with = |suffix: &str| -> PathBuf {
            let mut name = prefix.file_name().unwrap_or_default().to_os_string();
            name.push(suffix);
            prefix.with_file_name(name)
        };
        write_density_pgm_path(&with(".density.pgm"), n, &density)?;
        write_matrix_csv_path(&with(".density.csv"), "density", n, &density)?;
    }
    Ok(ExitCode::SUCCESS)
}
