//! Command-line harness: named experiments, parameter overrides and the
//! convergence-study driver.

mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{
    parse_config_file, parse_meshes, parse_on_off, parse_test, DtChoice, FileConfig, RunArgs, RunConfig, STEADY_CFL,
    TRANSIENT_CFL,
};

use crate::analysis::{self, ErrorReport};
use crate::dgfield::{project_initial, DGField};
use crate::mesh::Mesh;
use crate::timestep::{RunReport, Solver, SolverConfig};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "dglimit", version, about = "Limited DG-P1 solvers for 2D scalar conservation laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one experiment and write report.json, field.vtk and cut.csv.
    Run(RunArgs),
    /// Steady runs on several meshes; writes convergence.csv.
    Convergence(RunArgs),
}

/// A finished solve.
pub struct Solution {
    pub mesh: Mesh,
    pub field: DGField,
    pub report: RunReport,
    pub dt: f64,
}

impl Solution {
    /// SC-postprocessed field used for errors, extrema and plots.
    pub fn postprocessed(&self) -> DGField {
        analysis::sc_postprocess(&self.mesh, &self.field)
    }
}

/// Builds the mesh, projects the initial data and integrates.
pub fn solve(cfg: &RunConfig) -> Result<Solution> {
    let case = &cfg.test;
    let ny = case.ny_for(cfg.nx);
    let mesh = Mesh::uniform(case.bounds, cfg.nx, ny, [false; 2])?;
    let mut field = project_initial(&mesh, case.initial);
    let mut scfg = SolverConfig::new(cfg.limiters);
    scfg.space = cfg.space;
    scfg.entropy = cfg.entropy;
    let mut solver = Solver::for_case(&mesh, case, scfg)?;
    let dt = match cfg.dt {
        DtChoice::Fixed(dt) => dt,
        DtChoice::Auto(safety) => safety * solver.cfl_max_dt(&field, f64::INFINITY).min(1e3 * mesh.hx),
    };
    let every = cfg.progress;
    let progress = |r: &RunReport| {
        if every > 0 && r.steps % every == 0 {
            match r.residuals.last() {
                Some(res) => println!(
                    "step {:>7}  residual {:.3e}  range [{:.6}, {:.6}]",
                    r.steps, res, r.min_avg, r.max_avg
                ),
                None => println!(
                    "step {:>7}  t {:.5}  range [{:.6}, {:.6}]",
                    r.steps, r.final_time, r.min_avg, r.max_avg
                ),
            }
        }
    };
    if case.is_steady() {
        solver.steady_solve(&mut field, dt, cfg.tol, cfg.max_steps, progress)?;
    } else {
        let t_final = cfg.t_final.or(case.final_time).unwrap();
        solver.run_transient(&mut field, dt, t_final, progress)?;
    }
    let report = solver.report.clone();
    drop(solver);
    Ok(Solution { mesh, field, report, dt })
}

#[derive(Serialize)]
struct ReportFile<'a> {
    test: &'a str,
    nx: usize,
    ny: usize,
    flux: String,
    slope: String,
    stencil: String,
    space: crate::timestep::Space,
    entropy: bool,
    gamma: f64,
    steady: bool,
    final_residual: Option<f64>,
    min_nodal: f64,
    max_nodal: f64,
    error: Option<ErrorReport>,
    #[serde(flatten)]
    run: &'a RunReport,
}

/// Summary of a `run` invocation.
pub struct RunOutcome {
    pub solution: Solution,
    pub error: Option<ErrorReport>,
    pub min_nodal: f64,
    pub max_nodal: f64,
    pub dir: PathBuf,
}

/// Solves and writes `report.json`, `field.vtk` and, where the test defines
/// one, `cut.csv` into the output directory.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let solution = solve(cfg)?;
    let dir = cfg.output_dir();
    let mesh = &solution.mesh;
    let post = solution.postprocessed();
    let nodal = analysis::project_bilinear(mesh, &post);
    let (min_nodal, max_nodal) = nodal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let error = cfg.test.exact.map(|g| analysis::e2_error(mesh, &post, g));

    analysis::write_vtk(&dir.join("field.vtk"), mesh, &post.avg, &nodal)?;
    if cfg.test.name == "anisotropic-advection" {
        let cut = analysis::line_cut(mesh, &post, 'y', 0.1, mesh.nx)?;
        let rows: Vec<Vec<String>> = cut.iter().map(|(x, v)| vec![format!("{x}"), format!("{v:.12e}")]).collect();
        analysis::write_csv(&dir.join("cut.csv"), &["x", "value"], &rows)?;
    }
    let file = ReportFile {
        test: cfg.test.name,
        nx: mesh.nx,
        ny: mesh.ny,
        flux: cfg.limiters.flux.to_string(),
        slope: cfg.limiters.slope.to_string(),
        stencil: cfg.limiters.stencil.to_string(),
        space: cfg.space,
        entropy: cfg.entropy,
        gamma: cfg.limiters.gamma,
        steady: cfg.test.is_steady(),
        final_residual: solution.report.residuals.last().copied(),
        min_nodal,
        max_nodal,
        error,
        run: &solution.report,
    };
    write_json(&dir.join("report.json"), &file)?;
    Ok(RunOutcome {
        solution,
        error,
        min_nodal,
        max_nodal,
        dir,
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One row of a convergence table.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub method: String,
    pub nx: usize,
    pub h: f64,
    pub e2: f64,
    pub eoc: Option<f64>,
    pub steps: usize,
    pub converged: Option<bool>,
}

fn table_rows(rows: &[ConvergenceRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.method.clone(),
                r.nx.to_string(),
                format!("{:e}", r.h),
                format!("{:.6e}", r.e2),
                r.eoc.map_or(String::new(), |e| format!("{e:.4}")),
            ]
        })
        .collect()
}

/// Runs the configured method on every mesh of `cfg.meshes` and writes
/// `convergence.csv`. A failing member aborts after saving the rows so far.
pub fn convergence_study(cfg: &RunConfig) -> Result<Vec<ConvergenceRow>> {
    if cfg.meshes.is_empty() {
        return Err(Error::Config("convergence needs --meshes, e.g. 32,64,128".into()));
    }
    let exact = cfg
        .test
        .exact
        .ok_or_else(|| Error::Config(format!("test '{}' has no exact solution", cfg.test.name)))?;
    let dir = cfg.out.clone().unwrap_or_else(|| {
        PathBuf::from("out").join(format!("{}-{}-convergence", cfg.test.name, cfg.limiters.label()))
    });
    let path = dir.join("convergence.csv");
    let header = ["method", "nx", "h", "e2", "eoc"];
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &nx in &cfg.meshes {
        let mut one = cfg.clone();
        one.nx = nx;
        let sol = match solve(&one) {
            Ok(s) => s,
            Err(e) => {
                analysis::write_csv(&path, &header, &table_rows(&rows))?;
                return Err(e);
            }
        };
        let err = analysis::e2_error(&sol.mesh, &sol.field, exact);
        let eoc = rows
            .last()
            .filter(|prev| prev.nx * 2 == nx)
            .and_then(|prev| analysis::eoc(prev.e2, err.e2));
        rows.push(ConvergenceRow {
            method: cfg.limiters.label(),
            nx,
            h: err.h,
            e2: err.e2,
            eoc,
            steps: sol.report.steps,
            converged: sol.report.converged,
        });
        if cfg.progress > 0 {
            println!("nx {nx:>5}  E2 {:.4e}  EOC {}", err.e2, eoc.map_or("-".into(), |e| format!("{e:.3}")));
        }
    }
    analysis::write_csv(&path, &header, &table_rows(&rows))?;
    Ok(rows)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => RunConfig::from_args(a).and_then(|cfg| {
            let out = run(&cfg)?;
            let r = &out.solution.report;
            println!(
                "done: {} steps, averages in [{:.6}, {:.6}], nodal in [{:.6}, {:.6}]{}",
                r.steps,
                r.min_avg,
                r.max_avg,
                out.min_nodal,
                out.max_nodal,
                out.error.map_or(String::new(), |e| format!(", E2 {:.4e}", e.e2))
            );
            if r.converged == Some(false) {
                println!("steady residual did not reach the tolerance in {} steps", r.steps);
            }
            println!("output: {}", out.dir.display());
            Ok(())
        }),
        Command::Convergence(a) => RunConfig::from_args(a).and_then(|cfg| convergence_study(&cfg).map(|_| ())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
