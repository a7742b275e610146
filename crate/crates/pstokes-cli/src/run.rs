//! Command dispatch and artifact layout.
//!
//! Every run writes into its output directory:
//! `manifest.json` (config echo, version, wall time, warnings), and per
//! command: solution fields (`u.field`, `pi.field` with JSON sidecars) plus
//! `diagnostics.json`/`diagnostics.csv`, check `reports.json`/`reports.csv`,
//! an operator-norm `cztable.json`, or sweep member directories with an
//! aggregate table. Wall time lives only in the manifest, so diagnostics are
//! byte-identical across repeated runs with the same configuration and seed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use pstokes::cz::{self, CzTable};
use pstokes::field::{Field, FieldVariant, VectorField};
use pstokes::grid::Grid;
use pstokes::solver::{self, CascadeSchedule, Solution};
use pstokes::stress::{RegParams, StressParams};
use pstokes::verify::{suites, CheckReport};
use pstokes::{gen, io, norms, Error};

use crate::config::{Command, ForcingSpec, RunConfig};
use crate::report_io;

/// Exit codes of the batch front-end.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a RunConfig,
    version: &'static str,
    command: String,
    wall_time_s: f64,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    admissibility: Option<cz::Admissibility>,
}

#[derive(Serialize)]
struct RunDiagnostics<'a> {
    command: String,
    p: f64,
    mu: f64,
    seed: u64,
    forcing_l2: f64,
    u_l2: f64,
    pi_l2: f64,
    #[serde(flatten)]
    solve: &'a pstokes::solver::Diagnostics,
}

pub fn execute(cfg: &RunConfig, out: &Path, threads: usize) -> i32 {
    if let Err(report) = cfg.validate() {
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&report).unwrap_or_default()
        );
        return EXIT_INVALID_CONFIG;
    }
    if let Err(e) = std::fs::create_dir_all(out) {
        eprintln!("cannot create output directory {}: {e}", out.display());
        return EXIT_INVALID_CONFIG;
    }
    let started = Instant::now();
    let mut warnings = Vec::new();
    let mut admissibility = None;
    let code = match dispatch(cfg, out, threads, &mut warnings, &mut admissibility) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    let manifest = Manifest {
        config: cfg,
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.to_string(),
        wall_time_s: started.elapsed().as_secs_f64(),
        warnings,
        admissibility,
    };
    if let Err(e) = report_io::write_json(&out.join("manifest.json"), &manifest) {
        eprintln!("error writing manifest: {e}");
        return EXIT_INTERNAL;
    }
    code
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Divergence { .. } => EXIT_DIVERGED,
        Error::Cascade { source, .. } => exit_code_for(source),
        Error::Io { .. } | Error::FieldFormat { .. } => EXIT_INTERNAL,
        _ => EXIT_INVALID_CONFIG,
    }
}

fn dispatch(
    cfg: &RunConfig,
    out: &Path,
    threads: usize,
    warnings: &mut Vec<String>,
    admissibility: &mut Option<cz::Admissibility>,
) -> pstokes::Result<i32> {
    let grid = cfg.grid.build()?;
    match cfg.command {
        Command::Solve => run_solve(cfg, &grid, out),
        Command::Cascade => run_cascade(cfg, &grid, out, warnings, admissibility),
        Command::Verify => run_verify(cfg, &grid, out),
        Command::CzEstimate => run_cz(cfg, &grid, out),
        Command::Sweep => run_sweep(cfg, &grid, out, threads),
    }
}

pub fn build_forcing(cfg: &RunConfig, grid: &Grid) -> pstokes::Result<VectorField<f64>> {
    let spec = cfg
        .forcing
        .as_ref()
        .ok_or_else(|| Error::Config("this command requires a forcing".into()))?;
    Ok(match spec {
        ForcingSpec::SingleMode { mode, amplitude } => {
            gen::single_mode_forcing(grid, mode, *amplitude)
        }
        ForcingSpec::SolenoidalBump { radius, amplitude } => {
            gen::solenoidal_bump_forcing(grid, *radius, *amplitude)
        }
        ForcingSpec::Random { decay, amplitude } => {
            let mut f = gen::random_solenoidal::<f64>(grid, cfg.seed, 7, *decay);
            let scale = amplitude / norms::max_norm(&f).max(1e-300);
            f.scale(scale);
            f
        }
        ForcingSpec::File { path } => match io::read_field::<f64>(Path::new(path))? {
            FieldVariant::Vector(v) => {
                if v.grid() != grid {
                    return Err(Error::Config(format!(
                        "forcing file grid {:?} does not match the run grid {:?}",
                        v.grid(),
                        grid
                    )));
                }
                v
            }
            other => {
                return Err(Error::Rank(format!(
                    "forcing file must hold a vector field, got rank {}",
                    other.rank()
                )))
            }
        },
    })
}

fn write_solution(cfg: &RunConfig, sol: &Solution<f64>, f: &VectorField<f64>, out: &Path) -> pstokes::Result<()> {
    io::write_field(&out.join("u.field"), &FieldVariant::Vector(sol.u.clone()))?;
    io::write_field(
        &out.join("pi.field"),
        &FieldVariant::Scalar(sol.pi.clone()),
    )?;
    let diag = RunDiagnostics {
        command: cfg.command.to_string(),
        p: sol.params.p,
        mu: sol.params.mu,
        seed: cfg.seed,
        forcing_l2: norms::l2_norm(f),
        u_l2: norms::l2_norm(&sol.u),
        pi_l2: norms::l2_norm(&sol.pi),
        solve: &sol.diagnostics,
    };
    report_io::write_json(&out.join("diagnostics.json"), &diag)?;
    let mut pairs: Vec<(String, f64)> = vec![
        ("residual_linf".into(), sol.diagnostics.residual_linf),
        ("residual_mean".into(), sol.diagnostics.residual_mean),
        ("div_l2".into(), sol.diagnostics.div_l2),
        ("div_linf".into(), sol.diagnostics.div_linf),
        ("iterations".into(), sol.diagnostics.iterations as f64),
        ("forcing_l2".into(), norms::l2_norm(f)),
        ("u_l2".into(), norms::l2_norm(&sol.u)),
        ("pi_l2".into(), norms::l2_norm(&sol.pi)),
    ];
    for (k, v) in &sol.diagnostics.estimate_ratios {
        pairs.push((format!("ratio.{k}"), *v));
    }
    std::fs::write(
        out.join("diagnostics.csv"),
        report_io::diagnostics_csv(&pairs),
    )
    .map_err(|e| Error::Io {
        path: out.join("diagnostics.csv").display().to_string(),
        source: e,
    })?;
    Ok(())
}

fn run_solve(cfg: &RunConfig, grid: &Grid, out: &Path) -> pstokes::Result<i32> {
    let f = build_forcing(cfg, grid)?;
    let sp = StressParams::new(cfg.p, cfg.mu)?;
    let h = grid.spacing();
    let rg = RegParams::new(
        cfg.reg.epsilon,
        cfg.reg.eta.unwrap_or(2.0 * h),
        cfg.reg.rho.unwrap_or(grid.box_length() / 8.0),
        cfg.reg.delta,
        grid.box_length(),
    )?;
    let tol = cfg.tol * norms::max_norm(&f).max(1e-300);
    let u0 = VectorField::zeros(grid);
    let sol = solver::solve_regularized(&f, &sp, &rg, tol, cfg.max_iter, &u0)?;
    write_solution(cfg, &sol, &f, out)?;
    Ok(EXIT_OK)
}

fn run_cascade(
    cfg: &RunConfig,
    grid: &Grid,
    out: &Path,
    warnings: &mut Vec<String>,
    admissibility: &mut Option<cz::Admissibility>,
) -> pstokes::Result<i32> {
    let f = build_forcing(cfg, grid)?;
    let schedule = cfg
        .schedule
        .clone()
        .unwrap_or_else(|| CascadeSchedule::default_for(grid, cfg.mu));
    // admissibility of (p, n, q) against the grid operator norms; an
    // infeasible regime is a warning, not a failure
    if cfg.q > grid.dim() as f64 {
        let exponents = cz::required_exponents(cfg.p, grid.dim(), cfg.q);
        let table = CzTable::estimate(grid, &exponents, cfg.cz.method, cfg.cz.iters, cfg.seed)?;
        match cz::admissibility(cfg.p, grid.dim(), cfg.q, &table) {
            Ok(adm) => {
                if !adm.feasible {
                    warnings.push(format!(
                        "admissibility infeasible at (p={}, n={}, q={}): {}",
                        cfg.p,
                        grid.dim(),
                        cfg.q,
                        adm.reasons.join("; ")
                    ));
                }
                *admissibility = Some(adm);
            }
            Err(e) => warnings.push(format!("admissibility unavailable: {e}")),
        }
    } else {
        warnings.push(format!(
            "admissibility skipped: q = {} must exceed the dimension {}",
            cfg.q,
            grid.dim()
        ));
    }
    let sol = solver::cascade(&f, cfg.p, &schedule)?;
    write_solution(cfg, &sol, &f, out)?;
    Ok(EXIT_OK)
}

fn run_verify(cfg: &RunConfig, grid: &Grid, out: &Path) -> pstokes::Result<i32> {
    let names: Vec<&str> = if cfg.checks.is_empty() {
        suites::SUITE_NAMES.to_vec()
    } else {
        cfg.checks.iter().map(|s| s.as_str()).collect()
    };
    let mut reports: Vec<CheckReport> = Vec::new();
    for name in names {
        match name {
            // solution-level checks take their forcing and schedule from
            // the configuration
            "uniqueness" | "homogeneity" => {
                let f = match cfg.forcing {
                    Some(_) => build_forcing(cfg, grid)?,
                    None => gen::single_mode_forcing(grid, &default_mode(grid), 0.5),
                };
                let schedule = cfg
                    .schedule
                    .clone()
                    .unwrap_or_else(|| CascadeSchedule::default_for(grid, cfg.mu.max(1e-2)));
                if name == "uniqueness" {
                    reports.push(pstokes::verify::check_uniqueness(
                        &f,
                        cfg.p,
                        &schedule,
                        (cfg.seed.wrapping_add(1), cfg.seed.wrapping_add(2)),
                        1e-6,
                    )?);
                } else {
                    reports.push(pstokes::verify::check_homogeneity(
                        &f, cfg.p, &schedule, 2.0, 0.02, cfg.seed,
                    )?);
                }
            }
            _ => reports.extend(suites::run_named_suite(name, grid, cfg.seed)?),
        }
    }
    report_io::emit_reports(&reports, out)?;
    let failed: Vec<&CheckReport> = reports.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!("FAIL {}: lhs {} rhs {} margin {}", r.name, r.lhs, r.rhs, r.margin);
    }
    Ok(if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn run_cz(cfg: &RunConfig, grid: &Grid, out: &Path) -> pstokes::Result<i32> {
    let table = CzTable::estimate(
        grid,
        &cfg.cz.exponents,
        cfg.cz.method,
        cfg.cz.iters,
        cfg.seed,
    )?;
    report_io::write_json(&out.join("cztable.json"), &table)?;
    Ok(EXIT_OK)
}

#[derive(Serialize, Clone)]
struct SweepRow {
    p: f64,
    mu: f64,
    dir: String,
    residual_linf: f64,
    div_l2: f64,
    iterations: usize,
    estimate_ratios: BTreeMap<String, f64>,
}

fn run_sweep(cfg: &RunConfig, grid: &Grid, out: &Path, threads: usize) -> pstokes::Result<i32> {
    let sweep = cfg.sweep.as_ref().expect("validated");
    let f = build_forcing(cfg, grid)?;
    let mut jobs: Vec<(f64, f64, PathBuf)> = Vec::new();
    for &p in &sweep.p_values {
        for &mu in &sweep.mu_values {
            jobs.push((p, mu, out.join(format!("p{p:.4}_mu{mu:.3e}"))));
        }
    }
    let results: Vec<pstokes::Result<SweepRow>> = run_jobs(&jobs, threads, |(p, mu, dir)| {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        let mut member = cfg.clone();
        member.command = Command::Cascade;
        member.p = *p;
        member.mu = *mu;
        member.schedule = cfg
            .schedule
            .clone()
            .or_else(|| Some(CascadeSchedule::default_for(grid, *mu)));
        let schedule = member.schedule.clone().unwrap();
        let sol = solver::cascade(&f, *p, &schedule)?;
        write_solution(&member, &sol, &f, dir)?;
        Ok(SweepRow {
            p: *p,
            mu: *mu,
            dir: dir.file_name().unwrap().to_string_lossy().into_owned(),
            residual_linf: sol.diagnostics.residual_linf,
            div_l2: sol.diagnostics.div_l2,
            iterations: sol.diagnostics.iterations,
            estimate_ratios: sol.diagnostics.estimate_ratios.clone(),
        })
    });
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                eprintln!("sweep member failed: {e}");
                code = exit_code_for(&e);
            }
        }
    }
    report_io::write_json(&out.join("aggregate.json"), &rows)?;
    let mut csv = String::from("p,mu,dir,residual_linf,div_l2,iterations\n");
    for row in &rows {
        csv.push_str(&format!(
            "{:e},{:e},{},{:e},{:e},{}\n",
            row.p, row.mu, row.dir, row.residual_linf, row.div_l2, row.iterations
        ));
    }
    std::fs::write(out.join("aggregate.csv"), csv).map_err(|e| Error::Io {
        path: out.join("aggregate.csv").display().to_string(),
        source: e,
    })?;
    Ok(code)
}

fn default_mode(grid: &Grid) -> Vec<i64> {
    if grid.dim() == 3 {
        vec![1, 1, 0]
    } else {
        vec![1, 1]
    }
}

/// Run jobs with a bounded number of scoped worker threads, preserving input
/// order in the results.
fn run_jobs<J: Sync, R: Send>(
    jobs: &[J],
    threads: usize,
    work: impl Fn(&J) -> R + Sync,
) -> Vec<R> {
    let threads = threads.max(1).min(jobs.len().max(1));
    if threads == 1 {
        return jobs.iter().map(&work).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<R>> = (0..jobs.len()).map(|_| None).collect();
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let r = work(&jobs[i]);
                slots_ref.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_iter().map(|s| s.expect("job completed")).collect()
}
