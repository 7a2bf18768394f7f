use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use subdiff_core::diagnostics;
use subdiff_core::experiments::{ExampleId, Pipeline, RunReport};
use subdiff_core::field::fmt_f64;
use subdiff_core::mittag_leffler::build_psi_approx;
use subdiff_core::operators::{DiffusionModel, Solver};
use subdiff_core::parameter_choice::Discrepancy;
use subdiff_core::report;
use subdiff_core::RealField;

use crate::config::PipelineConfig;
use crate::error::CliError;

/// Writes `contents` to `dir/name`, creating `dir` when needed.
fn emit(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn emit_field(dir: &Path, name: &str, f: &RealField) -> Result<PathBuf, CliError> {
    let mut buf = Vec::new();
    f.write_csv(&mut buf)?;
    emit(dir, name, &String::from_utf8_lossy(&buf))
}

fn read_field(path: &Path) -> Result<RealField, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(RealField::read_csv(BufReader::new(file))?)
}

/// `(x, value)` along the middle row of a 2-D field, or the whole 1-D field.
fn profile(f: &RealField) -> Vec<(f64, f64)> {
    let g = f.grid();
    let n = g.points();
    if g.n_dims() == 1 {
        return (0..n).map(|k| (g.node(k)[0], f.values()[k])).collect();
    }
    let row = n / 2 * n;
    (0..n)
        .map(|j| (g.node(row + j)[1], f.values()[row + j]))
        .collect()
}

fn inversion_model(cfg: &PipelineConfig) -> Result<DiffusionModel, CliError> {
    Ok(match cfg.h {
        None => DiffusionModel::exact(cfg.gamma, cfg.final_time)?,
        Some(h) => DiffusionModel::perturbed(build_psi_approx(cfg.gamma, h)?, cfg.final_time)?,
    })
}

pub fn forward(
    cfg: &PipelineConfig,
    command: &str,
    input: &Path,
    time: f64,
) -> Result<(), CliError> {
    let u0 = read_field(input)?;
    let model = DiffusionModel::exact(cfg.gamma, cfg.final_time)?;
    let solver = Solver::new(*u0.grid(), cfg.execution);
    let u = solver.forward_solve(&u0, &model, time)?;
    let dir = &cfg.output_dir;
    let path = emit_field(dir, "forward.csv", &u)?;
    emit(dir, "forward.dat", &report::plot_data(&profile(&u)))?;
    emit(dir, "forward.config", &cfg.echo(command))?;
    println!(
        "forward: u(., {}) written to {}",
        fmt_f64(time),
        path.display()
    );
    Ok(())
}

pub struct BackwardArgs<'a> {
    pub input: &'a Path,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub time: f64,
    pub cutoff: Option<f64>,
}

pub fn backward(
    cfg: &PipelineConfig,
    command: &str,
    args: BackwardArgs<'_>,
) -> Result<(), CliError> {
    let settings = cfg.settings()?;
    let data = read_field(args.input)?;
    let model = inversion_model(cfg)?;
    let solver = Solver::new(*data.grid(), cfg.execution);
    let mut summary = String::from("schema,method,parameter,parameter_source,delta\n");
    let delta = args.delta.map_or_else(|| "none".into(), fmt_f64);
    let out = if let Some(xi_max) = args.cutoff {
        summary.push_str(&format!("1,cutoff,{},given,{delta}\n", fmt_f64(xi_max)));
        solver.spectral_cutoff_backward(&data, xi_max, &model, args.time)?
    } else {
        let (alpha, source) = match (args.alpha, args.delta) {
            (Some(a), _) => (a, "given"),
            (None, Some(d)) => {
                let disc = Discrepancy::new(&solver, &data)?;
                (
                    disc.geometric(d, &settings.mollifier, &settings.morozov)?
                        .alpha,
                    "morozov",
                )
            }
            (None, None) => {
                return Err(CliError::Usage(
                    "backward needs --alpha, --delta or --cutoff".into(),
                ))
            }
        };
        summary.push_str(&format!(
            "1,mollifier,{},{source},{delta}\n",
            fmt_f64(alpha)
        ));
        solver.regularized_backward(&data, alpha, &model, &settings.mollifier, args.time)?
    };
    let dir = &cfg.output_dir;
    let path = emit_field(dir, "backward.csv", &out)?;
    emit(dir, "backward_parameter.csv", &summary)?;
    emit(dir, "backward.dat", &report::plot_data(&profile(&out)))?;
    emit(dir, "backward.config", &cfg.echo(command))?;
    println!("backward: reconstruction written to {}", path.display());
    Ok(())
}

pub fn example(
    cfg: &PipelineConfig,
    command: &str,
    id: u32,
    perc_noise: f64,
) -> Result<(), CliError> {
    let ex = ExampleId::new(id)?;
    let pipeline = Pipeline::new(cfg.settings()?)?;
    let out = pipeline.run(ex, perc_noise, cfg.seed)?;
    let runs = std::slice::from_ref(&out.report);
    let dir = &cfg.output_dir;
    let path = emit(dir, "example.csv", &report::runs_csv(runs))?;
    emit(dir, "example_timing.log", &report::timing_csv(runs))?;
    emit_field(dir, "example_reconstruction.csv", &out.reconstruction)?;
    emit(
        dir,
        "example_profile.dat",
        &report::plot_data(&profile(&out.reconstruction)),
    )?;
    emit(
        dir,
        "example_truth_profile.dat",
        &report::plot_data(&profile(&out.truth)),
    )?;
    emit(dir, "example.config", &cfg.echo(command))?;
    let r = &out.report;
    println!(
        "example {ex}: {}% noise, alpha = {} ({}), rel_err = {} -> {}",
        fmt_f64(perc_noise),
        fmt_f64(r.alpha),
        r.alpha_source,
        fmt_f64(r.rel_err),
        path.display()
    );
    Ok(())
}

pub fn rates(
    cfg: &PipelineConfig,
    command: &str,
    id: u32,
    levels: &[f64],
    n_seeds: usize,
) -> Result<(), CliError> {
    let ex = ExampleId::new(id)?;
    let seeds: Vec<u64> = (0..n_seeds as u64)
        .map(|i| cfg.seed.wrapping_add(i))
        .collect();
    let pipeline = Pipeline::new(cfg.settings()?)?;
    let r = pipeline.convergence_study(ex, levels, &seeds)?;
    let dir = &cfg.output_dir;
    let path = emit(dir, "rates.csv", &report::rates_csv(&r))?;
    emit(dir, "rates.dat", &report::plot_data(&r.points))?;
    emit(dir, "rates.config", &cfg.echo(command))?;
    println!(
        "rates {ex}: slope = {}, r^2 = {} -> {}",
        fmt_f64(r.slope),
        fmt_f64(r.r_squared),
        path.display()
    );
    Ok(())
}

pub fn montecarlo(
    cfg: &PipelineConfig,
    command: &str,
    id: u32,
    levels: &[f64],
    reps: usize,
) -> Result<(), CliError> {
    let ex = ExampleId::new(id)?;
    let pipeline = Pipeline::new(cfg.settings()?)?;
    let mut summaries = Vec::with_capacity(levels.len());
    for &perc in levels {
        summaries.push(pipeline.monte_carlo(ex, perc, reps, cfg.seed)?);
    }
    let runs: Vec<RunReport> = summaries
        .iter()
        .flat_map(|m| m.runs.iter().cloned())
        .collect();
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .map(|m| (m.perc_noise, m.mean_rel_err))
        .collect();
    let dir = &cfg.output_dir;
    let path = emit(dir, "montecarlo.csv", &report::mc_csv(&summaries))?;
    emit(dir, "montecarlo_runs.csv", &report::runs_csv(&runs))?;
    emit(dir, "montecarlo_timing.log", &report::timing_csv(&runs))?;
    emit(dir, "montecarlo.dat", &report::plot_data(&points))?;
    emit(dir, "montecarlo.config", &cfg.echo(command))?;
    for m in &summaries {
        println!(
            "montecarlo {ex}: {}% noise, {} reps, mean rel_err = {}, var = {}",
            fmt_f64(m.perc_noise),
            m.n_reps,
            fmt_f64(m.mean_rel_err),
            fmt_f64(m.var_rel_err)
        );
    }
    println!("-> {}", path.display());
    Ok(())
}

pub fn verify() -> Result<(), CliError> {
    let checks = diagnostics::run_all()?;
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed > 0 {
        return Err(CliError::Verify {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
