//! The four benchmark initial states, noise synthesis and the end-to-end
//! reconstruction pipeline with its convergence and Monte Carlo drivers.

use std::fmt;
use std::time::Instant;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, ensure, Error, Result};
use crate::exec::{compensated_sum, Execution};
use crate::field::RealField;
use crate::grid::GridSpec;
use crate::mittag_leffler::build_psi_approx;
use crate::operators::{DiffusionModel, MollifierParams, Solver};
use crate::parameter_choice::{Discrepancy, MorozovConfig};

/// Noise generator identification echoed into every config file.
pub const RNG_ALGORITHM: &str =
    "ChaCha20Rng::seed_from_u64 (rand_chacha 0.9.0) + StandardNormal ziggurat (rand_distr 0.5.1)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExampleId {
    /// `exp(-x1² - x2²)`
    Gaussian = 1,
    /// `exp(-|x1| - |x2|)`
    Laplace = 2,
    /// `v(x1) v(x2)`, `v` the unit triangle on `[-3, 3]`
    Triangle = 3,
    /// indicator of `[-5, 5]²`
    Box = 4,
}

impl ExampleId {
    pub const ALL: [ExampleId; 4] = [Self::Gaussian, Self::Laplace, Self::Triangle, Self::Box];

    pub fn new(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Self::Gaussian),
            2 => Ok(Self::Laplace),
            3 => Ok(Self::Triangle),
            4 => Ok(Self::Box),
            _ => Err(domain(
                "ExampleId",
                format!("example id must be 1..4, got {id}"),
            )),
        }
    }

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn eval(self, x: [f64; 2]) -> f64 {
        let tri = |l: f64| (1.0 - l.abs() / 3.0).max(0.0);
        match self {
            Self::Gaussian => (-x[0] * x[0] - x[1] * x[1]).exp(),
            Self::Laplace => (-x[0].abs() - x[1].abs()).exp(),
            Self::Triangle => tri(x[0]) * tri(x[1]),
            Self::Box => f64::from(x[0].abs() <= 5.0 && x[1].abs() <= 5.0),
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

pub fn initial_condition(ex: ExampleId, grid: GridSpec) -> Result<RealField> {
    ensure(grid.n_dims() == 2, "initial_condition", || {
        "examples are 2-D".into()
    })?;
    RealField::from_fn(grid, |x| ex.eval(x))
}

/// I.i.d. standard normal samples in node order.
pub fn standard_normal_field(grid: GridSpec, seed: u64) -> RealField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    RealField::from_raw(grid, values)
}

/// `g + η ε` and `δ = η ‖ε‖`.
pub fn add_noise(g: &RealField, eta: f64, seed: u64) -> Result<(RealField, f64)> {
    ensure(eta.is_finite() && eta >= 0.0, "add_noise", || {
        format!("eta must be finite and >= 0, got {eta}")
    })?;
    if eta == 0.0 {
        return Ok((g.clone(), 0.0));
    }
    let eps = standard_normal_field(*g.grid(), seed);
    let delta = eta * crate::spectral::l2_norm(&eps);
    Ok((g.add(&eps.scaled(eta))?, delta))
}

/// `η` giving `100 δ / ‖g‖ = perc` for the noise drawn with `seed`.
pub fn eta_for_percentage(g: &RealField, perc: f64, seed: u64) -> Result<f64> {
    ensure(perc.is_finite() && perc >= 0.0, "add_noise", || {
        format!("perc_noise must be finite and >= 0, got {perc}")
    })?;
    if perc == 0.0 {
        return Ok(0.0);
    }
    let eps = standard_normal_field(*g.grid(), seed);
    Ok(perc / 100.0 * crate::spectral::l2_norm(g) / crate::spectral::l2_norm(&eps))
}

/// Everything that determines a reconstruction besides example, noise and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineSettings {
    pub grid: GridSpec,
    pub gamma: f64,
    pub final_time: f64,
    pub mollifier: MollifierParams,
    pub morozov: MorozovConfig,
    /// Relative perturbation `h` of the evaluator used for inversion;
    /// `None` inverts with the exact evaluator.
    pub h: Option<f64>,
    /// `α` used when the noise condition fails; `None` reports the failure.
    pub fallback_alpha: Option<f64>,
    /// Synthesize data on a grid with the same spacing and twice the extent.
    pub refined_synthesis: bool,
    pub exec: Execution,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(2, 10.0, 256).expect("valid default grid"),
            gamma: 0.8,
            final_time: 1.0,
            mollifier: MollifierParams::default(),
            morozov: MorozovConfig::default(),
            h: None,
            fallback_alpha: None,
            refined_synthesis: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSource {
    Morozov,
    Fallback,
}

impl fmt::Display for AlphaSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Morozov => "morozov",
            Self::Fallback => "fallback",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub example: ExampleId,
    pub perc_noise: f64,
    pub seed: u64,
    pub delta: f64,
    pub alpha: f64,
    pub alpha_source: AlphaSource,
    pub morozov_iters: usize,
    pub rel_err: f64,
    /// Wall-clock seconds; kept out of the CSV so reruns are byte-identical.
    pub elapsed: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub reconstruction: RealField,
    pub truth: RealField,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub perc_noise: f64,
    pub mean_delta: f64,
    pub mean_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatesReport {
    pub example: ExampleId,
    pub n_seeds: usize,
    pub levels: Vec<RatePoint>,
    /// `(ln δ, ln rel_err)` per level.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCSummary {
    pub example: ExampleId,
    pub perc_noise: f64,
    pub n_reps: usize,
    pub base_seed: u64,
    pub mean_rel_err: f64,
    pub var_rel_err: f64,
    pub mean_alpha: f64,
    pub runs: Vec<RunReport>,
}

/// Precomputed operators for repeated runs on one configuration.
pub struct Pipeline {
    settings: PipelineSettings,
    solver: Solver,
    synthesis: DiffusionModel,
    inversion: DiffusionModel,
    /// `ψ(|ξ|, 0) / ψ(|ξ|, T)` per distinct radius.
    ratios: Vec<f64>,
}

impl Pipeline {
    pub fn new(settings: PipelineSettings) -> Result<Self> {
        settings.morozov.validate()?;
        ensure(settings.grid.n_dims() == 2, "Pipeline", || {
            "examples are 2-D".into()
        })?;
        let synthesis = DiffusionModel::exact(settings.gamma, settings.final_time)?;
        let inversion = match settings.h {
            None => synthesis.clone(),
            Some(h) => DiffusionModel::perturbed(
                build_psi_approx(settings.gamma, h)?,
                settings.final_time,
            )?,
        };
        if let Some(a) = settings.fallback_alpha {
            ensure(a.is_finite() && a > 0.0, "Pipeline", || {
                format!("fallback alpha must be > 0, got {a}")
            })?;
        }
        let solver = Solver::new(settings.grid, settings.exec);
        let ratios = solver.backward_ratios(&inversion, 0.0)?;
        Ok(Self {
            settings,
            solver,
            synthesis,
            inversion,
            ratios,
        })
    }

    pub fn settings(&self) -> &PipelineSettings {
        &self.settings
    }

    pub fn solver(&self) -> &Solver {
        &self.solver
    }

    pub fn inversion_model(&self) -> &DiffusionModel {
        &self.inversion
    }

    /// `(u0, u(·, T))` on the pipeline grid.
    pub fn exact_data(&self, ex: ExampleId) -> Result<(RealField, RealField)> {
        let g = self.settings.grid;
        let u0 = initial_condition(ex, g)?;
        let t = self.settings.final_time;
        if !self.settings.refined_synthesis {
            let data = self.solver.forward_solve(&u0, &self.synthesis, t)?;
            return Ok((u0, data));
        }
        let n = g.points();
        let fine_grid = GridSpec::new(2, 2.0 * g.half_width(), 2 * n)?;
        let fine = Solver::new(fine_grid, self.settings.exec);
        let fine_data =
            fine.forward_solve(&initial_condition(ex, fine_grid)?, &self.synthesis, t)?;
        // same spacing: coarse node (i, j) is fine node (i + N/2, j + N/2)
        let off = n / 2;
        let values = (0..g.len())
            .map(|k| {
                let [i, j] = g.unflatten(k);
                fine_data.values()[(i + off) * 2 * n + j + off]
            })
            .collect();
        Ok((u0, RealField::new(g, values)?))
    }

    pub fn run(&self, ex: ExampleId, perc_noise: f64, seed: u64) -> Result<RunOutcome> {
        let (u0, g) = self.exact_data(ex)?;
        self.run_on(ex, &u0, &g, perc_noise, seed)
    }

    /// One noisy reconstruction from precomputed exact data.
    pub fn run_on(
        &self,
        ex: ExampleId,
        u0: &RealField,
        exact: &RealField,
        perc_noise: f64,
        seed: u64,
    ) -> Result<RunOutcome> {
        let start = Instant::now();
        let eta = eta_for_percentage(exact, perc_noise, seed)?;
        let (gdelta, delta) = add_noise(exact, eta, seed)?;
        let disc = Discrepancy::new(&self.solver, &gdelta)?;
        let mp = &self.settings.mollifier;
        let (alpha, alpha_source, morozov_iters) =
            match disc.geometric(delta, mp, &self.settings.morozov) {
                Ok(sel) => (sel.alpha, AlphaSource::Morozov, sel.iterations),
                Err(Error::NoiseCondition { .. }) if self.settings.fallback_alpha.is_some() => (
                    self.settings.fallback_alpha.unwrap_or_default(),
                    AlphaSource::Fallback,
                    0,
                ),
                Err(e) => return Err(e),
            };
        let reconstruction = self.reconstruct(&gdelta, alpha)?;
        let plan = self.solver.plan();
        let rel_err = plan.l2_norm(&reconstruction.sub(u0)?) / plan.l2_norm(u0);
        Ok(RunOutcome {
            report: RunReport {
                example: ex,
                perc_noise,
                seed,
                delta,
                alpha,
                alpha_source,
                morozov_iters,
                rel_err,
                elapsed: start.elapsed().as_secs_f64(),
            },
            reconstruction,
            truth: u0.clone(),
        })
    }

    /// `u_α^δ(·, 0)` with the cached ratios.
    pub fn reconstruct(&self, gdelta: &RealField, alpha: f64) -> Result<RealField> {
        let m =
            self.solver
                .backward_multiplier_from(&self.ratios, alpha, &self.settings.mollifier)?;
        self.solver.apply(gdelta, &m)
    }

    pub fn convergence_study(
        &self,
        ex: ExampleId,
        percs: &[f64],
        seeds: &[u64],
    ) -> Result<RatesReport> {
        let mut distinct = percs.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::DegenerateInput {
                op: "convergence_study",
                msg: format!(
                    "need at least 3 distinct noise levels, got {}",
                    distinct.len()
                ),
            });
        }
        if seeds.is_empty() {
            return Err(Error::DegenerateInput {
                op: "convergence_study",
                msg: "need at least one seed".into(),
            });
        }
        let (u0, exact) = self.exact_data(ex)?;
        let jobs: Vec<(f64, u64)> = percs
            .iter()
            .flat_map(|&p| seeds.iter().map(move |&s| (p, s)))
            .collect();
        let results = self.settings.exec.map_range(jobs.len(), |i| {
            self.run_on(ex, &u0, &exact, jobs[i].0, jobs[i].1)
                .map(|o| o.report)
                .map_err(|e| replication_error(jobs[i].1, e))
        });
        let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
        let mut levels = Vec::with_capacity(percs.len());
        for (li, &perc) in percs.iter().enumerate() {
            let reports = &runs[li * seeds.len()..(li + 1) * seeds.len()];
            let n = reports.len() as f64;
            levels.push(RatePoint {
                perc_noise: perc,
                mean_delta: compensated_sum(reports.iter().map(|r| r.delta)) / n,
                mean_rel_err: compensated_sum(reports.iter().map(|r| r.rel_err)) / n,
            });
        }
        let points: Vec<(f64, f64)> = levels
            .iter()
            .map(|l| (l.mean_delta.ln(), l.mean_rel_err.ln()))
            .collect();
        let fit = linear_fit(&points)?;
        Ok(RatesReport {
            example: ex,
            n_seeds: seeds.len(),
            levels,
            points,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
        })
    }

    pub fn monte_carlo(
        &self,
        ex: ExampleId,
        perc_noise: f64,
        n_reps: usize,
        base_seed: u64,
    ) -> Result<MCSummary> {
        if n_reps == 0 {
            return Err(Error::DegenerateInput {
                op: "monte_carlo",
                msg: "n_reps must be >= 1".into(),
            });
        }
        let (u0, exact) = self.exact_data(ex)?;
        let seed_of = |i: usize| base_seed.wrapping_add(i as u64);
        let results = self.settings.exec.map_range(n_reps, |i| {
            self.run_on(ex, &u0, &exact, perc_noise, seed_of(i))
                .map(|o| o.report)
                .map_err(|e| replication_error(seed_of(i), e))
        });
        let runs = results.into_iter().collect::<Result<Vec<_>>>()?;
        let n = n_reps as f64;
        let mean_rel_err = compensated_sum(runs.iter().map(|r| r.rel_err)) / n;
        let var_rel_err = if n_reps == 1 {
            0.0
        } else {
            compensated_sum(runs.iter().map(|r| (r.rel_err - mean_rel_err).powi(2))) / (n - 1.0)
        };
        let mean_alpha = compensated_sum(runs.iter().map(|r| r.alpha)) / n;
        Ok(MCSummary {
            example: ex,
            perc_noise,
            n_reps,
            base_seed,
            mean_rel_err,
            var_rel_err,
            mean_alpha,
            runs,
        })
    }
}

fn replication_error(seed: u64, e: Error) -> Error {
    Error::Replication {
        seed,
        source: Box::new(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope x + intercept`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput {
            op: "linear_fit",
            msg: "need at least two points".into(),
        });
    }
    let n = points.len() as f64;
    let mx = compensated_sum(points.iter().map(|p| p.0)) / n;
    let my = compensated_sum(points.iter().map(|p| p.1)) / n;
    let sxx = compensated_sum(points.iter().map(|p| (p.0 - mx).powi(2)));
    let sxy = compensated_sum(points.iter().map(|p| (p.0 - mx) * (p.1 - my)));
    let syy = compensated_sum(points.iter().map(|p| (p.1 - my).powi(2)));
    if sxx == 0.0 || !sxx.is_finite() {
        return Err(Error::DegenerateInput {
            op: "linear_fit",
            msg: "abscissae do not vary".into(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}

pub fn run_example(
    ex: ExampleId,
    perc_noise: f64,
    seed: u64,
    settings: &PipelineSettings,
) -> Result<RunReport> {
    Ok(Pipeline::new(settings.clone())?
        .run(ex, perc_noise, seed)?
        .report)
}

pub fn convergence_study(
    ex: ExampleId,
    percs: &[f64],
    seeds: &[u64],
    settings: &PipelineSettings,
) -> Result<RatesReport> {
    Pipeline::new(settings.clone())?.convergence_study(ex, percs, seeds)
}

pub fn monte_carlo(
    ex: ExampleId,
    perc_noise: f64,
    n_reps: usize,
    base_seed: u64,
    settings: &PipelineSettings,
) -> Result<MCSummary> {
    Pipeline::new(settings.clone())?.monte_carlo(ex, perc_noise, n_reps, base_seed)
}
