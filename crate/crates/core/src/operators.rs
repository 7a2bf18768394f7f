//! Forward evolution, mollification and the regularized backward solvers.
//!
//! Every operator here is a Fourier multiplier. Radial multipliers are
//! evaluated once per distinct `|ξ|` of the grid and then expanded.

use crate::error::{domain, ensure, Result};
use crate::exec::Execution;
use crate::field::{RealField, SpectralField};
use crate::grid::{GridSpec, RadialTable};
use crate::mittag_leffler::{MittagLeffler, PsiApprox};
use crate::spectral::FourierPlan;

#[derive(Debug, Clone)]
pub enum Evaluator {
    Exact(MittagLeffler),
    Perturbed(PsiApprox),
}

#[derive(Debug, Clone)]
pub struct DiffusionModel {
    final_time: f64,
    evaluator: Evaluator,
}

impl DiffusionModel {
    pub fn exact(gamma: f64, final_time: f64) -> Result<Self> {
        Self::new(Evaluator::Exact(MittagLeffler::new(gamma)?), final_time)
    }

    pub fn perturbed(psi: PsiApprox, final_time: f64) -> Result<Self> {
        Self::new(Evaluator::Perturbed(psi), final_time)
    }

    pub fn new(evaluator: Evaluator, final_time: f64) -> Result<Self> {
        let gamma = match &evaluator {
            Evaluator::Exact(ml) => ml.gamma(),
            Evaluator::Perturbed(p) => p.gamma(),
        };
        ensure(gamma > 0.0 && gamma < 1.0, "DiffusionModel", || {
            format!("gamma must lie in (0, 1), got {gamma}")
        })?;
        ensure(
            final_time.is_finite() && final_time > 0.0,
            "DiffusionModel",
            || format!("T must be finite and > 0, got {final_time}"),
        )?;
        Ok(Self {
            final_time,
            evaluator,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.ml().gamma()
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// The exact Mittag-Leffler evaluator underlying either backend.
    pub fn ml(&self) -> &MittagLeffler {
        match &self.evaluator {
            Evaluator::Exact(ml) => ml,
            Evaluator::Perturbed(p) => p.exact(),
        }
    }

    fn perturbation(&self, xi: f64) -> f64 {
        match &self.evaluator {
            Evaluator::Exact(_) => 1.0,
            Evaluator::Perturbed(p) => p.perturbation(xi),
        }
    }

    /// `ψ(|ξ|, t)` with `ψ(·, 0) = 1`.
    pub fn propagator(&self, xi: f64, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        let y = xi * xi * t.powf(self.gamma());
        self.ml().eval_neg(y) * self.perturbation(xi)
    }

    /// `ψ(|ξ|, t) / ψ(|ξ|, T)`, evaluated without forming tiny intermediates.
    pub fn backward_ratio(&self, xi: f64, t: f64) -> f64 {
        let p = self.perturbation(xi);
        if t == 0.0 {
            let y = xi * xi * self.final_time.powf(self.gamma());
            return 1.0 / (self.ml().eval_neg(y) * p);
        }
        self.ml().ratio_unchecked(xi * xi, t, self.final_time) * p / p
    }

    fn check_time(&self, op: &'static str, t: f64) -> Result<()> {
        ensure(
            t.is_finite() && (0.0..=self.final_time).contains(&t),
            op,
            || format!("t must lie in [0, {}], got {t}", self.final_time),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierParams {
    tau: f64,
    s: f64,
}

impl MollifierParams {
    pub fn new(tau: f64, s: f64) -> Result<Self> {
        ensure(tau.is_finite() && tau > 0.0, "MollifierParams", || {
            format!("tau must be finite and > 0, got {tau}")
        })?;
        ensure(s.is_finite() && s > 0.0, "MollifierParams", || {
            format!("s must be finite and > 0, got {s}")
        })?;
        Ok(Self { tau, s })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `exp(-τ (α|ξ|)^s)`.
    pub fn kernel(&self, alpha: f64, xi: f64) -> f64 {
        (-self.tau * (alpha * xi).powf(self.s)).exp()
    }

    /// `1 - exp(-τ (α|ξ|)^s)` without cancellation.
    pub fn complement(&self, alpha: f64, xi: f64) -> f64 {
        -(-self.tau * (alpha * xi).powf(self.s)).exp_m1()
    }
}

impl Default for MollifierParams {
    fn default() -> Self {
        Self { tau: 0.5, s: 4.0 }
    }
}

/// Multiplier machinery for one grid: a Fourier plan plus its radial table.
#[derive(Debug, Clone)]
pub struct Solver {
    plan: FourierPlan,
    radial: RadialTable,
}

impl Solver {
    pub fn new(grid: GridSpec, exec: Execution) -> Self {
        Self {
            plan: FourierPlan::new(grid, exec),
            radial: grid.radial(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.plan.grid()
    }

    pub fn plan(&self) -> &FourierPlan {
        &self.plan
    }

    pub fn radial(&self) -> &RadialTable {
        &self.radial
    }

    /// `f(|ξ|)` at every distinct radius.
    pub fn per_radius<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        let r = &self.radial;
        self.plan.execution().map_range(r.len(), |u| f(r.radius(u)))
    }

    /// `f(|ξ|)` at every frequency node.
    pub fn radial_multiplier<F: Fn(f64) -> f64 + Sync + Send>(&self, f: F) -> Vec<f64> {
        self.radial.expand(&self.per_radius(f))
    }

    /// `multiplier · f̂`.
    pub fn filtered_spectrum(&self, f: &RealField, multiplier: &[f64]) -> Result<SpectralField> {
        let mut spec = self.plan.forward(f)?;
        self.plan.scale_coeffs(&mut spec, multiplier);
        Ok(spec)
    }

    pub fn apply(&self, f: &RealField, multiplier: &[f64]) -> Result<RealField> {
        self.plan.inverse(&self.filtered_spectrum(f, multiplier)?)
    }

    pub fn forward_multiplier(&self, model: &DiffusionModel, t: f64) -> Result<Vec<f64>> {
        model.check_time("forward_solve", t)?;
        Ok(self.radial_multiplier(|xi| model.propagator(xi, t)))
    }

    pub fn forward_solve(
        &self,
        u0: &RealField,
        model: &DiffusionModel,
        t: f64,
    ) -> Result<RealField> {
        let m = self.forward_multiplier(model, t)?;
        self.apply(u0, &m)
    }

    pub fn mollifier_multiplier(&self, alpha: f64, mp: &MollifierParams) -> Result<Vec<f64>> {
        check_alpha("mollify", alpha, true)?;
        Ok(self.radial_multiplier(|xi| mp.kernel(alpha, xi)))
    }

    pub fn mollify(&self, f: &RealField, alpha: f64, mp: &MollifierParams) -> Result<RealField> {
        let m = self.mollifier_multiplier(alpha, mp)?;
        self.apply(f, &m)
    }

    /// Per-radius `ψ(|ξ|, t) / ψ(|ξ|, T)`; reusable across `α`.
    pub fn backward_ratios(&self, model: &DiffusionModel, t: f64) -> Result<Vec<f64>> {
        model.check_time("regularized_backward", t)?;
        Ok(self.per_radius(|xi| model.backward_ratio(xi, t)))
    }

    /// Combines cached per-radius ratios with the mollifier kernel.
    pub fn backward_multiplier_from(
        &self,
        ratios: &[f64],
        alpha: f64,
        mp: &MollifierParams,
    ) -> Result<Vec<f64>> {
        check_alpha("regularized_backward", alpha, false)?;
        let r = &self.radial;
        let per = self
            .plan
            .execution()
            .map_range(r.len(), |u| mp.kernel(alpha, r.radius(u)) * ratios[u]);
        Ok(r.expand(&per))
    }

    pub fn regularized_backward(
        &self,
        gdelta: &RealField,
        alpha: f64,
        model: &DiffusionModel,
        mp: &MollifierParams,
        t: f64,
    ) -> Result<RealField> {
        check_alpha("regularized_backward", alpha, false)?;
        let ratios = self.backward_ratios(model, t)?;
        let m = self.backward_multiplier_from(&ratios, alpha, mp)?;
        self.apply(gdelta, &m)
    }

    /// Box indicator `{max_j |ξ_j| ≤ xi_max}` times the backward ratio.
    pub fn cutoff_multiplier(
        &self,
        xi_max: f64,
        model: &DiffusionModel,
        t: f64,
    ) -> Result<Vec<f64>> {
        ensure(
            xi_max >= 0.0 && !xi_max.is_nan(),
            "spectral_cutoff_backward",
            || format!("xi_max must be >= 0, got {xi_max}"),
        )?;
        model.check_time("spectral_cutoff_backward", t)?;
        let ratios = self
            .radial
            .expand(&self.per_radius(|xi| model.backward_ratio(xi, t)));
        let g = *self.grid();
        Ok(ratios
            .into_iter()
            .enumerate()
            .map(|(k, r)| if g.xi_max_axis(k) <= xi_max { r } else { 0.0 })
            .collect())
    }

    pub fn spectral_cutoff_backward(
        &self,
        gdelta: &RealField,
        xi_max: f64,
        model: &DiffusionModel,
        t: f64,
    ) -> Result<RealField> {
        let m = self.cutoff_multiplier(xi_max, model, t)?;
        self.apply(gdelta, &m)
    }

    /// `w` with `ŵ = E(-|ξ|² T^γ)^{-p/2} û0`.
    pub fn source_representer(
        &self,
        u0: &RealField,
        model: &DiffusionModel,
        p: f64,
    ) -> Result<RealField> {
        ensure(p.is_finite() && p >= 0.0, "source_representer", || {
            format!("p must be finite and >= 0, got {p}")
        })?;
        if let Evaluator::Perturbed(_) = model.evaluator() {
            return Err(domain("source_representer", "requires the exact evaluator"));
        }
        let tg = model.final_time().powf(model.gamma());
        let m = self.radial_multiplier(|xi| model.ml().eval_neg(xi * xi * tg).powf(-0.5 * p));
        self.apply(u0, &m)
    }
}

fn check_alpha(op: &'static str, alpha: f64, allow_zero: bool) -> Result<()> {
    let ok = alpha.is_finite() && (alpha > 0.0 || (allow_zero && alpha == 0.0));
    ensure(ok, op, || {
        let bound = if allow_zero { ">= 0" } else { "> 0" };
        format!("alpha must be finite and {bound}, got {alpha}")
    })
}

pub fn forward_solve(u0: &RealField, model: &DiffusionModel, t: f64) -> Result<RealField> {
    Solver::new(*u0.grid(), Execution::default()).forward_solve(u0, model, t)
}

pub fn mollify(f: &RealField, alpha: f64, mp: &MollifierParams) -> Result<RealField> {
    Solver::new(*f.grid(), Execution::default()).mollify(f, alpha, mp)
}

pub fn regularized_backward(
    gdelta: &RealField,
    alpha: f64,
    model: &DiffusionModel,
    mp: &MollifierParams,
    t: f64,
) -> Result<RealField> {
    Solver::new(*gdelta.grid(), Execution::default())
        .regularized_backward(gdelta, alpha, model, mp, t)
}

pub fn spectral_cutoff_backward(
    gdelta: &RealField,
    xi_max: f64,
    model: &DiffusionModel,
    t: f64,
) -> Result<RealField> {
    Solver::new(*gdelta.grid(), Execution::default())
        .spectral_cutoff_backward(gdelta, xi_max, model, t)
}

pub fn source_representer(u0: &RealField, model: &DiffusionModel, p: f64) -> Result<RealField> {
    Solver::new(*u0.grid(), Execution::default()).source_representer(u0, model, p)
}
