//! Regularization parameter selection.
//!
//! The discrepancy `v(α) = ‖(1 - e^{-τ(α|ξ|)^s}) ĝ^δ‖` depends on the data
//! only through the spectral power per distinct radius, so it is evaluated on
//! the radial table after a single forward transform.

use crate::error::{ensure, Error, Result};
use crate::exec::Execution;
use crate::field::RealField;
use crate::operators::{MollifierParams, Solver};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorozovConfig {
    pub theta: f64,
    pub q: f64,
    pub alpha0: f64,
    pub max_iters: usize,
}

impl MorozovConfig {
    pub fn new(theta: f64, q: f64, alpha0: f64, max_iters: usize) -> Result<Self> {
        let cfg = Self {
            theta,
            q,
            alpha0,
            max_iters,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let op = "MorozovConfig";
        ensure(self.theta.is_finite() && self.theta > 1.0, op, || {
            format!("theta must be > 1, got {}", self.theta)
        })?;
        ensure(self.q > 0.0 && self.q < 1.0, op, || {
            format!("q must lie in (0, 1), got {}", self.q)
        })?;
        ensure(self.alpha0.is_finite() && self.alpha0 > 0.0, op, || {
            format!("alpha0 must be > 0, got {}", self.alpha0)
        })?;
        ensure(self.max_iters >= 1, op, || "max_iters must be >= 1".into())
    }
}

impl Default for MorozovConfig {
    fn default() -> Self {
        Self {
            theta: 1.01,
            q: 0.99,
            alpha0: 10.0,
            max_iters: 5000,
        }
    }
}

/// Outcome of a discrepancy-principle search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub alpha: f64,
    pub discrepancy: f64,
    pub threshold: f64,
    /// Number of `α` updates performed.
    pub iterations: usize,
}

/// `(h + δ/E)^{1/(p+2)}`.
pub fn apriori_alpha(delta: f64, e: f64, p: f64, h: f64) -> Result<f64> {
    let op = "apriori_alpha";
    ensure(delta >= 0.0 && delta.is_finite(), op, || {
        format!("delta must be >= 0, got {delta}")
    })?;
    ensure(e > 0.0 && e.is_finite(), op, || {
        format!("E must be > 0, got {e}")
    })?;
    ensure(p > 0.0 && p.is_finite(), op, || {
        format!("p must be > 0, got {p}")
    })?;
    ensure(h >= 0.0 && h.is_finite(), op, || {
        format!("h must be >= 0, got {h}")
    })?;
    ensure(delta + h * e > 0.0, op, || "delta + h E must be > 0".into())?;
    Ok((h + delta / e).powf(1.0 / (p + 2.0)))
}

pub fn check_noise_condition(gdelta: &RealField, delta: f64, theta: f64) -> bool {
    let t = theta * delta;
    t > 0.0 && t < crate::spectral::l2_norm(gdelta)
}

/// The discrepancy functional of fixed data.
#[derive(Debug, Clone)]
pub struct Discrepancy {
    exec: Execution,
    radii: Vec<f64>,
    /// `Δξ^n Σ |ĝ|²` over the nodes of each radius.
    power: Vec<f64>,
    data_norm: f64,
}

impl Discrepancy {
    pub fn new(solver: &Solver, gdelta: &RealField) -> Result<Self> {
        let spec = solver.plan().forward(gdelta)?;
        let table = solver.radial();
        let mut power = vec![0.0; table.len()];
        for (c, &u) in spec.coeffs().iter().zip(table.index()) {
            power[u as usize] += c.norm_sqr();
        }
        let cell = solver.grid().freq_cell();
        power.iter_mut().for_each(|p| *p *= cell);
        Ok(Self {
            exec: solver.plan().execution(),
            radii: (0..table.len()).map(|u| table.radius(u)).collect(),
            power,
            data_norm: solver.plan().l2_norm(gdelta),
        })
    }

    /// `l2_norm(g^δ)`.
    pub fn data_norm(&self) -> f64 {
        self.data_norm
    }

    pub fn eval(&self, alpha: f64, mp: &MollifierParams) -> f64 {
        let (r, p) = (&self.radii, &self.power);
        self.exec
            .sum_range(r.len(), |u| mp.complement(alpha, r[u]).powi(2) * p[u])
            .sqrt()
    }

    /// `lim_{α→∞} v(α)`: the data norm without the `ξ = 0` node.
    pub fn saturation(&self) -> f64 {
        let p = &self.power;
        self.exec
            .sum_range(p.len(), |u| if self.radii[u] > 0.0 { p[u] } else { 0.0 })
            .sqrt()
    }

    fn noise_condition(&self, delta: f64, theta: f64) -> Result<f64> {
        let threshold = theta * delta;
        if threshold > 0.0 && threshold < self.data_norm {
            Ok(threshold)
        } else {
            Err(Error::NoiseCondition {
                threshold,
                data_norm: self.data_norm,
            })
        }
    }

    /// First `α = α0 q^k` with `v(α) ≤ θδ`.
    pub fn geometric(
        &self,
        delta: f64,
        mp: &MollifierParams,
        cfg: &MorozovConfig,
    ) -> Result<Selection> {
        cfg.validate()?;
        let threshold = self.noise_condition(delta, cfg.theta)?;
        let mut alpha = cfg.alpha0;
        let mut v = self.eval(alpha, mp);
        let mut k = 0;
        while v > threshold {
            if k == cfg.max_iters {
                return Err(Error::IterationLimit {
                    max_iters: cfg.max_iters,
                    alpha,
                    discrepancy: v,
                    threshold,
                });
            }
            alpha *= cfg.q;
            v = self.eval(alpha, mp);
            k += 1;
        }
        Ok(Selection {
            alpha,
            discrepancy: v,
            threshold,
            iterations: k,
        })
    }

    /// `α` with `|v(α) - θδ| ≤ rel_tol θδ`, by bisection in `ln α`.
    pub fn bisect(
        &self,
        delta: f64,
        mp: &MollifierParams,
        theta: f64,
        rel_tol: f64,
    ) -> Result<Selection> {
        ensure(theta > 1.0, "morozov_bisect", || {
            format!("theta must be > 1, got {theta}")
        })?;
        ensure(rel_tol > 0.0 && rel_tol < 1.0, "morozov_bisect", || {
            format!("rel_tol must lie in (0, 1), got {rel_tol}")
        })?;
        let threshold = self.noise_condition(delta, theta)?;
        let sat = self.saturation();
        if threshold >= sat {
            return Err(Error::Bracket(format!(
                "discrepancy saturates at {sat:e} <= theta*delta = {threshold:e}"
            )));
        }
        let done = |v: f64| (v - threshold).abs() <= rel_tol * threshold;
        let mut iterations = 0;
        let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
        let mut v_hi = self.eval(hi, mp);
        while v_hi <= threshold {
            if done(v_hi) {
                return Ok(Selection {
                    alpha: hi,
                    discrepancy: v_hi,
                    threshold,
                    iterations,
                });
            }
            lo = hi;
            hi *= 2.0;
            v_hi = self.eval(hi, mp);
            iterations += 1;
            if !hi.is_finite() {
                return Err(Error::Bracket("upper bracket overflowed".into()));
            }
        }
        if lo == hi {
            let mut v_lo = v_hi;
            while v_lo > threshold {
                if done(v_lo) {
                    return Ok(Selection {
                        alpha: lo,
                        discrepancy: v_lo,
                        threshold,
                        iterations,
                    });
                }
                hi = lo;
                lo *= 0.5;
                v_lo = self.eval(lo, mp);
                iterations += 1;
                if lo == 0.0 {
                    return Err(Error::Bracket("lower bracket underflowed".into()));
                }
            }
        }
        loop {
            let mid = (lo * hi).sqrt();
            let v = self.eval(mid, mp);
            iterations += 1;
            if done(v) {
                return Ok(Selection {
                    alpha: mid,
                    discrepancy: v,
                    threshold,
                    iterations,
                });
            }
            if mid <= lo || mid >= hi {
                return Err(Error::Bracket(format!(
                    "bracket [{lo:e}, {hi:e}] collapsed with v = {v:e}, target {threshold:e}"
                )));
            }
            if v > threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
}

pub fn discrepancy(gdelta: &RealField, alpha: f64, mp: &MollifierParams) -> Result<f64> {
    ensure(alpha >= 0.0 && alpha.is_finite(), "discrepancy", || {
        format!("alpha must be finite and >= 0, got {alpha}")
    })?;
    let solver = Solver::new(*gdelta.grid(), Execution::default());
    Ok(Discrepancy::new(&solver, gdelta)?.eval(alpha, mp))
}

pub fn morozov_geometric(
    gdelta: &RealField,
    delta: f64,
    mp: &MollifierParams,
    cfg: &MorozovConfig,
) -> Result<f64> {
    let solver = Solver::new(*gdelta.grid(), Execution::default());
    Ok(Discrepancy::new(&solver, gdelta)?
        .geometric(delta, mp, cfg)?
        .alpha)
}

pub fn morozov_bisect(
    gdelta: &RealField,
    delta: f64,
    mp: &MollifierParams,
    theta: f64,
    rel_tol: f64,
) -> Result<f64> {
    let solver = Solver::new(*gdelta.grid(), Execution::default());
    Ok(Discrepancy::new(&solver, gdelta)?
        .bisect(delta, mp, theta, rel_tol)?
        .alpha)
}

#[cfg(test)]
mod tests;
