//! The Mittag-Leffler function `E_{γ,1}` on the closed negative real axis.
//!
//! `E_{γ,1}(-y)` for `y ≥ 0` is evaluated in one of three regimes:
//!
//! * `y ≤ series_max`: the power series `Σ (-y)^k / Γ(γk+1)` in f64. The
//!   threshold is the largest `y` whose cancellation factor
//!   `E_{γ,1}(y) / E_{γ,1}(-y)` stays below 50.
//! * `y ≥ asymptotic_min`: the expansion `Σ_{j≥1} (-1)^{j+1} y^{-j} / Γ(1-γj)`,
//!   truncated at its smallest term. The threshold is the smallest `y` at
//!   which that term falls below `rel_tol / 100` of the leading term.
//! * in between: the integral
//!   `E_{γ,1}(-y) = sin(γπ)/(γπ) ∫_0^∞ exp(-w^{1/γ}) y / (w² + 2wy cos γπ + y²) dw`
//!   by adaptive Gauss-Legendre quadrature.
//!
//! `γ = 1` is accepted and evaluated as `exp(x)`.

mod fbd;
pub(crate) mod quadrature;
#[cfg(feature = "reference")]
mod reference;

pub use fbd::sup_fbd;
#[cfg(feature = "reference")]
pub use reference::{erfc_scaled_reference, ml_reference, REFERENCE_SERIES_LIMIT};

use std::f64::consts::PI;

use statrs::function::gamma::{gamma as gamma_fn, ln_gamma};

use crate::error::{domain, ensure, Result};

pub const DEFAULT_REL_TOL: f64 = 1e-12;

/// Largest tolerated `E(y)/E(-y)` in the series regime.
const CANCELLATION_LIMIT: f64 = 50.0;
const MAX_SERIES_TERMS: usize = 20_000;
const MAX_ASYMPTOTIC_TERMS: usize = 100_000;
const ASYMPTOTIC_SEARCH_MAX: f64 = 1e4;
/// Upper quadrature limit satisfies `w^{1/γ} = 60`.
const QUADRATURE_EXP_CUTOFF: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    gamma: f64,
    rel_tol: f64,
}

impl MLParams {
    pub fn new(gamma: f64, rel_tol: f64) -> Result<Self> {
        ensure(gamma > 0.0 && gamma <= 1.0, "MLParams", || {
            format!("gamma must lie in (0, 1], got {gamma}")
        })?;
        ensure(rel_tol > 0.0 && rel_tol < 1e-6, "MLParams", || {
            format!("rel_tol must lie in (0, 1e-6), got {rel_tol}")
        })?;
        Ok(Self { gamma, rel_tol })
    }

    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, DEFAULT_REL_TOL)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Exponential,
    Series,
    Quadrature,
    Asymptotic,
}

#[derive(Debug, Clone)]
pub struct MittagLeffler {
    params: MLParams,
    /// `1/Γ(γk+1)`, long enough for every `y ≤ series_max`.
    series_coeffs: Vec<f64>,
    /// `(-1)^{j+1}/Γ(1-γj)` for `j = 1..`.
    asym_coeffs: Vec<f64>,
    series_max: f64,
    asymptotic_min: f64,
    cos_gp: f64,
    sin_gp: f64,
}

impl MittagLeffler {
    pub fn new(gamma: f64) -> Result<Self> {
        Self::with_params(MLParams::with_gamma(gamma)?)
    }

    pub fn with_params(params: MLParams) -> Result<Self> {
        let g = params.gamma;
        let (cos_gp, sin_gp) = ((g * PI).cos(), (g * PI).sin());
        if g == 1.0 {
            return Ok(Self {
                params,
                series_coeffs: Vec::new(),
                asym_coeffs: Vec::new(),
                series_max: f64::INFINITY,
                asymptotic_min: f64::INFINITY,
                cos_gp,
                sin_gp,
            });
        }
        let tol = params.rel_tol.max(1e-15);

        // series regime
        let cap = 2.0_f64.min(4.0_f64.powf(g));
        let all_coeffs = series_coefficients(g, cap, MAX_SERIES_TERMS);
        let ratio = |y: f64| {
            let pos = series_sum(&all_coeffs, y);
            let neg = series_sum(&all_coeffs, -y);
            pos / neg
        };
        let series_max = if ratio(cap) <= CANCELLATION_LIMIT {
            cap
        } else {
            let (mut lo, mut hi) = (0.0, cap);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if ratio(mid) <= CANCELLATION_LIMIT {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let series_coeffs = series_coefficients(g, series_max, MAX_SERIES_TERMS);

        // asymptotic regime
        let j_cap = ((400.0 / g).ceil() as usize).clamp(8, MAX_ASYMPTOTIC_TERMS);
        let ln_gammas: Vec<f64> = (1..=j_cap).map(|j| ln_gamma(g * j as f64)).collect();
        let ln_scale = -PI.ln() - 2.0 * sin_gp.ln();
        let ln_lead_gamma = ln_gamma(1.0 - g);
        // (min_j ln B_j(y), argmin j); B_j bounds the remainder after j-1 terms
        let smallest_term = |y: f64| {
            let ly = y.ln();
            ln_gammas
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, lg)| (lg - (i + 1) as f64 * ly + ln_scale, i + 1))
                .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
        };
        let accurate = |y: f64| {
            let target = (0.01 * tol).ln() - y.ln() - ln_lead_gamma;
            smallest_term(y).0 <= target
        };
        let (asymptotic_min, n_terms) = if accurate(series_max) {
            (series_max, smallest_term(series_max).1)
        } else if !accurate(ASYMPTOTIC_SEARCH_MAX) {
            (f64::INFINITY, 0)
        } else {
            let (mut lo, mut hi) = (series_max, ASYMPTOTIC_SEARCH_MAX);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if accurate(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            (hi, smallest_term(hi).1)
        };
        let asym_coeffs = (1..=n_terms)
            .map(|j| {
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                sign * reciprocal_gamma_one_minus(g, j as f64)
            })
            .collect();

        Ok(Self {
            params,
            series_coeffs,
            asym_coeffs,
            series_max,
            asymptotic_min,
            cos_gp,
            sin_gp,
        })
    }

    pub fn params(&self) -> MLParams {
        self.params
    }

    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    /// `(series_max, asymptotic_min)` in terms of `y = -x`.
    pub fn thresholds(&self) -> (f64, f64) {
        (self.series_max, self.asymptotic_min)
    }

    /// `E_{γ,1}(x)` for finite `x ≤ 0`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        ensure(x.is_finite() && x <= 0.0, "ml_e_gamma_1", || {
            format!("argument must be finite and <= 0, got {x}")
        })?;
        Ok(self.eval_neg(-x))
    }

    /// `E_{γ,1}(-y)` for `y ≥ 0`; the argument is not checked.
    pub fn eval_neg(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 1.0;
        }
        match self.regime_neg(y) {
            Regime::Exponential => (-y).exp(),
            Regime::Series => self.series_value(y),
            Regime::Quadrature => self.quadrature_value(y),
            Regime::Asymptotic => self.asymptotic_value(y),
        }
    }

    pub fn regime(&self, x: f64) -> Regime {
        self.regime_neg(-x)
    }

    fn regime_neg(&self, y: f64) -> Regime {
        if self.params.gamma == 1.0 {
            Regime::Exponential
        } else if y <= self.series_max {
            Regime::Series
        } else if y >= self.asymptotic_min {
            Regime::Asymptotic
        } else {
            Regime::Quadrature
        }
    }

    /// Truncated power series at `-y`, regardless of regime.
    pub fn series_value(&self, y: f64) -> f64 {
        if self.series_coeffs.is_empty() {
            let coeffs = series_coefficients(self.params.gamma, y.max(1.0), MAX_SERIES_TERMS);
            return series_sum(&coeffs, -y);
        }
        series_sum(&self.series_coeffs, -y)
    }

    /// Integral representation at `-y`, regardless of regime. Requires `γ < 1`.
    pub fn quadrature_value(&self, y: f64) -> f64 {
        let g = self.params.gamma;
        let (c, s) = (self.cos_gp, self.sin_gp);
        let inv_g = 1.0 / g;
        let upper = QUADRATURE_EXP_CUTOFF.powf(g);
        let f = |w: f64| {
            let d = w + y * c;
            (-w.powf(inv_g)).exp() * y / (d * d + (y * s) * (y * s))
        };
        let mut breaks = vec![0.0, upper];
        if upper > 1.0 {
            breaks.push(1.0);
        }
        if c < 0.0 {
            let peak = -y * c;
            let width = y * s;
            for b in [
                peak - width,
                peak - 0.25 * width,
                peak,
                peak + 0.25 * width,
                peak + width,
            ] {
                if b > 0.0 && b < upper {
                    breaks.push(b);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let tol = 0.01 * self.params.rel_tol.max(1e-15);
        s / (g * PI) * quadrature::integrate_adaptive(&f, &breaks, tol)
    }

    /// Truncated asymptotic expansion at `-y`, regardless of regime.
    pub fn asymptotic_value(&self, y: f64) -> f64 {
        self.asym_coeffs.first().copied().unwrap_or(0.0) * self.asymptotic_normalized(y) / y
    }

    /// `y Γ(1-γ) E_{γ,1}(-y)` from the expansion; tends to 1 as `y → ∞`.
    fn asymptotic_normalized(&self, y: f64) -> f64 {
        let Some(&lead) = self.asym_coeffs.first() else {
            return 0.0;
        };
        let inv = 1.0 / y;
        let mut pow = 1.0;
        let mut sum = 0.0;
        for a in &self.asym_coeffs {
            let term = a * pow;
            sum += term;
            pow *= inv;
            if pow == 0.0 {
                break;
            }
        }
        sum / lead
    }

    /// `E_{γ,1}(-r t^γ) / E_{γ,1}(-r T^γ)` with `r = |ξ|²`.
    pub fn ratio(&self, r: f64, t: f64, final_time: f64) -> Result<f64> {
        let g = self.params.gamma;
        ensure(g < 1.0, "ml_ratio", || "gamma must lie in (0, 1)".into())?;
        ensure(r.is_finite() && r >= 0.0, "ml_ratio", || {
            format!("r must be finite and >= 0, got {r}")
        })?;
        ensure(
            final_time.is_finite() && t > 0.0 && t <= final_time,
            "ml_ratio",
            || format!("need 0 < t <= T, got t = {t}, T = {final_time}"),
        )?;
        Ok(self.ratio_unchecked(r, t, final_time))
    }

    pub(crate) fn ratio_unchecked(&self, r: f64, t: f64, final_time: f64) -> f64 {
        if r == 0.0 || t == final_time {
            return 1.0;
        }
        let g = self.params.gamma;
        let a = r * t.powf(g);
        let b = r * final_time.powf(g);
        if a >= self.asymptotic_min {
            // both in the algebraic tail: factor out the leading 1/y behaviour
            (final_time / t).powf(g) * self.asymptotic_normalized(a) / self.asymptotic_normalized(b)
        } else if b >= self.asymptotic_min {
            let lead = self.asym_coeffs[0];
            self.eval_neg(a) * b / (lead * self.asymptotic_normalized(b))
        } else {
            self.eval_neg(a) / self.eval_neg(b)
        }
    }
}

/// `1/Γ(γk+1)` for `k = 0..`, until `c_k y_max^k` is negligible.
fn series_coefficients(g: f64, y_max: f64, max_terms: usize) -> Vec<f64> {
    let ly = y_max.ln();
    let mut out = Vec::new();
    for k in 0..max_terms {
        let arg = g * k as f64 + 1.0;
        let c = if arg < 170.0 {
            1.0 / gamma_fn(arg)
        } else {
            (-ln_gamma(arg)).exp()
        };
        out.push(c);
        let ln_term = k as f64 * ly - ln_gamma(arg);
        if k > 8 && ln_term < -55.0 && arg > y_max.powf(1.0 / g) {
            break;
        }
    }
    out
}

fn series_sum(coeffs: &[f64], x: f64) -> f64 {
    let mut pow = 1.0;
    let mut sum = 0.0;
    for c in coeffs {
        sum += c * pow;
        pow *= x;
        if pow == 0.0 || !pow.is_finite() {
            break;
        }
    }
    sum
}

/// `1/Γ(1-γj) = sin(πγj) Γ(γj) / π`, exactly zero at the poles.
fn reciprocal_gamma_one_minus(g: f64, j: f64) -> f64 {
    let z = g * j;
    let frac = z - z.round();
    if frac.abs() < 1e-12 {
        return 0.0;
    }
    // sin(πz) = ±sin(π frac)
    let parity = if (z.round() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let sin = parity * (PI * frac).sin();
    let gam = if z < 170.0 {
        gamma_fn(z)
    } else {
        ln_gamma(z).exp()
    };
    sin * gam / PI
}

/// `E_{γ,1}(x)` for `γ ∈ (0, 1]` and finite `x ≤ 0`.
pub fn ml_e_gamma_1(gamma: f64, x: f64) -> Result<f64> {
    MittagLeffler::new(gamma)?.eval(x)
}

/// `E_{γ,1}(-r t^γ) / E_{γ,1}(-r T^γ)` for `γ ∈ (0, 1)`, `r ≥ 0`, `0 < t ≤ T`.
pub fn ml_ratio(gamma: f64, r: f64, t: f64, final_time: f64) -> Result<f64> {
    ensure(gamma > 0.0 && gamma < 1.0, "ml_ratio", || {
        format!("gamma must lie in (0, 1), got {gamma}")
    })?;
    MittagLeffler::new(gamma)?.ratio(r, t, final_time)
}

/// Perturbation profile `χ` of an approximate evaluator; must satisfy `|χ| ≤ 1`.
pub type Profile = fn(f64) -> f64;

/// `ψ_h(r, t) = E_{γ,1}(-r² t^γ) (1 + h χ(r))`, a positive surrogate whose
/// relative deviation from the exact evaluator is at most `h`.
#[derive(Debug, Clone)]
pub struct PsiApprox {
    exact: MittagLeffler,
    h: f64,
    profile: Profile,
}

impl PsiApprox {
    pub fn with_profile(gamma: f64, h: f64, profile: Profile) -> Result<Self> {
        ensure((0.0..=0.5).contains(&h), "build_psi_approx", || {
            format!("h must lie in [0, 1/2], got {h}")
        })?;
        Ok(Self {
            exact: MittagLeffler::new(gamma)?,
            h,
            profile,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.exact.gamma()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn exact(&self) -> &MittagLeffler {
        &self.exact
    }

    /// `1 + h χ(r)`.
    pub fn perturbation(&self, r: f64) -> f64 {
        1.0 + self.h * (self.profile)(r)
    }

    /// `ψ_h(r, t)` for `r = |ξ| ≥ 0` and `t > 0`.
    pub fn eval(&self, r: f64, t: f64) -> Result<f64> {
        ensure(r.is_finite() && r >= 0.0, "psi_h", || {
            format!("r must be finite and >= 0, got {r}")
        })?;
        ensure(t.is_finite() && t > 0.0, "psi_h", || {
            format!("t must be finite and > 0, got {t}")
        })?;
        let y = r * r * t.powf(self.gamma());
        Ok(self.exact.eval_neg(y) * self.perturbation(r))
    }
}

/// Builds `ψ_h` with the default profile `χ(r) = cos r`.
pub fn build_psi_approx(gamma: f64, h: f64) -> Result<PsiApprox> {
    if !(0.0..=0.5).contains(&h) {
        return Err(domain(
            "build_psi_approx",
            format!("h must lie in [0, 1/2], got {h}"),
        ));
    }
    PsiApprox::with_profile(gamma, h, f64::cos)
}
