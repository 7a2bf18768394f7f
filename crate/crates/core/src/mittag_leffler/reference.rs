//! Extended-precision reference values for tests and `verify`.
//!
//! Admissible range: any `γ ∈ (0, 1]` and `x ≤ 0`. When `|x|^{1/γ}` is at
//! most [`REFERENCE_SERIES_LIMIT`] the power series is summed with enough
//! MPFR bits to absorb its cancellation (covers `|x| ≤ 30` for `γ ≥ 0.5`).
//! Beyond that the algebraic expansion is summed in extended precision; its
//! truncation error there is below `exp(-REFERENCE_SERIES_LIMIT)`.

use std::f64::consts::LN_2;

use rug::float::Constant;
use rug::Float;

use crate::error::{ensure, Error, Result};

/// Largest `|x|^{1/γ}` summed by the power series.
pub const REFERENCE_SERIES_LIMIT: f64 = 1000.0;
const MAX_TERMS: usize = 5_000_000;

pub fn ml_reference(gamma: f64, x: f64, tol: f64) -> Result<f64> {
    ensure(gamma > 0.0 && gamma <= 1.0, "ml_reference", || {
        format!("gamma must lie in (0, 1], got {gamma}")
    })?;
    ensure(x.is_finite() && x <= 0.0, "ml_reference", || {
        format!("argument must be finite and <= 0, got {x}")
    })?;
    if !(1e-40..1.0).contains(&tol) {
        return Err(Error::Reference(format!("tolerance {tol:e} unreachable")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    let y = -x;
    let z = y.powf(1.0 / gamma);
    if z <= REFERENCE_SERIES_LIMIT {
        series(gamma, y, z, tol)
    } else if gamma == 1.0 {
        let prec = 128;
        Ok(Float::with_val(prec, -y).exp().to_f64())
    } else {
        asymptotic(gamma, y, tol)
    }
}

/// `exp(x²) erfc(x)` at 256 bits.
pub fn erfc_scaled_reference(x: f64) -> f64 {
    let v = Float::with_val(256, x);
    let sq = Float::with_val(256, v.square_ref()).exp();
    (sq * v.erfc()).to_f64()
}

/// `γ = p/q` when `γ` is within rounding of a fraction with small denominator.
fn as_fraction(g: f64) -> Option<(u32, u32)> {
    (1..=64u32).find_map(|q| {
        let p = (g * q as f64).round();
        (p >= 1.0 && (g * q as f64 - p).abs() < 1e-13).then_some((p as u32, q))
    })
}

fn gamma_float(prec: u32, g: f64) -> Float {
    match as_fraction(g) {
        Some((p, q)) => Float::with_val(prec, p) / q,
        None => Float::with_val(prec, g),
    }
}

fn series(g: f64, y: f64, z: f64, tol: f64) -> Result<f64> {
    let prec = ((z + 60.0) / LN_2 + 96.0 - tol.log2()).ceil() as u32;
    let gf = gamma_float(prec, g);
    let one = Float::with_val(prec, 1);

    // Γ(γk+1): shift recurrence Γ(γ(k+q)+1) = Γ(γk+1) Π_{i<p} (γk+1+i)
    let frac = as_fraction(g);
    let mut window: Vec<Float> = Vec::new();
    let gamma_at = |k: usize, window: &mut Vec<Float>| -> Float {
        let arg = Float::with_val(prec, &gf * k as u32) + &one;
        match frac {
            Some((p, q)) => {
                let q = q as usize;
                if k < q {
                    let v = arg.gamma();
                    window.push(v.clone());
                    v
                } else {
                    let prev_arg = Float::with_val(prec, &gf * (k - q) as u32) + &one;
                    let slot = k % q;
                    let mut v = window[slot].clone();
                    for i in 0..p {
                        v *= Float::with_val(prec, &prev_arg + i);
                    }
                    window[slot] = v.clone();
                    v
                }
            }
            None => arg.gamma(),
        }
    };

    let neg_y = Float::with_val(prec, -y);
    let mut pow = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut prev_abs = Float::with_val(prec, 0);
    for k in 0..MAX_TERMS {
        let term = Float::with_val(prec, &pow / &gamma_at(k, &mut window));
        sum += &term;
        let abs = term.abs();
        if k > 0 && g * k as f64 > 1.5 * z + 2.0 && abs < prev_abs {
            // tail of a decreasing sequence with ratio r is below |t| r / (1 - r)
            let r = Float::with_val(prec, &abs / &prev_abs);
            let tail = Float::with_val(prec, &abs * &r) / (Float::with_val(prec, 1) - r);
            let bound = Float::with_val(prec, sum.abs_ref()) * (1e-3 * tol);
            if tail < bound {
                return Ok(sum.to_f64());
            }
        }
        prev_abs = abs;
        pow *= &neg_y;
    }
    Err(Error::Reference(format!(
        "series did not reach tolerance {tol:e} within {MAX_TERMS} terms"
    )))
}

fn asymptotic(g: f64, y: f64, tol: f64) -> Result<f64> {
    let prec = (256.0 - tol.log2()).ceil() as u32;
    let gf = gamma_float(prec, g);
    let pi = Float::with_val(prec, Constant::Pi);
    let inv_y = Float::with_val(prec, 1) / Float::with_val(prec, y);
    let mut pow = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut prev_env: Option<Float> = None;
    for j in 1..MAX_TERMS {
        pow *= &inv_y;
        let arg = Float::with_val(prec, &gf * j as u32);
        let gam = arg.clone().gamma();
        let sin = Float::with_val(prec, &arg * &pi).sin();
        // 1/Γ(1-γj) = sin(πγj) Γ(γj) / π
        let coeff = Float::with_val(prec, &sin * &gam) / &pi;
        let mut term = coeff * &pow;
        if j % 2 == 0 {
            term = -term;
        }
        sum += &term;
        let env = Float::with_val(prec, &gam * &pow) / &pi;
        if j >= 2 {
            let bound = Float::with_val(prec, sum.abs_ref()) * (1e-3 * tol);
            if env < bound {
                return Ok(sum.to_f64());
            }
            if prev_env.as_ref().is_some_and(|p| env > *p) {
                return Err(Error::Reference(format!(
                    "asymptotic expansion diverges before tolerance {tol:e} at y = {y}"
                )));
            }
        }
        prev_env = Some(env);
    }
    Err(Error::Reference("asymptotic expansion exhausted".into()))
}
