//! Oracle and bound checks behind the `verify` subcommand.

use std::fmt;

use crate::experiments::linear_fit;
use crate::mittag_leffler::{sup_fbd, MittagLeffler};
use crate::Result;

/// A measured quantity compared against a limit: passes when `|value| ≤ limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.abs() <= self.limit
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{tag} {}: {:.3e} (limit {:.1e})",
            self.name, self.value, self.limit
        )
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn max_rel_error<F: Fn(f64) -> Result<(f64, f64)>>(
    xs: impl Iterator<Item = f64>,
    f: F,
) -> Result<f64> {
    let mut worst = 0.0_f64;
    for x in xs {
        let (got, want) = f(x)?;
        worst = worst.max(rel(got, want));
    }
    Ok(worst)
}

fn ladder(lo: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo * i as f64 / (n - 1) as f64)
}

/// `E_1(x) = e^x` on 1000 points of `[-30, 0]`.
pub fn ml_exp_check() -> Result<Check> {
    let ml = MittagLeffler::new(1.0)?;
    let err = max_rel_error(ladder(-30.0, 1000), |x| Ok((ml.eval(x)?, x.exp())))?;
    Ok(Check::new("E_1 vs exp on [-30, 0]", err, 1e-10))
}

/// `E_{1/2}(x) = e^{x²} erfc(-x)` on 1000 points of `[-25, 0]`.
#[cfg(feature = "reference")]
pub fn ml_erfc_check() -> Result<Check> {
    use crate::mittag_leffler::erfc_scaled_reference;
    let ml = MittagLeffler::new(0.5)?;
    let err = max_rel_error(ladder(-25.0, 1000), |x| {
        Ok((ml.eval(x)?, erfc_scaled_reference(-x)))
    })?;
    Ok(Check::new("E_1/2 vs scaled erfc on [-25, 0]", err, 1e-8))
}

/// Extended-precision series and expansion on 300 points of `[-30, 0]` per `γ`.
#[cfg(feature = "reference")]
pub fn ml_reference_checks() -> Result<Vec<Check>> {
    use crate::mittag_leffler::ml_reference;
    [0.2, 0.5, 0.8]
        .iter()
        .map(|&g| {
            let ml = MittagLeffler::new(g)?;
            let err = max_rel_error(ladder(-30.0, 300), |x| {
                Ok((ml.eval(x)?, ml_reference(g, x, 1e-14)?))
            })?;
            Ok(Check::new(
                format!("E_{g} vs MPFR reference on [-30, 0]"),
                err,
                1e-10,
            ))
        })
        .collect()
}

/// Log-log slope of `sup (1+x) e^{-b x^d}` over `b = 10^{-1..-6}` against `-1/d`.
pub fn fbd_slope_checks() -> Result<Vec<Check>> {
    [0.5, 1.0, 2.0]
        .iter()
        .map(|&d| {
            let pts = (1..=6)
                .map(|k| {
                    let b = 10f64.powi(-k);
                    Ok((b.ln(), sup_fbd(b, d)?.1.ln()))
                })
                .collect::<Result<Vec<_>>>()?;
            let slope = linear_fit(&pts)?.slope;
            Ok(Check::new(
                format!("sup_fbd slope, d = {d}"),
                slope + 1.0 / d,
                0.05,
            ))
        })
        .collect()
}

/// `d = 1` has maximum `e^{b-1} / b` for `b < 1`.
pub fn fbd_closed_form_check() -> Result<Check> {
    let err = max_rel_error((1..=6).map(|k| 10f64.powi(-k)), |b| {
        Ok((sup_fbd(b, 1.0)?.1, (b - 1.0).exp() / b))
    })?;
    Ok(Check::new("sup_fbd closed form, d = 1", err, 1e-10))
}

pub fn run_all() -> Result<Vec<Check>> {
    let mut out = vec![ml_exp_check()?];
    #[cfg(feature = "reference")]
    {
        out.push(ml_erfc_check()?);
        out.extend(ml_reference_checks()?);
    }
    out.extend(fbd_slope_checks()?);
    out.push(fbd_closed_form_check()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let checks = run_all().unwrap();
        assert!(checks.len() >= 5);
        for c in &checks {
            assert!(c.passed(), "{c}");
        }
    }

    #[test]
    fn display_marks_failures() {
        assert!(Check::new("x", 2.0, 1.0).to_string().starts_with("FAIL x"));
        assert!(Check::new("x", -0.5, 1.0).to_string().starts_with("PASS x"));
        assert!(!Check::new("x", f64::NAN, 1.0).passed());
    }
}
