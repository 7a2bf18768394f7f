use crate::error::{ensure, Result};

/// Maximizer and maximum of `f(x) = (1+x) exp(-b x^d)` over `x ≥ 0`.
///
/// Interior critical points solve `x^{d-1}(1+x) = 1/(bd)`; the root is
/// bracketed on the increasing branch of the left side and refined by
/// bisection in `ln x`, then compared with the boundary value `f(0) = 1`.
pub fn sup_fbd(b: f64, d: f64) -> Result<(f64, f64)> {
    ensure(b.is_finite() && b > 0.0, "sup_fbd", || {
        format!("b must be finite and > 0, got {b}")
    })?;
    ensure(d.is_finite() && d > 0.0, "sup_fbd", || {
        format!("d must be finite and > 0, got {d}")
    })?;
    let f = |x: f64| (x.ln_1p() - b * x.powf(d)).exp();
    let ln_c = -(b * d).ln();
    // ln(x^{d-1}(1+x)) - ln(1/(bd)), increasing for x past `floor`
    let g = |x: f64| (d - 1.0) * x.ln() + x.ln_1p() - ln_c;

    if d == 1.0 {
        let x = 1.0 / b - 1.0;
        return Ok(if x > 0.0 { (x, f(x)) } else { (0.0, 1.0) });
    }
    let floor = if d < 1.0 { (1.0 - d) / d } else { 0.0 };
    if d < 1.0 && g(floor) >= 0.0 {
        // f' <= 0 everywhere
        return Ok((0.0, 1.0));
    }

    let mut lo = if d < 1.0 { floor } else { f64::MIN_POSITIVE };
    let mut hi = lo.max(1.0);
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let v = f(x);
    Ok(if v >= 1.0 { (x, v) } else { (0.0, 1.0) })
}
