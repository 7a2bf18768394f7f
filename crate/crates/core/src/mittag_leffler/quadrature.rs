//! Adaptive Gauss-Legendre quadrature on finite intervals.

use std::f64::consts::PI;
use std::sync::OnceLock;

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 48;

pub(crate) struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] from Newton iteration on P_n.
    pub(crate) fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub(crate) fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum();
        s * half
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub(crate) fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ORDER))
}

/// Integrates `f` over consecutive `breaks` to relative tolerance `rel_tol`.
///
/// Each panel is bisected until the one-panel and two-panel estimates agree
/// to its share of the absolute budget.
pub(crate) fn integrate_adaptive<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], rel_tol: f64) -> f64 {
    let gl = rule();
    let rough: f64 = breaks
        .windows(2)
        .map(|w| gl.integrate(f, w[0], w[1]).abs())
        .sum();
    if rough == 0.0 {
        return 0.0;
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    let budget = rel_tol * rough;

    let mut total = 0.0;
    let mut stack: Vec<(f64, f64, f64, u32)> = breaks
        .windows(2)
        .map(|w| (w[0], w[1], gl.integrate(f, w[0], w[1]), 0))
        .collect();
    while let Some((a, b, whole, depth)) = stack.pop() {
        let m = 0.5 * (a + b);
        let left = gl.integrate(f, a, m);
        let right = gl.integrate(f, m, b);
        let tol = budget * (b - a) / span;
        if (left + right - whole).abs() <= tol || depth >= MAX_DEPTH {
            total += left + right;
        } else {
            stack.push((a, m, left, depth + 1));
            stack.push((m, b, right, depth + 1));
        }
    }
    total
}
