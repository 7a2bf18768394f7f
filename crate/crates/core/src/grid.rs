//! Half-offset grids on `[-L, L]^n` and their frequency grids.
//!
//! Nodes per axis are `x_j = -L + (j + 1/2) κ` for `j = 0..N` with
//! `κ = 2L/N`. Frequencies are `ξ_k = (k - N/2) Δξ` with `Δξ = π/L`, covering
//! the half-open band `[-Ω, Ω)` where `Ω = πN/(2L)`. Multi-dimensional arrays
//! are row-major: flat index `i N + j` holds axis-0 index `i`, axis-1 index `j`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n_dims: usize,
    half_width: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(n_dims: usize, half_width: f64, n: usize) -> Result<Self> {
        if n_dims != 1 && n_dims != 2 {
            return Err(domain(
                "make_grid",
                format!("n_dims must be 1 or 2, got {n_dims}"),
            ));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(domain(
                "make_grid",
                format!("L must be finite and > 0, got {half_width}"),
            ));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(domain(
                "make_grid",
                format!("N must be a power of two >= 8, got {n}"),
            ));
        }
        Ok(Self {
            n_dims,
            half_width,
            n,
        })
    }

    pub fn n_dims(&self) -> usize {
        self.n_dims
    }

    /// `L`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `N`, points per axis.
    pub fn points(&self) -> usize {
        self.n
    }

    /// Total number of nodes, `N^n`.
    pub fn len(&self) -> usize {
        self.n.pow(self.n_dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kappa(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn omega(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.half_width)
    }

    /// Frequency spacing `π/L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_width
    }

    /// Physical cell measure `κ^n`.
    pub fn cell(&self) -> f64 {
        self.kappa().powi(self.n_dims as i32)
    }

    /// Frequency cell measure `Δξ^n`.
    pub fn freq_cell(&self) -> f64 {
        self.dxi().powi(self.n_dims as i32)
    }

    pub fn axis_nodes(&self) -> Vec<f64> {
        let k = self.kappa();
        (0..self.n)
            .map(|j| -self.half_width + (j as f64 + 0.5) * k)
            .collect()
    }

    pub fn axis_frequencies(&self) -> Vec<f64> {
        let d = self.dxi();
        (0..self.n)
            .map(|k| self.signed_index(k) as f64 * d)
            .collect()
    }

    /// `k - N/2`.
    pub fn signed_index(&self, k: usize) -> i64 {
        k as i64 - (self.n / 2) as i64
    }

    /// Per-axis indices of a flat index (axis 1 is unused when `n = 1`).
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        if self.n_dims == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    /// Physical coordinates of a flat node index.
    pub fn node(&self, flat: usize) -> [f64; 2] {
        let k = self.kappa();
        let [i, j] = self.unflatten(flat);
        let x = |a: usize| -self.half_width + (a as f64 + 0.5) * k;
        if self.n_dims == 1 {
            [x(i), 0.0]
        } else {
            [x(i), x(j)]
        }
    }

    /// Integer `m` with `|ξ|² = m Δξ²` at a flat frequency index.
    pub fn freq_index_sq(&self, flat: usize) -> u64 {
        let [i, j] = self.unflatten(flat);
        let a = self.signed_index(i);
        if self.n_dims == 1 {
            (a * a) as u64
        } else {
            let b = self.signed_index(j);
            (a * a + b * b) as u64
        }
    }

    pub fn xi_abs(&self, flat: usize) -> f64 {
        (self.freq_index_sq(flat) as f64).sqrt() * self.dxi()
    }

    /// Largest per-axis `|ξ_j|` at a flat frequency index.
    pub fn xi_max_axis(&self, flat: usize) -> f64 {
        let [i, j] = self.unflatten(flat);
        let a = self.signed_index(i).unsigned_abs();
        let b = if self.n_dims == 1 {
            0
        } else {
            self.signed_index(j).unsigned_abs()
        };
        a.max(b) as f64 * self.dxi()
    }

    /// Deduplicated radial structure of the frequency grid.
    pub fn radial(&self) -> RadialTable {
        let half = (self.n / 2) as u64;
        let max_m = self.n_dims as u64 * half * half;
        let mut slot = vec![u32::MAX; max_m as usize + 1];
        for flat in 0..self.len() {
            slot[self.freq_index_sq(flat) as usize] = 0;
        }
        let mut values = Vec::new();
        for (m, s) in slot.iter_mut().enumerate() {
            if *s == 0 {
                *s = values.len() as u32;
                values.push(m as u64);
            }
        }
        let index = (0..self.len())
            .map(|flat| slot[self.freq_index_sq(flat) as usize])
            .collect();
        RadialTable {
            dxi: self.dxi(),
            values,
            index,
        }
    }
}

/// Distinct values of `|ξ|²/Δξ²` and, per frequency node, its position in that list.
#[derive(Debug, Clone)]
pub struct RadialTable {
    dxi: f64,
    values: Vec<u64>,
    index: Vec<u32>,
}

impl RadialTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `|ξ|` of the `u`-th distinct radius.
    pub fn radius(&self, u: usize) -> f64 {
        (self.values[u] as f64).sqrt() * self.dxi
    }

    /// `|ξ|²` of the `u`-th distinct radius.
    pub fn radius_sq(&self, u: usize) -> f64 {
        self.values[u] as f64 * self.dxi * self.dxi
    }

    pub fn index(&self) -> &[u32] {
        &self.index
    }

    /// Expands per-radius values to a per-node array.
    pub fn expand<T: Copy>(&self, per_radius: &[T]) -> Vec<T> {
        self.index.iter().map(|&u| per_radius[u as usize]).collect()
    }
}

pub fn make_grid(n_dims: usize, half_width: f64, n: usize) -> Result<GridSpec> {
    GridSpec::new(n_dims, half_width, n)
}
