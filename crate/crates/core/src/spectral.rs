//! Continuous Fourier transform on half-offset grids via the FFT.
//!
//! With `K = k - N/2`, `x_j = -L + (j + 1/2) κ` and `ξ_K = K Δξ`, the
//! midpoint quadrature of `(2π)^{-1/2} ∫ f(x) e^{-ixξ} dx` factors per axis as
//!
//! ```text
//! F_k = (2π)^{-1/2} κ · (-1)^K e^{-iπK/N} · DFT[(-1)^j f_j]_k
//! f_j = (2π)^{-1/2} Δξ · (-1)^j · IDFT[(-1)^K e^{+iπK/N} F_k]_j
//! ```
//!
//! where `DFT` is the unnormalized forward FFT and `IDFT` its unnormalized
//! inverse. The two maps are exact inverses of each other, so Parseval holds
//! as `Δξ^n Σ|F_k|² = κ^n Σ|f_j|²`. In 2-D both axes are transformed.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{ensure, Error, Result};
use crate::exec::Execution;
use crate::field::{RealField, SpectralField};
use crate::grid::GridSpec;

/// Relative size of the imaginary residue tolerated by [`FourierPlan::inverse`].
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Precomputed FFTs and phase factors for one grid. Immutable and `Sync`.
#[derive(Clone)]
pub struct FourierPlan {
    grid: GridSpec,
    exec: Execution,
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
    /// `κ (2π)^{-1/2} (-1)^K e^{-iπK/N}` per axis index.
    fwd_weight: Vec<Complex64>,
    /// `Δξ (2π)^{-1/2} (-1)^K e^{+iπK/N}` per axis index.
    inv_weight: Vec<Complex64>,
}

impl std::fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan")
            .field("grid", &self.grid)
            .field("exec", &self.exec)
            .finish()
    }
}

impl FourierPlan {
    pub fn new(grid: GridSpec, exec: Execution) -> Self {
        let n = grid.points();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let backward = planner.plan_fft_inverse(n);
        let norm = (2.0 * PI).sqrt().recip();
        let phase = |k: usize| {
            let big_k = grid.signed_index(k);
            let sign = if big_k % 2 == 0 { 1.0 } else { -1.0 };
            Complex64::from_polar(sign, -PI * big_k as f64 / n as f64)
        };
        let fwd_weight = (0..n).map(|k| phase(k) * (norm * grid.kappa())).collect();
        let inv_weight = (0..n)
            .map(|k| phase(k).conj() * (norm * grid.dxi()))
            .collect();
        Self {
            grid,
            exec,
            forward,
            backward,
            fwd_weight,
            inv_weight,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn forward(&self, f: &RealField) -> Result<SpectralField> {
        self.check_grid(f.grid())?;
        let mut data: Vec<Complex64> = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| Complex64::new(alternate(&self.grid, i) * v, 0.0))
            .collect();
        self.fft_all_axes(&mut data, &self.forward);
        self.apply_weights(&mut data, &self.fwd_weight);
        Ok(SpectralField::from_raw(self.grid, data))
    }

    /// Inverse transform; fails if the result is not real to [`IMAG_RESIDUE_TOL`].
    pub fn inverse(&self, spec: &SpectralField) -> Result<RealField> {
        self.check_grid(spec.grid())?;
        let mut data = spec.coeffs().to_vec();
        self.apply_weights(&mut data, &self.inv_weight);
        self.fft_all_axes(&mut data, &self.backward);
        let g = self.grid;
        let re_sq = self.exec.sum_range(data.len(), |i| data[i].re * data[i].re);
        let im_sq = self.exec.sum_range(data.len(), |i| data[i].im * data[i].im);
        let (real_norm, imag_norm) = (re_sq.sqrt(), im_sq.sqrt());
        if imag_norm > IMAG_RESIDUE_TOL * real_norm {
            return Err(Error::Consistency {
                imag_norm,
                real_norm,
            });
        }
        let values = data
            .iter()
            .enumerate()
            .map(|(i, c)| alternate(&g, i) * c.re)
            .collect();
        Ok(RealField::from_raw(g, values))
    }

    /// Applies `multiplier[i]` to the transform of `f` and transforms back.
    pub fn filter(&self, f: &RealField, multiplier: &[f64]) -> Result<RealField> {
        let mut spec = self.forward(f)?;
        self.scale_coeffs(&mut spec, multiplier);
        self.inverse(&spec)
    }

    pub fn scale_coeffs(&self, spec: &mut SpectralField, multiplier: &[f64]) {
        assert_eq!(multiplier.len(), spec.coeffs().len());
        let chunk = self.grid.points();
        self.exec
            .for_each_chunk_mut(spec.coeffs_mut(), chunk, |row, c| {
                let m = &multiplier[row * chunk..row * chunk + c.len()];
                for (z, &w) in c.iter_mut().zip(m) {
                    *z *= w;
                }
            });
    }

    /// `κ^{n/2} ‖f‖₂`.
    pub fn l2_norm(&self, f: &RealField) -> f64 {
        let v = f.values();
        (self.grid.cell() * self.exec.sum_range(v.len(), |i| v[i] * v[i])).sqrt()
    }

    /// `(Δξ^n Σ w_k |F_k|²)^{1/2}`, unit weights when `weights` is `None`.
    pub fn spectral_norm(&self, spec: &SpectralField, weights: Option<&[f64]>) -> f64 {
        let c = spec.coeffs();
        let s = match weights {
            Some(w) => self.exec.sum_range(c.len(), |i| w[i] * c[i].norm_sqr()),
            None => self.exec.sum_range(c.len(), |i| c[i].norm_sqr()),
        };
        (self.grid.freq_cell() * s).sqrt()
    }

    /// Discrete `‖(1+|ξ|²)^{p/2} f̂‖`.
    pub fn sobolev_norm(&self, f: &RealField, p: f64) -> Result<f64> {
        ensure(p.is_finite() && p >= 0.0, "sobolev_norm", || {
            format!("p must be finite and >= 0, got {p}")
        })?;
        let spec = self.forward(f)?;
        if p == 0.0 {
            return Ok(self.spectral_norm(&spec, None));
        }
        let radial = self.grid.radial();
        let per_radius: Vec<f64> = (0..radial.len())
            .map(|u| (1.0 + radial.radius_sq(u)).powf(p))
            .collect();
        let w = radial.expand(&per_radius);
        Ok(self.spectral_norm(&spec, Some(&w)))
    }

    fn check_grid(&self, g: &GridSpec) -> Result<()> {
        ensure(*g == self.grid, "FourierPlan", || {
            "field grid differs from plan grid".into()
        })
    }

    fn fft_all_axes(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points();
        let rows = |buf: &mut [Complex64]| {
            self.exec
                .for_each_chunk_mut(buf, n, |_, row| fft.process(row));
        };
        rows(data);
        if self.grid.n_dims() == 2 {
            let mut t = transpose(data, n);
            rows(&mut t);
            data.copy_from_slice(&transpose(&t, n));
        }
    }

    fn apply_weights(&self, data: &mut [Complex64], w: &[Complex64]) {
        let n = self.grid.points();
        let two_d = self.grid.n_dims() == 2;
        self.exec.for_each_chunk_mut(data, n, |row, c| {
            let wr = if two_d {
                w[row]
            } else {
                Complex64::new(1.0, 0.0)
            };
            for (j, z) in c.iter_mut().enumerate() {
                *z *= wr * w[j];
            }
        });
    }
}

/// `(-1)^{i+j}` at a flat node index.
fn alternate(g: &GridSpec, flat: usize) -> f64 {
    let [i, j] = g.unflatten(flat);
    if (i + j) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn transpose(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0); a.len()];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn forward_ft(f: &RealField) -> Result<SpectralField> {
    FourierPlan::new(*f.grid(), Execution::default()).forward(f)
}

pub fn inverse_ft(spec: &SpectralField) -> Result<RealField> {
    FourierPlan::new(*spec.grid(), Execution::default()).inverse(spec)
}

pub fn l2_norm(f: &RealField) -> f64 {
    let v = f.values();
    (f.grid().cell() * Execution::default().sum_range(v.len(), |i| v[i] * v[i])).sqrt()
}

pub fn sobolev_norm(f: &RealField, p: f64) -> Result<f64> {
    FourierPlan::new(*f.grid(), Execution::default()).sobolev_norm(f, p)
}

#[cfg(test)]
mod tests;
