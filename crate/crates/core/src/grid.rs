//! Spatial grid and two-component wave functions.
//!
//! The grid is periodic with `r_max` excluded, so `dr = (r_max - r_min) / n`
//! is exact and the momentum values follow the standard discrete Fourier
//! layout scaled by `2π / (n · dr)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid for the nuclear coordinate.
#[derive(Clone)]
pub struct SpatialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub dr: f64,
    /// Momentum value per FFT bin: `2π/(n·dr) · i` for `i < n/2`,
    /// `2π/(n·dr) · (i - n)` otherwise.
    pub momentum_values: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpatialGrid")
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .field("n_points", &self.n_points)
            .field("dr", &self.dr)
            .finish()
    }
}

impl PartialEq for SpatialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.r_min == other.r_min && self.r_max == other.r_max && self.n_points == other.n_points
    }
}

impl SpatialGrid {
    /// Build a grid on `[r_min, r_max)` with `n_points` samples.
    ///
    /// `n_points` must be a power of two with at least 16 points.
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Arc<Self>> {
        if !(r_max > r_min) {
            return Err(Error::Config(format!(
                "degenerate interval [{r_min}, {r_max})"
            )));
        }
        if n_points < 16 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "n_points = {n_points} must be a power of two >= 16"
            )));
        }
        let dr = (r_max - r_min) / n_points as f64;
        let dk = 2.0 * std::f64::consts::PI / (n_points as f64 * dr);
        let momentum_values = (0..n_points)
            .map(|i| {
                if i < n_points / 2 {
                    dk * i as f64
                } else {
                    dk * (i as f64 - n_points as f64)
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(n_points);
        let fft_inverse = planner.plan_fft_inverse(n_points);
        Ok(Arc::new(Self {
            r_min,
            r_max,
            n_points,
            dr,
            momentum_values,
            fft_forward,
            fft_inverse,
        }))
    }

    /// Coordinate of grid point `i`.
    #[inline]
    pub fn position(&self, i: usize) -> f64 {
        self.r_min + self.dr * i as f64
    }

    /// All grid coordinates.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.position(i)).collect()
    }

    /// In-place forward transform to momentum space (unitary normalisation
    /// is deferred: a forward/backward round trip is rescaled by `1/n`).
    pub fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft_forward.process(data);
    }

    /// In-place inverse transform back to position space, including the
    /// `1/n` normalisation.
    pub fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft_inverse.process(data);
        let scale = 1.0 / self.n_points as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Nuclear wave function with components on the upper (`|1>`) and lower
/// (`|0>`) electronic state.
#[derive(Clone, Debug)]
pub struct TwoComponentWaveFunction {
    pub psi1: Vec<Complex64>,
    pub psi0: Vec<Complex64>,
    pub grid: Arc<SpatialGrid>,
}

impl TwoComponentWaveFunction {
    pub fn zeros(grid: Arc<SpatialGrid>) -> Self {
        let n = grid.n_points;
        Self {
            psi1: vec![Complex64::ZERO; n],
            psi0: vec![Complex64::ZERO; n],
            grid,
        }
    }

    /// Squared norm `Σ (|ψ1|² + |ψ0|²) · dr`.
    pub fn norm_sq(&self) -> f64 {
        let sum: f64 = self
            .psi1
            .iter()
            .chain(self.psi0.iter())
            .map(|c| c.norm_sqr())
            .sum();
        sum * self.grid.dr
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Rescale so that the norm becomes one.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let s = 1.0 / n;
            for c in self.psi1.iter_mut().chain(self.psi0.iter_mut()) {
                *c *= s;
            }
        }
    }

    pub fn scale(&mut self, factor: Complex64) {
        for c in self.psi1.iter_mut().chain(self.psi0.iter_mut()) {
            *c *= factor;
        }
    }

    /// `self += factor · other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &Self) {
        for (a, b) in self.psi1.iter_mut().zip(other.psi1.iter()) {
            *a += factor * b;
        }
        for (a, b) in self.psi0.iter_mut().zip(other.psi0.iter()) {
            *a += factor * b;
        }
    }

    /// Pointwise maximum modulus of the difference to `other`.
    pub fn max_pointwise_diff(&self, other: &Self) -> f64 {
        self.psi1
            .iter()
            .zip(other.psi1.iter())
            .chain(self.psi0.iter().zip(other.psi0.iter()))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Norm of the difference `‖self - other‖`.
    pub fn distance(&self, other: &Self) -> f64 {
        let sum: f64 = self
            .psi1
            .iter()
            .zip(other.psi1.iter())
            .chain(self.psi0.iter().zip(other.psi0.iter()))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (sum * self.grid.dr).sqrt()
    }

    /// Probability weight inside `[lo, hi]` (both components).
    pub fn mass_in_range(&self, lo: f64, hi: f64) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.grid.n_points {
            let r = self.grid.position(i);
            if r >= lo && r <= hi {
                sum += self.psi1[i].norm_sqr() + self.psi0[i].norm_sqr();
            }
        }
        sum * self.grid.dr
    }
}

/// Normalised Gaussian packet `exp(-(r-c)²/(4w²) + i p r)` on one electronic
/// component; the other component is identically zero. `width` is the
/// standard deviation of the probability density.
pub fn gaussian_packet(
    grid: &Arc<SpatialGrid>,
    center: f64,
    width: f64,
    momentum: f64,
    which_state: u8,
) -> Result<TwoComponentWaveFunction> {
    if width <= 0.0 {
        return Err(Error::Config(format!("packet width {width} must be > 0")));
    }
    if width < 4.0 * grid.dr {
        return Err(Error::Resolution(format!(
            "packet width {width} has fewer than 4 grid points per standard deviation (dr = {})",
            grid.dr
        )));
    }
    let mut wf = TwoComponentWaveFunction::zeros(grid.clone());
    {
        let target = match which_state {
            1 => &mut wf.psi1,
            0 => &mut wf.psi0,
            other => {
                return Err(Error::Usage(format!(
                    "electronic state must be 0 or 1, got {other}"
                )))
            }
        };
        for (i, v) in target.iter_mut().enumerate() {
            let r = grid.r_min + grid.dr * i as f64;
            let arg = -(r - center).powi(2) / (4.0 * width * width);
            *v = Complex64::new(arg.exp(), 0.0) * Complex64::new(0.0, momentum * r).exp();
        }
    }
    wf.normalize();
    Ok(wf)
}

/// `<a|b> = Σ (conj(a1)·b1 + conj(a0)·b0) · dr`.
pub fn inner_product(
    a: &TwoComponentWaveFunction,
    b: &TwoComponentWaveFunction,
) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::Usage(
            "inner product between wave functions on different grids".into(),
        ));
    }
    let mut sum = Complex64::ZERO;
    for (x, y) in a.psi1.iter().zip(b.psi1.iter()) {
        sum += x.conj() * y;
    }
    for (x, y) in a.psi0.iter().zip(b.psi0.iter()) {
        sum += x.conj() * y;
    }
    Ok(sum * a.grid.dr)
}
