//! System propagator and the order-by-order perturbative stepper.
//!
//! The unperturbed propagator `exp(-i H0 dt)` is realised with the
//! second-order split-operator factorisation (potential half step, kinetic
//! full step in Fourier space, potential half step). The perturbative
//! stepper advances a stack of order components jointly: order `m` picks up
//! the coupling applied to the already-updated order `m - 1`, so summing the
//! stack reproduces the plain truncated recursion exactly.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, TwoComponentWaveFunction};
use crate::pulse::LaserPulse;

/// Highest perturbation order the per-order storage accepts.
pub const MAX_ORDER: usize = 32;

/// Pair of linear potentials `V1 = -m0 R + C1`, `V0 = m0 R + C0`.
#[derive(Clone, Copy, Debug)]
pub struct LinearPotentialPair {
    /// Gradient m0 of the lower-state potential; the upper state uses -m0.
    pub gradient: f64,
    /// Offset C0 of the lower-state potential.
    pub offset0: f64,
    /// Offset C1 of the upper-state potential.
    pub offset1: f64,
}

impl LinearPotentialPair {
    pub fn sample(&self, grid: &SpatialGrid) -> (Vec<f64>, Vec<f64>) {
        let v1 = (0..grid.n_points)
            .map(|i| -self.gradient * grid.position(i) + self.offset1)
            .collect();
        let v0 = (0..grid.n_points)
            .map(|i| self.gradient * grid.position(i) + self.offset0)
            .collect();
        (v1, v0)
    }
}

/// Field-free part of the Hamiltonian: kinetic energy plus one potential per
/// electronic state.
#[derive(Clone)]
pub struct SystemHamiltonian {
    pub mass: f64,
    pub potential1: Vec<f64>,
    pub potential0: Vec<f64>,
    pub grid: Arc<SpatialGrid>,
}

impl SystemHamiltonian {
    pub fn new(
        grid: Arc<SpatialGrid>,
        mass: f64,
        potential1: Vec<f64>,
        potential0: Vec<f64>,
    ) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::Config(format!("mass {mass} must be > 0")));
        }
        if potential1.len() != grid.n_points || potential0.len() != grid.n_points {
            return Err(Error::Config(
                "potential arrays must match the grid length".into(),
            ));
        }
        Ok(Self {
            mass,
            potential1,
            potential0,
            grid,
        })
    }

    pub fn from_linear(
        grid: Arc<SpatialGrid>,
        mass: f64,
        potentials: &LinearPotentialPair,
    ) -> Result<Self> {
        let (v1, v0) = potentials.sample(&grid);
        Self::new(grid, mass, v1, v0)
    }

    /// Kinetic energy per momentum bin, `k²/(2m)`.
    fn kinetic_values(&self) -> Vec<f64> {
        self.grid
            .momentum_values
            .iter()
            .map(|k| k * k / (2.0 * self.mass))
            .collect()
    }
}

/// Dipole coupling `-μ E(t)` swapping the two electronic components.
///
/// Even powers of the coupling act as the scalar `(μ E)²ⁿ` on both
/// components, which is what makes the stationary norm orders independent of
/// the system Hamiltonian.
#[derive(Clone, Copy, Debug)]
pub struct CouplingOperator {
    pub mu: f64,
    pub pulse: LaserPulse,
}

impl CouplingOperator {
    pub fn new(mu: f64, pulse: LaserPulse) -> Self {
        Self { mu, pulse }
    }

    /// Scalar entry `w(t) = -μ E(t)` of the off-diagonal coupling.
    #[inline]
    pub fn coupling_at(&self, t: f64) -> f64 {
        -self.mu * self.pulse.field_at(t)
    }

    /// Apply `Ŵ(t)` to a wave function: swap components, scale by `w(t)`.
    pub fn apply(&self, t: f64, wf: &TwoComponentWaveFunction) -> TwoComponentWaveFunction {
        apply_swap_coupling(self.coupling_at(t), wf)
    }
}

/// `w · (swap of components)` applied to `wf`.
pub fn apply_swap_coupling(w: f64, wf: &TwoComponentWaveFunction) -> TwoComponentWaveFunction {
    let mut out = TwoComponentWaveFunction::zeros(wf.grid.clone());
    for (o, s) in out.psi1.iter_mut().zip(wf.psi0.iter()) {
        *o = w * s;
    }
    for (o, s) in out.psi0.iter_mut().zip(wf.psi1.iter()) {
        *o = w * s;
    }
    out
}

/// Cached split-operator tables for one `(H, dt)` pair.
pub struct StepOperator {
    grid: Arc<SpatialGrid>,
    exp_v1_half: Vec<Complex64>,
    exp_v0_half: Vec<Complex64>,
    exp_kinetic: Vec<Complex64>,
}

impl StepOperator {
    pub fn new(h: &SystemHamiltonian, dt: f64) -> Self {
        let phase = |x: f64| Complex64::new(0.0, -x).exp();
        let exp_v1_half = h.potential1.iter().map(|v| phase(0.5 * v * dt)).collect();
        let exp_v0_half = h.potential0.iter().map(|v| phase(0.5 * v * dt)).collect();
        let exp_kinetic = h.kinetic_values().iter().map(|t| phase(t * dt)).collect();
        Self {
            grid: h.grid.clone(),
            exp_v1_half,
            exp_v0_half,
            exp_kinetic,
        }
    }

    /// One split-operator step in place.
    pub fn apply(&self, wf: &mut TwoComponentWaveFunction) {
        debug_assert!(wf.grid == self.grid);
        mul_assign(&mut wf.psi1, &self.exp_v1_half);
        mul_assign(&mut wf.psi0, &self.exp_v0_half);
        self.grid.fft_forward(&mut wf.psi1);
        self.grid.fft_forward(&mut wf.psi0);
        mul_assign(&mut wf.psi1, &self.exp_kinetic);
        mul_assign(&mut wf.psi0, &self.exp_kinetic);
        self.grid.fft_inverse(&mut wf.psi1);
        self.grid.fft_inverse(&mut wf.psi0);
        mul_assign(&mut wf.psi1, &self.exp_v1_half);
        mul_assign(&mut wf.psi0, &self.exp_v0_half);
    }
}

fn mul_assign(data: &mut [Complex64], factors: &[Complex64]) {
    for (d, f) in data.iter_mut().zip(factors.iter()) {
        *d *= f;
    }
}

/// One application of `exp(-i H0 dt)` via the split-operator factorisation.
pub fn split_operator_step(
    state: &TwoComponentWaveFunction,
    h: &SystemHamiltonian,
    dt: f64,
) -> TwoComponentWaveFunction {
    let mut out = state.clone();
    StepOperator::new(h, dt).apply(&mut out);
    out
}

/// Stack of perturbative order components evolved jointly.
///
/// `orders[m]` carries the part of the wave function with exactly `m`
/// coupling factors; the reconstructed truncated wave function is the sum of
/// the stack. At step zero only `orders[0]` is populated.
#[derive(Clone)]
pub struct PerturbativeState {
    pub orders: Vec<TwoComponentWaveFunction>,
    pub step_index: usize,
    pub dt: f64,
    pub k: usize,
}

impl PerturbativeState {
    pub fn new(psi0: TwoComponentWaveFunction, k: usize, dt: f64) -> Result<Self> {
        if k > MAX_ORDER {
            return Err(Error::Config(format!(
                "perturbation order {k} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Config(format!("time step {dt} must be > 0")));
        }
        let grid = psi0.grid.clone();
        let mut orders = Vec::with_capacity(k + 1);
        orders.push(psi0);
        for _ in 0..k {
            orders.push(TwoComponentWaveFunction::zeros(grid.clone()));
        }
        Ok(Self {
            orders,
            step_index: 0,
            dt,
            k,
        })
    }

    /// Physical time of the current step.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    /// Sum of all order components, i.e. the truncated wave function.
    pub fn reconstruct(&self) -> TwoComponentWaveFunction {
        let mut sum = self.orders[0].clone();
        for m in 1..=self.k {
            sum.add_scaled(Complex64::ONE, &self.orders[m]);
        }
        sum
    }

    /// Advance the stack by one step of the per-order recursion:
    /// order 0 is propagated freely, and each higher order additionally
    /// receives `-i dt Ŵ(t_{n+1})` applied to the freshly updated order
    /// below it. The coupling is sampled at the end of the step.
    pub fn advance(&mut self, step: &StepOperator, coupling: &CouplingOperator) {
        let t_next = (self.step_index + 1) as f64 * self.dt;
        let w = coupling.coupling_at(t_next);
        let factor = Complex64::new(0.0, -self.dt) * w;
        for m in 0..=self.k {
            step.apply(&mut self.orders[m]);
            if m >= 1 {
                // orders[m-1] is already final for this step
                let (lower, upper) = self.orders.split_at_mut(m);
                let prev = &lower[m - 1];
                let cur = &mut upper[0];
                for (a, b) in cur.psi1.iter_mut().zip(prev.psi0.iter()) {
                    *a += factor * b;
                }
                for (a, b) in cur.psi0.iter_mut().zip(prev.psi1.iter()) {
                    *a += factor * b;
                }
            }
        }
        self.step_index += 1;
    }
}

/// One step of the per-order recursion, returning the advanced stack.
pub fn simple_algorithm_step(
    ps: &PerturbativeState,
    h: &SystemHamiltonian,
    coupling: &CouplingOperator,
) -> PerturbativeState {
    let step = StepOperator::new(h, ps.dt);
    let mut next = ps.clone();
    next.advance(&step, coupling);
    next
}

/// Reference propagator for the full coupled Hamiltonian: the potential half
/// steps use the closed-form 2x2 exponential of
/// `diag(V1, V0) - μ E(t_mid) σx`, the kinetic step acts in Fourier space.
pub struct ExactStepOperator {
    grid: Arc<SpatialGrid>,
    /// (V1 + V0) / 2 per grid point.
    v_mean: Vec<f64>,
    /// (V1 - V0) / 2 per grid point.
    v_diff: Vec<f64>,
    exp_kinetic: Vec<Complex64>,
    dt: f64,
}

impl ExactStepOperator {
    pub fn new(h: &SystemHamiltonian, dt: f64) -> Self {
        let v_mean = h
            .potential1
            .iter()
            .zip(h.potential0.iter())
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let v_diff = h
            .potential1
            .iter()
            .zip(h.potential0.iter())
            .map(|(a, b)| 0.5 * (a - b))
            .collect();
        let exp_kinetic = h
            .kinetic_values()
            .iter()
            .map(|t| Complex64::new(0.0, -t * dt).exp())
            .collect();
        Self {
            grid: h.grid.clone(),
            v_mean,
            v_diff,
            exp_kinetic,
            dt,
        }
    }

    /// Half step of the coupled potential matrix with coupling entry `w`.
    fn coupled_half_step(&self, wf: &mut TwoComponentWaveFunction, w: f64) {
        let tau = 0.5 * self.dt;
        for i in 0..self.grid.n_points {
            let c = self.v_mean[i];
            let d = self.v_diff[i];
            let omega = (d * d + w * w).sqrt();
            let global = Complex64::new(0.0, -c * tau).exp();
            let (cos_t, sinc) = if omega > 0.0 {
                let theta = omega * tau;
                (theta.cos(), theta.sin() / omega)
            } else {
                (1.0, tau)
            };
            let m11 = global * Complex64::new(cos_t, -sinc * d);
            let m00 = global * Complex64::new(cos_t, sinc * d);
            let m01 = global * Complex64::new(0.0, -sinc * w);
            let a = wf.psi1[i];
            let b = wf.psi0[i];
            wf.psi1[i] = m11 * a + m01 * b;
            wf.psi0[i] = m01 * a + m00 * b;
        }
    }

    /// One full step with the field sampled at `t_mid`.
    pub fn apply(
        &self,
        wf: &mut TwoComponentWaveFunction,
        coupling: &CouplingOperator,
        t_mid: f64,
    ) {
        let w = coupling.coupling_at(t_mid);
        self.coupled_half_step(wf, w);
        self.grid.fft_forward(&mut wf.psi1);
        self.grid.fft_forward(&mut wf.psi0);
        for (v, f) in wf.psi1.iter_mut().zip(self.exp_kinetic.iter()) {
            *v *= f;
        }
        for (v, f) in wf.psi0.iter_mut().zip(self.exp_kinetic.iter()) {
            *v *= f;
        }
        self.grid.fft_inverse(&mut wf.psi1);
        self.grid.fft_inverse(&mut wf.psi0);
        self.coupled_half_step(wf, w);
    }
}

/// One reference step of the full time-dependent problem.
pub fn exact_step(
    state: &TwoComponentWaveFunction,
    h: &SystemHamiltonian,
    coupling: &CouplingOperator,
    t_mid: f64,
    dt: f64,
) -> TwoComponentWaveFunction {
    let mut out = state.clone();
    ExactStepOperator::new(h, dt).apply(&mut out, coupling, t_mid);
    out
}

/// Fine-quadrature evaluation of the perturbative wave function after a
/// single step: the iterated integral recursion is resolved with a composite
/// trapezoid over `n_sub` sub-intervals, the free propagator over a partial
/// interval being a single split-operator step of that duration.
pub fn perturbative_reference_one_step(
    psi0: &TwoComponentWaveFunction,
    h: &SystemHamiltonian,
    coupling: &CouplingOperator,
    dt: f64,
    k: usize,
    n_sub: usize,
) -> Result<TwoComponentWaveFunction> {
    if n_sub < 64 {
        return Err(Error::Usage(format!(
            "n_sub = {n_sub} is below the minimum of 64 quadrature nodes"
        )));
    }
    let h_sub = dt / n_sub as f64;
    // one split step per partial duration; index d = number of sub-intervals
    let steps: Vec<StepOperator> = (0..=n_sub)
        .map(|d| StepOperator::new(h, d as f64 * h_sub))
        .collect();

    let propagate = |wf: &TwoComponentWaveFunction, d: usize| -> TwoComponentWaveFunction {
        if d == 0 {
            return wf.clone();
        }
        let mut out = wf.clone();
        steps[d].apply(&mut out);
        out
    };

    // level 0 at every node
    let mut prev: Vec<TwoComponentWaveFunction> = (0..=n_sub).map(|i| propagate(psi0, i)).collect();

    for _level in 1..=k {
        // coupling applied to the previous level at every node
        let coupled: Vec<TwoComponentWaveFunction> = prev
            .iter()
            .enumerate()
            .map(|(j, wf)| coupling.apply(j as f64 * h_sub, wf))
            .collect();
        let mut cur: Vec<TwoComponentWaveFunction> = Vec::with_capacity(n_sub + 1);
        for i in 0..=n_sub {
            let mut acc = propagate(psi0, i);
            if i > 0 {
                let mut integral = TwoComponentWaveFunction::zeros(psi0.grid.clone());
                for j in 0..=i {
                    let weight = if j == 0 || j == i { 0.5 * h_sub } else { h_sub };
                    integral
                        .add_scaled(Complex64::new(weight, 0.0), &propagate(&coupled[j], i - j));
                }
                acc.add_scaled(Complex64::new(0.0, -1.0), &integral);
            }
            cur.push(acc);
        }
        prev = cur;
    }
    Ok(prev.pop().expect("at least one node"))
}

/// Norm-deviation series produced by one propagation run.
#[derive(Clone, Debug)]
pub struct NormSeries {
    pub dt: f64,
    pub times: Vec<f64>,
    /// Norm deviation from unity at each time.
    pub deviations: Vec<f64>,
}

/// Empirical split of the norm deviation into a step-size-independent part
/// and a part linear in the step, from two runs at `dt` and `dt/2`.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    /// Extrapolated dt-independent deviation, `2 e(dt/2) - e(dt)`.
    pub dt_independent: Vec<f64>,
    /// Estimated linear coefficient, `(e(dt) - e(dt/2)) / (dt/2)`.
    pub linear_coeff: Vec<f64>,
}

pub fn convergence_split(run_a: &NormSeries, run_b: &NormSeries) -> Result<ConvergenceReport> {
    let half = 0.5 * run_a.dt;
    if (run_b.dt - half).abs() > 1e-12 * run_a.dt {
        return Err(Error::Usage(format!(
            "second run must use half the time step ({} vs {})",
            run_b.dt, run_a.dt
        )));
    }
    let mut times = Vec::new();
    let mut dt_independent = Vec::new();
    let mut linear_coeff = Vec::new();
    let mut jb = 0usize;
    for (ia, &t) in run_a.times.iter().enumerate() {
        while jb < run_b.times.len() && run_b.times[jb] < t - 1e-9 {
            jb += 1;
        }
        if jb >= run_b.times.len() || (run_b.times[jb] - t).abs() > 1e-9 {
            return Err(Error::Usage(format!("time grids do not align at t = {t}")));
        }
        let ea = run_a.deviations[ia];
        let eb = run_b.deviations[jb];
        times.push(t);
        dt_independent.push(2.0 * eb - ea);
        linear_coeff.push((ea - eb) / half);
    }
    Ok(ConvergenceReport {
        times,
        dt_independent,
        linear_coeff,
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Small linear-potential system on a modest grid for unit tests.
    pub fn small_system(n_points: usize, gradient: f64, mass: f64) -> SystemHamiltonian {
        let grid = SpatialGrid::new(-10.0, 10.0, n_points).unwrap();
        SystemHamiltonian::from_linear(
            grid,
            mass,
            &LinearPotentialPair {
                gradient,
                offset0: 0.0,
                offset1: 0.05,
            },
        )
        .unwrap()
    }

    /// A weak constant field: tiny envelope rate, zero carrier.
    pub fn constant_field(strength: f64) -> LaserPulse {
        LaserPulse::unchirped(strength, 1e-20, 0.0, 0.0).unwrap()
    }

    /// Deterministic smooth field with carrier, chirp and offset.
    pub fn wiggly_field(seed_shift: f64) -> LaserPulse {
        LaserPulse::chirped(
            8e-3 + 1e-3 * seed_shift,
            3e-4,
            40.0 + 3.0 * seed_shift,
            0.31 + 0.01 * seed_shift,
            1.5e2,
        )
        .unwrap()
    }
}
