//! Interaction-picture time evolution with fourth-order Runge-Kutta.
//!
//! In the N = 1 sector the interaction acts as
//!
//! ```text
//! V_I(t) |alpha k, g> =  i g e^{-i(w_k - w_0)t} |0, e>
//! V_I(t) |0, e>       = -i g sum_{alpha,k} e^{+i(w_k - w_0)t} |alpha k, g>
//! ```
//!
//! with g = sqrt(gamma / 2L), so one application costs O(dim): a scaled copy
//! of the phase vector into the photon block and one dot product for the
//! atom. Phases are evaluated from (k, t) at every stage; nothing is
//! accumulated across steps.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MomentumGrid, SimulationConfig};
use crate::observables::{excitation_probs, ExcitationProbs};
use crate::state::SingleExcitationState;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Uniform time grid `t_n = n * T / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    total: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// `n_steps = 0` is allowed and yields a trajectory holding only t = 0.
    pub fn new(total: f64, n_steps: usize) -> Result<Self> {
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidParameter(format!("T = {total} must be > 0")));
        }
        Ok(Self { total, n_steps })
    }

    /// Grid with step as close as possible to `dt` (rounded step count).
    pub fn with_step(total: f64, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
        }
        Self::new(total, (total / dt).round().max(1.0) as usize)
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        if self.n_steps == 0 {
            0.0
        } else {
            self.total / self.n_steps as f64
        }
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }
}

/// Coefficient of the last-stage increment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RkScheme {
    /// Classical RK4: the fourth stage is evaluated at `psi + k3`.
    #[default]
    Classical,
    /// Fourth stage evaluated at `psi + k3 / 2`. Kept for A/B comparison only;
    /// it is not fourth-order accurate.
    HalfFinalIncrement,
}

impl RkScheme {
    fn final_stage_weight(self) -> f64 {
        match self {
            RkScheme::Classical => 1.0,
            RkScheme::HalfFinalIncrement => 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagateOptions {
    pub scheme: RkScheme,
    /// Record observables every `m` steps (the final step is always kept).
    /// `None` records only the initial and final points.
    pub record_every: Option<usize>,
}

impl Default for PropagateOptions {
    fn default() -> Self {
        Self {
            scheme: RkScheme::Classical,
            record_every: Some(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub probs: ExcitationProbs,
    pub norm_sqr: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: SingleExcitationState,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.t)
    }

    /// CSV with columns `t,T_n,R_n,A_n,norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,T_n,R_n,A_n,norm")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.t,
                p.probs.transmitted,
                p.probs.reflected,
                p.probs.atomic,
                p.norm_sqr.sqrt()
            )?;
        }
        Ok(())
    }
}

/// Precomputed pieces of V_I(t) for one configuration.
#[derive(Debug, Clone)]
pub struct InteractionKernel {
    coupling: f64,
    detunings: Vec<f64>,
}

impl InteractionKernel {
    pub fn new(config: &SimulationConfig, grid: &MomentumGrid) -> Self {
        let omega_0 = config.bare().omega_0;
        Self {
            coupling: config.coupling(),
            detunings: grid
                .momenta()
                .iter()
                .map(|&k| config.dispersion(k) - omega_0)
                .collect(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.detunings.len()
    }

    /// `phases[k] = exp(i (w_k - w_0) t)`.
    pub fn phases_into(&self, t: f64, phases: &mut [Complex64]) {
        for (p, &d) in phases.iter_mut().zip(&self.detunings) {
            let (s, c) = (d * t).sin_cos();
            *p = Complex64::new(c, s);
        }
    }

    /// `out = scale * V_I(t) * (psi + weight * incr)`, with `phases` taken at t.
    ///
    /// Passing `incr = None` applies V_I to `psi` alone.
    fn apply_into(
        &self,
        phases: &[Complex64],
        psi: &[Complex64],
        incr: Option<(&[Complex64], f64)>,
        scale: Complex64,
        out: &mut [Complex64],
    ) {
        let n = self.n_modes();
        let atom = 2 * n;
        let input = |j: usize| match incr {
            Some((k, w)) => psi[j] + k[j] * w,
            None => psi[j],
        };

        let mut overlap = Complex64::new(0.0, 0.0);
        for (m, p) in phases.iter().enumerate() {
            overlap += p.conj() * (input(m) + input(n + m));
        }
        let b = input(atom);

        let photon_factor = scale * (-I) * self.coupling * b;
        let (c1, rest) = out.split_at_mut(n);
        let (c2, tail) = rest.split_at_mut(n);
        for ((o1, o2), p) in c1.iter_mut().zip(c2.iter_mut()).zip(phases) {
            let v = photon_factor * p;
            *o1 = v;
            *o2 = v;
        }
        tail[0] = scale * I * self.coupling * overlap;
    }
}

/// `V_I(t) |psi>`.
pub fn apply_interaction(
    state: &SingleExcitationState,
    t: f64,
    config: &SimulationConfig,
    grid: &MomentumGrid,
) -> Result<SingleExcitationState> {
    state.check_grid(grid)?;
    let kernel = InteractionKernel::new(config, grid);
    let mut phases = vec![Complex64::new(0.0, 0.0); grid.len()];
    kernel.phases_into(t, &mut phases);
    let mut out = vec![Complex64::new(0.0, 0.0); state.dim()];
    kernel.apply_into(
        &phases,
        state.amplitudes(),
        None,
        Complex64::new(1.0, 0.0),
        &mut out,
    );
    SingleExcitationState::from_amplitudes(grid.len(), out)
}

/// Reusable RK4 integrator holding phase tables and stage buffers.
#[derive(Debug, Clone)]
pub struct Rk4Integrator {
    kernel: InteractionKernel,
    scheme: RkScheme,
    phase_start: Vec<Complex64>,
    phase_mid: Vec<Complex64>,
    phase_end: Vec<Complex64>,
    stages: [Vec<Complex64>; 4],
}

impl Rk4Integrator {
    pub fn new(config: &SimulationConfig, grid: &MomentumGrid, scheme: RkScheme) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        let n = grid.len();
        let dim = grid.state_dim();
        Self {
            kernel: InteractionKernel::new(config, grid),
            scheme,
            phase_start: vec![zero; n],
            phase_mid: vec![zero; n],
            phase_end: vec![zero; n],
            stages: std::array::from_fn(|_| vec![zero; dim]),
        }
    }

    /// Advances `psi` in place from `t` to `t + dt`.
    pub fn step(&mut self, psi: &mut [Complex64], t: f64, dt: f64) {
        self.kernel.phases_into(t, &mut self.phase_start);
        self.kernel.phases_into(t + 0.5 * dt, &mut self.phase_mid);
        self.kernel.phases_into(t + dt, &mut self.phase_end);
        self.step_with_phases(psi, dt);
    }

    fn step_with_phases(&mut self, psi: &mut [Complex64], dt: f64) {
        let scale = -I * dt;
        let w4 = self.scheme.final_stage_weight();
        let [k1, k2, k3, k4] = &mut self.stages;
        let kernel = &self.kernel;

        kernel.apply_into(&self.phase_start, psi, None, scale, k1);
        kernel.apply_into(&self.phase_mid, psi, Some((k1, 0.5)), scale, k2);
        kernel.apply_into(&self.phase_mid, psi, Some((k2, 0.5)), scale, k3);
        kernel.apply_into(&self.phase_end, psi, Some((k3, w4)), scale, k4);

        for (j, p) in psi.iter_mut().enumerate() {
            *p += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) / 6.0;
        }
    }
}

/// One classical RK4 step of `i d/dt psi = V_I(t) psi` from `t_n` to `t_n + dt`.
///
/// Negative `dt` integrates backwards in time.
pub fn rk4_step(
    state: &SingleExcitationState,
    t_n: f64,
    dt: f64,
    config: &SimulationConfig,
    grid: &MomentumGrid,
) -> Result<SingleExcitationState> {
    rk4_step_with(state, t_n, dt, config, grid, RkScheme::Classical)
}

pub fn rk4_step_with(
    state: &SingleExcitationState,
    t_n: f64,
    dt: f64,
    config: &SimulationConfig,
    grid: &MomentumGrid,
    scheme: RkScheme,
) -> Result<SingleExcitationState> {
    state.check_grid(grid)?;
    if !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be finite")));
    }
    let mut rk = Rk4Integrator::new(config, grid, scheme);
    let mut out = state.clone();
    rk.step(out.amplitudes_mut(), t_n, dt);
    Ok(out)
}

/// Runs `tgrid.n_steps()` RK4 steps from t = 0, calling `observe(n, t_n, psi_n)`
/// for every n including 0. Aborts on the first non-finite state.
pub fn propagate_observed<F>(
    state0: &SingleExcitationState,
    tgrid: &TimeGrid,
    config: &SimulationConfig,
    grid: &MomentumGrid,
    scheme: RkScheme,
    mut observe: F,
) -> Result<SingleExcitationState>
where
    F: FnMut(usize, f64, &SingleExcitationState),
{
    state0.check_grid(grid)?;
    let mut rk = Rk4Integrator::new(config, grid, scheme);
    let mut psi = state0.clone();
    let dt = tgrid.dt();
    observe(0, 0.0, &psi);
    if tgrid.n_steps() == 0 {
        return Ok(psi);
    }

    rk.kernel.phases_into(0.0, &mut rk.phase_start);
    for n in 0..tgrid.n_steps() {
        let t = tgrid.time(n);
        let t_next = tgrid.time(n + 1);
        rk.kernel.phases_into(t + 0.5 * dt, &mut rk.phase_mid);
        rk.kernel.phases_into(t_next, &mut rk.phase_end);
        rk.step_with_phases(psi.amplitudes_mut(), dt);
        std::mem::swap(&mut rk.phase_start, &mut rk.phase_end);

        let norm_sqr = psi.norm_sqr();
        if !norm_sqr.is_finite() {
            return Err(Error::NonFinite {
                step: n + 1,
                norm: norm_sqr.sqrt(),
            });
        }
        observe(n + 1, t_next, &psi);
    }
    Ok(psi)
}

pub fn propagate(
    state0: &SingleExcitationState,
    tgrid: &TimeGrid,
    config: &SimulationConfig,
    grid: &MomentumGrid,
    options: &PropagateOptions,
) -> Result<Trajectory> {
    let last = tgrid.n_steps();
    let cadence = options.record_every.map(|m| m.max(1));
    let mut points = Vec::with_capacity(match cadence {
        Some(m) => last / m + 2,
        None => 2,
    });
    let final_state =
        propagate_observed(state0, tgrid, config, grid, options.scheme, |n, t, psi| {
            let keep = n == 0 || n == last || cadence.is_some_and(|m| n % m == 0);
            if keep {
                points.push(TrajectoryPoint {
                    t,
                    probs: excitation_probs(psi),
                    norm_sqr: psi.norm_sqr(),
                });
            }
        })?;
    Ok(Trajectory {
        points,
        final_state,
    })
}
