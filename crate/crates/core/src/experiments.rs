//! Named numerical experiments: scattering runs, parameter sweeps, atomic
//! decay fits and step-count convergence studies.
//!
//! Sweep rows and convergence cells are independent and run on the rayon
//! pool when the `parallel` feature is enabled. Results are always returned
//! in input order.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::model::{build_grid, hilbert_dim};
use crate::observables::lorentzian_reflection;
use crate::propagator::{propagate, propagate_observed};
use crate::renorm::{bare_from_physical, renormalize, RenormReport};
use crate::state::{atom_excited_state, init_gaussian};

pub use crate::error::{Error, Result};
pub use crate::model::{BareParams, FrequencyWindow, HilbertDim, PhysicalParams, SimulationConfig};
pub use crate::observables::ScatteringRecord;
pub use crate::propagator::{PropagateOptions, RkScheme, TimeGrid, Trajectory};
pub use crate::state::{Channel, SingleExcitationState, WavepacketSpec};

/// Final atomic population above which a run counts as not relaxed.
pub const RELAXATION_THRESHOLD: f64 = 1e-3;
/// Relative band of the convergence verdict.
pub const CONVERGENCE_BAND: f64 = 0.05;
/// Norm-squared deviation treated as numerical divergence.
pub const DIVERGENCE_NORM_DEVIATION: f64 = 0.05;
/// RMS log-amplitude residual above which a decay is flagged non-exponential.
pub const DECAY_RESIDUAL_THRESHOLD: f64 = 1e-2;

/// Sets the size of the global worker pool. Has no effect without the
/// `parallel` feature, and fails if the pool was already initialized.
pub fn configure_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("thread count must be >= 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(())
}

fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Renormalization annotation attached to every artifact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Provenance {
    pub config: SimulationConfig,
    pub n_modes: usize,
    pub omega_a: Option<f64>,
    pub gamma_phys: Option<f64>,
    pub f_factor: Option<f64>,
    pub harmonic_mean: f64,
    pub valid: bool,
}

impl Provenance {
    pub fn of(config: &SimulationConfig) -> Result<Self> {
        let grid = build_grid(config)?;
        let window = config.window();
        let report = renormalize(&config.bare(), &window).ok();
        Ok(Self {
            config: *config,
            n_modes: grid.len(),
            omega_a: report.map(|r| r.physical.omega_a),
            gamma_phys: report.map(|r| r.physical.gamma_phys),
            f_factor: report.map(|r| r.f_factor),
            harmonic_mean: crate::renorm::harmonic_mean(
                config.bare().omega_0 - window.lambda_ir(),
                window.lambda_uv() - config.bare().omega_0,
            )?,
            valid: report.is_some(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridInfo {
    pub n_modes: usize,
    pub spacing: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_excitations: u32,
    pub hilbert_dim: HilbertDim,
}

/// Size of the discretized problem for `config`.
pub fn grid_info(config: &SimulationConfig, n_excitations: u32) -> Result<GridInfo> {
    let grid = build_grid(config)?;
    let k = grid.momenta();
    Ok(GridInfo {
        n_modes: grid.len(),
        spacing: grid.spacing(),
        k_min: k[0],
        k_max: k[k.len() - 1],
        n_excitations,
        hilbert_dim: hilbert_dim(config, n_excitations)?,
    })
}

/// State snapshot CSV (`channel,k,re,im` plus a final atom row).
pub fn write_state_csv<W: Write>(
    config: &SimulationConfig,
    state: &SingleExcitationState,
    out: W,
) -> Result<()> {
    let grid = build_grid(config)?;
    state.check_grid(&grid)?;
    state
        .write_csv(&grid, out)
        .map_err(|e| Error::InvalidParameter(format!("writing state: {e}")))
}

pub fn run_scattering(
    config: &SimulationConfig,
    packet: &WavepacketSpec,
    tgrid: &TimeGrid,
) -> Result<ScatteringRecord> {
    run_scattering_with(config, packet, tgrid, &PropagateOptions::default())
}

/// Prepares the packet in channel 1, propagates, and reports the final
/// `(R, T, A)`. Logs a warning when the atom has not relaxed.
pub fn run_scattering_with(
    config: &SimulationConfig,
    packet: &WavepacketSpec,
    tgrid: &TimeGrid,
    options: &PropagateOptions,
) -> Result<ScatteringRecord> {
    if packet.channel != Channel::Forward {
        return Err(Error::ChannelTwoOccupied);
    }
    let grid = build_grid(config)?;
    let psi0 = init_gaussian(&grid, packet)?;
    let record =
        ScatteringRecord::from_trajectory(propagate(&psi0, tgrid, config, &grid, options)?);
    if record.final_a > RELAXATION_THRESHOLD {
        log::warn!(
            "atom not relaxed at T = {}: A = {:.3e} (increase T)",
            tgrid.total(),
            record.final_a
        );
    }
    Ok(record)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Packet carrier frequency.
    OmegaP,
    /// Upper cutoff; the lower cutoff and bare parameters stay fixed.
    LambdaUv,
    /// RK4 step count at fixed total time.
    NSteps,
    /// Half-width of a window centered on the physical frequency. The
    /// physical parameters of the base config are held fixed and the bare
    /// parameters are re-derived for each value.
    HalfWidth,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::OmegaP => "omega_p",
            SweepVariable::LambdaUv => "lambda_uv",
            SweepVariable::NSteps => "n_steps",
            SweepVariable::HalfWidth => "half_width",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub base_config: SimulationConfig,
    pub packet: WavepacketSpec,
    pub tgrid: TimeGrid,
    pub options: PropagateOptions,
}

impl SweepSpec {
    pub fn new(
        variable: SweepVariable,
        values: Vec<f64>,
        base_config: SimulationConfig,
        packet: WavepacketSpec,
        tgrid: TimeGrid,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "sweep needs at least one value".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sweep value {v} is not finite"
            )));
        }
        Ok(Self {
            variable,
            values,
            base_config,
            packet,
            tgrid,
            options: PropagateOptions {
                record_every: None,
                ..PropagateOptions::default()
            },
        })
    }

    /// Config, packet and time grid of the row with the given value.
    pub fn resolve(&self, value: f64) -> Result<(SimulationConfig, WavepacketSpec, TimeGrid)> {
        let mut config = self.base_config;
        let mut packet = self.packet;
        let mut tgrid = self.tgrid;
        match self.variable {
            SweepVariable::OmegaP => packet.k_p = value,
            SweepVariable::LambdaUv => {
                let ir = config.window().lambda_ir();
                config = config.with_window(FrequencyWindow::new(ir, value)?)?;
            }
            SweepVariable::NSteps => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "n_steps = {value} must be a positive integer"
                    )));
                }
                tgrid = TimeGrid::new(tgrid.total(), value as usize)?;
            }
            SweepVariable::HalfWidth => {
                let phys = renormalize(&config.bare(), &config.window())?.physical;
                let (bare, window) = bare_from_physical(&phys, value)?;
                config = SimulationConfig::new(config.length(), window, bare)?;
            }
        }
        Ok((config, packet, tgrid))
    }
}

/// Outcome of one sweep row. `error` is set, and the numbers are NaN, when
/// the row failed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub omega_p: f64,
    pub r_sim: f64,
    pub t_sim: f64,
    pub a_final: f64,
    /// Lorentzian with the bare parameters.
    pub r_th_bare: f64,
    /// Lorentzian with the renormalized parameters; NaN outside the valid region.
    pub r_phys: f64,
    pub error: Option<String>,
    /// The row aborted on a non-finite state.
    pub diverged: bool,
}

impl SweepRow {
    fn failed(value: f64, omega_p: f64, err: &Error) -> Self {
        Self {
            value,
            omega_p,
            r_sim: f64::NAN,
            t_sim: f64::NAN,
            a_final: f64::NAN,
            r_th_bare: f64::NAN,
            r_phys: f64::NAN,
            error: Some(err.to_string()),
            diverged: matches!(err, Error::NonFinite { .. }),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// `omega_p,R_sim,R_th_bare,R_phys`; other sweep variables get their own
    /// leading column.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.variable == SweepVariable::OmegaP {
            writeln!(out, "omega_p,R_sim,R_th_bare,R_phys")?;
        } else {
            writeln!(
                out,
                "{},omega_p,R_sim,R_th_bare,R_phys",
                self.variable.name()
            )?;
        }
        for r in &self.rows {
            if self.variable != SweepVariable::OmegaP {
                write!(out, "{},", r.value)?;
            }
            writeln!(
                out,
                "{},{},{},{}",
                r.omega_p, r.r_sim, r.r_th_bare, r.r_phys
            )?;
        }
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| !r.is_ok())
    }

    pub fn any_diverged(&self) -> bool {
        self.rows.iter().any(|r| r.diverged)
    }
}

fn sweep_row(spec: &SweepSpec, value: f64) -> SweepRow {
    let omega_p = if spec.variable == SweepVariable::OmegaP {
        value
    } else {
        spec.packet.k_p
    };
    let run = || -> Result<SweepRow> {
        let (config, packet, tgrid) = spec.resolve(value)?;
        let rec = run_scattering_with(&config, &packet, &tgrid, &spec.options)?;
        let r_phys = renormalize(&config.bare(), &config.window())
            .map(|rep| lorentzian_reflection(packet.k_p, &rep.physical))
            .unwrap_or(f64::NAN);
        Ok(SweepRow {
            value,
            omega_p: packet.k_p,
            r_sim: rec.final_r,
            t_sim: rec.final_t,
            a_final: rec.final_a,
            r_th_bare: lorentzian_reflection(packet.k_p, &config.bare()),
            r_phys,
            error: None,
            diverged: false,
        })
    };
    run().unwrap_or_else(|e| {
        log::warn!("sweep row {} = {value} failed: {e}", spec.variable.name());
        SweepRow::failed(value, omega_p, &e)
    })
}

/// Runs every row; a failing row is recorded and the sweep continues.
pub fn sweep(spec: &SweepSpec) -> SweepTable {
    SweepTable {
        variable: spec.variable,
        rows: map_ordered(&spec.values, |&v| sweep_row(spec, v)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub omega_a_fit: f64,
    pub gamma_fit: f64,
    pub fit_window: (f64, f64),
    /// RMS deviation of `ln|b|` from the fitted line.
    pub residual: f64,
    pub n_samples: usize,
    /// `residual` is below [`DECAY_RESIDUAL_THRESHOLD`].
    pub exponential: bool,
    /// Analytic prediction; `None` outside the valid region.
    pub predicted: Option<RenormReport>,
}

impl DecayFit {
    pub fn shift(&self, omega_0: f64) -> f64 {
        self.omega_a_fit - omega_0
    }
}

/// Default `[0.1 T, 0.8 min(T, L/2)]`.
pub fn default_fit_window(config: &SimulationConfig, tgrid: &TimeGrid) -> (f64, f64) {
    let t = tgrid.total();
    (0.1 * t, 0.8 * t.min(config.length() / 2.0))
}

fn check_fit_window(
    config: &SimulationConfig,
    tgrid: &TimeGrid,
    (t0, t1): (f64, f64),
) -> Result<()> {
    let min_start = 5.0 / config.window().bandwidth();
    let revival = config.length() / 2.0;
    if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
        return Err(Error::FitWindow(format!("[{t0}, {t1}] is empty")));
    }
    if t0 < min_start {
        return Err(Error::FitWindow(format!(
            "t_start = {t0} is inside the initial transient (needs >= {min_start})"
        )));
    }
    if t1 >= revival {
        return Err(Error::FitWindow(format!(
            "t_end = {t1} reaches the finite-size revival at L/2 = {revival}"
        )));
    }
    if t1 > tgrid.total() {
        return Err(Error::FitWindow(format!(
            "t_end = {t1} exceeds T = {}",
            tgrid.total()
        )));
    }
    Ok(())
}

/// `(slope, intercept, rms residual)` of a least-squares line.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Starts from `|0,e>` and fits `b_S(t) = exp(-i omega_A t - Gamma t / 2)`
/// over the fit window: a line through `ln|b|` gives `Gamma`, a line through
/// the unwrapped phase gives `omega_A`.
pub fn decay_experiment(
    config: &SimulationConfig,
    tgrid: &TimeGrid,
    fit_window: Option<(f64, f64)>,
) -> Result<DecayFit> {
    let window = fit_window.unwrap_or_else(|| default_fit_window(config, tgrid));
    check_fit_window(config, tgrid, window)?;
    let grid = build_grid(config)?;
    let omega_0 = config.bare().omega_0;

    let mut times = Vec::new();
    let mut log_amp = Vec::new();
    let mut phase = Vec::new();
    let mut last_arg: Option<f64> = None;
    let mut unwrapped = 0.0;
    propagate_observed(
        &atom_excited_state(&grid),
        tgrid,
        config,
        &grid,
        RkScheme::Classical,
        |_, t, psi| {
            // interaction picture: arg b_S = arg b_I - omega_0 t
            let b = psi.atom();
            let arg = b.arg();
            unwrapped += match last_arg {
                Some(prev) => {
                    let d = arg - prev;
                    d - std::f64::consts::TAU * (d / std::f64::consts::TAU).round()
                }
                None => arg,
            };
            last_arg = Some(arg);
            if t >= window.0 && t <= window.1 {
                times.push(t);
                log_amp.push(b.norm().ln());
                phase.push(unwrapped);
            }
        },
    )?;

    if times.len() < 8 {
        return Err(Error::FitWindow(format!(
            "only {} samples inside [{}, {}]; refine the time grid",
            times.len(),
            window.0,
            window.1
        )));
    }
    let (amp_slope, _, residual) = linear_fit(&times, &log_amp);
    let (phase_slope, _, _) = linear_fit(&times, &phase);
    let fit = DecayFit {
        omega_a_fit: omega_0 - phase_slope,
        gamma_fit: -2.0 * amp_slope,
        fit_window: window,
        residual,
        n_samples: times.len(),
        exponential: residual < DECAY_RESIDUAL_THRESHOLD,
        predicted: renormalize(&config.bare(), &config.window()).ok(),
    };
    if !fit.exponential {
        log::warn!("decay is not exponential over the fit window: residual {residual:.3e}");
    }
    if fit.gamma_fit.is_nan() || fit.gamma_fit <= 0.0 {
        log::warn!("fitted decay rate {} is not positive", fit.gamma_fit);
    }
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSpec {
    pub physical: PhysicalParams,
    pub half_widths: Vec<f64>,
    pub omega_p_list: Vec<f64>,
    pub n_steps_list: Vec<usize>,
    pub length: f64,
    pub total_time: f64,
    pub delta_k: f64,
    pub x_0: f64,
}

impl ConvergenceSpec {
    /// `L = 100`, `T = 50`, `delta_k = 0.05 pi`, `x_0 = -L/4`.
    pub fn new(
        physical: PhysicalParams,
        half_widths: Vec<f64>,
        omega_p_list: Vec<f64>,
        n_steps_list: Vec<usize>,
    ) -> Self {
        Self {
            physical,
            half_widths,
            omega_p_list,
            n_steps_list,
            length: 100.0,
            total_time: 50.0,
            delta_k: 0.05 * std::f64::consts::PI,
            x_0: -25.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.half_widths.is_empty()
            || self.omega_p_list.is_empty()
            || self.n_steps_list.is_empty()
        {
            return Err(Error::InvalidParameter(
                "half_widths, omega_p_list and n_steps_list must be non-empty".into(),
            ));
        }
        if self.n_steps_list.contains(&0) {
            return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
        }
        for &lam in &self.half_widths {
            let lo = self.physical.omega_a - lam;
            let hi = self.physical.omega_a + lam;
            if let Some(w) = self.omega_p_list.iter().find(|&&w| !(w > lo && w < hi)) {
                return Err(Error::InvalidParameter(format!(
                    "omega_p = {w} is outside the window [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCell {
    pub half_width: f64,
    pub omega_p: f64,
    pub n_steps: usize,
    pub bare_gamma: f64,
    pub r_sim: f64,
    pub r_phys: f64,
    pub norm_sqr: f64,
    pub within_band: bool,
    pub diverged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceSummary {
    pub half_width: f64,
    /// Smallest step count from which every `omega_p` stays inside the band
    /// for all larger step counts in the list.
    pub min_converged_n_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub cells: Vec<ConvergenceCell>,
    pub summary: Vec<ConvergenceSummary>,
}

impl ConvergenceTable {
    /// `half_width,omega_p,n_steps,R_sim,R_phys,within_band,diverged`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "half_width,omega_p,n_steps,R_sim,R_phys,within_band,diverged"
        )?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.half_width, c.omega_p, c.n_steps, c.r_sim, c.r_phys, c.within_band, c.diverged
            )?;
        }
        Ok(())
    }

    pub fn any_diverged(&self) -> bool {
        self.cells.iter().any(|c| c.diverged)
    }
}

fn convergence_cell(
    spec: &ConvergenceSpec,
    half_width: f64,
    omega_p: f64,
    n_steps: usize,
) -> ConvergenceCell {
    let r_phys = lorentzian_reflection(omega_p, &spec.physical);
    let mut cell = ConvergenceCell {
        half_width,
        omega_p,
        n_steps,
        bare_gamma: f64::NAN,
        r_sim: f64::NAN,
        r_phys,
        norm_sqr: f64::NAN,
        within_band: false,
        diverged: false,
        error: None,
    };
    let run = |cell: &mut ConvergenceCell| -> Result<()> {
        let (bare, window) = bare_from_physical(&spec.physical, half_width)?;
        cell.bare_gamma = bare.gamma;
        let config = SimulationConfig::new(spec.length, window, bare)?;
        let tgrid = TimeGrid::new(spec.total_time, n_steps)?;
        let packet = WavepacketSpec::new(omega_p, spec.delta_k, spec.x_0);
        let options = PropagateOptions {
            record_every: None,
            ..PropagateOptions::default()
        };
        let rec = run_scattering_with(&config, &packet, &tgrid, &options)?;
        cell.r_sim = rec.final_r;
        cell.norm_sqr = rec.final_r + rec.final_t + rec.final_a;
        Ok(())
    };
    match run(&mut cell) {
        Ok(()) => {
            cell.diverged = (cell.norm_sqr - 1.0).abs() > DIVERGENCE_NORM_DEVIATION;
            cell.within_band =
                !cell.diverged && (cell.r_sim - r_phys).abs() <= CONVERGENCE_BAND * r_phys;
        }
        Err(e) => {
            cell.diverged = matches!(e, Error::NonFinite { .. });
            cell.error = Some(e.to_string());
        }
    }
    if cell.diverged {
        log::warn!(
            "diverged: half_width = {half_width}, omega_p = {omega_p}, n_steps = {n_steps} (norm^2 = {})",
            cell.norm_sqr
        );
    }
    cell
}

/// Scans every `(half_width, omega_p, n_steps)` cell with the bare
/// parameters chosen so that the physical ones stay fixed.
pub fn convergence_study(spec: &ConvergenceSpec) -> Result<ConvergenceTable> {
    spec.validate()?;
    let mut n_list = spec.n_steps_list.clone();
    n_list.sort_unstable();
    n_list.dedup();

    let mut keys = Vec::new();
    for &lam in &spec.half_widths {
        for &w in &spec.omega_p_list {
            for &n in &n_list {
                keys.push((lam, w, n));
            }
        }
    }
    let cells = map_ordered(&keys, |&(lam, w, n)| convergence_cell(spec, lam, w, n));

    let summary = spec
        .half_widths
        .iter()
        .map(|&lam| {
            let ok_at = |n: usize| {
                cells
                    .iter()
                    .filter(|c| c.half_width == lam && c.n_steps == n)
                    .all(|c| c.within_band)
            };
            let mut min = None;
            for &n in n_list.iter().rev() {
                if !ok_at(n) {
                    break;
                }
                min = Some(n);
            }
            ConvergenceSummary {
                half_width: lam,
                min_converged_n_steps: min,
            }
        })
        .collect();
    Ok(ConvergenceTable { cells, summary })
}
