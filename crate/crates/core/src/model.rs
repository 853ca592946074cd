//! Run parameters, the cutoff-restricted momentum grid and the size of the
//! numerical Hilbert space.
//!
//! Natural units throughout: hbar = v_g = 1 and omega_k = k, so momenta and
//! angular frequencies are interchangeable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice points n*2pi/L closer than this (relative) to a cutoff count as
/// lying on it. Keeps windows like [0, 20pi] with L = 100 from losing their
/// endpoint mode to rounding in `20pi * 100 / 2pi`.
const LATTICE_SNAP: f64 = 1e-9;

/// Closed frequency interval `[lambda_ir, lambda_uv]` of retained photon modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyWindow {
    lambda_ir: f64,
    lambda_uv: f64,
}

impl FrequencyWindow {
    pub fn new(lambda_ir: f64, lambda_uv: f64) -> Result<Self> {
        if !(lambda_ir.is_finite() && lambda_uv.is_finite()) {
            return Err(Error::InvalidParameter("cutoffs must be finite".into()));
        }
        if lambda_ir < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda_ir = {lambda_ir} must be >= 0"
            )));
        }
        if lambda_ir >= lambda_uv {
            return Err(Error::InvalidParameter(format!(
                "lambda_ir = {lambda_ir} must be < lambda_uv = {lambda_uv}"
            )));
        }
        Ok(Self {
            lambda_ir,
            lambda_uv,
        })
    }

    /// Window `[center - half_width, center + half_width]`.
    pub fn centered(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn lambda_ir(&self) -> f64 {
        self.lambda_ir
    }

    pub fn lambda_uv(&self) -> f64 {
        self.lambda_uv
    }

    pub fn bandwidth(&self) -> f64 {
        self.lambda_uv - self.lambda_ir
    }

    pub fn contains(&self, omega: f64) -> bool {
        omega >= self.lambda_ir && omega <= self.lambda_uv
    }

    pub fn contains_strictly(&self, omega: f64) -> bool {
        omega > self.lambda_ir && omega < self.lambda_uv
    }

    /// Distances `(omega - lambda_ir, lambda_uv - omega)` to the two cutoffs.
    pub fn distances(&self, omega: f64) -> (f64, f64) {
        (omega - self.lambda_ir, self.lambda_uv - omega)
    }
}

/// Parameter pair that fixes a Lorentzian line: a center frequency and a
/// full width. Both sides of the renormalization map are resonances.
pub trait Resonance {
    fn center(&self) -> f64;
    fn width(&self) -> f64;
}

/// Model-defined TLS parameters entering the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BareParams {
    pub omega_0: f64,
    pub gamma: f64,
}

impl BareParams {
    /// `gamma = 0` is accepted and decouples the atom from the waveguide.
    pub fn new(omega_0: f64, gamma: f64) -> Result<Self> {
        if !(omega_0.is_finite() && omega_0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega_0 = {omega_0} must be finite and > 0"
            )));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must be finite and >= 0"
            )));
        }
        Ok(Self { omega_0, gamma })
    }
}

impl Resonance for BareParams {
    fn center(&self) -> f64 {
        self.omega_0
    }

    fn width(&self) -> f64 {
        self.gamma
    }
}

/// Observable (renormalized) TLS frequency and decay rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_a: f64,
    pub gamma_phys: f64,
}

impl PhysicalParams {
    pub fn new(omega_a: f64, gamma_phys: f64) -> Result<Self> {
        if !omega_a.is_finite() {
            return Err(Error::InvalidParameter("omega_A must be finite".into()));
        }
        if !(gamma_phys.is_finite() && gamma_phys > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gamma = {gamma_phys} must be finite and > 0"
            )));
        }
        Ok(Self {
            omega_a,
            gamma_phys,
        })
    }
}

impl Resonance for PhysicalParams {
    fn center(&self) -> f64 {
        self.omega_a
    }

    fn width(&self) -> f64 {
        self.gamma_phys
    }
}

/// Everything that defines the discretized model for one run.
///
/// Serialized as a flat JSON object with keys `L`, `lambda_ir`, `lambda_uv`,
/// `omega_0` and `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigRepr", into = "ConfigRepr")]
pub struct SimulationConfig {
    length: f64,
    window: FrequencyWindow,
    bare: BareParams,
}

impl SimulationConfig {
    pub fn new(length: f64, window: FrequencyWindow, bare: BareParams) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L = {length} must be finite and > 0"
            )));
        }
        if !window.contains_strictly(bare.omega_0) {
            return Err(Error::OutsideWindow {
                omega_0: bare.omega_0,
                lambda_ir: window.lambda_ir(),
                lambda_uv: window.lambda_uv(),
            });
        }
        let config = Self {
            length,
            window,
            bare,
        };
        lattice_range(&config)?;
        Ok(config)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn window(&self) -> FrequencyWindow {
        self.window
    }

    pub fn bare(&self) -> BareParams {
        self.bare
    }

    /// Group velocity, fixed by convention.
    pub fn group_velocity(&self) -> f64 {
        1.0
    }

    /// Linear dispersion omega_k = k.
    pub fn dispersion(&self, k: f64) -> f64 {
        k
    }

    pub fn with_window(&self, window: FrequencyWindow) -> Result<Self> {
        Self::new(self.length, window, self.bare)
    }

    pub fn with_bare(&self, bare: BareParams) -> Result<Self> {
        Self::new(self.length, self.window, bare)
    }

    /// Atom-photon coupling sqrt(gamma / 2L) of the discretized Hamiltonian.
    pub fn coupling(&self) -> f64 {
        (self.bare.gamma / (2.0 * self.length)).sqrt()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRepr {
    #[serde(rename = "L")]
    length: f64,
    lambda_ir: f64,
    lambda_uv: f64,
    omega_0: f64,
    gamma: f64,
}

impl TryFrom<ConfigRepr> for SimulationConfig {
    type Error = Error;

    fn try_from(r: ConfigRepr) -> Result<Self> {
        let window = FrequencyWindow::new(r.lambda_ir, r.lambda_uv)?;
        let bare = BareParams::new(r.omega_0, r.gamma)?;
        SimulationConfig::new(r.length, window, bare)
    }
}

impl From<SimulationConfig> for ConfigRepr {
    fn from(c: SimulationConfig) -> Self {
        ConfigRepr {
            length: c.length,
            lambda_ir: c.window.lambda_ir,
            lambda_uv: c.window.lambda_uv,
            omega_0: c.bare.omega_0,
            gamma: c.bare.gamma,
        }
    }
}

/// Quantized momenta k = n*2pi/L retained by the cutoffs, shared by both
/// propagation channels.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    length: f64,
    window: FrequencyWindow,
    n_indices: Vec<i64>,
    momenta: Vec<f64>,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn n_indices(&self) -> &[i64] {
        &self.n_indices
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn window(&self) -> FrequencyWindow {
        self.window
    }

    /// Length of the N = 1 state vector: two channels plus the atom.
    pub fn state_dim(&self) -> usize {
        2 * self.len() + 1
    }

    /// Index of the grid momentum closest to `k`.
    pub fn nearest_index(&self, k: f64) -> usize {
        let n = (k / self.spacing()).round() as i64;
        (n - self.n_indices[0]).clamp(0, self.len() as i64 - 1) as usize
    }
}

fn snap_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= LATTICE_SNAP * x.abs().max(1.0) {
        r as i64
    } else {
        x.ceil() as i64
    }
}

fn snap_floor(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= LATTICE_SNAP * x.abs().max(1.0) {
        r as i64
    } else {
        x.floor() as i64
    }
}

fn lattice_range(config: &SimulationConfig) -> Result<(i64, i64)> {
    let scale = config.length / (2.0 * PI);
    let lo = snap_ceil(config.window.lambda_ir * scale);
    let hi = snap_floor(config.window.lambda_uv * scale);
    if hi < lo {
        return Err(Error::EmptyGrid {
            length: config.length,
            lambda_ir: config.window.lambda_ir,
            lambda_uv: config.window.lambda_uv,
        });
    }
    Ok((lo, hi))
}

/// All k = n*2pi/L with ceil(lambda_ir*L/2pi) <= n <= floor(lambda_uv*L/2pi).
/// Both cutoffs are inclusive.
pub fn build_grid(config: &SimulationConfig) -> Result<MomentumGrid> {
    let (lo, hi) = lattice_range(config)?;
    let spacing = 2.0 * PI / config.length;
    let n_indices: Vec<i64> = (lo..=hi).collect();
    let momenta = n_indices.iter().map(|&n| n as f64 * spacing).collect();
    Ok(MomentumGrid {
        length: config.length,
        window: config.window,
        n_indices,
        momenta,
    })
}

/// Hilbert-space size for a fixed excitation number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HilbertDim {
    /// `(2 * floor(L/2pi * (lambda_uv - lambda_ir)))^N + 1`.
    pub formula: u128,
    /// Actual N = 1 state length `2 * |grid| + 1`; `None` for N >= 2.
    pub state_len: Option<usize>,
}

pub fn hilbert_dim(config: &SimulationConfig, n_excitations: u32) -> Result<HilbertDim> {
    if n_excitations == 0 {
        return Err(Error::InvalidParameter("n_excitations must be >= 1".into()));
    }
    let grid = build_grid(config)?;
    let per_channel =
        snap_floor(config.length / (2.0 * PI) * config.window.bandwidth()).max(0) as u128;
    let formula = (2 * per_channel)
        .checked_pow(n_excitations)
        .and_then(|d| d.checked_add(1))
        .ok_or_else(|| Error::InvalidParameter("dimension overflows u128".into()))?;
    let state_len = (n_excitations == 1).then(|| grid.state_dim());
    Ok(HilbertDim { formula, state_len })
}
