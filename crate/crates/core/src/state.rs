//! Single-excitation states and initial conditions.
//!
//! Amplitudes live in one contiguous buffer: channel 1 in ascending k,
//! then channel 2 in ascending k, then the atomic amplitude `b`.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MomentumGrid;

/// Propagation channel of a photon: 1 is right-moving, 2 is left-moving.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Channel {
    Forward,
    Backward,
}

impl Channel {
    fn offset(self, n_modes: usize) -> usize {
        match self {
            Channel::Forward => 0,
            Channel::Backward => n_modes,
        }
    }
}

impl TryFrom<u8> for Channel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Channel::Forward),
            2 => Ok(Channel::Backward),
            _ => Err(Error::InvalidParameter(format!(
                "channel must be 1 or 2, got {v}"
            ))),
        }
    }
}

impl From<Channel> for u8 {
    fn from(c: Channel) -> u8 {
        match c {
            Channel::Forward => 1,
            Channel::Backward => 2,
        }
    }
}

/// `sum_{alpha,k} c_{alpha k} |alpha k, g> + b |0, e>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    n_modes: usize,
    amps: Vec<Complex64>,
}

impl SingleExcitationState {
    pub fn zeros(grid: &MomentumGrid) -> Self {
        Self {
            n_modes: grid.len(),
            amps: vec![Complex64::new(0.0, 0.0); grid.state_dim()],
        }
    }

    /// Builds a state from a flat amplitude vector of length `2 * n_modes + 1`.
    pub fn from_amplitudes(n_modes: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 2 * n_modes + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * n_modes + 1,
                found: amps.len(),
            });
        }
        Ok(Self { n_modes, amps })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Photon amplitudes of one channel, ascending in k.
    pub fn channel(&self, channel: Channel) -> &[Complex64] {
        let o = channel.offset(self.n_modes);
        &self.amps[o..o + self.n_modes]
    }

    pub fn channel_mut(&mut self, channel: Channel) -> &mut [Complex64] {
        let o = channel.offset(self.n_modes);
        &mut self.amps[o..o + self.n_modes]
    }

    /// All photon amplitudes, both channels.
    pub fn photons(&self) -> &[Complex64] {
        &self.amps[..2 * self.n_modes]
    }

    pub fn atom(&self) -> Complex64 {
        self.amps[2 * self.n_modes]
    }

    pub fn set_atom(&mut self, b: Complex64) {
        self.amps[2 * self.n_modes] = b;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / n;
        Ok(Self {
            n_modes: self.n_modes,
            amps: self.amps.iter().map(|a| a * inv).collect(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2` for normalized states.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    pub fn check_grid(&self, grid: &MomentumGrid) -> Result<()> {
        self.check_dim(grid.state_dim())
    }

    fn check_dim(&self, expected: usize) -> Result<()> {
        if self.amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.amps.len(),
            });
        }
        Ok(())
    }

    /// Debug snapshot: `channel,k,re,im` rows, then `atom,0,re(b),im(b)`.
    pub fn write_csv<W: Write>(&self, grid: &MomentumGrid, mut out: W) -> io::Result<()> {
        writeln!(out, "channel,k,re,im")?;
        for channel in [Channel::Forward, Channel::Backward] {
            let label = u8::from(channel);
            for (k, c) in grid.momenta().iter().zip(self.channel(channel)) {
                writeln!(out, "{label},{k},{},{}", c.re, c.im)?;
            }
        }
        let b = self.atom();
        writeln!(out, "atom,0,{},{}", b.re, b.im)
    }
}

/// Gaussian single-photon packet in momentum space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavepacketSpec {
    /// Central momentum, equal to the carrier frequency omega_p.
    pub k_p: f64,
    /// Standard deviation of |c_k|^2 in momentum space.
    pub delta_k: f64,
    /// Initial position of the packet center.
    pub x_0: f64,
    #[serde(default = "default_channel")]
    pub channel: Channel,
}

fn default_channel() -> Channel {
    Channel::Forward
}

impl WavepacketSpec {
    pub fn new(k_p: f64, delta_k: f64, x_0: f64) -> Self {
        Self {
            k_p,
            delta_k,
            x_0,
            channel: Channel::Forward,
        }
    }
}

/// `c_{alpha k} ~ delta_{alpha,channel} exp[-(k - k_p)^2 / (4 dk^2) - i k x_0]`,
/// normalized on the discrete grid.
pub fn init_gaussian(grid: &MomentumGrid, spec: &WavepacketSpec) -> Result<SingleExcitationState> {
    if !(spec.delta_k.is_finite() && spec.delta_k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "delta_k = {} must be > 0",
            spec.delta_k
        )));
    }
    if !spec.x_0.is_finite() || !grid.window().contains(spec.k_p) {
        return Err(Error::InvalidParameter(format!(
            "k_p = {} must lie in [{}, {}]",
            spec.k_p,
            grid.window().lambda_ir(),
            grid.window().lambda_uv()
        )));
    }
    let mut state = SingleExcitationState::zeros(grid);
    let inv_var = 1.0 / (4.0 * spec.delta_k * spec.delta_k);
    for (c, &k) in state
        .channel_mut(spec.channel)
        .iter_mut()
        .zip(grid.momenta())
    {
        let d = k - spec.k_p;
        *c = Complex64::from_polar((-d * d * inv_var).exp(), -k * spec.x_0);
    }
    state.normalize().map_err(|_| Error::PacketOutsideWindow)
}

/// The bare excited atom `|0, e>`.
pub fn atom_excited_state(grid: &MomentumGrid) -> SingleExcitationState {
    let mut state = SingleExcitationState::zeros(grid);
    state.set_atom(Complex64::new(1.0, 0.0));
    state
}
