use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no momentum n*2pi/L lies in [{lambda_ir}, {lambda_uv}] for L = {length}")]
    EmptyGrid {
        length: f64,
        lambda_ir: f64,
        lambda_uv: f64,
    },

    #[error("state dimension {found} does not match grid dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("wavepacket has no weight inside the frequency window")]
    PacketOutsideWindow,

    #[error("initial state must occupy channel 1 only")]
    ChannelTwoOccupied,

    #[error("non-finite state at step {step} (norm = {norm})")]
    NonFinite { step: usize, norm: f64 },

    #[error("omega_0 = {omega_0} is not strictly inside ({lambda_ir}, {lambda_uv})")]
    OutsideWindow {
        omega_0: f64,
        lambda_ir: f64,
        lambda_uv: f64,
    },

    #[error("invalid renormalization region: gamma = {gamma} must be < pi*H = {bound}")]
    InvalidRegion { gamma: f64, bound: f64 },

    #[error("window [omega_A - half_width, omega_A + half_width] extends below zero (omega_A = {omega_a}, half_width = {half_width})")]
    WindowBelowZero { omega_a: f64, half_width: f64 },

    #[error("dense Hamiltonian needs {modes} modes, limit is {limit}")]
    SizeLimit { modes: usize, limit: usize },

    #[error("eigendecomposition failed: {0}")]
    Diagonalization(String),

    #[error("bad fit window: {0}")]
    FitWindow(String),
}
