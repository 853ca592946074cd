//! Bare <-> physical parameter map for a TLS coupled to a band-limited
//! waveguide.
//!
//! Expanding the memory kernel of the atomic amplitude in time derivatives,
//! `db/dt = sum_n alpha_n d^n b / dt^n`, and keeping `n <= 1` gives
//! `db/dt = alpha_0 / (1 - alpha_1) b`. With the closed forms
//!
//! ```text
//! alpha_0 = -gamma/2 + i gamma/(2 pi) ln((L_uv - w0) / (w0 - L_ir))
//! alpha_1 = gamma / (pi H),   H = harmonic mean of (w0 - L_ir, L_uv - w0)
//! ```
//!
//! the physical line is `Gamma = gamma f` and
//! `omega_A = omega_0 - gamma/(2 pi) f ln(...)` with `f = 1 / (1 - alpha_1)`.
//! `f > 0` requires `gamma < pi H`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BareParams, FrequencyWindow, PhysicalParams};

/// `2ab / (a + b)`.
pub fn harmonic_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "harmonic mean needs positive finite inputs, got ({a}, {b})"
        )));
    }
    Ok(2.0 * a * b / (a + b))
}

fn check_inside(bare: &BareParams, window: &FrequencyWindow) -> Result<()> {
    if !window.contains_strictly(bare.omega_0) {
        return Err(Error::OutsideWindow {
            omega_0: bare.omega_0,
            lambda_ir: window.lambda_ir(),
            lambda_uv: window.lambda_uv(),
        });
    }
    Ok(())
}

/// `ln((L_uv - w0) / (w0 - L_ir))`, a single division so centered windows give 0.
fn log_asymmetry(bare: &BareParams, window: &FrequencyWindow) -> f64 {
    let (below, above) = window.distances(bare.omega_0);
    (above / below).ln()
}

pub fn alpha0(bare: &BareParams, window: &FrequencyWindow) -> Result<Complex64> {
    check_inside(bare, window)?;
    Ok(Complex64::new(
        -bare.gamma / 2.0,
        bare.gamma / (2.0 * PI) * log_asymmetry(bare, window),
    ))
}

pub fn alpha1(bare: &BareParams, window: &FrequencyWindow) -> Result<f64> {
    check_inside(bare, window)?;
    let w0 = bare.omega_0;
    Ok(-bare.gamma / (2.0 * PI)
        * (1.0 / (window.lambda_ir() - w0) - 1.0 / (window.lambda_uv() - w0)))
}

/// `alpha_n = -i^{n-1} gamma / (2 pi n) [(L_ir - w0)^{-n} - (L_uv - w0)^{-n}]`
/// for `n >= 1`, i.e. the (n-1)-th derivative of alpha_1 from
/// `alpha_{n+1} = i/(n+1) d alpha_n / d omega_0`. `n = 0` returns alpha_0.
pub fn alpha_n(n: u32, bare: &BareParams, window: &FrequencyWindow) -> Result<Complex64> {
    if n == 0 {
        return alpha0(bare, window);
    }
    check_inside(bare, window)?;
    let w0 = bare.omega_0;
    let p = -(n as i32);
    let bracket = (window.lambda_ir() - w0).powi(p) - (window.lambda_uv() - w0).powi(p);
    let i_pow = Complex64::new(0.0, 1.0).powu(n - 1);
    Ok(-i_pow * (bare.gamma / (2.0 * PI * n as f64) * bracket))
}

/// Validity flag and the dimensionless margin `1 - gamma / (pi H)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Validity {
    pub valid: bool,
    pub margin: f64,
}

pub fn validity_check(bare: &BareParams, window: &FrequencyWindow) -> Result<Validity> {
    check_inside(bare, window)?;
    let (below, above) = window.distances(bare.omega_0);
    let h = harmonic_mean(below, above)?;
    Ok(Validity {
        valid: bare.gamma < PI * h,
        margin: 1.0 - bare.gamma / (PI * h),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenormReport {
    pub bare: BareParams,
    pub window: FrequencyWindow,
    pub physical: PhysicalParams,
    pub f_factor: f64,
    pub harmonic_mean: f64,
    pub valid: bool,
    /// `|alpha_2 / alpha_1|`, a size estimate for the dropped n >= 2 terms.
    pub alpha2_over_alpha1: f64,
}

/// Bare parameters and window to the physical `(omega_A, Gamma)`.
pub fn renormalize(bare: &BareParams, window: &FrequencyWindow) -> Result<RenormReport> {
    check_inside(bare, window)?;
    let (below, above) = window.distances(bare.omega_0);
    let h = harmonic_mean(below, above)?;
    let bound = PI * h;
    if bare.gamma.is_nan() || bare.gamma >= bound {
        return Err(Error::InvalidRegion {
            gamma: bare.gamma,
            bound,
        });
    }
    let f = 1.0 / (1.0 - bare.gamma / bound);
    let omega_a = bare.omega_0 - bare.gamma / (2.0 * PI) * f * log_asymmetry(bare, window);
    let gamma_phys = bare.gamma * f;
    let a1 = alpha1(bare, window)?;
    let a2 = alpha_n(2, bare, window)?;
    Ok(RenormReport {
        bare: *bare,
        window: *window,
        physical: PhysicalParams {
            omega_a,
            gamma_phys,
        },
        f_factor: f,
        harmonic_mean: h,
        valid: true,
        alpha2_over_alpha1: if a1 == 0.0 { 0.0 } else { a2.norm() / a1.abs() },
    })
}

/// Bare decay rate for a window of half-width `half_width` centered on omega_A:
/// `gamma = Gamma / (1 + Gamma / (pi half_width))`.
pub fn bare_gamma_for_half_width(gamma_phys: f64, half_width: f64) -> f64 {
    gamma_phys / (1.0 + gamma_phys / (PI * half_width))
}

/// Renormalization-consistent parameterization: window
/// `[omega_A - half_width, omega_A + half_width]`, `omega_0 = omega_A` and the
/// bare decay rate from [`bare_gamma_for_half_width`].
pub fn bare_from_physical(
    phys: &PhysicalParams,
    half_width: f64,
) -> Result<(BareParams, FrequencyWindow)> {
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "half_width = {half_width} must be > 0"
        )));
    }
    if phys.gamma_phys.is_nan() || phys.gamma_phys <= 0.0 {
        return Err(Error::InvalidParameter("Gamma must be > 0".into()));
    }
    if phys.omega_a - half_width < 0.0 {
        return Err(Error::WindowBelowZero {
            omega_a: phys.omega_a,
            half_width,
        });
    }
    let window = FrequencyWindow::centered(phys.omega_a, half_width)?;
    let bare = BareParams::new(
        phys.omega_a,
        bare_gamma_for_half_width(phys.gamma_phys, half_width),
    )?;
    Ok((bare, window))
}
