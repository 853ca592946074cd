//! wasm-bindgen entry points for the static demo in `www/`.
//!
//! Every export returns flat `f64` arrays so the page needs no glue beyond
//! the generated bindings.

use wasm_bindgen::prelude::*;
use wgqed_core::experiments::{
    self, BareParams, FrequencyWindow, PhysicalParams, SimulationConfig, SweepSpec, SweepVariable,
    TimeGrid, WavepacketSpec,
};
use wgqed_core::renorm;

/// `[omega_A, Gamma, f, H]` for bare parameters in a window.
#[wasm_bindgen]
pub fn physical_parameters(
    omega_0: f64,
    gamma: f64,
    lambda_ir: f64,
    lambda_uv: f64,
) -> Result<Vec<f64>, JsError> {
    physical_parameters_impl(omega_0, gamma, lambda_ir, lambda_uv).map_err(|e| JsError::new(&e))
}

/// Bare gamma needed to hold `gamma_phys` fixed, sampled at `n` half-widths.
/// Returns `[half_width_0, gamma_0, half_width_1, gamma_1, ...]`.
#[wasm_bindgen]
pub fn bare_gamma_curve(
    gamma_phys: f64,
    half_width_min: f64,
    half_width_max: f64,
    n: usize,
) -> Vec<f64> {
    bare_gamma_curve_impl(gamma_phys, half_width_min, half_width_max, n)
}

/// Simulated reflection spectrum. Returns rows of
/// `[omega_p, R_sim, R_bare, R_phys]`, flattened.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn reflection_spectrum(
    omega_0: f64,
    gamma: f64,
    lambda_ir: f64,
    lambda_uv: f64,
    omega_p_min: f64,
    omega_p_max: f64,
    n_points: usize,
    n_steps: usize,
) -> Result<Vec<f64>, JsError> {
    reflection_spectrum_impl(
        omega_0,
        gamma,
        lambda_ir,
        lambda_uv,
        omega_p_min,
        omega_p_max,
        n_points,
        n_steps,
    )
    .map_err(|e| JsError::new(&e))
}

fn physical_parameters_impl(
    omega_0: f64,
    gamma: f64,
    lambda_ir: f64,
    lambda_uv: f64,
) -> Result<Vec<f64>, String> {
    let bare = BareParams::new(omega_0, gamma).map_err(|e| e.to_string())?;
    let window = FrequencyWindow::new(lambda_ir, lambda_uv).map_err(|e| e.to_string())?;
    let r = renorm::renormalize(&bare, &window).map_err(|e| e.to_string())?;
    Ok(vec![
        r.physical.omega_a,
        r.physical.gamma_phys,
        r.f_factor,
        r.harmonic_mean,
    ])
}

fn bare_gamma_curve_impl(gamma_phys: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .flat_map(|i| {
            let lam = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            [lam, renorm::bare_gamma_for_half_width(gamma_phys, lam)]
        })
        .collect()
}

const LENGTH: f64 = 100.0;
const TOTAL_TIME: f64 = 50.0;
const X_0: f64 = -25.0;
const DELTA_K: f64 = 0.05 * std::f64::consts::PI;

#[allow(clippy::too_many_arguments)]
fn reflection_spectrum_impl(
    omega_0: f64,
    gamma: f64,
    lambda_ir: f64,
    lambda_uv: f64,
    lo: f64,
    hi: f64,
    n_points: usize,
    n_steps: usize,
) -> Result<Vec<f64>, String> {
    let err = |e: experiments::Error| e.to_string();
    let config = SimulationConfig::new(
        LENGTH,
        FrequencyWindow::new(lambda_ir, lambda_uv).map_err(err)?,
        BareParams::new(omega_0, gamma).map_err(err)?,
    )
    .map_err(err)?;
    let values: Vec<f64> = match n_points {
        0 => return Err("n_points must be positive".into()),
        1 => vec![0.5 * (lo + hi)],
        n => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let spec = SweepSpec::new(
        SweepVariable::OmegaP,
        values,
        config,
        WavepacketSpec::new(omega_0, DELTA_K, X_0),
        TimeGrid::new(TOTAL_TIME, n_steps).map_err(err)?,
    )
    .map_err(err)?;
    let table = experiments::sweep(&spec);
    if let Some(row) = table.failures().next() {
        return Err(row.error.clone().unwrap_or_else(|| "sweep failed".into()));
    }
    Ok(table
        .rows
        .iter()
        .flat_map(|r| [r.omega_p, r.r_sim, r.r_th_bare, r.r_phys])
        .collect())
}

/// `[omega_0, gamma, lambda_ir, lambda_uv]` reproducing `(omega_A, Gamma)`
/// in a window centered on `omega_A`.
#[wasm_bindgen]
pub fn bare_parameters(
    omega_a: f64,
    gamma_phys: f64,
    half_width: f64,
) -> Result<Vec<f64>, JsError> {
    let run = || -> Result<Vec<f64>, experiments::Error> {
        let (b, w) =
            renorm::bare_from_physical(&PhysicalParams::new(omega_a, gamma_phys)?, half_width)?;
        Ok(vec![b.omega_0, b.gamma, w.lambda_ir(), w.lambda_uv()])
    };
    run().map_err(|e| JsError::new(&e.to_string()))
}
