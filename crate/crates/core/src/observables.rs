//! Excitation bookkeeping and single-photon scattering predictions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BareParams, MomentumGrid, PhysicalParams, Resonance};
use crate::propagator::Trajectory;
use crate::state::{Channel, SingleExcitationState};

/// Where the excitation sits: channel 1 (T_n), channel 2 (R_n) or the atom (A_n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcitationProbs {
    pub transmitted: f64,
    pub reflected: f64,
    pub atomic: f64,
}

impl ExcitationProbs {
    pub fn total(&self) -> f64 {
        self.transmitted + self.reflected + self.atomic
    }
}

pub fn excitation_probs(state: &SingleExcitationState) -> ExcitationProbs {
    let sum = |c: &[Complex64]| c.iter().map(|a| a.norm_sqr()).sum::<f64>();
    ExcitationProbs {
        transmitted: sum(state.channel(Channel::Forward)),
        reflected: sum(state.channel(Channel::Backward)),
        atomic: state.atom().norm_sqr(),
    }
}

/// Single-photon amplitudes; the 2x2 s-matrix is `[[t, r], [-r, t]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringCoefficients {
    pub r: Complex64,
    pub t: Complex64,
}

/// `r = -(i w/2) / (d + i w/2)`, `t = d / (d + i w/2)` with `d = omega_k - center`.
pub fn coefficients<R: Resonance + ?Sized>(omega_k: f64, params: &R) -> ScatteringCoefficients {
    let half = params.width() / 2.0;
    if half == 0.0 {
        // decoupled atom
        return ScatteringCoefficients {
            r: Complex64::new(0.0, 0.0),
            t: Complex64::new(1.0, 0.0),
        };
    }
    let detuning = omega_k - params.center();
    let denom = Complex64::new(detuning, half);
    ScatteringCoefficients {
        r: -Complex64::new(0.0, half) / denom,
        t: Complex64::new(detuning, 0.0) / denom,
    }
}

pub fn bare_coefficients(omega_k: f64, bare: &BareParams) -> ScatteringCoefficients {
    coefficients(omega_k, bare)
}

pub fn physical_coefficients(omega_k: f64, phys: &PhysicalParams) -> ScatteringCoefficients {
    coefficients(omega_k, phys)
}

/// Monochromatic-limit reflection `(w^2/4) / ((omega_p - center)^2 + w^2/4)`.
pub fn lorentzian_reflection<R: Resonance + ?Sized>(omega_p: f64, params: &R) -> f64 {
    let q = params.width() * params.width() / 4.0;
    if q == 0.0 {
        return 0.0;
    }
    let d = omega_p - params.center();
    q / (d * d + q)
}

/// Reflection and transmission predicted from the initial packet amplitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    pub reflection: f64,
    pub transmission: f64,
}

/// `R = sum_k |r_k c_{1k,0}|^2`, `T = sum_k |t_k c_{1k,0}|^2` on the simulation grid.
pub fn predicted_scattering<F>(
    initial: &SingleExcitationState,
    grid: &MomentumGrid,
    coeffs: F,
) -> Result<Prediction>
where
    F: Fn(f64) -> ScatteringCoefficients,
{
    initial.check_grid(grid)?;
    if initial
        .channel(Channel::Backward)
        .iter()
        .any(|c| c.norm_sqr() != 0.0)
        || initial.atom().norm_sqr() != 0.0
    {
        return Err(Error::ChannelTwoOccupied);
    }
    let mut p = Prediction {
        reflection: 0.0,
        transmission: 0.0,
    };
    for (&k, c) in grid.momenta().iter().zip(initial.channel(Channel::Forward)) {
        let s = coeffs(k);
        p.reflection += (s.r * c).norm_sqr();
        p.transmission += (s.t * c).norm_sqr();
    }
    Ok(p)
}

pub fn predicted_reflection<F>(
    initial: &SingleExcitationState,
    grid: &MomentumGrid,
    coeffs: F,
) -> Result<f64>
where
    F: Fn(f64) -> ScatteringCoefficients,
{
    predicted_scattering(initial, grid, coeffs).map(|p| p.reflection)
}

/// Final-time outcome of one scattering run.
#[derive(Debug, Clone)]
pub struct ScatteringRecord {
    pub final_r: f64,
    pub final_t: f64,
    pub final_a: f64,
    pub trajectory: Trajectory,
}

impl ScatteringRecord {
    pub fn from_trajectory(trajectory: Trajectory) -> Self {
        let p = excitation_probs(&trajectory.final_state);
        Self {
            final_r: p.reflected,
            final_t: p.transmitted,
            final_a: p.atomic,
            trajectory,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_grid, FrequencyWindow, SimulationConfig};
    use crate::state::{atom_excited_state, init_gaussian, WavepacketSpec};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bare() -> BareParams {
        BareParams::new(10.0 * PI, PI).unwrap()
    }

    #[test]
    fn resonance_reflects_perfectly() {
        let s = bare_coefficients(10.0 * PI, &bare());
        assert!((s.r - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(s.t.norm() < 1e-15);
    }

    #[test]
    fn half_width_and_full_width_points() {
        let b = bare();
        let s = bare_coefficients(b.omega_0 + b.gamma / 2.0, &b);
        assert!((s.r.norm_sqr() - 0.5).abs() < 1e-14);
        let s = bare_coefficients(b.omega_0 + b.gamma, &b);
        assert!((s.r.norm_sqr() - 0.2).abs() < 1e-14);

        let p = PhysicalParams::new(31.0, 3.3).unwrap();
        assert!((physical_coefficients(31.0, &p).r.norm_sqr() - 1.0).abs() < 1e-15);
        assert!((physical_coefficients(31.0 + 3.3, &p).r.norm_sqr() - 0.2).abs() < 1e-14);
    }

    #[test]
    fn physical_equals_bare_for_same_numbers() {
        let b = bare();
        let p = PhysicalParams::new(b.omega_0, b.gamma).unwrap();
        for w in [0.0, 20.0, 31.4, 40.0] {
            assert_eq!(bare_coefficients(w, &b), physical_coefficients(w, &p));
        }
    }

    #[test]
    fn lorentzian_shape() {
        let b = bare();
        assert_eq!(lorentzian_reflection(b.omega_0, &b), 1.0);
        assert!((lorentzian_reflection(b.omega_0 + b.gamma / 2.0, &b) - 0.5).abs() < 1e-15);
        assert!((lorentzian_reflection(b.omega_0 - b.gamma / 2.0, &b) - 0.5).abs() < 1e-15);
        assert!(lorentzian_reflection(1e9, &b) < 1e-15);
        assert!(lorentzian_reflection(-1e9, &b) < 1e-15);
    }

    #[test]
    fn probs_of_simple_states() {
        let c = SimulationConfig::new(100.0, FrequencyWindow::new(0.0, 20.0 * PI).unwrap(), bare())
            .unwrap();
        let g = build_grid(&c).unwrap();
        let p = excitation_probs(&atom_excited_state(&g));
        assert_eq!((p.transmitted, p.reflected, p.atomic), (0.0, 0.0, 1.0));

        let s = init_gaussian(&g, &WavepacketSpec::new(10.0 * PI, 0.05 * PI, -25.0)).unwrap();
        let p = excitation_probs(&s);
        assert!((p.transmitted - 1.0).abs() < 1e-12);
        assert_eq!(p.reflected, 0.0);
        assert_eq!(p.atomic, 0.0);

        let pred = predicted_scattering(&s, &g, |k| bare_coefficients(k, &c.bare())).unwrap();
        assert!((pred.reflection + pred.transmission - 1.0).abs() < 1e-12);
        // packet width 0.05pi against half-width pi/2: 1 - (dk / (gamma/2))^2 to leading order
        assert!((pred.reflection - 0.99).abs() < 1e-3);

        assert_eq!(
            predicted_reflection(&atom_excited_state(&g), &g, |k| bare_coefficients(
                k,
                &c.bare()
            )),
            Err(Error::ChannelTwoOccupied)
        );
    }

    #[test]
    fn narrowing_packet_approaches_lorentzian() {
        let c = SimulationConfig::new(400.0, FrequencyWindow::new(0.0, 20.0 * PI).unwrap(), bare())
            .unwrap();
        let g = build_grid(&c).unwrap();
        let omega_p = 10.0 * PI + 0.7;
        let target = lorentzian_reflection(omega_p, &c.bare());
        let mut last = f64::INFINITY;
        for dk in [0.4, 0.2, 0.1, 0.05] {
            let s = init_gaussian(&g, &WavepacketSpec::new(omega_p, dk, 0.0)).unwrap();
            let r = predicted_reflection(&s, &g, |k| bare_coefficients(k, &c.bare())).unwrap();
            let err = (r - target).abs();
            assert!(err < last, "error did not shrink at dk = {dk}");
            last = err;
        }
        assert!(last < 2e-3);
    }

    proptest! {
        #[test]
        fn unitarity_and_r_equals_t_minus_one(
            w in 0.0..200.0f64,
            center in 1.0..100.0f64,
            width in 1e-3..20.0f64,
        ) {
            let b = BareParams::new(center, width).unwrap();
            let s = bare_coefficients(w, &b);
            prop_assert!((s.r.norm_sqr() + s.t.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((s.r - (s.t - 1.0)).norm() < 1e-12);
            prop_assert!((s.r.norm_sqr() - lorentzian_reflection(w, &b)).abs() < 1e-12);
        }

        #[test]
        fn lorentzian_symmetric_and_decreasing(d1 in 0.0..10.0f64, d2 in 0.0..10.0f64) {
            let b = bare();
            let (near, far) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let l = |d: f64| lorentzian_reflection(b.omega_0 + d, &b);
            prop_assert!((l(near) - l(-near)).abs() < 1e-14);
            prop_assert!(l(near) >= l(far));
        }
    }
}
