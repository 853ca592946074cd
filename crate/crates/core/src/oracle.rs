//! Dense exact propagation of the discretized N = 1 model.
//!
//! Ground truth for the RK4 propagator on small grids. Works in the
//! Schrodinger picture; [`to_interaction_picture`] converts for comparison.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{MomentumGrid, SimulationConfig};
use crate::state::SingleExcitationState;

pub const DEFAULT_MODE_LIMIT: usize = 2048;

/// Schrodinger-picture Hamiltonian, basis ordered like [`SingleExcitationState`].
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    n_modes: usize,
    matrix: DMatrix<Complex64>,
}

impl DenseHamiltonian {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenpairs with eigenvalues sorted ascending.
    pub fn eigen(&self) -> Result<Eigensystem> {
        let eig = SymmetricEigen::try_new(self.matrix.clone(), 1e-15, 10_000)
            .ok_or_else(|| Error::Diagonalization("Jacobi iteration did not converge".into()))?;
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies = order.iter().map(|&j| eig.eigenvalues[j]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok(Eigensystem {
            n_modes: self.n_modes,
            energies,
            vectors,
        })
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, state: &SingleExcitationState) -> Result<f64> {
        let v = self.vector_of(state)?;
        Ok((v.adjoint() * &self.matrix * &v)[(0, 0)].re)
    }

    fn vector_of(&self, state: &SingleExcitationState) -> Result<DVector<Complex64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(DVector::from_column_slice(state.amplitudes()))
    }
}

#[derive(Debug, Clone)]
pub struct Eigensystem {
    n_modes: usize,
    pub energies: Vec<f64>,
    /// Column j is the eigenvector of `energies[j]`.
    pub vectors: DMatrix<Complex64>,
}

impl Eigensystem {
    /// `psi(t) = sum_j exp(-i E_j t) <E_j|psi_0> |E_j>`.
    pub fn propagate(
        &self,
        state0: &SingleExcitationState,
        t: f64,
    ) -> Result<SingleExcitationState> {
        let dim = self.energies.len();
        if state0.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: state0.dim(),
            });
        }
        let psi0 = DVector::from_column_slice(state0.amplitudes());
        let mut coeffs = self.vectors.adjoint() * psi0;
        for (c, &e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        let psi = &self.vectors * coeffs;
        SingleExcitationState::from_amplitudes(self.n_modes, psi.iter().copied().collect())
    }
}

pub fn build_hamiltonian(
    config: &SimulationConfig,
    grid: &MomentumGrid,
) -> Result<DenseHamiltonian> {
    build_hamiltonian_with_limit(config, grid, DEFAULT_MODE_LIMIT)
}

/// Diagonal `(w_k..., w_k..., w_0)`; `<0,e|H|alpha k,g> = i sqrt(gamma/2L)`.
pub fn build_hamiltonian_with_limit(
    config: &SimulationConfig,
    grid: &MomentumGrid,
    mode_limit: usize,
) -> Result<DenseHamiltonian> {
    let n = grid.len();
    if n > mode_limit {
        return Err(Error::SizeLimit {
            modes: n,
            limit: mode_limit,
        });
    }
    let dim = grid.state_dim();
    let atom = 2 * n;
    let g = Complex64::new(0.0, config.coupling());
    let mut h = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (m, &k) in grid.momenta().iter().enumerate() {
        let w = Complex64::new(config.dispersion(k), 0.0);
        h[(m, m)] = w;
        h[(n + m, n + m)] = w;
    }
    h[(atom, atom)] = Complex64::new(config.bare().omega_0, 0.0);
    for nu in 0..2 * n {
        h[(atom, nu)] = g;
        h[(nu, atom)] = g.conj();
    }
    Ok(DenseHamiltonian {
        n_modes: n,
        matrix: h,
    })
}

/// Diagonalizes `hamiltonian` and evolves `state0` for time `t`.
pub fn exact_propagate(
    state0: &SingleExcitationState,
    t: f64,
    hamiltonian: &DenseHamiltonian,
) -> Result<SingleExcitationState> {
    hamiltonian.eigen()?.propagate(state0, t)
}

fn free_phase(
    state: &SingleExcitationState,
    t: f64,
    sign: f64,
    config: &SimulationConfig,
    grid: &MomentumGrid,
) -> Result<SingleExcitationState> {
    state.check_grid(grid)?;
    let n = grid.len();
    let mut out = state.clone();
    let amps = out.amplitudes_mut();
    for (m, &k) in grid.momenta().iter().enumerate() {
        let p = Complex64::from_polar(1.0, sign * config.dispersion(k) * t);
        amps[m] *= p;
        amps[n + m] *= p;
    }
    amps[2 * n] *= Complex64::from_polar(1.0, sign * config.bare().omega_0 * t);
    Ok(out)
}

/// `|psi_I> = exp(i H_0 t) |psi_S>`.
pub fn to_interaction_picture(
    state: &SingleExcitationState,
    t: f64,
    config: &SimulationConfig,
    grid: &MomentumGrid,
) -> Result<SingleExcitationState> {
    free_phase(state, t, 1.0, config, grid)
}

/// `|psi_S> = exp(-i H_0 t) |psi_I>`.
pub fn to_schrodinger_picture(
    state: &SingleExcitationState,
    t: f64,
    config: &SimulationConfig,
    grid: &MomentumGrid,
) -> Result<SingleExcitationState> {
    free_phase(state, t, -1.0, config, grid)
}
