//! Exact propagation in the Fock sector, the reference every variational run
//! is checked against.

use crate::fock::{fock_populations, FockBasis, FockState};
use crate::hamiltonian::{FockHamiltonian, HamiltonianParams};
use crate::ode::{integrate, Dopri5Options, Dopri5Stats};
use crate::{Error, Result, C64};

/// Sectors larger than this are refused unless `allow_large` is set.
pub const DEFAULT_ORACLE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub cap: u64,
    pub allow_large: bool,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            cap: DEFAULT_ORACLE_CAP,
            allow_large: false,
        }
    }
}

impl FockConfig {
    /// Relative tolerance `tol`, absolute tolerance two orders below.
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-2,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct FockTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FockState>,
    pub populations: Vec<Vec<f64>>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
    pub stats: Dopri5Stats,
}

/// Solves `i dPsi/dt = H(t) Psi` on `t_grid`.
pub fn propagate_fock(
    initial: &FockState,
    params: &HamiltonianParams,
    basis: &FockBasis,
    t_grid: &[f64],
    cfg: &FockConfig,
) -> Result<FockTrajectory> {
    let dim = basis.len() as u64;
    if dim > cfg.cap && !cfg.allow_large {
        return Err(Error::OracleTooLarge { dim, cap: cfg.cap });
    }
    if initial.len() != basis.len() {
        return Err(Error::InvalidParameter(format!(
            "state has {} amplitudes, basis has {}",
            initial.len(),
            basis.len()
        )));
    }
    let n0 = initial.norm_sqr();
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized, |psi|^2 = {n0}"
        )));
    }
    let ham = FockHamiltonian::new(params, basis)?;

    let mut traj = FockTrajectory {
        times: Vec::with_capacity(t_grid.len()),
        states: Vec::with_capacity(t_grid.len()),
        populations: Vec::with_capacity(t_grid.len()),
        norms: Vec::with_capacity(t_grid.len()),
        energies: Vec::with_capacity(t_grid.len()),
        stats: Dopri5Stats::default(),
    };
    let opts = Dopri5Options {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_step: cfg.max_step,
        ..Dopri5Options::default()
    };
    let minus_i = C64::new(0.0, -1.0);
    let mut y = initial.amplitudes.clone();
    let stats = integrate(
        |t, y, dy| {
            ham.apply(t, y, dy);
            dy.iter_mut().for_each(|d| *d *= minus_i);
            Ok(())
        },
        &mut y,
        t_grid,
        &opts,
        |t, y| {
            if y.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                return Err(Error::NonFinite { what: "Fock amplitudes", t });
            }
            let state = FockState::new(y.to_vec());
            traj.times.push(t);
            traj.populations.push(fock_populations(&state, basis));
            traj.norms.push(state.norm_sqr());
            traj.energies.push(ham.expectation(t, &state));
            traj.states.push(state);
            Ok(())
        },
    )?;
    traj.stats = stats;
    Ok(traj)
}
