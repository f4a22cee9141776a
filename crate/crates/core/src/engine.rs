//! Coupled equations of motion for the expansion coefficients `A_k` and the
//! coherent-state parameters `xi_km`.
//!
//! Stationarity of the Lagrangian `i/2 (<Psi|dPsi> - <dPsi|Psi>) - <Psi|H|Psi>`
//! with respect to every `A_k^*` and `xi_km^*` gives the Hermitian system
//!
//! ```text
//! [ X   Y ] [ dA  ]        [ R1 ]
//! [ Y^+ Z ] [ dxi ]  = -i  [ R2 ]
//! ```
//!
//! with `X_kj = <xi_k|xi_j>`, `Y_{k,(m,j)} = S xi_km^* A_j <xi_k'|xi_j'>`,
//! `Z_{(m,k),(n,j)} = A_k^* A_j (S d_mn <xi_k'|xi_j'> + S (S-1) xi_kn^* xi_jm <xi_k''|xi_j''>)`,
//! `R1_k = dH/dA_k^*` and `R2_{m,k} = dH/dxi_km^*`. Primes denote the
//! overlaps of states with one, two or three bosons removed.
//!
//! Unknowns are ordered `A_1..A_N` followed by the `xi` columns mode-major:
//! `xi_11..xi_N1, xi_12..xi_N2, ...`.
//!
//! The matrix is always singular: rescaling `xi_k -> c xi_k` together with
//! `A_k -> c^{-S} A_k` leaves `|Psi>` unchanged. On top of that the basis is
//! overcomplete. [`regularized_solve`] therefore inverts the eigendirections
//! through a smooth spectral filter, and the propagator picks, within the exact null direction
//! of each basis state, the representative that keeps `|xi_k|^2` constant.

use crate::gcs::{check_model, ensemble_norm, energy_expectation, gcs_populations, ipow, GcsEnsemble, GcsParams};
use crate::hamiltonian::HamiltonianParams;
use crate::linalg::{filtered_solve, CMat, SpectralFilter};
use crate::ode::{integrate, Dopri5Options, Dopri5Stats};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    /// Eigenvalues below `reg_epsilon * max|lambda|` are counted as discarded.
    pub reg_epsilon: f64,
    pub filter: SpectralFilter,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// Keep a full ensemble snapshot every this many output times.
    pub record_stride: usize,
    /// Use the per-state null direction to hold `|xi_k|^2` fixed.
    pub fix_gauge: bool,
    /// Abort when `<Psi|Psi>` moves further than this from its initial value.
    pub norm_drift_limit: f64,
    /// Propagate under `H - E(t0)`. This only changes the global phase of
    /// `Psi`, but removes the fast rotation of the `A_k` at large `U S^2`,
    /// which otherwise dictates the step size.
    pub shift_energy: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            reg_epsilon: 1e-10,
            filter: SpectralFilter::Tikhonov,
            rtol: 1e-8,
            atol: 1e-10,
            max_step: f64::INFINITY,
            record_stride: 1,
            fix_gauge: true,
            norm_drift_limit: 1e-3,
            shift_energy: true,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.reg_epsilon > 0.0 && self.reg_epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "reg_epsilon must lie in (0, 1), got {}",
                self.reg_epsilon
            )));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidParameter("max_step must be positive".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParameter("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// The linear system for the time derivatives at one instant.
#[derive(Debug, Clone)]
pub struct TangentSystem {
    pub lhs: CMat,
    pub rhs: Vec<C64>,
    /// The `A_k` the system was assembled at.
    pub coeffs: Vec<C64>,
    pub basis_size: usize,
    pub modes: usize,
}

impl TangentSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// `max |lhs - lhs^+| / max |lhs|`
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut scale = 0.0_f64;
        let mut err = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(self.lhs[(i, j)].norm());
                err = err.max((self.lhs[(i, j)] - self.lhs[(j, i)].conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            err / scale
        }
    }

    /// The Gram block `X`.
    pub fn gram_block(&self) -> CMat {
        let n = self.basis_size;
        CMat::from_fn(n, n, |i, j| self.lhs[(i, j)])
    }
}

/// Position of `xi_km` in the unknown vector.
#[inline]
pub fn xi_index(basis_size: usize, k: usize, m: usize) -> usize {
    basis_size + m * basis_size + k
}

/// Flattens an ensemble into the unknown vector.
pub fn pack(ens: &GcsEnsemble) -> Vec<C64> {
    let n = ens.len();
    let m = ens.modes();
    let mut u = vec![C64::new(0.0, 0.0); n * (m + 1)];
    u[..n].copy_from_slice(&ens.coeffs);
    for (k, b) in ens.basis.iter().enumerate() {
        for (mode, x) in b.xi.iter().enumerate() {
            u[xi_index(n, k, mode)] = *x;
        }
    }
    u
}

/// Inverse of [`pack`].
pub fn unpack(u: &[C64], basis_size: usize, modes: usize, bosons: u32) -> GcsEnsemble {
    let n = basis_size;
    GcsEnsemble {
        coeffs: u[..n].to_vec(),
        basis: (0..n)
            .map(|k| GcsParams::new((0..modes).map(|m| u[xi_index(n, k, m)]).collect(), bosons))
            .collect(),
    }
}

/// Scratch buffers reused across right-hand-side evaluations.
struct Workspace {
    n: usize,
    m: usize,
    // row-major N x M copy of xi
    xi: Vec<C64>,
    // per-pair (k, j) quantities, row-major N x N
    x0: Vec<C64>,
    x1: Vec<C64>,
    x2: Vec<C64>,
    x3: Vec<C64>,
    hop: Vec<C64>,
    onsite: Vec<C64>,
    trap: Vec<C64>,
    weights: Vec<f64>,
}

impl Workspace {
    fn new(n: usize, m: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            n,
            m,
            xi: vec![z; n * m],
            x0: vec![z; n * n],
            x1: vec![z; n * n],
            x2: vec![z; n * n],
            x3: vec![z; n * n],
            hop: vec![z; n * n],
            onsite: vec![z; n * n],
            trap: vec![z; n * n],
            weights: Vec::new(),
        }
    }

    fn assemble(&mut self, u: &[C64], params: &HamiltonianParams, t: f64) -> Result<TangentSystem> {
        let (n, m) = (self.n, self.m);
        let bosons = params.bosons as i64;
        let s = params.bosons as f64;
        let a = &u[..n];
        for k in 0..n {
            for mode in 0..m {
                self.xi[k * m + mode] = u[xi_index(n, k, mode)];
            }
        }
        self.weights = (0..m).map(|i| params.trap_weight(i)).collect();

        for k in 0..n {
            let xk = &self.xi[k * m..(k + 1) * m];
            for j in 0..n {
                let xj = &self.xi[j * m..(j + 1) * m];
                let ov: C64 = xk.iter().zip(xj).map(|(e, x)| e.conj() * x).sum();
                let p3 = ipow(ov, bosons - 3);
                let p2 = if bosons >= 3 { p3 * ov } else { ipow(ov, bosons - 2) };
                let p1 = if bosons >= 2 { p2 * ov } else { ipow(ov, bosons - 1) };
                let p0 = p1 * ov;
                let mut hop = C64::new(0.0, 0.0);
                for i in 0..m - 1 {
                    hop += xk[i].conj() * xj[i + 1] + xk[i + 1].conj() * xj[i];
                }
                let mut onsite = C64::new(0.0, 0.0);
                let mut trap = C64::new(0.0, 0.0);
                for i in 0..m {
                    let e = xk[i].conj();
                    onsite += e * e * xj[i] * xj[i];
                    trap += e * xj[i] * self.weights[i];
                }
                let idx = k * n + j;
                self.x0[idx] = p0;
                self.x1[idx] = p1;
                self.x2[idx] = p2;
                self.x3[idx] = p3;
                self.hop[idx] = hop;
                self.onsite[idx] = onsite;
                self.trap[idx] = trap;
            }
        }

        let dim = n * (m + 1);
        let mut lhs = CMat::zeros(dim, dim);
        // X and Y blocks, plus Y^+ by symmetry
        for k in 0..n {
            for j in 0..n {
                let idx = k * n + j;
                lhs[(k, j)] = self.x0[idx];
                for mode in 0..m {
                    let y = self.xi[k * m + mode].conj() * a[j] * self.x1[idx] * s;
                    let col = xi_index(n, j, mode);
                    lhs[(k, col)] = y;
                    lhs[(col, k)] = y.conj();
                }
            }
        }
        // Z block
        let ss1 = s * (s - 1.0);
        for k in 0..n {
            for j in 0..n {
                let idx = k * n + j;
                let rho = a[k].conj() * a[j];
                let d1 = rho * self.x1[idx] * s;
                let d2 = rho * self.x2[idx] * ss1;
                for row_mode in 0..m {
                    let xjm = self.xi[j * m + row_mode];
                    let row = xi_index(n, k, row_mode);
                    for col_mode in 0..m {
                        let mut v = d2 * self.xi[k * m + col_mode].conj() * xjm;
                        if row_mode == col_mode {
                            v += d1;
                        }
                        lhs[(row, xi_index(n, j, col_mode))] = v;
                    }
                }
            }
        }

        // right-hand side: dH/dA^* and dH/dxi^*
        let hop_t = params.hopping_at(t);
        let u_int = params.interaction;
        let k_trap = params.trap;
        let mut rhs = vec![C64::new(0.0, 0.0); dim];
        let mut r2 = vec![C64::new(0.0, 0.0); m];
        for k in 0..n {
            let mut r1 = C64::new(0.0, 0.0);
            r2.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for j in 0..n {
                let idx = k * n + j;
                let (x1, x2, x3) = (self.x1[idx], self.x2[idx], self.x3[idx]);
                let (hop, onsite, trap) = (self.hop[idx], self.onsite[idx], self.trap[idx]);
                let h_kj = -hop * x1 * (hop_t * s)
                    + onsite * x2 * (0.5 * u_int * ss1)
                    + trap * x1 * (0.5 * k_trap * s);
                r1 += h_kj * a[j];

                let xj = &self.xi[j * m..(j + 1) * m];
                // mode-independent prefactors of xi_jm
                let common = -hop * x2 * (hop_t * ss1)
                    + onsite * x3 * (0.5 * u_int * ss1 * (s - 2.0))
                    + trap * x2 * (0.5 * k_trap * ss1);
                for mode in 0..m {
                    let mut neighbours = C64::new(0.0, 0.0);
                    if mode + 1 < m {
                        neighbours += xj[mode + 1];
                    }
                    if mode > 0 {
                        neighbours += xj[mode - 1];
                    }
                    let xjm = xj[mode];
                    let g = -neighbours * x1 * (hop_t * s)
                        + xjm * common
                        + self.xi[k * m + mode].conj() * xjm * xjm * x2 * (u_int * ss1)
                        + xjm * x1 * (0.5 * k_trap * s * self.weights[mode]);
                    r2[mode] += g * a[j];
                }
            }
            rhs[k] = C64::new(0.0, -1.0) * r1;
            let ak = a[k].conj();
            for mode in 0..m {
                rhs[xi_index(n, k, mode)] = C64::new(0.0, -1.0) * ak * r2[mode];
            }
        }

        if rhs.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { what: "right-hand side", t });
        }
        for j in 0..dim {
            for i in 0..dim {
                let v = lhs[(i, j)];
                if !v.re.is_finite() || !v.im.is_finite() {
                    let what = match (i < n, j < n) {
                        (true, true) => "X block",
                        (false, false) => "Z block",
                        _ => "Y block",
                    };
                    return Err(Error::NonFinite { what, t });
                }
            }
        }

        Ok(TangentSystem {
            lhs,
            rhs,
            coeffs: a.to_vec(),
            basis_size: n,
            modes: m,
        })
    }
}

/// Builds the tangent system of `ens` at time `t`.
pub fn assemble_blocks(ens: &GcsEnsemble, params: &HamiltonianParams, t: f64) -> Result<TangentSystem> {
    ens.validate()?;
    check_model(ens, params)?;
    params.validate()?;
    let mut ws = Workspace::new(ens.len(), ens.modes());
    ws.assemble(&pack(ens), params, t)
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub derivative: Vec<C64>,
    /// Eigendirections dropped by the cutoff.
    pub discarded: usize,
}

/// Regularized solution of the tangent system, filtering eigenvalues around
/// `reg_epsilon * max|lambda|`.
pub fn regularized_solve(sys: &TangentSystem, cfg: &EngineConfig) -> Result<SolveOutcome> {
    let herm = sys.hermiticity_error();
    if herm > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "tangent matrix is not Hermitian (relative error {herm:e})"
        )));
    }
    let (derivative, discarded) = norm_preserving_solve(sys, cfg)?;
    Ok(SolveOutcome {
        derivative,
        discarded,
    })
}

/// Filtered solve followed by removal of the filter bias along `e = (A, 0)`.
///
/// `T e = |Psi>`, so `d<Psi|Psi>/dt = 2 Re(e^+ L du)`, and the exact solution
/// makes this vanish because `e^+ R = -i <Psi|H|Psi>` is imaginary. The filter
/// damps whatever part of `|Psi>` lies in poorly conditioned directions, which
/// leaves a small real rate that accumulates as norm drift. Subtracting
/// `Re(e^+ L du) / (e^+ L e)` times `e` removes exactly that rate and leaves
/// the unregularized solution untouched.
fn norm_preserving_solve(sys: &TangentSystem, cfg: &EngineConfig) -> Result<(Vec<C64>, usize)> {
    let (mut du, discarded) = filtered_solve(&sys.lhs, &sys.rhs, cfg.reg_epsilon, cfg.filter)?;
    let n = sys.basis_size;
    let a = &sys.coeffs;
    let le: Vec<C64> = (0..sys.dim()).map(|i| (0..n).map(|k| sys.lhs[(i, k)] * a[k]).sum()).collect();
    let norm: f64 = (0..n).map(|k| (a[k].conj() * le[k]).re).sum();
    if norm > 0.0 {
        let rate: f64 = le.iter().zip(&du).map(|(l, x)| (l.conj() * x).re).sum::<f64>() / norm;
        for k in 0..n {
            du[k] -= a[k] * rate;
        }
    }
    Ok((du, discarded))
}

/// Shifts `du` along the null direction `(dA_k, dxi_k) = (-S A_k, xi_k)` so
/// that `Re(xi_k^+ dxi_k) = 0`. The represented `d|Psi>/dt` is unchanged.
fn fix_gauge(u: &[C64], du: &mut [C64], n: usize, m: usize, bosons: u32) {
    for k in 0..n {
        let mut norm = 0.0;
        let mut radial = 0.0;
        for mode in 0..m {
            let i = xi_index(n, k, mode);
            norm += u[i].norm_sqr();
            radial += (u[i].conj() * du[i]).re;
        }
        if norm == 0.0 {
            continue;
        }
        let c = -radial / norm;
        for mode in 0..m {
            let i = xi_index(n, k, mode);
            du[i] += u[i] * c;
        }
        du[k] -= u[k] * (c * bosons as f64);
    }
}

/// Diagnostics recorded at every output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
    pub populations: Vec<f64>,
    pub discarded: usize,
    pub max_xi_drift: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub modes: usize,
    pub bosons: u32,
    pub basis_size: usize,
    pub times: Vec<f64>,
    pub observables: Vec<Observables>,
    /// `(t, ensemble)` every `record_stride` output times, always including
    /// the last one.
    pub snapshots: Vec<(f64, GcsEnsemble)>,
    pub stats: Dopri5Stats,
}

impl Trajectory {
    /// Largest `|<Psi|Psi>(t) - <Psi|Psi>(0)|`.
    pub fn max_norm_drift(&self) -> f64 {
        let n0 = self.observables.first().map_or(0.0, |o| o.norm);
        self.observables.iter().map(|o| (o.norm - n0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|E(t) - E(0)| / |E(0)|`, absolute when `E(0) = 0`.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.observables.first().map_or(0.0, |o| o.energy);
        let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
        self.observables
            .iter()
            .map(|o| (o.energy - e0).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn max_xi_drift(&self) -> f64 {
        self.observables.iter().map(|o| o.max_xi_drift).fold(0.0, f64::max)
    }

    /// Population of `mode` at every output time.
    pub fn population(&self, mode: usize) -> Vec<f64> {
        self.observables.iter().map(|o| o.populations[mode]).collect()
    }

    pub fn final_ensemble(&self) -> Option<&GcsEnsemble> {
        self.snapshots.last().map(|(_, e)| e)
    }
}

fn observe(ens: &GcsEnsemble, params: &HamiltonianParams, t: f64, discarded: usize) -> Result<Observables> {
    Ok(Observables {
        t,
        norm: ensemble_norm(ens),
        energy: energy_expectation(ens, params, t)?,
        populations: gcs_populations(ens)?,
        discarded,
        max_xi_drift: ens.max_normalization_error(),
    })
}

/// Integrates the variational equations of motion over `t_grid`.
///
/// On failure the error is wrapped in [`Error::Propagation`] together with
/// the last recorded ensemble.
pub fn propagate_gcs(
    ens: &GcsEnsemble,
    params: &HamiltonianParams,
    t_grid: &[f64],
    cfg: &EngineConfig,
) -> Result<Trajectory> {
    ens.validate()?;
    check_model(ens, params)?;
    params.validate()?;
    cfg.validate()?;
    let norm0 = ensemble_norm(ens);
    if !(norm0 >= 1e-6) {
        return Err(Error::DegenerateState { norm: norm0 });
    }

    let (n, m, bosons) = (ens.len(), ens.modes(), ens.bosons());
    let mut traj = Trajectory {
        modes: m,
        bosons,
        basis_size: n,
        times: Vec::with_capacity(t_grid.len()),
        observables: Vec::with_capacity(t_grid.len()),
        snapshots: Vec::new(),
        stats: Dopri5Stats::default(),
    };
    let mut ws = Workspace::new(n, m);
    let last_discarded = std::cell::Cell::new(0usize);
    let mut last_good = ens.clone();
    let mut last_t = t_grid.first().copied().unwrap_or(0.0);
    let opts = Dopri5Options {
        rtol: cfg.rtol,
        atol: cfg.atol,
        max_step: cfg.max_step,
        ..Dopri5Options::default()
    };
    let mut u = pack(ens);
    let n_out = t_grid.len();
    let shift = match (cfg.shift_energy, t_grid.first()) {
        (true, Some(&t0)) => energy_expectation(ens, params, t0)?,
        _ => 0.0,
    };

    let result = integrate(
        |t, y, dy| {
            let mut sys = ws.assemble(y, params, t)?;
            if shift != 0.0 {
                // T^+ Psi is the A block of T^+ T applied to (A, 0)
                let dim = sys.rhs.len();
                for i in 0..dim {
                    let tpsi: C64 = (0..n).map(|k| sys.lhs[(i, k)] * y[k]).sum();
                    sys.rhs[i] += C64::new(0.0, shift) * tpsi;
                }
            }
            let sol = norm_preserving_solve(&sys, cfg)?;
            dy.copy_from_slice(&sol.0);
            if cfg.fix_gauge {
                fix_gauge(y, dy, n, m, bosons);
            }
            if dy.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite { what: "time derivative", t });
            }
            last_discarded.set(sol.1);
            Ok(())
        },
        &mut u,
        t_grid,
        &opts,
        |t, y| {
            let snapshot = unpack(y, n, m, bosons);
            let obs = observe(&snapshot, params, t, last_discarded.get())?;
            let drift = (obs.norm - norm0).abs();
            if !(drift <= cfg.norm_drift_limit) {
                return Err(Error::NormDrift { t, drift });
            }
            let i = traj.times.len();
            traj.times.push(t);
            traj.observables.push(obs);
            if i % cfg.record_stride == 0 || i + 1 == n_out {
                traj.snapshots.push((t, snapshot.clone()));
            }
            last_good = snapshot;
            last_t = t;
            Ok(())
        },
    );

    match result {
        Ok(stats) => {
            traj.stats = stats;
            Ok(traj)
        }
        Err(e) => Err(Error::Propagation {
            t: last_t,
            cause: Box::new(e),
            snapshot: Box::new(last_good),
        }),
    }
}
