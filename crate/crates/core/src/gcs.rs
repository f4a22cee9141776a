//! SU(M) coherent states `|S, xi> = (sum_i xi_i a_i^+)^S |0> / sqrt(S!)` and
//! the multi-configuration state `|Psi> = sum_k A_k |S, xi_k>`.
//!
//! Everything here reduces to powers of the single-particle overlap
//! `s = sum_i eta_i^* xi_i`: the overlap of two `(S - p)`-boson states is
//! `s^(S - p)`.

use crate::fock::{FockBasis, FockState};
use crate::hamiltonian::HamiltonianParams;
use crate::linalg::{pinv_solve, CMat};
use crate::{Error, Result, C64};

/// Normalization of `xi` is expected to hold to this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GcsParams {
    pub xi: Vec<C64>,
    pub bosons: u32,
}

impl GcsParams {
    pub fn new(xi: Vec<C64>, bosons: u32) -> Self {
        Self { xi, bosons }
    }

    /// Builds a state from real components.
    pub fn from_real(xi: &[f64], bosons: u32) -> Self {
        Self::new(xi.iter().map(|&x| C64::new(x, 0.0)).collect(), bosons)
    }

    pub fn modes(&self) -> usize {
        self.xi.len()
    }

    /// `sum_i |xi_i|^2`
    pub fn norm_sqr(&self) -> f64 {
        self.xi.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn normalization_error(&self) -> f64 {
        (self.norm_sqr() - 1.0).abs()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization_error() <= NORMALIZATION_TOL
    }
}

/// Single-particle overlap `sum_i eta_i^* xi_i`.
#[inline]
pub fn single_overlap(eta: &[C64], xi: &[C64]) -> C64 {
    eta.iter().zip(xi).map(|(e, x)| e.conj() * x).sum()
}

/// `z^p` for integer `p`, zero for negative `p`.
///
/// Negative exponents only show up multiplied by a vanishing prefactor such
/// as `S (S - 1)` at `S = 1`.
#[inline]
pub(crate) fn ipow(z: C64, p: i64) -> C64 {
    if p < 0 {
        C64::new(0.0, 0.0)
    } else {
        z.powu(p as u32)
    }
}

fn check_pair(eta: &GcsParams, xi: &GcsParams) -> Result<()> {
    if eta.bosons != xi.bosons || eta.modes() != xi.modes() {
        return Err(Error::InvalidParameter(format!(
            "states differ: (M={}, S={}) vs (M={}, S={})",
            eta.modes(),
            eta.bosons,
            xi.modes(),
            xi.bosons
        )));
    }
    Ok(())
}

/// Overlap of the `(S - order)`-boson states built from `eta` and `xi`,
/// `(sum_i eta_i^* xi_i)^(S - order)`.
pub fn gcs_overlap(eta: &GcsParams, xi: &GcsParams, order: u32) -> Result<C64> {
    check_pair(eta, xi)?;
    if order > xi.bosons {
        return Err(Error::OrderTooLarge {
            order,
            bosons: xi.bosons,
        });
    }
    Ok(single_overlap(&eta.xi, &xi.xi).powu(xi.bosons - order))
}

/// `ln k!` for `k = 0..=n`.
pub(crate) fn ln_factorials(n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Amplitude `sqrt(S! / prod n_i!) prod xi_i^{n_i}` of `|xi>` on one
/// occupation vector, evaluated in log space.
pub(crate) fn fock_amplitude(xi: &[C64], occupation: &[u32], ln_fact: &[f64]) -> C64 {
    let s: u32 = occupation.iter().sum();
    let mut log_mag = 0.5 * ln_fact[s as usize];
    let mut phase = 0.0;
    for (x, &n) in xi.iter().zip(occupation) {
        if n == 0 {
            continue;
        }
        let r = x.norm();
        if r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        log_mag += n as f64 * r.ln() - 0.5 * ln_fact[n as usize];
        phase += n as f64 * x.arg();
    }
    C64::from_polar(log_mag.exp(), phase)
}

/// Expansion of `|S, xi>` in the Fock basis.
pub fn gcs_to_fock(xi: &GcsParams, basis: &FockBasis) -> Result<FockState> {
    basis.matches(xi.modes(), xi.bosons)?;
    let ln_fact = ln_factorials(xi.bosons);
    Ok(FockState::new(
        basis
            .iter()
            .map(|occ| fock_amplitude(&xi.xi, occ, &ln_fact))
            .collect(),
    ))
}

/// `<eta| a_j^+ a_k |xi> = S eta_j^* xi_k <eta'|xi'>`, modes 0-based.
pub fn transition_element(eta: &GcsParams, xi: &GcsParams, j: usize, k: usize) -> Result<C64> {
    check_pair(eta, xi)?;
    let m = xi.modes();
    for idx in [j, k] {
        if idx >= m {
            return Err(Error::ModeOutOfRange { index: idx, modes: m });
        }
    }
    let s = xi.bosons;
    let reduced = single_overlap(&eta.xi, &xi.xi).powu(s - 1);
    Ok(eta.xi[j].conj() * xi.xi[k] * reduced * s as f64)
}

/// Multi-configuration state `sum_k A_k |S, xi_k>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GcsEnsemble {
    pub basis: Vec<GcsParams>,
    pub coeffs: Vec<C64>,
}

impl GcsEnsemble {
    pub fn new(basis: Vec<GcsParams>, coeffs: Vec<C64>) -> Result<Self> {
        let ens = Self { basis, coeffs };
        ens.validate()?;
        Ok(ens)
    }

    /// A single coherent state with unit coefficient.
    pub fn single(state: GcsParams) -> Self {
        Self {
            basis: vec![state],
            coeffs: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let first = self
            .basis
            .first()
            .ok_or_else(|| Error::InvalidParameter("ensemble has no basis states".into()))?;
        if self.coeffs.len() != self.basis.len() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for {} basis states",
                self.coeffs.len(),
                self.basis.len()
            )));
        }
        if self
            .basis
            .iter()
            .any(|b| b.bosons != first.bosons || b.modes() != first.modes())
        {
            return Err(Error::InvalidParameter(
                "basis states must share mode and boson counts".into(),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn modes(&self) -> usize {
        self.basis[0].modes()
    }

    pub fn bosons(&self) -> u32 {
        self.basis[0].bosons
    }

    /// Largest `| sum_i |xi_ki|^2 - 1 |` over the basis.
    pub fn max_normalization_error(&self) -> f64 {
        self.basis
            .iter()
            .map(GcsParams::normalization_error)
            .fold(0.0, f64::max)
    }

    /// Fock-space vector of the full state.
    pub fn to_fock(&self, basis: &FockBasis) -> Result<FockState> {
        basis.matches(self.modes(), self.bosons())?;
        let ln_fact = ln_factorials(self.bosons());
        let amplitudes = basis
            .iter()
            .map(|occ| {
                self.basis
                    .iter()
                    .zip(&self.coeffs)
                    .map(|(b, a)| a * fock_amplitude(&b.xi, occ, &ln_fact))
                    .sum()
            })
            .collect();
        Ok(FockState::new(amplitudes))
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&mut self, factor: C64) {
        self.coeffs.iter_mut().for_each(|a| *a *= factor);
    }
}

/// Gram matrix `X_kj = <xi_k|xi_j>`.
pub fn gram_matrix(basis: &[GcsParams]) -> CMat {
    let n = basis.len();
    let mut x = CMat::zeros(n, n);
    for k in 0..n {
        for j in 0..=k {
            let v = single_overlap(&basis[k].xi, &basis[j].xi).powu(basis[k].bosons);
            x[(k, j)] = v;
            x[(j, k)] = v.conj();
        }
    }
    x
}

fn quadratic_form(ens: &GcsEnsemble, mut element: impl FnMut(&[C64], &[C64], C64) -> C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (bk, ak) in ens.basis.iter().zip(&ens.coeffs) {
        let mut row = C64::new(0.0, 0.0);
        for (bj, aj) in ens.basis.iter().zip(&ens.coeffs) {
            let s = single_overlap(&bk.xi, &bj.xi);
            row += aj * element(&bk.xi, &bj.xi, s);
        }
        acc += ak.conj() * row;
    }
    acc
}

/// `<Psi|Psi>`
pub fn ensemble_norm(ens: &GcsEnsemble) -> f64 {
    let s = ens.bosons();
    let v = quadratic_form(ens, |_, _, z| z.powu(s));
    debug_assert!(v.im.abs() <= 1e-10 * v.re.abs().max(1e-300) || v.im.abs() < 1e-14);
    v.re
}

fn checked_norm(ens: &GcsEnsemble) -> Result<f64> {
    let norm = ensemble_norm(ens);
    if !(norm >= 1e-14) {
        return Err(Error::DegenerateState { norm });
    }
    Ok(norm)
}

/// Mode occupations `<n_i> / S`, normalized by `<Psi|Psi>`.
pub fn gcs_populations(ens: &GcsEnsemble) -> Result<Vec<f64>> {
    let norm = checked_norm(ens)?;
    let s = ens.bosons();
    let m = ens.modes();
    let mut pops = vec![0.0; m];
    for (bk, ak) in ens.basis.iter().zip(&ens.coeffs) {
        for (bj, aj) in ens.basis.iter().zip(&ens.coeffs) {
            let w = ak.conj() * aj * single_overlap(&bk.xi, &bj.xi).powu(s - 1);
            for (i, p) in pops.iter_mut().enumerate() {
                *p += (w * bk.xi[i].conj() * bj.xi[i]).re;
            }
        }
    }
    // S <xi'|xi'> S xi* xi / (S norm)
    pops.iter_mut().for_each(|p| *p /= norm);
    Ok(pops)
}

/// `<xi_k|H(t)|xi_j>` for a pair of coherent states sharing `s = <xi_k|xi_j>_1`.
pub(crate) fn hamiltonian_element(
    params: &HamiltonianParams,
    hop: f64,
    eta: &[C64],
    xi: &[C64],
    s: C64,
) -> C64 {
    let bosons = params.bosons as f64;
    let sb = params.bosons as i64;
    let p1 = ipow(s, sb - 1);
    let p2 = ipow(s, sb - 2);
    let m = eta.len();
    let mut hopping = C64::new(0.0, 0.0);
    for i in 0..m - 1 {
        hopping += eta[i].conj() * xi[i + 1] + eta[i + 1].conj() * xi[i];
    }
    let mut onsite = C64::new(0.0, 0.0);
    let mut trap = C64::new(0.0, 0.0);
    for i in 0..m {
        let e = eta[i].conj();
        onsite += e * e * xi[i] * xi[i];
        trap += e * xi[i] * params.trap_weight(i);
    }
    -hopping * p1 * (hop * bosons)
        + onsite * p2 * (0.5 * params.interaction * bosons * (bosons - 1.0))
        + trap * p1 * (0.5 * params.trap * bosons)
}

/// `<Psi|H(t)|Psi> / <Psi|Psi>`
pub fn energy_expectation(ens: &GcsEnsemble, params: &HamiltonianParams, t: f64) -> Result<f64> {
    let norm = checked_norm(ens)?;
    check_model(ens, params)?;
    let hop = params.hopping_at(t);
    let e = quadratic_form(ens, |eta, xi, s| hamiltonian_element(params, hop, eta, xi, s));
    Ok(e.re / norm)
}

pub(crate) fn check_model(ens: &GcsEnsemble, params: &HamiltonianParams) -> Result<()> {
    if ens.modes() != params.modes || ens.bosons() != params.bosons {
        return Err(Error::InvalidParameter(format!(
            "ensemble (M={}, S={}) does not match the model (M={}, S={})",
            ens.modes(),
            ens.bosons(),
            params.modes,
            params.bosons
        )));
    }
    Ok(())
}

/// Result of fitting a Fock-space state with a coherent-state basis.
#[derive(Debug, Clone)]
pub struct Projection {
    pub coeffs: Vec<C64>,
    /// `|| target - sum_k A_k |xi_k> ||`
    pub residual: f64,
    pub dropped: usize,
}

impl Projection {
    pub fn exceeds(&self, threshold: f64) -> bool {
        self.residual > threshold
    }
}

/// Least-squares coefficients of `target` in the span of `basis_set`.
///
/// Solves `X A = b`, `b_k = <xi_k|target>`, with a spectral pseudo-inverse
/// that discards Gram eigenvalues below `reg * lambda_max`. The residual
/// `|target - sum_k A_k |xi_k>|` is evaluated in the Fock basis.
pub fn project_state(
    target: &FockState,
    fock_basis: &FockBasis,
    basis_set: &[GcsParams],
    reg: f64,
) -> Result<Projection> {
    let first = basis_set
        .first()
        .ok_or_else(|| Error::InvalidParameter("projection basis is empty".into()))?;
    fock_basis.matches(first.modes(), first.bosons)?;
    if target.len() != fock_basis.len() {
        return Err(Error::InvalidParameter("target does not match the Fock basis".into()));
    }
    let ln_fact = ln_factorials(first.bosons);
    let support: Vec<(usize, C64)> = target
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, a)| (i, *a))
        .collect();
    let b: Vec<C64> = basis_set
        .iter()
        .map(|g| {
            support
                .iter()
                .map(|&(i, a)| fock_amplitude(&g.xi, fock_basis.state(i), &ln_fact).conj() * a)
                .sum()
        })
        .collect();
    let x = gram_matrix(basis_set);
    let (coeffs, dropped) = pinv_solve(&x, &b, reg)?;

    // the Gram form |t|^2 - 2 Re(A^+ b) + A^+ X A cancels to ~1e-8 on exact fits
    let mut diff = target.amplitudes.clone();
    for (g, ck) in basis_set.iter().zip(&coeffs) {
        for (i, d) in diff.iter_mut().enumerate() {
            *d -= ck * fock_amplitude(&g.xi, fock_basis.state(i), &ln_fact);
        }
    }
    let res2: f64 = diff.iter().map(|d| d.norm_sqr()).sum();
    Ok(Projection {
        coeffs,
        residual: res2.max(0.0).sqrt(),
        dropped,
    })
}
