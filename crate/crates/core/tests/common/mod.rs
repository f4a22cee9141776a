//! Brute-force Fock-space reference implementations shared by the
//! integration tests. Nothing here calls the coherent-state algebra of the
//! crate under test; only the basis enumeration is reused.

#![allow(dead_code)]

use bhgcs::{FockBasis, FockState, GcsEnsemble, GcsParams, HamiltonianParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_xi(rng: &mut ChaCha8Rng, modes: usize, bosons: u32) -> GcsParams {
    let v: Vec<C64> = (0..modes).map(|_| random_complex(rng)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    GcsParams::new(v.into_iter().map(|z| z / n).collect(), bosons)
}

pub fn random_ensemble(rng: &mut ChaCha8Rng, modes: usize, bosons: u32, size: usize) -> GcsEnsemble {
    let basis = (0..size).map(|_| random_xi(rng, modes, bosons)).collect();
    let coeffs = (0..size).map(|_| random_complex(rng)).collect();
    GcsEnsemble::new(basis, coeffs).unwrap()
}

pub fn random_model(rng: &mut ChaCha8Rng, modes: usize, bosons: u32) -> HamiltonianParams {
    HamiltonianParams {
        hopping: rng.random_range(0.2..1.5),
        drive_amplitude: rng.random_range(0.0..0.5),
        drive_frequency: rng.random_range(0.5..7.0),
        interaction: rng.random_range(0.0..1.0),
        trap: rng.random_range(0.0..0.5),
        trap_center: rng.random_range(0.5..modes as f64 + 0.5),
        ..HamiltonianParams::new(modes, bosons)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `<n|S, xi>` from the multinomial expansion, by plain multiplication.
pub fn amplitude(xi: &[C64], occ: &[u32]) -> C64 {
    let s: u32 = occ.iter().sum();
    let mut z = c((factorial(s) / occ.iter().map(|&n| factorial(n)).product::<f64>()).sqrt(), 0.0);
    for (x, &n) in xi.iter().zip(occ) {
        for _ in 0..n {
            z *= x;
        }
    }
    z
}

pub fn expand(xi: &[C64], basis: &FockBasis) -> FockState {
    FockState::new(basis.iter().map(|occ| amplitude(xi, occ)).collect())
}

pub fn expand_ensemble(ens: &GcsEnsemble, basis: &FockBasis) -> FockState {
    let mut out = vec![c(0.0, 0.0); basis.len()];
    for (b, a) in ens.basis.iter().zip(&ens.coeffs) {
        for (o, occ) in out.iter_mut().zip(basis.iter()) {
            *o += a * amplitude(&b.xi, occ);
        }
    }
    FockState::new(out)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `a_i` mapping the `S` sector into the `S - 1` sector.
pub fn annihilate(state: &[C64], from: &FockBasis, to: &FockBasis, mode: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); to.len()];
    let mut occ = vec![0u32; from.modes()];
    for (i, n) in from.iter().enumerate() {
        if n[mode] == 0 {
            continue;
        }
        occ.copy_from_slice(n);
        occ[mode] -= 1;
        out[to.index_of(&occ).unwrap()] += state[i] * (n[mode] as f64).sqrt();
    }
    out
}

/// `a_i^+` mapping the `S - 1` sector into the `S` sector.
pub fn create(state: &[C64], from: &FockBasis, to: &FockBasis, mode: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); to.len()];
    let mut occ = vec![0u32; from.modes()];
    for (i, n) in from.iter().enumerate() {
        occ.copy_from_slice(n);
        occ[mode] += 1;
        out[to.index_of(&occ).unwrap()] += state[i] * (occ[mode] as f64).sqrt();
    }
    out
}

/// `a_j^+ a_k` within one sector.
pub fn hop(state: &[C64], basis: &FockBasis, j: usize, k: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); basis.len()];
    let mut occ = vec![0u32; basis.modes()];
    for (i, n) in basis.iter().enumerate() {
        if n[k] == 0 {
            continue;
        }
        occ.copy_from_slice(n);
        let mut f = (occ[k] as f64).sqrt();
        occ[k] -= 1;
        occ[j] += 1;
        f *= (occ[j] as f64).sqrt();
        out[basis.index_of(&occ).unwrap()] += state[i] * f;
    }
    out
}

/// Dense `H(t)` assembled operator by operator.
pub fn dense_hamiltonian(p: &HamiltonianParams, basis: &FockBasis, t: f64) -> Vec<Vec<f64>> {
    let dim = basis.len();
    let jt = p.hopping + p.drive_amplitude * (p.drive_frequency * t).cos();
    let mut h = vec![vec![0.0; dim]; dim];
    for col in 0..dim {
        let mut e = vec![c(0.0, 0.0); dim];
        e[col] = c(1.0, 0.0);
        for j in 0..p.modes - 1 {
            for (a, b) in [(j, j + 1), (j + 1, j)] {
                for (row, v) in hop(&e, basis, a, b).iter().enumerate() {
                    h[row][col] -= jt * v.re;
                }
            }
        }
        let n = basis.state(col);
        for (i, &ni) in n.iter().enumerate() {
            let ni = ni as f64;
            let w = (i as f64 + 1.0 - p.trap_center).powi(2);
            h[col][col] += 0.5 * p.interaction * ni * (ni - 1.0) + 0.5 * p.trap * w * ni;
        }
    }
    h
}

pub fn apply_dense(h: &[Vec<f64>], x: &[C64]) -> Vec<C64> {
    h.iter().map(|row| row.iter().zip(x).map(|(a, b)| b * *a).sum()).collect()
}

/// `<n_i> / S` of an unnormalized state.
pub fn populations(state: &[C64], basis: &FockBasis) -> Vec<f64> {
    let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
    let s = basis.bosons() as f64;
    (0..basis.modes())
        .map(|i| {
            basis
                .iter()
                .zip(state)
                .map(|(n, a)| n[i] as f64 * a.norm_sqr())
                .sum::<f64>()
                / (norm * s)
        })
        .collect()
}

/// Fock-space Jacobian of `u -> |Psi(u)>`, one column per unknown, in the
/// engine's ordering (all `A_k`, then `xi_km` mode-major). Uses
/// `d|S, xi>/d xi_m = sqrt(S) a_m^+ |S-1, xi>`.
pub fn tangent_columns(ens: &GcsEnsemble, basis: &FockBasis, lower: &FockBasis) -> Vec<Vec<C64>> {
    let n = ens.len();
    let m = ens.modes();
    let s = ens.bosons() as f64;
    let mut cols = vec![Vec::new(); n * (m + 1)];
    for k in 0..n {
        cols[k] = expand(&ens.basis[k].xi, basis).amplitudes;
        let reduced = expand(&ens.basis[k].xi, lower).amplitudes;
        for mode in 0..m {
            let raised = create(&reduced, lower, basis, mode);
            cols[n + mode * n + k] = raised.into_iter().map(|v| v * ens.coeffs[k] * s.sqrt()).collect();
        }
    }
    cols
}
