//! Browser bindings for the demo page in `www/`. Every function returns a
//! flat `Float64Array` so the page can plot it without a serialization layer.

use std::f64::consts::PI;

use bhgcs::{
    bloch_coordinates, enumerate_fock_basis, fock_dimension, gcs_to_fock, propagate_fock, propagate_gcs,
    sample_ensemble, EngineConfig, FockConfig, GcsEnsemble, GcsParams, GridSpec, HamiltonianParams, SamplingMode,
    C64,
};
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Initial state `(cos(theta/2), sin(theta/2) e^{i phi})`.
fn two_mode_center(theta: f64, phi: f64, bosons: u32) -> GcsParams {
    let (s, c) = (0.5 * theta).sin_cos();
    GcsParams::new(vec![C64::new(c, 0.0), C64::from_polar(s, phi)], bosons)
}

fn spec(center: GcsParams, n: usize, beta_div: f64, diagonal: bool, seed: u64) -> GridSpec {
    let mut spec = GridSpec::new(center, n);
    spec.beta = PI.sqrt() / beta_div;
    spec.seed = seed;
    if diagonal {
        spec.mode = SamplingMode::Diagonal;
    }
    spec
}

/// Samples a two-mode basis and returns its Bloch angles as
/// `[theta_0, phi_0, theta_1, phi_1, ...]`, centre first.
#[wasm_bindgen]
pub fn sample_bloch(
    bosons: u32,
    n: usize,
    beta_div: f64,
    diagonal: bool,
    seed: u64,
    theta: f64,
    phi: f64,
) -> Result<Vec<f64>, JsError> {
    let basis = sample_ensemble(&spec(two_mode_center(theta, phi, bosons), n, beta_div, diagonal, seed)).map_err(js)?;
    let mut out = Vec::with_capacity(2 * basis.len());
    for b in &basis {
        let (t, p) = bloch_coordinates(b).map_err(js)?;
        out.extend([t, p]);
    }
    Ok(out)
}

/// Driven two-mode chain, `J(t) = 1 + j1 cos(2 pi t)`. Returns rows of
/// `[t, pop_1 variational, pop_1 exact]`, `samples` rows in total.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn two_mode_run(
    bosons: u32,
    n: usize,
    beta_div: f64,
    diagonal: bool,
    interaction: f64,
    j1: f64,
    t_final: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    let model = HamiltonianParams {
        drive_amplitude: j1,
        drive_frequency: 2.0 * PI,
        interaction,
        ..HamiltonianParams::new(2, bosons)
    };
    let center = GcsParams::new(vec![C64::new(-(0.7f64).sqrt(), 0.0), C64::new(0.3f64.sqrt(), 0.0)], bosons);
    let basis = sample_ensemble(&spec(center.clone(), n, beta_div, diagonal, 0)).map_err(js)?;
    let mut coeffs = vec![C64::new(0.0, 0.0); basis.len()];
    coeffs[0] = C64::new(1.0, 0.0);
    let ens = GcsEnsemble::new(basis, coeffs).map_err(js)?;

    let samples = samples.max(2);
    let times: Vec<f64> = (0..samples).map(|i| t_final * i as f64 / (samples - 1) as f64).collect();
    let cfg = EngineConfig {
        rtol: 1e-6,
        atol: 1e-8,
        ..EngineConfig::default()
    };
    let gcs = propagate_gcs(&ens, &model, &times, &cfg).map_err(js)?;
    let fock = enumerate_fock_basis(2, bosons).map_err(js)?;
    let psi = gcs_to_fock(&center, &fock).map_err(js)?;
    let exact = propagate_fock(&psi, &model, &fock, &times, &FockConfig::default()).map_err(js)?;

    let mut out = Vec::with_capacity(3 * samples);
    for ((t, o), e) in times.iter().zip(&gcs.observables).zip(&exact.populations) {
        out.extend([*t, o.populations[0], e[0]]);
    }
    Ok(out)
}

/// `[Fock dimension, (M + 1) N, ratio]` for `M` modes, `S` bosons and `N`
/// coherent states.
#[wasm_bindgen]
pub fn compression(modes: usize, bosons: u32, n: usize) -> Result<Vec<f64>, JsError> {
    let dim = fock_dimension(modes, bosons).map_err(js)? as f64;
    let params = ((modes + 1) * n) as f64;
    Ok(vec![dim, params, dim / params])
}
