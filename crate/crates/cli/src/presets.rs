//! Bundled scenarios. Each one reproduces a single published study; the
//! docstrings say which.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::PathBuf;

use bhgcs::{EngineConfig, GcsParams, GridSpec, HamiltonianParams, SamplingMode, C64};

use crate::config::{Initial, OracleMode, ScenarioConfig};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn() -> ScenarioConfig,
}

pub fn all() -> &'static [Preset] {
    &[
        Preset { name: "two-mode-driven", summary: "M=2, S=50, driven hopping, random grid, N=25", build: two_mode_driven },
        Preset { name: "two-mode-driven-n50", summary: "as two-mode-driven with N=50", build: two_mode_driven_n50 },
        Preset { name: "two-mode-mean-field", summary: "as two-mode-driven with a single coherent state", build: two_mode_mean_field },
        Preset { name: "three-mode-gcs", summary: "M=3, S=20, U=0.1, coherent initial state, N=50", build: three_mode_gcs },
        Preset { name: "rabi", summary: "M=3, S=20, U=0.03 (Lambda=0.6), all bosons in mode 1, N=50", build: rabi },
        Preset { name: "three-mode-josephson", summary: "M=3, S=20, U=0.2 (Lambda=4), all bosons in mode 1, N=50", build: three_mode_josephson },
        Preset { name: "six-mode", summary: "M=6, S=20, U=0.1, beta=sqrt(pi)/32, N=500", build: six_mode },
        Preset { name: "six-mode-vn", summary: "M=6, S=20, U=0.1, von Neumann spacing, N=800", build: six_mode_vn },
        Preset { name: "two-mode-diagonal", summary: "two-mode-driven on a 5x5 diagonal grid, beta=sqrt(pi)/4", build: two_mode_diagonal },
        Preset { name: "two-mode-s200-diagonal", summary: "M=2, S=200 driven, 9x9 diagonal grid, beta=sqrt(pi)/8", build: two_mode_s200_diagonal },
        Preset { name: "four-mode", summary: "M=4, S=30, U=0.1, random grid, beta=sqrt(pi)/32, N=169", build: four_mode },
    ]
}

pub fn find(name: &str) -> Option<&'static Preset> {
    all().iter().find(|p| p.name == name)
}

fn scenario(name: &str, model: HamiltonianParams, initial: Initial, size: usize, beta: f64, t_final: f64) -> ScenarioConfig {
    let center = initial.center(model.bosons);
    let mut grid = GridSpec::new(center, size);
    grid.beta = beta;
    ScenarioConfig {
        name: name.into(),
        model,
        initial,
        grid,
        engine: EngineConfig::default(),
        t_final,
        n_samples: 201,
        run_oracle: OracleMode::Auto,
        oracle_cap: bhgcs::oracle::DEFAULT_ORACLE_CAP,
        output_dir: PathBuf::from("out").join(name),
    }
}

fn driven_model(bosons: u32) -> HamiltonianParams {
    HamiltonianParams {
        drive_amplitude: 0.5,
        drive_frequency: 2.0 * PI,
        interaction: 0.1,
        ..HamiltonianParams::new(2, bosons)
    }
}

fn imbalanced(modes: usize, bosons: u32) -> Initial {
    let mut xi = vec![C64::new(0.0, 0.0); modes];
    xi[0] = C64::new(-(0.7_f64).sqrt(), 0.0);
    xi[1] = C64::new((0.3_f64).sqrt(), 0.0);
    Initial::Gcs(GcsParams::new(xi, bosons))
}

fn phase_shifted(modes: usize, bosons: u32) -> Initial {
    let mut xi = vec![C64::new(0.0, 0.0); modes];
    xi[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    xi[1] = C64::new(0.0, FRAC_1_SQRT_2);
    Initial::Gcs(GcsParams::new(xi, bosons))
}

fn three_mode(interaction: f64) -> HamiltonianParams {
    HamiltonianParams {
        interaction,
        ..HamiltonianParams::new(3, 20)
    }
}

/// Driven two-mode chain, `J(t) = 1 + 0.5 cos(2 pi t)`, `U = 0.1`, starting
/// from `xi = (-sqrt 0.7, sqrt 0.3)` with 25 states from a random
/// von Neumann grid. Basis-size comparison against the exact curve.
pub fn two_mode_driven() -> ScenarioConfig {
    scenario("two-mode-driven", driven_model(50), imbalanced(2, 50), 25, PI.sqrt(), 10.0)
}

/// The same comparison with 50 basis states.
pub fn two_mode_driven_n50() -> ScenarioConfig {
    ScenarioConfig {
        name: "two-mode-driven-n50".into(),
        output_dir: PathBuf::from("out/two-mode-driven-n50"),
        grid: GridSpec { size: 50, ..two_mode_driven().grid },
        ..two_mode_driven()
    }
}

/// The same comparison with a single coherent state, the mean-field limit.
pub fn two_mode_mean_field() -> ScenarioConfig {
    ScenarioConfig {
        name: "two-mode-mean-field".into(),
        output_dir: PathBuf::from("out/two-mode-mean-field"),
        grid: GridSpec { size: 1, ..two_mode_driven().grid },
        ..two_mode_driven()
    }
}

/// Three modes, 20 bosons, `U = 0.1`, initial `xi = (1/sqrt2, i/sqrt2, 0)`,
/// 50 states. Reference case for convergence in N.
pub fn three_mode_gcs() -> ScenarioConfig {
    scenario("three-mode-gcs", three_mode(0.1), phase_shifted(3, 20), 50, PI.sqrt(), 10.0)
}

/// All 20 bosons in the first of three modes, `U = 0.03` (Rabi regime,
/// `Lambda = 0.6`), 50 states.
pub fn rabi() -> ScenarioConfig {
    scenario("rabi", three_mode(0.03), Initial::Fock(vec![20, 0, 0]), 50, PI.sqrt(), 10.0)
}

/// As [`rabi`] with `U = 0.2` (Josephson regime, `Lambda = 4`).
pub fn three_mode_josephson() -> ScenarioConfig {
    scenario("three-mode-josephson", three_mode(0.2), Initial::Fock(vec![20, 0, 0]), 50, PI.sqrt(), 10.0)
}

/// Six modes, 20 bosons, `U = 0.1`, initial `xi = (1/sqrt2, i/sqrt2, 0, 0, 0, 0)`,
/// 500 states on a random grid of spacing `sqrt(pi)/32`. The Fock sector
/// has 53130 states.
pub fn six_mode() -> ScenarioConfig {
    let model = HamiltonianParams {
        interaction: 0.1,
        ..HamiltonianParams::new(6, 20)
    };
    scenario("six-mode", model, phase_shifted(6, 20), 500, PI.sqrt() / 32.0, 4.0)
}

/// As [`six_mode`] with von Neumann spacing and 800 states.
pub fn six_mode_vn() -> ScenarioConfig {
    let base = six_mode();
    ScenarioConfig {
        name: "six-mode-vn".into(),
        output_dir: PathBuf::from("out/six-mode-vn"),
        grid: GridSpec { size: 800, beta: PI.sqrt(), ..base.grid.clone() },
        ..base
    }
}

/// [`two_mode_driven`] on a 5x5 diagonal grid of spacing `sqrt(pi)/4`,
/// the converged curve of the two-mode grid-spacing study.
pub fn two_mode_diagonal() -> ScenarioConfig {
    let mut cfg = scenario("two-mode-diagonal", driven_model(50), imbalanced(2, 50), 25, PI.sqrt() / 4.0, 10.0);
    cfg.grid.mode = SamplingMode::Diagonal;
    cfg
}

/// Driven two-mode chain with 200 bosons on a 9x9 diagonal grid of spacing
/// `sqrt(pi)/8`, the converged curve of the 200-boson grid-spacing study.
///
/// The basis energies spread over a few hundred units at this boson number,
/// so the tolerances are relaxed to `1e-6` relative to keep the step count
/// near 1600 per unit time.
pub fn two_mode_s200_diagonal() -> ScenarioConfig {
    let mut cfg = scenario("two-mode-s200-diagonal", driven_model(200), imbalanced(2, 200), 81, PI.sqrt() / 8.0, 10.0);
    cfg.grid.mode = SamplingMode::Diagonal;
    cfg.engine.rtol = 1e-6;
    cfg.engine.atol = 1e-8;
    cfg
}

/// Four modes, 30 bosons, constant `J = 1`, `U = 0.1`, initial
/// `xi = (-sqrt 0.7, sqrt 0.3, 0, 0)`, 169 states on a random grid of the
/// optimal spacing `sqrt(pi)/32`. The four-mode basis-size study.
pub fn four_mode() -> ScenarioConfig {
    let model = HamiltonianParams {
        interaction: 0.1,
        ..HamiltonianParams::new(4, 30)
    };
    scenario("four-mode", model, imbalanced(4, 30), 169, PI.sqrt() / 32.0, 10.0)
}
