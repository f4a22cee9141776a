//! Scenario files: flat TOML key/value documents.
//!
//! ```toml
//! preset = "two-mode-driven"   # optional starting point, other keys override it
//! M = 2
//! S = 50
//! J0 = 1.0
//! J1 = 0.5
//! omega = 6.283185307179586
//! U = 0.1
//! K = 0.0
//! j0 = 1.5                     # trap centre, defaults to (M+1)/2
//! initial_xi = [-0.8366600265340756, 0.5477225575051661]   # or [[re, im], ...]
//! # initial_fock = [20, 0, 0]
//! grid_mode = "random"         # or "diagonal"
//! N = 25
//! beta_div = 1.0               # beta = sqrt(pi) / beta_div, or give beta directly
//! seed = 0
//! extent = 3                   # optional lattice half-width
//! reg_epsilon = 1e-10
//! regularization = "tikhonov"  # or "cutoff"
//! rtol = 1e-8
//! atol = 1e-10
//! max_step = 0.1
//! record_stride = 1
//! norm_drift_limit = 1e-3      # abort when <Psi|Psi> drifts further
//! shift_energy = true          # propagate under H - E(0), a global phase only
//! t_final = 10.0
//! n_samples = 201
//! run_oracle = "auto"          # true, false or "auto"
//! oracle_cap = 1000000
//! output_dir = "out"
//! sweep_N = [15, 25, 50]       # sweep files only
//! sweep_beta_div = [1, 4, 8]   # or sweep_beta
//! ```

use std::path::PathBuf;

use bhgcs::oracle::DEFAULT_ORACLE_CAP;
use bhgcs::{EngineConfig, GcsParams, GridSpec, HamiltonianParams, SamplingMode, SpectralFilter, C64};
use toml::{Table, Value};

use crate::presets;

/// Starting state of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    /// A single coherent state, which is also the grid centre.
    Gcs(GcsParams),
    /// An occupation-number state, projected onto the sampled basis.
    Fock(Vec<u32>),
}

impl Initial {
    /// Coherent state the lattice is centred on. For a Fock state this is
    /// the coherent state with the same mean occupations.
    pub fn center(&self, bosons: u32) -> GcsParams {
        match self {
            Initial::Gcs(p) => p.clone(),
            Initial::Fock(occ) => {
                let s = bosons as f64;
                GcsParams::new(occ.iter().map(|&n| C64::new((n as f64 / s).sqrt(), 0.0)).collect(), bosons)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Run the reference when the Fock sector is below the cap.
    #[default]
    Auto,
    /// Always run it, lifting the cap.
    On,
    Off,
}

impl std::str::FromStr for OracleMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Self::Auto),
            "on" | "true" => Ok(Self::On),
            "off" | "false" => Ok(Self::Off),
            other => Err(format!("expected auto, on or off, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: HamiltonianParams,
    pub initial: Initial,
    pub grid: GridSpec,
    pub engine: EngineConfig,
    pub t_final: f64,
    pub n_samples: usize,
    pub run_oracle: OracleMode,
    pub oracle_cap: u64,
    pub output_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn times(&self) -> Vec<f64> {
        let last = self.n_samples - 1;
        (0..self.n_samples)
            .map(|i| if i == last { self.t_final } else { self.t_final * i as f64 / last as f64 })
            .collect()
    }

    /// `U S / J0`, the regime parameter.
    pub fn lambda(&self) -> f64 {
        self.model.lambda()
    }

    /// Checks every invariant, returning all violations at once.
    pub fn check(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if let Err(e) = self.model.validate() {
            errors.push(e.to_string());
        }
        match &self.initial {
            Initial::Gcs(p) => {
                if p.modes() != self.model.modes {
                    errors.push(format!("initial_xi has {} entries, M = {}", p.modes(), self.model.modes));
                } else if !p.is_normalized() {
                    errors.push(format!("initial_xi must be normalized, |xi|^2 = {}", p.norm_sqr()));
                }
            }
            Initial::Fock(occ) => {
                if occ.len() != self.model.modes {
                    errors.push(format!("initial_fock has {} entries, M = {}", occ.len(), self.model.modes));
                }
                let total: u64 = occ.iter().map(|&n| n as u64).sum();
                if total != self.model.bosons as u64 {
                    errors.push(format!("initial_fock sums to {total}, S = {}", self.model.bosons));
                }
            }
        }
        if self.grid.size == 0 {
            errors.push("N must be at least 1".into());
        } else if self.grid.modes == self.model.modes {
            if let Err(e) = self.grid.validate() {
                errors.push(e.to_string());
            }
        }
        if let Err(e) = self.engine.validate() {
            errors.push(e.to_string());
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            errors.push(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.n_samples < 2 {
            errors.push(format!("n_samples must be at least 2, got {}", self.n_samples));
        }
        errors
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: ScenarioConfig,
    pub sweep_n: Vec<usize>,
    pub sweep_beta: Vec<f64>,
}

const SCENARIO_KEYS: &[&str] = &[
    "preset", "name", "M", "S", "J0", "J1", "omega", "U", "K", "j0", "initial_xi", "initial_fock",
    "grid_mode", "N", "beta", "beta_div", "seed", "extent", "reg_epsilon", "regularization", "rtol",
    "atol", "max_step", "record_stride", "norm_drift_limit", "shift_energy", "t_final", "n_samples", "run_oracle", "oracle_cap",
    "output_dir",
];
const SWEEP_KEYS: &[&str] = &["sweep_N", "sweep_beta", "sweep_beta_div"];
const REQUIRED_KEYS: &[&str] = &["M", "S", "N", "t_final"];

/// Collects typed values and every problem found along the way.
struct Reader<'a> {
    table: &'a Table,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn float(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.errors.push(format!("{key}: expected a number, got {}", other.type_str()));
                None
            }
        }
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        match self.table.get(key)? {
            Value::Integer(v) if *v >= 0 => Some(*v as u64),
            Value::Integer(v) => {
                self.errors.push(format!("{key}: must be non-negative, got {v}"));
                None
            }
            other => {
                self.errors.push(format!("{key}: expected an integer, got {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.table.get(key)? {
            Value::Boolean(b) => Some(*b),
            other => {
                self.errors.push(format!("{key}: expected a boolean, got {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.errors.push(format!("{key}: expected a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.string(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(format!("{key}: {e}"));
                None
            }
        }
    }

    fn array(&mut self, key: &str) -> Option<&'a Vec<Value>> {
        match self.table.get(key)? {
            Value::Array(a) => Some(a),
            other => {
                self.errors.push(format!("{key}: expected an array, got {}", other.type_str()));
                None
            }
        }
    }

    fn float_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let arr = self.array(key)?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, v) in arr.iter().enumerate() {
            match v {
                Value::Float(x) => out.push(*x),
                Value::Integer(x) => out.push(*x as f64),
                other => {
                    self.errors.push(format!("{key}[{i}]: expected a number, got {}", other.type_str()));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn uint_list(&mut self, key: &str) -> Option<Vec<u64>> {
        let arr = self.array(key)?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, v) in arr.iter().enumerate() {
            match v {
                Value::Integer(x) if *x >= 0 => out.push(*x as u64),
                other => {
                    self.errors.push(format!("{key}[{i}]: expected a non-negative integer, got {other}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn complex_list(&mut self, key: &str) -> Option<Vec<C64>> {
        let arr = self.array(key)?;
        let mut out = Vec::with_capacity(arr.len());
        for (i, v) in arr.iter().enumerate() {
            let z = match v {
                Value::Float(x) => Some(C64::new(*x, 0.0)),
                Value::Integer(x) => Some(C64::new(*x as f64, 0.0)),
                Value::Array(pair) if pair.len() == 2 => match (as_f64(&pair[0]), as_f64(&pair[1])) {
                    (Some(re), Some(im)) => Some(C64::new(re, im)),
                    _ => None,
                },
                _ => None,
            };
            match z {
                Some(z) => out.push(z),
                None => {
                    self.errors.push(format!("{key}[{i}]: expected a number or a [re, im] pair, got {v}"));
                    return None;
                }
            }
        }
        Some(out)
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(x) => Some(*x as f64),
        _ => None,
    }
}

fn parse_table(raw: &str) -> Result<Table, Vec<String>> {
    raw.parse::<Table>().map_err(|e| vec![format!("malformed document: {}", e.message())])
}

/// Parses and validates a scenario document.
pub fn validate_config(raw: &str) -> Result<ScenarioConfig, Vec<String>> {
    let table = parse_table(raw)?;
    let mut errors: Vec<String> = table
        .keys()
        .filter(|k| !SCENARIO_KEYS.contains(&k.as_str()))
        .map(|k| format!("unknown key {k:?}"))
        .collect();
    match build(&table) {
        Ok(cfg) if errors.is_empty() => Ok(cfg),
        Ok(_) => Err(errors),
        Err(mut more) => {
            errors.append(&mut more);
            Err(errors)
        }
    }
}

/// Parses and validates a sweep document: a scenario plus `sweep_N` and
/// `sweep_beta` or `sweep_beta_div`. Missing lists default to the base value.
pub fn validate_sweep(raw: &str) -> Result<SweepConfig, Vec<String>> {
    let table = parse_table(raw)?;
    let mut errors: Vec<String> = table
        .keys()
        .filter(|k| !SCENARIO_KEYS.contains(&k.as_str()) && !SWEEP_KEYS.contains(&k.as_str()))
        .map(|k| format!("unknown key {k:?}"))
        .collect();
    let base = build(&table);
    let mut r = Reader { table: &table, errors: Vec::new() };
    let sweep_n = r.uint_list("sweep_N").map(|v| v.into_iter().map(|n| n as usize).collect::<Vec<_>>());
    let beta = match (r.float_list("sweep_beta"), r.float_list("sweep_beta_div")) {
        (Some(_), Some(_)) => {
            r.errors.push("give either sweep_beta or sweep_beta_div, not both".into());
            None
        }
        (Some(b), None) => Some(b),
        (None, Some(d)) => Some(d.iter().map(|d| std::f64::consts::PI.sqrt() / d).collect()),
        (None, None) => None,
    };
    errors.append(&mut r.errors);
    let base = match base {
        Ok(b) => Some(b),
        Err(mut e) => {
            errors.append(&mut e);
            None
        }
    };
    if let Some(list) = &sweep_n {
        if list.is_empty() {
            errors.push("sweep_N must not be empty".into());
        }
        if list.contains(&0) {
            errors.push("sweep_N entries must be at least 1".into());
        }
    }
    if let Some(list) = &beta {
        if list.is_empty() {
            errors.push("beta sweep must not be empty".into());
        }
        if list.iter().any(|b| !(*b > 0.0) || !b.is_finite()) {
            errors.push("beta sweep entries must be positive".into());
        }
    }
    match base {
        Some(base) if errors.is_empty() => Ok(SweepConfig {
            sweep_n: sweep_n.unwrap_or_else(|| vec![base.grid.size]),
            sweep_beta: beta.unwrap_or_else(|| vec![base.grid.beta]),
            base,
        }),
        _ => Err(errors),
    }
}

fn build(table: &Table) -> Result<ScenarioConfig, Vec<String>> {
    let mut r = Reader { table, errors: Vec::new() };

    let preset = match r.string("preset") {
        Some(name) => match presets::find(&name) {
            Some(p) => Some((p.build)()),
            None => {
                let known: Vec<&str> = presets::all().iter().map(|p| p.name).collect();
                r.errors.push(format!("preset: unknown preset {name:?}, known: {}", known.join(", ")));
                return Err(r.errors);
            }
        },
        None => None,
    };

    if preset.is_none() {
        let mut missing: Vec<&str> = REQUIRED_KEYS.iter().copied().filter(|k| !table.contains_key(*k)).collect();
        if !table.contains_key("initial_xi") && !table.contains_key("initial_fock") {
            missing.push("initial_xi or initial_fock");
        }
        if !missing.is_empty() {
            r.errors.push(format!("missing required keys: {}", missing.join(", ")));
        }
    }

    let modes = r.uint("M").map(|v| v as usize).or(preset.as_ref().map(|p| p.model.modes));
    let bosons = match r.uint("S") {
        Some(s) if s > u32::MAX as u64 => {
            r.errors.push(format!("S: {s} is too large"));
            None
        }
        Some(s) => Some(s as u32),
        None => preset.as_ref().map(|p| p.model.bosons),
    };
    let (modes, bosons) = match (modes, bosons) {
        (Some(m), Some(s)) => (m, s),
        _ => return Err(r.errors),
    };

    let mut model = match &preset {
        Some(p) if p.model.modes == modes && p.model.bosons == bosons => p.model.clone(),
        Some(p) => HamiltonianParams {
            modes,
            bosons,
            trap_center: (modes as f64 + 1.0) / 2.0,
            ..p.model.clone()
        },
        None => HamiltonianParams::new(modes, bosons),
    };
    if let Some(v) = r.float("J0") {
        model.hopping = v;
    }
    if let Some(v) = r.float("J1") {
        model.drive_amplitude = v;
    }
    if let Some(v) = r.float("omega") {
        model.drive_frequency = v;
    }
    if let Some(v) = r.float("U") {
        model.interaction = v;
    }
    if let Some(v) = r.float("K") {
        model.trap = v;
    }
    if let Some(v) = r.float("j0") {
        model.trap_center = v;
    }

    let initial = match (r.complex_list("initial_xi"), r.uint_list("initial_fock")) {
        (Some(_), Some(_)) => {
            r.errors.push("give either initial_xi or initial_fock, not both".into());
            None
        }
        (Some(xi), None) => Some(Initial::Gcs(GcsParams::new(xi, bosons))),
        (None, Some(occ)) => {
            if occ.iter().any(|&n| n > u32::MAX as u64) {
                r.errors.push("initial_fock: occupation too large".into());
                None
            } else {
                Some(Initial::Fock(occ.into_iter().map(|n| n as u32).collect()))
            }
        }
        (None, None) => preset.as_ref().map(|p| match &p.initial {
            Initial::Gcs(xi) => Initial::Gcs(GcsParams::new(xi.xi.clone(), bosons)),
            other => other.clone(),
        }),
    };

    let mut grid = preset.as_ref().map(|p| p.grid.clone());
    let size = r.uint("N").map(|n| n as usize).or(grid.as_ref().map(|g| g.size)).unwrap_or(0);
    let mode = r.parsed::<SamplingMode>("grid_mode").or(grid.as_ref().map(|g| g.mode));
    let beta = match (r.float("beta"), r.float("beta_div")) {
        (Some(_), Some(_)) => {
            r.errors.push("give either beta or beta_div, not both".into());
            None
        }
        (Some(b), None) => Some(b),
        (None, Some(d)) => Some(std::f64::consts::PI.sqrt() / d),
        (None, None) => None,
    };
    let seed = r.uint("seed");
    let extent = match r.uint("extent") {
        Some(e) if e > u32::MAX as u64 => {
            r.errors.push("extent: too large".into());
            None
        }
        other => other.map(|e| e as u32),
    };

    let mut engine = preset.as_ref().map(|p| p.engine).unwrap_or_default();
    if let Some(v) = r.float("reg_epsilon") {
        engine.reg_epsilon = v;
    }
    if let Some(name) = r.string("regularization") {
        match name.as_str() {
            "tikhonov" => engine.filter = SpectralFilter::Tikhonov,
            "cutoff" => engine.filter = SpectralFilter::Cutoff,
            other => r.errors.push(format!("regularization: expected tikhonov or cutoff, got {other:?}")),
        }
    }
    if let Some(v) = r.float("rtol") {
        engine.rtol = v;
    }
    if let Some(v) = r.float("atol") {
        engine.atol = v;
    }
    if let Some(v) = r.float("max_step") {
        engine.max_step = v;
    }
    if let Some(v) = r.uint("record_stride") {
        engine.record_stride = v as usize;
    }
    if let Some(v) = r.float("norm_drift_limit") {
        engine.norm_drift_limit = v;
    }
    if let Some(v) = r.boolean("shift_energy") {
        engine.shift_energy = v;
    }

    let t_final = r.float("t_final").or(preset.as_ref().map(|p| p.t_final)).unwrap_or(f64::NAN);
    let n_samples = r
        .uint("n_samples")
        .map(|v| v as usize)
        .or(preset.as_ref().map(|p| p.n_samples))
        .unwrap_or(201);
    let run_oracle = match table.get("run_oracle") {
        None => preset.as_ref().map(|p| p.run_oracle).unwrap_or_default(),
        Some(Value::Boolean(true)) => OracleMode::On,
        Some(Value::Boolean(false)) => OracleMode::Off,
        Some(Value::String(s)) => s.parse().unwrap_or_else(|e| {
            r.errors.push(format!("run_oracle: {e}"));
            OracleMode::Auto
        }),
        Some(other) => {
            r.errors.push(format!("run_oracle: expected a boolean or \"auto\", got {}", other.type_str()));
            OracleMode::Auto
        }
    };
    let oracle_cap = r.uint("oracle_cap").unwrap_or(DEFAULT_ORACLE_CAP);
    let output_dir = r
        .string("output_dir")
        .map(PathBuf::from)
        .or(preset.as_ref().map(|p| p.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let name = r
        .string("name")
        .or(preset.as_ref().map(|p| p.name.clone()))
        .unwrap_or_else(|| "scenario".into());

    let Some(initial) = initial else {
        return Err(r.errors);
    };
    let center = initial.center(bosons);
    let reuse_grid = grid.as_ref().is_some_and(|g| g.modes == modes && g.bosons == bosons);
    let mut g = match grid.take() {
        Some(g) if reuse_grid => GridSpec { center: center.clone(), ..g },
        _ => GridSpec::new(center, size),
    };
    g.size = size;
    if let Some(m) = mode {
        g.mode = m;
    }
    if let Some(b) = beta {
        g.beta = b;
    }
    if let Some(s) = seed {
        g.seed = s;
    }
    if extent.is_some() {
        g.extent = extent;
    }

    let cfg = ScenarioConfig {
        name,
        model,
        initial,
        grid: g,
        engine,
        t_final,
        n_samples,
        run_oracle,
        oracle_cap,
        output_dir,
    };
    r.errors.extend(cfg.check());
    if r.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(r.errors)
    }
}
