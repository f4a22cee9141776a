//! Running scenarios and sweeps.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use bhgcs::io::{fmt_float, fock_trajectory_table, trajectory_table, write_snapshot, Table};
use bhgcs::{
    enumerate_fock_basis, fock_dimension, gcs_to_fock, project_state, propagate_fock, propagate_gcs,
    sample_ensemble, FockBasis, FockConfig, FockState, FockTrajectory, GcsEnsemble, Trajectory, C64,
};

use crate::config::{Initial, OracleMode, ScenarioConfig, SweepConfig};
use crate::CliError;

/// Projections leaving more than this outside the basis span are flagged.
pub const PROJECTION_WARNING: f64 = 1e-3;

#[derive(Debug)]
pub struct RunReport {
    pub name: String,
    pub trajectory_csv: PathBuf,
    pub oracle_csv: Option<PathBuf>,
    pub comparison_csv: Option<PathBuf>,
    /// Largest `|pop_GCS - pop_Fock|` over all times and modes.
    pub max_oracle_deviation: Option<f64>,
    pub projection_residual: Option<f64>,
    pub notices: Vec<String>,
    pub trajectory: Trajectory,
    pub wall_time: f64,
}

/// Exact reference shared by every cell of a sweep.
pub struct Reference {
    pub modes: usize,
    pub trajectory: FockTrajectory,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    table.write(BufWriter::new(file)).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn initial_fock_state(cfg: &ScenarioConfig, basis: &FockBasis) -> Result<FockState, CliError> {
    let state = match &cfg.initial {
        Initial::Gcs(xi) => gcs_to_fock(xi, basis)?,
        Initial::Fock(occ) => FockState::basis_vector(basis, occ)?,
    };
    Ok(state)
}

/// Whether the reference should run, plus a notice when it is skipped.
fn oracle_decision(cfg: &ScenarioConfig) -> Result<(bool, Option<String>), CliError> {
    let dim = fock_dimension(cfg.model.modes, cfg.model.bosons)?;
    Ok(match cfg.run_oracle {
        OracleMode::Off => (false, None),
        OracleMode::On => (true, None),
        OracleMode::Auto if dim <= cfg.oracle_cap => (true, None),
        OracleMode::Auto => (
            false,
            Some(format!(
                "Fock sector has {dim} states, above the oracle cap {}; reference skipped (use --oracle on to force it)",
                cfg.oracle_cap
            )),
        ),
    })
}

/// Propagates the exact reference for `cfg`.
pub fn run_reference(cfg: &ScenarioConfig) -> Result<Reference, CliError> {
    let basis = enumerate_fock_basis(cfg.model.modes, cfg.model.bosons)?;
    let psi = initial_fock_state(cfg, &basis)?;
    let fc = FockConfig {
        rtol: 1e-10,
        atol: 1e-12,
        cap: cfg.oracle_cap,
        allow_large: cfg.run_oracle == OracleMode::On,
        ..FockConfig::default()
    };
    let trajectory = propagate_fock(&psi, &cfg.model, &basis, &cfg.times(), &fc)?;
    Ok(Reference { modes: cfg.model.modes, trajectory })
}

/// Sampled basis with initial coefficients.
///
/// A coherent initial state is the first basis member, so `A = (1, 0, ..., 0)`
/// exactly. A Fock initial state is projected onto the basis and the
/// residual returned.
pub fn initial_ensemble(cfg: &ScenarioConfig) -> Result<(GcsEnsemble, Option<f64>), CliError> {
    let basis = sample_ensemble(&cfg.grid)?;
    match &cfg.initial {
        Initial::Gcs(_) => {
            let mut coeffs = vec![C64::new(0.0, 0.0); basis.len()];
            coeffs[0] = C64::new(1.0, 0.0);
            Ok((GcsEnsemble::new(basis, coeffs)?, None))
        }
        Initial::Fock(occ) => {
            let fock = enumerate_fock_basis(cfg.model.modes, cfg.model.bosons)?;
            let target = FockState::basis_vector(&fock, occ)?;
            let proj = project_state(&target, &fock, &basis, cfg.engine.reg_epsilon)?;
            let residual = proj.residual;
            Ok((GcsEnsemble::new(basis, proj.coeffs)?, Some(residual)))
        }
    }
}

fn max_population_deviation(traj: &Trajectory, reference: &FockTrajectory) -> f64 {
    traj.observables
        .iter()
        .zip(&reference.populations)
        .flat_map(|(o, r)| o.populations.iter().zip(r).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn comparison_table(traj: &Trajectory, reference: &FockTrajectory) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.modes).map(|i| format!("abs_diff_pop_{i}")));
    let rows = traj
        .observables
        .iter()
        .zip(&reference.populations)
        .map(|(o, r)| {
            let mut row = vec![o.t];
            row.extend(o.populations.iter().zip(r).map(|(a, b)| (a - b).abs()));
            row
        })
        .collect();
    Table { header, rows }
}

/// Runs one scenario and writes its CSVs into `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport, CliError> {
    let errors = cfg.check();
    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    let (run_oracle, notice) = oracle_decision(cfg)?;
    let reference = if run_oracle { Some(run_reference(cfg)?) } else { None };
    let mut report = run_with_reference(cfg, reference.as_ref())?;
    report.notices.extend(notice);
    Ok(report)
}

/// Runs one scenario against an already computed reference.
pub fn run_with_reference(cfg: &ScenarioConfig, reference: Option<&Reference>) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let mut notices = Vec::new();
    if cfg.grid.exceeds_completeness_bound() {
        notices.push(format!(
            "grid spacing {} exceeds sqrt(pi); the lattice need not be complete",
            cfg.grid.beta
        ));
    }
    let (ens, residual) = initial_ensemble(cfg)?;
    if let Some(r) = residual.filter(|r| *r > PROJECTION_WARNING) {
        notices.push(format!("initial state is represented only to residual {r:.3e}"));
    }
    let traj = propagate_gcs(&ens, &cfg.model, &cfg.times(), &cfg.engine)?;

    create_dir(&cfg.output_dir)?;
    let trajectory_csv = cfg.output_dir.join("trajectory.csv");
    write_table(&trajectory_csv, &trajectory_table(&traj))?;
    if let Some(final_ens) = traj.final_ensemble() {
        let path = cfg.output_dir.join("final_state.bin");
        let file = File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        write_snapshot(BufWriter::new(file), final_ens, *traj.times.last().unwrap_or(&0.0))?;
    }

    let (oracle_csv, comparison_csv, max_dev) = match reference {
        Some(r) => {
            let oracle_csv = cfg.output_dir.join("oracle.csv");
            write_table(&oracle_csv, &fock_trajectory_table(&r.trajectory, r.modes))?;
            let comparison_csv = cfg.output_dir.join("comparison.csv");
            write_table(&comparison_csv, &comparison_table(&traj, &r.trajectory))?;
            (Some(oracle_csv), Some(comparison_csv), Some(max_population_deviation(&traj, &r.trajectory)))
        }
        None => (None, None, None),
    };

    Ok(RunReport {
        name: cfg.name.clone(),
        trajectory_csv,
        oracle_csv,
        comparison_csv,
        max_oracle_deviation: max_dev,
        projection_residual: residual,
        notices,
        trajectory: traj,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One cell of a sweep.
#[derive(Debug)]
pub struct SweepCell {
    pub size: usize,
    pub beta: f64,
    /// Largest population difference from the largest-N run at the same beta.
    pub deviation_from_largest: Option<f64>,
    pub oracle_deviation: Option<f64>,
    pub wall_time: f64,
    pub status: String,
}

#[derive(Debug)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
    pub summary_csv: PathBuf,
    pub notices: Vec<String>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.status != "ok").count()
    }
}

fn cell_dir(base: &Path, size: usize, beta: f64) -> PathBuf {
    base.join(format!("N{size}_beta{beta:.6}"))
}

/// Runs every `(N, beta)` combination on up to `workers` threads. Failed
/// cells are recorded and the sweep carries on.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepReport, CliError> {
    let errors = cfg.base.check();
    if !errors.is_empty() {
        return Err(CliError::Validation(errors));
    }
    let (run_oracle, notice) = oracle_decision(&cfg.base)?;
    let mut notices: Vec<String> = notice.into_iter().collect();
    let reference = if run_oracle { Some(run_reference(&cfg.base)?) } else { None };

    let jobs: Vec<(usize, f64)> = cfg
        .sweep_beta
        .iter()
        .flat_map(|&b| cfg.sweep_n.iter().map(move |&n| (n, b)))
        .collect();
    let results: Mutex<Vec<Option<Result<RunReport, String>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(size, beta)) = jobs.get(i) else { break };
                let mut cell = cfg.base.clone();
                cell.grid.size = size;
                cell.grid.beta = beta;
                cell.name = format!("{}-N{size}-beta{beta:.6}", cfg.base.name);
                cell.output_dir = cell_dir(&cfg.base.output_dir, size, beta);
                let checked = cell.check();
                let outcome = if checked.is_empty() {
                    run_with_reference(&cell, reference.as_ref()).map_err(|e| e.to_string())
                } else {
                    Err(checked.join("; "))
                };
                results.lock().expect("worker panicked")[i] = Some(outcome);
            });
        }
    });
    let results: Vec<Result<RunReport, String>> = results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.unwrap_or_else(|| Err("not run".into())))
        .collect();

    let mut cells = Vec::with_capacity(jobs.len());
    for (i, &(size, beta)) in jobs.iter().enumerate() {
        // largest N at this beta that succeeded
        let largest = jobs
            .iter()
            .enumerate()
            .filter(|(j, &(_, b))| b == beta && results[*j].is_ok())
            .max_by_key(|(_, &(n, _))| n)
            .and_then(|(j, _)| results[j].as_ref().ok());
        let cell = match &results[i] {
            Ok(r) => {
                notices.extend(r.notices.iter().map(|n| format!("N={size}, beta={beta}: {n}")));
                SweepCell {
                    size,
                    beta,
                    deviation_from_largest: largest.map(|l| {
                        r.trajectory
                            .observables
                            .iter()
                            .zip(&l.trajectory.observables)
                            .flat_map(|(a, b)| a.populations.iter().zip(&b.populations).map(|(x, y)| (x - y).abs()))
                            .fold(0.0, f64::max)
                    }),
                    oracle_deviation: r.max_oracle_deviation,
                    wall_time: r.wall_time,
                    status: "ok".into(),
                }
            }
            Err(e) => SweepCell {
                size,
                beta,
                deviation_from_largest: None,
                oracle_deviation: None,
                wall_time: 0.0,
                status: format!("failed: {}", e.replace(',', ";")),
            },
        };
        cells.push(cell);
    }

    // soft convergence check against the reference
    for &beta in &cfg.sweep_beta {
        let row: Vec<&SweepCell> = cells.iter().filter(|c| c.beta == beta && c.oracle_deviation.is_some()).collect();
        let smallest = row.iter().min_by_key(|c| c.size);
        let largest = row.iter().max_by_key(|c| c.size);
        if let (Some(s), Some(l)) = (smallest, largest) {
            if l.oracle_deviation > s.oracle_deviation {
                notices.push(format!(
                    "beta={beta}: deviation at N={} exceeds deviation at N={}",
                    l.size, s.size
                ));
            }
        }
    }

    create_dir(&cfg.base.output_dir)?;
    let summary_csv = cfg.base.output_dir.join("sweep_summary.csv");
    let mut text = String::from("N,beta,deviation_from_largest_N,oracle_deviation,wall_time_s,status\n");
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    for c in &cells {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.size,
            fmt_float(c.beta),
            opt(c.deviation_from_largest),
            opt(c.oracle_deviation),
            fmt_float(c.wall_time),
            c.status
        ));
    }
    fs::write(&summary_csv, text).map_err(|e| CliError::Io(format!("{}: {e}", summary_csv.display())))?;
    Ok(SweepReport { cells, summary_csv, notices })
}
