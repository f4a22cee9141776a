//! Adaptive Dormand-Prince 5(4) integrator for complex-valued systems.
//!
//! The stages act on real and imaginary parts alike. Error control takes the
//! RMS of `|e_i| / (atol + rtol |y_i|)` over complex entries, which makes the
//! accepted step sequence independent of a global phase of `y`.

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size, `f64::INFINITY` for none.
    pub max_step: f64,
    /// Steps shorter than `min_step_ratio * max(1, |t|)` count as underflow.
    pub min_step_ratio: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: f64::INFINITY,
            min_step_ratio: 1e-13,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Dopri5Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dy/dt = f(t, y)` from `times[0]`, calling `record` at every
/// entry of `times` (including the first) with the state at that time.
///
/// `times` must be strictly increasing. The integrator lands exactly on each
/// output time. On return `y` holds the state at the last output time.
pub fn integrate<F, R>(
    mut f: F,
    y: &mut [C64],
    times: &[f64],
    opts: &Dopri5Options,
    mut record: R,
) -> Result<Dopri5Stats>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
    R: FnMut(f64, &[C64]) -> Result<()>,
{
    if times.is_empty() {
        return Ok(Dopri5Stats::default());
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "output times must be strictly increasing".into(),
        ));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }

    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let mut k = [(); 7].map(|_| vec![zero; n]);
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut stats = Dopri5Stats::default();

    let mut t = times[0];
    record(t, y)?;
    if times.len() == 1 {
        return Ok(stats);
    }

    f(t, y, &mut k[0])?;
    stats.evaluations += 1;
    let mut h = initial_step(&mut f, t, y, &k[0], opts, &mut tmp, &mut y_new, &mut stats)?
        .min(opts.max_step)
        .min(times[times.len() - 1] - t);
    let mut last_ratio = 1e-4_f64;

    for &t_out in &times[1..] {
        while t < t_out {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(Error::StepUnderflow { t, step: h });
            }
            let remaining = t_out - t;
            let mut lands = false;
            let mut step = h.min(opts.max_step);
            if step >= remaining * (1.0 - 1e-12) {
                step = remaining;
                lands = true;
            }
            if step < opts.min_step_ratio * t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t, step });
            }

            stage(&mut tmp, y, step, &[(A21, &k[0])]);
            f(t + C2 * step, &tmp, &mut k[1])?;
            stage(&mut tmp, y, step, &[(A31, &k[0]), (A32, &k[1])]);
            f(t + C3 * step, &tmp, &mut k[2])?;
            stage(&mut tmp, y, step, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
            f(t + C4 * step, &tmp, &mut k[3])?;
            stage(
                &mut tmp,
                y,
                step,
                &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])],
            );
            f(t + C5 * step, &tmp, &mut k[4])?;
            stage(
                &mut tmp,
                y,
                step,
                &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])],
            );
            f(t + step, &tmp, &mut k[5])?;
            stage(
                &mut y_new,
                y,
                step,
                &[(A71, &k[0]), (A73, &k[2]), (A74, &k[3]), (A75, &k[4]), (A76, &k[5])],
            );
            let t_new = if lands { t_out } else { t + step };
            f(t_new, &y_new, &mut k[6])?;
            stats.evaluations += 6;

            let mut acc = 0.0;
            for i in 0..n {
                let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                acc += e.norm_sqr() / (sc * sc);
            }
            let err = (acc / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                // treat as a failed step and retry smaller
                stats.rejected += 1;
                h = step * 0.2;
                continue;
            }

            if err <= 1.0 {
                stats.accepted += 1;
                t = t_new;
                y.copy_from_slice(&y_new);
                k.swap(0, 6);
                // PI controller (Hairer, Norsett & Wanner II.4)
                let fac = if err == 0.0 {
                    10.0
                } else {
                    (0.9 * err.powf(-0.7 / 5.0) * last_ratio.powf(0.4 / 5.0)).clamp(0.2, 10.0)
                };
                last_ratio = err.max(1e-4);
                let proposal = step * fac;
                // a landing step may have been truncated, keep the unconstrained estimate
                h = if lands { proposal.max(h) } else { proposal };
            } else {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
            }
        }
        record(t, y)?;
    }
    Ok(stats)
}

fn stage(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &Vec<C64>)]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (a, k) in terms {
            acc += k[i] * *a;
        }
        *o = y[i] + acc * h;
    }
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t: f64,
    y: &[C64],
    f0: &[C64],
    opts: &Dopri5Options,
    y1: &mut [C64],
    f1: &mut [C64],
    stats: &mut Dopri5Stats,
) -> Result<f64>
where
    F: FnMut(f64, &[C64], &mut [C64]) -> Result<()>,
{
    let n = y.len().max(1) as f64;
    let scaled = |v: &[C64]| -> f64 {
        let mut acc = 0.0;
        for (vi, yi) in v.iter().zip(y) {
            acc += vi.norm_sqr() / (opts.atol + opts.rtol * yi.norm()).powi(2);
        }
        (acc / n).sqrt()
    };
    let d0 = scaled(y);
    let d1 = scaled(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    for ((o, yi), fi) in y1.iter_mut().zip(y).zip(f0) {
        *o = yi + fi * h0;
    }
    f(t + h0, y1, f1)?;
    stats.evaluations += 1;
    let mut acc = 0.0;
    for ((a, b), yi) in f1.iter().zip(f0).zip(y) {
        let d = a - b;
        acc += d.norm_sqr() / (opts.atol + opts.rtol * yi.norm()).powi(2);
    }
    let d2 = (acc / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1))
}
