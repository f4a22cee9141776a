//! Dense Hermitian helpers backed by faer.

use faer::{Mat, Side};

use crate::{Error, Result, C64};

/// Dense complex matrix.
pub type CMat = Mat<C64>;

/// Eigenvalues (ascending) and eigenvectors (columns) of a Hermitian matrix.
/// Only the lower triangle is read.
pub fn hermitian_eigen(a: &CMat) -> Result<(Vec<f64>, CMat)> {
    let evd = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
    let values = evd.S().column_vector().iter().map(|v| v.re).collect();
    Ok((values, evd.U().to_owned()))
}

pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let values = a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)?;
    Ok(values)
}

/// How eigendirections of a Hermitian positive semidefinite system are
/// inverted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectralFilter {
    /// `1/lambda` above the threshold, zero below it.
    Cutoff,
    /// `lambda / (lambda^2 + delta^2)`. Unlike the hard cutoff this is a
    /// smooth function of the matrix, so directions drifting across the
    /// threshold do not make the right-hand side of an ODE jump.
    #[default]
    Tikhonov,
}

/// Regularized solution of `A x = b` for Hermitian `A`, with threshold
/// `delta = cutoff * max|lambda|`.
///
/// Returns the solution and the number of directions with `|lambda| < delta`.
pub fn filtered_solve(a: &CMat, b: &[C64], cutoff: f64, filter: SpectralFilter) -> Result<(Vec<C64>, usize)> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.len(), n);
    let (values, vectors) = hermitian_eigen(a)?;
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return Err(Error::DegenerateSystem);
    }
    let delta = cutoff * scale;
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut dropped = 0;
    for (col, &lambda) in values.iter().enumerate() {
        let below = lambda.abs() < delta;
        if below {
            dropped += 1;
        }
        let gain = match filter {
            SpectralFilter::Cutoff if below => continue,
            SpectralFilter::Cutoff => 1.0 / lambda,
            SpectralFilter::Tikhonov => lambda / (lambda * lambda + delta * delta),
        };
        let v = vectors.col(col);
        let mut proj = C64::new(0.0, 0.0);
        for i in 0..n {
            proj += v[i].conj() * b[i];
        }
        let w = proj * gain;
        for i in 0..n {
            x[i] += v[i] * w;
        }
    }
    if dropped == n {
        return Err(Error::DegenerateSystem);
    }
    Ok((x, dropped))
}

/// Minimum-norm solution of `A x = b` for Hermitian `A`, dropping every
/// eigendirection with `|lambda| < cutoff * max|lambda|`.
///
/// Returns the solution and the number of dropped directions.
pub fn pinv_solve(a: &CMat, b: &[C64], cutoff: f64) -> Result<(Vec<C64>, usize)> {
    filtered_solve(a, b, cutoff, SpectralFilter::Cutoff)
}
