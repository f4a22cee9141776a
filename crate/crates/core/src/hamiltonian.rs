//! Bose-Hubbard chain with open boundaries, optional periodic driving of the
//! hopping and a harmonic trap.
//!
//! ```text
//! H(t) = -J(t) sum_{j<M} (a_j^+ a_{j+1} + h.c.)
//!        + U/2 sum_j n_j (n_j - 1)
//!        + K/2 sum_j (j - j0)^2 n_j,          J(t) = J0 + J1 cos(w t)
//! ```
//! Sites are numbered from 1 in the trap term, so the default trap center
//! `(M + 1) / 2` sits in the middle of the chain.

use crate::fock::{FockBasis, FockState};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianParams {
    pub modes: usize,
    pub bosons: u32,
    /// Static hopping `J0`.
    pub hopping: f64,
    /// Driving amplitude `J1` of the hopping.
    pub drive_amplitude: f64,
    /// Driving angular frequency `w`.
    pub drive_frequency: f64,
    /// On-site interaction `U`.
    pub interaction: f64,
    /// Trap strength `K`.
    pub trap: f64,
    /// Trap center `j0`, in 1-based site units.
    pub trap_center: f64,
}

impl HamiltonianParams {
    /// Unit hopping, everything else off, trap centered mid-chain.
    pub fn new(modes: usize, bosons: u32) -> Self {
        Self {
            modes,
            bosons,
            hopping: 1.0,
            drive_amplitude: 0.0,
            drive_frequency: 0.0,
            interaction: 0.0,
            trap: 0.0,
            trap_center: (modes as f64 + 1.0) / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 2 {
            return Err(Error::InvalidParameter(format!(
                "mode count must be at least 2, got {}",
                self.modes
            )));
        }
        if self.bosons < 1 {
            return Err(Error::InvalidParameter("boson count must be at least 1".into()));
        }
        let reals = [
            ("J0", self.hopping),
            ("J1", self.drive_amplitude),
            ("omega", self.drive_frequency),
            ("U", self.interaction),
            ("K", self.trap),
            ("j0", self.trap_center),
        ];
        for (name, v) in reals {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn hopping_at(&self, t: f64) -> f64 {
        self.hopping + self.drive_amplitude * (self.drive_frequency * t).cos()
    }

    pub fn is_autonomous(&self) -> bool {
        self.drive_amplitude == 0.0
    }

    /// `(j - j0)^2` for the 0-based mode index `mode`.
    pub fn trap_weight(&self, mode: usize) -> f64 {
        let d = (mode + 1) as f64 - self.trap_center;
        d * d
    }

    /// Regime parameter `U S / J0`.
    pub fn lambda(&self) -> f64 {
        self.interaction * self.bosons as f64 / self.hopping
    }
}

/// Real sparse matrix in compressed-row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        out
    }

    /// `y = alpha * A x + y`
    pub fn mul_add(&self, alpha: f64, x: &[C64], y: &mut [C64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k]] * self.values[k];
            }
            *yr += acc * alpha;
        }
    }
}

/// The chain Hamiltonian split into its unit-hopping part and its diagonal,
/// so that driven runs only rescale the hopping block.
#[derive(Debug, Clone)]
pub struct FockHamiltonian {
    params: HamiltonianParams,
    hop: CsrMatrix,
    diagonal: Vec<f64>,
}

impl FockHamiltonian {
    pub fn new(params: &HamiltonianParams, basis: &FockBasis) -> Result<Self> {
        params.validate()?;
        basis.matches(params.modes, params.bosons)?;
        let dim = basis.len();
        let m = params.modes;

        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(dim * 2 * (m - 1));
        let mut values = Vec::with_capacity(dim * 2 * (m - 1));
        let mut diagonal = Vec::with_capacity(dim);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(2 * m);
        let mut target = vec![0u32; m];
        row_ptr.push(0);

        for occ in basis.iter() {
            let mut d = 0.0;
            for (j, &n) in occ.iter().enumerate() {
                let n = n as f64;
                d += 0.5 * params.interaction * n * (n - 1.0) + 0.5 * params.trap * params.trap_weight(j) * n;
            }
            diagonal.push(d);

            entries.clear();
            for j in 0..m - 1 {
                // a_j^+ a_{j+1} moves one boson left, its adjoint moves one right
                for (from, to) in [(j + 1, j), (j, j + 1)] {
                    if occ[from] == 0 {
                        continue;
                    }
                    target.copy_from_slice(occ);
                    target[from] -= 1;
                    target[to] += 1;
                    let amp = ((occ[from] as f64) * (target[to] as f64)).sqrt();
                    let col = basis.index_of(&target).expect("hop stays in the sector");
                    entries.push((col, -amp));
                }
            }
            entries.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &entries {
                cols.push(c);
                values.push(v);
            }
            row_ptr.push(cols.len());
        }

        Ok(Self {
            params: params.clone(),
            hop: CsrMatrix {
                dim,
                row_ptr,
                cols,
                values,
            },
            diagonal,
        })
    }

    pub fn params(&self) -> &HamiltonianParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// `y = H(t) x`
    pub fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = xi * d;
        }
        self.hop.mul_add(self.params.hopping_at(t), x, y);
    }

    /// `<psi|H(t)|psi>`, not divided by the norm.
    pub fn expectation(&self, t: f64, state: &FockState) -> f64 {
        let mut hx = vec![C64::new(0.0, 0.0); self.dim()];
        self.apply(t, &state.amplitudes, &mut hx);
        state
            .amplitudes
            .iter()
            .zip(&hx)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Full matrix at time `t` in compressed-row form.
    pub fn matrix_at(&self, t: f64) -> CsrMatrix {
        let j = self.params.hopping_at(t);
        let dim = self.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(self.hop.nnz() + dim);
        let mut values = Vec::with_capacity(self.hop.nnz() + dim);
        row_ptr.push(0);
        for r in 0..dim {
            let mut diag_done = false;
            for (c, v) in self.hop.row(r) {
                if !diag_done && c > r {
                    cols.push(r);
                    values.push(self.diagonal[r]);
                    diag_done = true;
                }
                cols.push(c);
                values.push(j * v);
            }
            if !diag_done {
                cols.push(r);
                values.push(self.diagonal[r]);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            dim,
            row_ptr,
            cols,
            values,
        }
    }
}

/// The Hamiltonian matrix over `basis` at time `t`.
pub fn build_hamiltonian(params: &HamiltonianParams, basis: &FockBasis, t: f64) -> Result<CsrMatrix> {
    Ok(FockHamiltonian::new(params, basis)?.matrix_at(t))
}
