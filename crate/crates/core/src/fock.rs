//! Occupation-number basis of the fixed-particle-number sector.

use crate::{Error, Result, C64};

/// Number of ways to distribute `bosons` indistinguishable particles over
/// `modes` modes, `binomial(M + S - 1, S)`.
pub fn fock_dimension(modes: usize, bosons: u32) -> Result<u64> {
    if modes == 0 {
        return Err(Error::InvalidParameter("mode count must be at least 1".into()));
    }
    let overflow = || Error::DimensionOverflow { modes, bosons };
    // binomial(n, k) with k = min(S, M-1), built up so every intermediate is itself a binomial
    let n = (modes as u128 - 1) + bosons as u128;
    let k = (bosons as u128).min(modes as u128 - 1);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(n - k + i).ok_or_else(overflow)? / i;
        if acc > u64::MAX as u128 {
            return Err(overflow());
        }
    }
    u64::try_from(acc).map_err(|_| overflow())
}

/// Enumerated Fock basis for `modes` modes holding `bosons` particles.
///
/// States are ordered lexicographically descending on the occupation vector,
/// so `(S, 0, ..., 0)` comes first and `(0, ..., 0, S)` last.
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: usize,
    bosons: u32,
    occupations: Vec<u32>,
    // suffix dimension table: table[r][b] = dim of r modes holding b bosons
    table: Vec<Vec<u64>>,
}

impl FockBasis {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn bosons(&self) -> u32 {
        self.bosons
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn state(&self, index: usize) -> &[u32] {
        &self.occupations[index * self.modes..(index + 1) * self.modes]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.occupations.chunks_exact(self.modes)
    }

    /// Ordinal of an occupation vector, `None` when it is not in this sector.
    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        if occupation.len() != self.modes {
            return None;
        }
        if occupation.iter().map(|&n| n as u64).sum::<u64>() != self.bosons as u64 {
            return None;
        }
        let mut remaining = self.bosons;
        let mut rank = 0u64;
        for (i, &n) in occupation.iter().enumerate().take(self.modes - 1) {
            let rest = self.modes - i - 1;
            // every state with a larger occupation at position i precedes this one
            for v in (n + 1)..=remaining {
                rank += self.table[rest][(remaining - v) as usize];
            }
            remaining -= n;
        }
        Some(rank as usize)
    }

    pub fn matches(&self, modes: usize, bosons: u32) -> Result<()> {
        if self.modes == modes && self.bosons == bosons {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                basis_modes: self.modes,
                basis_bosons: self.bosons,
                modes,
                bosons,
            })
        }
    }
}

/// Enumerates every occupation vector of the `(modes, bosons)` sector.
pub fn enumerate_fock_basis(modes: usize, bosons: u32) -> Result<FockBasis> {
    let dim = fock_dimension(modes, bosons)?;
    let dim = usize::try_from(dim).map_err(|_| Error::DimensionOverflow { modes, bosons })?;

    let mut table = vec![vec![0u64; bosons as usize + 1]; modes + 1];
    for b in 0..=bosons as usize {
        table[1][b] = 1;
    }
    for r in 2..=modes {
        for b in 0..=bosons as usize {
            table[r][b] = (0..=b).map(|v| table[r - 1][b - v]).sum();
        }
    }

    let mut occupations = Vec::with_capacity(dim * modes);
    let mut current = vec![0u32; modes];
    fill(&mut current, 0, bosons, &mut occupations);
    debug_assert_eq!(occupations.len(), dim * modes);

    Ok(FockBasis {
        modes,
        bosons,
        occupations,
        table,
    })
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<u32>) {
    if pos == current.len() - 1 {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for n in (0..=remaining).rev() {
        current[pos] = n;
        fill(current, pos + 1, remaining - n, out);
    }
}

/// A state vector in the Fock sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    pub amplitudes: Vec<C64>,
}

impl FockState {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// The basis vector `|n_1, ..., n_M>`.
    pub fn basis_vector(basis: &FockBasis, occupation: &[u32]) -> Result<Self> {
        let index = basis.index_of(occupation).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "occupation {occupation:?} is not in the (M={}, S={}) sector",
                basis.modes(),
                basis.bosons()
            ))
        })?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); basis.len()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &FockState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Mode occupations `<n_i>/S`.
pub fn fock_populations(state: &FockState, basis: &FockBasis) -> Vec<f64> {
    let mut pops = vec![0.0; basis.modes()];
    if basis.bosons() == 0 {
        return pops;
    }
    for (occ, amp) in basis.iter().zip(&state.amplitudes) {
        let w = amp.norm_sqr();
        for (p, &n) in pops.iter_mut().zip(occ) {
            *p += w * n as f64;
        }
    }
    let s = basis.bosons() as f64;
    pops.iter_mut().for_each(|p| *p /= s);
    pops
}
