//! Discrete coherent-state bases sampled from von Neumann lattices.
//!
//! Each mode gets its own square lattice of Glauber coherent-state labels
//! `z_j = z0_j + beta (m + i n)`, `m, n in [-P, P]`, centered on the
//! parameters of the initial state. A multi-mode lattice point maps to an
//! SU(M) coherent state through `xi = z / |z|`.
//!
//! * [`SamplingMode::Random`] draws independent index pairs per mode.
//! * [`SamplingMode::Diagonal`] uses the same `(m, n)` in every mode, walking
//!   outwards from the center ring by ring.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gcs::{single_overlap, GcsParams};
use crate::{Error, Result, C64};

/// Points closer than this in single-particle overlap count as the same state.
pub const DEDUP_THRESHOLD: f64 = 1.0 - 1e-12;

/// Index pools up to this size are shuffled explicitly, larger ones are
/// sampled by rejection.
const EXPLICIT_POOL: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    Random,
    Diagonal,
}

impl std::str::FromStr for SamplingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Self::Random),
            "diagonal" => Ok(Self::Diagonal),
            other => Err(Error::InvalidParameter(format!(
                "unknown grid mode {other:?}, expected random or diagonal"
            ))),
        }
    }
}

impl std::fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Random => "random",
            Self::Diagonal => "diagonal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub modes: usize,
    pub bosons: u32,
    pub beta: f64,
    pub center: GcsParams,
    pub mode: SamplingMode,
    /// Requested basis size `N`.
    pub size: usize,
    pub seed: u64,
    /// Lattice half-width `P`; `None` picks the default.
    pub extent: Option<u32>,
}

impl GridSpec {
    /// Random grid with von Neumann spacing `sqrt(pi)`.
    pub fn new(center: GcsParams, size: usize) -> Self {
        Self {
            modes: center.modes(),
            bosons: center.bosons,
            beta: PI.sqrt(),
            center,
            mode: SamplingMode::Random,
            size,
            seed: 0,
            extent: None,
        }
    }

    /// Whether the spacing violates `beta <= sqrt(pi)`; such grids are
    /// allowed but need not be complete.
    pub fn exceeds_completeness_bound(&self) -> bool {
        self.beta > PI.sqrt() * (1.0 + 1e-12)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes < 1 || self.center.modes() != self.modes {
            return Err(Error::InvalidParameter(format!(
                "grid center has {} modes, spec says {}",
                self.center.modes(),
                self.modes
            )));
        }
        if self.center.bosons != self.bosons {
            return Err(Error::InvalidParameter("grid center boson count differs".into()));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid spacing must be positive, got {}",
                self.beta
            )));
        }
        if self.size == 0 {
            return Err(Error::InvalidParameter("basis size must be at least 1".into()));
        }
        let available = self.pool_size();
        if self.size as u128 > available {
            return Err(Error::GridTooSmall {
                requested: self.size,
                available,
            });
        }
        Ok(())
    }

    /// Half-width `P` actually used.
    ///
    /// Random grids default to the smallest `P` with at least `4 N` index
    /// tuples; diagonal grids to the smallest square holding `N` points.
    pub fn resolved_extent(&self) -> u32 {
        if let Some(p) = self.extent {
            return p;
        }
        let (need, dims) = match self.mode {
            SamplingMode::Random => (4 * self.size as u128, 2 * self.modes as u32),
            SamplingMode::Diagonal => (self.size as u128, 2),
        };
        let mut p = 0u32;
        while pow_sat(2 * p as u128 + 1, dims) < need {
            p += 1;
        }
        p
    }

    /// Number of distinct index tuples in the lattice.
    pub fn pool_size(&self) -> u128 {
        let side = 2 * self.resolved_extent() as u128 + 1;
        match self.mode {
            SamplingMode::Random => pow_sat(side, 2 * self.modes as u32),
            SamplingMode::Diagonal => side * side,
        }
    }
}

fn pow_sat(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// A multi-mode Glauber label together with its lattice indices.
#[derive(Debug, Clone, PartialEq)]
pub struct GlauberPoint {
    pub z: Vec<C64>,
    /// `(m, n)` per mode.
    pub indices: Vec<(i32, i32)>,
}

/// Yields lattice index tuples in sampling order: the center first, then
/// either random draws without replacement or diagonal rings.
struct IndexStream {
    modes: usize,
    extent: i32,
    mode: SamplingMode,
    rng: ChaCha8Rng,
    emitted_center: bool,
    // explicit pool of ordinals for partial Fisher-Yates
    pool: Option<Vec<u64>>,
    drawn: usize,
    seen: HashSet<Vec<(i32, i32)>>,
    diagonal: Vec<(i32, i32)>,
    pool_size: u128,
}

impl IndexStream {
    fn new(spec: &GridSpec) -> Self {
        let extent = spec.resolved_extent() as i32;
        let pool_size = spec.pool_size();
        let mut diagonal = Vec::new();
        let mut pool = None;
        match spec.mode {
            SamplingMode::Diagonal => {
                for m in -extent..=extent {
                    for n in -extent..=extent {
                        if (m, n) != (0, 0) {
                            diagonal.push((m, n));
                        }
                    }
                }
                diagonal.sort_by_key(|&(m, n)| (m * m + n * n, m, n));
            }
            SamplingMode::Random => {
                if pool_size <= EXPLICIT_POOL {
                    // the center tuple is emitted separately
                    let center = center_ordinal(spec.modes, extent);
                    pool = Some((0..pool_size as u64).filter(|&o| o != center).collect());
                }
            }
        }
        Self {
            modes: spec.modes,
            extent,
            mode: spec.mode,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            emitted_center: false,
            pool,
            drawn: 0,
            seen: HashSet::new(),
            diagonal,
            pool_size,
        }
    }

    fn decode(&self, mut ordinal: u64) -> Vec<(i32, i32)> {
        let side = 2 * self.extent as u64 + 1;
        let mut out = Vec::with_capacity(self.modes);
        for _ in 0..self.modes {
            let m = (ordinal % side) as i32 - self.extent;
            ordinal /= side;
            let n = (ordinal % side) as i32 - self.extent;
            ordinal /= side;
            out.push((m, n));
        }
        out
    }
}

fn center_ordinal(modes: usize, extent: i32) -> u64 {
    let side = 2 * extent as u64 + 1;
    let mut ordinal = 0u64;
    for _ in 0..2 * modes {
        ordinal = ordinal * side + extent as u64;
    }
    ordinal
}

impl Iterator for IndexStream {
    type Item = Vec<(i32, i32)>;

    fn next(&mut self) -> Option<Self::Item> {
        if !self.emitted_center {
            self.emitted_center = true;
            return Some(vec![(0, 0); self.modes]);
        }
        match self.mode {
            SamplingMode::Diagonal => {
                let pair = *self.diagonal.get(self.drawn)?;
                self.drawn += 1;
                Some(vec![pair; self.modes])
            }
            SamplingMode::Random => {
                if let Some(pool) = self.pool.as_mut() {
                    if self.drawn >= pool.len() {
                        return None;
                    }
                    let pick = self.rng.random_range(self.drawn..pool.len());
                    pool.swap(self.drawn, pick);
                    let ordinal = pool[self.drawn];
                    self.drawn += 1;
                    return Some(self.decode(ordinal));
                }
                // huge pool: rejection sampling never runs dry in practice
                if (self.seen.len() as u128) + 1 >= self.pool_size {
                    return None;
                }
                let p = self.extent;
                loop {
                    let tuple: Vec<(i32, i32)> = (0..self.modes)
                        .map(|_| (self.rng.random_range(-p..=p), self.rng.random_range(-p..=p)))
                        .collect();
                    if tuple.iter().all(|&t| t == (0, 0)) {
                        continue;
                    }
                    if self.seen.insert(tuple.clone()) {
                        return Some(tuple);
                    }
                }
            }
        }
    }
}

fn point_from_indices(spec: &GridSpec, indices: Vec<(i32, i32)>) -> GlauberPoint {
    let z = spec
        .center
        .xi
        .iter()
        .zip(&indices)
        .map(|(c, &(m, n))| c + C64::new(spec.beta * m as f64, spec.beta * n as f64))
        .collect();
    GlauberPoint { z, indices }
}

/// The first `N` lattice points in sampling order, center first.
pub fn build_lattice(spec: &GridSpec) -> Result<Vec<GlauberPoint>> {
    spec.validate()?;
    Ok(IndexStream::new(spec)
        .take(spec.size)
        .map(|idx| point_from_indices(spec, idx))
        .collect())
}

/// Projects a Glauber label onto the unit sphere, `xi = z / |z|`.
pub fn to_gcs(point: &GlauberPoint, bosons: u32) -> Result<GcsParams> {
    let norm = point.z.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::ZeroLatticePoint);
    }
    Ok(GcsParams::new(point.z.iter().map(|z| z / norm).collect(), bosons))
}

/// Bloch angles of a two-mode state with the global phase removed,
/// `xi = (cos(theta/2), sin(theta/2) e^{i phi})`.
pub fn bloch_coordinates(xi: &GcsParams) -> Result<(f64, f64)> {
    if xi.modes() != 2 {
        return Err(Error::NotTwoMode { modes: xi.modes() });
    }
    let norm = xi.norm_sqr().sqrt();
    let a = xi.xi[0] / norm;
    let b = xi.xi[1] / norm;
    let theta = 2.0 * a.norm().clamp(0.0, 1.0).acos();
    let phi = if b.norm() == 0.0 {
        0.0
    } else {
        let rel = if a.norm() == 0.0 { b.arg() } else { b.arg() - a.arg() };
        rel.rem_euclid(2.0 * PI)
    };
    // rem_euclid can round up to exactly 2 pi
    let phi = if phi >= 2.0 * PI { 0.0 } else { phi };
    Ok((theta, phi))
}

/// Samples `N` distinct coherent states, center first.
///
/// Lattice points with `z = 0` are skipped, as are points that map onto a
/// state already taken (`z` and `lambda z` give the same `xi` up to phase).
pub fn sample_ensemble(spec: &GridSpec) -> Result<Vec<GcsParams>> {
    spec.validate()?;
    let mut out: Vec<GcsParams> = Vec::with_capacity(spec.size);
    for indices in IndexStream::new(spec) {
        if out.len() == spec.size {
            break;
        }
        let point = point_from_indices(spec, indices);
        let candidate = match to_gcs(&point, spec.bosons) {
            Ok(c) => c,
            Err(Error::ZeroLatticePoint) => continue,
            Err(e) => return Err(e),
        };
        let duplicate = out
            .iter()
            .any(|g| single_overlap(&g.xi, &candidate.xi).norm() > DEDUP_THRESHOLD);
        if !duplicate {
            out.push(candidate);
        }
    }
    if out.len() < spec.size {
        return Err(Error::PoolExhausted {
            achieved: out.len(),
            requested: spec.size,
        });
    }
    Ok(out)
}

/// Writes `basis_index, mode_index, re, im` rows.
pub fn write_points_csv<W: Write>(mut w: W, basis: &[GcsParams]) -> Result<()> {
    writeln!(w, "basis_index,mode_index,re_xi,im_xi")?;
    for (k, g) in basis.iter().enumerate() {
        for (m, x) in g.xi.iter().enumerate() {
            writeln!(w, "{k},{m},{:.16e},{:.16e}", x.re, x.im)?;
        }
    }
    Ok(())
}

/// Writes `basis_index, theta, phi, x, y, z` rows for a two-mode basis, with
/// `(x, y, z)` the point on the unit sphere.
pub fn write_bloch_csv<W: Write>(mut w: W, basis: &[GcsParams]) -> Result<()> {
    writeln!(w, "basis_index,theta,phi,x,y,z")?;
    for (k, g) in basis.iter().enumerate() {
        let (theta, phi) = bloch_coordinates(g)?;
        writeln!(
            w,
            "{k},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            theta,
            phi,
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn two_mode_center() -> GcsParams {
        GcsParams::from_real(&[-(0.7_f64).sqrt(), 0.3_f64.sqrt()], 50)
    }

    #[test]
    fn diagonal_five_by_five() {
        let mut spec = GridSpec::new(two_mode_center(), 25);
        spec.mode = SamplingMode::Diagonal;
        spec.extent = Some(2);
        let pts = build_lattice(&spec).unwrap();
        assert_eq!(pts.len(), 25);
        assert_eq!(pts[0].z, spec.center.xi);
        for p in &pts {
            assert_eq!(p.indices[0], p.indices[1]);
        }
        let distinct: HashSet<_> = pts.iter().map(|p| p.indices.clone()).collect();
        assert_eq!(distinct.len(), 25);
    }

    #[test]
    fn default_diagonal_extent_is_tight_square() {
        let mut spec = GridSpec::new(two_mode_center(), 81);
        spec.mode = SamplingMode::Diagonal;
        assert_eq!(spec.resolved_extent(), 4);
        spec.size = 25;
        assert_eq!(spec.resolved_extent(), 2);
    }

    #[test]
    fn random_lattice_is_reproducible() {
        let mut spec = GridSpec::new(two_mode_center(), 40);
        spec.seed = 7;
        let a = build_lattice(&spec).unwrap();
        let b = build_lattice(&spec).unwrap();
        assert_eq!(a, b);
        spec.seed = 8;
        assert_ne!(a, build_lattice(&spec).unwrap());
    }

    #[test]
    fn too_many_points_is_an_error() {
        let mut spec = GridSpec::new(two_mode_center(), 26);
        spec.mode = SamplingMode::Diagonal;
        spec.extent = Some(2);
        assert!(matches!(
            build_lattice(&spec),
            Err(Error::GridTooSmall { available: 25, .. })
        ));
    }

    #[test]
    fn lattice_points_lie_on_the_grid() {
        let mut spec = GridSpec::new(two_mode_center(), 30);
        spec.beta = PI.sqrt() / 4.0;
        for p in build_lattice(&spec).unwrap() {
            for ((z, c), &(m, n)) in p.z.iter().zip(&spec.center.xi).zip(&p.indices) {
                let d = (z - c) / spec.beta;
                assert!((d.re - m as f64).abs() < 1e-12 && (d.im - n as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projective_map() {
        let p = |z: Vec<C64>| GlauberPoint {
            indices: vec![(0, 0); z.len()],
            z,
        };
        let xi = to_gcs(&p(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]), 3).unwrap();
        assert_eq!(xi.xi, vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let xi = to_gcs(&p(vec![C64::new(1.0, 1.0), C64::new(1.0, -1.0)]), 3).unwrap();
        assert!((xi.xi[0] - C64::new(0.5, 0.5)).norm() < 1e-15);
        assert!((xi.xi[1] - C64::new(0.5, -0.5)).norm() < 1e-15);
        assert!(matches!(
            to_gcs(&p(vec![C64::new(0.0, 0.0); 2]), 3),
            Err(Error::ZeroLatticePoint)
        ));
        let c = two_mode_center();
        assert_eq!(to_gcs(&p(c.xi.clone()), 50).unwrap().xi, c.xi);
    }

    #[test]
    fn bloch_angles() {
        let close = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12;
        let g = |x: [C64; 2]| GcsParams::new(x.to_vec(), 1);
        let h = FRAC_1_SQRT_2;
        assert!(close(bloch_coordinates(&g([C64::new(1.0, 0.0), C64::new(0.0, 0.0)])).unwrap(), (0.0, 0.0)));
        assert!(close(bloch_coordinates(&g([C64::new(h, 0.0), C64::new(h, 0.0)])).unwrap(), (PI / 2.0, 0.0)));
        assert!(close(bloch_coordinates(&g([C64::new(h, 0.0), C64::new(0.0, h)])).unwrap(), (PI / 2.0, PI / 2.0)));
        // a global phase does not move the point
        let ph = C64::from_polar(1.0, 0.7);
        assert!(close(
            bloch_coordinates(&g([C64::new(h, 0.0) * ph, C64::new(0.0, h) * ph])).unwrap(),
            (PI / 2.0, PI / 2.0)
        ));
        assert!(matches!(
            bloch_coordinates(&GcsParams::from_real(&[1.0, 0.0, 0.0], 1)),
            Err(Error::NotTwoMode { modes: 3 })
        ));
    }

    #[test]
    fn mean_field_basis_is_the_center() {
        let spec = GridSpec::new(two_mode_center(), 1);
        assert_eq!(sample_ensemble(&spec).unwrap(), vec![spec.center.clone()]);
    }

    #[test]
    fn zero_points_are_skipped_and_pool_is_counted() {
        // center (1, 0) with beta = 1: the tuple (-1, 0), (0, 0) lands on z = 0
        let center = GcsParams::from_real(&[1.0, 0.0], 4);
        let mut spec = GridSpec::new(center, 1);
        spec.beta = 1.0;
        spec.extent = Some(1);

        // brute force over all 81 tuples
        let mut distinct: Vec<Vec<C64>> = Vec::new();
        let mut zeros = 0;
        for a in -1..=1 {
            for b in -1..=1 {
                for c in -1..=1 {
                    for d in -1..=1 {
                        let z = [C64::new(1.0 + a as f64, b as f64), C64::new(c as f64, d as f64)];
                        let n = (z[0].norm_sqr() + z[1].norm_sqr()).sqrt();
                        if n == 0.0 {
                            zeros += 1;
                            continue;
                        }
                        let xi: Vec<C64> = z.iter().map(|v| v / n).collect();
                        if !distinct.iter().any(|o| single_overlap(o, &xi).norm() > DEDUP_THRESHOLD) {
                            distinct.push(xi);
                        }
                    }
                }
            }
        }
        assert_eq!(zeros, 1);

        spec.size = distinct.len();
        let states = sample_ensemble(&spec).unwrap();
        assert_eq!(states.len(), distinct.len());
        for s in &states {
            assert!((s.norm_sqr() - 1.0).abs() < 1e-14);
        }
        spec.size += 1;
        match sample_ensemble(&spec) {
            Err(Error::PoolExhausted { achieved, .. }) => assert_eq!(achieved, distinct.len()),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn exhausted_pool_is_reported() {
        // every diagonal point of a real center lies on one projective line
        // family, so only a few distinct states exist in a 1x1 ring
        let center = GcsParams::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 4);
        let mut spec = GridSpec::new(center, 9);
        spec.mode = SamplingMode::Diagonal;
        spec.extent = Some(1);
        spec.beta = 1.0;
        match sample_ensemble(&spec) {
            Err(Error::PoolExhausted { achieved, requested: 9 }) => assert!(achieved < 9),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}
