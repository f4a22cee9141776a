//! Trajectory tables (CSV) and binary ensemble snapshots.
//!
//! Floats are written with 17 significant digits so that a table read back
//! reproduces the values bit for bit.

use std::io::{BufRead, Read, Write};

use crate::engine::Trajectory;
use crate::gcs::{GcsEnsemble, GcsParams};
use crate::oracle::FockTrajectory;
use crate::{Error, Result, C64};

const SNAPSHOT_MAGIC: &[u8; 8] = b"BHGCSv1\0";

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Names of the `pop_*` columns, in order.
    pub fn population_columns(&self) -> Vec<String> {
        self.header.iter().filter(|h| h.starts_with("pop_")).cloned().collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| fmt_float(*v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header: Vec<String> = match lines.next() {
            Some(line) => line?.trim().split(',').map(|s| s.trim().to_string()).collect(),
            None => return Err(Error::Format("empty table".into())),
        };
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?;
            if row.len() != header.len() {
                return Err(Error::Format(format!(
                    "line {}: {} fields, header has {}",
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

/// Round-trip float formatting.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn population_header(modes: usize) -> impl Iterator<Item = String> {
    (1..=modes).map(|i| format!("pop_{i}"))
}

/// `t, norm, energy, pop_1..pop_M, discarded_directions, max_xi_norm_drift`
pub fn trajectory_table(traj: &Trajectory) -> Table {
    let mut header: Vec<String> = vec!["t".into(), "norm".into(), "energy".into()];
    header.extend(population_header(traj.modes));
    header.push("discarded_directions".into());
    header.push("max_xi_norm_drift".into());
    let rows = traj
        .observables
        .iter()
        .map(|o| {
            let mut row = vec![o.t, o.norm, o.energy];
            row.extend(&o.populations);
            row.push(o.discarded as f64);
            row.push(o.max_xi_drift);
            row
        })
        .collect();
    Table { header, rows }
}

/// `t, norm, energy, pop_1..pop_M`
pub fn fock_trajectory_table(traj: &FockTrajectory, modes: usize) -> Table {
    let mut header: Vec<String> = vec!["t".into(), "norm".into(), "energy".into()];
    header.extend(population_header(modes));
    let rows = traj
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let mut row = vec![t, traj.norms[i], traj.energies[i]];
            row.extend(&traj.populations[i]);
            row
        })
        .collect();
    Table { header, rows }
}

/// Little-endian: magic, `M` (u64), `S` (u32), `N` (u64), `t` (f64), then
/// `A` and `xi` (row by row) as interleaved real and imaginary parts.
pub fn write_snapshot<W: Write>(mut w: W, ens: &GcsEnsemble, t: f64) -> Result<()> {
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(ens.modes() as u64).to_le_bytes())?;
    w.write_all(&ens.bosons().to_le_bytes())?;
    w.write_all(&(ens.len() as u64).to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    let values = ens.coeffs.iter().chain(ens.basis.iter().flat_map(|b| b.xi.iter()));
    for z in values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<(GcsEnsemble, f64)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Format("not an ensemble snapshot".into()));
    }
    let modes = read_u64(&mut r)?;
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let bosons = u32::from_le_bytes(b4);
    let n = read_u64(&mut r)?;
    let t = read_f64(&mut r)?;
    if modes == 0 || n == 0 || modes.checked_mul(n).is_none_or(|v| v > 1 << 28) {
        return Err(Error::Format(format!("implausible snapshot shape M={modes}, N={n}")));
    }
    let (modes, n) = (modes as usize, n as usize);
    let read_c = |r: &mut R| -> Result<C64> { Ok(C64::new(read_f64(r)?, read_f64(r)?)) };
    let coeffs = (0..n).map(|_| read_c(&mut r)).collect::<Result<Vec<_>>>()?;
    let mut basis = Vec::with_capacity(n);
    for _ in 0..n {
        let xi = (0..modes).map(|_| read_c(&mut r)).collect::<Result<Vec<_>>>()?;
        basis.push(GcsParams::new(xi, bosons));
    }
    Ok((GcsEnsemble { basis, coeffs }, t))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trip_is_exact() {
        let t = Table {
            header: vec!["t".into(), "pop_1".into()],
            rows: vec![vec![0.1, 1.0 / 3.0], vec![1e-300, -std::f64::consts::PI]],
        };
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        let back = Table::read(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.population_columns(), vec!["pop_1".to_string()]);
    }

    #[test]
    fn ragged_table_is_rejected() {
        let text = "t,a\n1,2\n3\n";
        assert!(matches!(Table::read(text.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn snapshot_round_trip() {
        let ens = GcsEnsemble::new(
            vec![
                GcsParams::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)], 7),
                GcsParams::from_real(&[1.0, 0.0], 7),
            ],
            vec![C64::new(0.25, -1.5), C64::new(1e-17, 2.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &ens, 2.5).unwrap();
        let (back, t) = read_snapshot(buf.as_slice()).unwrap();
        assert_eq!(t, 2.5);
        assert_eq!(back.coeffs, ens.coeffs);
        assert_eq!(back.basis, ens.basis);
        assert!(read_snapshot(&buf[..buf.len() - 1]).is_err());
    }
}
