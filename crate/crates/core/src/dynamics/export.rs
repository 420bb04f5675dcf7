//! Trajectory export: CSV and a compact little-endian binary dump.
//!
//! Binary layout: `u64` record count, `u64` chart tag (0 Cartesian,
//! 1 cylindrical), then per record nine `f64` in the CSV column order.

use std::io::{self, Read, Write};

use super::{Chart, Sample, Trajectory};

pub const CSV_HEADER: &str = "tau,r,z,p_r,p_z,phi,x,y,energy";

/// `(tau, r, z, p_r, p_z, phi, x, y, energy)` for one sample.
pub fn record(s: &Sample) -> [f64; 9] {
    let c = s.state.cylindrical();
    let (x, y) = match s.state.cartesian() {
        Ok(k) => (k.x, k.y),
        Err(_) => (0.0, 0.0),
    };
    [s.tau, c.r, c.z, c.p_r, c.p_z, c.phi, x, y, s.energy]
}

pub fn write_csv<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for s in &traj.samples {
        let r = record(s);
        let line: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn write_binary<W: Write>(traj: &Trajectory, mut w: W) -> io::Result<()> {
    w.write_all(&(traj.samples.len() as u64).to_le_bytes())?;
    w.write_all(&traj.chart.tag().to_le_bytes())?;
    for s in &traj.samples {
        for v in record(s) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_binary<R: Read>(mut r: R) -> io::Result<(Chart, Vec<[f64; 9]>)> {
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let chart = Chart::from_tag(u64::from_le_bytes(b8))
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "unknown chart tag"))?;
    let n = usize::try_from(n)
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "record count overflow"))?;
    let mut out = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        let mut rec = [0.0; 9];
        for v in rec.iter_mut() {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        out.push(rec);
    }
    Ok((chart, out))
}
