//! Ensemble serialization: columnar CSV and a compact little-endian binary format.

use std::io::{Read, Write};

use super::ensemble::{EnsembleMeta, WeightedPathEnsemble};
use super::walk::LatticePath;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 16] = b"CPLAB-ENS-v1\0\0\0\0";

/// Rows `path_id,time,x,y,weight`, one per path and time.
pub fn write_csv<W: Write>(ensemble: &WeightedPathEnsemble, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_id", "time", "x", "y", "weight"])?;
    for (i, (p, weight)) in ensemble.paths().iter().zip(ensemble.weights()).enumerate() {
        for (k, z) in p.positions().iter().enumerate() {
            w.serialize((i, p.start_time() + k as i64, z[0], z[1], weight))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads the CSV layout; the horizon is not part of it and must be supplied.
pub fn read_csv<R: Read>(input: R, lattice_n: u64) -> Result<WeightedPathEnsemble> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut paths: Vec<(u64, i64, Vec<[i32; 2]>, f64)> = Vec::new();
    for (line, rec) in rdr.deserialize::<(u64, i64, i32, i32, f64)>().enumerate() {
        let (id, time, x, y, weight) = rec?;
        let row = line + 2;
        match paths.last_mut() {
            Some(last) if last.0 == id => {
                if time != last.1 + last.2.len() as i64 {
                    return Err(Error::Format(format!("line {row}: time {time} breaks the sequence of path {id}")));
                }
                if weight != last.3 {
                    return Err(Error::Format(format!("line {row}: weight changes within path {id}")));
                }
                last.2.push([x, y]);
            }
            _ => {
                if paths.iter().any(|p| p.0 == id) {
                    return Err(Error::Format(format!("line {row}: path {id} is not contiguous")));
                }
                paths.push((id, time, vec![[x, y]], weight));
            }
        }
    }
    let first = paths.first().ok_or_else(|| Error::Format("no rows".into()))?;
    let window = (first.1, first.1 + first.2.len() as i64 - 1);
    let mut lp = Vec::with_capacity(paths.len());
    let mut weights = Vec::with_capacity(paths.len());
    for (_, start, pos, w) in paths {
        lp.push(LatticePath::from_positions(start, pos)?);
        weights.push(w);
    }
    WeightedPathEnsemble::new(lp, weights, window, EnsembleMeta::reference(lattice_n))
}

pub fn write_binary<W: Write>(ensemble: &WeightedPathEnsemble, mut out: W) -> Result<()> {
    let meta = &ensemble.meta;
    let (s, t) = ensemble.window();
    out.write_all(MAGIC)?;
    out.write_all(&meta.lattice_n.to_le_bytes())?;
    out.write_all(&s.to_le_bytes())?;
    out.write_all(&t.to_le_bytes())?;
    out.write_all(&(ensemble.len() as u64).to_le_bytes())?;
    out.write_all(&meta.beta.to_le_bytes())?;
    out.write_all(&meta.localization_rate.to_le_bytes())?;
    let flags = meta.theta.is_some() as u8 | (meta.disorder_seed.is_some() as u8) << 1 | (meta.parents.is_some() as u8) << 2;
    out.write_all(&[flags])?;
    out.write_all(&meta.theta.unwrap_or(0.0).to_le_bytes())?;
    out.write_all(&meta.disorder_seed.unwrap_or(0).to_le_bytes())?;
    out.write_all(&(meta.placeholder.len() as u64).to_le_bytes())?;
    for &(a, b) in &meta.placeholder {
        out.write_all(&a.to_le_bytes())?;
        out.write_all(&b.to_le_bytes())?;
    }
    for (p, w) in ensemble.paths().iter().zip(ensemble.weights()) {
        out.write_all(&w.to_le_bytes())?;
        for z in p.positions() {
            out.write_all(&z[0].to_le_bytes())?;
            out.write_all(&z[1].to_le_bytes())?;
        }
    }
    if let Some(parents) = &meta.parents {
        for &(a, b) in parents {
            out.write_all(&a.to_le_bytes())?;
            out.write_all(&b.to_le_bytes())?;
        }
    }
    Ok(())
}

struct Cursor<R: Read>(R);

impl<R: Read> Cursor<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        self.0.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated ensemble: {e}")))?;
        Ok(b)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn i32(&mut self) -> Result<i32> {
        Ok(i32::from_le_bytes(self.bytes()?))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
}

pub fn read_binary<R: Read>(input: R) -> Result<WeightedPathEnsemble> {
    let mut c = Cursor(input);
    if &c.bytes::<16>()? != MAGIC {
        return Err(Error::Format("bad magic header".into()));
    }
    let lattice_n = c.u64()?;
    let s = c.i64()?;
    let t = c.i64()?;
    let count = c.u64()? as usize;
    let beta = c.f64()?;
    let localization_rate = c.f64()?;
    let [flags] = c.bytes::<1>()?;
    let theta = c.f64()?;
    let seed = c.u64()?;
    let n_placeholder = c.u64()? as usize;
    if t < s || n_placeholder > 1 << 20 || count > 1 << 32 {
        return Err(Error::Format("implausible header".into()));
    }
    let mut placeholder = Vec::with_capacity(n_placeholder);
    for _ in 0..n_placeholder {
        placeholder.push((c.i64()?, c.i64()?));
    }
    let len = (t - s + 1) as usize;
    let mut paths = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        weights.push(c.f64()?);
        let mut pos = Vec::with_capacity(len);
        for _ in 0..len {
            pos.push([c.i32()?, c.i32()?]);
        }
        paths.push(LatticePath::from_positions(s, pos)?);
    }
    let parents = if flags & 4 != 0 {
        let mut v = Vec::with_capacity(count);
        for _ in 0..count {
            v.push((c.u32()?, c.u32()?));
        }
        Some(v)
    } else {
        None
    };
    let meta = EnsembleMeta {
        lattice_n,
        beta,
        theta: (flags & 1 != 0).then_some(theta),
        disorder_seed: (flags & 2 != 0).then_some(seed),
        localization_rate,
        placeholder,
        parents,
    };
    WeightedPathEnsemble::new(paths, weights, (s, t), meta)
}
