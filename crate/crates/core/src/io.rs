//! File formats.
//!
//! Dense matrices use a little-endian binary layout: `u64` dimension `n`,
//! `u64` component count (1 for real, 2 for complex), then `n²` entries in
//! row-major order, each as one or two `f64`.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::histogram::Histogram;
use crate::matrices::{HermitianWindow, SymmetricMatrix};
use crate::spectra::PointMeasure;

/// Matrix read back from the dense binary layout.
#[derive(Debug, Clone, PartialEq)]
pub enum DenseMatrix {
    Real(SymmetricMatrix),
    Complex(HermitianWindow),
}

fn write_header<W: Write>(w: &mut W, n: usize, components: u64) -> Result<()> {
    w.write_all(&(n as u64).to_le_bytes())?;
    w.write_all(&components.to_le_bytes())?;
    Ok(())
}

pub fn write_dense_real<W: Write>(w: &mut W, m: &SymmetricMatrix) -> Result<()> {
    write_header(w, m.dim(), 1)?;
    for x in m.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_dense_complex<W: Write>(w: &mut W, m: &HermitianWindow) -> Result<()> {
    write_header(w, m.dim(), 2)?;
    for x in m.as_slice() {
        w.write_all(&x.re.to_le_bytes())?;
        w.write_all(&x.im.to_le_bytes())?;
    }
    Ok(())
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

pub fn read_dense<R: Read>(r: &mut R) -> Result<DenseMatrix> {
    let n = usize::try_from(read_u64(r)?).map_err(|_| Error::Malformed("dimension".into()))?;
    let components = read_u64(r)?;
    let len = n
        .checked_mul(n)
        .ok_or_else(|| Error::Malformed("dimension overflow".into()))?;
    match components {
        1 => {
            let data = (0..len).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
            Ok(DenseMatrix::Real(SymmetricMatrix::from_row_major(n, data)?))
        }
        2 => {
            let data = (0..len)
                .map(|_| Ok(Complex64::new(read_f64(r)?, read_f64(r)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(DenseMatrix::Complex(HermitianWindow::from_row_major(n, data)?))
        }
        c => Err(Error::Malformed(format!("unknown component count {c}"))),
    }
}

pub fn save_dense_real(path: &Path, m: &SymmetricMatrix) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_dense_real(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn save_dense_complex(path: &Path, m: &HermitianWindow) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_dense_complex(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn load_dense(path: &Path) -> Result<DenseMatrix> {
    read_dense(&mut BufReader::new(std::fs::File::open(path)?))
}

/// One row per matrix row, comma separated. Complex entries are written as
/// `re+imi`.
pub fn write_matrix_csv<W: Write>(w: &mut W, m: &DenseMatrix) -> Result<()> {
    match m {
        DenseMatrix::Real(a) => {
            for k in 0..a.dim() {
                let row: Vec<String> = (0..a.dim()).map(|l| a.get(k, l).to_string()).collect();
                writeln!(w, "{}", row.join(","))?;
            }
        }
        DenseMatrix::Complex(a) => {
            for k in 0..a.dim() {
                let row: Vec<String> = (0..a.dim())
                    .map(|l| {
                        let z = a.get(k, l);
                        format!("{}{:+}i", z.re, z.im)
                    })
                    .collect();
                writeln!(w, "{}", row.join(","))?;
            }
        }
    }
    Ok(())
}

/// `location,weight,replica_id` rows for each measure in `parts`.
pub fn write_measures_csv<W: Write>(w: &mut W, parts: &[(usize, &PointMeasure)]) -> Result<()> {
    writeln!(w, "location,weight,replica_id")?;
    for (id, m) in parts {
        for &(x, wt) in m.atoms() {
            writeln!(w, "{x:e},{wt:e},{id}")?;
        }
    }
    Ok(())
}

/// Reads `location,weight,replica_id` rows, grouped by replica id in order of
/// first appearance.
pub fn read_measures_csv<R: Read>(r: R) -> Result<Vec<(usize, PointMeasure)>> {
    let mut groups: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(Error::Malformed(format!("line {}: expected 3 fields", i + 1)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Malformed(format!("line {}: bad number {s:?}", i + 1)))
        };
        let id: usize = f[2]
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("line {}: bad replica id", i + 1)))?;
        let atom = (parse(f[0])?, parse(f[1])?);
        match groups.iter_mut().find(|g| g.0 == id) {
            Some(g) => g.1.push(atom),
            None => groups.push((id, vec![atom])),
        }
    }
    groups
        .into_iter()
        .map(|(id, atoms)| Ok((id, PointMeasure::new(atoms)?)))
        .collect()
}

pub fn write_histogram_csv<W: Write>(w: &mut W, h: &Histogram) -> Result<()> {
    writeln!(w, "bin_left,bin_right,mass")?;
    for i in 0..h.bins() {
        writeln!(w, "{:e},{:e},{:e}", h.edges[i], h.edges[i + 1], h.mass[i])?;
    }
    Ok(())
}

pub fn read_histogram_csv<R: Read>(r: R) -> Result<Histogram> {
    let mut edges = Vec::new();
    let mut mass = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "bin_left,bin_right,mass" {
                return Err(Error::Malformed("missing histogram header".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Malformed(format!("line {}: bad number", i + 1)))?;
        if f.len() != 3 {
            return Err(Error::Malformed(format!("line {}: expected 3 fields", i + 1)));
        }
        if let Some(&last) = edges.last() {
            if (f[0] - last) != 0.0 {
                return Err(Error::Malformed(format!("line {}: bins are not contiguous", i + 1)));
            }
        } else {
            edges.push(f[0]);
        }
        if !(f[1] > f[0]) || f[2] < 0.0 {
            return Err(Error::Malformed(format!("line {}: bad bin", i + 1)));
        }
        edges.push(f[1]);
        mass.push(f[2]);
    }
    if mass.is_empty() {
        return Err(Error::Malformed("histogram has no bins".into()));
    }
    Ok(Histogram { edges, mass })
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(std::fs::File::open(path)?))?)
}
