//! Field serialization.
//!
//! Binary layout (all integers `u32`, all floats `f64`, little-endian):
//!
//! | offset | content                                   |
//! |--------|-------------------------------------------|
//! | 0      | magic `b"DSPF"`                           |
//! | 4      | format version (`1`)                      |
//! | 8      | dimension `d`                             |
//! | 12     | points per axis `n`                       |
//! | 16     | number of components `c`                  |
//! | 20     | domain length `L`                         |
//! | 28     | `c * n^d` pairs `(re, im)`                |
//!
//! Coefficients follow the in-memory order: component-major, then FFT order
//! along each axis (row-major for `d = 2`).
//!
//! CSV layout: header `component,k0[,k1],re,im`, one row per coefficient
//! with signed wavenumbers, in the same order as the binary file. The grid
//! is not recoverable from CSV alone, so readers pass it in.

use std::io::{BufRead, Read, Write};

use num_complex::Complex64;

use super::{GridSpec, SpectralField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DSPF";
const VERSION: u32 = 1;

pub fn write_binary(mut w: impl Write, fields: &[SpectralField]) -> Result<()> {
    let grid = check_components(fields)?;
    w.write_all(MAGIC)?;
    for v in [VERSION, grid.d as u32, grid.n as u32, fields.len() as u32] {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&grid.length.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * grid.size());
    for f in fields {
        buf.clear();
        for c in f.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

pub fn read_binary(mut r: impl Read) -> Result<Vec<SpectralField>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let mut word = [0u8; 4];
    let mut u32s = [0u32; 4];
    for v in &mut u32s {
        r.read_exact(&mut word)?;
        *v = u32::from_le_bytes(word);
    }
    let [version, d, n, c] = u32s;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut dword = [0u8; 8];
    r.read_exact(&mut dword)?;
    let length = f64::from_le_bytes(dword);
    let grid = GridSpec::new(d as usize, n as usize, length)
        .map_err(|e| Error::Format(e.to_string()))?;
    if c == 0 {
        return Err(Error::Format("zero components".into()));
    }
    let mut fields = Vec::with_capacity(c as usize);
    let mut raw = vec![0u8; 16 * grid.size()];
    for _ in 0..c {
        r.read_exact(&mut raw)?;
        let coeffs = raw
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        fields.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes".into()));
    }
    Ok(fields)
}

pub fn write_csv(mut w: impl Write, fields: &[SpectralField]) -> Result<()> {
    let grid = check_components(fields)?;
    match grid.d {
        1 => writeln!(w, "component,k0,re,im")?,
        _ => writeln!(w, "component,k0,k1,re,im")?,
    }
    for (ci, f) in fields.iter().enumerate() {
        for (i, c) in f.coeffs().iter().enumerate() {
            let k = grid.index(i);
            match grid.d {
                1 => writeln!(w, "{ci},{},{:.16e},{:.16e}", k[0], c.re, c.im)?,
                _ => writeln!(w, "{ci},{},{},{:.16e},{:.16e}", k[0], k[1], c.re, c.im)?,
            }
        }
    }
    Ok(())
}

/// Reads CSV rows onto `grid`; rows may come in any order, missing modes are zero.
pub fn read_csv(r: impl BufRead, grid: GridSpec) -> Result<Vec<SpectralField>> {
    let mut fields: Vec<SpectralField> = Vec::new();
    let cols = grid.d + 3;
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if lineno == 0 {
            if !line.starts_with("component") {
                return Err(Error::Format("missing CSV header".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != cols {
            return Err(Error::Format(format!("line {}: expected {cols} columns", lineno + 1)));
        }
        let bad = |what: &str| Error::Format(format!("line {}: bad {what}", lineno + 1));
        let comp: usize = parts[0].parse().map_err(|_| bad("component"))?;
        let mut k = [0i64; 2];
        for (a, slot) in k.iter_mut().enumerate().take(grid.d) {
            *slot = parts[1 + a].parse().map_err(|_| bad("wavenumber"))?;
        }
        let re: f64 = parts[grid.d + 1].parse().map_err(|_| bad("re"))?;
        let im: f64 = parts[grid.d + 2].parse().map_err(|_| bad("im"))?;
        let pos = grid.flat(k).ok_or_else(|| bad("wavenumber"))?;
        while fields.len() <= comp {
            fields.push(SpectralField::zeros(grid));
        }
        fields[comp].coeffs_mut()[pos] = Complex64::new(re, im);
    }
    if fields.is_empty() {
        return Err(Error::Format("no coefficient rows".into()));
    }
    Ok(fields)
}

fn check_components(fields: &[SpectralField]) -> Result<GridSpec> {
    let first = fields
        .first()
        .ok_or_else(|| Error::Format("nothing to write".into()))?;
    for f in &fields[1..] {
        first.check_grid(f)?;
    }
    Ok(*first.grid())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<SpectralField> {
        let g = GridSpec::new(2, 8, 1.5).unwrap();
        let a = SpectralField::from_fn(g, |x| Complex64::new(x[0].sin(), x[1] * x[0])).unwrap();
        let b = SpectralField::single_mode(g, [-4, 3], Complex64::new(0.25, -1.0 / 3.0)).unwrap();
        vec![a, b]
    }

    #[test]
    fn binary_roundtrip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 28 + 2 * 64 * 16);
        assert_eq!(&buf[..4], b"DSPF");
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn binary_rejects_corruption() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&mut buf, &f).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_binary(bad.as_slice()).is_err());
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
        let mut long = buf.clone();
        long.push(0);
        assert!(read_binary(long.as_slice()).is_err());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("component,k0,k1,re,im\n"));
        let back = read_csv(buf.as_slice(), *f[0].grid()).unwrap();
        assert_eq!(back, f);
    }
}
