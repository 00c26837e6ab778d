//! Plain-text snapshot of a velocity field.
//!
//! ```text
//! QGS-SPEC v1 n=64 t=1.0000000000000000e0
//! 0,0,0.0000000000000000e0,0.0000000000000000e0
//! 0,1,...
//! H,c1,c2
//! ```
//!
//! One line per stored stream coefficient on the half-lattice (`k1 > 0`, or
//! `k1 = 0` and `k2 >= 0`); the other half follows from conjugate symmetry.
//! Numbers carry 17 significant digits so a write/read cycle is bit-exact.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{check_resolution, SpectralField, VelocityField, WaveIndex};
use crate::error::{Error, Result};

/// A field together with the time it belongs to.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: VelocityField,
}

fn stored_modes(n: usize) -> impl Iterator<Item = WaveIndex> {
    let h = (n / 2) as i64;
    (0..h).flat_map(move |k1| {
        (-h + 1..h)
            .map(move |k2| WaveIndex::new(k1, k2))
            .filter(|k| k.k1 > 0 || k.k2 >= 0)
    })
}

pub fn write_snapshot<W: Write>(mut w: W, t: f64, field: &VelocityField) -> Result<()> {
    let n = field.n();
    writeln!(w, "QGS-SPEC v1 n={n} t={t:.16e}")?;
    for k in stored_modes(n) {
        let c = field.stream().coeff(k);
        writeln!(w, "{},{},{:.16e},{:.16e}", k.k1, k.k2, c.re, c.im)?;
    }
    let [c1, c2] = field.harmonic();
    writeln!(w, "H,{c1:.16e},{c2:.16e}")?;
    Ok(())
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Snapshot {
        line,
        msg: msg.into(),
    }
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| bad(line, format!("invalid number `{s}`")))
}

fn parse_header(s: &str) -> Result<(usize, f64)> {
    let mut parts = s.split_whitespace();
    if parts.next() != Some("QGS-SPEC") || parts.next() != Some("v1") {
        return Err(bad(1, "missing `QGS-SPEC v1` header"));
    }
    let n = parts
        .next()
        .and_then(|p| p.strip_prefix("n="))
        .and_then(|p| p.parse::<usize>().ok())
        .ok_or_else(|| bad(1, "missing or invalid n="))?;
    let t = parts
        .next()
        .and_then(|p| p.strip_prefix("t="))
        .ok_or_else(|| bad(1, "missing t="))?;
    let t = parse_f64(t, 1)?;
    check_resolution(n).map_err(|e| bad(1, e.to_string()))?;
    Ok((n, t))
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Snapshot> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty file"))??;
    let (n, t) = parse_header(&header)?;
    let mut stream = SpectralField::zeros(n);
    let mut harmonic = None;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == "H" {
            if fields.len() != 3 {
                return Err(bad(lineno, "expected `H,c1,c2`"));
            }
            harmonic = Some([parse_f64(fields[1], lineno)?, parse_f64(fields[2], lineno)?]);
            continue;
        }
        if fields.len() != 4 {
            return Err(bad(lineno, "expected `k1,k2,re,im`"));
        }
        let k1: i64 = fields[0]
            .parse()
            .map_err(|_| bad(lineno, "invalid k1"))?;
        let k2: i64 = fields[1]
            .parse()
            .map_err(|_| bad(lineno, "invalid k2"))?;
        let k = WaveIndex::new(k1, k2);
        if !(k.k1 > 0 || (k.k1 == 0 && k.k2 >= 0)) {
            return Err(bad(lineno, "mode outside the stored half-lattice"));
        }
        let c = Complex64::new(parse_f64(fields[2], lineno)?, parse_f64(fields[3], lineno)?);
        stream
            .set_coeff(k, c)
            .map_err(|e| bad(lineno, e.to_string()))?;
    }
    let harmonic = harmonic.ok_or_else(|| bad(0, "missing harmonic line"))?;
    Ok(Snapshot {
        t,
        field: VelocityField::new(stream, harmonic),
    })
}
