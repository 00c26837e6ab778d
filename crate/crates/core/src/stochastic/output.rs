//! CSV output for paths and estimator reports. Floats use Rust's shortest
//! round-trip formatting, so identical data gives identical bytes.

use std::io::Write;

use super::{DriftEstimate, Moments, PathData};
use crate::error::Result;

/// `particle_id,t,theta1,theta2,phase`, grouped by particle.
pub fn write_paths_csv<W: Write>(mut w: W, paths: &PathData) -> Result<()> {
    writeln!(w, "particle_id,t,theta1,theta2,phase")?;
    for p in 0..paths.particles() {
        for r in 0..paths.records() {
            let x = paths.positions[r][p];
            writeln!(
                w,
                "{p},{},{},{},{}",
                paths.times[r], x[0], x[1], paths.phases[r][p]
            )?;
        }
    }
    Ok(())
}

/// One row per bin; the reference columns are empty when no reference is given,
/// and every estimate column is empty for missing bins.
pub fn write_drift_csv<W: Write>(
    mut w: W,
    est: &DriftEstimate,
    reference: Option<&[Option<[f64; 2]>]>,
) -> Result<()> {
    writeln!(
        w,
        "bin1,bin2,theta1,theta2,count,u1,u2,se1,se2,ref1,ref2,z1,z2"
    )?;
    let zs = reference.map(|r| est.z_scores(r));
    for (i, cell) in est.cells.iter().enumerate() {
        let c = est.centre(i);
        write!(w, "{},{},{},{}", i / est.bins, i % est.bins, c[0], c[1])?;
        match cell {
            Some(b) => write!(
                w,
                ",{},{},{},{},{}",
                b.count, b.mean[0], b.mean[1], b.stderr[0], b.stderr[1]
            )?,
            None => write!(w, ",0,,,,")?,
        }
        match reference.and_then(|r| r[i]) {
            Some(r) => write!(w, ",{},{}", r[0], r[1])?,
            None => write!(w, ",,")?,
        }
        match zs.as_ref().and_then(|z| z[i]) {
            Some(z) => writeln!(w, ",{},{}", z[0], z[1])?,
            None => writeln!(w, ",,")?,
        }
    }
    Ok(())
}

/// `t,mean1,mean2,var1,var2`
pub fn write_moments_csv<W: Write>(mut w: W, moments: &[Moments]) -> Result<()> {
    writeln!(w, "t,mean1,mean2,var1,var2")?;
    for m in moments {
        writeln!(
            w,
            "{},{},{},{},{}",
            m.t, m.mean[0], m.mean[1], m.var[0], m.var[1]
        )?;
    }
    Ok(())
}
