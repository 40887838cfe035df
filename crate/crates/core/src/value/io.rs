//! Value CSV export.

use std::io::Write;

use crate::error::Result;
use crate::surface::io::num;
use crate::value::residuals::{point_residuals, NAMES};
use crate::value::ValueField;

/// Writes `i, x, s, region, V, residual_flags` for each sample; the flags
/// list the conditions whose residual exceeds `tol` at that sample,
/// separated by `;`.
pub fn write_values<W: Write>(
    field: &ValueField<'_>,
    samples: &[(f64, f64, f64)],
    h: f64,
    tol: f64,
    header: &[String],
    mut w: W,
) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "i,x,s,region,V,residual_flags")?;
    for &(i, x, s) in samples {
        let e = field.eval(i, x, s)?;
        let r = point_residuals(field, i, x, s, h)?;
        let flags: Vec<&str> = NAMES
            .iter()
            .zip(r.iter())
            .filter(|(_, v)| v.is_some_and(|v| v > tol))
            .map(|(n, _)| *n)
            .collect();
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(i),
            num(x),
            num(s),
            e.region,
            num(e.value),
            flags.join(";")
        )?;
    }
    Ok(())
}
