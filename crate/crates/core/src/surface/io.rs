//! CSV export and import of surfaces.

use std::io::Write;
use std::path::Path;

use crate::diffusion::TransformedModel;
use crate::error::{Error, Result};
use crate::surface::checks::cell_residuals;
use crate::surface::cost::CostFunction;
use crate::surface::extremal::{Schedule, SolverOptions, SurfacePair};
use crate::surface::grid::TriangleGrid;
use crate::surface::rhs::{f_parts, g_parts};

pub(crate) fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Writes `i, s, f_star, g_star, in_C0, residual_f, residual_g`, i-major,
/// preceded by `#` comment lines.
pub fn write_surfaces<W: Write>(p: &SurfacePair, header: &[String], mut w: W) -> Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "i,s,f_star,g_star,in_C0,residual_f,residual_g")?;
    let nodes = p.grid.nodes();
    for (k, m) in p.grid.cells() {
        let (f, g) = (p.f_node(k, m), p.g_node(k, m));
        let (rf, rg) = cell_residuals(p, k, m);
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(nodes[k]),
            num(nodes[m]),
            num(f),
            num(g),
            f > g,
            num(rf),
            num(rg)
        )?;
    }
    Ok(())
}

pub fn save_surfaces<P: AsRef<Path>>(p: &SurfacePair, header: &[String], path: P) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write_surfaces(p, header, &mut buf)?;
    buf.flush()?;
    Ok(())
}

/// Reads surfaces written by [`save_surfaces`]; slopes are recomputed from
/// the equations. Exact re-integration is unavailable for loaded surfaces.
pub fn load_surfaces<P: AsRef<Path>>(
    path: P,
    model: &TransformedModel,
    cost: &CostFunction,
    opts: SolverOptions,
) -> Result<SurfacePair> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .ok_or_else(|| Error::Config("surface CSV row too short".into()))?
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("surface CSV: {e}")))
        };
        rows.push((parse(0)?, parse(1)?, parse(2)?, parse(3)?));
    }
    let mut nodes: Vec<f64> = rows.iter().map(|r| r.0).collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let grid = TriangleGrid::from_nodes(nodes)?;
    let n = grid.len();
    if rows.len() != n * (n + 1) / 2 {
        return Err(Error::Config(format!(
            "surface CSV has {} rows, expected {} for {n} nodes",
            rows.len(),
            n * (n + 1) / 2
        )));
    }
    let mut f = vec![f64::NAN; n * n];
    let mut g = vec![f64::NAN; n * n];
    let mut df_di = vec![f64::NAN; n * n];
    let mut dg_ds = vec![f64::NAN; n * n];
    let find = |x: f64| grid.nodes().partition_point(|&v| v < x);
    for &(i, s, fv, gv) in &rows {
        let (k, m) = (find(i), find(s));
        if k >= n || m >= n || k > m {
            return Err(Error::Config(format!("surface CSV cell ({i}, {s}) is off the grid")));
        }
        let idx = grid.index(k, m);
        f[idx] = fv;
        g[idx] = gv;
        let (a, b) = f_parts(model, cost, i, s, fv, opts.quad)?;
        df_di[idx] = a / b;
        let (a, b) = g_parts(model, cost, i, s, gv, opts.quad)?;
        dg_ds[idx] = a / b;
    }
    Ok(SurfacePair {
        model: model.clone(),
        cost: cost.clone(),
        grid,
        f,
        df_di,
        g,
        dg_ds,
        f_provenance: Vec::new(),
        g_provenance: Vec::new(),
        schedule: Schedule {
            lower: Vec::new(),
            upper: Vec::new(),
        },
        options: opts,
        exact_start: None,
    })
}
