//! CSV time series, SVG outlines (n = 1) and v/f meshes (n = 2).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::diagnostics::DiagRecord;
use crate::error::{FlowError, Result};
use crate::geometry::embed_boundary;
use crate::grid::{dot, SphereGrid};
use crate::run::Trajectory;
use crate::volumes::steiner_point;

pub fn timeseries_header(n: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((0..=n + 1).map(|j| format!("V{j}")));
    cols.extend((1..=n + 1).map(|j| format!("r{j}")));
    cols.extend(["I_iso", "phi", "Ek_min", "Ek_max", "rho_minus", "rho_plus"].map(String::from));
    cols.extend(["steiner_x", "steiner_y", "steiner_z"].iter().take(n + 1).map(|c| c.to_string()));
    cols.extend(["d_ball", "tso_W", "ekflat"].map(String::from));
    cols.join(",")
}

/// One value per column of [`timeseries_header`].
pub fn timeseries_row(rec: &DiagRecord) -> Vec<f64> {
    let n = rec.volumes.len() - 2;
    let mut row = vec![rec.t];
    row.extend(&rec.volumes);
    row.extend(&rec.radii);
    row.extend([rec.iso, rec.phi, rec.ek_min, rec.ek_max, rec.rho_minus, rec.rho_plus]);
    row.extend(&rec.steiner[..=n]);
    row.extend([rec.d_ball, rec.tso_w, rec.ek_flatness]);
    row
}

/// CSV text with 17 significant digits per value.
pub fn timeseries_csv(records: &[DiagRecord]) -> Result<String> {
    let first = records.first().ok_or(FlowError::EmptyTrajectory)?;
    let mut out = timeseries_header(first.volumes.len() - 2);
    out.push('\n');
    for rec in records {
        let cells: Vec<String> = timeseries_row(rec).iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn export_timeseries(traj: &Trajectory, path: &Path) -> Result<()> {
    write(path, &timeseries_csv(&traj.records)?)
}

/// SVG with the boundary polyline and the best-fit circle (n = 1). The y axis
/// is flipped so the picture has the usual orientation.
pub fn svg_outline(grid: &SphereGrid, s: &[f64]) -> String {
    let pts = embed_boundary(grid, s);
    let p = steiner_point(grid, s);
    let r_hat = grid
        .nodes()
        .iter()
        .zip(s)
        .zip(grid.weights())
        .map(|((z, v), w)| (v - dot(&p, z)) * w)
        .sum::<f64>()
        / grid.omega();

    let (mut x0, mut x1, mut y0, mut y1) = (p[0] - r_hat, p[0] + r_hat, -p[1] - r_hat, -p[1] + r_hat);
    for q in &pts {
        x0 = x0.min(q[0]);
        x1 = x1.max(q[0]);
        y0 = y0.min(-q[1]);
        y1 = y1.max(-q[1]);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0);
    let stroke = 0.005 * (x1 - x0).max(y1 - y0);
    let mut points = String::new();
    for q in pts.iter().chain(pts.first()) {
        let _ = write!(points, "{},{} ", q[0], -q[1]);
    }
    format!(
        concat!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"{} {} {} {}\">\n",
            "  <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{}\" points=\"{}\"/>\n",
            "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"red\" stroke-width=\"{}\" stroke-dasharray=\"{} {}\"/>\n",
            "</svg>\n"
        ),
        x0 - pad,
        y0 - pad,
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad,
        stroke,
        points.trim_end(),
        p[0],
        -p[1],
        r_hat,
        stroke,
        4.0 * stroke,
        2.0 * stroke,
    )
}

/// Triangles of the latitude–longitude grid with outward orientation,
/// 0-based. The polar holes are closed by fans over the first and last rows.
pub fn mesh_faces(lats: usize, lons: usize) -> Vec<[usize; 3]> {
    let id = |j: usize, i: usize| j * lons + i % lons;
    let mut faces = Vec::with_capacity(2 * lats * lons);
    for i in 1..lons - 1 {
        faces.push([id(0, 0), id(0, i), id(0, i + 1)]);
    }
    for j in 0..lats - 1 {
        for i in 0..lons {
            faces.push([id(j, i), id(j + 1, i), id(j, i + 1)]);
            faces.push([id(j + 1, i), id(j + 1, i + 1), id(j, i + 1)]);
        }
    }
    let last = lats - 1;
    for i in 1..lons - 1 {
        faces.push([id(last, 0), id(last, i + 1), id(last, i)]);
    }
    faces
}

/// Plain-text mesh: `v x y z` per embedded node, then `f i j k` (1-based).
pub fn mesh_text(grid: &SphereGrid, s: &[f64]) -> Result<String> {
    let (lats, lons) = grid
        .lat_lon_shape()
        .ok_or_else(|| FlowError::config("meshes are written for n = 2 only"))?;
    let mut out = String::new();
    for q in embed_boundary(grid, s) {
        let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", q[0], q[1], q[2]);
    }
    for f in mesh_faces(lats, lons) {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    Ok(out)
}

/// SVG for n = 1, mesh for n = 2.
pub fn export_snapshot(grid: &SphereGrid, s: &[f64], path: &Path) -> Result<()> {
    let text = if grid.dim() == 1 { svg_outline(grid, s) } else { mesh_text(grid, s)? };
    write(path, &text)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| FlowError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| FlowError::io(path, e))
}
