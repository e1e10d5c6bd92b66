//! Error norms, convergence rates, postprocessing and file output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::dgfield::{cell_average, trace_eval, vertex_values, DGField};
use crate::limiters::slope_limit_sc;
use crate::mesh::Mesh;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub h: f64,
    pub cells: usize,
    pub e2: f64,
    pub emax: f64,
}

/// `sqrt(Σ |K_i| (U_i0 − ū_i)²)` against exact cell averages, plus the
/// largest pointwise average error.
pub fn e2_error(mesh: &Mesh, field: &DGField, exact: impl Fn(f64, f64) -> f64) -> ErrorReport {
    let mut e2 = 0.0;
    let mut emax: f64 = 0.0;
    for (i, c) in mesh.cells.iter().enumerate() {
        let d = field.avg[i] - cell_average(mesh, i, &exact);
        e2 += c.area * d * d;
        emax = emax.max(d.abs());
    }
    ErrorReport {
        h: mesh.hx,
        cells: mesh.num_cells(),
        e2: e2.sqrt(),
        emax,
    }
}

/// `log2(E_coarse / E_fine)`; `None` when undefined.
pub fn eoc(coarse: f64, fine: f64) -> Option<f64> {
    (coarse > 0.0 && fine > 0.0).then(|| (coarse / fine).log2())
}

/// Applies the vertex-based limiter once. Cell averages are kept.
pub fn sc_postprocess(mesh: &Mesh, field: &DGField) -> DGField {
    let beta = slope_limit_sc(mesh, field);
    let mut out = field.clone();
    for (i, b) in beta.into_iter().enumerate() {
        out.dx[i] *= b;
        out.dy[i] *= b;
    }
    out
}

/// Lumped-mass projection onto continuous bilinears: every vertex gets the
/// area-weighted mean of the adjacent cells' values there. The result is
/// indexed by mesh vertex; periodic copies share their value.
pub fn project_bilinear(mesh: &Mesh, field: &DGField) -> Vec<f64> {
    let nv = mesh.vertices.len();
    let mut sum = vec![0.0; nv];
    let mut weight = vec![0.0; nv];
    for (i, c) in mesh.cells.iter().enumerate() {
        let vals = vertex_values(field, mesh, i);
        for p in 0..4 {
            let v = mesh.canonical_vertex(c.vertices[p]);
            sum[v] += c.area * vals[p];
            weight[v] += c.area;
        }
    }
    (0..nv)
        .map(|v| {
            let k = mesh.canonical_vertex(v);
            sum[k] / weight[k]
        })
        .collect()
}

/// Samples the piecewise-linear solution at `samples` cell-centered points
/// along `axis = coordinate` (`axis` is `'x'` or `'y'`). Returns
/// `(position, value)` pairs with the position along the line.
pub fn line_cut(mesh: &Mesh, field: &DGField, axis: char, coordinate: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    let b = &mesh.bounds;
    let (lo, hi, along_x) = match axis {
        'y' => (b.y0, b.y1, true),
        'x' => (b.x0, b.x1, false),
        _ => return Err(Error::Config(format!("line axis must be 'x' or 'y', got '{axis}'"))),
    };
    if !(coordinate >= lo && coordinate <= hi) {
        return Err(Error::LineOutsideDomain { axis, coordinate });
    }
    let (start, len) = if along_x { (b.x0, b.width()) } else { (b.y0, b.height()) };
    (0..samples)
        .map(|k| {
            let s = start + (k as f64 + 0.5) * len / samples as f64;
            let x = if along_x { [s, coordinate] } else { [coordinate, s] };
            let i = mesh.locate(x).ok_or(Error::LineOutsideDomain { axis, coordinate })?;
            Ok((s, trace_eval(field, mesh, i, x, [1.0, 1.0])))
        })
        .collect()
}

/// Discrete total variation `Σ |v_{k+1} − v_k|`.
pub fn total_variation(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(mut prev) = it.next() else { return 0.0 };
    let mut tv = 0.0;
    for v in it {
        tv += (v - prev).abs();
        prev = v;
    }
    tv
}

/// Angles (degrees, in [0, 360)) of the `count` strongest jumps of the
/// field along the circle of `radius` about `center`, with peaks at least
/// `separation` degrees apart.
pub fn circle_jump_angles(
    mesh: &Mesh,
    field: &DGField,
    center: [f64; 2],
    radius: f64,
    samples: usize,
    count: usize,
    separation: f64,
) -> Vec<f64> {
    let value = |k: usize| {
        let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let x = [center[0] + radius * t.cos(), center[1] + radius * t.sin()];
        mesh.locate(x).map_or(f64::NAN, |i| trace_eval(field, mesh, i, x, [1.0, 1.0]))
    };
    let vals: Vec<f64> = (0..samples).map(value).collect();
    let mut jumps: Vec<(f64, f64)> = (0..samples)
        .map(|k| {
            let d = (vals[(k + 1) % samples] - vals[k]).abs();
            let angle = 360.0 * (k as f64 + 0.5) / samples as f64;
            (if d.is_nan() { 0.0 } else { d }, angle)
        })
        .collect();
    jumps.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut picked: Vec<f64> = Vec::new();
    for (_, a) in jumps {
        if picked.iter().all(|&p| angle_distance(p, a) >= separation) {
            picked.push(a);
            if picked.len() == count {
                break;
            }
        }
    }
    picked
}

/// Smallest absolute difference of two angles in degrees.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?;
        }
    }
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Header line plus one line per row, comma separated.
pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: &[Vec<S>]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    writeln!(w, "{}", header.join(",")).map_err(&err)?;
    for row in rows {
        let line: Vec<&str> = row.iter().map(|s| s.as_ref()).collect();
        writeln!(w, "{}", line.join(",")).map_err(&err)?;
    }
    w.flush().map_err(&err)
}

/// Legacy ASCII VTK structured-points file with cell averages `u_avg` and
/// nodal bilinear values `u_bilinear`.
pub fn write_vtk(path: &Path, mesh: &Mesh, avg: &[f64], nodal: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    let err = io_err(path);
    let (nx, ny) = (mesh.nx, mesh.ny);
    let b = &mesh.bounds;
    let mut body = String::new();
    use std::fmt::Write as _;
    let _ = writeln!(body, "# vtk DataFile Version 3.0");
    let _ = writeln!(body, "dglimit solution");
    let _ = writeln!(body, "ASCII");
    let _ = writeln!(body, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(body, "DIMENSIONS {} {} 1", nx + 1, ny + 1);
    let _ = writeln!(body, "ORIGIN {} {} 0", b.x0, b.y0);
    let _ = writeln!(body, "SPACING {} {} 1", mesh.hx, mesh.hy);
    let _ = writeln!(body, "CELL_DATA {}", nx * ny);
    let _ = writeln!(body, "SCALARS u_avg double 1");
    let _ = writeln!(body, "LOOKUP_TABLE default");
    for u in avg {
        let _ = writeln!(body, "{u:.12e}");
    }
    let _ = writeln!(body, "POINT_DATA {}", (nx + 1) * (ny + 1));
    let _ = writeln!(body, "SCALARS u_bilinear double 1");
    let _ = writeln!(body, "LOOKUP_TABLE default");
    for u in nodal {
        let _ = writeln!(body, "{u:.12e}");
    }
    w.write_all(body.as_bytes()).map_err(&err)?;
    w.flush().map_err(&err)
}
