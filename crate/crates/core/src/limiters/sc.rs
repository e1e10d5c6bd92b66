//! Vertex-based slope limiter under solution constraints.

use rayon::prelude::*;

use crate::dgfield::{vertex_values, DGField};
use crate::mesh::Mesh;

/// Bounds `U_ip^min`, `U_ip^max` indexed by canonical vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl VertexBounds {
    /// Bounds at vertex `p` (0..4, SW, SE, NE, NW) of cell `i`.
    #[inline]
    pub fn at(&self, mesh: &Mesh, i: usize, p: usize) -> (f64, f64) {
        let v = mesh.canonical_vertex(mesh.cells[i].vertices[p]);
        (self.min[v], self.max[v])
    }
}

/// Min/max of the cell averages meeting at each vertex.
pub fn vertex_bounds(mesh: &Mesh, avg: &[f64]) -> VertexBounds {
    let mut min = vec![f64::INFINITY; mesh.vertices.len()];
    let mut max = vec![f64::NEG_INFINITY; mesh.vertices.len()];
    for c in &mesh.cells {
        let u = avg[c.index];
        for &v in &c.vertices {
            let v = mesh.canonical_vertex(v);
            min[v] = min[v].min(u);
            max[v] = max[v].max(u);
        }
    }
    VertexBounds { min, max }
}

/// Ratio rule at one vertex.
#[inline]
fn vertex_ratio(avg: f64, value: f64, lo: f64, hi: f64) -> f64 {
    let d = value - avg;
    if d > 0.0 {
        ((hi - avg) / d).min(1.0)
    } else if d < 0.0 {
        ((lo - avg) / d).min(1.0)
    } else {
        1.0
    }
}

/// SC correction factors `β_i`.
pub fn slope_limit_sc(mesh: &Mesh, field: &DGField) -> Vec<f64> {
    let vb = vertex_bounds(mesh, &field.avg);
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|i| {
            let vals = vertex_values(field, mesh, i);
            (0..4)
                .map(|p| {
                    let (lo, hi) = vb.at(mesh, i, p);
                    vertex_ratio(field.avg[i], vals[p], lo, hi)
                })
                .fold(1.0f64, f64::min)
                .max(0.0)
        })
        .collect()
}
