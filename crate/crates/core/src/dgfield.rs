//! Piecewise-linear solutions in the cell-local Taylor basis
//! `{1, x − x̄_i, y − ȳ_i}`.

use crate::mesh::Mesh;

/// 3-point Gauss-Legendre rule on [-1, 1].
pub const GAUSS3_POINTS: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GAUSS3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
pub const GAUSS2_POINT: f64 = 0.577_350_269_189_625_8;

/// Struct-of-arrays storage of the Taylor coefficients of every cell.
#[derive(Clone, Debug, PartialEq)]
pub struct DGField {
    /// Cell averages `U_i0`.
    pub avg: Vec<f64>,
    /// `U_i1 = ∂u/∂x`.
    pub dx: Vec<f64>,
    /// `U_i2 = ∂u/∂y`.
    pub dy: Vec<f64>,
}

impl DGField {
    pub fn zeros(n: usize) -> Self {
        Self {
            avg: vec![0.0; n],
            dx: vec![0.0; n],
            dy: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            avg: vec![c; n],
            ..Self::zeros(n)
        }
    }

    pub fn len(&self) -> usize {
        self.avg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.avg.is_empty()
    }

    /// `self = a * self + b * other`, coefficient-wise.
    pub fn combine(&mut self, a: f64, b: f64, other: &DGField) {
        for (s, o) in [
            (&mut self.avg, &other.avg),
            (&mut self.dx, &other.dx),
            (&mut self.dy, &other.dy),
        ] {
            for (x, y) in s.iter_mut().zip(o) {
                *x = a * *x + b * y;
            }
        }
    }

    pub fn avg_range(&self) -> (f64, f64) {
        self.avg
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| (lo.min(u), hi.max(u)))
    }

    /// Unlimited trace of cell `i` at `x`.
    #[inline]
    pub fn eval(&self, mesh: &Mesh, i: usize, x: [f64; 2]) -> f64 {
        let c = mesh.cells[i].centroid;
        self.avg[i] + self.dx[i] * (x[0] - c[0]) + self.dy[i] * (x[1] - c[1])
    }
}

/// Limited Taylor expansion `U_i0 + Σ β_k U_ik (x_k − x̄_k)`.
pub fn trace_eval(field: &DGField, mesh: &Mesh, i: usize, x: [f64; 2], beta: [f64; 2]) -> f64 {
    let c = mesh.cells[i].centroid;
    field.avg[i] + beta[0] * field.dx[i] * (x[0] - c[0]) + beta[1] * field.dy[i] * (x[1] - c[1])
}

/// Unlimited values at the four cell vertices (SW, SE, NE, NW).
pub fn vertex_values(field: &DGField, mesh: &Mesh, i: usize) -> [f64; 4] {
    let ex = 0.5 * mesh.hx * field.dx[i];
    let ey = 0.5 * mesh.hy * field.dy[i];
    let u = field.avg[i];
    [u - ex - ey, u + ex - ey, u + ex + ey, u - ex + ey]
}

/// Tensor 3x3 Gauss points and weights on cell `i` (weights sum to `|K_i|`).
pub fn cell_quadrature(mesh: &Mesh, i: usize) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
    let c = mesh.cells[i].centroid;
    let (hx, hy) = (0.5 * mesh.hx, 0.5 * mesh.hy);
    let scale = hx * hy;
    (0..9).map(move |q| {
        let (a, b) = (q % 3, q / 3);
        (
            [c[0] + hx * GAUSS3_POINTS[a], c[1] + hy * GAUSS3_POINTS[b]],
            scale * GAUSS3_WEIGHTS[a] * GAUSS3_WEIGHTS[b],
        )
    })
}

/// Exact-data cell average by 3x3 Gauss quadrature.
pub fn cell_average(mesh: &Mesh, i: usize, u: impl Fn(f64, f64) -> f64) -> f64 {
    cell_quadrature(mesh, i).map(|(x, w)| w * u(x[0], x[1])).sum::<f64>() / mesh.cells[i].area
}

/// L2 projection of `u0` onto the Taylor basis (diagonal mass on rectangles).
pub fn project_initial(mesh: &Mesh, u0: impl Fn(f64, f64) -> f64) -> DGField {
    let mut field = DGField::zeros(mesh.num_cells());
    for i in 0..mesh.num_cells() {
        let c = mesh.cells[i].centroid;
        let m = mesh.taylor_mass(i);
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for (x, w) in cell_quadrature(mesh, i) {
            let u = u0(x[0], x[1]);
            s0 += w * u;
            s1 += w * u * (x[0] - c[0]);
            s2 += w * u * (x[1] - c[1]);
        }
        field.avg[i] = s0 / m[0];
        field.dx[i] = s1 / m[1];
        field.dy[i] = s2 / m[2];
    }
    field
}
