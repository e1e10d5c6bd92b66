//! Anisotropic slope limiting under derivative constraints and its
//! penalized (monolithic) variant.

use rayon::prelude::*;

use crate::mesh::{Mesh, StencilTable};

/// `minmod(a, b)`.
#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Low-order gradients `(U^R_1, U^R_2)` of every cell from face averages of
/// neighboring cell means. `outer[e]` is the state across face `e` as seen
/// by its owner: the neighbor average, or the external state on the boundary.
pub fn gradient_reconstruct(mesh: &Mesh, avg: &[f64], outer: &[f64]) -> [Vec<f64>; 2] {
    let (gx, gy): (Vec<f64>, Vec<f64>) = (0..mesh.num_cells())
        .into_par_iter()
        .map(|i| {
            let c = &mesh.cells[i];
            let (mut gx, mut gy) = (0.0, 0.0);
            for &e in &c.faces {
                let f = &mesh.faces[e];
                let sign = mesh.face_sign(e, i);
                let other = if f.owner == i {
                    outer[e]
                } else {
                    avg[f.owner]
                };
                let w = 0.5 * f.length * (avg[i] + other) * sign;
                gx += w * f.normal[0];
                gy += w * f.normal[1];
            }
            (gx / c.area, gy / c.area)
        })
        .unzip();
    [gx, gy]
}

/// `U_ik^min`, `U_ik^max` over `J_ik` for `k = 1, 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeBounds {
    pub min: [Vec<f64>; 2],
    pub max: [Vec<f64>; 2],
}

impl DerivativeBounds {
    pub fn new(recon: &[Vec<f64>; 2], stencils: &StencilTable) -> Self {
        let one = |k: usize| -> (Vec<f64>, Vec<f64>) {
            (0..recon[k].len())
                .into_par_iter()
                .map(|i| {
                    stencils.get(i, k + 1).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
                        (lo.min(recon[k][j]), hi.max(recon[k][j]))
                    })
                })
                .unzip()
        };
        let (min0, max0) = one(0);
        let (min1, max1) = one(1);
        Self {
            min: [min0, min1],
            max: [max0, max1],
        }
    }
}

#[inline]
fn limit_one(u: f64, lo: f64, hi: f64) -> f64 {
    if u > 0.0 {
        minmod(u, hi)
    } else if u < 0.0 {
        minmod(u, lo)
    } else {
        0.0
    }
}

/// DC-limited derivatives `(U*_i1, U*_i2)`.
pub fn slope_limit_dc(dx: &[f64], dy: &[f64], bounds: &DerivativeBounds) -> [Vec<f64>; 2] {
    let lim = |k: usize, d: &[f64]| -> Vec<f64> {
        d.par_iter()
            .enumerate()
            .map(|(i, &u)| limit_one(u, bounds.min[k][i], bounds.max[k][i]))
            .collect()
    };
    [lim(0, dx), lim(1, dy)]
}

/// Implicit penalty of the difference to the limited target:
/// `(u + γΔt u*) / (1 + γΔt)` for an unpenalized update `u`.
#[inline]
pub fn dc_monolithic_relax(unpenalized: f64, target: f64, gamma: f64, dt: f64) -> f64 {
    if gamma.is_infinite() {
        return target;
    }
    let g = gamma * dt;
    (unpenalized + g * target) / (1.0 + g)
}
