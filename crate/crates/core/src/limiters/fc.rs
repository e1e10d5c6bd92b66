//! Slope limiters under flux constraints.

use rayon::prelude::*;

use super::{alpha_from_bounds, fct_flux_bounds, CellBounds};
use crate::dgfield::DGField;
use crate::fluxes::BoundaryData;
use crate::mesh::{FaceNeighbor, Mesh};
use crate::problems::{ConservationLaw, WaveSpeedBound};

/// Face-level quantities shared by FC-L and FC-N, owner frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FcFaceData {
    /// `(P^+, P^-)` of the owner: positive and negative parts of the outflow
    /// integral for FC-L, of `∫ U_i0 − u_ih` for FC-N.
    pub own: [f64; 2],
    /// Same for the neighbor, in its own frame.
    pub other: [f64; 2],
    /// Whether the face enters the minimum defining β of each side.
    pub active: [bool; 2],
    pub alpha_plus: f64,
    pub alpha_minus: f64,
}

/// `(u_ih, u_jh)` at quadrature point `q`; `None` on boundary faces.
#[inline]
fn traces(mesh: &Mesh, field: &DGField, face: usize, q: usize) -> (f64, Option<f64>) {
    let f = &mesh.faces[face];
    let x = f.quad_points[q];
    let ui = field.eval(mesh, f.owner, x);
    let uj = f.neighbor_cell().map(|j| {
        let xs = [x[0] + f.neighbor_shift[0], x[1] + f.neighbor_shift[1]];
        field.eval(mesh, j, xs)
    });
    (ui, uj)
}

/// Minimum over the active faces of the case rule on the signs of `P^±`.
fn gather_beta(mesh: &Mesh, faces: &[FcFaceData]) -> Vec<f64> {
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|i| {
            let mut beta: f64 = 1.0;
            for &e in &mesh.cells[i].faces {
                let d = &faces[e];
                let owner = mesh.faces[e].owner == i;
                let (p, side, a_plus, a_minus) = if owner {
                    (d.own, 0, d.alpha_plus, d.alpha_minus)
                } else {
                    // α^+_ji = α^-_ij
                    (d.other, 1, d.alpha_minus, d.alpha_plus)
                };
                if !d.active[side] {
                    continue;
                }
                let b = match (p[0] > 0.0, p[1] < 0.0) {
                    (true, true) => a_plus.min(a_minus),
                    (true, false) => a_plus,
                    (false, true) => a_minus,
                    (false, false) => 1.0,
                };
                beta = beta.min(b);
            }
            beta
        })
        .collect()
}

fn alphas(fplus: f64, fminus: f64, bounds: (f64, f64)) -> (f64, f64) {
    let a_plus = if fplus > 0.0 { alpha_from_bounds(fplus, bounds.0, bounds.1) } else { 1.0 };
    let a_minus = if fminus < 0.0 { alpha_from_bounds(fminus, bounds.0, bounds.1) } else { 1.0 };
    (a_plus, a_minus)
}

/// Per-face data of the linear flux-constraining limiter.
pub fn fcl_face_data(
    law: &ConservationLaw,
    mesh: &Mesh,
    field: &DGField,
    u_p0: &[f64],
    bounds: &CellBounds,
    dt: f64,
) -> Vec<FcFaceData> {
    let v = law.velocity().expect("fc-l requires linear advection");
    (0..mesh.faces.len())
        .into_par_iter()
        .map(|e| {
            let f = &mesh.faces[e];
            let n = f.normal;
            let (mut out_i, mut out_j) = (0.0, 0.0);
            let mut active = [false; 2];
            for q in 0..2 {
                let vv = v.at(f.quad_points[q]);
                let vn = vv[0] * n[0] + vv[1] * n[1];
                let w = f.quad_weights[q];
                let (ui, uj) = traces(mesh, field, e, q);
                if vn > 0.0 {
                    active[0] = true;
                    out_i += w * (field.avg[f.owner] - ui) * vn;
                } else if vn < 0.0 {
                    if let (Some(uj), Some(j)) = (uj, f.neighbor_cell()) {
                        active[1] = true;
                        // Outflow of j measured with n_ji = −n_ij.
                        out_j += w * (field.avg[j] - uj) * (-vn);
                    }
                }
            }
            // I_in seen from the owner is −out_j.
            let i_in = -out_j;
            let fplus = out_i.max(0.0) + i_in.max(0.0);
            let fminus = out_i.min(0.0) + i_in.min(0.0);
            let (alpha_plus, alpha_minus) = alphas(fplus, fminus, fct_flux_bounds(mesh, e, u_p0, bounds, dt));
            FcFaceData {
                own: [out_i.max(0.0), out_i.min(0.0)],
                other: [out_j.max(0.0), out_j.min(0.0)],
                active,
                alpha_plus,
                alpha_minus,
            }
        })
        .collect()
}

/// FC-L correction factors `β_i` for linear advection.
pub fn slope_limit_fcl(
    law: &ConservationLaw,
    mesh: &Mesh,
    field: &DGField,
    u_p0: &[f64],
    bounds: &CellBounds,
    dt: f64,
) -> Vec<f64> {
    gather_beta(mesh, &fcl_face_data(law, mesh, field, u_p0, bounds, dt))
}

/// Wave-speed bound valid for every pair of partially limited traces.
fn lambda_max(law: &ConservationLaw, mesh: &Mesh, field: &DGField, bc: &BoundaryData, e: usize) -> f64 {
    if let WaveSpeedBound::GlobalConstant(c) = law.wave_speed {
        if !law.is_linear() {
            return c;
        }
    }
    let f = &mesh.faces[e];
    let mut lo = field.avg[f.owner];
    let mut hi = lo;
    let mut add = |u: f64| {
        lo = lo.min(u);
        hi = hi.max(u);
    };
    if let Some(j) = f.neighbor_cell() {
        add(field.avg[j]);
    }
    for q in 0..2 {
        let (ui, uj) = traces(mesh, field, e, q);
        add(ui);
        add(uj.unwrap_or_else(|| bc.at(e, q)));
    }
    (0..2)
        .map(|q| match law.wave_speed {
            WaveSpeedBound::Analytic if law.is_linear() => law.max_wave_speed(lo, hi, f.normal, f.quad_points[q]),
            _ => law.sampled_wave_speed(lo, hi, f.normal, f.quad_points[q]),
        })
        .fold(0.0, f64::max)
}

/// Per-face data of the nonlinear flux-constraining limiter.
pub fn fcn_face_data(
    law: &ConservationLaw,
    mesh: &Mesh,
    bc: &BoundaryData,
    field: &DGField,
    u_p0: &[f64],
    bounds: &CellBounds,
    dt: f64,
) -> Vec<FcFaceData> {
    (0..mesh.faces.len())
        .into_par_iter()
        .map(|e| {
            let f = &mesh.faces[e];
            let lambda = lambda_max(law, mesh, field, bc, e);
            let (mut pi, mut pj) = ([0.0; 2], [0.0; 2]);
            let (mut fplus, mut fminus) = (0.0, 0.0);
            for q in 0..2 {
                let w = f.quad_weights[q];
                let (ui, uj) = traces(mesh, field, e, q);
                let di = field.avg[f.owner] - ui;
                pi[0] += w * di.max(0.0);
                pi[1] += w * di.min(0.0);
                match (uj, f.neighbor) {
                    (Some(uj), FaceNeighbor::Cell(j)) => {
                        let dj = field.avg[j] - uj;
                        pj[0] += w * dj.max(0.0);
                        pj[1] += w * dj.min(0.0);
                        fplus += w * lambda * (di.max(0.0) - dj.min(0.0));
                        fminus += w * lambda * (di.min(0.0) - dj.max(0.0));
                    }
                    _ => {
                        if law.normal_speed(ui, f.quad_points[q], f.normal) < 0.0 {
                            // Dirichlet data does not depend on the slopes.
                            fplus += w * lambda * di.max(0.0);
                            fminus += w * lambda * di.min(0.0);
                        } else {
                            // The mirrored state moves with β_i on both sides.
                            fplus += w * lambda * di.abs();
                            fminus -= w * lambda * di.abs();
                        }
                    }
                }
            }
            let (alpha_plus, alpha_minus) = alphas(fplus, fminus, fct_flux_bounds(mesh, e, u_p0, bounds, dt));
            FcFaceData {
                own: pi,
                other: pj,
                active: [true, f.neighbor_cell().is_some()],
                alpha_plus,
                alpha_minus,
            }
        })
        .collect()
}

/// FC-N correction factors `β_i` for nonlinear laws.
pub fn slope_limit_fcn(
    law: &ConservationLaw,
    mesh: &Mesh,
    bc: &BoundaryData,
    field: &DGField,
    u_p0: &[f64],
    bounds: &CellBounds,
    dt: f64,
) -> Vec<f64> {
    gather_beta(mesh, &fcn_face_data(law, mesh, bc, field, u_p0, bounds, dt))
}
