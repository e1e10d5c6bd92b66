//! Local Lax-Friedrichs fluxes, bar states and the low-order update.
//!
//! Face quantities are always stored from the owner's point of view (normal
//! `n_ij` pointing out of the owner `i`). The neighbor sees the negated flux.

use rayon::prelude::*;

use crate::dgfield::DGField;
use crate::mesh::{FaceNeighbor, Mesh};
use crate::problems::ConservationLaw;
use crate::{Error, Result};

/// `n·(f(uR) + f(uL))/2 − λ (uR − uL)/2`.
#[inline]
pub fn llf_flux(law: &ConservationLaw, ul: f64, ur: f64, n: [f64; 2], x: [f64; 2], lambda: f64) -> f64 {
    0.5 * (law.normal_flux(ur, x, n) + law.normal_flux(ul, x, n)) - 0.5 * lambda * (ur - ul)
}

/// Dirichlet data sampled at the quadrature points of boundary faces.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    values: Vec<[f64; 2]>,
}

impl BoundaryData {
    pub fn new(mesh: &Mesh, g: impl Fn(f64, f64) -> f64) -> Self {
        let values = mesh
            .faces
            .iter()
            .map(|f| match f.neighbor {
                FaceNeighbor::Boundary(_) => f.quad_points.map(|x| g(x[0], x[1])),
                FaceNeighbor::Cell(_) => [f64::NAN; 2],
            })
            .collect();
        Self { values }
    }

    #[inline]
    pub fn at(&self, face: usize, q: usize) -> f64 {
        self.values[face][q]
    }
}

/// External trace on a boundary face: the Dirichlet value where the flow
/// enters (`f'(u)·n < 0`), the interior trace elsewhere.
#[inline]
pub fn external_state(law: &ConservationLaw, inside: f64, dirichlet: f64, x: [f64; 2], n: [f64; 2]) -> f64 {
    if law.normal_speed(inside, x, n) < 0.0 {
        dirichlet
    } else {
        inside
    }
}

/// P0 face data: LLF flux of the cell averages and the associated bar states.
#[derive(Clone, Debug, Default)]
pub struct LowOrderFaces {
    /// `λ_ij^P0`, face-averaged.
    pub lambda: Vec<f64>,
    /// `H_ij^P0`, face-averaged.
    pub flux: Vec<f64>,
    /// `H^P0` at the two quadrature points.
    pub flux_qp: Vec<[f64; 2]>,
    /// Neighbor average, or the face-averaged external state on the boundary.
    pub outer: Vec<f64>,
    /// `Ū_ij,0` seen from the owner.
    pub bar: Vec<f64>,
    /// `Ū_ji,0` seen from the neighbor.
    pub bar_mirror: Vec<f64>,
    /// Face average of `n_ij·f(U_i0)`; enters the bar-state form of the update.
    pub owner_normal_flux: Vec<f64>,
}

/// Single-face P0 quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowOrderFace {
    pub lambda: f64,
    pub flux: f64,
    pub flux_qp: [f64; 2],
    pub outer: f64,
    pub bar: f64,
    pub bar_mirror: f64,
    pub owner_normal_flux: f64,
}

/// `H_ij^P0 = H(U_i0, U_j0, n_ij)` with its wave speed and bar states.
///
/// For variable-velocity advection the flux is integrated with the face rule,
/// which makes the bar state the integrated upwind form.
pub fn face_flux_p0(law: &ConservationLaw, mesh: &Mesh, bc: &BoundaryData, avg: &[f64], face: usize) -> LowOrderFace {
    let f = &mesh.faces[face];
    let n = f.normal;
    let ui = avg[f.owner];
    let inv_len = 1.0 / f.length;
    let (mut lambda, mut flux, mut outer, mut nfi, mut nfj) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut flux_qp = [0.0; 2];
    // Space-independent flux between two cells: both points agree.
    let uniform = law.velocity().is_none() && !f.is_boundary();
    for q in 0..2 {
        let x = f.quad_points[q];
        let w = f.quad_weights[q] * inv_len;
        if uniform && q == 1 {
            flux_qp[1] = flux_qp[0];
            lambda *= 2.0;
            flux *= 2.0;
            outer *= 2.0;
            nfi *= 2.0;
            nfj *= 2.0;
            break;
        }
        let uj = match f.neighbor {
            FaceNeighbor::Cell(j) => avg[j],
            FaceNeighbor::Boundary(_) => external_state(law, ui, bc.at(face, q), x, n),
        };
        let l = law.max_wave_speed(ui, uj, n, x);
        let (fi, fj) = (law.normal_flux(ui, x, n), law.normal_flux(uj, x, n));
        let h = 0.5 * (fi + fj) - 0.5 * l * (uj - ui);
        flux_qp[q] = h;
        lambda += w * l;
        flux += w * h;
        outer += w * uj;
        nfi += w * fi;
        nfj += w * fj;
    }
    let (bar, bar_mirror) = if lambda > 0.0 {
        (ui - (flux - nfi) / lambda, outer + (flux - nfj) / lambda)
    } else {
        let mid = 0.5 * (ui + outer);
        (mid, mid)
    };
    LowOrderFace {
        lambda,
        flux,
        flux_qp,
        outer,
        bar,
        bar_mirror,
        owner_normal_flux: nfi,
    }
}

pub fn low_order_faces(law: &ConservationLaw, mesh: &Mesh, bc: &BoundaryData, avg: &[f64]) -> LowOrderFaces {
    let per_face: Vec<LowOrderFace> = (0..mesh.faces.len())
        .into_par_iter()
        .map(|f| face_flux_p0(law, mesh, bc, avg, f))
        .collect();
    let mut out = LowOrderFaces::default();
    out.lambda = per_face.iter().map(|f| f.lambda).collect();
    out.flux = per_face.iter().map(|f| f.flux).collect();
    out.flux_qp = per_face.iter().map(|f| f.flux_qp).collect();
    out.outer = per_face.iter().map(|f| f.outer).collect();
    out.bar = per_face.iter().map(|f| f.bar).collect();
    out.bar_mirror = per_face.iter().map(|f| f.bar_mirror).collect();
    out.owner_normal_flux = per_face.iter().map(|f| f.owner_normal_flux).collect();
    out
}

/// Face-averaged LLF flux of the slope-limited traces plus its values at the
/// two quadrature points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HighOrderFace {
    pub flux: f64,
    pub flux_qp: [f64; 2],
}

/// `(1/|S_ij|) ∫ H(u*_ih, u*_jh, n_ij) ds` with per-point wave speeds.
pub fn face_flux_p1(
    law: &ConservationLaw,
    mesh: &Mesh,
    bc: &BoundaryData,
    field: &DGField,
    face: usize,
    beta_owner: [f64; 2],
    beta_neighbor: [f64; 2],
) -> HighOrderFace {
    let f = &mesh.faces[face];
    let n = f.normal;
    let i = f.owner;
    let ci = mesh.cells[i].centroid;
    let mut flux_qp = [0.0; 2];
    for q in 0..2 {
        let x = f.quad_points[q];
        let ui = field.avg[i] + beta_owner[0] * field.dx[i] * (x[0] - ci[0]) + beta_owner[1] * field.dy[i] * (x[1] - ci[1]);
        let uj = match f.neighbor {
            FaceNeighbor::Cell(j) => {
                let cj = mesh.cells[j].centroid;
                let xs = [x[0] + f.neighbor_shift[0], x[1] + f.neighbor_shift[1]];
                field.avg[j] + beta_neighbor[0] * field.dx[j] * (xs[0] - cj[0]) + beta_neighbor[1] * field.dy[j] * (xs[1] - cj[1])
            }
            FaceNeighbor::Boundary(_) => external_state(law, ui, bc.at(face, q), x, n),
        };
        let l = law.max_wave_speed(ui, uj, n, x);
        flux_qp[q] = llf_flux(law, ui, uj, n, x, l);
    }
    let inv = 1.0 / f.length;
    HighOrderFace {
        flux: inv * (f.quad_weights[0] * flux_qp[0] + f.quad_weights[1] * flux_qp[1]),
        flux_qp,
    }
}

pub fn high_order_faces(law: &ConservationLaw, mesh: &Mesh, bc: &BoundaryData, field: &DGField) -> Vec<HighOrderFace> {
    (0..mesh.faces.len())
        .into_par_iter()
        .map(|f| face_flux_p1(law, mesh, bc, field, f, [1.0; 2], [1.0; 2]))
        .collect()
}

/// `F_ij = |S_ij| (H^P0_ij − H^P1_ij)`.
#[inline]
pub fn antidiffusive_flux(length: f64, low: f64, high: f64) -> f64 {
    length * (low - high)
}

/// Bar state of two constant states across a face with constant normal.
pub fn bar_state(law: &ConservationLaw, ui: f64, uj: f64, n: [f64; 2], x: [f64; 2], lambda: f64) -> f64 {
    if lambda > 0.0 {
        0.5 * (uj + ui) - (law.normal_flux(uj, x, n) - law.normal_flux(ui, x, n)) / (2.0 * lambda)
    } else {
        0.5 * (uj + ui)
    }
}

/// `max_i (Σ_j |S_ij| λ_ij) / |K_i|`, the inverse of the largest admissible
/// forward-Euler step; zero when nothing moves.
pub fn cfl_rate(mesh: &Mesh, lambda: &[f64]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for c in &mesh.cells {
        let s: f64 = c.faces.iter().map(|&f| mesh.faces[f].length * lambda[f]).sum::<f64>() / c.area;
        if s > worst.0 {
            worst = (s, c.index);
        }
    }
    worst
}

pub fn check_cfl(mesh: &Mesh, lambda: &[f64], dt: f64) -> Result<()> {
    let (rate, cell) = cfl_rate(mesh, lambda);
    if dt * rate > 1.0 + 1e-12 {
        return Err(Error::Cfl {
            dt,
            dt_max: 1.0 / rate,
            cell,
        });
    }
    Ok(())
}

/// Forward-Euler LLF-P0 update of the cell averages.
pub fn low_order_update(mesh: &Mesh, avg: &[f64], low: &LowOrderFaces, dt: f64) -> Result<Vec<f64>> {
    check_cfl(mesh, &low.lambda, dt)?;
    Ok(low_order_update_unchecked(mesh, avg, low, dt))
}

pub(crate) fn low_order_update_unchecked(mesh: &Mesh, avg: &[f64], low: &LowOrderFaces, dt: f64) -> Vec<f64> {
    (0..mesh.num_cells())
        .into_par_iter()
        .map(|i| {
            let c = &mesh.cells[i];
            let s: f64 = c
                .faces
                .iter()
                .map(|&f| mesh.face_sign(f, i) * mesh.faces[f].length * low.flux[f])
                .sum();
            avg[i] - dt / c.area * s
        })
        .collect()
}
