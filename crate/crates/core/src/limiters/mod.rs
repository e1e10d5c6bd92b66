//! Local bounds, flux limiters (FCT, MCL) and slope limiters (FC-L, FC-N,
//! SC, DC, DC-M).

mod dc;
mod fc;
mod sc;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::fluxes::{HighOrderFace, LowOrderFaces};
use crate::mesh::{FaceNeighbor, Mesh, StencilMode, StencilTable};
use crate::problems::ConservationLaw;
use crate::{Error, Result};

pub use dc::{dc_monolithic_relax, gradient_reconstruct, minmod, slope_limit_dc, DerivativeBounds};
pub use fc::{slope_limit_fcl, slope_limit_fcn, FcFaceData};
pub use sc::{slope_limit_sc, vertex_bounds, VertexBounds};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FluxLimiter {
    None,
    Fct,
    Mcl,
}

impl FromStr for FluxLimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "fct" => Ok(Self::Fct),
            "mcl" => Ok(Self::Mcl),
            other => Err(Error::Config(format!(
                "unknown flux limiter '{other}' (expected none|fct|mcl)"
            ))),
        }
    }
}

impl fmt::Display for FluxLimiter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Fct => "fct",
            Self::Mcl => "mcl",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlopeLimiter {
    None,
    FcL,
    FcN,
    Sc,
    Dc,
    DcM,
}

impl FromStr for SlopeLimiter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "fc-l" => Ok(Self::FcL),
            "fc-n" => Ok(Self::FcN),
            "sc" => Ok(Self::Sc),
            "dc" => Ok(Self::Dc),
            "dc-m" => Ok(Self::DcM),
            other => Err(Error::Config(format!(
                "unknown slope limiter '{other}' (expected none|fc-l|fc-n|sc|dc|dc-m)"
            ))),
        }
    }
}

impl fmt::Display for SlopeLimiter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::FcL => "fc-l",
            Self::FcN => "fc-n",
            Self::Sc => "sc",
            Self::Dc => "dc",
            Self::DcM => "dc-m",
        })
    }
}

/// When the slope limiter runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cadence {
    PerStage,
    PerStep,
}

impl FromStr for Cadence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stage" | "per-stage" => Ok(Self::PerStage),
            "step" | "per-step" => Ok(Self::PerStep),
            other => Err(Error::Config(format!(
                "unknown limiting cadence '{other}' (expected stage|step)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimiterConfig {
    pub flux: FluxLimiter,
    pub slope: SlopeLimiter,
    pub stencil: StencilMode,
    /// Penalty rate of DC-M.
    pub gamma: f64,
    pub cadence: Cadence,
}

impl LimiterConfig {
    /// Plain DC runs once per step; everything else after each stage.
    pub fn new(flux: FluxLimiter, slope: SlopeLimiter) -> Self {
        Self {
            flux,
            slope,
            stencil: StencilMode::Isotropic,
            gamma: 1e3,
            cadence: if slope == SlopeLimiter::Dc {
                Cadence::PerStep
            } else {
                Cadence::PerStage
            },
        }
    }

    pub fn unlimited() -> Self {
        Self::new(FluxLimiter::None, SlopeLimiter::None)
    }

    pub fn with_stencil(mut self, stencil: StencilMode) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Short label used in output directory names, e.g. `dc-mcl`.
    pub fn label(&self) -> String {
        format!("{}-{}", self.slope, self.flux)
    }

    pub fn validate(&self, law: &ConservationLaw) -> Result<()> {
        match self.slope {
            SlopeLimiter::FcL if !law.is_linear() => Err(Error::Config(
                "fc-l needs a linear advection problem; use fc-n for nonlinear laws".into(),
            )),
            SlopeLimiter::FcN if law.is_linear() => Err(Error::Config(
                "fc-n is meant for nonlinear laws; use fc-l for linear advection".into(),
            )),
            SlopeLimiter::Dc | SlopeLimiter::DcM if self.flux == FluxLimiter::None => Err(Error::Config(format!(
                "{} constrains derivatives only; combine it with --flux mcl or --flux fct",
                self.slope
            ))),
            _ if !(self.gamma >= 0.0 && self.gamma.is_finite()) => {
                Err(Error::Config(format!("gamma must be a finite nonnegative number, got {}", self.gamma)))
            }
            _ => Ok(()),
        }
    }
}

/// Per-cell bounds `U_i0^min`, `U_i0^max` over `J_i0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn local_bounds_cellavg(avg: &[f64], stencils: &StencilTable) -> CellBounds {
    let (min, max) = (0..avg.len())
        .into_par_iter()
        .map(|i| {
            stencils
                .get(i, 0)
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| (lo.min(avg[j]), hi.max(avg[j])))
        })
        .unzip();
    CellBounds { min, max }
}

/// `|K_i| |S_ij| / (Δt |∂K_i|)`.
#[inline]
fn fct_scale(mesh: &Mesh, i: usize, length: f64, dt: f64) -> f64 {
    mesh.cells[i].area * length / (dt * mesh.perimeter(i))
}

/// Localized FCT bounding fluxes `(F^min, F^max)` of `face`, owner frame.
pub fn fct_flux_bounds(mesh: &Mesh, face: usize, u_p0: &[f64], bounds: &CellBounds, dt: f64) -> (f64, f64) {
    let f = &mesh.faces[face];
    let i = f.owner;
    let ci = fct_scale(mesh, i, f.length, dt);
    let up_i = ci * (bounds.max[i] - u_p0[i]);
    let dn_i = ci * (bounds.min[i] - u_p0[i]);
    match f.neighbor {
        FaceNeighbor::Cell(j) => {
            let cj = fct_scale(mesh, j, f.length, dt);
            let up_j = cj * (u_p0[j] - bounds.min[j]);
            let dn_j = cj * (u_p0[j] - bounds.max[j]);
            (dn_i.max(dn_j).min(0.0), up_i.min(up_j).max(0.0))
        }
        FaceNeighbor::Boundary(_) => (dn_i.min(0.0), up_i.max(0.0)),
    }
}

/// MCL bounding fluxes `(F^min, F^max)` of `face`, owner frame.
pub fn mcl_flux_bounds(mesh: &Mesh, face: usize, low: &LowOrderFaces, bounds: &CellBounds) -> (f64, f64) {
    let f = &mesh.faces[face];
    let i = f.owner;
    let s = low.lambda[face] * f.length;
    let bar = low.bar[face];
    let up_i = bounds.max[i] - bar;
    let dn_i = bounds.min[i] - bar;
    match f.neighbor {
        FaceNeighbor::Cell(j) => {
            let mirror = low.bar_mirror[face];
            let up_j = mirror - bounds.min[j];
            let dn_j = mirror - bounds.max[j];
            (s * dn_i.max(dn_j).min(0.0), s * up_i.min(up_j).max(0.0))
        }
        FaceNeighbor::Boundary(_) => (s * dn_i.min(0.0), s * up_i.max(0.0)),
    }
}

/// Zalesak-type correction factor; `F = 0` gives 1.
pub fn alpha_from_bounds(f: f64, fmin: f64, fmax: f64) -> f64 {
    alpha_with_tolerance(f, fmin, fmax, 0.0)
}

/// As [`alpha_from_bounds`], treating `|F| ≤ tol` as zero.
#[inline]
pub fn alpha_with_tolerance(f: f64, fmin: f64, fmax: f64, tol: f64) -> f64 {
    if f.abs() <= tol {
        1.0
    } else if f > 0.0 {
        (fmax / f).min(1.0).max(0.0)
    } else {
        (fmin / f).min(1.0).max(0.0)
    }
}

/// Scale below which an antidiffusive flux counts as zero.
#[inline]
pub(crate) fn flux_noise(lambda: f64, length: f64, ui: f64, uj: f64) -> f64 {
    1e-14 * lambda.max(1e-300) * length * 1f64.max(ui.abs()).max(uj.abs())
}

/// Inputs of a flux-limiting pass.
pub struct FluxLimiterInput<'a> {
    pub mesh: &'a Mesh,
    pub low: &'a LowOrderFaces,
    pub high: &'a [HighOrderFace],
    pub avg: &'a [f64],
    pub bounds: &'a CellBounds,
    /// Low-order update, required by FCT.
    pub u_p0: Option<&'a [f64]>,
    pub dt: f64,
}

/// Per-face correction factors `α_ij` of the selected flux limiter.
pub fn apply_flux_limiter(kind: FluxLimiter, input: &FluxLimiterInput) -> Vec<f64> {
    let mesh = input.mesh;
    (0..mesh.faces.len())
        .into_par_iter()
        .map(|e| {
            let f = &mesh.faces[e];
            let flux = crate::fluxes::antidiffusive_flux(f.length, input.low.flux[e], input.high[e].flux);
            let (fmin, fmax) = match kind {
                FluxLimiter::None => return 1.0,
                FluxLimiter::Fct => fct_flux_bounds(
                    mesh,
                    e,
                    input.u_p0.expect("FCT needs the low-order update"),
                    input.bounds,
                    input.dt,
                ),
                FluxLimiter::Mcl => mcl_flux_bounds(mesh, e, input.low, input.bounds),
            };
            let tol = flux_noise(input.low.lambda[e], f.length, input.avg[f.owner], input.low.outer[e]);
            alpha_with_tolerance(flux, fmin, fmax, tol)
        })
        .collect()
}
