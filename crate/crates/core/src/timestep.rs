//! Semi-discrete right-hand side, SSP-RK3 stepping and steady iteration.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::dgfield::{DGField, GAUSS2_POINT};
use crate::entropy::{self, EntropyFace};
use crate::fluxes::{self, BoundaryData, HighOrderFace, LowOrderFaces};
use crate::limiters::{
    self, apply_flux_limiter, local_bounds_cellavg, Cadence, CellBounds, DerivativeBounds, FluxLimiter,
    FluxLimiterInput, LimiterConfig, SlopeLimiter,
};
use crate::mesh::{Mesh, StencilTable};
use crate::problems::{ConservationLaw, TestCase};
use crate::{Error, Result};

/// Discrete space: DG-P1, or its piecewise-constant collapse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    P0,
    P1,
}

impl FromStr for Space {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p0" | "P0" => Ok(Self::P0),
            "p1" | "P1" => Ok(Self::P1),
            other => Err(Error::Config(format!("unknown space '{other}' (expected p0|p1)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub limiters: LimiterConfig,
    pub space: Space,
    /// Entropy correction; only active for laws with an entropy pair.
    pub entropy: bool,
}

impl SolverConfig {
    pub fn new(limiters: LimiterConfig) -> Self {
        Self {
            limiters,
            space: Space::P1,
            entropy: false,
        }
    }
}

/// Running statistics of a solve.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub steps: usize,
    pub rhs_evaluations: usize,
    pub final_time: f64,
    pub dt: f64,
    /// Stage-1 residuals of a steady iteration, one per step.
    pub residuals: Vec<f64>,
    pub converged: Option<bool>,
    /// Extremes of the cell averages over every stage of every step.
    pub min_avg: f64,
    pub max_avg: f64,
    /// Largest normalized violation of the face entropy condition.
    pub max_entropy_violation: f64,
    pub wall_time: f64,
}

impl RunReport {
    fn new(dt: f64) -> Self {
        Self {
            steps: 0,
            rhs_evaluations: 0,
            final_time: 0.0,
            dt,
            residuals: Vec::new(),
            converged: None,
            min_avg: f64::INFINITY,
            max_avg: f64::NEG_INFINITY,
            max_entropy_violation: f64::NEG_INFINITY,
            wall_time: 0.0,
        }
    }

    fn record(&mut self, field: &DGField) {
        let (lo, hi) = field.avg_range();
        self.min_avg = self.min_avg.min(lo);
        self.max_avg = self.max_avg.max(hi);
    }
}

/// Result of one forward-Euler stage.
pub struct StageOutput {
    pub field: DGField,
    /// `Σ |K_i| |U*_i0 − U_i0|`.
    pub residual: f64,
}

/// Face and cell data of one stage, kept for inspection.
#[derive(Default)]
pub struct StageWorkspace {
    pub low: LowOrderFaces,
    pub u_p0: Vec<f64>,
    pub bounds: Option<CellBounds>,
    pub high: Vec<HighOrderFace>,
    pub alpha: Vec<f64>,
    /// DC targets of DC-M.
    pub targets: Option<[Vec<f64>; 2]>,
    /// Taylor right-hand side per cell.
    pub rhs: Vec<[f64; 3]>,
    /// Entropy penalty rates.
    pub nu: Vec<f64>,
}

pub struct Solver<'a> {
    pub mesh: &'a Mesh,
    pub law: ConservationLaw,
    pub bc: BoundaryData,
    pub stencils: StencilTable,
    pub config: SolverConfig,
    pub report: RunReport,
    pub workspace: StageWorkspace,
    /// Fixed correction factors used instead of the flux limiter (tests).
    pub alpha_override: Option<f64>,
}

impl<'a> Solver<'a> {
    pub fn new(mesh: &'a Mesh, law: ConservationLaw, bc: BoundaryData, config: SolverConfig) -> Result<Self> {
        config.limiters.validate(&law)?;
        let stencils = StencilTable::new(mesh, config.limiters.stencil)?;
        Ok(Self {
            mesh,
            law,
            bc,
            stencils,
            config,
            report: RunReport::new(0.0),
            workspace: StageWorkspace::default(),
            alpha_override: None,
        })
    }

    pub fn for_case(mesh: &'a Mesh, case: &TestCase, config: SolverConfig) -> Result<Self> {
        let bc = BoundaryData::new(mesh, case.inflow);
        Self::new(mesh, case.law.clone(), bc, config)
    }

    pub fn with_stencils(mut self, stencils: StencilTable) -> Self {
        self.stencils = stencils;
        self
    }

    fn entropy_active(&self) -> bool {
        self.config.entropy && self.law.entropy.is_some()
    }

    /// Largest stable forward-Euler step for `field`, or `cap` if nothing moves.
    pub fn cfl_max_dt(&self, field: &DGField, cap: f64) -> f64 {
        cfl_max_dt(self.mesh, &self.law, &self.bc, field, cap)
    }

    /// One limited forward-Euler stage. The slope limiter acts on `u` in
    /// place; `first` marks the first stage of a time step.
    pub fn stage(&mut self, u: &mut DGField, dt: f64, first: bool) -> Result<StageOutput> {
        let mesh = self.mesh;
        let law = &self.law;
        let cfg = self.config.limiters;
        let p1 = self.config.space == Space::P1;
        self.report.rhs_evaluations += 1;

        if !p1 {
            u.dx.iter_mut().chain(u.dy.iter_mut()).for_each(|d| *d = 0.0);
        }

        let low = fluxes::low_order_faces(law, mesh, &self.bc, &u.avg);
        fluxes::check_cfl(mesh, &low.lambda, dt)?;

        let slope = if p1 { cfg.slope } else { SlopeLimiter::None };
        let need_bounds = cfg.flux != FluxLimiter::None || matches!(slope, SlopeLimiter::FcL | SlopeLimiter::FcN);
        let need_p0 = cfg.flux == FluxLimiter::Fct || matches!(slope, SlopeLimiter::FcL | SlopeLimiter::FcN);
        let bounds = need_bounds.then(|| local_bounds_cellavg(&u.avg, &self.stencils));
        let u_p0 = if need_p0 {
            fluxes::low_order_update_unchecked(mesh, &u.avg, &low, dt)
        } else {
            Vec::new()
        };

        let limit_now = cfg.cadence == Cadence::PerStage || first;
        let mut targets = None;
        match slope {
            SlopeLimiter::FcL if limit_now => {
                let beta = limiters::slope_limit_fcl(law, mesh, u, &u_p0, bounds.as_ref().unwrap(), dt);
                scale_slopes(u, &beta);
            }
            SlopeLimiter::FcN if limit_now => {
                let beta = limiters::slope_limit_fcn(law, mesh, &self.bc, u, &u_p0, bounds.as_ref().unwrap(), dt);
                scale_slopes(u, &beta);
            }
            SlopeLimiter::Sc if limit_now => {
                let beta = limiters::slope_limit_sc(mesh, u);
                scale_slopes(u, &beta);
            }
            SlopeLimiter::Dc if limit_now => {
                let [dx, dy] = self.dc_targets(u, &low);
                u.dx = dx;
                u.dy = dy;
            }
            SlopeLimiter::DcM => targets = Some(self.dc_targets(u, &low)),
            _ => {}
        }

        let high = if p1 {
            fluxes::high_order_faces(law, mesh, &self.bc, u)
        } else {
            low.flux
                .iter()
                .zip(&low.flux_qp)
                .map(|(&flux, &flux_qp)| HighOrderFace { flux, flux_qp })
                .collect()
        };

        let mut alpha = match self.alpha_override {
            Some(a) => vec![a; mesh.faces.len()],
            None => match bounds.as_ref() {
                Some(b) => apply_flux_limiter(
                    cfg.flux,
                    &FluxLimiterInput {
                        mesh,
                        low: &low,
                        high: &high,
                        avg: &u.avg,
                        bounds: b,
                        u_p0: need_p0.then_some(&u_p0[..]),
                        dt,
                    },
                ),
                None => vec![1.0; mesh.faces.len()],
            },
        };

        let entropy_faces = if self.entropy_active() {
            let pair = law.entropy.unwrap();
            let faces: Vec<EntropyFace> = (0..mesh.faces.len())
                .into_par_iter()
                .map(|e| EntropyFace::new(&pair, u.avg[mesh.faces[e].owner], low.outer[e], mesh.faces[e].normal))
                .collect();
            let mut worst = self.report.max_entropy_violation;
            for (e, face) in faces.iter().enumerate() {
                let cap = face.alpha_cap(low.flux[e], high[e].flux);
                alpha[e] = alpha[e].min(cap);
                let h = low.flux[e] + alpha[e] * (high[e].flux - low.flux[e]);
                worst = worst.max(face.residual(h) / face.scale(h));
            }
            self.report.max_entropy_violation = worst;
            Some(faces)
        } else {
            None
        };

        let (field, rhs, nu, residual) =
            self.cell_update(u, &low, &high, &alpha, targets.as_ref(), entropy_faces.as_deref(), dt);

        self.report.record(&field);
        self.workspace = StageWorkspace {
            low,
            u_p0,
            bounds,
            high,
            alpha,
            targets,
            rhs,
            nu,
        };
        Ok(StageOutput { field, residual })
    }

    fn dc_targets(&self, u: &DGField, low: &LowOrderFaces) -> [Vec<f64>; 2] {
        let recon = limiters::gradient_reconstruct(self.mesh, &u.avg, &low.outer);
        let bounds = DerivativeBounds::new(&recon, &self.stencils);
        limiters::slope_limit_dc(&u.dx, &u.dy, &bounds)
    }

    #[allow(clippy::too_many_arguments, clippy::type_complexity)]
    fn cell_update(
        &self,
        u: &DGField,
        low: &LowOrderFaces,
        high: &[HighOrderFace],
        alpha: &[f64],
        targets: Option<&[Vec<f64>; 2]>,
        entropy_faces: Option<&[EntropyFace]>,
        dt: f64,
    ) -> (DGField, Vec<[f64; 3]>, Vec<f64>, f64) {
        let mesh = self.mesh;
        let law = &self.law;
        let p1 = self.config.space == Space::P1;
        let gamma = self.config.limiters.gamma;
        let pair = law.entropy;

        let per_cell: Vec<([f64; 3], [f64; 3], f64)> = (0..mesh.num_cells())
            .into_par_iter()
            .map(|i| {
                let c = &mesh.cells[i];
                let m = mesh.taylor_mass(i);
                let mut rhs = [0.0; 3];
                let mut g_sum = 0.0;
                for &e in &c.faces {
                    let f = &mesh.faces[e];
                    let sign = mesh.face_sign(e, i);
                    let a = alpha[e];
                    let h_star = low.flux[e] + a * (high[e].flux - low.flux[e]);
                    rhs[0] -= sign * f.length * h_star;
                    if let Some(ef) = entropy_faces {
                        g_sum += sign * f.length * ef[e].flux(h_star);
                    }
                    if p1 {
                        let shift = if f.owner == i { [0.0; 2] } else { f.neighbor_shift };
                        for q in 0..2 {
                            let hq = low.flux_qp[e][q] + a * (high[e].flux_qp[q] - low.flux_qp[e][q]);
                            let x = f.quad_points[q];
                            let w = sign * f.quad_weights[q] * hq;
                            rhs[1] -= w * (x[0] + shift[0] - c.centroid[0]);
                            rhs[2] -= w * (x[1] + shift[1] - c.centroid[1]);
                        }
                    }
                }
                if p1 {
                    let (hx, hy) = (0.5 * mesh.hx * GAUSS2_POINT, 0.5 * mesh.hy * GAUSS2_POINT);
                    let w = 0.25 * c.area;
                    for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                        let x = [c.centroid[0] + sx * hx, c.centroid[1] + sy * hy];
                        let uq = u.avg[i] + u.dx[i] * sx * hx + u.dy[i] * sy * hy;
                        let fq = law.flux(uq, x);
                        rhs[1] += w * fq[0];
                        rhs[2] += w * fq[1];
                    }
                }
                let old = [u.avg[i], u.dx[i], u.dy[i]];
                let rate = [rhs[0] / m[0], rhs[1] / m[1], rhs[2] / m[2]];
                let mut new = [old[0] + dt * rate[0], old[1] + dt * rate[1], old[2] + dt * rate[2]];
                if !p1 {
                    new[1] = 0.0;
                    new[2] = 0.0;
                }
                if let Some(t) = targets {
                    new[1] = limiters::dc_monolithic_relax(new[1], t[0][i], gamma, dt);
                    new[2] = limiters::dc_monolithic_relax(new[2], t[1][i], gamma, dt);
                }
                let mut nu = 0.0;
                if let (Some(pair), Some(_)) = (pair, entropy_faces) {
                    if p1 {
                        let prod = entropy::entropy_production(&pair, old, rate, m);
                        let diss = entropy::slope_dissipation(&pair, old, m);
                        nu = entropy::slope_penalty_rate(prod, g_sum, diss);
                        let h = (pair.second_derivative)(old[0]);
                        new[1] = entropy::apply_entropy_penalty(new[1], nu, h, dt);
                        new[2] = entropy::apply_entropy_penalty(new[2], nu, h, dt);
                    }
                }
                (new, rhs, nu)
            })
            .collect();

        let n = mesh.num_cells();
        let mut field = DGField::zeros(n);
        let mut rhs = Vec::with_capacity(n);
        let mut nus = Vec::with_capacity(n);
        let mut residual = 0.0;
        for (i, (new, r, nu)) in per_cell.into_iter().enumerate() {
            field.avg[i] = new[0];
            field.dx[i] = new[1];
            field.dy[i] = new[2];
            residual += mesh.cells[i].area * (new[0] - u.avg[i]).abs();
            rhs.push(r);
            nus.push(nu);
        }
        (field, rhs, nus, residual)
    }

    /// Semi-discrete right-hand side of the current configuration, without
    /// modifying `u` (slope limiting is applied to a copy).
    pub fn semidiscrete_rhs(&mut self, u: &DGField, dt: f64) -> Result<Vec<[f64; 3]>> {
        let mut copy = u.clone();
        self.stage(&mut copy, dt, true)?;
        Ok(std::mem::take(&mut self.workspace.rhs))
    }

    /// One SSP-RK3 step; returns the stage-1 residual.
    pub fn ssprk3_step(&mut self, u: &mut DGField, dt: f64) -> Result<f64> {
        let s1 = self.stage(u, dt, true)?;
        let mut u1 = s1.field;
        let s2 = self.stage(&mut u1, dt, false)?;
        let mut u2 = s2.field;
        u2.combine(0.25, 0.75, u);
        self.report.record(&u2);
        let s3 = self.stage(&mut u2, dt, false)?;
        let mut next = s3.field;
        next.combine(2.0 / 3.0, 1.0 / 3.0, u);
        self.report.record(&next);
        *u = next;
        self.report.steps += 1;
        Ok(s1.residual)
    }

    /// Integrates to `t_final` with steps of `dt` (the last one shortened).
    pub fn run_transient(&mut self, u: &mut DGField, dt: f64, t_final: f64, mut progress: impl FnMut(&RunReport)) -> Result<()> {
        let start = Instant::now();
        self.report.dt = dt;
        self.report.record(u);
        let mut t = 0.0;
        while t < t_final * (1.0 - 1e-14) {
            let h = dt.min(t_final - t);
            self.ssprk3_step(u, h)?;
            t += h;
            self.report.final_time = t;
            progress(&self.report);
        }
        self.report.wall_time = start.elapsed().as_secs_f64();
        Ok(())
    }

    /// Pseudo-time iteration until the stage-1 residual drops below `tol`.
    /// Stalling at `max_steps` is reported through `converged = false`.
    pub fn steady_solve(
        &mut self,
        u: &mut DGField,
        dt: f64,
        tol: f64,
        max_steps: usize,
        mut progress: impl FnMut(&RunReport),
    ) -> Result<()> {
        let start = Instant::now();
        self.report.dt = dt;
        self.report.record(u);
        self.report.converged = Some(false);
        let mut initial = None;
        for step in 0..max_steps {
            let mut trial = u.clone();
            let r = self.ssprk3_step(&mut trial, dt)?;
            self.report.residuals.push(r);
            self.report.final_time += dt;
            let r0 = *initial.get_or_insert(r);
            if !r.is_finite() || (r0 > 0.0 && r > 1e6 * r0) {
                self.report.wall_time = start.elapsed().as_secs_f64();
                return Err(Error::Divergence {
                    step,
                    residual: r,
                    initial: r0,
                    history: self.report.residuals.clone(),
                });
            }
            *u = trial;
            progress(&self.report);
            if r < tol {
                self.report.converged = Some(true);
                break;
            }
        }
        self.report.wall_time = start.elapsed().as_secs_f64();
        Ok(())
    }
}

fn scale_slopes(u: &mut DGField, beta: &[f64]) {
    for (i, &b) in beta.iter().enumerate() {
        if b < 1.0 {
            u.dx[i] *= b;
            u.dy[i] *= b;
        }
    }
}

/// `1 / max_i (Σ |S_ij| λ_ij / |K_i|)` from the P0 wave speeds of `field`.
pub fn cfl_max_dt(mesh: &Mesh, law: &ConservationLaw, bc: &BoundaryData, field: &DGField, cap: f64) -> f64 {
    let low = fluxes::low_order_faces(law, mesh, bc, &field.avg);
    let (rate, _) = fluxes::cfl_rate(mesh, &low.lambda);
    if rate > 0.0 {
        (1.0 / rate).min(cap)
    } else {
        cap
    }
}
