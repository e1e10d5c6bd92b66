//! Randomized harnesses shared by the property and acceptance suites.
#![allow(dead_code)]

use std::f64::consts::PI;

use dglimit::dgfield::DGField;
use dglimit::fluxes::{self, BoundaryData};
use dglimit::limiters::{self, local_bounds_cellavg, FluxLimiter, LimiterConfig, SlopeLimiter};
use dglimit::mesh::{Bounds, Mesh, StencilMode, StencilTable};
use dglimit::problems::{ConservationLaw, Velocity};
use dglimit::timestep::{Solver, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const DMP_SAMPLES: u64 = 500;

pub fn periodic_mesh(n: usize) -> Mesh {
    Mesh::uniform(Bounds::unit_square(), n, n, [true, true]).unwrap()
}

/// Random averages in `[lo, hi]` with slopes of up to twice the cell range.
pub fn random_field(rng: &mut StdRng, mesh: &Mesh, lo: f64, hi: f64) -> DGField {
    let n = mesh.num_cells();
    let mut f = DGField::zeros(n);
    let span = hi - lo;
    for i in 0..n {
        f.avg[i] = rng.gen_range(lo..=hi);
        f.dx[i] = rng.gen_range(-2.0..=2.0) * span / mesh.hx;
        f.dy[i] = rng.gen_range(-2.0..=2.0) * span / mesh.hy;
    }
    f
}

/// Divergence-free velocity: constant direction or rigid rotation.
pub fn random_velocity(rng: &mut StdRng) -> Velocity {
    if rng.gen_bool(0.5) {
        let t = rng.gen_range(0.0..2.0 * PI);
        Velocity::constant([t.cos(), t.sin()])
    } else {
        Velocity::rotation([rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)], rng.gen_range(-2.0..2.0))
    }
}

pub fn state_range(law: &ConservationLaw) -> (f64, f64) {
    if law.is_linear() {
        (0.0, 1.0)
    } else {
        (PI / 4.0, 3.5 * PI)
    }
}

/// Largest excursion of the stage-1 cell averages outside the local bounds
/// of the input averages.
pub fn stage_dmp_violation(
    law: &ConservationLaw,
    cfg: LimiterConfig,
    alpha: Option<f64>,
    seed: u64,
) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mesh = periodic_mesh(8);
    let (lo, hi) = state_range(law);
    let mut u = random_field(&mut rng, &mesh, lo, hi);
    let bc = BoundaryData::new(&mesh, |_, _| 0.0);
    let mut solver = Solver::new(&mesh, law.clone(), bc, SolverConfig::new(cfg)).unwrap();
    solver.alpha_override = alpha;
    let dt = 0.9 * solver.cfl_max_dt(&u, f64::INFINITY);
    let bounds = local_bounds_cellavg(&u.avg, &solver.stencils);
    let out = solver.stage(&mut u, dt, true).unwrap();
    out.field
        .avg
        .iter()
        .enumerate()
        .map(|(i, &a)| (a - bounds.max[i]).max(bounds.min[i] - a).max(0.0))
        .fold(0.0, f64::max)
}

/// Theorem-1 harness: flux limiter on unlimited P1 targets.
pub fn flux_limiter_dmp(law: &ConservationLaw, kind: FluxLimiter, seed: u64) -> f64 {
    stage_dmp_violation(law, LimiterConfig::new(kind, SlopeLimiter::None), None, seed)
}

/// FC-L with the flux limiter off on a random divergence-free velocity.
pub fn fcl_dmp(seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
    let law = ConservationLaw::advection(random_velocity(&mut rng));
    stage_dmp_violation(&law, LimiterConfig::new(FluxLimiter::None, SlopeLimiter::FcL), None, seed)
}

/// FC-N for KPP with a fixed α in place of the flux limiter.
pub fn fcn_dmp(alpha: f64, seed: u64) -> f64 {
    let law = ConservationLaw::kpp();
    stage_dmp_violation(&law, LimiterConfig::new(FluxLimiter::None, SlopeLimiter::FcN), Some(alpha), seed)
}

/// Largest `|β_i − α_i|` between FC-L on an `n×1` strip with `v = (1, 0)`
/// and the flux limiter formula applied to the outflow face.
pub fn remark_1d_mismatch(seed: u64, n: usize) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let mesh = Mesh::uniform(Bounds::new(0.0, 1.0, 0.0, 1.0 / n as f64), n, 1, [true, false]).unwrap();
    let law = ConservationLaw::advection(Velocity::constant([1.0, 0.0]));
    let bc = BoundaryData::new(&mesh, |_, _| 0.0);
    let mut u = random_field(&mut rng, &mesh, 0.0, 1.0);
    u.dy.iter_mut().for_each(|d| *d = 0.0);
    let stencils = StencilTable::new(&mesh, StencilMode::Isotropic).unwrap();
    let bounds = local_bounds_cellavg(&u.avg, &stencils);
    let low = fluxes::low_order_faces(&law, &mesh, &bc, &u.avg);
    let dt = 0.9 / fluxes::cfl_rate(&mesh, &low.lambda).0;
    let u_p0 = fluxes::low_order_update(&mesh, &u.avg, &low, dt).unwrap();
    let beta = limiters::slope_limit_fcl(&law, &mesh, &u, &u_p0, &bounds, dt);
    let mut worst: f64 = 0.0;
    for i in 0..mesh.num_cells() {
        let c = &mesh.cells[i];
        let east = c.faces[1];
        let f = &mesh.faces[east];
        let trace = u.avg[i] + 0.5 * mesh.hx * u.dx[i];
        let flux = mesh.face_sign(east, i) * f.length * (u.avg[i] - trace);
        let (fmin, fmax) = limiters::fct_flux_bounds(&mesh, east, &u_p0, &bounds, dt);
        let alpha = limiters::alpha_from_bounds(flux, fmin, fmax);
        worst = worst.max((beta[i] - alpha).abs());
    }
    worst
}
