//! Acceptance criteria. Prints one PASS/FAIL line per check and exits with a
//! failure status if any check fails. Criteria can be selected by number:
//! `cargo test --test acceptance -- 1 3`.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use dglimit::analysis::{self, angle_distance, circle_jump_angles, total_variation};
use dglimit::cli::{solve, RunConfig, Solution};
use dglimit::dgfield::{vertex_values, DGField};
use dglimit::fluxes::{bar_state, BoundaryData};
use dglimit::limiters::{
    gradient_reconstruct, minmod, slope_limit_dc, slope_limit_sc, vertex_bounds, DerivativeBounds, FluxLimiter,
    LimiterConfig, SlopeLimiter,
};
use dglimit::mesh::{StencilMode, StencilTable};
use dglimit::problems::{self, ConservationLaw, TestCase, Velocity};
use dglimit::timestep::{Solver, SolverConfig, Space};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;

/// Steady solves stop here; SC is expected to stall.
const MAX_STEADY_STEPS: usize = 20_000;

struct Report {
    failures: usize,
    checks: usize,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
        println!("{} [{id}] {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn config(test: &str, nx: usize, flux: FluxLimiter, slope: SlopeLimiter) -> RunConfig {
    let case = problems::by_name(test).unwrap();
    let mut limiters = LimiterConfig::new(flux, slope);
    if matches!(slope, SlopeLimiter::Dc | SlopeLimiter::DcM) {
        limiters.stencil = case.stencil;
    }
    let mut cfg = RunConfig::new(case, nx, limiters);
    cfg.max_steps = MAX_STEADY_STEPS;
    cfg
}

fn run(cfg: &RunConfig) -> Solution {
    let start = Instant::now();
    let sol = solve(cfg).unwrap_or_else(|e| panic!("{} {}: {e}", cfg.test.name, cfg.limiters.label()));
    println!(
        "     ({} {} nx={} {} steps, {:.0}s)",
        cfg.test.name,
        cfg.limiters.label(),
        cfg.nx,
        sol.report.steps,
        start.elapsed().as_secs_f64()
    );
    sol
}

fn e2(sol: &Solution, case: &TestCase) -> f64 {
    analysis::e2_error(&sol.mesh, &sol.field, case.exact.unwrap()).e2
}

fn nodal_range(sol: &Solution) -> (f64, f64) {
    let nodal = analysis::project_bilinear(&sol.mesh, &sol.postprocessed());
    nodal
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b) / b
}

fn within(a: f64, b: f64, tol: f64) -> bool {
    rel(a, b).abs() <= tol
}

fn criterion_1(r: &mut Report) {
    let meshes = [32, 64, 128];
    let case = problems::steady_circular_smooth();
    let methods: [(&str, FluxLimiter, SlopeLimiter, [f64; 3], f64); 4] = [
        ("P1", FluxLimiter::None, SlopeLimiter::None, [7.17e-3, 1.68e-3, 4.09e-4], 0.25),
        ("FC-L", FluxLimiter::None, SlopeLimiter::FcL, [1.39e-2, 4.02e-3, 1.20e-3], 0.25),
        ("SC", FluxLimiter::None, SlopeLimiter::Sc, [3.28e-2, 1.04e-2, 3.00e-3], 0.30),
        // DC column compared with the FC reference values
        ("DC-M", FluxLimiter::Mcl, SlopeLimiter::DcM, [1.39e-2, 4.02e-3, 1.20e-3], 0.25),
    ];
    for (name, flux, slope, reference, tol) in methods {
        let errors: Vec<f64> = meshes
            .iter()
            .map(|&nx| e2(&run(&config("circ-smooth", nx, flux, slope)), &case))
            .collect();
        for k in 0..3 {
            r.check(
                &format!("1 smooth {name} h=1/{}", meshes[k]),
                within(errors[k], reference[k], tol),
                format!(
                    "E2 {:.3e} vs {:.3e} ({:+.1}%, tol ±{:.0}%)",
                    errors[k],
                    reference[k],
                    100.0 * rel(errors[k], reference[k]),
                    100.0 * tol
                ),
            );
        }
        let eocs: Vec<f64> = errors.windows(2).map(|w| analysis::eoc(w[0], w[1]).unwrap()).collect();
        match name {
            "P1" => r.check(
                "1 smooth P1 EOC",
                eocs.iter().all(|&e| e >= 1.95),
                format!("EOC {:.2}, {:.2} (need >= 1.95)", eocs[0], eocs[1]),
            ),
            "FC-L" => r.check(
                "1 smooth FC-L EOC",
                eocs.iter().all(|&e| (e - 1.75).abs() <= 0.15),
                format!("EOC {:.2}, {:.2} (need 1.75 ± 0.15)", eocs[0], eocs[1]),
            ),
            _ => println!("     {name} EOC {:.2}, {:.2}", eocs[0], eocs[1]),
        }
    }
}

fn criterion_2(r: &mut Report) {
    let case = problems::steady_circular();
    let methods = [
        ("FC-L", FluxLimiter::None, SlopeLimiter::FcL, 3.97e-2, true),
        ("SC", FluxLimiter::None, SlopeLimiter::Sc, 4.15e-2, false),
        ("DC-M", FluxLimiter::Mcl, SlopeLimiter::DcM, 3.96e-2, true),
    ];
    for (name, flux, slope, reference, must_converge) in methods {
        let sol = run(&config("circ", 128, flux, slope));
        let err = e2(&sol, &case);
        r.check(
            &format!("2 circular {name} E2"),
            within(err, reference, 0.15),
            format!("E2 {err:.3e} vs {reference:.3e} ({:+.1}%, tol ±15%)", 100.0 * rel(err, reference)),
        );
        let (lo, hi) = nodal_range(&sol);
        let rep = &sol.report;
        r.check(
            &format!("2 circular {name} bounds"),
            rep.min_avg >= -1e-12 && rep.max_avg <= 1.0 + 1e-12 && lo >= -1e-12 && hi <= 1.0 + 1e-12,
            format!("averages [{:.3e}, {:.12}], nodal [{lo:.3e}, {hi:.12}]", rep.min_avg, rep.max_avg),
        );
        let last = rep.residuals.last().copied().unwrap_or(f64::NAN);
        if must_converge {
            r.check(
                &format!("2 circular {name} residual"),
                rep.converged == Some(true),
                format!("residual {last:.2e} after {} steps (tol 1e-10)", rep.steps),
            );
        } else {
            println!(
                "     {name} residual {last:.2e} after {} steps; {}",
                rep.steps,
                if rep.converged == Some(true) { "converged" } else { "stalled above 1e-10 (reported, allowed)" }
            );
        }
    }
}

fn criterion_3(r: &mut Report) {
    let methods = [
        ("FC-L", FluxLimiter::None, SlopeLimiter::FcL, 0.9995, true),
        ("SC", FluxLimiter::None, SlopeLimiter::Sc, 0.9956, false),
        ("DC", FluxLimiter::Mcl, SlopeLimiter::Dc, 0.9998, true),
    ];
    for (name, flux, slope, reference, bounded) in methods {
        let mut cfg = config("sbr", 128, flux, slope);
        cfg.t_final = Some(2.0 * PI);
        let sol = run(&cfg);
        let rep = &sol.report;
        if bounded {
            r.check(
                &format!("3 rotation {name} stage bounds"),
                rep.min_avg >= -1e-12 && rep.max_avg <= 1.0 + 1e-12,
                format!("all stage averages in [{:.3e}, {:.12}]", rep.min_avg, rep.max_avg),
            );
        }
        let (lo, hi) = nodal_range(&sol);
        r.check(
            &format!("3 rotation {name} maximum"),
            (hi - reference).abs() <= 5e-3,
            format!("max {hi:.4} vs {reference} (tol ±5e-3)"),
        );
        r.check(&format!("3 rotation {name} minimum"), lo >= -1e-12, format!("min {lo:.3e}"));
    }
}

fn criterion_4(r: &mut Report) {
    let inflow_tv = 0.72;
    let methods = [
        ("DC", FluxLimiter::Mcl, SlopeLimiter::Dc),
        ("FC-L", FluxLimiter::None, SlopeLimiter::FcL),
        ("SC", FluxLimiter::None, SlopeLimiter::Sc),
    ];
    for (name, flux, slope) in methods {
        let sol = run(&config("anis", 128, flux, slope));
        let post = sol.postprocessed();
        let cut = analysis::line_cut(&sol.mesh, &post, 'y', 0.1, sol.mesh.nx).unwrap();
        let tv = total_variation(cut.iter().map(|c| c.1));
        let upper = analysis::line_cut(&sol.mesh, &post, 'y', 0.7, sol.mesh.nx).unwrap();
        let tv_upper = total_variation(upper.iter().map(|c| c.1));
        if name == "DC" {
            r.check(
                "4 anisotropic DC cut TV",
                tv <= 1.05 * inflow_tv,
                format!("TV(y=0.1) {tv:.4} <= {:.3}; TV(y=0.7) {tv_upper:.4} for reference", 1.05 * inflow_tv),
            );
        } else {
            println!("     {name} TV(y=0.1) {tv:.4}, TV(y=0.7) {tv_upper:.4}");
        }
        let rep = &sol.report;
        r.check(
            &format!("4 anisotropic {name} range"),
            rep.min_avg >= -1e-12 && rep.max_avg <= 2.0 + 1e-12,
            format!("averages in [{:.3e}, {:.12}]", rep.min_avg, rep.max_avg),
        );
    }
}

fn criterion_5(r: &mut Report) {
    let (lo, hi) = (PI / 4.0, 14.0 * PI / 4.0);
    let nx = 512;
    let angles = |sol: &Solution| {
        let post = sol.postprocessed();
        circle_jump_angles(&sol.mesh, &post, [0.0, 0.0], 1.5, 1440, 2, 30.0)
    };
    let mut reference = config("kpp", nx, FluxLimiter::None, SlopeLimiter::None);
    reference.space = Space::P0;
    let p0 = run(&reference);
    let ref_angles = angles(&p0);
    println!("     P0 shock angles {ref_angles:.1?}");
    let methods = [
        ("FC-N", FluxLimiter::None, SlopeLimiter::FcN),
        ("SC", FluxLimiter::Mcl, SlopeLimiter::Sc),
        ("DC", FluxLimiter::Mcl, SlopeLimiter::Dc),
    ];
    for (name, flux, slope) in methods {
        let cfg = config("kpp", nx, flux, slope);
        assert!(cfg.entropy);
        let sol = run(&cfg);
        let rep = &sol.report;
        r.check(
            &format!("5 kpp {name} bounds"),
            rep.min_avg >= lo - 1e-12 && rep.max_avg <= hi + 1e-12,
            format!("averages in [{:.12}, {:.12}]", rep.min_avg, rep.max_avg),
        );
        r.check(
            &format!("5 kpp {name} entropy"),
            rep.max_entropy_violation <= 1e-12,
            format!("largest scaled face violation {:.2e}", rep.max_entropy_violation),
        );
        let a = angles(&sol);
        let worst = a
            .iter()
            .map(|&x| ref_angles.iter().map(|&y| angle_distance(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        r.check(
            &format!("5 kpp {name} shock position"),
            a.len() == 2 && ref_angles.len() == 2 && worst < 10.0,
            format!("angles {a:.1?}, max deviation {worst:.1} deg (< 10)"),
        );
    }
}

fn free_stream_error() -> f64 {
    let mesh = periodic_mesh(6);
    let mut worst: f64 = 0.0;
    for law in [ConservationLaw::advection(Velocity::rotation([0.5, 0.5], 1.0)), ConservationLaw::kpp()] {
        for flux in [FluxLimiter::None, FluxLimiter::Fct, FluxLimiter::Mcl] {
            for slope in [
                SlopeLimiter::None,
                SlopeLimiter::FcL,
                SlopeLimiter::FcN,
                SlopeLimiter::Sc,
                SlopeLimiter::Dc,
                SlopeLimiter::DcM,
            ] {
                let cfg = LimiterConfig::new(flux, slope);
                if cfg.validate(&law).is_err() {
                    continue;
                }
                let mut sc = SolverConfig::new(cfg);
                sc.entropy = true;
                let bc = BoundaryData::new(&mesh, |_, _| 0.0);
                let mut solver = Solver::new(&mesh, law.clone(), bc, sc).unwrap();
                let mut u = DGField::constant(mesh.num_cells(), 1.3);
                for _ in 0..100 {
                    solver.ssprk3_step(&mut u, 0.02).unwrap();
                }
                for i in 0..u.len() {
                    worst = worst.max((u.avg[i] - 1.3).abs()).max(u.dx[i].abs()).max(u.dy[i].abs());
                }
            }
        }
    }
    worst
}

fn conservation_error(rng: &mut StdRng) -> f64 {
    let mesh = periodic_mesh(8);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let law = ConservationLaw::advection(random_velocity(rng));
        let mut u = random_field(rng, &mesh, 0.0, 1.0);
        let bc = BoundaryData::new(&mesh, |_, _| 0.0);
        let slope = if rng.gen_bool(0.5) { SlopeLimiter::FcL } else { SlopeLimiter::Sc };
        let mut solver = Solver::new(&mesh, law, bc, SolverConfig::new(LimiterConfig::new(FluxLimiter::None, slope))).unwrap();
        solver.alpha_override = Some(rng.gen_range(0.0..=1.0));
        let dt = 0.9 * solver.cfl_max_dt(&u, 1.0);
        let mass = |f: &DGField| f.avg.iter().zip(&mesh.cells).map(|(a, c)| a * c.area).sum::<f64>();
        let m0 = mass(&u);
        let out = solver.stage(&mut u, dt, true).unwrap();
        worst = worst.max((mass(&out.field) - m0).abs());
    }
    worst
}

/// Mean preservation and the SC and DC postconditions on random fields.
fn slope_postconditions(rng: &mut StdRng) -> (bool, f64, f64) {
    let mesh = periodic_mesh(8);
    let stencils = StencilTable::new(&mesh, StencilMode::Isotropic).unwrap();
    let (mut means_ok, mut sc_worst, mut dc_worst) = (true, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let u = random_field(rng, &mesh, -1.0, 1.0);
        let beta = slope_limit_sc(&mesh, &u);
        let mut lim = u.clone();
        for i in 0..lim.len() {
            lim.dx[i] *= beta[i];
            lim.dy[i] *= beta[i];
        }
        means_ok &= lim.avg == u.avg;
        let vb = vertex_bounds(&mesh, &lim.avg);
        for i in 0..lim.len() {
            for (p, v) in vertex_values(&lim, &mesh, i).iter().enumerate() {
                let (lo, hi) = vb.at(&mesh, i, p);
                sc_worst = sc_worst.max(v - hi).max(lo - v);
            }
        }
        let outer: Vec<f64> = mesh.faces.iter().map(|f| f.neighbor_cell().map_or(0.0, |j| u.avg[j])).collect();
        let recon = gradient_reconstruct(&mesh, &u.avg, &outer);
        let bounds = DerivativeBounds::new(&recon, &stencils);
        let [dx, dy] = slope_limit_dc(&u.dx, &u.dy, &bounds);
        for i in 0..u.len() {
            for (k, d) in [dx[i], dy[i]].into_iter().enumerate() {
                dc_worst = dc_worst.max(d - bounds.max[k][i].max(0.0)).max(bounds.min[k][i].min(0.0) - d);
            }
        }
        for law in [ConservationLaw::advection(random_velocity(rng)), ConservationLaw::kpp()] {
            for slope in [SlopeLimiter::FcL, SlopeLimiter::FcN, SlopeLimiter::Sc, SlopeLimiter::Dc] {
                let flux = if slope == SlopeLimiter::Dc { FluxLimiter::Mcl } else { FluxLimiter::None };
                let cfg = LimiterConfig::new(flux, slope);
                if cfg.validate(&law).is_err() {
                    continue;
                }
                let (lo, hi) = state_range(&law);
                let mut f = random_field(rng, &mesh, lo, hi);
                let before = f.avg.clone();
                let bc = BoundaryData::new(&mesh, |_, _| 0.0);
                let mut solver = Solver::new(&mesh, law.clone(), bc, SolverConfig::new(cfg)).unwrap();
                let dt = 0.5 * solver.cfl_max_dt(&f, 1.0);
                solver.stage(&mut f, dt, true).unwrap();
                means_ok &= f.avg == before;
            }
        }
    }
    (means_ok, sc_worst.max(0.0), dc_worst.max(0.0))
}

fn criterion_6(r: &mut Report) {
    let laws = [("advection", ConservationLaw::advection(Velocity::constant([0.8, -0.6]))), ("kpp", ConservationLaw::kpp())];
    for (lname, law) in &laws {
        for kind in [FluxLimiter::Fct, FluxLimiter::Mcl] {
            let worst = (0..DMP_SAMPLES).map(|s| flux_limiter_dmp(law, kind, s)).fold(0.0, f64::max);
            r.check(
                &format!("6 DMP {kind} {lname}"),
                worst <= 1e-12,
                format!("{DMP_SAMPLES} random 8x8 fields, largest excursion {worst:.2e}"),
            );
        }
    }
    let worst = (0..DMP_SAMPLES).map(fcl_dmp).fold(0.0, f64::max);
    r.check("6 DMP FC-L", worst <= 1e-12, format!("largest excursion {worst:.2e}"));
    let worst = [0.0, 0.5, 1.0]
        .iter()
        .flat_map(|&a| (0..DMP_SAMPLES).map(move |s| fcn_dmp(a, s)))
        .fold(0.0, f64::max);
    r.check("6 DMP FC-N any alpha", worst <= 1e-12, format!("largest excursion {worst:.2e}"));
    let worst = (0..100).map(|s| remark_1d_mismatch(s, 16)).fold(0.0, f64::max);
    r.check("6 FC-L equals flux limiting in 1D", worst <= 1e-14, format!("largest |beta - alpha| {worst:.2e}"));

    let mut rng = StdRng::seed_from_u64(2024);
    let mut bar_worst: f64 = 0.0;
    for k in 0..10_000 {
        let (ul, ur) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let t: f64 = rng.gen_range(0.0..2.0 * PI);
        let n = [t.cos(), t.sin()];
        let law = if k % 2 == 0 {
            ConservationLaw::kpp()
        } else {
            let s: f64 = rng.gen_range(0.0..2.0 * PI);
            ConservationLaw::advection(Velocity::constant([2.0 * s.cos(), 2.0 * s.sin()]))
        };
        let x = [0.1, 0.2];
        let lambda = law.max_wave_speed(ul, ur, n, x) * rng.gen_range(1.0..4.0);
        let b = bar_state(&law, ul, ur, n, x, lambda);
        bar_worst = bar_worst.max(ul.min(ur) - b).max(b - ul.max(ur));
    }
    r.check("6 bar states", bar_worst <= 1e-12, format!("10^4 samples, largest excursion {:.2e}", bar_worst.max(0.0)));

    let c = conservation_error(&mut rng);
    r.check("6 conservation", c <= 1e-12, format!("largest mass change {c:.2e}"));
    let f = free_stream_error();
    r.check("6 free stream", f <= 1e-13, format!("largest deviation after 100 steps {f:.2e}"));
    let (means, sc, dc) = slope_postconditions(&mut rng);
    r.check("6 mean preservation", means, "cell averages bitwise unchanged by every slope limiter".into());
    r.check("6 SC vertex bounds", sc <= 1e-12, format!("largest excursion {sc:.2e}"));
    r.check("6 DC derivative bounds", dc == 0.0, format!("largest excursion {dc:.2e}"));
    let table = minmod(1.0, 2.0) == 1.0 && minmod(-3.0, -2.0) == -2.0 && minmod(1.0, -1.0) == 0.0 && minmod(0.0, 4.0) == 0.0;
    r.check("6 minmod table", table, "minmod(1,2)=1, minmod(-3,-2)=-2, minmod(1,-1)=0, minmod(0,4)=0".into());

    let case = problems::steady_circular();
    let errs: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&g| {
            let mut cfg = config("circ", 64, FluxLimiter::Mcl, SlopeLimiter::DcM);
            cfg.limiters.gamma = g;
            e2(&run(&cfg), &case)
        })
        .collect();
    let spread = errs.iter().map(|&e| rel(e, errs[1]).abs()).fold(0.0, f64::max);
    r.check(
        "6 DC-M gamma sensitivity",
        spread < 0.02,
        format!("E2 {:.4e}, {:.4e}, {:.4e} for gamma 1e2, 1e3, 1e4; spread {:.2}%", errs[0], errs[1], errs[2], 100.0 * spread),
    );
}

fn main() {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: u32| selected.is_empty() || selected.contains(&k);
    let criteria: [(u32, fn(&mut Report)); 6] = [
        (6, criterion_6),
        (4, criterion_4),
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (5, criterion_5),
    ];
    let mut report = Report { failures: 0, checks: 0 };
    for (k, f) in criteria {
        if wanted(k) {
            let start = Instant::now();
            println!("== criterion {k}");
            f(&mut report);
            println!("   criterion {k} took {:.0}s", start.elapsed().as_secs_f64());
        }
    }
    println!("acceptance: {} checks, {} failed", report.checks, report.failures);
    if report.failures > 0 {
        std::process::exit(1);
    }
}
