//! Conservation laws and the benchmark catalog.

use std::f64::consts::PI;

use crate::mesh::{Bounds, StencilMode};

/// Affine velocity field `v(x) = A x + b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Velocity {
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl Velocity {
    pub fn constant(v: [f64; 2]) -> Self {
        Self {
            matrix: [[0.0; 2]; 2],
            offset: v,
        }
    }

    /// Rigid rotation with angular velocity `omega` about `center`.
    pub fn rotation(center: [f64; 2], omega: f64) -> Self {
        Self {
            matrix: [[0.0, -omega], [omega, 0.0]],
            offset: [omega * center[1], -omega * center[0]],
        }
    }

    #[inline]
    pub fn at(&self, x: [f64; 2]) -> [f64; 2] {
        let a = &self.matrix;
        [
            a[0][0] * x[0] + a[0][1] * x[1] + self.offset[0],
            a[1][0] * x[0] + a[1][1] * x[1] + self.offset[1],
        ]
    }

    pub fn divergence(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn is_constant(&self) -> bool {
        self.matrix.iter().flatten().all(|&a| a == 0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FluxFunction {
    /// `f(u) = v(x) u`.
    Advection(Velocity),
    /// `f(u) = (sin u, cos u)`.
    Kpp,
}

/// How `λ_ij(uL, uR)` is bounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WaveSpeedBound {
    /// Exact maximum of `|f'(u)·n|` over the state interval.
    Analytic,
    /// A fixed bound valid for all states.
    GlobalConstant(f64),
    /// Maximum over 16 equispaced states, inflated by 1.1.
    Sampled,
}

/// Convex entropy `η` with entropy flux `q`; `flux` is the law's flux so the
/// potential `ψ = η'(u) f(u) − q(u)` can be formed.
#[derive(Clone, Copy, Debug)]
pub struct EntropyPair {
    pub entropy: fn(f64) -> f64,
    pub variable: fn(f64) -> f64,
    pub second_derivative: fn(f64) -> f64,
    pub entropy_flux: fn(f64) -> [f64; 2],
    pub flux: fn(f64) -> [f64; 2],
}

impl EntropyPair {
    pub fn potential(&self, u: f64) -> [f64; 2] {
        let v = (self.variable)(u);
        let f = (self.flux)(u);
        let q = (self.entropy_flux)(u);
        [v * f[0] - q[0], v * f[1] - q[1]]
    }
}

/// Closed form of the KPP potential for the square entropy.
pub fn kpp_potential(u: f64) -> [f64; 2] {
    let (s, c) = u.sin_cos();
    [-c, s]
}

fn kpp_flux(u: f64) -> [f64; 2] {
    let (s, c) = u.sin_cos();
    [s, c]
}

fn kpp_entropy_flux(u: f64) -> [f64; 2] {
    let (s, c) = u.sin_cos();
    [u * s + c, u * c - s]
}

pub fn square_entropy_kpp() -> EntropyPair {
    EntropyPair {
        entropy: |u| 0.5 * u * u,
        variable: |u| u,
        second_derivative: |_| 1.0,
        entropy_flux: kpp_entropy_flux,
        flux: kpp_flux,
    }
}

#[derive(Clone, Debug)]
pub struct ConservationLaw {
    pub flux: FluxFunction,
    pub wave_speed: WaveSpeedBound,
    pub entropy: Option<EntropyPair>,
}

impl ConservationLaw {
    pub fn advection(v: Velocity) -> Self {
        Self {
            flux: FluxFunction::Advection(v),
            wave_speed: WaveSpeedBound::Analytic,
            entropy: None,
        }
    }

    /// KPP with the global wave-speed bound 1 and the square entropy.
    pub fn kpp() -> Self {
        Self {
            flux: FluxFunction::Kpp,
            wave_speed: WaveSpeedBound::GlobalConstant(1.0),
            entropy: Some(square_entropy_kpp()),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.flux, FluxFunction::Advection(_))
    }

    pub fn velocity(&self) -> Option<&Velocity> {
        match &self.flux {
            FluxFunction::Advection(v) => Some(v),
            FluxFunction::Kpp => None,
        }
    }

    #[inline]
    pub fn flux(&self, u: f64, x: [f64; 2]) -> [f64; 2] {
        match &self.flux {
            FluxFunction::Advection(v) => {
                let v = v.at(x);
                [v[0] * u, v[1] * u]
            }
            FluxFunction::Kpp => kpp_flux(u),
        }
    }

    #[inline]
    pub fn jacobian(&self, u: f64, x: [f64; 2]) -> [f64; 2] {
        match &self.flux {
            FluxFunction::Advection(v) => v.at(x),
            FluxFunction::Kpp => {
                let (s, c) = u.sin_cos();
                [c, -s]
            }
        }
    }

    #[inline]
    pub fn normal_flux(&self, u: f64, x: [f64; 2], n: [f64; 2]) -> f64 {
        let f = self.flux(u, x);
        f[0] * n[0] + f[1] * n[1]
    }

    #[inline]
    pub fn normal_speed(&self, u: f64, x: [f64; 2], n: [f64; 2]) -> f64 {
        let a = self.jacobian(u, x);
        a[0] * n[0] + a[1] * n[1]
    }

    /// Upper bound of `|f'(ω uR + (1−ω) uL)·n|` over `ω ∈ [0, 1]`.
    pub fn max_wave_speed(&self, ul: f64, ur: f64, n: [f64; 2], x: [f64; 2]) -> f64 {
        match (&self.flux, self.wave_speed) {
            (FluxFunction::Advection(v), _) => {
                let v = v.at(x);
                (v[0] * n[0] + v[1] * n[1]).abs()
            }
            (_, WaveSpeedBound::GlobalConstant(c)) => c,
            (FluxFunction::Kpp, WaveSpeedBound::Analytic) => kpp_interval_speed(ul, ur, n),
            (_, WaveSpeedBound::Sampled) => self.sampled_wave_speed(ul.min(ur), ul.max(ur), n, x),
        }
    }

    /// Sampled bound over the interval `[lo, hi]` with a 1.1 safety factor.
    pub fn sampled_wave_speed(&self, lo: f64, hi: f64, n: [f64; 2], x: [f64; 2]) -> f64 {
        let max = (0..16)
            .map(|k| {
                let w = k as f64 / 15.0;
                self.normal_speed(lo + w * (hi - lo), x, n).abs()
            })
            .fold(0.0, f64::max);
        1.1 * max
    }
}

/// `max |cos(u + θ)|` over the state interval, where `f'(u)·n = cos(u + θ)`.
fn kpp_interval_speed(ul: f64, ur: f64, n: [f64; 2]) -> f64 {
    let theta = n[1].atan2(n[0]);
    let (a, b) = (ul.min(ur) + theta, ul.max(ur) + theta);
    // |cos| peaks at multiples of π.
    if (b / PI).floor() >= (a / PI).ceil() {
        return 1.0;
    }
    a.cos().abs().max(b.cos().abs())
}

pub type ScalarField = fn(f64, f64) -> f64;

#[derive(Clone, Debug)]
pub struct TestCase {
    pub name: &'static str,
    pub bounds: Bounds,
    pub law: ConservationLaw,
    pub initial: ScalarField,
    /// Dirichlet data on inflow portions of the boundary (time independent).
    pub inflow: ScalarField,
    /// `None` for steady problems.
    pub final_time: Option<f64>,
    pub exact: Option<ScalarField>,
    pub dt: f64,
    pub stencil: StencilMode,
    /// Global range of the data, used by bound checks.
    pub range: (f64, f64),
}

impl TestCase {
    pub fn is_steady(&self) -> bool {
        self.final_time.is_none()
    }

    /// Cells in y for `nx` cells in x, keeping square cells.
    pub fn ny_for(&self, nx: usize) -> usize {
        ((nx as f64) * self.bounds.height() / self.bounds.width()).round() as usize
    }
}

fn zero(_: f64, _: f64) -> f64 {
    0.0
}

pub fn anisotropic_initial(x: f64, y: f64) -> f64 {
    let w = if (0.2..=0.4).contains(&x) { 2.0 } else { 1.0 };
    w * 4.0 * y * (1.0 - y)
}

pub fn solid_body_initial(x: f64, y: f64) -> f64 {
    let r_hump = ((x - 0.25).powi(2) + (y - 0.5).powi(2)).sqrt();
    let r_cone = ((x - 0.5).powi(2) + (y - 0.25).powi(2)).sqrt();
    let r_cyl = ((x - 0.5).powi(2) + (y - 0.75).powi(2)).sqrt();
    if r_hump <= 0.15 {
        0.25 + 0.25 * (PI * r_hump / 0.15).cos()
    } else if r_cone <= 0.15 {
        1.0 - r_cone / 0.15
    } else if r_cyl <= 0.15 && ((x - 0.5).abs() >= 0.025 || y >= 0.85) {
        1.0
    } else {
        0.0
    }
}

pub fn circular_exact(x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    if (0.15..=0.45).contains(&r) {
        1.0
    } else if (0.55..=0.85).contains(&r) {
        (10.0 * PI * (r - 0.7) / 3.0).cos().powi(2)
    } else {
        0.0
    }
}

pub fn circular_smooth_exact(x: f64, y: f64) -> f64 {
    let r = x.hypot(y);
    (-100.0 * (r - 0.7).powi(2)).exp()
}

pub fn kpp_initial(x: f64, y: f64) -> f64 {
    if x.hypot(y) <= 1.0 {
        14.0 * PI / 4.0
    } else {
        PI / 4.0
    }
}

fn kpp_inflow(_: f64, _: f64) -> f64 {
    PI / 4.0
}

pub fn anisotropic_advection() -> TestCase {
    TestCase {
        name: "anisotropic-advection",
        bounds: Bounds::unit_square(),
        law: ConservationLaw::advection(Velocity::constant([0.0, 1.0])),
        initial: anisotropic_initial,
        inflow: zero,
        final_time: Some(0.4),
        exact: None,
        dt: 1e-3,
        stencil: StencilMode::LayeredHorizontal,
        range: (0.0, 2.0),
    }
}

pub fn solid_body_rotation() -> TestCase {
    TestCase {
        name: "solid-body-rotation",
        bounds: Bounds::unit_square(),
        law: ConservationLaw::advection(Velocity::rotation([0.5, 0.5], 1.0)),
        initial: solid_body_initial,
        inflow: zero,
        final_time: Some(2.0 * PI),
        exact: Some(solid_body_initial),
        dt: 1e-3,
        stencil: StencilMode::Isotropic,
        range: (0.0, 1.0),
    }
}

fn circular_velocity() -> Velocity {
    // v = (y, -x)
    Velocity::rotation([0.0, 0.0], -1.0)
}

pub fn steady_circular() -> TestCase {
    TestCase {
        name: "steady-circular",
        bounds: Bounds::unit_square(),
        law: ConservationLaw::advection(circular_velocity()),
        initial: zero,
        inflow: circular_exact,
        final_time: None,
        exact: Some(circular_exact),
        dt: 1e-3,
        stencil: StencilMode::Isotropic,
        range: (0.0, 1.0),
    }
}

pub fn steady_circular_smooth() -> TestCase {
    TestCase {
        name: "steady-circular-smooth",
        exact: Some(circular_smooth_exact),
        inflow: circular_smooth_exact,
        ..steady_circular()
    }
}

pub fn kpp() -> TestCase {
    TestCase {
        name: "kpp",
        bounds: Bounds::new(-2.0, 2.0, -2.5, 1.5),
        law: ConservationLaw::kpp(),
        initial: kpp_initial,
        inflow: kpp_inflow,
        final_time: Some(1.0),
        exact: None,
        dt: 1e-3,
        stencil: StencilMode::Isotropic,
        range: (PI / 4.0, 14.0 * PI / 4.0),
    }
}

pub fn catalog() -> Vec<TestCase> {
    vec![
        anisotropic_advection(),
        solid_body_rotation(),
        steady_circular(),
        steady_circular_smooth(),
        kpp(),
    ]
}

/// Looks up a test case by its catalog name or a short alias.
pub fn by_name(name: &str) -> Option<TestCase> {
    let canonical = match name {
        "anis" | "anisotropic" => "anisotropic-advection",
        "sbr" | "rotation" => "solid-body-rotation",
        "circ" => "steady-circular",
        "circ-smooth" => "steady-circular-smooth",
        other => other,
    };
    catalog().into_iter().find(|t| t.name == canonical)
}
