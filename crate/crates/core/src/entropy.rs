//! Entropy stabilization: a cap on flux correction factors and an implicit
//! penalty on entropy-producing slopes.

use crate::problems::EntropyPair;

/// Largest `α ∈ [0, 1]` such that `H*(α) = H^P0 + α (H^t − H^P0)` satisfies
/// `(V_j0 − V_i0) H* ≤ n·(ψ_j − ψ_i)`.
///
/// `dv = V_j0 − V_i0`, `dpsi = n·(ψ(U_j0) − ψ(U_i0))`.
pub fn entropy_alpha_cap(dv: f64, dpsi: f64, h_low: f64, h_target: f64) -> f64 {
    let slope = dv * (h_target - h_low);
    if slope <= 0.0 {
        return 1.0;
    }
    ((dpsi - dv * h_low) / slope).clamp(0.0, 1.0)
}

/// `(V_j0 − V_i0) H − n·(ψ_j − ψ_i)`; nonpositive for entropy-stable fluxes.
#[inline]
pub fn entropy_condition_residual(dv: f64, dpsi: f64, h: f64) -> f64 {
    dv * h - dpsi
}

/// Face quantities of the entropy pair seen from the owner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyFace {
    pub v_i: f64,
    pub v_j: f64,
    /// `n·ψ(U_i0)` and `n·ψ(U_j0)`.
    pub psi_i: f64,
    pub psi_j: f64,
}

impl EntropyFace {
    pub fn new(pair: &EntropyPair, ui: f64, uj: f64, n: [f64; 2]) -> Self {
        let pi = pair.potential(ui);
        let pj = pair.potential(uj);
        Self {
            v_i: (pair.variable)(ui),
            v_j: (pair.variable)(uj),
            psi_i: pi[0] * n[0] + pi[1] * n[1],
            psi_j: pj[0] * n[0] + pj[1] * n[1],
        }
    }

    pub fn alpha_cap(&self, h_low: f64, h_target: f64) -> f64 {
        entropy_alpha_cap(self.v_j - self.v_i, self.psi_j - self.psi_i, h_low, h_target)
    }

    pub fn residual(&self, h: f64) -> f64 {
        entropy_condition_residual(self.v_j - self.v_i, self.psi_j - self.psi_i, h)
    }

    /// Scale for relative tolerances on [`Self::residual`].
    pub fn scale(&self, h: f64) -> f64 {
        ((self.v_j - self.v_i) * h).abs().max((self.psi_j - self.psi_i).abs()).max(1.0)
    }

    /// `G* = ((V_i + V_j)/2) H* − (ψ_i + ψ_j)·n / 2`.
    pub fn flux(&self, h: f64) -> f64 {
        entropy_face_flux(self.v_i, self.v_j, self.psi_i, self.psi_j, h)
    }
}

pub fn entropy_face_flux(v_i: f64, v_j: f64, psi_i: f64, psi_j: f64, h: f64) -> f64 {
    0.5 * (v_i + v_j) * h - 0.5 * (psi_i + psi_j)
}

/// `P_i = V_i0 (dU_i0/dt) M_0 + Σ_k η''(U_i0) U_ik (dU_ik/dt) M_k`.
pub fn entropy_production(pair: &EntropyPair, u: [f64; 3], rate: [f64; 3], mass: [f64; 3]) -> f64 {
    let v0 = (pair.variable)(u[0]);
    let h = (pair.second_derivative)(u[0]);
    v0 * rate[0] * mass[0] + h * (u[1] * rate[1] * mass[1] + u[2] * rate[2] * mass[2])
}

/// `∫ (v_ih − V_i0)² dx` with the linearized entropy variable.
pub fn slope_dissipation(pair: &EntropyPair, u: [f64; 3], mass: [f64; 3]) -> f64 {
    let h = (pair.second_derivative)(u[0]);
    h * h * (u[1] * u[1] * mass[1] + u[2] * u[2] * mass[2])
}

/// `ν_i = max{0, (P_i + Σ|S|G*) / D_i}`, zero when `D_i = 0`.
pub fn slope_penalty_rate(production: f64, flux_sum: f64, dissipation: f64) -> f64 {
    if dissipation <= 0.0 {
        return 0.0;
    }
    ((production + flux_sum) / dissipation).max(0.0)
}

/// Implicit relaxation of a derivative: `U / (1 + ν η'' Δt)`.
#[inline]
pub fn apply_entropy_penalty(derivative: f64, nu: f64, second_derivative: f64, dt: f64) -> f64 {
    derivative / (1.0 + nu * second_derivative * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluxes::llf_flux;
    use crate::problems::{square_entropy_kpp, ConservationLaw};

    #[test]
    fn cap_examples() {
        // Identical states.
        assert_eq!(entropy_alpha_cap(0.0, 0.0, 0.3, 5.0), 1.0);
        // Target already stable.
        assert_eq!(entropy_alpha_cap(1.0, 0.0, -1.0, -0.5), 1.0);
    }

    #[test]
    fn cap_matches_grid_scan() {
        // ΔV = 1, R = 0, H^P0 = −1, H^t = 1: only α ≤ 0.5 is admissible.
        let (dv, dpsi, h0, ht) = (1.0, 0.0, -1.0, 1.0);
        let a = entropy_alpha_cap(dv, dpsi, h0, ht);
        let scan = (0..=1000)
            .map(|k| k as f64 / 1000.0)
            .filter(|&a| dv * (h0 + a * (ht - h0)) <= dpsi)
            .fold(0.0, f64::max);
        assert_eq!(a, 0.5);
        assert!((a - scan).abs() < 1e-12);
    }

    #[test]
    fn low_order_flux_is_entropy_stable_for_kpp() {
        let law = ConservationLaw::kpp();
        let pair = square_entropy_kpp();
        for k in 0..200 {
            let ui = 0.07 * k as f64 - 3.0;
            let uj = 11.0 - 0.05 * k as f64;
            let t = 0.37 * k as f64;
            let n = [t.cos(), t.sin()];
            let h = llf_flux(&law, ui, uj, n, [0.0; 2], 1.0);
            let face = EntropyFace::new(&pair, ui, uj, n);
            assert!(face.residual(h) <= 1e-12 * face.scale(h));
            assert_eq!(face.alpha_cap(h, h + 1.0).max(0.0), face.alpha_cap(h, h + 1.0));
            let a = face.alpha_cap(h, h + 3.0);
            assert!(face.residual(h + a * 3.0) <= 1e-12 * face.scale(h));
        }
    }

    #[test]
    fn face_flux_consistency() {
        let pair = square_entropy_kpp();
        let law = ConservationLaw::kpp();
        for u in [0.0, 0.4, 2.0, -1.3] {
            for n in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
                let face = EntropyFace::new(&pair, u, u, n);
                let h = law.normal_flux(u, [0.0; 2], n);
                let q = (pair.entropy_flux)(u);
                assert!((face.flux(h) - (q[0] * n[0] + q[1] * n[1])).abs() < 1e-13);
            }
        }
        let face = EntropyFace::new(&pair, 0.0, 0.0, [0.0, 1.0]);
        assert_eq!(face.flux(law.normal_flux(0.0, [0.0; 2], [0.0, 1.0])), 0.0);
        // Antisymmetry.
        let a = EntropyFace::new(&pair, 0.3, 1.7, [1.0, 0.0]);
        let b = EntropyFace::new(&pair, 1.7, 0.3, [-1.0, 0.0]);
        assert!((a.flux(0.25) + b.flux(-0.25)).abs() < 1e-15);
    }

    #[test]
    fn production_examples() {
        let pair = square_entropy_kpp();
        let m = [0.5, 0.02, 0.03];
        assert_eq!(entropy_production(&pair, [1.0, 2.0, 3.0], [0.0; 3], m), 0.0);
        // P0 field: chain rule of η = u²/2 against a finite difference.
        let (u, r) = (1.3, -0.7);
        let dt = 1e-6;
        let fd = (0.5 * (u + dt * r) * (u + dt * r) - 0.5 * u * u) / dt * m[0];
        assert!((entropy_production(&pair, [u, 0.0, 0.0], [r, 0.0, 0.0], m) - fd).abs() < 1e-5);
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(slope_penalty_rate(-1.0, 0.5, 2.0), 0.0);
        assert_eq!(slope_penalty_rate(-1.0, 0.5, 0.0), 0.0);
        assert_eq!(slope_penalty_rate(1.5, 0.5, 4.0), 0.5);
        assert_eq!(apply_entropy_penalty(3.0, 0.0, 1.0, 0.1), 3.0);
        assert_eq!(apply_entropy_penalty(2.0, 10.0, 1.0, 0.1), 1.0);
        assert!(apply_entropy_penalty(2.0, 1e30, 1.0, 0.1).abs() < 1e-20);
    }
}
