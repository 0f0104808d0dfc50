//! Lumped thermal model.
//!
//! Heat balance: `rho A tau C_p dT/dt = I^2 R_tot + I (eta_n - eta_p)
//! + I T dU/dT - h A (T - T_env)`. The ODE is linear in T over one step
//! (sources evaluated at the step start), so it is advanced with the
//! exact integrating-factor update rather than forward Euler; that keeps
//! any step size stable and lands the analytic cooling law exactly.

use crate::error::CellFault;
use crate::num;

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalParams {
    /// Cell density, kg/m^3.
    pub rho_kg_m3: f64,
    /// Specific heat, J/(kg K).
    pub c_p_j_kgk: f64,
    /// Convective film coefficient, W/(m^2 K).
    pub h_conv_w_m2k: f64,
    /// Ambient temperature, K.
    pub t_env_k: f64,
    /// Cell face area used for both thermal mass and convection, m^2.
    pub cell_area_m2: f64,
    /// Cell thickness, m.
    pub cell_thickness_m: f64,
}

impl ThermalParams {
    /// Heat capacity rho A tau C_p, J/K.
    pub fn heat_capacity_j_k(&self) -> f64 {
        self.rho_kg_m3 * self.cell_area_m2 * self.cell_thickness_m * self.c_p_j_kgk
    }

    /// Convective conductance h A, W/K.
    pub fn conductance_w_k(&self) -> f64 {
        self.h_conv_w_m2k * self.cell_area_m2
    }

    /// Cooling time constant rho A tau C_p / (h A), s.
    pub fn time_constant_s(&self) -> f64 {
        self.heat_capacity_j_k() / self.conductance_w_k()
    }
}

pub const TEMP_GUARD_LO_K: f64 = 250.0;
pub const TEMP_GUARD_HI_K: f64 = 350.0;

/// Advances the lumped temperature by `dt_s` under sources held constant
/// over the step: ohmic `I^2 R_tot`, reaction `I (eta_n - eta_p)` and
/// entropic `I T dU/dT` heat against convective cooling.
pub fn thermal_step(
    t_k: f64,
    current_a: f64,
    eta_n_v: f64,
    eta_p_v: f64,
    du_dt_v_k: f64,
    r_tot_ohm: f64,
    dt_s: f64,
    p: &ThermalParams,
) -> Result<f64, CellFault> {
    debug_assert!(dt_s > 0.0);
    let heat_w = current_a * current_a * r_tot_ohm
        + current_a * (eta_n_v - eta_p_v)
        + current_a * t_k * du_dt_v_k;
    let t_ss = p.t_env_k + heat_w / p.conductance_w_k();
    let t_next = t_ss + (t_k - t_ss) * num::exp(-dt_s / p.time_constant_s());
    if !(TEMP_GUARD_LO_K..=TEMP_GUARD_HI_K).contains(&t_next) {
        return Err(CellFault::ThermalGuard {
            temperature: t_next,
        });
    }
    Ok(t_next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ThermalParams {
        ThermalParams {
            rho_kg_m3: 2500.0,
            c_p_j_kgk: 800.0,
            h_conv_w_m2k: 10.0,
            t_env_k: 298.15,
            cell_area_m2: 0.11,
            cell_thickness_m: 0.006,
        }
    }

    #[test]
    fn ambient_rest_is_an_equilibrium() {
        let p = params();
        let t = thermal_step(p.t_env_k, 0.0, 0.0, 0.0, 0.0, 0.008, 60.0, &p).unwrap();
        assert_eq!(t, p.t_env_k);
    }

    #[test]
    fn zero_current_cools_exponentially() {
        let p = params();
        let tau = p.time_constant_s();
        let mut t = p.t_env_k + 10.0;
        // Integrate for exactly one time constant in many small steps.
        let steps = 1000;
        for _ in 0..steps {
            t = thermal_step(t, 0.0, 0.0, 0.0, 0.0, 0.008, tau / steps as f64, &p).unwrap();
        }
        let expect = p.t_env_k + 10.0 * (-1.0_f64).exp();
        assert!((t - expect).abs() < 1e-9, "{t} vs {expect}");
    }

    #[test]
    fn steady_state_rise_matches_heat_balance() {
        let p = params();
        let (i, eta_n, eta_p) = (2.7, 0.05, -0.01);
        let heat = i * i * 0.008 + i * (eta_n - eta_p);
        let expect = p.t_env_k + heat / p.conductance_w_k();
        let mut t = p.t_env_k;
        // 10 time constants at a coarse step; the exact update has no
        // stability limit.
        for _ in 0..100 {
            t = thermal_step(
                t,
                i,
                eta_n,
                eta_p,
                0.0,
                0.008,
                p.time_constant_s() / 10.0,
                &p,
            )
            .unwrap();
        }
        assert!(
            ((t - expect) / (expect - p.t_env_k)).abs() < 0.01,
            "steady state {t} vs {expect}"
        );
    }

    #[test]
    fn runaway_guard_trips() {
        let p = params();
        // An absurd sustained heat source must trip the guard.
        let mut t = p.t_env_k;
        let mut tripped = false;
        for _ in 0..10_000 {
            match thermal_step(t, 30.0, 0.5, -0.5, 0.0, 0.1, 60.0, &p) {
                Ok(next) => t = next,
                Err(CellFault::ThermalGuard { .. }) => {
                    tripped = true;
                    break;
                }
                Err(other) => panic!("unexpected fault {other:?}"),
            }
        }
        assert!(tripped);
    }
}
