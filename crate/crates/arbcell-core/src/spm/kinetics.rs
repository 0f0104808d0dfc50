//! Reaction kinetics: Arrhenius temperature scaling, exchange current
//! density, and the Butler-Volmer overpotential.

use crate::num;
use crate::{FARADAY, GAS_CONSTANT};

/// Arrhenius scaling of a rate or diffusion constant from its reference
/// temperature. Implemented so that positive activation energy makes the
/// value increase with temperature:
///
/// `value = ref * exp((E/R) * (1/T_ref - 1/T))`
pub fn arrhenius_scale(ref_value: f64, activation_energy_j_mol: f64, t_k: f64, t_ref_k: f64) -> f64 {
    debug_assert!(t_k > 0.0 && t_ref_k > 0.0);
    ref_value * num::exp(activation_energy_j_mol / GAS_CONSTANT * (1.0 / t_ref_k - 1.0 / t_k))
}

/// Exchange current density, A/m^2 (single-electron reaction):
///
/// `j0 = F * k * c_s^alpha * c_e^(1-alpha) * (c_max - c_s)^(1-alpha)`
///
/// Returns 0 when the surface stoichiometry sits at either edge; the cell
/// step treats that as a kinetics stall.
pub fn exchange_current_density(
    surface_conc: f64,
    c_max: f64,
    c_electrolyte: f64,
    alpha: f64,
    k_rate: f64,
) -> f64 {
    if surface_conc <= 0.0 || surface_conc >= c_max {
        return 0.0;
    }
    FARADAY
        * k_rate
        * num::powf(surface_conc, alpha)
        * num::powf(c_electrolyte, 1.0 - alpha)
        * num::powf(c_max - surface_conc, 1.0 - alpha)
}

/// Overpotential solving the symmetric (alpha = 0.5) Butler-Volmer
/// equation for a given reaction rate:
///
/// `j = j0 * (exp(-F eta / 2RT) - exp(F eta / 2RT))  =>
///  eta = -(2RT/F) asinh(j / (2 j0))`
///
/// `j` and `j0` must share units (both flux or both current density).
pub fn butler_volmer_overpotential(j: f64, j0: f64, t_k: f64) -> f64 {
    debug_assert!(j0 > 0.0);
    -(2.0 * GAS_CONSTANT * t_k / FARADAY) * num::asinh(j / (2.0 * j0))
}

/// Forward Butler-Volmer map (general alpha): reaction rate at a given
/// overpotential. Used by tests as the root-finding oracle for the closed
/// form above.
pub fn butler_volmer_rate(eta: f64, j0: f64, alpha: f64, t_k: f64) -> f64 {
    let f_rt = FARADAY / (GAS_CONSTANT * t_k);
    j0 * (num::exp(-alpha * f_rt * eta) - num::exp((1.0 - alpha) * f_rt * eta))
}
