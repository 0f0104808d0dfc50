//! SEI layer growth: series kinetic / diffusion limitation.
//!
//! The side-reaction flux is a Tafel-style kinetic rate throttled by
//! solvent diffusion through the existing layer:
//!
//! `j_sei = j_kin / (1 + j_kin * delta / (D_sei(T) * c_sei))`,
//! `j_kin = (beta3 / F) * exp(-alpha_sei * F * eta / (R T))`
//!
//! with the limits: a fresh surface (delta -> 0) runs at the pure kinetic
//! rate, a thick layer (delta -> inf) at the pure diffusion-limited rate
//! `D_sei c_sei / delta`. The reaction consumes cyclable lithium at the
//! anode surface and deposits it as layer growth.
//!
//! The driving potential `eta` is the side reaction's own overpotential,
//! `eta_n + U_n(surface) - U_ref`: more negative while charging or
//! resting at high SoC (low anode potential), which is what makes rest at
//! high SoC age faster than rest at low SoC.

use crate::num;
use crate::spm::kinetics::arrhenius_scale;
use crate::{FARADAY, GAS_CONSTANT};

#[derive(Debug, Clone, PartialEq)]
pub struct SeiParams {
    /// Kinetic prefactor, A/m^2. Zero disables SEI growth entirely.
    pub beta3_a_m2: f64,
    /// Side-reaction transfer coefficient.
    pub alpha_sei: f64,
    /// Side-reaction reference potential vs Li, V.
    pub u_ref_v: f64,
    /// Solvent diffusivity through the layer at T_ref, m^2/s.
    pub d_ref_m2_s: f64,
    /// Activation energy of the solvent diffusivity, J/mol.
    pub e_act_d_j_mol: f64,
    /// Solvent concentration in the electrolyte, mol/m^3.
    pub solvent_mol_m3: f64,
    /// Molar volume of deposited SEI, m^3/mol.
    pub molar_volume_m3_mol: f64,
    /// Initial layer thickness on a fresh cell, m.
    pub delta0_m: f64,
    /// Nominal cell voltage used to convert lost lithium to lost energy, V.
    pub nominal_voltage_v: f64,
}

/// Side-reaction flux, mol/(m^2 s), nonnegative.
pub fn sei_flux(
    overpotential_v: f64,
    thickness_m: f64,
    t_k: f64,
    t_ref_k: f64,
    p: &SeiParams,
) -> f64 {
    debug_assert!(thickness_m >= 0.0);
    if p.beta3_a_m2 == 0.0 {
        return 0.0;
    }
    let j_kin = p.beta3_a_m2 / FARADAY
        * num::exp(-p.alpha_sei * FARADAY * overpotential_v / (GAS_CONSTANT * t_k));
    let d_sei = arrhenius_scale(p.d_ref_m2_s, p.e_act_d_j_mol, t_k, t_ref_k);
    j_kin / (1.0 + j_kin * thickness_m / (d_sei * p.solvent_mol_m3))
}

/// Energy capacity loss rate, W, for a given SEI flux over the whole
/// anode surface `surface_m2` (= a_n A_n tau_n):
/// `dC/dt = V_nom * j_sei * F * a_n A_n tau_n`.
pub fn capacity_loss_rate_w(j_sei: f64, surface_m2: f64, p: &SeiParams) -> f64 {
    p.nominal_voltage_v * j_sei * FARADAY * surface_m2
}
