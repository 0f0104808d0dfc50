//! Data-sheet linear battery model.
//!
//! State of charge integrates the cell power; degradation is a linear
//! penalty on energy throughput (`beta1`) plus a once-per-horizon penalty
//! on the peak power (`beta2`, charged by the optimiser, not per step).
//! Sign convention throughout: positive power discharges (sells), so
//! revenue `P * price` is positive when selling.

use crate::error::CellFault;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCellParams {
    /// Nominal energy capacity, Wh.
    pub nominal_energy_wh: f64,
    /// Capacity lost per Wh of energy throughput (dimensionless).
    /// The default consumes 20% capacity over 8000 full equivalent cycles:
    /// 0.2 * C_nom / (8000 * 2 * C_nom) = 1.25e-5.
    pub beta1: f64,
    /// Capacity lost per W of horizon peak power, Wh/W = h.
    pub beta2_h: f64,
    /// Power limit, W (applies to both charge and discharge).
    pub power_limit_w: f64,
    /// Usable SoC window.
    pub soc_min: f64,
    pub soc_max: f64,
}

impl LinearCellParams {
    /// 10 Wh cell, 1C power limit, full SoC window.
    pub fn default_pack() -> Self {
        Self {
            nominal_energy_wh: 10.0,
            beta1: 1.25e-5,
            beta2_h: 2.12e-4,
            power_limit_w: 10.0,
            soc_min: 0.0,
            soc_max: 1.0,
        }
    }

    /// Same cell restricted to the 10-90% SoC window used by the
    /// profit-maximising linear-model scenario.
    pub fn with_soc_window(mut self, soc_min: f64, soc_max: f64) -> Self {
        self.soc_min = soc_min;
        self.soc_max = soc_max;
        self
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.nominal_energy_wh > 0.0) {
            return Err("nominal_energy_wh must be positive");
        }
        if self.beta1 < 0.0 || self.beta2_h < 0.0 {
            return Err("beta1 and beta2 must be nonnegative");
        }
        if !(self.power_limit_w > 0.0) {
            return Err("power_limit_w must be positive");
        }
        if !(0.0 <= self.soc_min && self.soc_min < self.soc_max && self.soc_max <= 1.0) {
            return Err("require 0 <= soc_min < soc_max <= 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCellState {
    /// State of charge, fraction of nominal energy.
    pub soc: f64,
    /// Cumulative capacity lost, Wh (beta1 throughput term only; the
    /// beta2 horizon term is accounted by the optimiser/year scheduler).
    pub capacity_lost_wh: f64,
    /// Largest |power| seen since the peak tracker was last reset, W.
    pub peak_power_w: f64,
}

impl LinearCellState {
    pub fn at_soc(soc: f64) -> Self {
        Self {
            soc,
            capacity_lost_wh: 0.0,
            peak_power_w: 0.0,
        }
    }

    /// Resets the per-horizon peak tracker (new optimisation horizon).
    pub fn reset_peak(&mut self) {
        self.peak_power_w = 0.0;
    }
}

/// Tolerance on the SoC window check; keeps honest float dust from
/// faulting schedules produced by the LP.
pub const SOC_TOLERANCE: f64 = 1e-9;

/// Advances the linear model by one step of `dt_h` hours at constant
/// `power_w` (positive = discharge). Fails if the SoC would leave the
/// configured window by more than [`SOC_TOLERANCE`].
pub fn linear_step(
    state: LinearCellState,
    power_w: f64,
    dt_h: f64,
    params: &LinearCellParams,
) -> Result<LinearCellState, CellFault> {
    debug_assert!(dt_h > 0.0);
    let soc = state.soc - power_w * dt_h / params.nominal_energy_wh;
    if soc < params.soc_min - SOC_TOLERANCE || soc > params.soc_max + SOC_TOLERANCE {
        return Err(CellFault::SocWindow { soc });
    }
    let throughput_wh = crate::num::abs(power_w) * dt_h;
    Ok(LinearCellState {
        soc,
        capacity_lost_wh: state.capacity_lost_wh + params.beta1 * throughput_wh,
        peak_power_w: crate::num::fmax(state.peak_power_w, crate::num::abs(power_w)),
    })
}

/// Full-equivalent-cycle increment for the linear model: the energy-domain
/// analogue of the charge-domain definition, |P| dt / (2 C_nom).
pub fn linear_fec_increment(power_w: f64, dt_h: f64, params: &LinearCellParams) -> f64 {
    crate::num::abs(power_w) * dt_h / (2.0 * params.nominal_energy_wh)
}
