//! Virtual battery tester.
//!
//! Executes power schedules against a cell model the way a laboratory
//! cycler would: commanded power is followed until a voltage limit is
//! hit, then the remainder of the step runs as a constant-voltage hold
//! (current solved by bisection on the one-step voltage map). The tester
//! logs rows on a fixed cadence, counts full equivalent cycles, runs
//! CC-CV capacity check-ups, and keeps the experiment ledger.

use alloc::vec::Vec;

use crate::error::{CellFault, HarnessError};
use crate::linear::{linear_fec_increment, linear_step, LinearCellParams, LinearCellState};
use crate::num;
use crate::objective::DispatchSchedule;
use crate::spm::{SpmCellState, SpmModel, StepReport};

#[derive(Debug, Clone, PartialEq)]
pub struct TesterLimits {
    pub v_min_v: f64,
    pub v_max_v: f64,
    /// CV cutoff current for check-ups, fraction of 1C.
    pub cv_cutoff_c: f64,
    /// Logging cadence, s.
    pub log_period_s: u64,
}

impl TesterLimits {
    /// Full-range limits: 2.7-4.2 V, 0.01C cutoff, 15-minute logging.
    pub fn full_range() -> Self {
        Self {
            v_min_v: 2.7,
            v_max_v: 4.2,
            cv_cutoff_c: 0.01,
            log_period_s: 900,
        }
    }

    /// The narrowed 10-90% SoC window: 3.42-4.08 V.
    pub fn reduced_window() -> Self {
        Self {
            v_min_v: 3.42,
            v_max_v: 4.08,
            ..Self::full_range()
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(2.0 <= self.v_min_v && self.v_min_v < self.v_max_v && self.v_max_v <= 4.5) {
            return Err("need 2.0 <= v_min < v_max <= 4.5");
        }
        if !(self.cv_cutoff_c > 0.0 && self.cv_cutoff_c < 1.0) {
            return Err("cv cutoff must be a fraction of 1C in (0, 1)");
        }
        if self.log_period_s == 0 {
            return Err("log period must be positive");
        }
        Ok(())
    }
}

/// Monthly capacity check-up: three full CC-CV cycles at 1C to a 0.01C
/// cutoff with 1 h rests, capacity = mean discharged energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckupProtocol {
    pub cycles: usize,
    pub rate_c: f64,
    pub cutoff_c: f64,
    pub rest_s: u64,
}

impl Default for CheckupProtocol {
    fn default() -> Self {
        Self {
            cycles: 3,
            rate_c: 1.0,
            cutoff_c: 0.01,
            rest_s: 3600,
        }
    }
}

/// One logged sample. `power_w` is the mean delivered power over the
/// logging period (positive = discharging); voltage and temperature are
/// sampled at the period end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t_s: u64,
    pub power_w: f64,
    pub voltage_v: f64,
    pub temperature_k: f64,
    pub fec_cum: f64,
    pub revenue_cum_eur: f64,
    /// Mean |I| over the period, A (not serialised; used for audits).
    pub mean_abs_current_a: f64,
    /// Model SoC estimate at the period end (not serialised).
    pub soc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckupRecord {
    pub t_s: u64,
    pub capacity_wh: f64,
    /// Cumulative FEC at the measurement.
    pub fec: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentLedger {
    pub rows: Vec<LedgerRow>,
    pub checkups: Vec<CheckupRecord>,
    pub fec: f64,
    pub revenue_eur: f64,
    /// Wall-clock end of the experiment so far, s. Check-ups extend wall
    /// time beyond market time, exactly as they interrupted the real
    /// schedule.
    pub end_t_s: u64,
}

impl ExperimentLedger {
    pub fn new() -> Self {
        Self::default()
    }
}

/// The cell under test.
#[derive(Debug, Clone)]
pub enum CellModel {
    Linear {
        params: LinearCellParams,
        state: LinearCellState,
    },
    Spm {
        model: SpmModel,
        state: SpmCellState,
    },
}

impl CellModel {
    pub fn linear(params: LinearCellParams, soc: f64) -> Self {
        CellModel::Linear {
            params,
            state: LinearCellState::at_soc(soc),
        }
    }

    pub fn spm(model: SpmModel, state: SpmCellState) -> Self {
        CellModel::Spm { model, state }
    }

    pub fn capacity_lost_wh(&self) -> f64 {
        match self {
            CellModel::Linear { state, .. } => state.capacity_lost_wh,
            CellModel::Spm { state, .. } => state.capacity_lost_wh,
        }
    }

    pub fn nominal_energy_wh(&self) -> f64 {
        match self {
            CellModel::Linear { params, .. } => params.nominal_energy_wh,
            CellModel::Spm { model, .. } => model.params().nominal_energy_wh,
        }
    }

    pub fn soc(&self) -> f64 {
        match self {
            CellModel::Linear { state, .. } => state.soc,
            CellModel::Spm { model, state } => model.soc_estimate(state),
        }
    }
}

/// Display-only voltage for the linear model (it has no electrochemistry):
/// affine over the full SoC range.
fn linear_display_voltage(soc: f64) -> f64 {
    2.7 + 1.5 * soc
}

const LINEAR_DISPLAY_TEMP_K: f64 = 298.15;
/// CV bisection stops when the voltage is this close to the limit, V.
const CV_TOL_V: f64 = 2.0e-4;

/// Log-row accumulator: folds substeps into rows on the logging cadence.
struct LogAccum {
    period_s: u64,
    row_start_s: u64,
    acc_t_s: f64,
    acc_power_ws: f64,
    acc_abs_current_as: f64,
}

impl LogAccum {
    fn new(start_s: u64, period_s: u64) -> Self {
        Self {
            period_s,
            row_start_s: start_s,
            acc_t_s: 0.0,
            acc_power_ws: 0.0,
            acc_abs_current_as: 0.0,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        ledger: &mut ExperimentLedger,
        dt_s: f64,
        power_w: f64,
        abs_current_a: f64,
        voltage_v: f64,
        temperature_k: f64,
        soc: f64,
    ) {
        self.acc_t_s += dt_s;
        self.acc_power_ws += power_w * dt_s;
        self.acc_abs_current_as += abs_current_a * dt_s;
        // Substeps never straddle a logging boundary (they divide it).
        if self.acc_t_s >= self.period_s as f64 - 1e-6 {
            self.row_start_s += self.period_s;
            ledger.rows.push(LedgerRow {
                t_s: self.row_start_s,
                power_w: self.acc_power_ws / self.acc_t_s,
                voltage_v,
                temperature_k,
                fec_cum: ledger.fec,
                revenue_cum_eur: ledger.revenue_eur,
                mean_abs_current_a: self.acc_abs_current_as / self.acc_t_s,
                soc,
            });
            self.acc_t_s = 0.0;
            self.acc_power_ws = 0.0;
            self.acc_abs_current_as = 0.0;
        }
    }
}

/// Result of one clamped SPM substep.
pub(crate) struct ClampedStep {
    pub(crate) state: SpmCellState,
    pub(crate) report: StepReport,
    pub(crate) current_a: f64,
}

/// True when the end-of-step voltage is admissible for the commanded
/// direction: discharging may only be cut by the lower limit, charging by
/// the upper one (a cell below the window being charged is catching up,
/// not violating anything).
fn directionally_ok(i_cmd: f64, voltage_v: f64, limits: &TesterLimits) -> bool {
    if i_cmd > 0.0 {
        voltage_v >= limits.v_min_v
    } else if i_cmd < 0.0 {
        voltage_v <= limits.v_max_v
    } else {
        true
    }
}

/// Applies `i_cmd` for `dt_s`; if the end-of-step voltage crosses the
/// limit in the direction of travel, bisects the current (same sign,
/// smaller magnitude) until the voltage pins at that limit - the CV hold.
/// When even zero current sits beyond the limit the tester delivers
/// nothing for this substep. The returned current magnitude never exceeds
/// the commanded one.
pub(crate) fn spm_substep_clamped(
    model: &SpmModel,
    state: &SpmCellState,
    i_cmd: f64,
    dt_s: f64,
    limits: &TesterLimits,
    t_s: u64,
) -> Result<ClampedStep, HarnessError> {
    match model.step(state, i_cmd, dt_s) {
        Ok((next, report)) if directionally_ok(i_cmd, report.voltage_v, limits) => {
            return Ok(ClampedStep {
                state: next,
                report,
                current_a: i_cmd,
            });
        }
        Ok(_) => {}
        // Saturation / hard voltage faults at the commanded current are
        // treated like a limit overshoot: a smaller current of the same
        // sign is still admissible.
        Err(CellFault::Saturation { .. }) | Err(CellFault::VoltageBound { .. }) => {}
        Err(fault) => return Err(HarnessError::Fault { fault, t_s }),
    }

    let target_v = if i_cmd < 0.0 {
        limits.v_max_v
    } else {
        limits.v_min_v
    };
    let rest = model
        .step(state, 0.0, dt_s)
        .map_err(|fault| HarnessError::Fault { fault, t_s })?;
    let mut best = ClampedStep {
        state: rest.0,
        report: rest.1,
        current_a: 0.0,
    };
    // Bisect on the current scale in [0, 1]: the one-step voltage map is
    // monotone in current at fixed state. If zero current already sits
    // beyond the limit the loop never finds an admissible scale and the
    // hold stays at zero.
    let mut lo_scale = 0.0;
    let mut hi_scale = 1.0;
    for _ in 0..64 {
        if num::abs(best.report.voltage_v - target_v) <= CV_TOL_V {
            break;
        }
        let mid = 0.5 * (lo_scale + hi_scale);
        let i_mid = mid * i_cmd;
        match model.step(state, i_mid, dt_s) {
            Ok((next, rep)) if directionally_ok(i_mid, rep.voltage_v, limits) => {
                lo_scale = mid;
                best = ClampedStep {
                    state: next,
                    report: rep,
                    current_a: i_mid,
                };
            }
            Ok(_) | Err(CellFault::Saturation { .. }) | Err(CellFault::VoltageBound { .. }) => {
                hi_scale = mid;
            }
            Err(fault) => return Err(HarnessError::Fault { fault, t_s }),
        }
    }
    Ok(best)
}

/// The virtual tester: voltage limits plus the simulation substep used to
/// integrate the cell between log points.
#[derive(Debug, Clone)]
pub struct VirtualTester {
    pub limits: TesterLimits,
    pub sim_dt_s: f64,
}

impl VirtualTester {
    pub fn new(limits: TesterLimits, sim_dt_s: f64) -> Self {
        debug_assert!(sim_dt_s > 0.0);
        Self { limits, sim_dt_s }
    }

    /// Substeps per hour; the substep divides both the hour and the
    /// logging period so rows never straddle a step.
    fn substep_s(&self, step_s: u64) -> f64 {
        let period = self.limits.log_period_s.min(step_s);
        let n = num::fmax(1.0, num::ceil(period as f64 / self.sim_dt_s));
        period as f64 / n
    }

    /// Executes the given power setpoints (one per `step_s`) against the
    /// cell with voltage clamping, logging into `ledger`. `step_prices`
    /// when present must align with `powers_w` and accrues revenue.
    /// On a fault the ledger keeps everything logged up to it.
    pub fn execute_clamped(
        &self,
        cell: &mut CellModel,
        powers_w: &[f64],
        start_s: u64,
        step_s: u64,
        step_prices: Option<&[f64]>,
        ledger: &mut ExperimentLedger,
    ) -> Result<(), HarnessError> {
        if let Some(prices) = step_prices {
            if prices.len() != powers_w.len() {
                return Err(HarnessError::Market {
                    source: crate::error::MarketError::OutOfRange { t_s: start_s },
                });
            }
        }
        let sub = self.substep_s(step_s);
        let mut accum = LogAccum::new(start_s, self.limits.log_period_s);
        let mut t = start_s as f64;
        for (idx, &p_cmd) in powers_w.iter().enumerate() {
            let price = step_prices.map_or(0.0, |p| p[idx]);
            let step_end = start_s as f64 + ((idx + 1) as u64 * step_s) as f64;
            while t < step_end - 1e-6 {
                let dt = num::fmin(sub, step_end - t);
                match cell {
                    CellModel::Linear { params, state } => {
                        // Power clamps against the SoC window budget:
                        // full power until the bound, zero after.
                        let budget_hi = (state.soc - params.soc_min) * params.nominal_energy_wh;
                        let budget_lo = (state.soc - params.soc_max) * params.nominal_energy_wh;
                        let dt_h = dt / 3600.0;
                        let p_eff = num::clamp(p_cmd, budget_lo / dt_h, budget_hi / dt_h);
                        let p_eff = num::clamp(p_eff, -params.power_limit_w, params.power_limit_w);
                        *state = linear_step(*state, p_eff, dt_h, params).map_err(|fault| {
                            HarnessError::Fault {
                                fault,
                                t_s: t as u64,
                            }
                        })?;
                        ledger.fec += linear_fec_increment(p_eff, dt_h, params);
                        ledger.revenue_eur += p_eff * price * dt_h * 1e-6;
                        accum.push(
                            ledger,
                            dt,
                            p_eff,
                            0.0,
                            linear_display_voltage(state.soc),
                            LINEAR_DISPLAY_TEMP_K,
                            state.soc,
                        );
                    }
                    CellModel::Spm { model, state } => {
                        let v_ref = model.ocv_at_soc(num::clamp(model.soc_estimate(state), 0.0, 1.0));
                        let i_cmd = power_to_current(p_cmd, v_ref, model.params().rated_current_a);
                        let stepped =
                            spm_substep_clamped(model, state, i_cmd, dt, &self.limits, t as u64)?;
                        let p_act = stepped.report.voltage_v * stepped.current_a;
                        ledger.fec += num::abs(stepped.current_a) * dt
                            / (2.0 * model.params().nominal_charge_ah * 3600.0);
                        ledger.revenue_eur += p_act * price * (dt / 3600.0) * 1e-6;
                        *state = stepped.state;
                        accum.push(
                            ledger,
                            dt,
                            p_act,
                            num::abs(stepped.current_a),
                            stepped.report.voltage_v,
                            state.temperature_k,
                            model.soc_estimate(state),
                        );
                    }
                }
                t += dt;
            }
        }
        ledger.end_t_s = t as u64;
        Ok(())
    }

    /// Runs the CC-CV check-up protocol and records the measured capacity
    /// (mean discharged energy of the protocol's cycles, Wh). The
    /// check-up always spans the cell's full voltage range, even when the
    /// experiment cycles in a narrowed window: it measures what the cell
    /// can still hold, not what the scenario uses. Check-up throughput
    /// counts towards FEC only when `count_fec` is set; the cell still
    /// ages either way.
    pub fn run_checkup(
        &self,
        cell: &mut CellModel,
        protocol: &CheckupProtocol,
        start_s: u64,
        ledger: &mut ExperimentLedger,
        count_fec: bool,
    ) -> Result<f64, HarnessError> {
        match cell {
            CellModel::Linear { params, state } => {
                // No kinetics: the remaining capacity is read directly.
                let capacity = params.nominal_energy_wh - state.capacity_lost_wh;
                ledger.checkups.push(CheckupRecord {
                    t_s: start_s,
                    capacity_wh: capacity,
                    fec: ledger.fec,
                });
                ledger.end_t_s = ledger.end_t_s.max(start_s);
                Ok(capacity)
            }
            CellModel::Spm { model, state } => {
                let i_1c = model.params().current_1c_a();
                let i_rate = protocol.rate_c * i_1c;
                let cutoff_a = protocol.cutoff_c * i_1c;
                // Full-range limits for the measurement itself.
                let limits = TesterLimits {
                    v_min_v: 2.7,
                    v_max_v: 4.2,
                    ..self.limits.clone()
                };
                let mut accum = LogAccum::new(start_s, limits.log_period_s);
                let mut t = start_s as f64;
                let dt = self.substep_s(limits.log_period_s);
                let mut energies_wh: Vec<f64> = Vec::with_capacity(protocol.cycles);

                let mut run_phase = |state: &mut SpmCellState,
                                     ledger: &mut ExperimentLedger,
                                     t: &mut f64,
                                     i_cmd: f64,
                                     stop_at_cutoff: bool,
                                     max_s: f64|
                 -> Result<f64, HarnessError> {
                    let mut energy_j = 0.0;
                    let phase_end = *t + max_s;
                    while *t < phase_end - 1e-6 {
                        let stepped =
                            spm_substep_clamped(model, state, i_cmd, dt, &limits, *t as u64)?;
                        let p_act = stepped.report.voltage_v * stepped.current_a;
                        if count_fec {
                            ledger.fec += num::abs(stepped.current_a) * dt
                                / (2.0 * model.params().nominal_charge_ah * 3600.0);
                        }
                        energy_j += p_act * dt;
                        *state = stepped.state;
                        accum.push(
                            ledger,
                            dt,
                            p_act,
                            num::abs(stepped.current_a),
                            stepped.report.voltage_v,
                            state.temperature_k,
                            model.soc_estimate(state),
                        );
                        *t += dt;
                        if stop_at_cutoff
                            && num::abs(stepped.current_a) <= cutoff_a
                            && num::abs(stepped.current_a) < num::abs(i_cmd)
                        {
                            break;
                        }
                    }
                    Ok(energy_j / 3600.0)
                };

                for _ in 0..protocol.cycles {
                    // CC-CV charge to v_max, cutoff at 0.01C.
                    run_phase(state, ledger, &mut t, -i_rate, true, 6.0 * 3600.0)?;
                    run_phase(state, ledger, &mut t, 0.0, false, protocol.rest_s as f64)?;
                    // CC-CV discharge to v_min; measure delivered energy.
                    let e = run_phase(state, ledger, &mut t, i_rate, true, 6.0 * 3600.0)?;
                    run_phase(state, ledger, &mut t, 0.0, false, protocol.rest_s as f64)?;
                    energies_wh.push(e);
                }
                let capacity = energies_wh.iter().sum::<f64>() / energies_wh.len() as f64;
                ledger.checkups.push(CheckupRecord {
                    t_s: t as u64,
                    capacity_wh: capacity,
                    fec: ledger.fec,
                });
                ledger.end_t_s = t as u64;
                Ok(capacity)
            }
        }
    }

    /// Full virtual experiment: clamped execution of the schedule with a
    /// check-up after every `checkup_every_s` of market time (and after
    /// the final partial chunk). Check-ups stretch wall time; market
    /// steps keep their own price alignment.
    pub fn run_experiment(
        &self,
        cell: &mut CellModel,
        schedule: &DispatchSchedule,
        prices: &crate::market::PriceSeries,
        checkup_every_s: u64,
        protocol: &CheckupProtocol,
        count_checkup_fec: bool,
    ) -> Result<ExperimentLedger, HarnessError> {
        let mut ledger = ExperimentLedger::new();
        ledger.end_t_s = schedule.start_s;
        let step_s = schedule.step_s;
        let steps_per_chunk = (checkup_every_s / step_s).max(1) as usize;
        let mut idx = 0usize;
        let mut wall_s = schedule.start_s;
        while idx < schedule.power_w.len() {
            let chunk = steps_per_chunk.min(schedule.power_w.len() - idx);
            let market_t = schedule.start_s + idx as u64 * step_s;
            let slice = &schedule.power_w[idx..idx + chunk];
            let price_slice = prices
                .hour_slice(market_t, chunk)
                .map_err(HarnessError::from)?;
            self.execute_clamped(cell, slice, wall_s, step_s, Some(price_slice), &mut ledger)?;
            wall_s += chunk as u64 * step_s;
            self.run_checkup(cell, protocol, wall_s, &mut ledger, count_checkup_fec)?;
            wall_s = ledger.end_t_s.max(wall_s);
            idx += chunk;
        }
        Ok(ledger)
    }
}

/// Converts a power command to a current command using the latest voltage
/// estimate, clamped to the rated current.
pub(crate) fn power_to_current(p_cmd: f64, v_ref: f64, rated_a: f64) -> f64 {
    if p_cmd == 0.0 {
        return 0.0;
    }
    let v = num::fmax(v_ref, 1.0);
    num::clamp(p_cmd / v, -rated_a, rated_a)
}
