//! Economic post-processing: lifetime extrapolation, profit accounting,
//! model-vs-measurement errors, usage histograms and the heuristic
//! calendar/cycle degradation estimator.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use core::fmt;

use crate::harness::{ExperimentLedger, LedgerRow};
use crate::num;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportError {
    /// Lifetime extrapolation needs a strictly positive annual loss.
    NonPositiveLoss,
    /// Relative error against a zero measurement is undefined.
    ZeroMeasurement,
    /// The ledger lacks the data the report needs (e.g. no check-ups).
    MissingData(&'static str),
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReportError::NonPositiveLoss => {
                write!(f, "annual capacity loss must be positive to extrapolate")
            }
            ReportError::ZeroMeasurement => write!(f, "measured value is zero"),
            ReportError::MissingData(what) => write!(f, "ledger is missing {what}"),
        }
    }
}

/// Years until 20% of capacity is gone, extrapolating linearly.
pub fn lifetime_extrapolate(annual_loss_pct: f64) -> Result<f64, ReportError> {
    if !(annual_loss_pct > 0.0) {
        return Err(ReportError::NonPositiveLoss);
    }
    Ok(20.0 / annual_loss_pct)
}

/// Lifetime revenue normalised by cell size: € per kWh of nominal energy.
pub fn lifetime_revenue(annual_revenue_eur: f64, lifetime_years: f64, nominal_energy_wh: f64) -> f64 {
    annual_revenue_eur * lifetime_years / (nominal_energy_wh / 1000.0)
}

/// Revenue minus the degradation bill at a fixed capacity price.
pub fn net_profit(revenue_eur: f64, capacity_lost_wh: f64, degradation_price_eur_kwh: f64) -> f64 {
    revenue_eur - capacity_lost_wh / 1000.0 * degradation_price_eur_kwh
}

/// Relative error of a simulation against a measurement, %.
pub fn comparison_error(simulated: f64, measured: f64) -> Result<f64, ReportError> {
    if measured == 0.0 {
        return Err(ReportError::ZeroMeasurement);
    }
    Ok(num::abs(simulated - measured) / num::abs(measured) * 100.0)
}

/// Time-fraction histogram over (voltage, power) bins, split into a
/// resting layer (zero power) and a cycling layer. Rows are equal-length
/// logging periods, so fractions are row counts over the total.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2d {
    pub v_bin_v: f64,
    pub p_bin_w: f64,
    /// (resting, v bin index, p bin index) -> fraction of total time.
    pub cells: BTreeMap<(bool, i64, i64), f64>,
}

impl Histogram2d {
    pub fn resting_fraction(&self) -> f64 {
        self.cells
            .iter()
            .filter(|((resting, _, _), _)| *resting)
            .map(|(_, f)| f)
            .sum()
    }

    pub fn cycling_fraction(&self) -> f64 {
        self.cells
            .iter()
            .filter(|((resting, _, _), _)| !*resting)
            .map(|(_, f)| f)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.cells.values().sum()
    }

    /// Lower edges of a cell's bins.
    pub fn bin_edges(&self, v_idx: i64, p_idx: i64) -> (f64, f64) {
        (v_idx as f64 * self.v_bin_v, p_idx as f64 * self.p_bin_w)
    }
}

/// Powers this close to zero count as resting (the tester logs exact
/// zeros at rest; anything else is cycling).
const REST_POWER_EPS_W: f64 = 1e-9;

pub fn histogram_2d(rows: &[LedgerRow], v_bin_v: f64, p_bin_w: f64) -> Histogram2d {
    let mut cells = BTreeMap::new();
    if rows.is_empty() {
        return Histogram2d {
            v_bin_v,
            p_bin_w,
            cells,
        };
    }
    let weight = 1.0 / rows.len() as f64;
    for row in rows {
        let resting = num::abs(row.power_w) < REST_POWER_EPS_W;
        let v_idx = num::floor(row.voltage_v / v_bin_v) as i64;
        let p_idx = num::floor(row.power_w / p_bin_w) as i64;
        *cells.entry((resting, v_idx, p_idx)).or_insert(0.0) += weight;
    }
    Histogram2d {
        v_bin_v,
        p_bin_w,
        cells,
    }
}

/// A point of a usage profile for the heuristic degradation estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t_s: u64,
    pub resting: bool,
    /// SoC during the sample (only read while resting).
    pub soc: f64,
    /// Cumulative FEC at the sample.
    pub fec: f64,
}

/// Static-rate degradation estimate over a profile:
/// `calendar_rate * (SoC-weighted rest hours) + cycle_rate * FEC(t)`,
/// with the calendar weighting linear in SoC. Returns the cumulative
/// estimate (%) at each sample time.
pub fn heuristic_degradation_estimate(
    samples: &[ProfileSample],
    calendar_pct_per_h: f64,
    cycle_pct_per_fec: f64,
) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(samples.len());
    let mut calendar = 0.0;
    let mut prev_t = samples.first().map(|s| s.t_s).unwrap_or(0);
    for s in samples {
        let dt_h = (s.t_s - prev_t) as f64 / 3600.0;
        prev_t = s.t_s;
        if s.resting {
            calendar += calendar_pct_per_h * num::clamp(s.soc, 0.0, 1.0) * dt_h;
        }
        out.push((s.t_s, calendar + cycle_pct_per_fec * s.fec));
    }
    out
}

/// Summary metrics for one scenario's virtual experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario: String,
    pub revenue_eur: f64,
    pub capacity_lost_pct: f64,
    pub fec: f64,
    pub net_profit_eur: f64,
    pub lifetime_years: f64,
    pub lifetime_fec: f64,
    pub lifetime_revenue_eur_per_kwh: f64,
    pub revenue_per_pct_eur: f64,
}

/// Builds the scenario summary from a finished ledger. `duration_years`
/// is the market span the schedule covered (check-up time excluded);
/// rates are annualised with it before extrapolating to the 20%-loss
/// lifetime.
pub fn scenario_report(
    scenario: &str,
    ledger: &ExperimentLedger,
    nominal_energy_wh: f64,
    duration_years: f64,
    degradation_price_eur_kwh: f64,
) -> Result<ScenarioReport, ReportError> {
    let last = ledger
        .checkups
        .last()
        .ok_or(ReportError::MissingData("capacity check-ups"))?;
    let capacity_lost_wh = nominal_energy_wh - last.capacity_wh;
    let capacity_lost_pct = capacity_lost_wh / nominal_energy_wh * 100.0;
    let annual_loss_pct = capacity_lost_pct / duration_years;
    let lifetime_years = lifetime_extrapolate(annual_loss_pct)?;
    let annual_revenue = ledger.revenue_eur / duration_years;
    Ok(ScenarioReport {
        scenario: String::from(scenario),
        revenue_eur: ledger.revenue_eur,
        capacity_lost_pct,
        fec: ledger.fec,
        net_profit_eur: net_profit(
            ledger.revenue_eur,
            capacity_lost_wh,
            degradation_price_eur_kwh,
        ),
        lifetime_years,
        lifetime_fec: ledger.fec / duration_years * lifetime_years,
        lifetime_revenue_eur_per_kwh: lifetime_revenue(
            annual_revenue,
            lifetime_years,
            nominal_energy_wh,
        ),
        revenue_per_pct_eur: ledger.revenue_eur / capacity_lost_pct,
    })
}
