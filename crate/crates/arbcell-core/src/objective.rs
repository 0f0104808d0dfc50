//! The trading objective: weighted revenue minus weighted degradation
//! cost over a dispatch horizon.
//!
//! `objective = theta * revenue - (1 - theta) * degradation_cost`, with
//! revenue in € from power (W) against prices (€/MWh) and degradation
//! cost in € from lost capacity (Wh) times the degradation price (€/kWh).
//! theta = 1 ignores degradation entirely; theta = 0.5 weights both
//! equally.

use alloc::vec::Vec;

use crate::error::OptimizeError;
use crate::linear::LinearCellParams;
use crate::num;

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig {
    /// Revenue weight, in [0.5, 1].
    pub theta: f64,
    /// Degradation price, €/kWh of lost capacity.
    pub degradation_price_eur_kwh: f64,
    /// Optimisation horizon length, steps.
    pub horizon_steps: usize,
    /// Steps committed per receding-horizon window.
    pub commit_steps: usize,
    /// Step length, s (the market clears hourly).
    pub step_s: u64,
}

impl ObjectiveConfig {
    /// Two-day horizon, one day committed, hourly steps.
    pub fn new(theta: f64, degradation_price_eur_kwh: f64) -> Self {
        Self {
            theta,
            degradation_price_eur_kwh,
            horizon_steps: 48,
            commit_steps: 24,
            step_s: crate::HOUR_S,
        }
    }

    pub fn step_h(&self) -> f64 {
        self.step_s as f64 / 3600.0
    }

    /// Degradation price in €/Wh.
    pub fn degradation_price_eur_wh(&self) -> f64 {
        self.degradation_price_eur_kwh / 1000.0
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(0.5..=1.0).contains(&self.theta) {
            return Err("theta must lie in [0.5, 1]");
        }
        if self.degradation_price_eur_kwh < 0.0 {
            return Err("degradation price must be nonnegative");
        }
        if self.horizon_steps == 0 || self.commit_steps == 0 || self.commit_steps > self.horizon_steps
        {
            return Err("need 0 < commit_steps <= horizon_steps");
        }
        Ok(())
    }
}

/// A dispatch plan: per-step power setpoints plus the objective split the
/// optimiser claims for them. Positive power = discharge (sell).
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSchedule {
    pub start_s: u64,
    pub step_s: u64,
    pub power_w: Vec<f64>,
    pub objective_eur: f64,
    pub revenue_eur: f64,
    pub degradation_cost_eur: f64,
}

impl DispatchSchedule {
    pub fn end_s(&self) -> u64 {
        self.start_s + self.step_s * self.power_w.len() as u64
    }
}

/// What a model rollout of a schedule produced: the power actually
/// delivered each step (clamping can cut it below the setpoint) and the
/// capacity the model says the schedule destroyed.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutOutcome {
    pub delivered_w: Vec<f64>,
    pub capacity_lost_wh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveParts {
    pub objective_eur: f64,
    pub revenue_eur: f64,
    pub degradation_cost_eur: f64,
}

/// Revenue of a delivered power profile against hourly prices, €.
/// `P[W] * price[€/MWh] * dt[h] * 1e-6`.
pub fn revenue_eur(delivered_w: &[f64], prices_eur_mwh: &[f64], step_h: f64) -> f64 {
    delivered_w
        .iter()
        .zip(prices_eur_mwh)
        .map(|(p, price)| p * price * step_h * 1e-6)
        .sum()
}

/// Combines a rollout with prices into the weighted objective.
pub fn evaluate_objective(
    prices_eur_mwh: &[f64],
    outcome: &RolloutOutcome,
    cfg: &ObjectiveConfig,
) -> Result<ObjectiveParts, OptimizeError> {
    if outcome.delivered_w.len() != prices_eur_mwh.len() {
        return Err(OptimizeError::GridMismatch);
    }
    let revenue = revenue_eur(&outcome.delivered_w, prices_eur_mwh, cfg.step_h());
    let degradation_cost = outcome.capacity_lost_wh * cfg.degradation_price_eur_wh();
    Ok(ObjectiveParts {
        objective_eur: cfg.theta * revenue - (1.0 - cfg.theta) * degradation_cost,
        revenue_eur: revenue,
        degradation_cost_eur: degradation_cost,
    })
}

/// Linear-model rollout of a commanded schedule: delivery is exact (the
/// LP already respects the SoC window) and capacity loss is the beta1
/// throughput term plus, when `charge_peak` is set, the once-per-horizon
/// beta2 peak-power term.
pub fn linear_rollout(
    powers_w: &[f64],
    params: &LinearCellParams,
    step_h: f64,
    charge_peak: bool,
) -> RolloutOutcome {
    let mut throughput_wh = 0.0;
    let mut peak_w: f64 = 0.0;
    for &p in powers_w {
        throughput_wh += num::abs(p) * step_h;
        peak_w = num::fmax(peak_w, num::abs(p));
    }
    let mut lost = params.beta1 * throughput_wh;
    if charge_peak {
        lost += params.beta2_h * peak_w;
    }
    RolloutOutcome {
        delivered_w: powers_w.to_vec(),
        capacity_lost_wh: lost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(theta: f64) -> ObjectiveConfig {
        ObjectiveConfig::new(theta, 330.0)
    }

    #[test]
    fn all_zero_schedule_scores_zero() {
        let params = LinearCellParams::default_pack();
        let out = linear_rollout(&[0.0; 48], &params, 1.0, true);
        let parts = evaluate_objective(&[40.0; 48], &out, &cfg(0.5)).unwrap();
        assert_eq!(parts.objective_eur, 0.0);
        assert_eq!(parts.revenue_eur, 0.0);
        assert_eq!(parts.degradation_cost_eur, 0.0);
    }

    #[test]
    fn theta_one_is_pure_revenue() {
        let params = LinearCellParams::default_pack();
        let powers = [10.0, -10.0, 5.0, 0.0];
        let prices = [60.0, 10.0, 45.0, 30.0];
        let out = linear_rollout(&powers, &params, 1.0, true);
        let parts = evaluate_objective(&prices, &out, &cfg(1.0)).unwrap();
        assert!(out.capacity_lost_wh > 0.0);
        assert!((parts.objective_eur - parts.revenue_eur).abs() < 1e-18);
    }

    #[test]
    fn two_step_toy_hand_conversion() {
        // Charge 10 W at 10 €/MWh, discharge 10 W at 50 €/MWh:
        // (50 - 10) €/MWh * 10 Wh = 4.0e-4 €.
        let parts = evaluate_objective(
            &[10.0, 50.0],
            &RolloutOutcome {
                delivered_w: alloc::vec![-10.0, 10.0],
                capacity_lost_wh: 0.0,
            },
            &cfg(1.0),
        )
        .unwrap();
        assert!((parts.revenue_eur - 4.0e-4).abs() < 1e-15);
    }

    #[test]
    fn decomposition_identity() {
        let params = LinearCellParams::default_pack();
        let powers = [3.0, -7.5, 10.0, -10.0, 2.0];
        let prices = [12.0, 80.0, 55.0, -5.0, 33.0];
        for theta in [0.5, 0.7, 1.0] {
            let c = cfg(theta);
            let out = linear_rollout(&powers, &params, 1.0, true);
            let parts = evaluate_objective(&prices, &out, &c).unwrap();
            let recomputed =
                theta * parts.revenue_eur - (1.0 - theta) * parts.degradation_cost_eur;
            assert!((parts.objective_eur - recomputed).abs() < 1e-9);
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let out = RolloutOutcome {
            delivered_w: alloc::vec![0.0; 3],
            capacity_lost_wh: 0.0,
        };
        assert_eq!(
            evaluate_objective(&[1.0; 4], &out, &cfg(0.5)).unwrap_err(),
            OptimizeError::GridMismatch
        );
    }
}
