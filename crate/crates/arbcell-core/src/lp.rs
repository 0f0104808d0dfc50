//! Exact dispatch optimisation for the linear cell model.
//!
//! The problem is a small linear program per horizon window: maximise
//! `theta * revenue - (1-theta) * degradation_cost` where degradation is
//! `beta1 * throughput + beta2 * P_max` (the peak term charged once per
//! window). Power splits into nonnegative charge/discharge parts, SoC is
//! a telescoping sum constrained to its window, and the window must end
//! at or above its starting SoC so stored energy cannot be liquidated for
//! free revenue.
//!
//! The solver is a dense one-phase primal simplex: every constraint is
//! `<=` with nonnegative right-hand side, so the slack basis is feasible
//! from the start. Dantzig pricing with a Bland fallback against cycling;
//! fully deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::OptimizeError;
use crate::linear::LinearCellParams;
use crate::num;
use crate::objective::{DispatchSchedule, ObjectiveConfig};

const PIVOT_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 50_000;

/// max c.x s.t. A x <= b, x >= 0, with all b >= 0.
struct Simplex {
    m: usize,
    n: usize,
    width: usize,
    /// (m+1) x (n+m+1) row-major tableau; last row is the objective.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Simplex {
    fn new(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Self {
        let m = a.len();
        let n = c.len();
        let width = n + m + 1;
        let mut t = vec![0.0; (m + 1) * width];
        for (i, row) in a.iter().enumerate() {
            debug_assert!(b[i] >= 0.0, "simplex requires nonnegative rhs");
            t[i * width..i * width + n].copy_from_slice(row);
            t[i * width + n + i] = 1.0;
            t[i * width + width - 1] = b[i];
        }
        for j in 0..n {
            t[m * width + j] = -c[j];
        }
        Self {
            m,
            n,
            width,
            t,
            basis: (n..n + m).collect(),
        }
    }

    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(row, col);
        for j in 0..w {
            self.t[row * w + j] *= inv;
        }
        for r in 0..=self.m {
            if r == row {
                continue;
            }
            let factor = self.at(r, col);
            if factor == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[r * w + j] -= factor * self.t[row * w + j];
            }
        }
        self.basis[row] = col;
    }

    fn solve(&mut self) -> Result<(), OptimizeError> {
        let mut stalled = 0usize;
        let mut last_obj = self.at(self.m, self.width - 1);
        for _ in 0..MAX_PIVOTS {
            let bland = stalled > 64;
            // Entering column: most negative reduced cost (or first, under
            // Bland's rule when degenerate pivots pile up).
            let mut enter = None;
            let mut best = -PIVOT_EPS;
            for j in 0..self.n + self.m {
                let rc = self.at(self.m, j);
                if rc < -PIVOT_EPS {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        enter = Some(j);
                    }
                }
            }
            let Some(col) = enter else {
                return Ok(());
            };
            // Ratio test; ties to the lowest basis index keep it
            // deterministic and cycle-resistant.
            let mut leave = None;
            let mut best_ratio = f64::INFINITY;
            for r in 0..self.m {
                let a = self.at(r, col);
                if a > PIVOT_EPS {
                    let ratio = self.at(r, self.width - 1) / a;
                    if ratio < best_ratio - 1e-15
                        || (ratio < best_ratio + 1e-15
                            && leave.is_some_and(|l: usize| self.basis[r] < self.basis[l]))
                    {
                        best_ratio = ratio;
                        leave = Some(r);
                    }
                }
            }
            let Some(row) = leave else {
                // Unbounded: cannot happen for the bounded dispatch LP.
                return Err(OptimizeError::NotConverged);
            };
            self.pivot(row, col);
            let obj = self.at(self.m, self.width - 1);
            if obj > last_obj + 1e-15 {
                stalled = 0;
                last_obj = obj;
            } else {
                stalled += 1;
            }
        }
        Err(OptimizeError::NotConverged)
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.at(r, self.width - 1);
            }
        }
        x
    }
}

/// Globally optimal dispatch for the linear model over `prices` (one
/// entry per step). The returned schedule's objective parts are
/// recomputed analytically from the power profile, so the decomposition
/// identity holds exactly.
pub fn optimize_linear(
    prices_eur_mwh: &[f64],
    params: &LinearCellParams,
    cfg: &ObjectiveConfig,
    initial_soc: f64,
    start_s: u64,
) -> Result<DispatchSchedule, OptimizeError> {
    let steps = prices_eur_mwh.len();
    if steps == 0 {
        return Err(OptimizeError::HorizonExceedsPrices);
    }
    if initial_soc < params.soc_min - 1e-9 || initial_soc > params.soc_max + 1e-9 {
        return Err(OptimizeError::Infeasible);
    }
    // Rolled-forward states carry float dust; snap inside the window so
    // every constraint keeps a nonnegative right-hand side.
    let initial_soc = num::clamp(initial_soc, params.soc_min, params.soc_max);
    let dt_h = cfg.step_h();
    let k = dt_h / params.nominal_energy_wh; // SoC per W
    let plim = params.power_limit_w;
    let theta = cfg.theta;
    // Work in micro-euro so every tableau entry is O(1)-O(100).
    let deg_eur_wh = cfg.degradation_price_eur_wh();
    let beta1_cost = (1.0 - theta) * deg_eur_wh * params.beta1 * dt_h * 1e6;
    let beta2_cost = (1.0 - theta) * deg_eur_wh * params.beta2_h * 1e6;

    // Variables: discharge d_t (0..steps), charge c_t (steps..2*steps),
    // peak power (2*steps).
    let n = 2 * steps + 1;
    let peak = 2 * steps;
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(6 * steps + 2);
    let mut b: Vec<f64> = Vec::with_capacity(6 * steps + 2);

    // SoC window at the end of every step + the terminal floor.
    for t in 0..steps {
        let mut hi = vec![0.0; n];
        let mut lo = vec![0.0; n];
        for tau in 0..=t {
            hi[steps + tau] = k; // charging raises SoC
            hi[tau] = -k;
            lo[tau] = k; // discharging lowers SoC
            lo[steps + tau] = -k;
        }
        a.push(hi);
        b.push(params.soc_max - initial_soc);
        a.push(lo);
        b.push(initial_soc - params.soc_min);
    }
    {
        // Terminal SoC >= initial: sum(d - c) * k <= 0.
        let mut row = vec![0.0; n];
        for t in 0..steps {
            row[t] = k;
            row[steps + t] = -k;
        }
        a.push(row);
        b.push(0.0);
    }
    // Power limits and peak coupling.
    for t in 0..steps {
        for var in [t, steps + t] {
            let mut lim = vec![0.0; n];
            lim[var] = 1.0;
            a.push(lim);
            b.push(plim);
            let mut pk = vec![0.0; n];
            pk[var] = 1.0;
            pk[peak] = -1.0;
            a.push(pk);
            b.push(0.0);
        }
    }
    {
        let mut row = vec![0.0; n];
        row[peak] = 1.0;
        a.push(row);
        b.push(plim);
    }

    let mut c = vec![0.0; n];
    for t in 0..steps {
        let rev = theta * prices_eur_mwh[t] * dt_h; // micro-euro per W
        c[t] = rev - beta1_cost;
        c[steps + t] = -rev - beta1_cost;
    }
    c[peak] = -beta2_cost;

    let mut simplex = Simplex::new(&a, &b, &c);
    simplex.solve()?;
    let x = simplex.primal();

    // Net power per step; snap solver dust and resolve the theta = 1
    // degeneracy where simultaneous charge/discharge is objective-free.
    let mut power_w: Vec<f64> = (0..steps).map(|t| x[t] - x[steps + t]).collect();
    for p in power_w.iter_mut() {
        if num::abs(*p) < 1e-9 {
            *p = 0.0;
        }
    }

    Ok(finish_schedule(power_w, prices_eur_mwh, params, cfg, start_s))
}

/// Computes the analytic objective parts for a linear-model power profile
/// and wraps it into a schedule.
pub fn finish_schedule(
    power_w: Vec<f64>,
    prices_eur_mwh: &[f64],
    params: &LinearCellParams,
    cfg: &ObjectiveConfig,
    start_s: u64,
) -> DispatchSchedule {
    let dt_h = cfg.step_h();
    let revenue = crate::objective::revenue_eur(&power_w, prices_eur_mwh, dt_h);
    let out = crate::objective::linear_rollout(&power_w, params, dt_h, true);
    let degradation_cost = out.capacity_lost_wh * cfg.degradation_price_eur_wh();
    DispatchSchedule {
        start_s,
        step_s: cfg.step_s,
        power_w,
        objective_eur: cfg.theta * revenue - (1.0 - cfg.theta) * degradation_cost,
        revenue_eur: revenue,
        degradation_cost_eur: degradation_cost,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn cfg(theta: f64) -> ObjectiveConfig {
        ObjectiveConfig::new(theta, 330.0)
    }

    /// Brute-force oracle: best objective over the 5-level power grid
    /// {-P, -P/2, 0, P/2, P} per step, honouring the same SoC window and
    /// terminal-SoC rule as the LP.
    pub(crate) fn enumerate_best(
        prices: &[f64],
        params: &LinearCellParams,
        cfg: &ObjectiveConfig,
        initial_soc: f64,
    ) -> f64 {
        let steps = prices.len();
        let levels = [
            -params.power_limit_w,
            -params.power_limit_w / 2.0,
            0.0,
            params.power_limit_w / 2.0,
            params.power_limit_w,
        ];
        let dt_h = cfg.step_h();
        let k = dt_h / params.nominal_energy_wh;
        let mut best = f64::NEG_INFINITY;
        let total = 5usize.pow(steps as u32);
        let mut powers = vec![0.0; steps];
        'outer: for code in 0..total {
            let mut c = code;
            let mut soc = initial_soc;
            for t in 0..steps {
                let p = levels[c % 5];
                c /= 5;
                powers[t] = p;
                soc -= p * k;
                if soc < params.soc_min - 1e-12 || soc > params.soc_max + 1e-12 {
                    continue 'outer;
                }
            }
            if soc < initial_soc - 1e-12 {
                continue;
            }
            let sched = finish_schedule(powers.clone(), prices, params, cfg, 0);
            if sched.objective_eur > best {
                best = sched.objective_eur;
            }
        }
        best
    }

    #[test]
    fn constant_prices_with_degradation_stay_idle() {
        let params = LinearCellParams::default_pack();
        let sched = optimize_linear(&[40.0; 24], &params, &cfg(0.5), 0.5, 0).unwrap();
        assert!(sched.power_w.iter().all(|&p| p == 0.0), "{:?}", sched.power_w);
        assert_eq!(sched.objective_eur, 0.0);
    }

    #[test]
    fn two_step_toy_charges_then_discharges() {
        let params = LinearCellParams::default_pack();
        let sched = optimize_linear(&[10.0, 50.0], &params, &cfg(1.0), 0.0, 0).unwrap();
        assert!((sched.power_w[0] + 10.0).abs() < 1e-9, "{:?}", sched.power_w);
        assert!((sched.power_w[1] - 10.0).abs() < 1e-9);
        assert!((sched.revenue_eur - 4.0e-4).abs() < 1e-12);
        // Matches the brute-force oracle on the 5-level grid.
        let oracle = enumerate_best(&[10.0, 50.0], &params, &cfg(1.0), 0.0);
        assert!((sched.objective_eur - oracle).abs() < 1e-12);
    }

    #[test]
    fn lp_dominates_enumeration_on_random_instances() {
        let params = LinearCellParams::default_pack();
        let mut rng = SplitMix64::new(2024);
        for case in 0..60 {
            let steps = 8;
            let prices: Vec<f64> = (0..steps).map(|_| rng.uniform(-20.0, 120.0)).collect();
            let theta = if case % 2 == 0 { 1.0 } else { 0.5 };
            let soc0 = rng.uniform(0.0, 1.0);
            let c = cfg(theta);
            let sched = optimize_linear(&prices, &params, &c, soc0, 0).unwrap();
            let oracle = enumerate_best(&prices, &params, &c, soc0);
            assert!(
                sched.objective_eur >= oracle - 1e-9,
                "case {case}: LP {} < oracle {oracle}",
                sched.objective_eur
            );
        }
    }

    #[test]
    fn price_scaling_invariance_at_theta_one() {
        let params = LinearCellParams::default_pack();
        let mut rng = SplitMix64::new(8);
        let prices: Vec<f64> = (0..24).map(|_| rng.uniform(0.0, 100.0)).collect();
        let scaled: Vec<f64> = prices.iter().map(|p| p * 3.5).collect();
        let c = cfg(1.0);
        let base = optimize_linear(&prices, &params, &c, 0.4, 0).unwrap();
        let scaled_sched = optimize_linear(&scaled, &params, &c, 0.4, 0).unwrap();
        assert!(
            (scaled_sched.objective_eur - 3.5 * base.objective_eur).abs()
                < 1e-9 * (1.0 + scaled_sched.objective_eur.abs()),
            "{} vs {}",
            scaled_sched.objective_eur,
            3.5 * base.objective_eur
        );
        assert_eq!(base.power_w, scaled_sched.power_w);
    }

    #[test]
    fn no_simultaneous_charge_discharge_reported() {
        // theta = 1 leaves charge+discharge pairs objective-free; the
        // cleanup must still report a single net power per step.
        let params = LinearCellParams::default_pack();
        let mut rng = SplitMix64::new(55);
        let prices: Vec<f64> = (0..24).map(|_| rng.uniform(0.0, 80.0)).collect();
        let sched = optimize_linear(&prices, &params, &cfg(1.0), 0.5, 0).unwrap();
        for &p in &sched.power_w {
            assert!(p.abs() <= params.power_limit_w + 1e-9);
        }
    }

    #[test]
    fn schedule_respects_soc_window() {
        let params = LinearCellParams::default_pack().with_soc_window(0.1, 0.9);
        let mut rng = SplitMix64::new(4242);
        let prices: Vec<f64> = (0..48).map(|_| rng.uniform(-10.0, 110.0)).collect();
        let sched = optimize_linear(&prices, &params, &cfg(0.5), 0.5, 0).unwrap();
        let mut state = crate::linear::LinearCellState::at_soc(0.5);
        for &p in &sched.power_w {
            state = crate::linear::linear_step(state, p, 1.0, &params).expect("inside window");
        }
        assert!(state.soc >= 0.5 - 1e-9, "terminal SoC {} fell", state.soc);
    }

    #[test]
    fn objective_decomposition_identity() {
        let params = LinearCellParams::default_pack();
        let mut rng = SplitMix64::new(77);
        for _ in 0..20 {
            let prices: Vec<f64> = (0..12).map(|_| rng.uniform(-30.0, 130.0)).collect();
            let theta = rng.uniform(0.5, 1.0);
            let c = cfg(theta);
            let sched = optimize_linear(&prices, &params, &c, 0.3, 0).unwrap();
            let again =
                theta * sched.revenue_eur - (1.0 - theta) * sched.degradation_cost_eur;
            assert!((sched.objective_eur - again).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_initial_soc() {
        let params = LinearCellParams::default_pack().with_soc_window(0.1, 0.9);
        let err = optimize_linear(&[40.0; 4], &params, &cfg(0.5), 0.95, 0).unwrap_err();
        assert_eq!(err, OptimizeError::Infeasible);
    }

    #[test]
    fn deterministic_given_identical_inputs() {
        let params = LinearCellParams::default_pack();
        let mut rng = SplitMix64::new(100);
        let prices: Vec<f64> = (0..48).map(|_| rng.uniform(0.0, 90.0)).collect();
        let a = optimize_linear(&prices, &params, &cfg(0.5), 0.5, 0).unwrap();
        let b = optimize_linear(&prices, &params, &cfg(0.5), 0.5, 0).unwrap();
        assert_eq!(a, b);
    }
}
