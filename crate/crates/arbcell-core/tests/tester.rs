//! Virtual-tester behaviour: clamped execution, check-ups, ledger
//! bookkeeping and the full experiment loop.

use arbcell_core::harness::{
    CellModel, CheckupProtocol, ExperimentLedger, TesterLimits, VirtualTester,
};
use arbcell_core::market::synthesize_prices;
use arbcell_core::rng::SplitMix64;
use arbcell_core::spm::{SpmModel, SpmParams};
use arbcell_core::{DispatchSchedule, LinearCellParams, HOUR_S};

fn spm_cell(soc: f64) -> CellModel {
    let model = SpmModel::new(SpmParams::default_pack());
    let state = model.fresh_state(soc);
    CellModel::spm(model, state)
}

fn spm_cell_no_sei(soc: f64) -> CellModel {
    let model = SpmModel::new(SpmParams::default_pack().without_sei());
    let state = model.fresh_state(soc);
    CellModel::spm(model, state)
}

#[test]
fn gentle_step_follows_command() {
    // 0.1C mid-SoC: no limits in sight, the logged power tracks the
    // setpoint to within the power-to-current servo error.
    let mut cell = spm_cell_no_sei(0.5);
    let tester = VirtualTester::new(TesterLimits::full_range(), 60.0);
    let mut ledger = ExperimentLedger::new();
    tester
        .execute_clamped(&mut cell, &[1.0], 0, HOUR_S, None, &mut ledger)
        .unwrap();
    assert_eq!(ledger.rows.len(), 4, "one hour logs four 15-minute rows");
    for row in &ledger.rows {
        assert!(
            (row.power_w - 1.0).abs() < 0.01,
            "logged {} W for a 1 W command",
            row.power_w
        );
    }
}

#[test]
fn cv_clamp_engages_near_full() {
    // A 1C charge near 100% SoC must pin the voltage at v_max and
    // deliver less charge than commanded.
    let mut cell = spm_cell_no_sei(0.93);
    let limits = TesterLimits::full_range();
    let tester = VirtualTester::new(limits.clone(), 60.0);
    let mut ledger = ExperimentLedger::new();
    tester
        .execute_clamped(&mut cell, &[-10.0, -10.0], 0, HOUR_S, None, &mut ledger)
        .unwrap();
    let pinned = ledger
        .rows
        .iter()
        .filter(|r| (r.voltage_v - limits.v_max_v).abs() <= 1e-3)
        .count();
    assert!(
        pinned >= ledger.rows.len() / 2,
        "expected CV rows pinned at v_max, got {pinned}/{}",
        ledger.rows.len()
    );
    for row in &ledger.rows {
        assert!(row.voltage_v <= limits.v_max_v + 1e-3);
        // Commanded current magnitude is bounded by |P|/OCV(0) for this
        // cell; the hold may never exceed it.
        assert!(row.mean_abs_current_a <= 10.0 / 2.7 + 1e-9);
    }
    // Net delivered charge is less than the commanded 2 h at 1C.
    let delivered_wh: f64 = ledger.rows.iter().map(|r| r.power_w * 0.25).sum();
    assert!(delivered_wh.abs() < 20.0 * 0.9, "{delivered_wh}");
    // SoC ends high: the hold topped the cell up.
    assert!(cell.soc() > 0.97, "soc {}", cell.soc());
}

#[test]
fn fec_of_constant_current_segment() {
    // FEC = integral |I| / (2 Q) dt: a 1C hour charging plus a 1C hour
    // discharging is exactly one full equivalent cycle.
    let model = SpmModel::new(SpmParams::default_pack().without_sei());
    let mut state = model.fresh_state(0.2);
    let q_c = model.params().nominal_charge_ah * 3600.0;
    let i = model.params().current_1c_a();
    let mut fec = 0.0;
    let dt = 30.0;
    for step in 0..240 {
        let current = if step < 120 { -i } else { i };
        state = model.step(&state, current, dt).unwrap().0;
        fec += current.abs() * dt / (2.0 * q_c);
    }
    assert!((fec - 1.0).abs() < 1e-6, "fec {fec}");
}

#[test]
fn checkup_on_fresh_cell_reads_nominal() {
    let mut cell = spm_cell_no_sei(0.5);
    let tester = VirtualTester::new(TesterLimits::full_range(), 60.0);
    let mut ledger = ExperimentLedger::new();
    let cap = tester
        .run_checkup(&mut cell, &CheckupProtocol::default(), 0, &mut ledger, true)
        .unwrap();
    assert!(
        (cap - 10.0).abs() / 10.0 < 0.02,
        "fresh capacity measured {cap} Wh"
    );
    assert_eq!(ledger.checkups.len(), 1);
}

#[test]
fn checkup_on_linear_cell_is_exact() {
    let params = LinearCellParams::default_pack();
    let mut cell = CellModel::linear(params, 0.5);
    if let CellModel::Linear { state, .. } = &mut cell {
        state.capacity_lost_wh = 1.0;
    }
    let tester = VirtualTester::new(TesterLimits::full_range(), 60.0);
    let mut ledger = ExperimentLedger::new();
    let cap = tester
        .run_checkup(&mut cell, &CheckupProtocol::default(), 0, &mut ledger, true)
        .unwrap();
    assert_eq!(cap, 9.0);
}

#[test]
fn repeated_checkup_degrades_little() {
    // Back-to-back check-ups with no cycling in between: the second
    // measurement may only drop by the check-up's own ageing.
    let mut cell = spm_cell(0.5);
    let tester = VirtualTester::new(TesterLimits::full_range(), 120.0);
    let mut ledger = ExperimentLedger::new();
    let proto = CheckupProtocol::default();
    let first = tester
        .run_checkup(&mut cell, &proto, 0, &mut ledger, true)
        .unwrap();
    let second = tester
        .run_checkup(&mut cell, &proto, ledger.end_t_s, &mut ledger, true)
        .unwrap();
    let drop_pct = (first - second) / 10.0 * 100.0;
    assert!(
        (-0.02..0.1).contains(&drop_pct),
        "repeat check-up moved capacity by {drop_pct}%"
    );
}

#[test]
fn sixty_day_run_has_two_checkups() {
    // Linear cell keeps this cheap; the scheduling arithmetic is the
    // thing under test.
    let prices = synthesize_prices(3, 60);
    let schedule = DispatchSchedule {
        start_s: 0,
        step_s: HOUR_S,
        power_w: vec![0.5; 60 * 24],
        objective_eur: 0.0,
        revenue_eur: 0.0,
        degradation_cost_eur: 0.0,
    };
    let mut cell = CellModel::linear(
        LinearCellParams::default_pack().with_soc_window(0.0, 1.0),
        1.0,
    );
    // Discharging 0.5 W for 1440 h = 720 Wh exceeds the window; use a
    // gentler alternating profile instead.
    let powers: Vec<f64> = (0..60 * 24)
        .map(|h| if h % 2 == 0 { 0.5 } else { -0.5 })
        .collect();
    let schedule = DispatchSchedule {
        power_w: powers,
        ..schedule
    };
    let tester = VirtualTester::new(TesterLimits::full_range(), 900.0);
    let ledger = tester
        .run_experiment(
            &mut cell,
            &schedule,
            &prices,
            30 * 86_400,
            &CheckupProtocol::default(),
            true,
        )
        .unwrap();
    assert_eq!(ledger.checkups.len(), 2);
}

#[test]
fn ledger_fec_matches_logged_current_integral() {
    let prices = synthesize_prices(9, 2);
    let mut rng = SplitMix64::new(31);
    let powers: Vec<f64> = (0..48).map(|_| rng.uniform(-6.0, 6.0)).collect();
    let mut cell = spm_cell(0.5);
    let tester = VirtualTester::new(TesterLimits::full_range(), 60.0);
    let mut ledger = ExperimentLedger::new();
    tester
        .execute_clamped(
            &mut cell,
            &powers,
            0,
            HOUR_S,
            Some(prices.hour_slice(0, 48).unwrap()),
            &mut ledger,
        )
        .unwrap();
    let q_c = 2.7 * 3600.0;
    let integral: f64 = ledger
        .rows
        .iter()
        .map(|r| r.mean_abs_current_a * 900.0 / (2.0 * q_c))
        .sum();
    assert!(
        ((integral - ledger.fec) / ledger.fec).abs() < 1e-6,
        "row integral {integral} vs ledger {}",
        ledger.fec
    );
}

#[test]
fn ledger_revenue_matches_logged_power_times_price() {
    let prices = synthesize_prices(11, 2);
    let mut rng = SplitMix64::new(5);
    let powers: Vec<f64> = (0..48).map(|_| rng.uniform(-8.0, 8.0)).collect();
    let mut cell = spm_cell(0.6);
    let tester = VirtualTester::new(TesterLimits::full_range(), 60.0);
    let mut ledger = ExperimentLedger::new();
    tester
        .execute_clamped(
            &mut cell,
            &powers,
            0,
            HOUR_S,
            Some(prices.hour_slice(0, 48).unwrap()),
            &mut ledger,
        )
        .unwrap();
    let mut recomputed = 0.0;
    for row in &ledger.rows {
        let period_start = row.t_s - 900;
        let price = prices.price_at(period_start).unwrap();
        recomputed += row.power_w * price * 0.25 * 1e-6;
    }
    assert!(
        (recomputed - ledger.revenue_eur).abs() < 1e-9,
        "{recomputed} vs {}",
        ledger.revenue_eur
    );
}

#[test]
fn voltage_rows_stay_inside_the_window() {
    // Two days of saturating full-power trades: every logged voltage
    // stays within [v_min - 1 mV, v_max + 1 mV].
    let limits = TesterLimits::full_range();
    let tester = VirtualTester::new(limits.clone(), 60.0);
    let mut cell = spm_cell(0.5);
    let mut ledger = ExperimentLedger::new();
    let powers: Vec<f64> = (0..48)
        .map(|h| match h % 4 {
            0 | 1 => -10.0,
            _ => 10.0,
        })
        .collect();
    tester
        .execute_clamped(&mut cell, &powers, 0, HOUR_S, None, &mut ledger)
        .unwrap();
    for row in &ledger.rows {
        assert!(
            row.voltage_v >= limits.v_min_v - 1e-3 && row.voltage_v <= limits.v_max_v + 1e-3,
            "row at t={} logged {} V",
            row.t_s,
            row.voltage_v
        );
    }
}

#[test]
fn fec_is_time_reversal_invariant() {
    // FEC depends only on |I|; driving the current sequence backwards
    // accumulates the same count.
    let model = SpmModel::new(SpmParams::default_pack());
    let mut rng = SplitMix64::new(77);
    let currents: Vec<f64> = (0..200).map(|_| rng.uniform(-1.5, 1.5)).collect();
    let q_c = model.params().nominal_charge_ah * 3600.0;
    let fec_of = |seq: &[f64]| -> f64 {
        let mut state = model.fresh_state(0.5);
        let mut fec = 0.0;
        for &i in seq {
            state = model.step(&state, i, 60.0).unwrap().0;
            fec += i.abs() * 60.0 / (2.0 * q_c);
        }
        fec
    };
    let forward = fec_of(&currents);
    let reversed: Vec<f64> = currents.iter().rev().copied().collect();
    let backward = fec_of(&reversed);
    assert!(
        (forward - backward).abs() < 1e-12,
        "{forward} vs {backward}"
    );
}

#[test]
fn checkup_capacities_decline_monotonically_under_cycling() {
    // A week of hard cycling between check-ups: measured capacity is
    // nonincreasing within the relaxation-noise tolerance.
    let prices = synthesize_prices(21, 14);
    let powers: Vec<f64> = (0..14 * 24)
        .map(|h| match h % 3 {
            0 => -10.0,
            1 => 10.0,
            _ => 0.0,
        })
        .collect();
    let schedule = DispatchSchedule {
        start_s: 0,
        step_s: HOUR_S,
        power_w: powers,
        objective_eur: 0.0,
        revenue_eur: 0.0,
        degradation_cost_eur: 0.0,
    };
    let mut cell = spm_cell(0.5);
    let tester = VirtualTester::new(TesterLimits::full_range(), 300.0);
    let ledger = tester
        .run_experiment(
            &mut cell,
            &schedule,
            &prices,
            7 * 86_400,
            &CheckupProtocol::default(),
            true,
        )
        .unwrap();
    assert_eq!(ledger.checkups.len(), 2);
    let tol = 10.0 * 0.005; // 0.5% relaxation noise allowance
    for pair in ledger.checkups.windows(2) {
        assert!(
            pair[1].capacity_wh <= pair[0].capacity_wh + tol,
            "capacity rose between check-ups: {} -> {}",
            pair[0].capacity_wh,
            pair[1].capacity_wh
        );
    }
}
