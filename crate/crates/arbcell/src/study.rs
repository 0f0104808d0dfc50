//! The study pipeline: synthetic (or loaded) prices, per-scenario
//! dispatch optimisation, virtual-tester replay, and report generation.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! prices.csv
//! schedules/<scenario>.csv, <scenario>_summary.csv
//! ledgers/<scenario>.csv, <scenario>_checkups.csv
//! reports/scenario_report.csv, comparison_table.csv
//! figures/capacity_vs_time_<scenario>.csv, ... revenue_vs_degradation.csv
//! ```

use std::path::{Path, PathBuf};

use arbcell_core::harness::{CheckupProtocol, CheckupRecord, LedgerRow};
use arbcell_core::market::synthesize_prices;
use arbcell_core::report::{
    comparison_error, heuristic_degradation_estimate, histogram_2d, scenario_report,
    ProfileSample,
};
use arbcell_core::year::{schedule_year_linear, schedule_year_pbm, YearPlan};
use arbcell_core::{
    CellModel, ObjectiveConfig, PriceSeries, ScenarioKind, SpmModel, VirtualTester,
};

use crate::config::Config;
use crate::files;
use crate::AppError;

pub struct OutDirs {
    pub root: PathBuf,
}

impl OutDirs {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
        }
    }

    pub fn prices(&self) -> PathBuf {
        self.root.join("prices.csv")
    }

    pub fn schedule(&self, id: &str) -> PathBuf {
        self.root.join("schedules").join(format!("{id}.csv"))
    }

    pub fn summary(&self, id: &str) -> PathBuf {
        self.root.join("schedules").join(format!("{id}_summary.csv"))
    }

    pub fn ledger(&self, id: &str) -> PathBuf {
        self.root.join("ledgers").join(format!("{id}.csv"))
    }

    pub fn checkups(&self, id: &str) -> PathBuf {
        self.root.join("ledgers").join(format!("{id}_checkups.csv"))
    }

    pub fn report(&self, name: &str) -> PathBuf {
        self.root.join("reports").join(name)
    }

    pub fn figure(&self, name: &str) -> PathBuf {
        self.root.join("figures").join(name)
    }
}

/// Objective configuration for one scenario (theta comes from the
/// scenario, everything else from the config file).
fn scenario_objective(cfg: &Config, kind: ScenarioKind) -> ObjectiveConfig {
    ObjectiveConfig {
        theta: kind.theta(),
        ..cfg.objective.clone()
    }
}

/// Loads prices from `load`, or synthesizes `days` from `seed`; either
/// way the series is written to `out/prices.csv`.
pub fn ensure_prices(
    out: &OutDirs,
    seed: u64,
    days: u32,
    load: Option<&Path>,
) -> Result<PriceSeries, AppError> {
    let prices = match load {
        Some(path) => files::load_prices(path)?,
        None => synthesize_prices(seed, days),
    };
    files::write_prices(&out.prices(), &prices)?;
    Ok(prices)
}

pub fn load_out_prices(out: &OutDirs) -> Result<PriceSeries, AppError> {
    files::load_prices(&out.prices())
}

/// Plans the year for one scenario and writes the schedule artifacts.
pub fn optimize_scenario(
    cfg: &Config,
    kind: ScenarioKind,
    prices: &PriceSeries,
    out: &OutDirs,
) -> Result<YearPlan, AppError> {
    let objective = scenario_objective(cfg, kind);
    let plan = if kind.uses_pbm() {
        let model = SpmModel::new(cfg.spm.clone());
        let initial = model.fresh_state(0.5);
        // The search explores the same inverter envelope the linear
        // planner is given.
        let search = arbcell_core::pbm_opt::PbmSearchConfig {
            power_limit_w: cfg.linear.power_limit_w,
            ..cfg.search.clone()
        };
        let (plan, _end) = schedule_year_pbm(
            prices,
            &model,
            &kind.tester_limits(),
            &objective,
            &search,
            &cfg.linear,
            initial,
        )?;
        plan
    } else {
        let params = kind.linear_params(&cfg.linear);
        schedule_year_linear(prices, &params, &objective, 0.5)?
    };

    let price_slice = prices
        .hour_slice(plan.schedule.start_s, plan.schedule.power_w.len())
        .map_err(|e| AppError::Data(e.to_string()))?;
    files::write_schedule(
        &out.schedule(kind.id()),
        &files::ScheduleRows {
            start_s: plan.schedule.start_s,
            step_s: plan.schedule.step_s,
            power_w: &plan.schedule.power_w,
            prices: price_slice,
            soc: &plan.soc,
            objective_cum_eur: &plan.objective_cum_eur,
        },
    )?;
    let nominal = cfg.spm.nominal_energy_wh;
    files::write_summary(
        &out.summary(kind.id()),
        &[
            ("scenario", kind.id().to_string()),
            ("theta", format!("{}", objective.theta)),
            ("market_hours", format!("{}", plan.schedule.power_w.len())),
            ("nominal_energy_wh", format!("{nominal}")),
            (
                "predicted_revenue_eur",
                format!("{}", plan.predicted_revenue_eur),
            ),
            (
                "predicted_degradation_wh",
                format!("{}", plan.predicted_degradation_wh),
            ),
            (
                "predicted_objective_eur",
                format!("{}", plan.schedule.objective_eur),
            ),
            ("windows", format!("{}", plan.windows.len())),
        ],
    )?;
    Ok(plan)
}

/// Replays a stored schedule on a fresh physics-model cell in the
/// scenario's tester window and writes the experiment ledger.
pub fn replay_scenario(
    cfg: &Config,
    kind: ScenarioKind,
    prices: &PriceSeries,
    out: &OutDirs,
) -> Result<(), AppError> {
    let (start_s, powers) = files::load_schedule(&out.schedule(kind.id()))?;
    let schedule = arbcell_core::DispatchSchedule {
        start_s,
        step_s: arbcell_core::HOUR_S,
        power_w: powers,
        objective_eur: 0.0,
        revenue_eur: 0.0,
        degradation_cost_eur: 0.0,
    };
    let model = SpmModel::new(cfg.spm.clone());
    let initial = model.fresh_state(0.5);
    let mut cell = CellModel::spm(model, initial);
    let tester = VirtualTester::new(kind.tester_limits(), cfg.replay_sim_dt_s);
    let ledger = tester.run_experiment(
        &mut cell,
        &schedule,
        prices,
        cfg.checkup_every_days as u64 * 86_400,
        &CheckupProtocol::default(),
        cfg.count_checkup_fec,
    )?;
    files::write_ledger(&out.ledger(kind.id()), &ledger.rows)?;
    files::write_checkups(&out.checkups(kind.id()), &ledger.checkups)?;
    Ok(())
}

/// Cumulative FEC at time `t_s`, from the logged rows.
fn fec_at(rows: &[LedgerRow], t_s: u64) -> f64 {
    let mut fec = 0.0;
    for r in rows {
        if r.t_s > t_s {
            break;
        }
        fec = r.fec_cum;
    }
    fec
}

/// Inverts the relaxed OCV curve: SoC whose open-circuit voltage is `v`.
fn soc_from_rest_voltage(model: &SpmModel, v: f64) -> f64 {
    if v <= model.ocv_at_soc(0.0) {
        return 0.0;
    }
    if v >= model.ocv_at_soc(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if model.ocv_at_soc(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct ScenarioFiles {
    rows: Vec<LedgerRow>,
    checkups: Vec<CheckupRecord>,
    summary: std::collections::BTreeMap<String, String>,
}

fn load_scenario_files(out: &OutDirs, kind: ScenarioKind) -> Result<ScenarioFiles, AppError> {
    Ok(ScenarioFiles {
        rows: files::load_ledger(&out.ledger(kind.id()))?,
        checkups: files::load_checkups(&out.checkups(kind.id()))?,
        summary: files::load_summary(&out.summary(kind.id()))?,
    })
}

/// Builds every report and figure from the saved artifacts alone; running
/// it twice over the same inputs produces identical bytes.
pub fn write_reports(cfg: &Config, out: &OutDirs, kinds: &[ScenarioKind]) -> Result<(), AppError> {
    let model = SpmModel::new(cfg.spm.clone());
    let nominal = cfg.spm.nominal_energy_wh;
    let mut scenario_rows = Vec::new();
    let mut comparison_rows = Vec::new();
    let mut rev_vs_deg = Vec::new();

    for &kind in kinds {
        let sf = load_scenario_files(out, kind)?;
        let id = kind.id();
        let summary_path = out.summary(id);
        let market_hours = files::summary_f64(&sf.summary, "market_hours", &summary_path)?;
        let duration_years = market_hours / 8760.0;

        // Reconstruct the ledger aggregates from the rows.
        let last = sf.rows.last().ok_or_else(|| {
            AppError::Data(format!("{}: ledger has no rows", out.ledger(id).display()))
        })?;
        let mut ledger = arbcell_core::ExperimentLedger::new();
        ledger.rows = sf.rows.clone();
        ledger.checkups = sf.checkups.clone();
        ledger.fec = last.fec_cum;
        ledger.revenue_eur = last.revenue_cum_eur;

        let rep = scenario_report(
            id,
            &ledger,
            nominal,
            duration_years,
            cfg.objective.degradation_price_eur_kwh,
        )
        .map_err(|e| AppError::Data(format!("{id}: {e}")))?;
        scenario_rows.push(format!(
            "{},{},{},{},{},{},{},{},{}",
            rep.scenario,
            rep.revenue_eur,
            rep.capacity_lost_pct,
            rep.fec,
            rep.net_profit_eur,
            rep.lifetime_years,
            rep.lifetime_fec,
            rep.lifetime_revenue_eur_per_kwh,
            rep.revenue_per_pct_eur
        ));

        // Simulated-vs-replayed comparison (Table-1 shape).
        let sim_rev = files::summary_f64(&sf.summary, "predicted_revenue_eur", &summary_path)?;
        let sim_deg_wh =
            files::summary_f64(&sf.summary, "predicted_degradation_wh", &summary_path)?;
        let sim_deg_pct = sim_deg_wh / nominal * 100.0;
        let rev_err = comparison_error(sim_rev, rep.revenue_eur)
            .map(|e| format!("{e}"))
            .unwrap_or_else(|_| "nan".to_string());
        let deg_err = comparison_error(sim_deg_pct, rep.capacity_lost_pct)
            .map(|e| format!("{e}"))
            .unwrap_or_else(|_| "nan".to_string());
        comparison_rows.push(format!(
            "{id},{sim_rev},{},{sim_deg_pct},{},{rev_err},{deg_err}",
            rep.revenue_eur, rep.capacity_lost_pct
        ));

        // Figures.
        let day = 86_400.0;
        let mut cap_t = vec![(0.0, nominal)];
        let mut cap_fec = vec![(0.0, nominal)];
        for c in &sf.checkups {
            cap_t.push((c.t_s as f64 / day, c.capacity_wh));
            cap_fec.push((fec_at(&sf.rows, c.t_s), c.capacity_wh));
            rev_vs_deg.push(format!(
                "{id},{},{}",
                (nominal - c.capacity_wh) / nominal * 100.0,
                sf.rows
                    .iter()
                    .take_while(|r| r.t_s <= c.t_s)
                    .last()
                    .map(|r| r.revenue_cum_eur)
                    .unwrap_or(0.0)
            ));
        }
        files::write_xy(
            &out.figure(&format!("capacity_vs_time_{id}.csv")),
            "time_days,capacity_wh",
            &cap_t,
        )?;
        files::write_xy(
            &out.figure(&format!("capacity_vs_fec_{id}.csv")),
            "fec,capacity_wh",
            &cap_fec,
        )?;
        let rev_t: Vec<(f64, f64)> = sf
            .rows
            .iter()
            .map(|r| (r.t_s as f64 / day, r.revenue_cum_eur))
            .collect();
        files::write_xy(
            &out.figure(&format!("revenue_vs_time_{id}.csv")),
            "time_days,revenue_cum_eur",
            &rev_t,
        )?;
        let rev_fec: Vec<(f64, f64)> = sf
            .rows
            .iter()
            .map(|r| (r.fec_cum, r.revenue_cum_eur))
            .collect();
        files::write_xy(
            &out.figure(&format!("revenue_vs_fec_{id}.csv")),
            "fec_cum,revenue_cum_eur",
            &rev_fec,
        )?;

        let hist = histogram_2d(&sf.rows, 0.1, 1.0);
        let hist_rows: Vec<String> = hist
            .cells
            .iter()
            .map(|((resting, vi, pi), frac)| {
                let (v_lo, p_lo) = hist.bin_edges(*vi, *pi);
                let layer = if *resting { "resting" } else { "cycling" };
                format!("{layer},{v_lo},{p_lo},{frac}")
            })
            .collect();
        files::write_table(
            &out.figure(&format!("histogram_{id}.csv")),
            "layer,voltage_lo_v,power_lo_w,time_fraction",
            &hist_rows,
        )?;

        // Heuristic static-rate estimate; rest SoC is recovered from the
        // relaxed voltage (rest rows sit at open circuit).
        let samples: Vec<ProfileSample> = sf
            .rows
            .iter()
            .map(|r| {
                let resting = r.power_w.abs() < 1e-9;
                ProfileSample {
                    t_s: r.t_s,
                    resting,
                    soc: if resting {
                        soc_from_rest_voltage(&model, r.voltage_v)
                    } else {
                        0.0
                    },
                    fec: r.fec_cum,
                }
            })
            .collect();
        let est = heuristic_degradation_estimate(
            &samples,
            cfg.heuristic_calendar_pct_per_h,
            cfg.heuristic_cycle_pct_per_fec,
        );
        let est_rows: Vec<(f64, f64)> =
            est.iter().map(|(t, pct)| (*t as f64 / day, *pct)).collect();
        files::write_xy(
            &out.figure(&format!("heuristic_degradation_{id}.csv")),
            "time_days,estimated_pct",
            &est_rows,
        )?;
    }

    files::write_table(
        &out.report("scenario_report.csv"),
        "scenario,revenue_eur,capacity_lost_pct,fec,net_profit_eur,lifetime_years,lifetime_fec,lifetime_revenue_eur_per_kwh,revenue_per_pct_degradation_eur",
        &scenario_rows,
    )?;
    files::write_table(
        &out.report("comparison_table.csv"),
        "scenario,revenue_sim_eur,revenue_meas_eur,degradation_sim_pct,degradation_meas_pct,revenue_error_pct,degradation_error_pct",
        &comparison_rows,
    )?;
    files::write_table(
        &out.figure("revenue_vs_degradation.csv"),
        "scenario,capacity_lost_pct,revenue_cum_eur",
        &rev_vs_deg,
    )?;
    Ok(())
}

/// End-to-end three-scenario study: prices, plans, replays, reports.
/// The scenarios run on worker threads; each writes only its own files,
/// so the output tree is identical however they interleave.
pub fn run_all(cfg: &Config, seed: u64, days: u32, out: &OutDirs) -> Result<(), AppError> {
    let prices = ensure_prices(out, seed, days, None)?;
    let kinds = ScenarioKind::STUDY;
    let results: Vec<Result<(), AppError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let prices = &prices;
                scope.spawn(move || -> Result<(), AppError> {
                    optimize_scenario(cfg, kind, prices, out)?;
                    replay_scenario(cfg, kind, prices, out)?;
                    Ok(())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });
    for r in results {
        r?;
    }
    write_reports(cfg, out, &kinds)
}
