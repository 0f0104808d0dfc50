//! Command-line interface.
//!
//! ```text
//! arbcell prices   [--seed N] [--days N] [--load FILE] [--out DIR]
//! arbcell optimize [--scenario ID] [--seed N] [--days N] [--config F] [--out DIR]
//! arbcell replay   [--scenario ID] [--config F] [--out DIR]
//! arbcell report   [--config F] [--out DIR]
//! arbcell all      [--seed N] [--days N] [--config F] [--out DIR]
//! ```

use std::path::{Path, PathBuf};

use arbcell_core::ScenarioKind;

use crate::config::Config;
use crate::study::{self, OutDirs};
use crate::AppError;

pub const USAGE: &str = "\
arbcell - degradation-aware battery arbitrage simulator

USAGE:
    arbcell <prices|optimize|replay|report|all> [flags]

FLAGS:
    --seed <u64>        price generator seed (default 7)
    --days <n>          simulated market days (default 365)
    --config <path>     configuration file (defaults built in)
    --out <dir>         output directory (default ./out)
    --scenario <id>     one of lm-revenue | lm-profit | pbm-profit |
                        pbm-revenue (optimize/replay; default: the
                        three-scenario study)
    --load <path>       prices: load this CSV instead of synthesizing

SUBCOMMANDS:
    prices     write prices.csv (synthetic, or validated copy of --load)
    optimize   plan dispatch schedules against the scenario's model
    replay     run schedules through the virtual battery tester
    report     build reports and plot-ready figures from saved ledgers
    all        prices + optimize + replay + report for the full study
";

struct Flags {
    seed: u64,
    days: u32,
    config: Option<PathBuf>,
    out: PathBuf,
    scenario: Option<ScenarioKind>,
    load: Option<PathBuf>,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            seed: 7,
            days: 365,
            config: None,
            out: PathBuf::from("out"),
            scenario: None,
            load: None,
        }
    }
}

fn parse_flags(args: &[String]) -> Result<Flags, AppError> {
    let mut flags = Flags::default();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let mut value = |name: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| AppError::Usage(format!("{name} needs a value")))
        };
        match arg.as_str() {
            "--seed" => {
                let v = value("--seed")?;
                flags.seed = v
                    .parse()
                    .map_err(|_| AppError::Usage(format!("bad --seed `{v}`")))?;
            }
            "--days" => {
                let v = value("--days")?;
                flags.days = v
                    .parse()
                    .map_err(|_| AppError::Usage(format!("bad --days `{v}`")))?;
                if flags.days == 0 {
                    return Err(AppError::Usage("--days must be at least 1".into()));
                }
            }
            "--config" => flags.config = Some(PathBuf::from(value("--config")?)),
            "--out" => flags.out = PathBuf::from(value("--out")?),
            "--scenario" => {
                let v = value("--scenario")?;
                flags.scenario = Some(
                    ScenarioKind::from_id(&v)
                        .ok_or_else(|| AppError::Usage(format!("unknown scenario `{v}`")))?,
                );
            }
            "--load" => flags.load = Some(PathBuf::from(value("--load")?)),
            other => return Err(AppError::Usage(format!("unknown flag `{other}`"))),
        }
    }
    Ok(flags)
}

fn load_config(flags: &Flags) -> Result<Config, AppError> {
    match &flags.config {
        Some(path) => Config::load(path),
        None => Ok(Config::default()),
    }
}

fn scenario_list(flags: &Flags) -> Vec<ScenarioKind> {
    match flags.scenario {
        Some(kind) => vec![kind],
        None => ScenarioKind::STUDY.to_vec(),
    }
}

pub fn run(args: &[String]) -> Result<(), AppError> {
    let Some(cmd) = args.first() else {
        return Err(AppError::Usage("missing subcommand".into()));
    };
    if cmd == "--help" || cmd == "help" || cmd == "-h" {
        println!("{USAGE}");
        return Ok(());
    }
    let flags = parse_flags(&args[1..])?;
    let out = OutDirs::new(&flags.out);
    match cmd.as_str() {
        "prices" => {
            let prices =
                study::ensure_prices(&out, flags.seed, flags.days, flags.load.as_deref())?;
            println!(
                "wrote {} ({} hours)",
                out.prices().display(),
                prices.len()
            );
            Ok(())
        }
        "optimize" => {
            let cfg = load_config(&flags)?;
            let prices = prices_or_synthesize(&out, &flags)?;
            for kind in scenario_list(&flags) {
                let plan = study::optimize_scenario(&cfg, kind, &prices, &out)?;
                println!(
                    "{}: objective {:.6} EUR over {} windows -> {}",
                    kind.id(),
                    plan.schedule.objective_eur,
                    plan.windows.len(),
                    out.schedule(kind.id()).display()
                );
            }
            Ok(())
        }
        "replay" => {
            let cfg = load_config(&flags)?;
            let prices = study::load_out_prices(&out)?;
            for kind in scenario_list(&flags) {
                study::replay_scenario(&cfg, kind, &prices, &out)?;
                println!("{}: ledger -> {}", kind.id(), out.ledger(kind.id()).display());
            }
            Ok(())
        }
        "report" => {
            let cfg = load_config(&flags)?;
            let kinds: Vec<ScenarioKind> = scenario_list(&flags)
                .into_iter()
                .filter(|k| out.ledger(k.id()).exists())
                .collect();
            if kinds.is_empty() {
                return Err(AppError::Data(format!(
                    "no ledgers found under {}",
                    out.root.join("ledgers").display()
                )));
            }
            study::write_reports(&cfg, &out, &kinds)?;
            println!("reports -> {}", out.report("scenario_report.csv").display());
            Ok(())
        }
        "all" => {
            let cfg = load_config(&flags)?;
            study::run_all(&cfg, flags.seed, flags.days, &out)?;
            println!("study complete -> {}", out.root.display());
            Ok(())
        }
        other => Err(AppError::Usage(format!("unknown subcommand `{other}`"))),
    }
}

/// `optimize` takes prices from the output tree when present (written by
/// a previous `prices` run), otherwise synthesizes and stores them.
fn prices_or_synthesize(
    out: &OutDirs,
    flags: &Flags,
) -> Result<arbcell_core::PriceSeries, AppError> {
    if Path::exists(&out.prices()) {
        study::load_out_prices(out)
    } else {
        study::ensure_prices(out, flags.seed, flags.days, None)
    }
}
